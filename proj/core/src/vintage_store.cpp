#include "metalcast/vintage_store.hpp"

#include "metalcast/csv.hpp"
#include "metalcast/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <utility>

#include <fmt/format.h>

namespace metalcast {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view text, const std::array<std::pair<std::string_view, E>, N>& table,
             std::string_view what) {
    for (const auto& [name, value] : table) {
        if (name == text) return value;
    }
    throw ConfigError(fmt::format("unknown {} '{}'", what, text));
}

template <typename E, std::size_t N>
std::string_view enum_name(E value, const std::array<std::pair<std::string_view, E>, N>& table) {
    for (const auto& [name, v] : table) {
        if (v == value) return name;
    }
    return "?";
}

constexpr std::array<std::pair<std::string_view, Transform>, 4> kTransforms{{
    {"Log", Transform::Log},
    {"DLog", Transform::DLog},
    {"D2Log", Transform::D2Log},
    {"None", Transform::None},
}};

constexpr std::array<std::pair<std::string_view, Group>, 7> kGroups{{
    {"Prices", Group::Prices},
    {"EcAct", Group::EcAct},
    {"CU", Group::CU},
    {"ET", Group::ET},
    {"ExRates", Group::ExRates},
    {"Inventories", Group::Inventories},
    {"Target", Group::Target},
}};

constexpr std::array<std::pair<std::string_view, SourceFrequency>, 2> kFrequencies{{
    {"Monthly", SourceFrequency::Monthly},
    {"DailyAveraged", SourceFrequency::DailyAveraged},
}};

constexpr std::array<std::pair<std::string_view, Metal>, 4> kMetals{{
    {"Aluminum", Metal::Aluminum},
    {"Copper", Metal::Copper},
    {"Nickel", Metal::Nickel},
    {"Zinc", Metal::Zinc},
}};

std::string_view metal_code(Metal m) {
    switch (m) {
        case Metal::Aluminum: return "ALU";
        case Metal::Copper: return "COP";
        case Metal::Nickel: return "NIC";
        case Metal::Zinc: return "ZNC";
    }
    return "?";
}

bool is_missing_cell(std::string_view cell) { return cell.empty() || cell == "NA"; }

YearMonth parse_date_field(std::string_view field, std::size_t line) {
    try {
        return YearMonth::parse(field);
    } catch (const ConfigError&) {
        throw ParseError(fmt::format("invalid date '{}'", field), line);
    }
}

void require_positive(std::span<const double> values, std::string_view what) {
    for (double v : values) {
        if (!(v > 0.0)) throw DomainError(fmt::format("{}: non-positive value {}", what, v));
    }
}

}  // namespace

std::string_view to_string(Transform t) { return enum_name(t, kTransforms); }
std::string_view to_string(Group g) { return enum_name(g, kGroups); }
std::string_view to_string(SourceFrequency f) { return enum_name(f, kFrequencies); }
std::string_view to_string(Metal m) { return enum_name(m, kMetals); }
Transform parse_transform(std::string_view text) { return parse_enum(text, kTransforms, "transform"); }
Group parse_group(std::string_view text) { return parse_enum(text, kGroups, "group"); }
SourceFrequency parse_frequency(std::string_view text) {
    return parse_enum(text, kFrequencies, "source frequency");
}
Metal parse_metal(std::string_view text) { return parse_enum(text, kMetals, "metal"); }

std::string price_id(Metal m) { return fmt::format("{}-P", metal_code(m)); }
std::string inventory_id(Metal m) { return fmt::format("{}-V", metal_code(m)); }

int leading_loss(Transform t) {
    switch (t) {
        case Transform::DLog: return 1;
        case Transform::D2Log: return 2;
        default: return 0;
    }
}

// ---------------------------------------------------------------------------
// RealTimePanel

void RealTimePanel::add(SeriesMeta meta, std::vector<Vintage> vintages) {
    if (entries_.count(meta.id) != 0) throw IntegrityError(fmt::format("duplicate variable '{}'", meta.id));
    if (vintages.empty()) throw IntegrityError(fmt::format("variable '{}' has no vintages", meta.id));
    for (std::size_t k = 0; k < vintages.size(); ++k) {
        const auto& v = vintages[k];
        if (v.data.empty()) {
            throw IntegrityError(fmt::format("{}: empty vintage {}", meta.id, v.as_of.str()));
        }
        if (v.data.last() != v.as_of - meta.publication_lag) {
            throw IntegrityError(fmt::format("{}: vintage {} ends at {}, expected {} (lag {})", meta.id,
                                             v.as_of.str(), v.data.last().str(),
                                             (v.as_of - meta.publication_lag).str(),
                                             meta.publication_lag));
        }
        if (k == 0) continue;
        const auto& prev = vintages[k - 1];
        if (v.as_of - prev.as_of != 1) {
            throw IntegrityError(fmt::format("{}: vintages {} and {} are not consecutive months", meta.id,
                                             prev.as_of.str(), v.as_of.str()));
        }
        if (v.data.start != prev.data.start || v.data.size() != prev.data.size() + 1) {
            throw IntegrityError(fmt::format("{}: vintage {} does not extend {} by one observation",
                                             meta.id, v.as_of.str(), prev.as_of.str()));
        }
    }
    Entry e;
    e.first_release = merge_first_release(vintages);
    e.meta = std::move(meta);
    e.vintages = std::move(vintages);
    ids_.push_back(e.meta.id);
    auto id = e.meta.id;
    entries_.emplace(std::move(id), std::move(e));
}

const RealTimePanel::Entry& RealTimePanel::entry(std::string_view id) const {
    auto it = entries_.find(std::string(id));
    if (it == entries_.end()) throw MissingVintageError(fmt::format("unknown variable '{}'", id));
    return it->second;
}

bool RealTimePanel::has(std::string_view id) const { return entries_.count(std::string(id)) != 0; }
const SeriesMeta& RealTimePanel::meta(std::string_view id) const { return entry(id).meta; }
const std::vector<Vintage>& RealTimePanel::vintages(std::string_view id) const {
    return entry(id).vintages;
}
const MonthlySeries& RealTimePanel::first_release(std::string_view id) const {
    return entry(id).first_release;
}

const Vintage& RealTimePanel::vintage_at(std::string_view id, YearMonth as_of) const {
    const auto& vs = entry(id).vintages;
    const auto offset = as_of - vs.front().as_of;
    if (offset < 0 || offset >= static_cast<int>(vs.size())) {
        throw MissingVintageError(fmt::format("{}: no vintage published at {}", id, as_of.str()));
    }
    return vs[static_cast<std::size_t>(offset)];
}

std::vector<std::string> RealTimePanel::ids_in_group(Group g) const {
    std::vector<std::string> out;
    for (const auto& id : ids_) {
        if (entry(id).meta.group == g) out.push_back(id);
    }
    return out;
}

YearMonth RealTimePanel::first_vintage() const {
    YearMonth best = entries_.at(ids_.front()).vintages.front().as_of;
    for (const auto& id : ids_) best = std::max(best, entries_.at(id).vintages.front().as_of);
    return best;
}

YearMonth RealTimePanel::last_vintage() const {
    YearMonth best = entries_.at(ids_.front()).vintages.back().as_of;
    for (const auto& id : ids_) best = std::min(best, entries_.at(id).vintages.back().as_of);
    return best;
}

// ---------------------------------------------------------------------------
// Ingestion

std::vector<Vintage> parse_vintage_csv(std::string_view content, const SeriesMeta& meta) {
    std::vector<YearMonth> as_of;
    std::vector<YearMonth> rows;
    std::vector<std::vector<std::optional<double>>> cells;  // [row][column]
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        auto line = csv::trim(content.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto fields = csv::split(line);
        if (!have_header) {
            if (fields.front() != "obs_date") throw ParseError("header must start with 'obs_date'", line_no);
            for (std::size_t c = 1; c < fields.size(); ++c) {
                auto d = parse_date_field(fields[c], line_no);
                if (!as_of.empty() && d <= as_of.back()) {
                    throw IntegrityError(fmt::format("{}: vintage column {} duplicated or out of order",
                                                     meta.id, fields[c]));
                }
                as_of.push_back(d);
            }
            have_header = true;
            continue;
        }
        if (fields.size() > as_of.size() + 1) {
            throw ParseError(fmt::format("expected at most {} fields, got {}", as_of.size() + 1, fields.size()),
                             line_no);
        }
        auto date = parse_date_field(fields.front(), line_no);
        if (!rows.empty() && date <= rows.back()) {
            throw IntegrityError(fmt::format("{}: observation dates not increasing at {} (line {})", meta.id,
                                             date.str(), line_no));
        }
        std::vector<std::optional<double>> row(as_of.size());
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (!is_missing_cell(fields[c])) row[c - 1] = csv::to_double(fields[c], line_no);
        }
        rows.push_back(date);
        cells.push_back(std::move(row));
    }

    std::vector<Vintage> out;
    out.reserve(as_of.size());
    for (std::size_t c = 0; c < as_of.size(); ++c) {
        Vintage v{as_of[c], {}};
        std::optional<YearMonth> prev;
        bool ended = false;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& cell = cells[r][c];
            if (!cell) {
                if (prev) ended = true;
                continue;
            }
            if (ended || (prev && rows[r] - *prev != 1)) {
                throw IntegrityError(fmt::format("{}: vintage {} has an interior gap before {}", meta.id,
                                                 as_of[c].str(), rows[r].str()));
            }
            if (!prev) v.data.start = rows[r];
            v.data.values.push_back(*cell);
            prev = rows[r];
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<Vintage> ingest_vintage_csv(const std::string& path, const SeriesMeta& meta) {
    return parse_vintage_csv(csv::read_file(path), meta);
}

MonthlySeries parse_series_csv(std::string_view content) {
    std::vector<std::pair<YearMonth, double>> rows;
    std::vector<int> counts;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos <= content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        auto line = csv::trim(content.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto fields = csv::split(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.front() == "obs_date" || fields.front() == "date") continue;
        }
        if (fields.size() != 2) throw ParseError("expected 'date,value'", line_no);
        const auto& f = fields[0];
        YearMonth month = f.size() == 10 && f[4] == '-' && f[7] == '-' ? parse_date_field(f.substr(0, 7), line_no)
                                                                         : parse_date_field(f, line_no);
        double value = csv::to_double(fields[1], line_no);
        if (!rows.empty() && month < rows.back().first) {
            throw IntegrityError(fmt::format("dates not increasing at line {}", line_no));
        }
        if (!rows.empty() && month == rows.back().first) {
            rows.back().second += value;
            ++counts.back();
        } else {
            rows.emplace_back(month, value);
            counts.push_back(1);
        }
    }
    MonthlySeries out;
    if (rows.empty()) return out;
    out.start = rows.front().first;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first - rows[i - 1].first != 1) {
            throw IntegrityError(fmt::format("gap in series before {}", rows[i].first.str()));
        }
        out.values.push_back(rows[i].second / counts[i]);
    }
    return out;
}

std::vector<Vintage> vintages_from_series(const MonthlySeries& series, int lag, YearMonth first_as_of,
                                          YearMonth last_as_of) {
    std::vector<Vintage> out;
    for (auto as_of = first_as_of; as_of <= last_as_of; as_of += 1) {
        out.push_back({as_of, series.slice(series.start, as_of - lag)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Operations

MonthlySeries merge_first_release(std::span<const Vintage> vintages) {
    MonthlySeries out;
    if (vintages.empty()) return out;
    out.start = vintages.front().data.start;
    for (const auto& v : vintages) {
        if (v.data.empty()) continue;
        if (out.values.empty()) out.start = v.data.start;
        if (v.data.start < out.start) {
            throw IntegrityError(fmt::format("vintage {} starts before earlier vintages", v.as_of.str()));
        }
        for (std::size_t i = 0; i < v.data.size(); ++i) {
            const auto date = v.data.start + static_cast<int>(i);
            const double value = v.data.values[i];
            if (auto known = out.find(date)) {
                if (*known != value) {
                    throw FirstReleaseError(fmt::format("vintage {} revises {} from {} to {}", v.as_of.str(),
                                                        date.str(), *known, value));
                }
            } else if (out.values.empty() || date == out.last() + 1) {
                out.values.push_back(value);
            } else {
                throw IntegrityError(fmt::format("first-release series would have a gap before {}", date.str()));
            }
        }
    }
    return out;
}

std::vector<Vintage> rebase_index(std::span<const Vintage> vintages) {
    std::vector<Vintage> out;
    out.reserve(vintages.size());
    for (const auto& v : vintages) {
        if (v.data.empty()) throw IntegrityError(fmt::format("empty vintage {}", v.as_of.str()));
        if (v.data.start != vintages.front().data.start) {
            throw IntegrityError("rebase_index requires a common first observation date");
        }
        require_positive(v.data.values, fmt::format("vintage {}", v.as_of.str()));
        Vintage r{v.as_of, {v.data.start, std::vector<double>(v.data.size())}};
        double log_level = std::log(100.0);
        r.data.values[0] = 100.0;
        for (std::size_t i = 1; i < v.data.size(); ++i) {
            log_level += std::log(v.data.values[i]) - std::log(v.data.values[i - 1]);
            r.data.values[i] = std::exp(log_level);
        }
        out.push_back(std::move(r));
    }
    return out;
}

MonthlySeries apply_transform(const MonthlySeries& series, Transform code) {
    if (code == Transform::None) return series;
    require_positive(series.values, "log transform");
    std::vector<double> logs(series.size());
    std::transform(series.values.begin(), series.values.end(), logs.begin(),
                   [](double v) { return std::log(v); });
    if (code == Transform::Log) return {series.start, std::move(logs)};
    const int drop = leading_loss(code);
    MonthlySeries out{series.start + drop, {}};
    if (series.size() <= static_cast<std::size_t>(drop)) return out;
    out.values.resize(series.size() - static_cast<std::size_t>(drop));
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const std::size_t t = i + static_cast<std::size_t>(drop);
        out.values[i] = code == Transform::DLog ? logs[t] - logs[t - 1]
                                                : (logs[t] - logs[t - 1]) - (logs[t - 1] - logs[t - 2]);
    }
    return out;
}

RealPriceSeries deflate_nominal(Metal metal, const MonthlySeries& nominal, const MonthlySeries& cpi,
                                YearMonth base_month) {
    if (!cpi.contains(base_month)) {
        throw CoverageError(fmt::format("CPI path does not cover the base month {}", base_month.str()));
    }
    const double base = cpi.at(base_month);
    if (!(base > 0.0)) throw DomainError("non-positive CPI at the base month");
    RealPriceSeries out{metal, base_month, {nominal.start, std::vector<double>(nominal.size())}};
    for (std::size_t i = 0; i < nominal.size(); ++i) {
        const auto date = nominal.start + static_cast<int>(i);
        auto p = cpi.find(date);
        if (!p) {
            throw CoverageError(fmt::format("CPI missing at {} (was the ragged edge nowcast?)", date.str()));
        }
        if (!(*p > 0.0)) throw DomainError(fmt::format("non-positive CPI at {}", date.str()));
        out.values.values[i] = nominal.values[i] * base / *p;
    }
    require_positive(out.values.values, "real price");
    return out;
}

MonthlySeries reinflate(const RealPriceSeries& real, const MonthlySeries& cpi) {
    const double base = cpi.at(real.base_month);
    MonthlySeries out{real.values.start, std::vector<double>(real.values.size())};
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values[i] = real.values.values[i] * cpi.at(out.start + static_cast<int>(i)) / base;
    }
    return out;
}

std::map<std::string, int> ragged_edge_profile(const RealTimePanel& panel, YearMonth as_of) {
    std::map<std::string, int> out;
    for (const auto& id : panel.ids()) {
        const auto& v = panel.vintage_at(id, as_of);
        out[id] = as_of - v.data.last();
    }
    return out;
}

}  // namespace metalcast
