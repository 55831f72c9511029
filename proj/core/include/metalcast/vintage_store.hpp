#pragma once

#include "metalcast/series.hpp"
#include "metalcast/year_month.hpp"

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace metalcast {

enum class Transform { Log, DLog, D2Log, None };
enum class Group { Prices, EcAct, CU, ET, ExRates, Inventories, Target };
enum class SourceFrequency { Monthly, DailyAveraged };

std::string_view to_string(Transform t);
std::string_view to_string(Group g);
std::string_view to_string(SourceFrequency f);
Transform parse_transform(std::string_view text);
Group parse_group(std::string_view text);
SourceFrequency parse_frequency(std::string_view text);

/// Observations lost at the start of a series by a transform.
int leading_loss(Transform t);

struct SeriesMeta {
    std::string id;
    Group group = Group::EcAct;
    Transform transform = Transform::None;
    int publication_lag = 0;
    SourceFrequency source_frequency = SourceFrequency::Monthly;
};

/// One publication of a series: every observation known at `as_of`.
struct Vintage {
    YearMonth as_of;
    MonthlySeries data;
};

enum class Metal { Aluminum, Copper, Nickel, Zinc };

std::string_view to_string(Metal m);
Metal parse_metal(std::string_view text);
/// Panel ids of the nominal spot price and LME inventory series of a metal.
std::string price_id(Metal m);
std::string inventory_id(Metal m);

/// Real price in USD per metric ton at a fixed CPI base month.
struct RealPriceSeries {
    Metal metal = Metal::Copper;
    YearMonth base_month;
    MonthlySeries values;
};

/// First-release vintages per variable. Built once, then read-only: safe to
/// share across worker threads.
class RealTimePanel {
public:
    /// Adds a variable. Validates that vintages are monthly, that each one
    /// extends its predecessor by exactly one observation, and that shared
    /// observations never change (first release). Throws IntegrityError or
    /// FirstReleaseError.
    void add(SeriesMeta meta, std::vector<Vintage> vintages);

    [[nodiscard]] bool has(std::string_view id) const;
    [[nodiscard]] const SeriesMeta& meta(std::string_view id) const;
    [[nodiscard]] const std::vector<Vintage>& vintages(std::string_view id) const;
    /// Throws MissingVintageError when the variable has no vintage dated `as_of`.
    [[nodiscard]] const Vintage& vintage_at(std::string_view id, YearMonth as_of) const;
    /// Diagonal of the vintage matrix.
    [[nodiscard]] const MonthlySeries& first_release(std::string_view id) const;
    /// Variable ids in insertion order.
    [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }
    [[nodiscard]] std::vector<std::string> ids_in_group(Group g) const;

    /// Months at which every variable has a vintage.
    [[nodiscard]] YearMonth first_vintage() const;
    [[nodiscard]] YearMonth last_vintage() const;
    [[nodiscard]] bool empty() const { return ids_.empty(); }

private:
    struct Entry {
        SeriesMeta meta;
        std::vector<Vintage> vintages;
        MonthlySeries first_release;
    };
    const Entry& entry(std::string_view id) const;

    std::vector<std::string> ids_;
    std::unordered_map<std::string, Entry> entries_;
};

/// Parses the vintage CSV layout:
///   obs_date,<as_of_1>,<as_of_2>,...
/// with one row per observation month and empty (or NA) cells for values
/// not yet published. Returned vintages are ordered by as_of.
std::vector<Vintage> parse_vintage_csv(std::string_view content, const SeriesMeta& meta);
std::vector<Vintage> ingest_vintage_csv(const std::string& path, const SeriesMeta& meta);

/// Two-column `obs_date,value` series. Daily rows (YYYY-MM-DD) are averaged
/// to calendar months.
MonthlySeries parse_series_csv(std::string_view content);

/// Vintages of a series that is never revised, published `lag` months after
/// the observation month, for every as_of in [first_as_of, last_as_of].
std::vector<Vintage> vintages_from_series(const MonthlySeries& series, int lag, YearMonth first_as_of,
                                          YearMonth last_as_of);

/// For each observation date, the value from the earliest vintage containing it.
MonthlySeries merge_first_release(std::span<const Vintage> vintages);

/// Harmonizes index base years: log-differences each vintage and cumulates the
/// growth from 100 at the (common) first observation.
std::vector<Vintage> rebase_index(std::span<const Vintage> vintages);

MonthlySeries apply_transform(const MonthlySeries& series, Transform code);

/// real_t = nominal_t * cpi(base) / cpi(t). Throws CoverageError when the CPI
/// path does not cover a required month.
RealPriceSeries deflate_nominal(Metal metal, const MonthlySeries& nominal, const MonthlySeries& cpi,
                                YearMonth base_month);
MonthlySeries reinflate(const RealPriceSeries& real, const MonthlySeries& cpi);

/// Missing trailing months per variable in the vintage published at `as_of`.
std::map<std::string, int> ragged_edge_profile(const RealTimePanel& panel, YearMonth as_of);

}  // namespace metalcast
