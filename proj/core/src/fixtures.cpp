#include "metalcast/fixtures.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

namespace metalcast {

SeriesMeta ip_fixture_meta() {
    SeriesMeta meta;
    meta.id = "IP";
    meta.group = Group::EcAct;
    meta.transform = Transform::DLog;
    meta.publication_lag = 2;
    return meta;
}

std::string ip_vintage_fixture_csv() {
    const std::map<YearMonth, double> published{
        {{1992, 1}, 100.00}, {{1992, 2}, 100.60}, {{1992, 3}, 100.90}, {{2011, 9}, 155.28},
        {{2011, 10}, 156.28}, {{2011, 11}, 155.94}, {{2011, 12}, 156.59}, {{2012, 1}, 156.63},
        {{2012, 2}, 156.66},
    };
    const YearMonth first{1992, 1};
    const YearMonth last{2012, 2};
    const YearMonth gap_from{1992, 3};
    const YearMonth gap_to{2011, 9};
    const double a = std::log(published.at(gap_from));
    const double b = std::log(published.at(gap_to));
    const double span = gap_to - gap_from;

    const YearMonth vintages[] = {{2012, 1}, {2012, 2}, {2012, 3}, {2012, 4}};
    std::string out = "obs_date";
    for (auto v : vintages) out += "," + v.str();
    out += "\n";
    for (auto d = first; d <= last; d += 1) {
        std::string value;
        if (auto it = published.find(d); it != published.end()) {
            value = fmt::format("{:.2f}", it->second);
        } else {
            const double w = (d - gap_from) / span;
            value = fmt::format("{:.2f}", std::exp(a + w * (b - a)));
        }
        out += d.str();
        for (auto v : vintages) out += d <= v - 2 ? "," + value : std::string(",");
        out += "\n";
    }
    return out;
}

}  // namespace metalcast
