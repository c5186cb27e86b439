// SPDX-License-Identifier: Apache-2.0
#pragma once

// Month-bucketed series shared by the transaction-graph and context
// analyses, plus deterministic CSV emission (doubles via to_chars).

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "proxyprobe/jsonl.hpp"
#include "proxyprobe/time.hpp"

namespace proxyprobe {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

struct MonthlyEntry {
    uint64_t numerator = 0;
    uint64_t denominator = 0;

    std::optional<double> ratio() const {
        if (denominator == 0) return std::nullopt;
        return static_cast<double>(numerator) / static_cast<double>(denominator);
    }
};

// Ordered map Month -> (numerator, denominator); months are made contiguous
// over the observed span before emission.
struct MonthlySeries {
    std::map<Month, MonthlyEntry> entries;

    MonthlyEntry& at(Month m) { return entries[m]; }

    void fill_gaps() {
        if (entries.size() < 2) return;
        const Month last = entries.rbegin()->first;
        for (Month m = entries.begin()->first; m < last; m = m.next()) entries[m];
    }

    std::string to_csv() const {
        std::string out = "month,numerator,denominator,ratio\n";
        for (const auto& [month, e] : entries) {
            out += month.str();
            out += ',';
            out += std::to_string(e.numerator);
            out += ',';
            out += std::to_string(e.denominator);
            out += ',';
            if (auto r = e.ratio()) out += format_double(*r);
            out += '\n';
        }
        return out;
    }

    void write_csv(const std::string& path) const { write_file(path, to_csv()); }
};

}  // namespace proxyprobe
