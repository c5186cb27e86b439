// SPDX-License-Identifier: Apache-2.0
#pragma once

// UTC instants with second precision plus the civil-date math needed to
// derive months without relying on the process time zone.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>

namespace proxyprobe {

// Seconds since the Unix epoch, always UTC.
using UtcSeconds = int64_t;

namespace civil {

// Howard Hinnant's algorithms, valid far beyond the block-time range.
constexpr int64_t days_from_civil(int64_t y, unsigned m, unsigned d) noexcept {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

constexpr std::tuple<int64_t, unsigned, unsigned> civil_from_days(int64_t z) noexcept {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), m, d};
}

}  // namespace civil

constexpr UtcSeconds utc_from_civil(int64_t y, unsigned mo, unsigned d, unsigned h = 0,
                                    unsigned mi = 0, unsigned s = 0) noexcept {
    return civil::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

inline std::string format_iso8601(UtcSeconds t) {
    int64_t days = t / 86400;
    int64_t sod = t % 86400;
    if (sod < 0) {
        sod += 86400;
        --days;
    }
    const auto [y, mo, d] = civil::civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), mo, d, static_cast<long long>(sod / 3600),
                  static_cast<long long>(sod / 60 % 60), static_cast<long long>(sod % 60));
    return buf;
}

// Accepts the shapes seen in practice, all interpreted as UTC:
//   2022-01-02T03:04:05Z        2022-01-02 03:04:05 UTC
//   2022-01-02 03:04:05         2022-01-02 03:04:05+00[:00]
// Fractional seconds are truncated.
inline std::optional<UtcSeconds> parse_iso8601(std::string_view text) {
    unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    size_t i = 0;
    auto digits = [&](unsigned& out, size_t n) {
        unsigned v = 0;
        if (i + n > text.size()) return false;
        for (size_t k = 0; k < n; ++k) {
            const char c = text[i + k];
            if (c < '0' || c > '9') return false;
            v = v * 10 + static_cast<unsigned>(c - '0');
        }
        out = v;
        i += n;
        return true;
    };
    auto expect = [&](char c) {
        if (i < text.size() && text[i] == c) {
            ++i;
            return true;
        }
        return false;
    };
    if (!digits(y, 4) || !expect('-') || !digits(mo, 2) || !expect('-') || !digits(d, 2))
        return std::nullopt;
    if (i < text.size()) {
        if (text[i] != 'T' && text[i] != ' ') return std::nullopt;
        ++i;
        if (!digits(h, 2) || !expect(':') || !digits(mi, 2) || !expect(':') || !digits(s, 2))
            return std::nullopt;
        if (i < text.size() && text[i] == '.') {
            ++i;
            while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
        }
        // optional UTC designator
        if (i < text.size()) {
            std::string_view rest = text.substr(i);
            if (rest == "Z" || rest == " UTC" || rest == "+00" || rest == "+00:00" ||
                rest == "+0000") {
                i = text.size();
            } else {
                return std::nullopt;
            }
        }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60)
        return std::nullopt;
    return utc_from_civil(y, mo, d, h, mi, s);
}

// Calendar month, the bucketing granularity for every monthly series.
struct Month {
    int32_t year = 0;
    uint8_t month = 1;  // 1..12

    static Month of(UtcSeconds t) {
        int64_t days = t / 86400;
        if (t % 86400 < 0) --days;
        const auto [y, mo, d] = civil::civil_from_days(days);
        (void)d;
        return Month{static_cast<int32_t>(y), static_cast<uint8_t>(mo)};
    }

    Month next() const {
        return month == 12 ? Month{year + 1, 1} : Month{year, static_cast<uint8_t>(month + 1)};
    }

    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u", year, month);
        return buf;
    }

    friend bool operator==(const Month& a, const Month& b) {
        return a.year == b.year && a.month == b.month;
    }
    friend bool operator!=(const Month& a, const Month& b) { return !(a == b); }
    friend bool operator<(const Month& a, const Month& b) {
        return a.year != b.year ? a.year < b.year : a.month < b.month;
    }
    friend bool operator<=(const Month& a, const Month& b) { return a < b || a == b; }
};

}  // namespace proxyprobe
