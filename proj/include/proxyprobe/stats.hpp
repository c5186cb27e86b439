// SPDX-License-Identifier: Apache-2.0
#pragma once

// Statistical kernels: CCDF, one-tailed Mann-Whitney U (exact enumeration
// for small pooled samples, tie-corrected normal approximation otherwise),
// Cliff's delta with magnitude labels, Pearson chi-square with Phi, Spearman
// rank correlation, and the deployment-cost aggregations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxyprobe/context.hpp"
#include "proxyprobe/errors.hpp"
#include "proxyprobe/lineage.hpp"
#include "proxyprobe/types.hpp"

namespace proxyprobe::stats {

// ---------------------------------------------------------------------------
// CCDF

struct CcdfPoint {
    double threshold;
    double fraction;  // fraction of the sample >= threshold
};

inline std::vector<CcdfPoint> ccdf(std::vector<double> sample) {
    if (sample.empty()) throw DataError("ccdf: empty sample");
    std::sort(sample.begin(), sample.end());
    std::vector<CcdfPoint> out;
    const double n = static_cast<double>(sample.size());
    for (size_t i = 0; i < sample.size(); ++i) {
        if (i > 0 && sample[i] == sample[i - 1]) continue;
        out.push_back({sample[i], static_cast<double>(sample.size() - i) / n});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ranks with average-rank tie handling (shared by MWU and Spearman)

inline std::vector<double> fractional_ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// One-tailed Mann-Whitney U, H1: a stochastically greater than b

struct MannWhitneyResult {
    double u = 0;        // U statistic for sample a
    double p_value = 1;  // one-tailed
    bool greater = false;  // observed direction favors a
    bool exact = false;
    bool degenerate = false;  // all pooled values identical
};

inline constexpr size_t kExactCutoff = 20;  // pooled size at or below: enumerate

namespace detail {

// P(rank-sum of a size-na subset >= observed) over all C(n, na) subsets.
inline double exact_tail_probability(const std::vector<double>& ranks, size_t na,
                                     double observed_sum) {
    const size_t n = ranks.size();
    std::vector<size_t> idx(na);
    for (size_t i = 0; i < na; ++i) idx[i] = i;
    uint64_t total = 0, hits = 0;
    const double eps = 1e-9;
    while (true) {
        double sum = 0;
        for (size_t i : idx) sum += ranks[i];
        ++total;
        if (sum >= observed_sum - eps) ++hits;
        // next combination
        size_t k = na;
        while (k-- > 0) {
            if (idx[k] < n - na + k) {
                ++idx[k];
                for (size_t j = k + 1; j < na; ++j) idx[j] = idx[j - 1] + 1;
                break;
            }
            if (k == 0) return static_cast<double>(hits) / static_cast<double>(total);
        }
    }
}

}  // namespace detail

inline MannWhitneyResult mann_whitney_one_tailed(const std::vector<double>& a,
                                                 const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw DataError("mann_whitney: empty sample");
    const size_t na = a.size(), nb = b.size(), n = na + nb;
    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());

    MannWhitneyResult result;
    const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;

    bool all_equal = true;
    for (const double v : pooled)
        if (v != pooled[0]) {
            all_equal = false;
            break;
        }
    if (all_equal) {
        result.u = mu;
        result.p_value = 0.5;
        result.degenerate = true;
        return result;
    }

    const auto ranks = fractional_ranks(pooled);
    double rank_sum_a = 0;
    for (size_t i = 0; i < na; ++i) rank_sum_a += ranks[i];
    result.u = rank_sum_a - static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;
    result.greater = result.u > mu;

    if (n <= kExactCutoff) {
        result.exact = true;
        result.p_value = detail::exact_tail_probability(ranks, na, rank_sum_a);
        return result;
    }

    // tie-corrected variance
    double tie_sum = 0;
    {
        std::vector<double> sorted(pooled);
        std::sort(sorted.begin(), sorted.end());
        size_t i = 0;
        while (i < sorted.size()) {
            size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_sum += t * t * t - t;
            i = j + 1;
        }
    }
    const double nn = static_cast<double>(n);
    const double var = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                       ((nn + 1.0) - tie_sum / (nn * (nn - 1.0)));
    const double sd = std::sqrt(std::max(var, 0.0));
    if (sd == 0.0) {
        result.p_value = 0.5;
        result.degenerate = true;
        return result;
    }
    const double z = (result.u - mu - 0.5) / sd;  // continuity correction
    result.p_value = normal_sf(z);
    return result;
}

// ---------------------------------------------------------------------------
// Cliff's delta

enum class DeltaMagnitude : uint8_t { Negligible, Small, Medium, Large };

inline std::string_view delta_magnitude_str(DeltaMagnitude m) {
    switch (m) {
        case DeltaMagnitude::Negligible: return "negligible";
        case DeltaMagnitude::Small: return "small";
        case DeltaMagnitude::Medium: return "medium";
        case DeltaMagnitude::Large: return "large";
    }
    return "?";
}

struct EffectSize {
    double delta = 0;  // in [-1, 1]
    DeltaMagnitude magnitude = DeltaMagnitude::Negligible;
};

inline DeltaMagnitude classify_delta(double delta) {
    const double d = std::fabs(delta);
    if (d <= 0.147) return DeltaMagnitude::Negligible;
    if (d <= 0.33) return DeltaMagnitude::Small;
    if (d <= 0.474) return DeltaMagnitude::Medium;
    return DeltaMagnitude::Large;
}

inline EffectSize cliffs_delta(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw DataError("cliffs_delta: empty sample");
    std::vector<double> sorted_b(b);
    std::sort(sorted_b.begin(), sorted_b.end());
    int64_t net = 0;
    for (const double x : a) {
        const auto lo = std::lower_bound(sorted_b.begin(), sorted_b.end(), x);
        const auto hi = std::upper_bound(sorted_b.begin(), sorted_b.end(), x);
        const int64_t less = lo - sorted_b.begin();           // y < x
        const int64_t greater = sorted_b.end() - hi;          // y > x
        net += less - greater;
    }
    EffectSize out;
    out.delta = static_cast<double>(net) /
                (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    out.magnitude = classify_delta(out.delta);
    return out;
}

// ---------------------------------------------------------------------------
// Pearson chi-square (2x2, no continuity correction) with Phi

enum class PhiMagnitude : uint8_t { Small, Medium, Large };

inline std::string_view phi_magnitude_str(PhiMagnitude m) {
    switch (m) {
        case PhiMagnitude::Small: return "small";
        case PhiMagnitude::Medium: return "medium";
        case PhiMagnitude::Large: return "large";
    }
    return "?";
}

struct PhiEffect {
    double phi = 0;  // >= 0
    PhiMagnitude magnitude = PhiMagnitude::Small;
};

// Zero association (phi = 0) is labeled Small, the weakest available label.
inline PhiMagnitude classify_phi(double phi) {
    const double p = std::fabs(phi);
    if (p <= 0.3) return PhiMagnitude::Small;
    if (p <= 0.5) return PhiMagnitude::Medium;
    return PhiMagnitude::Large;
}

struct ChiSquareResult {
    double chi2 = 0;
    double p_value = 1;
    PhiEffect effect;
};

inline ChiSquareResult chi_square_2x2(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    const double A = static_cast<double>(a), B = static_cast<double>(b),
                 C = static_cast<double>(c), D = static_cast<double>(d);
    const double n = A + B + C + D;
    if (n == 0) throw DataError("chi_square_2x2: empty table");
    const double r1 = A + B, r2 = C + D, c1 = A + C, c2 = B + D;
    if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0)
        throw DataError("chi_square_2x2: zero marginal, test undefined");
    const double det = A * D - B * C;
    ChiSquareResult out;
    out.chi2 = n * det * det / (r1 * r2 * c1 * c2);
    out.p_value = std::erfc(std::sqrt(out.chi2 / 2.0));  // df = 1
    out.effect.phi = std::sqrt(out.chi2 / n);
    out.effect.magnitude = classify_phi(out.effect.phi);
    return out;
}

// ---------------------------------------------------------------------------
// Spearman rank correlation (average-rank ties)

inline std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DataError("spearman: need paired n >= 2");
    const auto rx = fractional_ranks(x);
    const auto ry = fractional_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nullopt;  // zero variance: undefined
    return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Deployment cost aggregation

// Total clone-deployment cost relative to redeploying the logic N times:
// (L + N * p) / (N * L). Strictly decreasing in N.
inline double clone_vs_redeploy_ratio(double logic_gas, double proxy_gas, double n) {
    return (logic_gas + n * proxy_gas) / (n * logic_gas);
}

struct ContextCost {
    std::string context_id;
    std::optional<lineage::DeployStyle> style;
    bool singleton = true;  // size class: N=1 vs N>1
    std::optional<double> avg_gas;
    std::optional<double> avg_gas_excluding_factories;
    std::optional<double> avg_bytecode_len;
    std::optional<BigInt> total_fee_wei;  // omitted when any gas_price missing
    size_t size = 0;
};

// Per-context gas aggregates. On-chain contexts average over proxies plus
// the distinct factory chain of the representative; the excluding-factories
// figure averages over proxies only.
inline std::vector<ContextCost> deployment_cost_report(
    const std::vector<context::UsageContext>& contexts,
    const std::map<Address, lineage::CreationChain>& chains_by_proxy,
    const lineage::CreationIndex& creations, const ContractLookup& contracts) {
    std::vector<ContextCost> out;
    out.reserve(contexts.size());
    for (const auto& ctx : contexts) {
        ContextCost cost;
        cost.context_id = ctx.id;
        cost.style = ctx.style;
        cost.size = ctx.size();
        cost.singleton = ctx.size() == 1;

        BigInt proxy_gas = 0, factory_gas = 0, fee = 0;
        uint64_t known_proxies = 0, factories = 0;
        bool fee_complete = true;
        for (const auto& member : ctx.members) {
            const auto* creation = creations.find(member);
            if (!creation) continue;
            ++known_proxies;
            proxy_gas += creation->gas_used;
            if (creation->root_gas_price)
                fee += creation->gas_used * *creation->root_gas_price;
            else
                fee_complete = false;
        }
        // the representative's chain carries the factory lineage
        auto chain_it = chains_by_proxy.find(ctx.representative);
        if (chain_it != chains_by_proxy.end()) {
            std::set<Address> seen;
            for (const auto& node : chain_it->second.nodes) {
                if (node.label != lineage::NodeLabel::Factory &&
                    node.label != lineage::NodeLabel::ProxyFactory)
                    continue;
                if (!seen.insert(node.address).second) continue;
                const auto* creation = creations.find(node.address);
                if (!creation) continue;
                ++factories;
                factory_gas += creation->gas_used;
                if (creation->root_gas_price)
                    fee += creation->gas_used * *creation->root_gas_price;
                else
                    fee_complete = false;
            }
        }
        if (known_proxies > 0) {
            cost.avg_gas = (proxy_gas + factory_gas).convert_to<double>() /
                           static_cast<double>(known_proxies + factories);
            cost.avg_gas_excluding_factories =
                proxy_gas.convert_to<double>() / static_cast<double>(known_proxies);
            if (fee_complete) cost.total_fee_wei = fee;
        }

        uint64_t with_code = 0;
        uint64_t code_bytes = 0;
        for (const auto& member : ctx.members) {
            const auto* rec = contracts.find(member);
            if (!rec) continue;
            ++with_code;
            code_bytes += rec->bytecode.size();
        }
        if (with_code > 0)
            cost.avg_bytecode_len =
                static_cast<double>(code_bytes) / static_cast<double>(with_code);

        out.push_back(std::move(cost));
    }
    return out;
}

}  // namespace proxyprobe::stats
