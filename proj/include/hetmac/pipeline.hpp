#ifndef HETMAC_PIPELINE_HPP
#define HETMAC_PIPELINE_HPP

#include <hetmac/allocation.hpp>
#include <hetmac/channel.hpp>
#include <hetmac/detmac.hpp>
#include <hetmac/error.hpp>
#include <hetmac/fblrate.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace hetmac {

inline std::vector<int> derive_n(const ChannelConfig& cfg) { return cfg.gains(); }

inline constexpr std::size_t default_enumeration_cap = 1'000'000;

namespace detail {

// All feasible bit vectors for one component (users l..K-1), in lexicographic order.
inline void component_vectors(const std::vector<int>& n, std::size_t l, bool even_only, std::size_t cap,
                              std::vector<std::vector<int>>& out)
{
    const std::size_t K = n.size();
    const int step = even_only ? 2 : 1;
    std::vector<int> cur(K - l, 0);
    std::vector<int> gains(n.begin() + static_cast<std::ptrdiff_t>(l), n.end());
    auto tails_ok = [&](std::size_t filled) {
        // Tail constraints of the assigned prefix; raising an entry only
        // tightens them, so a failure ends the loop at this position.
        std::vector<std::size_t> idx(filled);
        for (std::size_t i = 0; i < filled; ++i)
            idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
        int tail = 0;
        for (std::size_t j = filled; j-- > 0;) {
            tail += cur[idx[j]];
            if (tail > gains[idx[j]])
                return false;
        }
        return true;
    };
    auto rec = [&](auto&& self, std::size_t pos) -> void {
        if (pos == cur.size()) {
            if (out.size() >= cap)
                throw error(errc::enumeration_too_large, "more than " + std::to_string(cap) + " allocations");
            out.push_back(cur);
            return;
        }
        for (int v = 0; v <= gains[pos]; v += step) {
            cur[pos] = v;
            if (!tails_ok(pos + 1))
                break;
            self(self, pos + 1);
        }
        cur[pos] = 0;
    };
    rec(rec, 0);
}

} // namespace detail

/// Every bit table satisfying the per-component tail constraints, in
/// lexicographic order of the user-major flattening.
///
/// Components constrain disjoint entries, so the set is a product of
/// per-component lattices; its size is checked against `cap` before expansion.
inline std::vector<MTable> enumerate_allocations(const std::vector<int>& n, bool even_only = true,
                                                 std::size_t cap = default_enumeration_cap)
{
    const std::size_t K = n.size();
    if (K == 0)
        throw error(errc::invalid_argument, "no users");
    for (int v : n)
        if (v < 0)
            throw error(errc::invalid_argument, "negative gain");
    std::vector<std::vector<std::vector<int>>> comps(K);
    std::size_t total = 1;
    for (std::size_t l = 0; l < K; ++l) {
        detail::component_vectors(n, l, even_only, cap, comps[l]);
        if (total > cap / comps[l].size())
            throw error(errc::enumeration_too_large, "more than " + std::to_string(cap) + " allocations");
        total *= comps[l].size();
    }
    std::vector<MTable> out;
    out.reserve(total);
    std::vector<std::size_t> pick(K, 0);
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t r = c;
        for (std::size_t l = K; l-- > 0;) {
            pick[l] = r % comps[l].size();
            r /= comps[l].size();
        }
        MTable m(K);
        for (std::size_t l = 0; l < K; ++l)
            for (std::size_t k = l; k < K; ++k)
                m(k, l) = comps[l][pick[l]][k - l];
        out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<MTable> enumerate_allocations(const ChannelConfig& cfg, bool even_only = true,
                                                 std::size_t cap = default_enumeration_cap)
{
    return enumerate_allocations(cfg.gains(), even_only, cap);
}

/// Allocations that meet some tail constraint with equality in every component,
/// i.e. no component has spare levels left for its weakest-constrained users.
inline std::vector<MTable> boundary_allocations(const std::vector<int>& n, const std::vector<MTable>& allocs)
{
    std::vector<MTable> out;
    for (const auto& m : allocs) {
        const auto verdicts = detmac::verify_region(detmac::DetConfig{n, m});
        if (std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.feasible && v.min_slack == 0; }))
            out.push_back(m);
    }
    return out;
}

struct UserCode {
    long info_bits = 0;     // I_k
    long codeword_bits = 0; // L_k
    double rate = 0.0;      // I_k / L_k, 0 when L_k = 0
    bool degenerate = false; // R_k N_k < 1
};

struct CodeParams {
    std::vector<UserCode> users; // internal order
};

/// I_k = floor(R_k N_k), L_k = sum_l (N_l - N_{l-1}) m_{k,l}.
inline CodeParams select_code_params(const ChannelConfig& cfg, const MTable& m, const std::vector<double>& rates)
{
    if (m.users() != cfg.users() || rates.size() != cfg.users())
        throw error(errc::invalid_argument, "allocation, rates and scenario disagree on the user count");
    CodeParams cp;
    for (std::size_t k = 0; k < cfg.users(); ++k) {
        if (!(rates[k] >= 0.0) || !std::isfinite(rates[k]))
            throw error(errc::invalid_argument, "rates must be finite and nonnegative");
        UserCode u;
        for (std::size_t l = 0; l <= k; ++l)
            u.codeword_bits += cfg.subblock_length(l) * m(k, l);
        const double bits = rates[k] * static_cast<double>(cfg.user(k).blocklength);
        u.info_bits = static_cast<long>(std::floor(bits));
        // The normal approximation never exceeds the modulation throughput, but
        // a Monte Carlo overshoot must not yield a code of rate above one.
        u.info_bits = std::min(u.info_bits, u.codeword_bits);
        u.degenerate = bits < 1.0;
        u.rate = u.codeword_bits > 0 ? static_cast<double>(u.info_bits) / static_cast<double>(u.codeword_bits) : 0.0;
        cp.users.push_back(u);
    }
    return cp;
}

enum class SelectionPolicy { sum_rate, max_min };

/// Indices of the rows achieving the best objective; all ties are kept.
inline std::vector<std::size_t> select_rows(const std::vector<SweepRow>& rows, SelectionPolicy policy,
                                            double rel_tol = 1e-12)
{
    std::vector<double> score;
    for (const auto& r : rows) {
        double s = policy == SelectionPolicy::sum_rate ? 0.0 : std::numeric_limits<double>::infinity();
        for (const auto& u : r.report.users)
            s = policy == SelectionPolicy::sum_rate ? s + u.rate : std::min(s, u.rate);
        score.push_back(s);
    }
    std::vector<std::size_t> best;
    if (score.empty())
        return best;
    const double top = *std::max_element(score.begin(), score.end());
    for (std::size_t i = 0; i < score.size(); ++i)
        if (score[i] >= top - rel_tol * std::max(1.0, std::abs(top)))
            best.push_back(i);
    return best;
}

} // namespace hetmac

#endif // HETMAC_PIPELINE_HPP
