#ifndef HETMAC_DETMAC_HPP
#define HETMAC_DETMAC_HPP

#include <hetmac/allocation.hpp>
#include <hetmac/error.hpp>
#include <hetmac/f2matrix.hpp>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace hetmac::detmac {

/// Cascaded linear deterministic MAC: per-user gains n_k and a bit table m.
struct DetConfig {
    std::vector<int> n;
    MTable m;

    std::size_t users() const noexcept { return n.size(); }

    /// q_l = max(n_l, ..., n_{K-1}), the dimension of component l.
    int q(std::size_t l) const
    {
        check_component(l);
        return *std::max_element(n.begin() + static_cast<std::ptrdiff_t>(l), n.end());
    }

    void check_component(std::size_t l) const
    {
        if (l >= n.size())
            throw error(errc::invalid_argument, "component " + std::to_string(l) + " out of range");
        if (m.users() != n.size())
            throw error(errc::invalid_argument, "gain vector and bit table disagree on user count");
    }
};

/// Users active in component l, strongest gain first (ties by index).
inline std::vector<std::size_t> component_order(const DetConfig& cfg, std::size_t l)
{
    cfg.check_component(l);
    std::vector<std::size_t> order(cfg.users() - l);
    std::iota(order.begin(), order.end(), l);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cfg.n[a] > cfg.n[b]; });
    return order;
}

struct ComponentVerdict {
    std::size_t component = 0;
    int load = 0;      // total bits in the component
    int capacity = 0;  // q_l
    int sum_slack = 0; // q_l - load
    int min_slack = 0; // tightest tail constraint, <= sum_slack
    bool feasible = true;
};

/// Per-component region check.
///
/// Besides the total-load constraint, every tail of the strength ordering must
/// fit under the weakest gain in it: sum_{i >= j} m_{o_i} <= n_{o_j}. These are
/// exactly the nonnegative zero-block heights of the type-1 generators.
inline std::vector<ComponentVerdict> verify_region(const DetConfig& cfg)
{
    std::vector<ComponentVerdict> out;
    for (std::size_t l = 0; l < cfg.users(); ++l) {
        const auto order = component_order(cfg, l);
        ComponentVerdict v;
        v.component = l;
        v.capacity = cfg.q(l);
        v.load = cfg.m.component_sum(l);
        v.sum_slack = v.capacity - v.load;
        v.min_slack = v.sum_slack;
        int tail = 0;
        for (std::size_t j = order.size(); j-- > 0;) {
            tail += cfg.m(order[j], l);
            v.min_slack = std::min(v.min_slack, cfg.n[order[j]] - tail);
        }
        v.feasible = v.min_slack >= 0;
        out.push_back(v);
    }
    return out;
}

inline bool is_feasible(const DetConfig& cfg)
{
    const auto verdicts = verify_region(cfg);
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.feasible; });
}

/// Rows [f_row, f_row + count) of F land on generator rows [row, row + count).
struct Segment {
    std::size_t row = 0;
    std::size_t f_row = 0;
    std::size_t count = 0;
};

namespace detail {

// Levels count from the noise floor: level v of user k is generator row n_k - 1 - v.
// Consecutive F rows on consecutive rows become one segment.
inline std::vector<Segment> segments_from_levels(int nk, const std::vector<int>& levels)
{
    std::vector<Segment> segs;
    for (std::size_t j = 0; j < levels.size(); ++j) {
        const auto row = static_cast<std::size_t>(nk - 1 - levels[j]);
        if (!segs.empty() && segs.back().row + segs.back().count == row)
            ++segs.back().count;
        else
            segs.push_back(Segment{row, j, 1});
    }
    return segs;
}

} // namespace detail

/// Levels used by every user of component l under the second family, in the
/// strength order, each list descending.
///
/// The weakest user takes the top of its range. Every other user first fills
/// the band above all weaker users' reach, bottom-aligned, and puts what does
/// not fit on the highest levels the weaker users left free.
inline std::vector<std::vector<int>> type2_levels(const DetConfig& cfg, std::size_t l)
{
    const auto order = component_order(cfg, l);
    std::vector<std::vector<int>> out(order.size());
    std::vector<char> used(static_cast<std::size_t>(cfg.q(l)), 0);
    for (std::size_t p = order.size(); p-- > 0;) {
        const std::size_t k = order[p];
        const int m = cfg.m(k, l);
        const int nk = cfg.n[k];
        auto& lv = out[p];
        int lower = 0;
        if (p + 1 < order.size()) {
            const int next = cfg.n[order[p + 1]];
            const int in_band = std::min(m, nk - next);
            for (int v = next + in_band - 1; v >= next; --v)
                lv.push_back(v);
            lower = next;
        } else {
            lower = nk;
        }
        for (int v = lower - 1; v >= 0 && static_cast<int>(lv.size()) < m; --v)
            if (!used[static_cast<std::size_t>(v)])
                lv.push_back(v);
        if (static_cast<int>(lv.size()) < m)
            throw error(errc::infeasible_allocation, "user " + std::to_string(k + 1) + " component " +
                                                         std::to_string(l + 1) + ": only " +
                                                         std::to_string(lv.size()) + " free levels for " +
                                                         std::to_string(m) + " bits");
        for (int v : lv)
            used[static_cast<std::size_t>(v)] = 1;
    }
    return out;
}

/// Where user k's F block sits inside G_{k,l} for the given generator family.
///
/// Type 1 stacks [0; F; 0(bits of weaker users); 0(q - n_k)]: every user sits
/// directly above the weaker ones. Type 2 follows type2_levels.
inline std::vector<Segment> generator_layout(SchemeType type, const DetConfig& cfg, std::size_t k, std::size_t l)
{
    cfg.check_component(l);
    if (k < l || k >= cfg.users())
        throw error(errc::invalid_argument, "user " + std::to_string(k) + " is not active in component " +
                                                std::to_string(l));
    const auto order = component_order(cfg, l);
    const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), k) - order.begin());
    const int m = cfg.m(k, l);
    const int nk = cfg.n[k];
    int after = 0;
    for (std::size_t j = pos + 1; j < order.size(); ++j)
        after += cfg.m(order[j], l);
    if (nk - m - after < 0)
        throw error(errc::infeasible_allocation, "user " + std::to_string(k + 1) + " component " +
                                                     std::to_string(l + 1) + ": zero block height " +
                                                     std::to_string(nk - m - after));
    if (m == 0)
        return {};
    if (type == SchemeType::type1)
        return {Segment{static_cast<std::size_t>(nk - m - after), 0, static_cast<std::size_t>(m)}};
    return detail::segments_from_levels(nk, type2_levels(cfg, l)[pos]);
}

/// Full-rank F blocks, one m_{k,l} x m_{k,l} matrix per (k, l).
struct FBlocks {
    std::vector<std::vector<F2Matrix>> f;

    const F2Matrix& at(std::size_t k, std::size_t l) const { return f.at(k).at(l); }

    static FBlocks identity(const MTable& m)
    {
        FBlocks b;
        b.f.resize(m.users());
        for (std::size_t k = 0; k < m.users(); ++k)
            for (std::size_t l = 0; l <= k; ++l)
                b.f[k].push_back(F2Matrix::identity(static_cast<std::size_t>(m(k, l))));
        return b;
    }

    template <class Rng>
    static FBlocks random(const MTable& m, Rng& rng)
    {
        FBlocks b;
        b.f.resize(m.users());
        for (std::size_t k = 0; k < m.users(); ++k)
            for (std::size_t l = 0; l <= k; ++l)
                b.f[k].push_back(random_full_rank(static_cast<std::size_t>(m(k, l)), rng));
        return b;
    }
};

/// G_{k,l} of shape q_l x m_{k,l}.
inline F2Matrix build_generator(SchemeType type, const DetConfig& cfg, std::size_t k, std::size_t l,
                                const F2Matrix& f)
{
    const auto m = static_cast<std::size_t>(cfg.m(k, l));
    if (f.rows() != m || f.cols() != m)
        throw error(errc::invalid_argument, "F block must be " + std::to_string(m) + "x" + std::to_string(m));
    if (rank_f2(f) != m)
        throw error(errc::invalid_argument, "F block is not full rank");
    const auto layout = generator_layout(type, cfg, k, l);
    F2Matrix g(static_cast<std::size_t>(cfg.q(l)), m);
    for (const auto& s : layout)
        g.place(f.submatrix(s.f_row, 0, s.count, m), s.row, 0);
    return g;
}

inline F2Matrix build_generator_type1(const DetConfig& cfg, std::size_t k, std::size_t l, const FBlocks& f)
{
    return build_generator(SchemeType::type1, cfg, k, l, f.at(k, l));
}

inline F2Matrix build_generator_type2(const DetConfig& cfg, std::size_t k, std::size_t l, const FBlocks& f)
{
    return build_generator(SchemeType::type2, cfg, k, l, f.at(k, l));
}

/// Generators of users l..K-1 for component l, indexed by k - l.
inline std::vector<F2Matrix> component_generators(SchemeType type, const DetConfig& cfg, std::size_t l,
                                                  const FBlocks& f)
{
    std::vector<F2Matrix> out;
    for (std::size_t k = l; k < cfg.users(); ++k)
        out.push_back(build_generator(type, cfg, k, l, f.at(k, l)));
    return out;
}

/// S^{q_l - n_k} G_k for every generator of component l.
inline std::vector<F2Matrix> received_blocks(const DetConfig& cfg, std::size_t l, std::span<const F2Matrix> gens)
{
    const auto q = static_cast<std::size_t>(cfg.q(l));
    if (gens.size() != cfg.users() - l)
        throw error(errc::invalid_argument, "expected one generator per active user");
    std::vector<F2Matrix> out;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        if (gens[i].rows() != q)
            throw error(errc::invalid_argument, "generator row count " + std::to_string(gens[i].rows()) +
                                                    " != q = " + std::to_string(q));
        out.push_back(shift_matrix(q, q - static_cast<std::size_t>(cfg.n[l + i])) * gens[i]);
    }
    return out;
}

/// TIN mutual information of user k in component l, in bits:
/// rank[all shifted generators] - rank[interferers' shifted generators].
inline int det_mutual_info(const DetConfig& cfg, std::size_t l, std::span<const F2Matrix> gens, std::size_t k)
{
    if (k < l || k >= cfg.users())
        throw error(errc::invalid_argument, "user not active in component");
    const auto q = static_cast<std::size_t>(cfg.q(l));
    auto blocks = received_blocks(cfg, l, gens);
    const auto all = rank_f2(hconcat(blocks, q));
    blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(k - l));
    const auto others = rank_f2(hconcat(blocks, q));
    return static_cast<int>(all) - static_cast<int>(others);
}

struct AchievabilityEntry {
    std::size_t user = 0;
    std::size_t component = 0;
    int bits = 0;        // m_{k,l}
    int mutual_info = 0; // rank-based TIN rate
};

struct AchievabilityReport {
    SchemeType type = SchemeType::type1;
    std::vector<ComponentVerdict> region;
    std::vector<AchievabilityEntry> entries;
    bool rank_additive = true; // rank of concatenation == sum of ranks, per component
    bool feasible = true;

    bool achieves_table() const
    {
        return feasible && rank_additive &&
               std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.mutual_info == e.bits; });
    }
};

/// Builds both sides of every rank identity for one allocation and F-block choice.
inline AchievabilityReport verify_achievability(const DetConfig& cfg, SchemeType type, const FBlocks& f)
{
    AchievabilityReport rep;
    rep.type = type;
    rep.region = verify_region(cfg);
    rep.feasible = std::all_of(rep.region.begin(), rep.region.end(), [](const auto& v) { return v.feasible; });
    if (!rep.feasible)
        return rep;
    for (std::size_t l = 0; l < cfg.users(); ++l) {
        const auto gens = component_generators(type, cfg, l, f);
        const auto blocks = received_blocks(cfg, l, gens);
        std::size_t rank_sum = 0;
        for (const auto& b : blocks)
            rank_sum += rank_f2(b);
        if (rank_f2(hconcat(blocks, static_cast<std::size_t>(cfg.q(l)))) != rank_sum)
            rep.rank_additive = false;
        for (std::size_t k = l; k < cfg.users(); ++k)
            rep.entries.push_back({k, l, cfg.m(k, l), det_mutual_info(cfg, l, gens, k)});
    }
    return rep;
}

} // namespace hetmac::detmac

#endif // HETMAC_DETMAC_HPP
