#ifndef HETMAC_SIGNALING_HPP
#define HETMAC_SIGNALING_HPP

#include <hetmac/allocation.hpp>
#include <hetmac/channel.hpp>
#include <hetmac/constellation.hpp>
#include <hetmac/detmac.hpp>
#include <hetmac/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace hetmac {

/// One unit-dmin QAM term of a sub-block constellation. `rows_below` counts the
/// power levels under the term inside the user's own n_k window.
struct QamLayer {
    int bits = 0;
    int rows_below = 0;

    friend bool operator==(const QamLayer&, const QamLayer&) = default;
};

/// Sorts by power level and fuses layers that stack without a gap
/// (QAM(2^a) + 2^{a/2} QAM(2^b) is QAM(2^{a+b})).
inline std::vector<QamLayer> canonical_layers(std::vector<QamLayer> layers)
{
    std::erase_if(layers, [](const QamLayer& l) { return l.bits == 0; });
    std::sort(layers.begin(), layers.end(), [](const auto& a, const auto& b) { return a.rows_below < b.rows_below; });
    std::vector<QamLayer> out;
    for (const auto& l : layers) {
        if (!out.empty() && out.back().rows_below + out.back().bits == l.rows_below)
            out.back().bits += l.bits;
        else
            out.push_back(l);
    }
    return out;
}

/// User k's signaling in sub-block l.
struct SubBlockSignal {
    std::size_t user = 0;
    std::size_t component = 0;
    int bits = 0;
    std::vector<QamLayer> layers;
    std::vector<double> exponents; // q_l - log2 SNR_k + rows_below, per layer
    double energy = 0.0;           // E_{k,l}: average energy before eta and sqrt(P)
    double zeta = 0.0;             // actual average power / P_k
    double tx_scale = 0.0;         // eta_l * sqrt(P_k)

    bool active() const noexcept { return bits > 0; }

    /// Lambda_{k,l}: eta sqrt(P) sum_j 2^{e_j / 2} QAM(2^{b_j}, 1).
    std::vector<cplx> transmit_points() const
    {
        std::vector<cplx> pts{cplx(0.0, 0.0)};
        for (std::size_t j = 0; j < layers.size(); ++j) {
            const auto q = regular_qam(layers[j].bits, 1.0);
            const double amp = tx_scale * std::exp2(exponents[j] / 2.0);
            std::vector<cplx> scaled;
            for (const auto& p : q.points())
                scaled.push_back(p * amp);
            pts = minkowski_sum(pts, scaled);
        }
        return pts;
    }

    Constellation transmit() const { return Constellation(transmit_points()); }
};

struct SchemeSignaling {
    SchemeType type = SchemeType::type1;
    MTable m;
    std::vector<double> eta;                       // per component
    std::vector<std::vector<SubBlockSignal>> subs; // subs[k][l], l <= k

    const SubBlockSignal& at(std::size_t k, std::size_t l) const { return subs.at(k).at(l); }
    double zeta(std::size_t k, std::size_t l) const { return at(k, l).zeta; }
    double energy(std::size_t k, std::size_t l) const { return at(k, l).energy; }

    /// Same transmitted constellations everywhere (layer structure and exponents).
    bool same_constellations(const SchemeSignaling& other) const
    {
        if (subs.size() != other.subs.size())
            return false;
        for (std::size_t k = 0; k < subs.size(); ++k)
            for (std::size_t l = 0; l <= k; ++l) {
                const auto& a = at(k, l);
                const auto& b = other.at(k, l);
                if (a.layers != b.layers || a.exponents != b.exponents || a.tx_scale != b.tx_scale)
                    return false;
            }
        return true;
    }
};

/// Translates the deterministic generator layout into superimposed QAM.
///
/// Every F row segment becomes a QAM term whose power exponent counts the rows
/// under it, with n_k replaced by the exact log2 SNR_k. The per-component
/// factor eta_l = 1/sqrt(max_k E_{k,l}) keeps every user within its budget.
inline SchemeSignaling build_scheme(const ChannelConfig& cfg, const BitAllocation& alloc)
{
    const auto det = cfg.det_config(alloc.m);
    for (const auto& v : detmac::verify_region(det))
        if (!v.feasible)
            throw error(errc::infeasible_allocation, "component " + std::to_string(v.component + 1) + " overloaded by " +
                                                         std::to_string(-v.min_slack) + " bits");
    const std::size_t K = cfg.users();
    SchemeSignaling sig;
    sig.type = alloc.scheme;
    sig.m = alloc.m;
    sig.eta.assign(K, 1.0);
    sig.subs.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        sig.subs[k].resize(k + 1);

    for (std::size_t l = 0; l < K; ++l) {
        const int q = det.q(l);
        double max_energy = 0.0;
        for (std::size_t k = l; k < K; ++k) {
            auto& s = sig.subs[k][l];
            s.user = k;
            s.component = l;
            s.bits = alloc.m(k, l);
            std::vector<QamLayer> raw;
            for (const auto& seg : detmac::generator_layout(alloc.scheme, det, k, l))
                raw.push_back({static_cast<int>(seg.count),
                               cfg.user(k).n - static_cast<int>(seg.row) - static_cast<int>(seg.count)});
            s.layers = canonical_layers(std::move(raw));
            for (const auto& layer : s.layers) {
                if (layer.bits % 2 != 0)
                    throw error(errc::unsupported_order,
                                "user " + std::to_string(k + 1) + " sub-block " + std::to_string(l + 1) + " needs a " +
                                    std::to_string(layer.bits) + "-bit QAM term");
                const double e = static_cast<double>(q) - cfg.user(k).log2_snr + layer.rows_below;
                s.exponents.push_back(e);
                s.energy += std::exp2(e) * (std::exp2(layer.bits) - 1.0) / 6.0;
            }
            max_energy = std::max(max_energy, s.energy);
        }
        if (max_energy > 0.0)
            sig.eta[l] = 1.0 / std::sqrt(max_energy);
        for (std::size_t k = l; k < K; ++k) {
            auto& s = sig.subs[k][l];
            s.zeta = max_energy > 0.0 ? s.energy / max_energy : 0.0;
            s.tx_scale = sig.eta[l] * std::sqrt(cfg.user(k).power);
        }
    }
    return sig;
}

/// h_k Lambda_{k,l}; the single point {0} when the user is silent.
inline std::vector<cplx> received_points(const SchemeSignaling& sig, const ChannelConfig& cfg, std::size_t k,
                                         std::size_t l)
{
    auto pts = sig.at(k, l).transmit_points();
    for (auto& p : pts)
        p *= cfg.user(k).gain;
    return pts;
}

inline constexpr std::size_t default_point_cap = std::size_t{1} << 20;

/// Minkowski sum over the active users of component l of h_i Lambda_{i,l}.
inline Constellation superimpose(const SchemeSignaling& sig, const ChannelConfig& cfg, std::size_t l,
                                 std::size_t cap = default_point_cap)
{
    if (l >= cfg.users())
        throw error(errc::invalid_argument, "component out of range");
    double log_card = 0.0;
    for (std::size_t k = l; k < cfg.users(); ++k)
        log_card += sig.at(k, l).bits;
    if (log_card > std::log2(static_cast<double>(cap)))
        throw error(errc::constellation_too_large, "component " + std::to_string(l + 1) + " has 2^" +
                                                       std::to_string(static_cast<int>(log_card)) + " points");
    std::vector<cplx> pts{cplx(0.0, 0.0)};
    for (std::size_t k = l; k < cfg.users(); ++k)
        if (sig.at(k, l).active())
            pts = minkowski_sum(pts, received_points(sig, cfg, k, l));
    return Constellation(collapse_exact(std::move(pts)));
}

struct Lemma2Verdict {
    std::size_t cardinality = 0;
    std::size_t expected_cardinality = 0;
    double dmin = 0.0;
    double mean_abs = 0.0;
    bool regular = false;
    bool ok = false;
};

/// Builds Lambda_1 + sum_k 2^{(b_1 + ... + b_{k-1})/2} Lambda_k from unit-spaced
/// regular QAMs scaled to `delta`.
inline Constellation qam_ladder(const std::vector<int>& orders, double delta)
{
    if (orders.empty())
        throw error(errc::invalid_argument, "ladder needs at least one order");
    std::vector<cplx> pts{cplx(0.0, 0.0)};
    int below = 0;
    for (int b : orders) {
        const auto q = regular_qam(b, delta);
        const double s = std::exp2(below / 2);
        std::vector<cplx> scaled;
        for (const auto& p : q.points())
            scaled.push_back(p * s);
        pts = minkowski_sum(pts, scaled);
        below += b;
    }
    return Constellation(collapse_exact(std::move(pts)));
}

inline Lemma2Verdict verify_lemma2(const std::vector<int>& orders, double delta)
{
    const int total = std::accumulate(orders.begin(), orders.end(), 0);
    if (total > 16)
        throw error(errc::constellation_too_large, "ladder of " + std::to_string(total) + " bits exceeds the 16-bit budget");
    const auto ladder = qam_ladder(orders, delta);
    Lemma2Verdict v;
    v.cardinality = ladder.cardinality();
    v.expected_cardinality = std::size_t{1} << total;
    v.dmin = ladder.dmin();
    v.mean_abs = std::abs(ladder.mean());
    v.regular = is_regular_qam(ladder, delta);
    v.ok = v.regular && v.cardinality == v.expected_cardinality && std::abs(v.dmin - delta) <= 1e-12 * delta &&
           v.mean_abs <= 1e-12 * delta;
    return v;
}

} // namespace hetmac

#endif // HETMAC_SIGNALING_HPP
