#ifndef HETMAC_FBLRATE_HPP
#define HETMAC_FBLRATE_HPP

#include <hetmac/allocation.hpp>
#include <hetmac/channel.hpp>
#include <hetmac/error.hpp>
#include <hetmac/infodensity.hpp>
#include <hetmac/signaling.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace hetmac {

/// Q(x) = P[N(0,1) > x].
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Inverse of Q on (0,1).
///
/// Safeguarded Newton on log Q(x) = log p over the bracket [0, 40] (upper tail),
/// falling back to bisection when a step leaves the bracket.
inline double q_inv(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw error(errc::invalid_argument, "Q^{-1} needs p in (0,1), got " + std::to_string(p));
    if (p == 0.5)
        return 0.0;
    if (p > 0.5)
        return -q_inv(1.0 - p);
    const double target = std::log(p);
    double lo = 0.0;
    double hi = 40.0;
    double x = std::sqrt(-2.0 * target);
    for (int it = 0; it < 200; ++it) {
        const double qx = q_function(x);
        const double g = std::log(qx) - target;
        if (g > 0.0)
            lo = x;
        else
            hi = x;
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        double next = x + g * qx / pdf;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

/// DensityStats per (k, l), l <= k, in the internal user order.
using StatsTable = std::vector<std::vector<DensityStats>>;

/// Heterogeneous-blocklength sums for user k.
struct BlockSums {
    double weighted_mi = 0.0;         // sum_l (N_l - N_{l-1}) / N_k * I_{k,l}
    double dispersion_sum = 0.0;      // sum_l (N_l - N_{l-1}) * V_{k,l}
    double weighted_dispersion = 0.0; // sum_l (N_l - N_{l-1}) / N_k * V_{k,l}
    double weighted_third = 0.0;      // sum_l (N_l - N_{l-1}) / N_k * T_{k,l}
    double info_sum = 0.0;            // sum_l (N_l - N_{l-1}) * I_{k,l}
};

inline BlockSums block_sums(const ChannelConfig& cfg, const StatsTable& stats, std::size_t k)
{
    if (k >= cfg.users() || stats.size() <= k || stats[k].size() != k + 1)
        throw error(errc::invalid_argument, "stats table must hold one entry per sub-block of user " +
                                                std::to_string(k + 1));
    BlockSums s;
    const double nk = static_cast<double>(cfg.user(k).blocklength);
    for (std::size_t l = 0; l <= k; ++l) {
        const double len = static_cast<double>(cfg.subblock_length(l));
        const auto& st = stats[k][l];
        s.info_sum += len * st.mi;
        s.dispersion_sum += len * st.dispersion;
        s.weighted_third += len / nk * st.third_moment;
    }
    s.weighted_mi = s.info_sum / nk;
    s.weighted_dispersion = s.dispersion_sum / nk;
    return s;
}

/// Normal-approximation rate of user k with the O(1/N_k) residual dropped:
/// sum_l w_l I_l - sqrt(sum_l (N_l - N_{l-1}) V_l) / N_k * Q^{-1}(eps_k).
inline double fbl_rate(const ChannelConfig& cfg, const StatsTable& stats, std::size_t k)
{
    const auto s = block_sums(cfg, stats, k);
    const auto& u = cfg.user(k);
    return s.weighted_mi - std::sqrt(s.dispersion_sum) / static_cast<double>(u.blocklength) * q_inv(u.eps);
}

/// Q((sum (N_l - N_{l-1}) I_l - log M) / sqrt(sum (N_l - N_{l-1}) V_l)).
inline double epsilon_bound(const ChannelConfig& cfg, const StatsTable& stats, std::size_t k, double log_m)
{
    const auto s = block_sums(cfg, stats, k);
    if (s.dispersion_sum <= 0.0)
        return log_m >= s.info_sum ? 1.0 : 0.0;
    return q_function((s.info_sum - log_m) / std::sqrt(s.dispersion_sum));
}

/// Berry-Esseen absolute constant.
inline constexpr double berry_esseen_c0 = 0.5600;

/// B_k = C0 sum_l w_l E|i - I|^3 / (sum_l w_l V_l)^{3/2}, w_l = (N_l - N_{l-1}) / N_k.
inline double berry_esseen_constant(const ChannelConfig& cfg, const StatsTable& stats, std::size_t k)
{
    const auto s = block_sums(cfg, stats, k);
    if (s.weighted_dispersion <= 0.0)
        throw error(errc::invalid_argument, "Berry-Esseen constant needs positive dispersion");
    return berry_esseen_c0 * s.weighted_third / std::pow(s.weighted_dispersion, 1.5);
}

/// 2 / sqrt(2 pi sum V) + Q(lambda) + 5 B_k / sqrt(N_k).
inline double refined_epsilon(const ChannelConfig& cfg, const StatsTable& stats, std::size_t k, double lambda)
{
    const auto s = block_sums(cfg, stats, k);
    if (s.dispersion_sum <= 0.0)
        throw error(errc::invalid_argument, "refined bound needs positive dispersion");
    const double bk = berry_esseen_constant(cfg, stats, k);
    const double nk = static_cast<double>(cfg.user(k).blocklength);
    return 2.0 / std::sqrt(2.0 * std::numbers::pi * s.dispersion_sum) + q_function(lambda) + 5.0 * bk / std::sqrt(nk);
}

/// lambda_k solving refined_epsilon = eps; empty when the target leaves no room
/// for Q(lambda) at this blocklength.
inline std::optional<double> lambda_k(const ChannelConfig& cfg, const StatsTable& stats, std::size_t k, double eps)
{
    const auto s = block_sums(cfg, stats, k);
    if (s.dispersion_sum <= 0.0)
        return std::nullopt;
    const double nk = static_cast<double>(cfg.user(k).blocklength);
    const double arg = eps - 2.0 / std::sqrt(2.0 * std::numbers::pi * s.dispersion_sum) -
                       5.0 * berry_esseen_constant(cfg, stats, k) / std::sqrt(nk);
    if (!(arg > 0.0 && arg < 1.0))
        return std::nullopt;
    return q_inv(arg);
}

struct UserRate {
    double rate = 0.0; // max(0, normal approximation)
    double weighted_mi = 0.0;
    double dispersion_sum = 0.0;
    double weighted_dispersion = 0.0;
    std::optional<double> berry_esseen;
    std::optional<double> lambda;
};

struct RateReport {
    StatsTable stats;
    std::vector<UserRate> users;
    bool residual_dropped = true; // O(1/N_k) term omitted
};

inline RateReport make_rate_report(const ChannelConfig& cfg, StatsTable stats)
{
    RateReport rep;
    rep.stats = std::move(stats);
    for (std::size_t k = 0; k < cfg.users(); ++k) {
        const auto s = block_sums(cfg, rep.stats, k);
        UserRate u;
        u.weighted_mi = s.weighted_mi;
        u.dispersion_sum = s.dispersion_sum;
        u.weighted_dispersion = s.weighted_dispersion;
        u.rate = std::max(0.0, fbl_rate(cfg, rep.stats, k));
        if (s.weighted_dispersion > 0.0) {
            u.berry_esseen = berry_esseen_constant(cfg, rep.stats, k);
            u.lambda = lambda_k(cfg, rep.stats, k, cfg.user(k).eps);
        }
        rep.users.push_back(u);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Gaussian benchmarks

enum class GaussianDispersion {
    iid,   // i.i.d. complex Gaussian codebook: 2 s / (1 + s) log2^2 e
    shell, // power-shell codebook: (1 - (1 + s)^-2) log2^2 e
};

/// Dispersion of Gaussian signaling at SINR s, bits^2 per complex channel use.
inline double gaussian_dispersion(double s, GaussianDispersion model)
{
    const double log2e_sq = std::numbers::log2e * std::numbers::log2e;
    if (model == GaussianDispersion::iid)
        return 2.0 * s / (1.0 + s) * log2e_sq;
    return (1.0 - 1.0 / ((1.0 + s) * (1.0 + s))) * log2e_sq;
}

/// A run of symbols seen at one SINR.
struct GaussianSegment {
    double length = 0.0;
    double sinr = 0.0;
};

struct BenchmarkOptions {
    GaussianDispersion dispersion = GaussianDispersion::iid;
    bool second_order = true; // false: asymptotic (first-order) corners
};

/// Normal approximation for Gaussian signaling over segments of different SINR.
inline double gaussian_na_rate(const std::vector<GaussianSegment>& segs, double blocklength, double eps,
                               const BenchmarkOptions& opt)
{
    double info = 0.0;
    double disp = 0.0;
    for (const auto& s : segs) {
        info += s.length * std::log2(1.0 + s.sinr);
        disp += s.length * gaussian_dispersion(s.sinr, opt.dispersion);
    }
    double r = info / blocklength;
    if (opt.second_order)
        r -= std::sqrt(disp) / blocklength * q_inv(eps);
    return std::max(0.0, r);
}

using RatePoint = std::array<double, 2>;

struct BenchmarkRegion {
    std::vector<RatePoint> corner_points;
    std::vector<RatePoint> hull; // counter-clockwise, no collinear vertices

    /// Inside the convex hull (within `tol`) and in the nonnegative quadrant.
    bool contains(const RatePoint& p, double tol = 1e-12) const
    {
        if (p[0] < -tol || p[1] < -tol)
            return false;
        if (hull.size() < 3)
            return false;
        for (std::size_t i = 0; i < hull.size(); ++i) {
            const auto& a = hull[i];
            const auto& b = hull[(i + 1) % hull.size()];
            const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            if (cross < -tol)
                return false;
        }
        return true;
    }
};

/// Andrew's monotone chain.
inline std::vector<RatePoint> convex_hull(std::vector<RatePoint> pts)
{
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3)
        return pts;
    auto cross = [](const RatePoint& o, const RatePoint& a, const RatePoint& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<RatePoint> h(2 * pts.size());
    std::size_t n = 0;
    for (const auto& p : pts) {
        while (n >= 2 && cross(h[n - 2], h[n - 1], p) <= 0.0)
            --n;
        h[n++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = n + 1; i-- > 0;) {
        while (n >= lower && cross(h[n - 2], h[n - 1], pts[i]) <= 0.0)
            --n;
        h[n++] = pts[i];
    }
    h.resize(n - 1);
    return h;
}

/// Gaussian signaling with perfect SIC, two users, convexified corner points.
///
/// User 0 has the shorter block; user 1's second sub-block is always
/// interference-free. Each SIC order gives one corner; the single-user axis
/// points and the origin close the region.
inline BenchmarkRegion gaussian_sic_region(const ChannelConfig& cfg, const BenchmarkOptions& opt = {})
{
    if (cfg.users() != 2)
        throw error(errc::unsupported, "the Gaussian SIC benchmark is defined for two users");
    const auto& u0 = cfg.user(0);
    const auto& u1 = cfg.user(1);
    const double n0 = static_cast<double>(u0.blocklength);
    const double n1 = static_cast<double>(u1.blocklength);
    const double tail = n1 - n0;

    const double r0_free = gaussian_na_rate({{n0, u0.snr}}, n0, u0.eps, opt);
    const double r0_int = gaussian_na_rate({{n0, u0.snr / (1.0 + u1.snr)}}, n0, u0.eps, opt);
    const double r1_free = gaussian_na_rate({{n0, u1.snr}, {tail, u1.snr}}, n1, u1.eps, opt);
    const double r1_int = gaussian_na_rate({{n0, u1.snr / (1.0 + u0.snr)}, {tail, u1.snr}}, n1, u1.eps, opt);

    BenchmarkRegion reg;
    reg.corner_points = {{0.0, 0.0}, {r0_free, 0.0}, {r0_free, r1_int}, {r0_int, r1_free}, {0.0, r1_free}};
    reg.hull = convex_hull(reg.corner_points);
    return reg;
}

// ---------------------------------------------------------------------------
// Sweeps

struct LabeledAllocation {
    std::string id;
    MTable m;
    std::optional<SchemeType> scheme; // empty: evaluate both families
};

struct SweepRow {
    std::string id;
    std::string scheme_label; // "1", "2" or "1&2" when both families coincide
    BitAllocation alloc;
    SchemeSignaling signaling;
    RateReport report;
};

/// Monte Carlo stats for every (k, l) with a nonempty sub-block.
inline StatsTable estimate_table(const ChannelConfig& cfg, const SchemeSignaling& sig, const EstimatorOptions& opt)
{
    StatsTable t(cfg.users());
    for (std::size_t k = 0; k < cfg.users(); ++k)
        for (std::size_t l = 0; l <= k; ++l)
            t[k].push_back(cfg.subblock_length(l) > 0 ? estimate_stats(cfg, sig, k, l, opt) : DensityStats{});
    return t;
}

/// Evaluates each allocation under the requested generator families.
///
/// When both families are requested and produce identical constellations a
/// single row labelled "1&2" is emitted. A type-2 variant that needs an odd
/// QAM term is skipped when type 1 is also being reported.
inline std::vector<SweepRow> rate_region_sweep(const ChannelConfig& cfg, const std::vector<LabeledAllocation>& allocs,
                                               const EstimatorOptions& opt)
{
    std::vector<SweepRow> rows;
    for (const auto& a : allocs) {
        std::vector<SchemeType> types;
        if (a.scheme)
            types = {*a.scheme};
        else
            types = {SchemeType::type1, SchemeType::type2};

        std::vector<std::pair<std::string, SchemeSignaling>> variants;
        for (auto t : types) {
            const BitAllocation ba{a.m, t};
            SchemeSignaling sig;
            try {
                sig = build_scheme(cfg, ba);
            } catch (const error& e) {
                if (e.code() == errc::unsupported_order && types.size() > 1 && t == SchemeType::type2)
                    continue;
                throw;
            }
            if (!variants.empty() && variants.front().second.same_constellations(sig)) {
                variants.front().first = "1&2";
                continue;
            }
            variants.emplace_back(std::to_string(static_cast<int>(t)), std::move(sig));
        }
        for (auto& [label, sig] : variants) {
            SweepRow row;
            row.id = a.id;
            row.scheme_label = label;
            row.alloc = BitAllocation{a.m, sig.type};
            row.report = make_rate_report(cfg, estimate_table(cfg, sig, opt));
            row.signaling = std::move(sig);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace hetmac

#endif // HETMAC_FBLRATE_HPP
