#ifndef HETMAC_INFODENSITY_HPP
#define HETMAC_INFODENSITY_HPP

#include <hetmac/channel.hpp>
#include <hetmac/constellation.hpp>
#include <hetmac/error.hpp>
#include <hetmac/signaling.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace hetmac {

/// Moments of the per-symbol information density, in bits.
struct DensityStats {
    double mi = 0.0;
    double dispersion = 0.0;
    double third_moment = 0.0; // E|i - I|^3
    double std_error = 0.0;    // standard error of `mi`
    std::size_t samples = 0;
};

/// Received-domain TIN kernel for one user: its own points h_k x_k and the
/// Minkowski sum of everyone else's points in the same sub-block.
class TinKernel {
public:
    TinKernel(std::vector<cplx> own, std::vector<cplx> interference)
        : own_(std::move(own)), interference_(std::move(interference))
    {
        if (own_.empty() || interference_.empty())
            throw error(errc::invalid_argument, "TIN kernel needs nonempty point sets");
    }

    /// Kernel of user k in component l; interferers are the other active users.
    static TinKernel for_user(const SchemeSignaling& sig, const ChannelConfig& cfg, std::size_t k, std::size_t l,
                              std::size_t cap = default_point_cap)
    {
        if (k >= cfg.users() || l > k)
            throw error(errc::invalid_argument, "user not active in component");
        double log_card = 0.0;
        for (std::size_t i = l; i < cfg.users(); ++i)
            log_card += sig.at(i, l).bits;
        if (log_card > std::log2(static_cast<double>(cap)))
            throw error(errc::constellation_too_large, "superimposed constellation of component " +
                                                           std::to_string(l + 1) + " exceeds the point cap");
        std::vector<cplx> interference{cplx(0.0, 0.0)};
        for (std::size_t i = l; i < cfg.users(); ++i)
            if (i != k && sig.at(i, l).active())
                interference = minkowski_sum(interference, received_points(sig, cfg, i, l));
        return TinKernel(received_points(sig, cfg, k, l), std::move(interference));
    }

    const std::vector<cplx>& own() const noexcept { return own_; }
    const std::vector<cplx>& interference() const noexcept { return interference_; }

    /// log2 [ sum_b e^{-|y - o_a - s_b|^2} / ((1/|own|) sum_{a',b} e^{-|y - o_a' - s_b|^2}) ].
    double density(cplx y, std::size_t own_index) const
    {
        const std::size_t B = interference_.size();
        double total_max = -std::numeric_limits<double>::infinity();
        // Row-wise log-sum-exp, then combine rows around the global maximum.
        thread_local std::vector<double> row_max, row_sum;
        row_max.assign(own_.size(), 0.0);
        row_sum.assign(own_.size(), 0.0);
        thread_local std::vector<double> expo;
        expo.resize(B);
        for (std::size_t a = 0; a < own_.size(); ++a) {
            const cplx r = y - own_[a];
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < B; ++b) {
                expo[b] = -std::norm(r - interference_[b]);
                mx = std::max(mx, expo[b]);
            }
            double s = 0.0;
            for (std::size_t b = 0; b < B; ++b)
                s += std::exp(expo[b] - mx);
            row_max[a] = mx;
            row_sum[a] = s;
            total_max = std::max(total_max, mx);
        }
        double den = 0.0;
        for (std::size_t a = 0; a < own_.size(); ++a)
            den += std::exp(row_max[a] - total_max) * row_sum[a];
        const double num_log = row_max[own_index] + std::log(row_sum[own_index]);
        const double den_log = total_max + std::log(den) - std::log(static_cast<double>(own_.size()));
        return (num_log - den_log) / std::numbers::ln2;
    }

private:
    std::vector<cplx> own_;
    std::vector<cplx> interference_;
};

/// TIN information density of user k at output y given its transmitted point x_k.
inline double information_density(cplx y, const ChannelConfig& cfg, const SchemeSignaling& sig, std::size_t k,
                                  std::size_t l, cplx x_k)
{
    const auto tx = sig.at(k, l).transmit_points();
    const double tol = 1e-9 * (1.0 + std::abs(x_k));
    const auto it = std::find_if(tx.begin(), tx.end(), [&](const cplx& p) { return std::abs(p - x_k) <= tol; });
    if (it == tx.end())
        throw error(errc::invalid_argument, "point is not in the user's sub-block constellation");
    return TinKernel::for_user(sig, cfg, k, l).density(y, static_cast<std::size_t>(it - tx.begin()));
}

struct EstimatorOptions {
    std::size_t samples = 200000;
    std::uint64_t seed = 1;
    unsigned threads = 0; // 0: hardware concurrency
};

namespace detail {

inline constexpr std::size_t chunk_samples = 4096;

/// Independent generator for (seed, stream, chunk); fixed regardless of scheduling.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    return std::mt19937_64(seq);
}

inline unsigned worker_count(unsigned requested, std::size_t chunks)
{
    unsigned t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(t, chunks));
}

} // namespace detail

/// Sample mean, variance, third absolute central moment and standard error.
inline DensityStats summarize(const std::vector<double>& draws)
{
    DensityStats st;
    st.samples = draws.size();
    if (draws.empty())
        return st;
    const double n = static_cast<double>(draws.size());
    double s = 0.0;
    for (double v : draws)
        s += v;
    st.mi = s / n;
    double s2 = 0.0;
    double s3 = 0.0;
    for (double v : draws) {
        const double d = v - st.mi;
        s2 += d * d;
        s3 += std::abs(d) * d * d;
    }
    st.dispersion = draws.size() > 1 ? s2 / (n - 1.0) : 0.0;
    st.third_moment = s3 / n;
    st.std_error = std::sqrt(st.dispersion / n);
    return st;
}

/// Monte Carlo draws of the information density: uniform own and interfering
/// points, CN(0,1) noise. Chunked so that the draws depend only on
/// (seed, stream), never on the thread count.
inline std::vector<double> sample_density(const TinKernel& kernel, std::size_t samples, std::uint64_t seed,
                                          std::uint64_t stream, unsigned threads = 0)
{
    std::vector<double> draws(samples);
    const std::size_t chunks = (samples + detail::chunk_samples - 1) / detail::chunk_samples;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
        std::uniform_int_distribution<std::size_t> pick_own(0, kernel.own().size() - 1);
        std::uniform_int_distribution<std::size_t> pick_int(0, kernel.interference().size() - 1);
        for (std::size_t c = next++; c < chunks; c = next++) {
            auto rng = detail::substream(seed, stream, c);
            const std::size_t end = std::min(samples, (c + 1) * detail::chunk_samples);
            for (std::size_t i = c * detail::chunk_samples; i < end; ++i) {
                const std::size_t a = pick_own(rng);
                const std::size_t b = pick_int(rng);
                const double zr = gauss(rng);
                const double zi = gauss(rng);
                const cplx y = kernel.own()[a] + kernel.interference()[b] + cplx(zr, zi);
                draws[i] = kernel.density(y, a);
            }
            gauss.reset();
        }
    };
    const unsigned n = detail::worker_count(threads, chunks);
    if (n <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t)
            pool.emplace_back(work);
    }
    return draws;
}

inline constexpr std::size_t min_estimator_samples = 10000;

inline DensityStats estimate_stats(const TinKernel& kernel, const EstimatorOptions& opt, std::uint64_t stream = 0)
{
    if (opt.samples < min_estimator_samples)
        throw error(errc::invalid_argument, "at least " + std::to_string(min_estimator_samples) + " samples required");
    return summarize(sample_density(kernel, opt.samples, opt.seed, stream, opt.threads));
}

/// Stream id for (k, l); independent of the allocation so that identical
/// sub-block signaling gives identical estimates.
inline std::uint64_t stream_id(std::size_t k, std::size_t l) { return (std::uint64_t{k} << 16) | l; }

inline DensityStats estimate_stats(const ChannelConfig& cfg, const SchemeSignaling& sig, std::size_t k, std::size_t l,
                                   const EstimatorOptions& opt, std::size_t cap = default_point_cap)
{
    if (!sig.at(k, l).active())
        return {};
    return estimate_stats(TinKernel::for_user(sig, cfg, k, l, cap), opt, stream_id(k, l));
}

/// Constant-gap lower bound m - log2(5 pi e / 6), clamped at zero.
inline double mi_lower_bound(int bits)
{
    const double gap = std::log2(5.0 * std::numbers::pi * std::numbers::e / 6.0);
    return std::max(0.0, static_cast<double>(bits) - gap);
}

inline double mi_lower_bound(const MTable& m, std::size_t k, std::size_t l) { return mi_lower_bound(m(k, l)); }

/// Gaussian inputs with TIN: log2(1 + SNR_k / (1 + sum of the other SNRs in component l)).
inline double gaussian_tin_mi(const ChannelConfig& cfg, std::size_t k, std::size_t l)
{
    if (k >= cfg.users() || l > k)
        throw error(errc::invalid_argument, "user not active in component");
    double interference = 0.0;
    for (std::size_t i = l; i < cfg.users(); ++i)
        if (i != k)
            interference += cfg.user(i).snr;
    return std::log2(1.0 + cfg.user(k).snr / (1.0 + interference));
}

} // namespace hetmac

#endif // HETMAC_INFODENSITY_HPP
