#ifndef HETMAC_REPORT_HPP
#define HETMAC_REPORT_HPP

#include <hetmac/channel.hpp>
#include <hetmac/fblrate.hpp>
#include <hetmac/infodensity.hpp>
#include <hetmac/scenario.hpp>

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace hetmac {

inline constexpr int region_csv_version = 1;

namespace detail {

inline std::string num(double v)
{
    if (v == 0.0)
        v = 0.0; // no "-0"
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

inline std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

} // namespace detail

/// One CSV line per record; empty cells where a column does not apply.
///
/// Columns are grouped per input user i (1-based) and sub-block b, so that the
/// file reads in the scenario's own numbering.
class RegionCsv {
public:
    RegionCsv(const ChannelConfig& cfg, std::ostream& os) : cfg_(cfg), os_(os) {}

    void header(const EstimatorOptions& est)
    {
        os_ << "# hetmac region csv v" << region_csv_version << " seed=" << est.seed << " samples=" << est.samples
            << '\n';
        os_ << "kind,id,scheme";
        for_subblocks([&](std::size_t i, std::size_t b) { os_ << ",m_u" << i + 1 << "_b" << b + 1; });
        for (std::size_t i = 0; i < cfg_.users(); ++i)
            os_ << ",R_u" << i + 1;
        for (std::size_t i = 0; i < cfg_.users(); ++i)
            os_ << ",wmi_u" << i + 1;
        for (std::size_t i = 0; i < cfg_.users(); ++i)
            os_ << ",wdisp_u" << i + 1;
        for (const char* col : {"zeta", "mi", "disp", "se"})
            for_subblocks([&](std::size_t i, std::size_t b) { os_ << ',' << col << "_u" << i + 1 << "_b" << b + 1; });
        os_ << '\n';
    }

    void allocation(const SweepRow& row)
    {
        os_ << "alloc," << row.id << ',' << row.scheme_label;
        for_subblocks([&](std::size_t i, std::size_t b) { os_ << ',' << row.alloc.m(k_of(i), b); });
        for (std::size_t i = 0; i < cfg_.users(); ++i)
            os_ << ',' << detail::num(row.report.users[k_of(i)].rate);
        for (std::size_t i = 0; i < cfg_.users(); ++i)
            os_ << ',' << detail::num(row.report.users[k_of(i)].weighted_mi);
        for (std::size_t i = 0; i < cfg_.users(); ++i)
            os_ << ',' << detail::num(row.report.users[k_of(i)].weighted_dispersion);
        for_subblocks([&](std::size_t i, std::size_t b) { os_ << ',' << detail::num(row.signaling.zeta(k_of(i), b)); });
        for_subblocks([&](std::size_t i, std::size_t b) { os_ << ',' << detail::num(row.report.stats[k_of(i)][b].mi); });
        for_subblocks(
            [&](std::size_t i, std::size_t b) { os_ << ',' << detail::num(row.report.stats[k_of(i)][b].dispersion); });
        for_subblocks(
            [&](std::size_t i, std::size_t b) { os_ << ',' << detail::num(row.report.stats[k_of(i)][b].std_error); });
        os_ << '\n';
    }

    /// A rate point with no allocation behind it (benchmark corners and hull).
    void point(const std::string& kind, const std::string& id, const RatePoint& p)
    {
        os_ << kind << ',' << id << ',';
        for_subblocks([&](std::size_t, std::size_t) { os_ << ','; });
        for (std::size_t i = 0; i < cfg_.users(); ++i)
            os_ << ',' << detail::num(p[k_of(i)]);
        blanks(2 * cfg_.users() + 4 * subblocks());
        os_ << '\n';
    }

    /// Gaussian inputs at full power, interference treated as noise.
    void gaussian_tin(const BenchmarkOptions& opt)
    {
        const std::size_t K = cfg_.users();
        std::vector<double> rate(K), wmi(K), wdisp(K);
        for (std::size_t k = 0; k < K; ++k) {
            std::vector<GaussianSegment> segs;
            double disp = 0.0;
            for (std::size_t l = 0; l <= k; ++l) {
                const double mi = gaussian_tin_mi(cfg_, k, l);
                const double sinr = std::exp2(mi) - 1.0;
                const double len = static_cast<double>(cfg_.subblock_length(l));
                segs.push_back({len, sinr});
                wmi[k] += len * mi;
                disp += len * gaussian_dispersion(sinr, opt.dispersion);
            }
            const double nk = static_cast<double>(cfg_.user(k).blocklength);
            wmi[k] /= nk;
            wdisp[k] = disp / nk;
            rate[k] = gaussian_na_rate(segs, nk, cfg_.user(k).eps, opt);
        }
        os_ << "gaussian_tin,,";
        for_subblocks([&](std::size_t, std::size_t) { os_ << ','; });
        for (const auto* v : {&rate, &wmi, &wdisp})
            for (std::size_t i = 0; i < K; ++i)
                os_ << ',' << detail::num((*v)[k_of(i)]);
        for_subblocks([&](std::size_t, std::size_t) { os_ << ','; });
        for_subblocks([&](std::size_t i, std::size_t b) { os_ << ',' << detail::num(gaussian_tin_mi(cfg_, k_of(i), b)); });
        blanks(2 * subblocks());
        os_ << '\n';
    }

private:
    std::size_t k_of(std::size_t input) const { return cfg_.internal_index(input); }

    template <class F>
    void for_subblocks(F&& f) const
    {
        for (std::size_t i = 0; i < cfg_.users(); ++i)
            for (std::size_t b = 0; b <= k_of(i); ++b)
                f(i, b);
    }

    std::size_t subblocks() const
    {
        std::size_t n = 0;
        for_subblocks([&](std::size_t, std::size_t) { ++n; });
        return n;
    }

    void blanks(std::size_t n)
    {
        for (std::size_t i = 0; i < n; ++i)
            os_ << ',';
    }

    const ChannelConfig& cfg_;
    std::ostream& os_;
};

/// Full region report: every sweep row, then Gaussian-TIN and, for two users,
/// the perfect-SIC benchmark corners and hull.
inline void write_region_csv(std::ostream& os, const ChannelConfig& cfg, const EstimatorOptions& est,
                             const std::vector<SweepRow>& rows, const BenchmarkOptions& bench = {})
{
    RegionCsv csv(cfg, os);
    csv.header(est);
    for (const auto& r : rows)
        csv.allocation(r);
    csv.gaussian_tin(bench);
    if (cfg.users() == 2) {
        const auto reg = gaussian_sic_region(cfg, bench);
        for (std::size_t i = 0; i < reg.corner_points.size(); ++i)
            csv.point("benchmark_corner", std::to_string(i + 1), reg.corner_points[i]);
        for (std::size_t i = 0; i < reg.hull.size(); ++i)
            csv.point("benchmark_hull", std::to_string(i + 1), reg.hull[i]);
    }
}

} // namespace hetmac

#endif // HETMAC_REPORT_HPP
