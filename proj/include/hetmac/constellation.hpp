#ifndef HETMAC_CONSTELLATION_HPP
#define HETMAC_CONSTELLATION_HPP

#include <hetmac/error.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace hetmac {

using cplx = std::complex<double>;

namespace detail {

inline bool lex_less(const cplx& a, const cplx& b)
{
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

} // namespace detail

/// Exact closest-pair distance (sweep line over real parts, ordered by imaginary part).
inline double min_distance(const std::vector<cplx>& pts)
{
    if (pts.size() < 2)
        throw error(errc::invalid_argument, "minimum distance needs at least two points");
    std::vector<cplx> p = pts;
    std::sort(p.begin(), p.end(), detail::lex_less);
    auto by_imag = [](const cplx& a, const cplx& b) {
        return a.imag() < b.imag() || (a.imag() == b.imag() && a.real() < b.real());
    };
    std::multiset<cplx, decltype(by_imag)> active(by_imag);
    double best = std::numeric_limits<double>::infinity();
    std::size_t left = 0;
    for (const auto& z : p) {
        while (left < p.size() && z.real() - p[left].real() > best)
            active.erase(active.find(p[left++]));
        const double lo_im = z.imag() - best;
        auto it = active.lower_bound(cplx(-std::numeric_limits<double>::infinity(), lo_im));
        for (; it != active.end() && it->imag() <= z.imag() + best; ++it)
            best = std::min(best, std::abs(z - *it));
        active.insert(z);
    }
    return best;
}

/// Finite complex point set with uniform prior.
class Constellation {
public:
    Constellation() = default;

    explicit Constellation(std::vector<cplx> points) : points_(std::move(points))
    {
        std::vector<cplx> sorted = points_;
        std::sort(sorted.begin(), sorted.end(), detail::lex_less);
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw error(errc::invalid_argument, "constellation points must be distinct");
    }

    const std::vector<cplx>& points() const noexcept { return points_; }
    std::size_t cardinality() const noexcept { return points_.size(); }

    cplx mean() const
    {
        cplx s = 0.0;
        for (const auto& p : points_)
            s += p;
        return points_.empty() ? s : s / static_cast<double>(points_.size());
    }

    double avg_energy() const
    {
        double s = 0.0;
        for (const auto& p : points_)
            s += std::norm(p);
        return points_.empty() ? 0.0 : s / static_cast<double>(points_.size());
    }

    double dmin() const { return min_distance(points_); }

    Constellation scaled(cplx factor) const
    {
        std::vector<cplx> out;
        out.reserve(points_.size());
        for (const auto& p : points_)
            out.push_back(p * factor);
        return Constellation(std::move(out));
    }

private:
    std::vector<cplx> points_;
};

inline double min_distance(const Constellation& c) { return min_distance(c.points()); }

/// Square QAM with 2^order_bits points, zero mean and the given minimum distance.
inline Constellation regular_qam(int order_bits, double dmin)
{
    if (order_bits < 2 || order_bits % 2 != 0)
        throw error(errc::unsupported_order, "QAM order must be an even number of bits >= 2, got " +
                                                 std::to_string(order_bits));
    if (order_bits > 40)
        throw error(errc::constellation_too_large, "QAM order " + std::to_string(order_bits));
    if (!(dmin > 0.0))
        throw error(errc::invalid_argument, "QAM minimum distance must be positive");
    const std::size_t side = std::size_t{1} << (order_bits / 2);
    const double centre = (static_cast<double>(side) - 1.0) / 2.0;
    std::vector<cplx> pts;
    pts.reserve(side * side);
    for (std::size_t a = 0; a < side; ++a)
        for (std::size_t b = 0; b < side; ++b)
            pts.emplace_back((static_cast<double>(a) - centre) * dmin, (static_cast<double>(b) - centre) * dmin);
    return Constellation(std::move(pts));
}

/// All sums a_i + b_j, a-major. No merging of coincident points.
inline std::vector<cplx> minkowski_sum(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
    std::vector<cplx> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a)
        for (const auto& y : b)
            out.push_back(x + y);
    return out;
}

/// Drops exact binary duplicates.
inline std::vector<cplx> collapse_exact(std::vector<cplx> pts)
{
    std::sort(pts.begin(), pts.end(), detail::lex_less);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

/// True when the points form a zero-mean square grid with spacing `dmin`.
inline bool is_regular_qam(const Constellation& c, double dmin, double rel_tol = 1e-12)
{
    const std::size_t n = c.cardinality();
    std::size_t side = 1;
    while (side * side < n)
        side *= 2;
    if (side * side != n || n < 4)
        return false;
    double scale = dmin;
    for (const auto& p : c.points())
        scale = std::max({scale, std::abs(p.real()), std::abs(p.imag())});
    const double tol = rel_tol * scale;
    const double centre = (static_cast<double>(side) - 1.0) / 2.0;
    std::vector<char> seen(n, 0);
    for (const auto& p : c.points()) {
        const double a = p.real() / dmin + centre;
        const double b = p.imag() / dmin + centre;
        const double ra = std::round(a);
        const double rb = std::round(b);
        if (std::abs(a - ra) * dmin > tol || std::abs(b - rb) * dmin > tol)
            return false;
        if (ra < 0 || rb < 0 || ra >= static_cast<double>(side) || rb >= static_cast<double>(side))
            return false;
        char& s = seen[static_cast<std::size_t>(ra) * side + static_cast<std::size_t>(rb)];
        if (s)
            return false;
        s = 1;
    }
    return true;
}

/// One point per line as "re,im", preceded by a header row.
inline void write_csv(std::ostream& os, const Constellation& c)
{
    os << "re,im\n";
    os << std::setprecision(12);
    for (const auto& p : c.points())
        os << p.real() << ',' << p.imag() << '\n';
}

} // namespace hetmac

#endif // HETMAC_CONSTELLATION_HPP
