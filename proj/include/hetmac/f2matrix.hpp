#ifndef HETMAC_F2MATRIX_HPP
#define HETMAC_F2MATRIX_HPP

#include <hetmac/error.hpp>

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

namespace hetmac {

/// Dense matrix over GF(2), rows packed into 64-bit words.
///
/// Column vectors (messages, codewords) are stored as n x 1 matrices. Row 0 is
/// the most significant power level, so a down shift moves bits toward larger
/// row indices and drops the bottom ones.
class F2Matrix {
public:
    using word = std::uint64_t;
    static constexpr std::size_t word_bits = 64;

    F2Matrix() = default;

    F2Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), stride_((cols + word_bits - 1) / word_bits), bits_(rows * stride_, 0)
    {
    }

    F2Matrix(std::initializer_list<std::initializer_list<int>> init)
        : F2Matrix(init.size(), init.size() == 0 ? 0 : init.begin()->size())
    {
        std::size_t r = 0;
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw error(errc::invalid_argument, "ragged F2 matrix literal");
            std::size_t c = 0;
            for (int v : row) {
                if (v != 0 && v != 1)
                    throw error(errc::invalid_argument, "F2 entries must be 0 or 1");
                set(r, c++, v == 1);
            }
            ++r;
        }
    }

    static F2Matrix zero(std::size_t rows, std::size_t cols) { return F2Matrix(rows, cols); }

    static F2Matrix identity(std::size_t n)
    {
        F2Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m.set(i, i, true);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    bool get(std::size_t r, std::size_t c) const noexcept
    {
        return (bits_[r * stride_ + c / word_bits] >> (c % word_bits)) & 1U;
    }

    void set(std::size_t r, std::size_t c, bool v) noexcept
    {
        word& w = bits_[r * stride_ + c / word_bits];
        const word mask = word{1} << (c % word_bits);
        w = v ? (w | mask) : (w & ~mask);
    }

    /// Copies `block` into this matrix with its top-left corner at (row, col).
    void place(const F2Matrix& block, std::size_t row, std::size_t col)
    {
        if (row + block.rows() > rows_ || col + block.cols() > cols_)
            throw error(errc::invalid_argument, "block does not fit");
        for (std::size_t r = 0; r < block.rows(); ++r)
            for (std::size_t c = 0; c < block.cols(); ++c)
                set(row + r, col + c, block.get(r, c));
    }

    F2Matrix submatrix(std::size_t row, std::size_t col, std::size_t nrows, std::size_t ncols) const
    {
        if (row + nrows > rows_ || col + ncols > cols_)
            throw error(errc::invalid_argument, "submatrix out of range");
        F2Matrix out(nrows, ncols);
        for (std::size_t r = 0; r < nrows; ++r)
            for (std::size_t c = 0; c < ncols; ++c)
                out.set(r, c, get(row + r, col + c));
        return out;
    }

    friend F2Matrix operator*(const F2Matrix& a, const F2Matrix& b)
    {
        if (a.cols_ != b.rows_)
            throw error(errc::invalid_argument, "F2 product dimension mismatch");
        F2Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k)
                if (a.get(i, k))
                    for (std::size_t w = 0; w < out.stride_; ++w)
                        out.bits_[i * out.stride_ + w] ^= b.bits_[k * b.stride_ + w];
        return out;
    }

    friend F2Matrix operator+(const F2Matrix& a, const F2Matrix& b)
    {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw error(errc::invalid_argument, "F2 sum dimension mismatch");
        F2Matrix out = a;
        for (std::size_t i = 0; i < out.bits_.size(); ++i)
            out.bits_[i] ^= b.bits_[i];
        return out;
    }

    friend bool operator==(const F2Matrix& a, const F2Matrix& b) noexcept
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.bits_ == b.bits_;
    }

    std::string to_string() const
    {
        std::string s;
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c)
                s += get(r, c) ? '1' : '0';
            s += '\n';
        }
        return s;
    }

private:
    friend std::size_t rank_f2(F2Matrix m);

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
    std::vector<word> bits_;
};

/// Rank over GF(2) by Gaussian elimination, pivoting column by column.
inline std::size_t rank_f2(F2Matrix m)
{
    std::size_t rank = 0;
    for (std::size_t c = 0; c < m.cols_ && rank < m.rows_; ++c) {
        const std::size_t w = c / F2Matrix::word_bits;
        const F2Matrix::word mask = F2Matrix::word{1} << (c % F2Matrix::word_bits);
        std::size_t pivot = rank;
        while (pivot < m.rows_ && !(m.bits_[pivot * m.stride_ + w] & mask))
            ++pivot;
        if (pivot == m.rows_)
            continue;
        if (pivot != rank)
            std::swap_ranges(m.bits_.begin() + pivot * m.stride_, m.bits_.begin() + (pivot + 1) * m.stride_,
                             m.bits_.begin() + rank * m.stride_);
        for (std::size_t r = rank + 1; r < m.rows_; ++r)
            if (m.bits_[r * m.stride_ + w] & mask)
                for (std::size_t k = w; k < m.stride_; ++k)
                    m.bits_[r * m.stride_ + k] ^= m.bits_[rank * m.stride_ + k];
        ++rank;
    }
    return rank;
}

/// Horizontal concatenation [a, b, ...]; all blocks must share a row count.
inline F2Matrix hconcat(const std::vector<F2Matrix>& blocks, std::size_t rows)
{
    std::size_t cols = 0;
    for (const auto& b : blocks) {
        if (b.rows() != rows)
            throw error(errc::invalid_argument, "hconcat row mismatch");
        cols += b.cols();
    }
    F2Matrix out(rows, cols);
    std::size_t c = 0;
    for (const auto& b : blocks) {
        out.place(b, 0, c);
        c += b.cols();
    }
    return out;
}

/// q x q down shift by s positions: (S^s x)[i] = x[i - s], lowest s bits truncated.
inline F2Matrix shift_matrix(std::size_t q, std::size_t s)
{
    if (s > q)
        throw error(errc::invalid_argument, "shift " + std::to_string(s) + " exceeds dimension " + std::to_string(q));
    F2Matrix m(q, q);
    for (std::size_t i = s; i < q; ++i)
        m.set(i, i - s, true);
    return m;
}

/// Uniformly random n x n invertible matrix (rejection sampling).
template <class Rng>
F2Matrix random_full_rank(std::size_t n, Rng& rng)
{
    std::bernoulli_distribution bit(0.5);
    for (;;) {
        F2Matrix m(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                m.set(r, c, bit(rng));
        if (rank_f2(m) == n)
            return m;
    }
}

} // namespace hetmac

#endif // HETMAC_F2MATRIX_HPP
