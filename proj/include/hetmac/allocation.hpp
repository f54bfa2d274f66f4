#ifndef HETMAC_ALLOCATION_HPP
#define HETMAC_ALLOCATION_HPP

#include <hetmac/error.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace hetmac {

/// Which deterministic generator family the signaling is derived from.
enum class SchemeType { type1 = 1, type2 = 2 };

/// Modulation-order table m[k][l], l = 0..k, in bits.
///
/// Users are indexed by nondecreasing blocklength, so user k spans components
/// 0..k and component l is shared by users l..K-1.
class MTable {
public:
    MTable() = default;

    explicit MTable(std::size_t users) : m_(users)
    {
        for (std::size_t k = 0; k < users; ++k)
            m_[k].assign(k + 1, 0);
    }

    explicit MTable(std::vector<std::vector<int>> rows) : m_(std::move(rows))
    {
        for (std::size_t k = 0; k < m_.size(); ++k) {
            if (m_[k].size() != k + 1)
                throw error(errc::invalid_argument, "user " + std::to_string(k + 1) + " must have " +
                                                        std::to_string(k + 1) + " sub-block orders");
            for (int v : m_[k])
                if (v < 0)
                    throw error(errc::invalid_argument, "negative modulation order");
        }
    }

    /// Builds from the user-major flattening (m_11, m_21, m_22, m_31, ...).
    static MTable from_flat(const std::vector<int>& flat)
    {
        std::size_t users = 0;
        while ((users + 1) * (users + 2) / 2 <= flat.size())
            ++users;
        if (users * (users + 1) / 2 != flat.size())
            throw error(errc::invalid_argument, "flat table length " + std::to_string(flat.size()) +
                                                    " is not triangular");
        MTable t(users);
        std::size_t i = 0;
        for (std::size_t k = 0; k < users; ++k)
            for (std::size_t l = 0; l <= k; ++l) {
                if (flat[i] < 0)
                    throw error(errc::invalid_argument, "negative modulation order");
                t.m_[k][l] = flat[i++];
            }
        return t;
    }

    std::size_t users() const noexcept { return m_.size(); }
    int operator()(std::size_t k, std::size_t l) const { return m_.at(k).at(l); }
    int& operator()(std::size_t k, std::size_t l) { return m_.at(k).at(l); }

    std::vector<int> flat() const
    {
        std::vector<int> out;
        for (const auto& row : m_)
            out.insert(out.end(), row.begin(), row.end());
        return out;
    }

    /// Total bits carried in component l.
    int component_sum(std::size_t l) const
    {
        int s = 0;
        for (std::size_t k = l; k < m_.size(); ++k)
            s += m_[k][l];
        return s;
    }

    bool all_even() const
    {
        for (const auto& row : m_)
            for (int v : row)
                if (v % 2 != 0)
                    return false;
        return true;
    }

    friend bool operator==(const MTable&, const MTable&) = default;
    friend auto operator<=>(const MTable& a, const MTable& b) { return a.flat() <=> b.flat(); }

private:
    std::vector<std::vector<int>> m_;
};

/// The design variable shared by the F2 scheme and the QAM scheme.
struct BitAllocation {
    MTable m;
    SchemeType scheme = SchemeType::type1;

    friend bool operator==(const BitAllocation&, const BitAllocation&) = default;
};

} // namespace hetmac

#endif // HETMAC_ALLOCATION_HPP
