#ifndef HETMAC_CHANNEL_HPP
#define HETMAC_CHANNEL_HPP

#include <hetmac/allocation.hpp>
#include <hetmac/detmac.hpp>
#include <hetmac/error.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace hetmac {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Deterministic gain ceil(log2 snr)^+.
inline int gain_bits(double snr)
{
    if (!(snr > 0.0))
        throw error(errc::invalid_argument, "SNR must be positive");
    return std::max(0, static_cast<int>(std::ceil(std::log2(snr))));
}

/// One user as written in a scenario. Either snr_db, or power and gain, or all
/// three when they agree.
struct UserSpec {
    std::optional<double> snr_db;
    std::optional<double> power;
    std::optional<std::complex<double>> gain;
    long blocklength = 0;
    double eps = 0.0;
};

struct User {
    double snr = 0.0; // P |h|^2, linear
    double log2_snr = 0.0;
    double power = 0.0;
    double gain = 0.0; // |h| after phase rotation
    long blocklength = 0;
    double eps = 0.0;
    int n = 0;
    std::size_t original_index = 0;
};

/// Users of one scenario, reindexed by nondecreasing blocklength.
///
/// Ties in blocklength are broken by decreasing SNR, then by input position.
/// Component l covers symbols N_{l-1}+1 .. N_l and is shared by users l..K-1.
class ChannelConfig {
public:
    ChannelConfig() = default;

    static ChannelConfig from_users(const std::vector<UserSpec>& specs)
    {
        if (specs.empty())
            throw error(errc::invalid_argument, "at least one user is required");
        ChannelConfig cfg;
        for (std::size_t i = 0; i < specs.size(); ++i)
            cfg.users_.push_back(resolve(specs[i], i));
        std::stable_sort(cfg.users_.begin(), cfg.users_.end(), [](const User& a, const User& b) {
            if (a.blocklength != b.blocklength)
                return a.blocklength < b.blocklength;
            return a.snr > b.snr;
        });
        return cfg;
    }

    std::size_t users() const noexcept { return users_.size(); }
    const User& user(std::size_t k) const { return users_.at(k); }
    const std::vector<User>& all() const noexcept { return users_; }

    std::vector<int> gains() const
    {
        std::vector<int> n;
        for (const auto& u : users_)
            n.push_back(u.n);
        return n;
    }

    /// N_l - N_{l-1}, with N_{-1} = 0.
    long subblock_length(std::size_t l) const
    {
        return users_.at(l).blocklength - (l == 0 ? 0 : users_[l - 1].blocklength);
    }

    /// Internal index of the user given at input position i.
    std::size_t internal_index(std::size_t original) const
    {
        for (std::size_t k = 0; k < users_.size(); ++k)
            if (users_[k].original_index == original)
                return k;
        throw error(errc::invalid_argument, "no user at input position " + std::to_string(original));
    }

    detmac::DetConfig det_config(const MTable& m) const
    {
        if (m.users() != users())
            throw error(errc::invalid_argument, "allocation has " + std::to_string(m.users()) + " users, scenario has " +
                                                    std::to_string(users()));
        return detmac::DetConfig{gains(), m};
    }

private:
    static User resolve(const UserSpec& s, std::size_t index)
    {
        User u;
        u.original_index = index;
        if (!(s.eps > 0.0 && s.eps < 1.0))
            throw error(errc::invalid_argument, "user " + std::to_string(index + 1) + ": target error must lie in (0,1)");
        if (s.blocklength <= 0)
            throw error(errc::invalid_argument, "user " + std::to_string(index + 1) + ": blocklength must be positive");
        u.blocklength = s.blocklength;
        u.eps = s.eps;
        if (s.power && s.gain) {
            u.power = *s.power;
            u.gain = std::abs(*s.gain);
            u.snr = u.power * u.gain * u.gain;
            if (s.snr_db && std::abs(10.0 * std::log10(u.snr) - *s.snr_db) > 1e-9)
                throw error(errc::invalid_argument, "user " + std::to_string(index + 1) +
                                                        ": snr_db disagrees with power and gain");
        } else if (s.snr_db) {
            u.snr = db_to_linear(*s.snr_db);
            if (s.gain) {
                u.gain = std::abs(*s.gain);
                u.power = u.snr / (u.gain * u.gain);
            } else if (s.power) {
                u.power = *s.power;
                u.gain = std::sqrt(u.snr / u.power);
            } else {
                u.power = u.snr;
                u.gain = 1.0;
            }
        } else {
            throw error(errc::invalid_argument, "user " + std::to_string(index + 1) +
                                                    ": need snr_db, or both power and gain");
        }
        if (!(u.snr > 0.0) || !std::isfinite(u.snr) || !(u.power > 0.0))
            throw error(errc::invalid_argument, "user " + std::to_string(index + 1) + ": SNR must be positive");
        u.log2_snr = std::log2(u.snr);
        u.n = gain_bits(u.snr);
        return u;
    }

    std::vector<User> users_;
};

} // namespace hetmac

#endif // HETMAC_CHANNEL_HPP
