#ifndef HETMAC_ERROR_HPP
#define HETMAC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hetmac {

enum class errc {
    invalid_argument,
    infeasible_allocation,
    unsupported_order,
    constellation_too_large,
    enumeration_too_large,
    unsupported,
    invalid_config,
    io_failure,
};

inline const char* errc_name(errc c) noexcept
{
    switch (c) {
    case errc::invalid_argument: return "invalid-argument";
    case errc::infeasible_allocation: return "infeasible-allocation";
    case errc::unsupported_order: return "unsupported-order";
    case errc::constellation_too_large: return "constellation-too-large";
    case errc::enumeration_too_large: return "enumeration-too-large";
    case errc::unsupported: return "unsupported";
    case errc::invalid_config: return "invalid-config";
    case errc::io_failure: return "io-failure";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
    {
    }

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace hetmac

#endif // HETMAC_ERROR_HPP
