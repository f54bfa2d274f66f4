#ifndef HETMAC_SCENARIO_HPP
#define HETMAC_SCENARIO_HPP

#include <hetmac/allocation.hpp>
#include <hetmac/channel.hpp>
#include <hetmac/error.hpp>
#include <hetmac/fblrate.hpp>
#include <hetmac/infodensity.hpp>
#include <hetmac/pipeline.hpp>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hetmac {

/// A scenario file: users, estimator settings, flags and named allocations.
///
///     [user1]
///     snr_db = 24
///     blocklength = 128
///     target_eps = 1e-6
///
///     [alloc]
///     E = 4, 4, 4
///
/// Allocation entries are listed per input user, in input order, each user
/// giving one order per sub-block it spans.
struct Scenario {
    ChannelConfig cfg;
    EstimatorOptions estimator;
    bool even_only = true;
    std::optional<SchemeType> scheme; // empty: both families
    SelectionPolicy policy = SelectionPolicy::sum_rate;
    std::vector<LabeledAllocation> allocations;

    const LabeledAllocation& allocation(const std::string& id) const
    {
        for (const auto& a : allocations)
            if (a.id == id)
                return a;
        throw error(errc::invalid_config, "unknown allocation '" + id + "'");
    }
};

namespace detail {

namespace pt = boost::property_tree;

template <class T>
T parse_value(const std::string& where, const std::string& text)
{
    try {
        return boost::lexical_cast<T>(text);
    } catch (const boost::bad_lexical_cast&) {
        throw error(errc::invalid_config, where + ": cannot parse '" + text + "'");
    }
}

inline bool parse_bool(const std::string& where, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    throw error(errc::invalid_config, where + ": expected a boolean, got '" + text + "'");
}

inline std::optional<SchemeType> parse_scheme(const std::string& where, const std::string& text)
{
    if (text == "1")
        return SchemeType::type1;
    if (text == "2")
        return SchemeType::type2;
    if (text == "both")
        return std::nullopt;
    throw error(errc::invalid_config, where + ": scheme must be 1, 2 or both");
}

inline void only_keys(const std::string& section, const pt::ptree& node, const std::set<std::string>& allowed)
{
    for (const auto& [key, child] : node) {
        if (!allowed.contains(key))
            throw error(errc::invalid_config, "[" + section + "]: unknown key '" + key + "'");
        if (!child.empty())
            throw error(errc::invalid_config, "[" + section + "]: nested keys are not supported");
    }
}

inline std::vector<int> parse_int_list(const std::string& where, const std::string& text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw error(errc::invalid_config, where + ": empty list entry");
        out.push_back(parse_value<int>(where, item.substr(b, e - b + 1)));
    }
    return out;
}

} // namespace detail

/// Maps a list in input-user order to the internal bit table.
inline MTable allocation_from_input_order(const ChannelConfig& cfg, const std::vector<int>& flat)
{
    std::size_t expected = 0;
    for (std::size_t i = 0; i < cfg.users(); ++i)
        expected += cfg.internal_index(i) + 1;
    if (flat.size() != expected)
        throw error(errc::invalid_config, "allocation needs " + std::to_string(expected) + " entries, got " +
                                              std::to_string(flat.size()));
    MTable m(cfg.users());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < cfg.users(); ++i) {
        const std::size_t k = cfg.internal_index(i);
        for (std::size_t l = 0; l <= k; ++l) {
            if (flat[pos] < 0)
                throw error(errc::invalid_config, "negative modulation order");
            m(k, l) = flat[pos++];
        }
    }
    return m;
}

/// Inverse of allocation_from_input_order.
inline std::vector<int> allocation_to_input_order(const ChannelConfig& cfg, const MTable& m)
{
    std::vector<int> out;
    for (std::size_t i = 0; i < cfg.users(); ++i) {
        const std::size_t k = cfg.internal_index(i);
        for (std::size_t l = 0; l <= k; ++l)
            out.push_back(m(k, l));
    }
    return out;
}

inline Scenario parse_scenario(std::istream& in)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw error(errc::invalid_config, e.what());
    }

    std::vector<UserSpec> specs;
    Scenario sc;
    const pt::ptree* alloc = nullptr;
    const pt::ptree* alloc_scheme = nullptr;
    std::set<std::size_t> user_ids;
    std::vector<std::pair<std::size_t, const pt::ptree*>> user_nodes;

    for (const auto& [section, node] : tree) {
        if (node.empty() && !node.data().empty())
            throw error(errc::invalid_config, "key '" + section + "' outside any section");
        if (section.rfind("user", 0) == 0) {
            const auto id = detail::parse_value<std::size_t>("[" + section + "]", section.substr(4));
            if (id == 0 || !user_ids.insert(id).second)
                throw error(errc::invalid_config, "[" + section + "]: bad or repeated user number");
            user_nodes.emplace_back(id, &node);
        } else if (section == "estimator") {
            detail::only_keys(section, node, {"samples", "seed", "threads"});
            if (auto v = node.get_optional<std::string>("samples"))
                sc.estimator.samples = detail::parse_value<std::size_t>("[estimator] samples", *v);
            if (auto v = node.get_optional<std::string>("seed"))
                sc.estimator.seed = detail::parse_value<std::uint64_t>("[estimator] seed", *v);
            if (auto v = node.get_optional<std::string>("threads"))
                sc.estimator.threads = detail::parse_value<unsigned>("[estimator] threads", *v);
        } else if (section == "flags") {
            detail::only_keys(section, node, {"even_only", "scheme", "policy"});
            if (auto v = node.get_optional<std::string>("even_only"))
                sc.even_only = detail::parse_bool("[flags] even_only", *v);
            if (auto v = node.get_optional<std::string>("scheme"))
                sc.scheme = detail::parse_scheme("[flags] scheme", *v);
            if (auto v = node.get_optional<std::string>("policy")) {
                if (*v == "sum")
                    sc.policy = SelectionPolicy::sum_rate;
                else if (*v == "maxmin")
                    sc.policy = SelectionPolicy::max_min;
                else
                    throw error(errc::invalid_config, "[flags] policy must be sum or maxmin");
            }
        } else if (section == "alloc") {
            alloc = &node;
        } else if (section == "alloc_scheme") {
            alloc_scheme = &node;
        } else {
            throw error(errc::invalid_config, "unknown section [" + section + "]");
        }
    }

    if (user_nodes.empty())
        throw error(errc::invalid_config, "no [userN] sections");
    std::sort(user_nodes.begin(), user_nodes.end());
    for (std::size_t i = 0; i < user_nodes.size(); ++i) {
        if (user_nodes[i].first != i + 1)
            throw error(errc::invalid_config, "user sections must be numbered 1.." + std::to_string(user_nodes.size()));
        const std::string sec = "user" + std::to_string(i + 1);
        const auto& node = *user_nodes[i].second;
        detail::only_keys(sec, node, {"snr_db", "blocklength", "target_eps", "power", "gain", "gain_im"});
        UserSpec s;
        auto req = [&](const char* key) {
            auto v = node.get_optional<std::string>(key);
            if (!v)
                throw error(errc::invalid_config, "[" + sec + "]: missing " + key);
            return *v;
        };
        s.blocklength = detail::parse_value<long>("[" + sec + "] blocklength", req("blocklength"));
        s.eps = detail::parse_value<double>("[" + sec + "] target_eps", req("target_eps"));
        if (auto v = node.get_optional<std::string>("snr_db"))
            s.snr_db = detail::parse_value<double>("[" + sec + "] snr_db", *v);
        if (auto v = node.get_optional<std::string>("power"))
            s.power = detail::parse_value<double>("[" + sec + "] power", *v);
        const auto re = node.get_optional<std::string>("gain");
        const auto im = node.get_optional<std::string>("gain_im");
        if (re || im)
            s.gain = std::complex<double>(re ? detail::parse_value<double>("[" + sec + "] gain", *re) : 0.0,
                                          im ? detail::parse_value<double>("[" + sec + "] gain_im", *im) : 0.0);
        specs.push_back(s);
    }
    try {
        sc.cfg = ChannelConfig::from_users(specs);
    } catch (const error& e) {
        throw error(errc::invalid_config, e.what());
    }

    if (alloc) {
        for (const auto& [id, node] : *alloc) {
            if (!node.empty())
                throw error(errc::invalid_config, "[alloc]: nested keys are not supported");
            LabeledAllocation la;
            la.id = id;
            la.m = allocation_from_input_order(sc.cfg, detail::parse_int_list("[alloc] " + id, node.data()));
            la.scheme = sc.scheme;
            sc.allocations.push_back(std::move(la));
        }
    }
    if (alloc_scheme) {
        for (const auto& [id, node] : *alloc_scheme) {
            auto it = std::find_if(sc.allocations.begin(), sc.allocations.end(),
                                   [&](const LabeledAllocation& a) { return a.id == id; });
            if (it == sc.allocations.end())
                throw error(errc::invalid_config, "[alloc_scheme]: unknown allocation '" + id + "'");
            it->scheme = detail::parse_scheme("[alloc_scheme] " + id, node.data());
        }
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw error(errc::io_failure, "cannot open " + path);
    return parse_scenario(in);
}

} // namespace hetmac

#endif // HETMAC_SCENARIO_HPP
