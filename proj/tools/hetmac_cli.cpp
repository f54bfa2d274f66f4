#include <hetmac/hetmac.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace hetmac;

enum exit_code : int { ok = 0, bad_config = 2, infeasible = 3, violated = 4 };

int exit_for(errc c)
{
    return c == errc::infeasible_allocation ? infeasible : bad_config;
}

std::vector<SchemeType> schemes_of(const std::optional<SchemeType>& s)
{
    if (s)
        return {*s};
    return {SchemeType::type1, SchemeType::type2};
}

std::string join(const std::vector<int>& v, char sep)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += sep;
        s += std::to_string(v[i]);
    }
    return s;
}

std::optional<SchemeType> scheme_option(const std::string& s)
{
    if (s == "1")
        return SchemeType::type1;
    if (s == "2")
        return SchemeType::type2;
    return std::nullopt;
}

struct RegionArgs {
    std::string scenario, out, scheme;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<bool> even_only;
};

int cmd_region(const RegionArgs& a)
{
    auto sc = load_scenario(a.scenario);
    if (a.samples)
        sc.estimator.samples = *a.samples;
    if (a.seed)
        sc.estimator.seed = *a.seed;
    if (a.threads)
        sc.estimator.threads = *a.threads;
    if (a.even_only)
        sc.even_only = *a.even_only;

    auto allocs = sc.allocations;
    if (allocs.empty())
        for (const auto& m : enumerate_allocations(sc.cfg, sc.even_only))
            allocs.push_back({join(allocation_to_input_order(sc.cfg, m), '-'), m, sc.scheme});
    if (!a.scheme.empty())
        for (auto& la : allocs)
            la.scheme = scheme_option(a.scheme);
    if (sc.even_only)
        for (const auto& la : allocs)
            if (!la.m.all_even())
                throw error(errc::invalid_config, "allocation " + la.id + " has odd orders while even_only is set");

    const auto rows = rate_region_sweep(sc.cfg, allocs, sc.estimator);

    std::ofstream out(a.out, std::ios::binary);
    if (!out)
        throw error(errc::io_failure, "cannot write " + a.out);
    write_region_csv(out, sc.cfg, sc.estimator, rows);
    out.close();
    if (!out)
        throw error(errc::io_failure, "write to " + a.out + " failed");

    for (const auto& r : rows) {
        std::cout << r.id << " (" << r.scheme_label << "):";
        for (std::size_t i = 0; i < sc.cfg.users(); ++i)
            std::cout << " R" << i + 1 << '=' << r.report.users[sc.cfg.internal_index(i)].rate;
        std::cout << '\n';
    }
    const auto best = select_rows(rows, sc.policy);
    std::cout << (sc.policy == SelectionPolicy::sum_rate ? "best sum rate:" : "best min rate:");
    for (auto i : best)
        std::cout << ' ' << rows[i].id << '(' << rows[i].scheme_label << ')';
    std::cout << '\n';
    return ok;
}

int cmd_det_verify(const std::string& path, const std::string& scheme)
{
    const auto sc = load_scenario(path);
    const auto n = sc.cfg.gains();
    std::cout << "gains n:";
    for (std::size_t i = 0; i < sc.cfg.users(); ++i)
        std::cout << ' ' << n[sc.cfg.internal_index(i)];
    std::cout << '\n';
    if (sc.allocations.empty()) {
        std::cout << "no allocations to verify\n";
        return ok;
    }
    std::mt19937_64 rng(sc.estimator.seed);
    int status = ok;
    for (const auto& la : sc.allocations) {
        const auto det = sc.cfg.det_config(la.m);
        const auto types = schemes_of(scheme.empty() ? la.scheme : scheme_option(scheme));
        const auto f = detmac::FBlocks::random(la.m, rng);
        for (auto t : types) {
            std::cout << la.id << " type " << static_cast<int>(t) << ":\n";
            detmac::AchievabilityReport rep;
            try {
                rep = detmac::verify_achievability(det, t, f);
            } catch (const error& e) {
                if (e.code() != errc::infeasible_allocation)
                    throw;
                std::cout << "  " << e.what() << '\n';
                status = std::max<int>(status, infeasible);
                continue;
            }
            for (const auto& v : rep.region)
                std::cout << "  component " << v.component + 1 << ": load " << v.load << " of " << v.capacity
                          << ", slack " << v.min_slack << (v.feasible ? " ok" : " INFEASIBLE") << '\n';
            if (!rep.feasible) {
                status = std::max<int>(status, infeasible);
                continue;
            }
            for (const auto& e : rep.entries) {
                std::cout << "  user " << sc.cfg.user(e.user).original_index + 1 << " sub-block " << e.component + 1
                          << ": m " << e.bits << ", rank MI " << e.mutual_info << (e.bits == e.mutual_info ? "" : " MISMATCH")
                          << '\n';
            }
            MTable got(la.m.users());
            for (const auto& e : rep.entries)
                got(e.user, e.component) = e.mutual_info;
            std::cout << "  MI (" << join(allocation_to_input_order(sc.cfg, got), ',') << ")"
                      << (rep.rank_additive ? "" : ", ranks not additive") << '\n';
            if (!rep.achieves_table())
                status = violated;
        }
    }
    std::cout << (status == ok ? "PASS" : "FAIL") << '\n';
    return status;
}

int cmd_codeparams(const std::string& path, const std::string& id, std::optional<std::size_t> samples)
{
    auto sc = load_scenario(path);
    if (samples)
        sc.estimator.samples = *samples;
    const auto& la = sc.allocation(id);
    const auto rows = rate_region_sweep(sc.cfg, {la}, sc.estimator);
    for (const auto& r : rows) {
        std::vector<double> rates;
        for (const auto& u : r.report.users)
            rates.push_back(u.rate);
        const auto cp = select_code_params(sc.cfg, la.m, rates);
        std::cout << la.id << " type " << r.scheme_label << ":\n";
        for (std::size_t i = 0; i < sc.cfg.users(); ++i) {
            const auto k = sc.cfg.internal_index(i);
            const auto& u = cp.users[k];
            std::cout << "  user " << i + 1 << ": I=" << u.info_bits << " L=" << u.codeword_bits << " rate=" << u.rate
                      << '\n';
            if (u.degenerate)
                std::cerr << "warning: user " << i + 1 << " of " << la.id << " carries less than one information bit\n";
        }
    }
    return ok;
}

int cmd_constellation(const std::string& path, const std::string& id, std::size_t component, const std::string& out,
                      const std::string& scheme)
{
    const auto sc = load_scenario(path);
    const auto& la = sc.allocation(id);
    if (component < 1 || component > sc.cfg.users())
        throw error(errc::invalid_config, "component must be in 1.." + std::to_string(sc.cfg.users()));
    const auto t = scheme.empty() ? la.scheme.value_or(SchemeType::type1) : scheme_option(scheme).value();
    const auto sig = build_scheme(sc.cfg, BitAllocation{la.m, t});
    const auto c = superimpose(sig, sc.cfg, component - 1);
    std::ofstream os(out, std::ios::binary);
    if (!os)
        throw error(errc::io_failure, "cannot write " + out);
    write_csv(os, c);
    os.close();
    if (!os)
        throw error(errc::io_failure, "write to " + out + " failed");
    std::cout << c.cardinality() << " points, dmin " << (c.cardinality() > 1 ? c.dmin() : 0.0) << ", energy "
              << c.avg_energy() << '\n';
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Finite-blocklength rate regions for heterogeneous-blocklength multiple access"};
    app.require_subcommand(1);

    RegionArgs ra;
    auto* region = app.add_subcommand("region", "Rate pairs of every allocation, as CSV");
    region->add_option("--scenario", ra.scenario)->required()->check(CLI::ExistingFile);
    region->add_option("--out", ra.out)->required();
    region->add_option("--samples", ra.samples);
    region->add_option("--seed", ra.seed);
    region->add_option("--threads", ra.threads);
    region->add_flag("--even-only,!--all-orders", ra.even_only, "Restrict enumeration to even orders");
    region->add_option("--scheme", ra.scheme)->check(CLI::IsMember({"1", "2", "both"}));

    std::string dv_scenario, dv_scheme;
    auto* dv = app.add_subcommand("det-verify", "Rank checks of the deterministic scheme");
    dv->add_option("--scenario", dv_scenario)->required()->check(CLI::ExistingFile);
    dv->add_option("--scheme", dv_scheme)->check(CLI::IsMember({"1", "2", "both"}));

    std::string cp_scenario, cp_alloc;
    std::optional<std::size_t> cp_samples;
    auto* cp = app.add_subcommand("codeparams", "Information and codeword lengths");
    cp->add_option("--scenario", cp_scenario)->required()->check(CLI::ExistingFile);
    cp->add_option("--alloc", cp_alloc)->required();
    cp->add_option("--samples", cp_samples);

    std::string cs_scenario, cs_alloc, cs_out, cs_scheme;
    std::size_t cs_component = 1;
    auto* cs = app.add_subcommand("constellation", "Superimposed received points of one component");
    cs->add_option("--scenario", cs_scenario)->required()->check(CLI::ExistingFile);
    cs->add_option("--alloc", cs_alloc)->required();
    cs->add_option("--component", cs_component)->required();
    cs->add_option("--out", cs_out)->required();
    cs->add_option("--scheme", cs_scheme)->check(CLI::IsMember({"1", "2"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : bad_config;
    }

    try {
        if (*region)
            return cmd_region(ra);
        if (*dv)
            return cmd_det_verify(dv_scenario, dv_scheme == "both" ? "" : dv_scheme);
        if (*cp)
            return cmd_codeparams(cp_scenario, cp_alloc, cp_samples);
        if (*cs)
            return cmd_constellation(cs_scenario, cs_alloc, cs_component, cs_out, cs_scheme);
    } catch (const hetmac::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return bad_config;
    }
    return ok;
}
