// ccspin command-line front end.
//
//   ccspin <derive|simulate|compare|scan|groundstate|design|oracle> CONFIG [-o DIR]
//
// Exit codes: 0 success, 2 validation refusal, 1 numeric failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "ccspin/ccspin.hpp"

namespace fs = std::filesystem;
using namespace ccspin;

namespace {

struct Context {
    RunConfig cfg;
    fs::path out;
};

fs::path prepare_output(const RunConfig& cfg, const std::string& override_dir) {
    std::string dir = cfg.output.directory;
    if (const char* env = std::getenv("CCSPIN_OUTPUT_DIR"); env && *env) dir = env;
    if (!override_dir.empty()) dir = override_dir;
    fs::create_directories(dir);
    return dir;
}

double resolve_t_final(const RunConfig& cfg) {
    if (cfg.evolve.t_final) return *cfg.evolve.t_final;
    const double periods = cfg.evolve.exchange_periods.value_or(1.0);
    return periods * exchange_period(cfg.effective_model());
}

void emit_series(const Context& c, const std::string& stem, const TimeSeries& ts) {
    if (c.cfg.output.format == "csv") {
        std::ostringstream os;
        write_timeseries_csv(os, ts);
        write_text(c.out / (stem + ".csv"), os.str());
    } else {
        write_json(c.out / (stem + ".json"), to_json(ts));
    }
}

int cmd_derive(const Context& c) {
    const auto p = c.cfg.reduced();
    const auto m = c.cfg.effective_model();
    const auto s = shifted_detunings(p);
    const auto v = validity_check(p, c.cfg.hierarchy_factor, c.cfg.micro());
    nlohmann::json j;
    j["reduced"] = to_json(p);
    j["shifted_detunings"] = to_json(s);
    j["effective"] = to_json(m);
    j["validity"] = to_json(v);
    if (p.delta3 != 0.0) j["stark_field_estimate"] = stark_field_estimate(p);
    if (c.cfg.decoherence) {
        if (auto micro = c.cfg.micro())
            j["decoherence"] = to_json(decoherence_check(*micro, c.cfg.decoherence->first, c.cfg.decoherence->second));
        else
            throw ValidationError("derive: the decoherence block needs micro parameters");
    }
    write_json(c.out / "derive.json", j);

    std::cout << "J1      = " << fmt(m.J1) << " rad/ns = " << fmt(to_mhz(m.J1)) << " MHz\n"
              << "J2      = " << fmt(m.J2) << " rad/ns = " << fmt(to_mhz(m.J2)) << " MHz\n"
              << "lambda1 = " << fmt(m.lambda1) << " rad/ns = " << fmt(to_mhz(m.lambda1)) << " MHz\n"
              << "lambda2 = " << fmt(m.lambda2) << " rad/ns = " << fmt(to_mhz(m.lambda2)) << " MHz\n"
              << "shifted detunings: " << fmt(s.delta_a1) << ' ' << fmt(s.delta_a2) << ' ' << fmt(s.delta_b1) << ' '
              << fmt(s.delta_b2) << '\n'
              << "validity (factor " << c.cfg.hierarchy_factor << "): " << (v.all_pass() ? "pass" : "FAIL")
              << ", weakest " << (v.weakest() ? v.weakest()->name + " = " + fmt(v.weakest()->margin) : "none")
              << '\n';
    if (j.contains("decoherence")) {
        const auto& d = j["decoherence"];
        std::cout << "cooperativity = " << d["cooperativity"] << ", g/Gamma_E = " << d["g_over_gamma_e"] << '\n';
    }
    return 0;
}

CompareConfig compare_config(const RunConfig& cfg) {
    CompareConfig cc;
    cc.n_max_a = cfg.system.n_max_a;
    cc.n_max_b = cfg.system.n_max_b;
    cc.photon_cap = cfg.system.photon_cap;
    cc.periodic = cfg.system.periodic;
    cc.include_cross_term = cfg.model.include_cross_term;
    cc.include_local_terms = cfg.model.include_local_terms;
    cc.full.method = cfg.evolve.method;
    cc.full.step = cfg.evolve.step;
    cc.full.sample_every = cfg.evolve.sample_every;
    cc.full.max_norm_drift = cfg.evolve.max_norm_drift;
    cc.effective.step = cfg.evolve.effective_step;
    cc.effective.method = cfg.evolve.method;
    cc.effective.max_norm_drift = cfg.evolve.max_norm_drift;
    cc.stroboscopic = cfg.evolve.stroboscopic;
    cc.sample_periods = cfg.evolve.sample_periods;
    return cc;
}

int cmd_simulate(const Context& c) {
    const double tf = resolve_t_final(c.cfg);
    TimeSeries ts;
    if (c.cfg.evolve.model == "effective") {
        PropagatorConfig pc;
        pc.method = c.cfg.evolve.method;
        pc.step = c.cfg.evolve.effective_step;
        pc.sample_every = c.cfg.evolve.sample_every;
        pc.max_norm_drift = c.cfg.evolve.max_norm_drift;
        ts = simulate_effective(c.cfg.effective_model(), c.cfg.spins, tf, pc);
    } else {
        ts = simulate_full(c.cfg.reduced(), c.cfg.spins, tf, compare_config(c.cfg));
    }
    emit_series(c, "timeseries", ts);
    std::cout << "samples " << ts.size() << ", t_final " << fmt(ts.t.back()) << " ns, max norm drift "
              << fmt(ts.max_norm_drift()) << '\n';
    return 0;
}

int cmd_compare(const Context& c) {
    const double tf = resolve_t_final(c.cfg);
    const auto r = compare_models(c.cfg.reduced(), c.cfg.spins, tf, compare_config(c.cfg));
    emit_series(c, "compare_full", r.full);
    emit_series(c, "compare_effective", r.effective);
    nlohmann::json j;
    j["max_deviation_per_site"] = r.max_deviation;
    j["max_abs_deviation"] = r.max_abs_deviation;
    j["rms_deviation"] = r.rms_deviation;
    j["max_photon_number"] = r.max_photon_number;
    j["max_norm_drift"] = r.full.max_norm_drift();
    j["stroboscopic"] = r.used_stroboscopic;
    j["warnings"] = r.warnings;
    j["validity"] = to_json(r.validity);
    write_json(c.out / "compare_summary.json", j);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "max |p_full - p_eff| = " << fmt(r.max_abs_deviation) << ", rms " << fmt(r.rms_deviation)
              << ", max photon number " << fmt(r.max_photon_number) << '\n';
    return 0;
}

int cmd_scan(const Context& c) {
    if (c.cfg.scan_ratios.empty()) throw ValidationError("scan: config needs a 'scan' block");
    const auto rows = cancellation_scan(c.cfg.reduced(), c.cfg.scan_ratios);
    std::ostringstream os;
    write_scan_csv(os, rows);
    write_text(c.out / "scan.csv", os.str());
    std::cout << os.str();
    return 0;
}

int cmd_groundstate(const Context& c) {
    const auto g = ground_state(c.cfg.effective_model());
    write_json(c.out / "groundstate.json", to_json(g));
    std::cout << "E0 = " << fmt(g.energy) << ", E0/N = " << fmt(g.energy_per_site) << ", degeneracy "
              << g.degeneracy << ", residual " << fmt(g.residual) << '\n';
    return 0;
}

int cmd_design(const Context& c) {
    if (!c.cfg.design) throw ValidationError("design: config needs a 'design' block");
    const auto f = fit_parameters(*c.cfg.design, c.cfg.reduced());
    write_json(c.out / "design.json", to_json(f));
    for (const auto& r : f.residuals)
        std::cout << r.name << ": target " << fmt(r.target) << ", achieved " << fmt(r.achieved) << ", rel error "
                  << fmt(r.error) << (r.pass ? "" : "  (above tolerance)") << '\n';
    std::cout << f.status << '\n';
    return f.feasible ? 0 : 1;
}

int cmd_oracle(const Context& c) {
    const auto rep = expansion_error_report(c.cfg.reduced());
    std::ostringstream os;
    write_expansion_csv(os, rep);
    write_text(c.out / "oracle.csv", os.str());
    write_json(c.out / "oracle.json", to_json(rep));
    std::cout << os.str() << "max rel error " << fmt(rep.max_rel_error) << ", max tail ratio "
              << fmt(rep.max_tail_ratio) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled-cavity J1-J2 spin chain simulator"};
    app.require_subcommand(1);
    std::string config, outdir;
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const Context&);
    };
    const Sub subs[] = {
        {"derive", "Print reduced parameters, effective couplings and validity reports", cmd_derive},
        {"simulate", "Simulate the full or effective model and write a time series", cmd_simulate},
        {"compare", "Compare full and effective dynamics", cmd_compare},
        {"scan", "Scan the branch ratio B/A", cmd_scan},
        {"groundstate", "Ground state of the effective chain", cmd_groundstate},
        {"design", "Fit parameters to target couplings", cmd_design},
        {"oracle", "Truncation error of the closed-form couplings", cmd_oracle},
    };
    int (*chosen)(const Context&) = nullptr;
    for (const auto& s : subs) {
        auto* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("config", config, "JSON run configuration")->required();
        sc->add_option("-o,--output-dir", outdir, "Output directory (overrides the config)");
        sc->callback([&chosen, fn = s.fn] { chosen = fn; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        Context c{load_config(config), {}};
        c.out = prepare_output(c.cfg, outdir);
        return chosen(c);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
