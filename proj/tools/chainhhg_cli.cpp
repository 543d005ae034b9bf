// Command-line front end: basis-info, diagonalize, spectrum, uscan, reduce, configs.

#include "chainhhg/analysis.hpp"
#include "chainhhg/checkpoint.hpp"
#include "chainhhg/config.hpp"
#include "chainhhg/errors.hpp"
#include "chainhhg/lattice.hpp"
#include "chainhhg/spectrum.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using namespace chainhhg;

namespace {

enum ExitCode : int { kOk = 0, kParameter = 2, kConvergence = 3, kStale = 4 };

// ============================================================================
// Shared plumbing
// ============================================================================

struct Invocation {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::string out;
};

void add_key_options(CLI::App* app, Invocation& inv) {
    for (const auto& full : config_keys()) {
        const std::string key = full.substr(full.find('.') + 1);
        app->add_option_function<std::string>(
            "--" + key, [&inv, full](const std::string& v) { inv.overrides[full] = v; },
            "override " + full);
    }
}

RunConfig build_config(const Invocation& inv) {
    RunConfig cfg;
    if (!inv.config_path.empty()) cfg.load_ini(fs::path(inv.config_path));
    if (const auto it = inv.overrides.find("chain.phase"); it != inv.overrides.end()) cfg.set(it->first, it->second);
    for (const auto& [key, value] : inv.overrides)
        if (key != "chain.phase") cfg.set(key, value);
    cfg.validate();
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
    return cfg;
}

void log(const std::string& msg) {
    std::cerr << "[chainhhg] " << msg << std::endl;
}

std::string fmt(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw ParameterError("cannot write " + path.string());
    return os;
}

EigenSolution load_solution(const RunConfig& cfg, int needed) {
    const fs::path path = cfg.checkpoint_file();
    if (!fs::exists(path))
        throw StaleCheckpointError("no checkpoint at " + path.string() +
                                   "; run `chainhhg diagonalize` with the same configuration first");
    const auto header = read_checkpoint_header(path);
    require_matching(header, cfg.chain, cfg.diag.solver.seed, cfg.diag.solver.tol, needed);
    log("loading " + std::to_string(needed) + " states from " + path.string());
    return read_checkpoint(path, needed);
}

int propagated_states(const RunConfig& cfg) {
    return cfg.states > 0 ? cfg.states : cfg.diag.solver.k;
}

Metadata run_metadata(const RunConfig& cfg, const TransitionMatrix& tm, const CoefficientTrajectory& traj) {
    Metadata md = {
        {"N", std::to_string(cfg.chain.sites)},
        {"v", fmt(cfg.chain.v)},
        {"w", fmt(cfg.chain.w)},
        {"U", fmt(cfg.chain.U)},
        {"omega", fmt(cfg.pulse.omega)},
        {"E0_over_omega", fmt(cfg.pulse.e0_over_omega)},
        {"n_cyc", std::to_string(cfg.pulse.cycles)},
        {"seed", std::to_string(cfg.diag.solver.seed)},
        {"tol", fmt(cfg.diag.solver.tol)},
        {"states", std::to_string(tm.size())},
        {"active_states", std::to_string(traj.active_states)},
        {"samples", std::to_string(cfg.propagation.samples)},
        {"ode_tol", fmt(cfg.propagation.ode_tol)},
        {"max_norm_drift", fmt(traj.max_norm_drift)},
    };
    std::string ids;
    for (std::size_t i = 0; i < tm.ids.size(); ++i) ids += (i ? ";" : "") + std::to_string(tm.ids[i]);
    if (!cfg.keep.empty()) md.emplace_back("kept", ids);
    return md;
}

std::string run_tag(const RunConfig& cfg) {
    std::string tag = checkpoint_key_hex(cfg.chain, cfg.diag.solver.seed, cfg.diag.solver.tol).substr(0, 8) + "-s" +
                      std::to_string(propagated_states(cfg));
    if (!cfg.keep.empty()) tag += "-keep" + std::to_string(parse_state_list(cfg.keep).size());
    return tag;
}

// ============================================================================
// Subcommands
// ============================================================================

int cmd_basis_info(const RunConfig& cfg) {
    cfg.chain.validate();
    const HalfFilledBasis basis(cfg.chain.sites);
    nlohmann::ordered_json j;
    j["N"] = cfg.chain.sites;
    j["k"] = cfg.chain.sites / 2;
    j["D"] = basis.up.dimension();
    j["n"] = basis.dimension();
    std::cout << j.dump() << '\n';
    return kOk;
}

int cmd_diagonalize(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    log("diagonalizing N=" + std::to_string(cfg.chain.sites) + " v=" + fmt(cfg.chain.v) + " w=" + fmt(cfg.chain.w) +
        " U=" + fmt(cfg.chain.U) + " k=" + std::to_string(cfg.diag.solver.k));
    const auto sol = diagonalize_chain(cfg.chain, cfg.diag);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const fs::path path = cfg.checkpoint_file();
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_checkpoint(path, cfg.chain, sol, cfg.diag.solver.cluster_gap);
    const fs::path sidecar = fs::path(path).replace_extension(".json");
    write_checkpoint_sidecar(sidecar, cfg.chain, sol);
    nlohmann::ordered_json j;
    j["checkpoint"] = path.string();
    j["energies"] = sidecar.string();
    j["k"] = sol.count();
    j["ground_energy"] = sol.energies[0];
    j["max_residual"] = sol.residuals.maxCoeff();
    j["matvecs"] = sol.matvecs;
    j["seconds"] = std::round(seconds * 10.0) / 10.0;
    std::cout << j.dump() << '\n';
    return kOk;
}

int cmd_spectrum(const RunConfig& cfg, const std::string& out) {
    const int states = propagated_states(cfg);
    const auto sol = load_solution(cfg, states);
    auto tm = transition_matrix(sol, assemble_dipole_diagonal(cfg.chain));
    if (!cfg.keep.empty()) tm = reduce_levels(tm, parse_state_list(cfg.keep));
    log("propagating " + std::to_string(tm.size()) + " states");
    const auto traj = propagate_interaction_picture(tm, cfg.pulse, cfg.propagation);
    auto spec = spectrum_from_positions(traj.x, cfg.pulse);
    spec.metadata = run_metadata(cfg, tm, traj);

    const fs::path path = out.empty() ? cfg.directory / ("spectrum-" + run_tag(cfg) + ".csv") : fs::path(out);
    {
        auto os = open_output(path);
        write_spectrum_csv(os, spec);
    }
    nlohmann::ordered_json j;
    j["spectrum"] = path.string();
    if (cfg.trajectory) {
        const fs::path tpath = fs::path(path).replace_extension("").string() + "-trajectory.csv";
        auto os = open_output(tpath);
        write_trajectory_csv(os, traj.times, traj.x);
        j["trajectory"] = tpath.string();
    }
    j["states"] = tm.size();
    j["active_states"] = traj.active_states;
    j["max_norm_drift"] = traj.max_norm_drift;
    j["max_imag"] = traj.max_imag;
    j["mean_log10_yield_5_15"] = mean_log_yield(spec, 5.0, 15.0);
    std::cout << j.dump() << '\n';
    return kOk;
}

int cmd_reduce(const RunConfig& cfg, const std::string& out) {
    if (cfg.keep.empty()) throw ParameterError("reduce needs a kept state set (--keep 0,2,3,...)");
    const auto keep = parse_state_list(cfg.keep);
    int needed = 0;
    for (int id : keep) needed = std::max(needed, id + 1);
    needed = std::max(needed, propagated_states(cfg));
    const auto sol = load_solution(cfg, needed);
    const auto full = transition_matrix(sol, assemble_dipole_diagonal(cfg.chain));
    const auto reduced = reduce_levels(full, keep);
    const auto scheme = allowed_transitions(reduced, sol, cfg.pulse.omega, cfg.threshold);
    const fs::path base = out.empty() ? cfg.directory / ("reduce-" + run_tag(cfg)) : fs::path(out);
    const fs::path levels = base.string() + "-levels.json";
    {
        auto os = open_output(levels);
        write_level_scheme_json(os, scheme);
    }
    log("propagating the " + std::to_string(reduced.size()) + "-state model");
    const auto traj = propagate_interaction_picture(reduced, cfg.pulse, cfg.propagation);
    auto spec = spectrum_from_positions(traj.x, cfg.pulse);
    spec.metadata = run_metadata(cfg, reduced, traj);
    const fs::path spath = base.string() + "-spectrum.csv";
    {
        auto os = open_output(spath);
        write_spectrum_csv(os, spec);
    }
    nlohmann::ordered_json j;
    j["levels"] = levels.string();
    j["spectrum"] = spath.string();
    j["pairs"] = scheme.pairs.size();
    j["max_norm_drift"] = traj.max_norm_drift;
    std::cout << j.dump() << '\n';
    return kOk;
}

int cmd_configs(const RunConfig& cfg, const std::string& out) {
    const auto sol = load_solution(cfg, cfg.state + 1);
    const HalfFilledBasis basis(cfg.chain.sites);
    const auto report = dominant_configurations(basis, sol.vectors.col(cfg.state), cfg.top, cfg.state);
    write_configuration_table(std::cout, report);
    const fs::path path = out.empty()
                              ? cfg.directory / ("configs-" + run_tag(cfg).substr(0, 8) + "-state" +
                                                 std::to_string(cfg.state) + ".txt")
                              : fs::path(out);
    auto os = open_output(path);
    write_configuration_table(os, report);
    return kOk;
}

int cmd_uscan(const RunConfig& cfg, const std::string& out) {
    UScanOptions opts;
    opts.chain = cfg.chain;
    opts.pulse = cfg.pulse;
    opts.diag = cfg.diag;
    opts.propagation = cfg.propagation;
    opts.cache_dir = cfg.directory;
    opts.relative_threshold = cfg.threshold;
    opts.log = log;
    const auto points = u_scan(parse_value_grid(cfg.u_values), opts);
    const fs::path base = out.empty() ? cfg.directory / "uscan" : fs::path(out);
    const fs::path csv = base.string() + ".csv";
    const fs::path overlay = base.string() + "_overlay.json";
    {
        auto os = open_output(csv);
        write_uscan_csv(os, points);
    }
    {
        auto os = open_output(overlay);
        write_uscan_overlay_json(os, points);
    }
    int missing = 0;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& p : points) {
        if (!p.ok) {
            ++missing;
            rows.push_back({{"U", p.U}, {"error", p.error}});
            continue;
        }
        rows.push_back({{"U", p.U},
                        {"lowest_allowed_gap", std::isnan(p.lowest_allowed_gap) ? nlohmann::ordered_json()
                                                                               : nlohmann::ordered_json(p.lowest_allowed_gap)},
                        {"mean_log10_yield_5_15", mean_log_yield(p.spectrum, 5.0, 15.0)}});
    }
    nlohmann::ordered_json j;
    j["csv"] = csv.string();
    j["overlay"] = overlay.string();
    j["points"] = std::move(rows);
    j["missing"] = missing;
    std::cout << j.dump() << '\n';
    return missing ? kConvergence : kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact-diagonalization high-harmonic spectra of half-filled SSH-Hubbard chains"};
    app.require_subcommand(1);
    Invocation inv;
    app.add_option("-c,--config", inv.config_path, "INI configuration file")->check(CLI::ExistingFile);

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"basis-info", "print sector and composite basis dimensions"},
        {"diagonalize", "compute the lowest k eigenpairs and write a checkpoint"},
        {"spectrum", "propagate from a checkpoint and write the harmonic spectrum"},
        {"uscan", "spectra and level overlays over a grid of U values"},
        {"reduce", "few-level model: level scheme and spectrum for a kept state set"},
        {"configs", "dominant configurations of one eigenstate"},
        {"config", "print the effective configuration as INI"},
    };
    std::map<std::string, CLI::App*> commands;
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        add_key_options(sub, inv);
        sub->add_option("-o,--out", inv.out, "output path (or prefix)");
        commands[s.name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kParameter;
    }

    try {
        const RunConfig cfg = build_config(inv);
        if (commands["basis-info"]->parsed()) return cmd_basis_info(cfg);
        if (commands["diagonalize"]->parsed()) return cmd_diagonalize(cfg);
        if (commands["spectrum"]->parsed()) return cmd_spectrum(cfg, inv.out);
        if (commands["uscan"]->parsed()) return cmd_uscan(cfg, inv.out);
        if (commands["reduce"]->parsed()) return cmd_reduce(cfg, inv.out);
        if (commands["configs"]->parsed()) return cmd_configs(cfg, inv.out);
        if (commands["config"]->parsed()) {
            cfg.write_ini(std::cout);
            return kOk;
        }
    } catch (const StaleCheckpointError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kStale;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParameter;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConvergence;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConvergence;
    }
    return kParameter;
}
