// Command-line front end: run market clearings, export models for external
// solvers, and import external solutions through the same decode path.

#include "p2pmc/clearing.hpp"
#include "p2pmc/config_json.hpp"
#include "p2pmc/report.hpp"
#include "p2pmc/scenario.hpp"
#include "p2pmc/solver.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>

using namespace p2pmc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitChecksum = 4;

struct CommonArgs {
    std::string config_path;
    std::string loads_dir;
    std::string pv_path;
    std::string variant = "";
    uint64_t seed = 0;
    int activation_scenarios = 5;
    double sigma = 0.3;
    std::string solver = "";
    int workers = 0;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "community configuration JSON")->required();
    cmd->add_option("--loads", a.loads_dir, "directory of per-day load CSVs")->required();
    cmd->add_option("--pv", a.pv_path, "PV production CSV")->required();
    cmd->add_option("--variant", a.variant, "no-p2p|iid|iid-irt|all (default: config)");
    cmd->add_option("--seed", a.seed, "activation sampling seed");
    cmd->add_option("--activation-scenarios", a.activation_scenarios,
                    "number of activation scenarios");
    cmd->add_option("--sigma", a.sigma, "activation draw standard deviation");
    cmd->add_option("--solver", a.solver, "exact|rnf|lp|external (default: config)");
    cmd->add_option("--workers", a.workers, "worker threads (0: config value)");
    cmd->add_option("--out", a.out_dir, "output directory")->required();
}

struct Inputs {
    CommunityConfig cfg;
    ScenarioSet scen;
    std::vector<MarketVariant> variants;
    RunManifest manifest;
};

Inputs load_inputs(const CommonArgs& a) {
    Inputs in;
    in.cfg = load_config(a.config_path);
    if (!a.solver.empty()) {
        if (a.solver == "exact") in.cfg.solver.mode = SolveMode::exact_bnb;
        else if (a.solver == "rnf") in.cfg.solver.mode = SolveMode::relax_and_fix;
        else if (a.solver == "lp") in.cfg.solver.mode = SolveMode::lp_only;
        else if (a.solver == "external") in.cfg.solver.mode = SolveMode::external;
        else throw P2pmcError("unknown --solver '" + a.solver + "'");
    }
    if (a.workers > 0) in.cfg.solver.workers = a.workers;

    if (a.variant.empty()) in.variants = {in.cfg.variant};
    else if (a.variant == "all")
        in.variants = {MarketVariant::no_p2p, MarketVariant::iid_only, MarketVariant::iid_and_irt};
    else {
        auto v = variant_from_string(a.variant);
        if (!v) throw P2pmcError("unknown --variant '" + a.variant + "'");
        in.variants = {*v};
    }

    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(a.loads_dir)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        if (std::filesystem::weakly_canonical(e.path()) ==
            std::filesystem::weakly_canonical(a.pv_path))
            continue;
        files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw P2pmcError("no load CSVs found in '" + a.loads_dir + "'");
    std::vector<SeriesTable> days;
    for (const std::string& f : files) days.push_back(load_series_csv(f));
    SeriesTable pv = load_series_csv(a.pv_path);
    in.scen = ingest_load_scenarios(days, pv, in.cfg.peers, in.cfg.horizon);

    ActivationSamplerSpec spec;
    spec.seed = a.seed;
    spec.scenario_count = a.activation_scenarios;
    spec.sigma = a.sigma;
    sample_activation_scenarios(spec, in.cfg.horizon, in.scen);

    auto violations = validate_config(in.cfg, in.scen);
    if (!violations.empty()) {
        std::string msg = "configuration invalid:";
        for (const Violation& v : violations) msg += "\n  [" + v.code + "] " + v.message;
        throw P2pmcError(msg);
    }

    RunManifest& m = in.manifest;
    m.config_path = a.config_path;
    m.loads_dir = a.loads_dir;
    m.load_files = files;
    m.pv_path = a.pv_path;
    m.seed = a.seed;
    m.activation_scenarios = a.activation_scenarios;
    m.sigma = a.sigma;
    for (MarketVariant v : in.variants) m.variants.push_back(to_string(v));
    m.solver_mode = to_string(in.cfg.solver.mode);
    m.workers = in.cfg.solver.workers;
    m.out_dir = a.out_dir;
    m.tool_version = tool_version();
    return in;
}

int cmd_run(const CommonArgs& a) {
    Inputs in;
    try {
        in = load_inputs(a);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    if (in.cfg.solver.mode == SolveMode::external) {
        std::cerr << "error: --solver external does not solve; use export-mps, solve outside, "
                     "then import-sol\n";
        return kExitInput;
    }
    std::vector<ClearingResult> results;
    try {
        for (MarketVariant v : in.variants) {
            CommunityConfig cfg = in.cfg;
            cfg.variant = v;
            ClearingResult r = run_case_study(cfg, in.scen);
            std::fprintf(stderr, "%s: %s objective %.6f gap %s nodes %lld\n",
                         to_string(v).c_str(), to_string(r.status).c_str(), r.objective,
                         std::isfinite(r.gap) ? format_double(r.gap).c_str() : "n/a",
                         static_cast<long long>(r.nodes));
            in.manifest.model_checksums.emplace_back(to_string(v), checksum_hex(r.model_hash));
            results.push_back(std::move(r));
        }
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    }
    try {
        ensure_dir(a.out_dir);
        write_file(a.out_dir + "/result.json",
                   result_json(results, in.cfg.reserve_exclude_trailing_hours));
        write_file(a.out_dir + "/settlement.csv", settlement_csv(results));
        write_file(a.out_dir + "/reserve_bids.csv", reserve_bids_csv(results));
        write_file(a.out_dir + "/activation_decomposition.csv",
                   activation_decomposition_csv(results));
        write_file(a.out_dir + "/manifest.json", manifest_json(in.manifest));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}

int cmd_export_mps(const CommonArgs& a) {
    Inputs in;
    try {
        in = load_inputs(a);
        ensure_dir(a.out_dir);
        bool multi = in.variants.size() > 1;
        for (MarketVariant v : in.variants) {
            CommunityConfig cfg = in.cfg;
            cfg.variant = v;
            BuildResult built = build_model(cfg, in.scen);
            std::string hex = checksum_hex(built.instance.content_hash());
            MangledInstance mg = mangle_names(built.instance);
            std::string suffix = multi ? "_" + to_string(v) : "";
            write_file(a.out_dir + "/model" + suffix + ".mps", export_mps(mg.instance));
            write_file(a.out_dir + "/names" + suffix + ".csv", names_csv(mg.dictionary, hex));
            in.manifest.model_checksums.emplace_back(to_string(v), hex);
            std::fprintf(stderr, "%s: %lld vars, %lld rows, checksum %s\n", to_string(v).c_str(),
                         static_cast<long long>(built.instance.num_vars()),
                         static_cast<long long>(built.instance.num_rows()), hex.c_str());
        }
        in.manifest.solver_mode = "external";
        write_file(a.out_dir + "/manifest.json", manifest_json(in.manifest));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}

int cmd_import_sol(const CommonArgs& a, const std::string& sol_path,
                   const std::string& names_path) {
    Inputs in;
    try {
        in = load_inputs(a);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    if (in.variants.size() != 1) {
        std::cerr << "error: import-sol needs a single --variant\n";
        return kExitInput;
    }
    try {
        CommunityConfig cfg = in.cfg;
        cfg.variant = in.variants[0];
        BuildResult built = build_model(cfg, in.scen);
        std::string hex = checksum_hex(built.instance.content_hash());

        auto [dict, recorded] = parse_names_csv(read_file(names_path));
        if (recorded != hex) {
            std::cerr << "checksum mismatch: names.csv has " << recorded
                      << ", rebuilt model is " << hex
                      << " (different config, seed, or variant)\n";
            return kExitChecksum;
        }
        // the solution file speaks in aliases; imported against the mangled
        // twin, indices line up with the original instance one to one
        std::string sol_text = read_file(sol_path);
        MilpSolution sol;
        {
            ImportedSolution raw = import_solution(mangle_names(built.instance).instance, sol_text);
            for (const std::string& w : raw.warnings) std::cerr << "warning: " << w << "\n";
            sol.assignment = std::move(raw.assignment);
        }
        (void)dict;
        Evaluation ev = evaluate(built.instance, sol.assignment);
        sol.objective = ev.objective;
        sol.status = SolveStatus::feasible;
        sol.bound = -std::numeric_limits<double>::infinity();
        sol.gap = std::numeric_limits<double>::infinity();
        sol.note = "imported from " + sol_path;
        CheckReport check = check_solution(built.instance, sol, cfg.solver);
        if (!check.ok) {
            std::fprintf(stderr,
                         "imported point violates the model: row %.3e bound %.3e int %.3e\n",
                         check.max_row_violation, check.max_bound_violation,
                         check.max_integrality_violation);
            sol.status = SolveStatus::limit;
            sol.note += " (fails feasibility check)";
        }
        ClearingResult r = decode_solution(cfg, in.scen, built, sol);
        std::fprintf(stderr, "imported objective %.6f (%s)\n", r.objective,
                     to_string(r.status).c_str());
        in.manifest.model_checksums.emplace_back(to_string(cfg.variant), hex);
        ensure_dir(a.out_dir);
        std::vector<ClearingResult> results;
        results.push_back(std::move(r));
        write_file(a.out_dir + "/result.json",
                   result_json(results, in.cfg.reserve_exclude_trailing_hours));
        write_file(a.out_dir + "/settlement.csv", settlement_csv(results));
        write_file(a.out_dir + "/reserve_bids.csv", reserve_bids_csv(results));
        write_file(a.out_dir + "/activation_decomposition.csv",
                   activation_decomposition_csv(results));
        write_file(a.out_dir + "/manifest.json", manifest_json(in.manifest));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"community peer-to-peer market clearing"};
    app.require_subcommand(1);

    CommonArgs run_args, export_args, import_args;
    CLI::App* run = app.add_subcommand("run", "solve the clearing problem and write reports");
    add_common(run, run_args);
    CLI::App* exp = app.add_subcommand("export-mps", "write the model as fixed-format MPS");
    add_common(exp, export_args);
    CLI::App* imp = app.add_subcommand("import-sol", "decode an externally produced solution");
    add_common(imp, import_args);
    std::string sol_path, names_path;
    imp->add_option("--sol", sol_path, "solution file (name value lines)")->required();
    imp->add_option("--names", names_path, "alias dictionary from export-mps")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    if (run->parsed()) return cmd_run(run_args);
    if (exp->parsed()) return cmd_export_mps(export_args);
    if (imp->parsed()) return cmd_import_sol(import_args, sol_path, names_path);
    return kExitInput;
}
