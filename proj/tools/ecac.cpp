// ecac - analysis and simulation front end for three-class VoIP call
// admission control: call-level blocking, packet-level dropping, threshold
// optimization, sweeps, and a validating discrete-event simulator.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecac/call_level.hpp"
#include "ecac/config.hpp"
#include "ecac/io.hpp"
#include "ecac/optimizer.hpp"
#include "ecac/packet_level.hpp"
#include "ecac/simulator.hpp"
#include "ecac/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

struct CommonArgs {
    std::string scenario_path;
    std::string out_path;
    std::string format = "json";
    std::string blocking_formula = "indicator";
    std::string baseline = "fixed-open";
    int jobs = 1;
};

void emit(const CommonArgs& args, const std::string& content) {
    if (args.out_path.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << '\n';
    } else {
        ecac::write_text_file(args.out_path, content);
    }
}

void add_scenario_option(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario_path, "scenario JSON file")->required();
}

std::vector<double> parse_values(const std::string& csv, double from, double to, double step) {
    std::vector<double> values;
    if (!csv.empty()) {
        std::size_t pos = 0;
        while (pos <= csv.size()) {
            const std::size_t comma = csv.find(',', pos);
            const std::string item = csv.substr(pos, comma == std::string::npos ? std::string::npos
                                                                                : comma - pos);
            if (!item.empty()) values.push_back(std::stod(item));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return values;
    }
    if (step <= 0.0) throw ecac::ValidationError("sweep: --step must be > 0");
    // half-step slack keeps the endpoint when from/to/step do not divide evenly
    for (double v = from; v <= to + step * 0.5; v += step) values.push_back(v);
    return values;
}

int run_app(int argc, char** argv) {
    CLI::App app{"three-class VoIP admission-control analysis toolkit"};
    app.require_subcommand(1);
    CommonArgs args;

    // validate
    auto* validate = app.add_subcommand("validate", "validate a scenario file and echo it");
    add_scenario_option(validate, args);
    validate->callback([&] {
        ecac::ScenarioConfig cfg = ecac::load_scenario(args.scenario_path);
        ecac::json out = ecac::scenario_to_json(cfg);
        const ecac::TrafficIntensities rho = ecac::traffic_intensities(cfg);
        out["derived"] = {{"rho_e", rho.rho_e},
                          {"rho_gin", rho.rho_gin},
                          {"rho_gout", rho.rho_gout},
                          {"packet_service_rate", cfg.packet_service_rate()}};
        emit(args, out.dump(2));
    });

    // solve-call
    auto* solve = app.add_subcommand("solve-call", "blocking probabilities at fixed thresholds");
    add_scenario_option(solve, args);
    int tgin = 0, tgout = 0;
    solve->add_option("--tgin", tgin, "general-in threshold")->required();
    solve->add_option("--tgout", tgout, "general-out threshold")->required();
    solve->add_option("--blocking-formula", args.blocking_formula, "indicator|paper-eq");
    std::string dump_path;
    solve->add_option("--dump-generator", dump_path, "write the rate matrix as 'row col rate' lines");
    solve->add_option("--out", args.out_path, "output file (default stdout)");
    solve->callback([&] {
        ecac::ScenarioConfig cfg = ecac::load_scenario(args.scenario_path);
        const ecac::ThresholdPair t{tgin, tgout};
        t.validate(cfg.capacity.max_sessions);
        ecac::StateSpace space(cfg.capacity.max_sessions, t);
        const ecac::SparseMatrix g = ecac::build_generator(space, cfg, t);
        if (!dump_path.empty()) ecac::write_text_file(dump_path, ecac::generator_coordinate_dump(g));
        ecac::SteadyStateDistribution dist = ecac::solve_steady_state(g, space);
        const ecac::BlockingProbabilities blocking = ecac::blocking_probabilities(
            dist, space, ecac::blocking_formula_from_string(args.blocking_formula));
        ecac::json out{{"thresholds", ecac::to_json(t)},
                       {"states", space.size()},
                       {"blocking", ecac::to_json(blocking)},
                       {"balance_residual", dist.residual}};
        emit(args, out.dump(2));
    });

    // packet-drop
    auto* drop = app.add_subcommand("packet-drop", "dropping probability of one combination");
    add_scenario_option(drop, args);
    int ne = 0, ngin = 0, ngout = 0;
    drop->add_option("--ne", ne, "emergency sessions")->required();
    drop->add_option("--ngin", ngin, "general-in sessions")->required();
    drop->add_option("--ngout", ngout, "general-out sessions")->required();
    drop->add_option("--out", args.out_path, "output file (default stdout)");
    drop->callback([&] {
        ecac::ScenarioConfig cfg = ecac::load_scenario(args.scenario_path);
        const ecac::CallState combination{ne, ngin, ngout};
        ecac::json phases = ecac::json::array();
        double probability = 0.0;
        if (combination.total() > 0) {
            const ecac::SuperposedMmpp mmpp =
                ecac::superposed_mmpp_for_combination(combination, cfg);
            probability = ecac::solve_mmpp_m1k(mmpp, cfg.packet_service_rate(),
                                               cfg.capacity.queue_capacity)
                              .drop_probability;
            for (int p = 0; p < mmpp.phase_count(); ++p)
                phases.push_back(
                    ecac::json{{"label", mmpp.phase_labels[static_cast<std::size_t>(p)]},
                               {"arrival_rate", mmpp.arrival_rates[p]}});
        }
        ecac::json out{{"combination",
                        {{"n_e", combination.n_e},
                         {"n_gin", combination.n_gin},
                         {"n_gout", combination.n_gout}}},
                       {"drop_probability", probability},
                       {"phases", phases}};
        emit(args, out.dump(2));
    });

    // optimize
    auto* opt = app.add_subcommand("optimize", "full search for the optimal threshold pair");
    add_scenario_option(opt, args);
    std::string csv_path;
    opt->add_option("--csv", csv_path, "also write one CSV row per evaluated pair");
    opt->add_option("--blocking-formula", args.blocking_formula, "indicator|paper-eq");
    opt->add_option("--out", args.out_path, "output file (default stdout)");
    opt->callback([&] {
        ecac::ScenarioConfig cfg = ecac::load_scenario(args.scenario_path);
        ecac::OptimizationResult result =
            ecac::optimize(cfg, ecac::blocking_formula_from_string(args.blocking_formula));
        if (!csv_path.empty())
            ecac::write_text_file(csv_path, ecac::evaluations_csv(result.evaluations));
        emit(args, ecac::to_json(result).dump(2));
    });

    // surface
    auto* surface = app.add_subcommand("surface", "average drop over every threshold pair");
    add_scenario_option(surface, args);
    surface->add_option("--out", args.out_path, "output file (default stdout)");
    surface->add_option("--format", args.format, "csv|json");
    surface->callback([&] {
        ecac::ScenarioConfig cfg = ecac::load_scenario(args.scenario_path);
        const std::vector<ecac::SurfaceRow> rows = ecac::emit_threshold_surface(cfg);
        if (args.format == "csv") emit(args, ecac::surface_csv(rows));
        else if (args.format == "json") emit(args, ecac::to_json(rows).dump(2));
        else throw ecac::ValidationError("unknown format '" + args.format + "'");
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "optimize across a swept parameter");
    add_scenario_option(sweep, args);
    std::string param, values_csv;
    double from = 0.0, to = 0.0, step = 0.0;
    bool with_baseline = false;
    int fixed_tgin = -1, fixed_tgout = -1;
    sweep->add_option("--param", param, "rho_e|rho_gin|rho_gout|C_gin|t_gin|t_gout|K")->required();
    sweep->add_option("--values", values_csv, "comma-separated values");
    sweep->add_option("--from", from, "range start (with --to/--step)");
    sweep->add_option("--to", to, "range end");
    sweep->add_option("--step", step, "range step");
    sweep->add_flag("--with-baseline", with_baseline, "also evaluate the conventional baseline");
    sweep->add_option("--baseline", args.baseline, "fixed-open|no-drop-constraint");
    sweep->add_option("--tgin", fixed_tgin, "fixed t_gin when sweeping t_gout");
    sweep->add_option("--tgout", fixed_tgout, "fixed t_gout when sweeping t_gin");
    sweep->add_option("--blocking-formula", args.blocking_formula, "indicator|paper-eq");
    sweep->add_option("--jobs", args.jobs, "worker threads");
    sweep->add_option("--out", args.out_path, "output file (default stdout)");
    sweep->add_option("--format", args.format, "csv|json");
    sweep->callback([&] {
        ecac::SweepSpec spec;
        spec.base = ecac::load_scenario(args.scenario_path);
        spec.parameter = ecac::swept_parameter_from_string(param);
        spec.values = parse_values(values_csv, from, to, step);
        spec.with_baseline = with_baseline;
        spec.baseline_variant = ecac::baseline_variant_from_string(args.baseline);
        spec.formula = ecac::blocking_formula_from_string(args.blocking_formula);
        if (spec.parameter == ecac::SweptParameter::TGin ||
            spec.parameter == ecac::SweptParameter::TGout) {
            const int n = spec.base.capacity.max_sessions;
            ecac::ThresholdPair fixed{fixed_tgin >= 0 ? fixed_tgin : n,
                                      fixed_tgout >= 0 ? fixed_tgout : 0};
            if (spec.parameter == ecac::SweptParameter::TGin && fixed_tgout < 0)
                throw ecac::ValidationError("sweep: sweeping t_gin requires --tgout");
            if (spec.parameter == ecac::SweptParameter::TGout && fixed_tgin < 0)
                throw ecac::ValidationError("sweep: sweeping t_gout requires --tgin");
            spec.fixed_thresholds = fixed;
        }
        const std::vector<ecac::SweepRow> rows = ecac::run_sweep(spec, args.jobs);
        if (args.format == "csv") emit(args, ecac::sweep_csv(spec, rows));
        else if (args.format == "json") emit(args, ecac::to_json(spec, rows).dump(2));
        else throw ecac::ValidationError("unknown format '" + args.format + "'");
    });

    // simulate
    auto* simulate = app.add_subcommand("simulate", "discrete-event call-level simulation");
    add_scenario_option(simulate, args);
    std::uint64_t arrivals = 1000000, seed = 1;
    int reps = 10;
    double warmup = 0.1;
    int sim_tgin = 0, sim_tgout = 0;
    std::string rep_csv;
    simulate->add_option("--tgin", sim_tgin, "general-in threshold")->required();
    simulate->add_option("--tgout", sim_tgout, "general-out threshold")->required();
    simulate->add_option("--arrivals", arrivals, "arrival budget per replication");
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--reps", reps, "replication count");
    simulate->add_option("--warmup", warmup, "warmup fraction discarded");
    simulate->add_option("--csv", rep_csv, "write per-replication estimates as CSV");
    simulate->add_option("--out", args.out_path, "output file (default stdout)");
    simulate->callback([&] {
        ecac::SimulationConfig sim;
        sim.scenario = ecac::load_scenario(args.scenario_path);
        sim.thresholds = {sim_tgin, sim_tgout};
        sim.arrival_budget = arrivals;
        sim.seed = seed;
        sim.replications = reps;
        sim.warmup = warmup;
        const ecac::SimulationReport report = ecac::run_simulation(sim);
        if (!rep_csv.empty()) {
            std::string csv = "replication,L_b_e,L_b_gin,L_b_gout\n";
            for (int r = 0; r < reps; ++r) {
                csv += std::to_string(r);
                for (ecac::SessionClass c : ecac::kSessionClasses)
                    csv += ',' + ecac::format_double(
                                     report.estimate(c).per_replication[static_cast<std::size_t>(r)]);
                csv += '\n';
            }
            ecac::write_text_file(rep_csv, csv);
        }
        emit(args, ecac::to_json(report).dump(2));
    });

    // compare
    auto* compare = app.add_subcommand("compare", "simulation vs analytical blocking");
    add_scenario_option(compare, args);
    std::uint64_t cmp_arrivals = 1000000, cmp_seed = 1;
    int cmp_reps = 10, cmp_tgin = 0, cmp_tgout = 0;
    compare->add_option("--tgin", cmp_tgin, "general-in threshold")->required();
    compare->add_option("--tgout", cmp_tgout, "general-out threshold")->required();
    compare->add_option("--arrivals", cmp_arrivals, "arrival budget per replication");
    compare->add_option("--seed", cmp_seed, "RNG seed");
    compare->add_option("--reps", cmp_reps, "replication count");
    compare->add_option("--blocking-formula", args.blocking_formula, "indicator|paper-eq");
    compare->add_option("--out", args.out_path, "output file (default stdout)");
    compare->callback([&] {
        ecac::ScenarioConfig cfg = ecac::load_scenario(args.scenario_path);
        const ecac::ThresholdPair t{cmp_tgin, cmp_tgout};
        ecac::SimulationConfig sim;
        sim.scenario = cfg;
        sim.thresholds = t;
        sim.arrival_budget = cmp_arrivals;
        sim.seed = cmp_seed;
        sim.replications = cmp_reps;
        const ecac::SimulationReport report = ecac::run_simulation(sim);
        const ecac::CallLevelSolution analytical = ecac::solve_call_level(
            cfg, t, ecac::blocking_formula_from_string(args.blocking_formula));
        const ecac::TheoryComparison cmp = ecac::compare_to_theory(report, t, analytical.blocking);
        ecac::json out{{"thresholds", ecac::to_json(t)},
                       {"analytical", ecac::to_json(analytical.blocking)},
                       {"simulation", ecac::to_json(report)},
                       {"comparison", ecac::to_json(cmp)}};
        emit(args, out.dump(2));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const ecac::SolveError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ecac::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ecac::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}
