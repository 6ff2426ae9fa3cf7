// cli_app.hpp
// Command-line front end: configuration, seeded execution, and report
// emission for all library modules. Kept header-only so the test suite can
// drive the exact same entry point in-process.
//
// Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 I/O failure.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "belllab/bellsim.hpp"
#include "belllab/relatedness.hpp"
#include "belllab/version.hpp"

namespace belllab::cli {

using nlohmann::ordered_json;

// All numeric JSON fields are rounded to 9 significant digits so reports are
// diff-stable across runs.
inline double sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::strtod(buf, nullptr);
}

inline ordered_json sig9_array(const std::vector<double>& values) {
    ordered_json arr = ordered_json::array();
    for (double v : values) arr.push_back(sig9(v));
    return arr;
}

struct io_failure : error {
    using error::error;
};
struct usage_failure : error {
    using error::error;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_failure("cannot open for writing: " + path);
    os << content;
    os.flush();
    if (!os) throw io_failure("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_failure("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline std::uint64_t default_seed() {
    const char* env = std::getenv("BELLLAB_SEED");
    if (env == nullptr || *env == '\0') return 0;
    try {
        return std::stoull(env);
    } catch (const std::exception&) {
        throw usage_failure("BELLLAB_SEED is not a valid unsigned integer");
    }
}

inline models::StrategyEnsemble load_strategy_file(const std::string& path) {
    const std::string text = read_text_file(path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw usage_failure(std::string("strategy file is not valid JSON: ") + e.what());
    }
    if (!doc.is_array() || doc.empty())
        throw usage_failure("strategy file must be a non-empty JSON array");
    std::vector<models::StrategyTable> tables;
    std::vector<double> weights;
    try {
        for (const auto& row : doc) {
            tables.emplace_back(row.at("A").get<int>(), row.at("A'").get<int>(),
                                row.at("B").get<int>(), row.at("B'").get<int>());
            weights.push_back(row.value("weight", 1.0));
        }
        return models::StrategyEnsemble(std::move(tables), std::move(weights));
    } catch (const std::exception& e) {
        throw usage_failure(std::string("bad strategy file entry: ") + e.what());
    }
}

// --- verify reports -------------------------------------------------------

inline std::pair<ordered_json, bool> spectrum_report() {
    const spin::EtaSpectrumReport rep = spin::eta_spectrum_report(1e-9);
    ordered_json out;
    out["eigenvalues"] = sig9_array(rep.eigenvalues);
    out["multiplicities"] = rep.multiplicities;
    out["singlet_eigenvalue"] = sig9(rep.singlet_eigenvalue);
    out["singlet_overlap"] = sig9(rep.singlet_overlap);
    out["pass"] = rep.pass;
    return {out, rep.pass};
}

inline std::pair<ordered_json, bool> relatedness_report() {
    using namespace relatedness;
    constexpr std::size_t kCircle = 360;
    const TransformationGroup group = TransformationGroup::cyclic(kCircle);
    const std::vector<std::size_t> shifts = {0, 45, 90};
    std::vector<MaximalVariable> vars;
    for (std::size_t s : shifts)
        vars.push_back(sign_cos_circle_variable(kCircle, s, "theta_" + std::to_string(s)));

    bool pass = true;
    ordered_json pairs = ordered_json::array();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        for (std::size_t j = i + 1; j < vars.size(); ++j) {
            const std::optional<std::size_t> w =
                variables_related_under_group(vars[i], vars[j], group);
            ordered_json entry;
            entry["names"] = {vars[i].name, vars[j].name};
            entry["related"] = w.has_value();
            if (w)
                entry["witness"] = *w;  // cyclic elements sort by shift
            else
                entry["witness"] = nullptr;
            pairs.push_back(entry);
            // the expected witness carries direction j's grid angle onto i's
            const std::size_t expected = (kCircle - (shifts[j] - shifts[i])) % kCircle;
            pass = pass && w.has_value() && *w == expected;
        }
    }

    const Theorem1Report t1 = theorem1_witness(vars[0], vars[1], vars[2], group);
    ordered_json t1json;
    t1json["hypothesis_met"] = t1.hypothesis_met;
    t1json["k"] = t1.k ? ordered_json(*t1.k) : ordered_json(nullptr);
    t1json["s"] = t1.s ? ordered_json(*t1.s) : ordered_json(nullptr);
    t1json["composed"] = t1.composed ? ordered_json(*t1.composed) : ordered_json(nullptr);
    t1json["composition_verified"] = t1.composition_verified;
    pass = pass && t1.hypothesis_met && t1.composition_verified;

    ordered_json out;
    out["domain"] = "circle-" + std::to_string(kCircle);
    out["pairs"] = pairs;
    out["theorem1"] = t1json;
    out["pass"] = pass;
    return {out, pass};
}

inline std::pair<ordered_json, bool> theorem1_report() {
    using namespace relatedness;
    constexpr std::size_t kCircle = 60;
    constexpr int kTrials = 200;
    const TransformationGroup group = TransformationGroup::cyclic(kCircle);

    rng::Stream stream(rng::derive_seed(0x7433656f72656d31ULL, 1, 0));
    int met = 0, vacuous = 0, counterexamples = 0;
    for (int trial = 0; trial < kTrials; ++trial) {
        MaximalVariable theta{"theta", {}};
        theta.values.resize(kCircle);
        for (double& v : theta.values) v = stream.next_double();

        const std::size_t k = stream.next_u64() % group.size();
        const std::size_t s = stream.next_u64() % group.size();
        MaximalVariable eta{"eta", std::vector<double>(kCircle)};
        MaximalVariable xi{"xi", std::vector<double>(kCircle)};
        for (std::size_t n = 0; n < kCircle; ++n) {
            eta.values[n] = theta.values[group.element(k)[n]];
            xi.values[n] = theta.values[group.element(s)[n]];
        }
        if (trial % 5 == 4) {
            // unrelated third variable: hypothesis must come out vacuous
            for (double& v : xi.values) v = stream.next_double();
        }
        const Theorem1Report rep = theorem1_witness(theta, eta, xi, group);
        if (rep.vacuous) {
            ++vacuous;
            continue;
        }
        ++met;
        if (!rep.composition_verified) ++counterexamples;
    }
    const bool pass = counterexamples == 0 && met > 0;
    ordered_json out;
    out["trials"] = kTrials;
    out["hypothesis_met"] = met;
    out["vacuous"] = vacuous;
    out["counterexamples"] = counterexamples;
    out["pass"] = pass;
    return {out, pass};
}

inline std::pair<ordered_json, bool> theorem2_report() {
    using namespace relatedness;
    const Theorem2Variables vars = theorem2_variables();
    const TransformationGroup group = signed_coordinate_permutation_group();

    bool pass = true;
    ordered_json points = ordered_json::array();
    int d_plus = 0;
    for (int n = 15; n >= 0; --n) {
        const std::size_t u = static_cast<std::size_t>(n);
        ordered_json row;
        row["A"] = static_cast<int>(vars.A.values[u]);
        row["A'"] = static_cast<int>(vars.A_prime.values[u]);
        row["B"] = static_cast<int>(vars.B.values[u]);
        row["B'"] = static_cast<int>(vars.B_prime.values[u]);
        row["C"] = static_cast<int>(vars.C.values[u]);
        row["D"] = static_cast<int>(vars.D.values[u]);
        points.push_back(row);
        if (vars.D.values[u] == 1.0) ++d_plus;
        const double expect_c = vars.A.values[u] * (vars.B.values[u] + vars.B_prime.values[u]);
        pass = pass && vars.C.values[u] == expect_c &&
               vars.D.values[u] == std::abs(expect_c) - 1.0;
    }
    pass = pass && d_plus == 8;

    const MaximalVariable* coords[] = {&vars.A, &vars.A_prime, &vars.B, &vars.B_prime};
    ordered_json related_pairs = ordered_json::array();
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            const auto w = variables_related_under_group(*coords[i], *coords[j], group);
            related_pairs.push_back({coords[i]->name, coords[j]->name});
            pass = pass && w.has_value();
        }
    }
    const bool c_related = variables_related_under_group(vars.A_prime, vars.C, group).has_value();
    const bool d_related = variables_related_under_group(vars.A_prime, vars.D, group).has_value();
    pass = pass && !c_related && !d_related;

    ordered_json out;
    out["group"] = "signed-coordinate-permutations";
    out["group_size"] = group.size();
    out["points"] = points;
    out["d_plus_count"] = d_plus;
    out["related_pairs"] = related_pairs;
    out["non_related_to_A'"] = {"C", "D"};
    out["pass"] = pass;
    return {out, pass};
}

// --- simulate ---------------------------------------------------------------

struct SimulateFlags {
    std::string model = "qm";
    long rounds = 100000;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::vector<double> angles = {0.0, 90.0, 45.0, 315.0};
    std::string out;
    std::string strategy_file;
    int workers = 1;
    bool sweep = false;
    int sweep_points = 37;
};

inline std::vector<std::string> canonical_simulate_argv(const SimulateFlags& f) {
    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::vector<std::string> argv = {"simulate", "--model", f.model,
                                     "--rounds", std::to_string(f.rounds),
                                     "--seed", std::to_string(f.seed),
                                     "--angles",
                                     fmt(f.angles[0]) + "," + fmt(f.angles[1]) + "," +
                                         fmt(f.angles[2]) + "," + fmt(f.angles[3]),
                                     "--out", f.out};
    if (!f.strategy_file.empty()) {
        argv.push_back("--strategy-file");
        argv.push_back(f.strategy_file);
    }
    if (f.workers != 1) {
        argv.push_back("--workers");
        argv.push_back(std::to_string(f.workers));
    }
    if (f.sweep) {
        argv.push_back("--sweep");
        argv.push_back("--sweep-points");
        argv.push_back(std::to_string(f.sweep_points));
    }
    return argv;
}

inline ordered_json manifest_json(const std::string& command,
                                  const std::vector<std::string>& argv, std::uint64_t seed,
                                  const ordered_json& config,
                                  const std::vector<std::string>& outputs) {
    ordered_json m;
    m["command"] = command;
    m["argv"] = argv;
    m["version"] = kVersion;
    m["seed"] = seed;
    m["config"] = config;
    m["outputs"] = outputs;
    return m;
}

inline ordered_json summary_json(const SimulateFlags& flags,
                                 const bellsim::ChshEstimate& est, bool feasible) {
    ordered_json e;
    e["ab"] = sig9(est.e_ab);
    e["a'b"] = sig9(est.e_apb);
    e["ab'"] = sig9(est.e_abp);
    e["a'b'"] = sig9(est.e_apbp);

    ordered_json out;
    out["model"] = flags.model;
    out["settings_deg"] = sig9_array(flags.angles);
    out["rounds"] = flags.rounds;
    out["E"] = e;
    out["S"] = sig9(est.s);
    out["SE"] = sig9(est.se);
    out["sigma_above_2"] = sig9(est.sigma_above_2);
    out["feasible"] = feasible;
    out["max_deterministic_S"] =
        sig9(bellsim::enumerate_deterministic_strategies().max_abs_s);
    return out;
}

inline int cmd_simulate(const SimulateFlags& flags) {
    const models::Model model = models::model_from_name(flags.model);
    models::StrategyEnsemble ensemble;
    if (model == models::Model::lhv_table) {
        if (flags.strategy_file.empty())
            throw usage_failure("--strategy-file is required with --model lhv-table");
        ensemble = load_strategy_file(flags.strategy_file);
    }
    const models::SettingsQuad settings(flags.angles[0], flags.angles[1], flags.angles[2],
                                        flags.angles[3]);

    ordered_json config;
    config["model"] = flags.model;
    config["settings_deg"] = sig9_array(flags.angles);
    config["rounds"] = flags.rounds;
    config["workers"] = flags.workers;
    if (!flags.strategy_file.empty()) config["strategy_file"] = flags.strategy_file;

    if (flags.sweep) {
        if (model == models::Model::lhv_table)
            throw usage_failure("--sweep supports qm and lhv-cos only");
        if (flags.sweep_points < 2) throw usage_failure("--sweep-points must be >= 2");
        config["sweep_points"] = flags.sweep_points;

        std::ostringstream csv;
        csv << "theta_deg,E_model,E_empirical\n";
        for (int j = 0; j < flags.sweep_points; ++j) {
            const double theta_deg = 180.0 * j / (flags.sweep_points - 1);
            const double theta_rad = spin::deg_to_rad(theta_deg);
            const double e_model = model == models::Model::qm
                                       ? -std::cos(theta_rad)
                                       : models::lhv_cos_correlation(theta_rad);
            bellsim::ExperimentConfig cfg;
            cfg.model = model;
            cfg.settings = models::SettingsQuad(0.0, 0.0, theta_deg, theta_deg);
            cfg.rounds = flags.rounds;
            cfg.master_seed = rng::derive_seed(flags.seed, 1000, static_cast<std::uint64_t>(j));
            const std::vector<models::TrialRecord> log =
                bellsim::run_protocol(cfg, flags.workers);
            double sum = 0.0;
            for (const models::TrialRecord& r : log)
                sum += static_cast<double>(r.outcome_a * r.outcome_b);
            const double e_emp = sum / static_cast<double>(log.size());
            char row[128];
            std::snprintf(row, sizeof(row), "%.9g,%.9g,%.9g\n", theta_deg, e_model, e_emp);
            csv << row;
        }
        const std::string sweep_path = flags.out + ".sweep.csv";
        const std::string manifest_path = flags.out + ".manifest.json";
        write_text_file(sweep_path, csv.str());
        const ordered_json manifest =
            manifest_json("simulate", canonical_simulate_argv(flags), flags.seed, config,
                          {sweep_path});
        write_text_file(manifest_path, manifest.dump(2) + "\n");
        std::cout << manifest.dump(2) << std::endl;
        return 0;
    }

    bellsim::ExperimentConfig cfg;
    cfg.model = model;
    cfg.settings = settings;
    cfg.rounds = flags.rounds;
    cfg.master_seed = flags.seed;
    cfg.ensemble = ensemble;

    const std::vector<models::TrialRecord> log = bellsim::run_protocol(cfg, flags.workers);
    const bellsim::ChshEstimate est = bellsim::estimate_chsh(log);

    const bellsim::FourPMFs pmfs = bellsim::model_joint_pmfs(
        model, settings, model == models::Model::lhv_table ? &ensemble : nullptr);
    const bellsim::FeasibilityResult feas =
        bellsim::joint_feasibility(pmfs.ab, pmfs.abp, pmfs.apb, pmfs.apbp);

    std::ostringstream csv;
    models::write_trial_csv(csv, log);

    const ordered_json summary = summary_json(flags, est, feas.feasible);
    const std::string trials_path = flags.out + ".trials.csv";
    const std::string summary_path = flags.out + ".summary.json";
    const std::string manifest_path = flags.out + ".manifest.json";
    write_text_file(trials_path, csv.str());
    write_text_file(summary_path, summary.dump(2) + "\n");
    const ordered_json manifest =
        manifest_json("simulate", canonical_simulate_argv(flags), flags.seed, config,
                      {trials_path, summary_path});
    write_text_file(manifest_path, manifest.dump(2) + "\n");
    std::cout << summary.dump(2) << std::endl;
    return 0;
}

// --- other subcommands -------------------------------------------------------

inline int cmd_verify(const std::string& target) {
    std::pair<ordered_json, bool> rep;
    if (target == "spectrum") rep = spectrum_report();
    else if (target == "relatedness") rep = relatedness_report();
    else if (target == "theorem1") rep = theorem1_report();
    else if (target == "theorem2") rep = theorem2_report();
    else throw usage_failure("unknown verify target: " + target +
                             " (expected spectrum|relatedness|theorem1|theorem2)");
    std::cout << rep.first.dump(2) << std::endl;
    return rep.second ? 0 : 1;
}

inline int cmd_enumerate() {
    const bellsim::EnumerationResult res = bellsim::enumerate_deterministic_strategies();
    ordered_json tables = ordered_json::array();
    for (const models::StrategyTable& t : res.argmax_positive) {
        ordered_json row;
        row["A"] = t.a;
        row["A'"] = t.a_prime;
        row["B"] = t.b;
        row["B'"] = t.b_prime;
        tables.push_back(row);
    }
    ordered_json out;
    out["max_S"] = sig9(res.max_abs_s);
    out["argmax_count"] = res.argmax_positive.size();
    out["argmax_tables"] = tables;
    std::cout << out.dump(2) << std::endl;
    return 0;
}

inline int cmd_optimize(const std::string& model_name, const std::vector<double>& start,
                        double tol) {
    const models::Model model = models::model_from_name(model_name);
    const models::SettingsQuad start_quad(start[0], start[1], start[2], start[3]);
    const bellsim::OptimizeResult res = bellsim::optimize_angles(model, start_quad, tol);
    ordered_json out;
    out["model"] = model_name;
    out["start_deg"] = sig9_array(start);
    out["settings_deg"] = sig9_array({res.settings.a_deg, res.settings.a_prime_deg,
                                      res.settings.b_deg, res.settings.b_prime_deg});
    out["S"] = sig9(res.s);
    out["S_abs"] = sig9(res.abs_s);
    std::cout << out.dump(2) << std::endl;
    return 0;
}

inline int cmd_feasibility(const std::string& model_name, const std::vector<double>& angles,
                           const std::string& strategy_file) {
    const models::Model model = models::model_from_name(model_name);
    models::StrategyEnsemble ensemble;
    if (model == models::Model::lhv_table) {
        if (strategy_file.empty())
            throw usage_failure("--strategy-file is required with --model lhv-table");
        ensemble = load_strategy_file(strategy_file);
    }
    const models::SettingsQuad settings(angles[0], angles[1], angles[2], angles[3]);
    const bellsim::FourPMFs pmfs = bellsim::model_joint_pmfs(
        model, settings, model == models::Model::lhv_table ? &ensemble : nullptr);
    const bellsim::FeasibilityResult res =
        bellsim::joint_feasibility(pmfs.ab, pmfs.abp, pmfs.apb, pmfs.apbp);

    ordered_json out;
    out["model"] = model_name;
    out["settings_deg"] = sig9_array(angles);
    out["feasible"] = res.feasible;
    if (res.violated) {
        out["violated_variant"] = res.violated->minus_term;
        out["violated_value"] = sig9(res.violated->value);
    } else {
        out["violated_variant"] = nullptr;
        out["violated_value"] = nullptr;
    }
    if (res.joint) out["joint"] = sig9_array(std::vector<double>(res.joint->begin(), res.joint->end()));
    std::cout << out.dump(2) << std::endl;
    return 0;
}

// --- entry point ----------------------------------------------------------

inline int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"belllab: a desk-scale Bell/CHSH laboratory"};
    app.require_subcommand(1);

    SimulateFlags sim;
    CLI::App* simulate = app.add_subcommand("simulate", "run the Bell experiment protocol");
    simulate->add_option("--model", sim.model, "qm | lhv-cos | lhv-table")
        ->check(CLI::IsMember({"qm", "lhv-cos", "lhv-table"}));
    simulate->add_option("--rounds", sim.rounds, "number of rounds")
        ->check(CLI::Range(1L, std::numeric_limits<long>::max()));
    CLI::Option* seed_opt = simulate->add_option("--seed", sim.seed, "master seed");
    simulate->add_option("--angles", sim.angles, "a,a',b,b' in degrees")
        ->delimiter(',')
        ->expected(4);
    simulate->add_option("--out", sim.out, "output path prefix")->required();
    simulate->add_option("--strategy-file", sim.strategy_file, "JSON strategy ensemble");
    simulate->add_option("--workers", sim.workers, "parallel workers")->check(CLI::Range(1, 1024));
    simulate->add_flag("--sweep", sim.sweep, "emit correlation-curve CSV over a theta grid");
    simulate->add_option("--sweep-points", sim.sweep_points, "grid size for --sweep");

    std::string verify_target;
    CLI::App* verify = app.add_subcommand("verify", "run a verification and print its report");
    verify->add_option("target", verify_target, "spectrum | relatedness | theorem1 | theorem2")
        ->required();

    CLI::App* enumerate = app.add_subcommand("enumerate", "all 16 deterministic strategies");

    std::string opt_model = "qm";
    std::vector<double> opt_start = {0.0, 90.0, 40.0, 310.0};
    double opt_tol = 1e-9;
    CLI::App* optimize = app.add_subcommand("optimize", "maximize |S| over the four angles");
    optimize->add_option("--model", opt_model, "qm | lhv-cos")
        ->check(CLI::IsMember({"qm", "lhv-cos"}));
    optimize->add_option("--start", opt_start, "starting angles a,a',b,b'")
        ->delimiter(',')
        ->expected(4);
    optimize->add_option("--tol", opt_tol, "stop when a cycle improves |S| by less than this")
        ->check(CLI::PositiveNumber);

    std::string feas_model = "qm";
    std::vector<double> feas_angles = {0.0, 90.0, 45.0, 315.0};
    std::string feas_strategy;
    CLI::App* feasibility =
        app.add_subcommand("feasibility", "joint-distribution feasibility at given settings");
    feasibility->add_option("--model", feas_model, "qm | lhv-cos | lhv-table")
        ->check(CLI::IsMember({"qm", "lhv-cos", "lhv-table"}));
    feasibility->add_option("--angles", feas_angles, "a,a',b,b' in degrees")
        ->delimiter(',')
        ->expected(4);
    feasibility->add_option("--strategy-file", feas_strategy, "JSON strategy ensemble");

    std::vector<const char*> argv;
    argv.push_back("belllab");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << std::endl;
        return 2;
    }

    try {
        if (simulate->parsed()) {
            sim.seed_given = seed_opt->count() > 0;
            if (!sim.seed_given) sim.seed = default_seed();
            return cmd_simulate(sim);
        }
        if (verify->parsed()) return cmd_verify(verify_target);
        if (enumerate->parsed()) return cmd_enumerate();
        if (optimize->parsed()) return cmd_optimize(opt_model, opt_start, opt_tol);
        if (feasibility->parsed()) return cmd_feasibility(feas_model, feas_angles, feas_strategy);
    } catch (const usage_failure& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const io_failure& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const belllab::error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 2;
}

}  // namespace belllab::cli
