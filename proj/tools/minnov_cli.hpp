/*
 Copyright 2026 The minnov Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef MINNOV_TOOLS_CLI_HPP
#define MINNOV_TOOLS_CLI_HPP

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "minnov/minnov.hpp"

namespace minnov::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kInputError = 1, kInfeasible = 2 };

/// Flags shared by every subcommand. Command-line values override the config.
struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    std::optional<int> realizations;
    std::optional<std::string> out;
    bool fixed_prior = false;
    bool no_normalize_baseline = false;
};

/// Parsed config document plus the directory relative paths resolve against.
struct RunConfig {
    json doc = json::object();
    fs::path base_dir = ".";
    Flags flags;

    std::uint64_t seed() const {
        if (flags.seed) return *flags.seed;
        return doc.value("seed", std::uint64_t{0});
    }
    int grid() const { return flags.grid ? *flags.grid : doc.value("grid", kDefaultGridIntervals); }
    fs::path out_dir() const { return flags.out ? fs::path(*flags.out) : fs::path(doc.value("out", std::string("."))); }
    fs::path resolve(const std::string& p) const {
        const fs::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    }
    double horizon(double fallback) const {
        if (!doc.contains("T")) {
            if (std::isnan(fallback)) throw InvalidArgument("config: missing horizon 'T'");
            return fallback;
        }
        return doc.at("T").get<double>();
    }
    SolveOptions solve_options() const {
        const std::string law = doc.value("law", std::string("grid"));
        if (law == "grid") return {ControlLaw::kGridConsistent};
        if (law == "continuous") return {ControlLaw::kSampledContinuous};
        throw InvalidArgument("config: law must be 'grid' or 'continuous'");
    }
};

inline RunConfig load_config(const Flags& flags, bool required) {
    RunConfig cfg;
    cfg.flags = flags;
    if (flags.config.empty()) {
        if (required) throw InvalidArgument("--config is required for this command");
        return cfg;
    }
    std::ifstream in(flags.config);
    if (!in) throw InvalidArgument("cannot open config '" + flags.config + "'");
    try {
        cfg.doc = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    if (!cfg.doc.is_object()) throw InvalidArgument("config: top level must be an object");
    cfg.base_dir = fs::path(flags.config).parent_path();
    if (cfg.base_dir.empty()) cfg.base_dir = ".";
    return cfg;
}

// -----------------------------------------------------------------------------
// config -> domain objects
// -----------------------------------------------------------------------------

inline Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw InvalidArgument(std::string("config: ") + what + " must be a non-empty array");
    const bool nested = j.front().is_array();
    const std::size_t rows = nested ? j.size() : 1;
    const std::size_t cols = nested ? j.front().size() : j.size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = nested ? j[i] : j;
        if (!row.is_array() || row.size() != cols) throw InvalidArgument(std::string("config: ragged matrix ") + what);
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = row[k].get<double>();
    }
    return m;
}

inline Eigen::VectorXd vector_from_json(const json& j, const char* what) {
    if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
    if (!j.is_array() || j.empty()) throw InvalidArgument(std::string("config: ") + what + " must be a non-empty array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

inline NetworkSpec network_from_json(const json& j) {
    NetworkSpec spec;
    spec.n = j.value("n", spec.n);
    spec.inhibitory_period = j.value("inhibitory_period", spec.inhibitory_period);
    if (j.contains("tau_range")) {
        spec.tau_low = j.at("tau_range").at(0).get<double>();
        spec.tau_high = j.at("tau_range").at(1).get<double>();
    }
    if (j.contains("w_exc_range")) {
        spec.w_exc_low = j.at("w_exc_range").at(0).get<double>();
        spec.w_exc_high = j.at("w_exc_range").at(1).get<double>();
    }
    if (j.contains("w_inh_range")) {
        spec.w_inh_low = j.at("w_inh_range").at(0).get<double>();
        spec.w_inh_high = j.at("w_inh_range").at(1).get<double>();
    }
    spec.validate();
    return spec;
}

/// Random draws for a single run come from one stream in the order
/// system -> endpoints -> prior.
inline LtiSystem system_from_config(const RunConfig& cfg, Rng& rng) {
    if (!cfg.doc.contains("system")) throw InvalidArgument("config: missing 'system'");
    const json& s = cfg.doc.at("system");
    const int sources = int(s.contains("A") || s.contains("B")) + int(s.contains("A_file") || s.contains("B_file")) +
                        int(s.contains("network"));
    if (sources != 1) throw InvalidArgument("config: 'system' needs exactly one of A/B, A_file/B_file, network");
    if (s.contains("network")) {
        NetworkSpec spec = network_from_json(s.at("network"));
        spec.seed = cfg.seed();
        return build_network(spec, rng);
    }
    if (s.contains("A_file")) {
        if (!s.contains("B_file")) throw InvalidArgument("config: A_file requires B_file");
        return LtiSystem(csv::read_matrix(cfg.resolve(s.at("A_file").get<std::string>()).string()),
                         csv::read_matrix(cfg.resolve(s.at("B_file").get<std::string>()).string()));
    }
    if (!s.contains("A") || !s.contains("B")) throw InvalidArgument("config: inline system needs both A and B");
    return LtiSystem(matrix_from_json(s.at("A"), "A"), matrix_from_json(s.at("B"), "B"));
}

inline std::optional<Endpoints> endpoints_from_config(const RunConfig& cfg, int n, Rng& rng) {
    if (!cfg.doc.contains("endpoints")) return std::nullopt;
    const json& e = cfg.doc.at("endpoints");
    const bool explicit_pair = e.contains("x0") || e.contains("xT");
    const bool sampled = e.contains("gamma");
    if (explicit_pair == sampled) throw InvalidArgument("config: 'endpoints' needs exactly one of x0/xT or gamma");
    if (sampled) return sample_endpoints(n, e.at("gamma").get<double>(), rng);
    Endpoints out;
    if (e.contains("x0")) out.x0 = vector_from_json(e.at("x0"), "x0");
    if (e.contains("xT")) out.xT = vector_from_json(e.at("xT"), "xT");
    if (out.x0.size() != 0 && out.x0.size() != n) throw InvalidArgument("config: x0 has wrong dimension");
    if (out.xT.size() != 0 && out.xT.size() != n) throw InvalidArgument("config: xT has wrong dimension");
    return out;
}

/// Signal sources: {"file"}, {"constant"}, {"polynomial": one coefficient
/// list per component, lowest order first}, {"random_constant": true}.
/// "normalize" (default true) rescales to unit average energy.
inline Signal signal_from_json(const RunConfig& cfg, const json& j, int m, double horizon, int intervals,
                               Rng& rng, const char* what) {
    const int sources = int(j.contains("file")) + int(j.contains("constant")) + int(j.contains("polynomial")) +
                        int(j.value("random_constant", false));
    if (sources != 1) {
        throw InvalidArgument(std::string("config: '") + what +
                              "' needs exactly one of file, constant, polynomial, random_constant");
    }
    std::optional<Signal> sig;
    if (j.contains("file")) {
        sig = read_signal_csv(cfg.resolve(j.at("file").get<std::string>()).string());
        if (sig->intervals() != intervals || std::abs(sig->horizon() - horizon) > 1e-12 * horizon) {
            throw InvalidArgument(std::string("config: '") + what + "' file grid does not match T/grid");
        }
    } else if (j.contains("constant")) {
        sig = Signal::constant(vector_from_json(j.at("constant"), "constant"), horizon, intervals);
    } else if (j.contains("polynomial")) {
        const Eigen::MatrixXd coeffs = matrix_from_json(j.at("polynomial"), "polynomial");
        sig = Signal::sample(static_cast<int>(coeffs.rows()), horizon, intervals, [&](double t) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(coeffs.rows());
            for (Eigen::Index p = coeffs.cols() - 1; p >= 0; --p) v = v * t + coeffs.col(p);
            return v;
        });
    } else {
        sig = constant_prior(m, horizon, intervals, rng);
    }
    if (sig->dim() != m) throw InvalidArgument(std::string("config: '") + what + "' has wrong dimension");
    return j.value("normalize", true) ? normalize_energy(*sig) : *sig;
}

struct Scenario {
    LtiSystem sys;
    double horizon;
    int intervals;
    std::optional<Endpoints> endpoints;
    std::optional<Signal> prior;
};

inline Scenario scenario_from_config(const RunConfig& cfg) {
    Rng rng(cfg.seed());
    LtiSystem sys = system_from_config(cfg, rng);
    const double T = cfg.horizon(std::nan(""));
    const int N = cfg.grid();
    if (N < 2) throw InvalidArgument("grid must be >= 2");
    auto ends = endpoints_from_config(cfg, sys.n(), rng);
    std::optional<Signal> prior;
    if (cfg.doc.contains("prior")) prior = signal_from_json(cfg, cfg.doc.at("prior"), sys.m(), T, N, rng, "prior");
    return {std::move(sys), T, N, std::move(ends), std::move(prior)};
}

inline Problem problem_from(const Scenario& sc) {
    if (!sc.prior) throw InvalidArgument("config: missing 'prior'");
    if (!sc.endpoints || sc.endpoints->x0.size() == 0 || sc.endpoints->xT.size() == 0) {
        throw InvalidArgument("config: 'endpoints' must provide both x0 and xT");
    }
    return Problem(sc.sys, sc.horizon, *sc.prior, sc.endpoints->x0, sc.endpoints->xT);
}

// -----------------------------------------------------------------------------
// reports
// -----------------------------------------------------------------------------

inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline void write_json(const fs::path& path, const json& j) {
    auto out = csv::open_for_write(path.string());
    out << j.dump(2) << '\n';
}

inline json margins_json(const ExistenceReport& rep) {
    return {{"T_minus_es", number(rep.margin_prior)}, {"T_minus_er", number(rep.margin_target)},
            {"epsilon", number(rep.epsilon)}};
}

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidArgument("cannot create output directory '" + dir.string() + "'");
}

// -----------------------------------------------------------------------------
// commands
// -----------------------------------------------------------------------------

inline int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Problem problem = problem_from(scenario_from_config(cfg));
    for (const auto& w : problem.convention_warnings()) err << "warning: " << w << '\n';
    const fs::path dir = cfg.out_dir();
    ensure_dir(dir);

    const Analysis analysis(problem, cfg.solve_options());
    const Geometry& g = analysis.geometry();
    const ExistenceReport rep = analysis.existence();
    json report = {{"T", problem.horizon()}, {"es", number(g.es)}, {"er", number(g.er)},
                   {"margins", margins_json(rep)}, {"feasible", rep.feasible}};
    if (!rep.feasible) {
        report["J"] = report["J1"] = report["mu"] = nullptr;
        report["endpoint_resid"] = report["energy_resid"] = nullptr;
        write_json(dir / "report.json", report);
        err << "infeasible: need T > max(es, er); T - es = " << csv::format_double(rep.margin_prior)
            << ", T - er = " << csv::format_double(rep.margin_target) << '\n';
        return kInfeasible;
    }
    const NoveltySolution sol = analysis.min_novelty();
    report["J"] = number(sol.J);
    report["J1"] = number(sol.J1);
    report["mu"] = number(sol.mu);
    report["endpoint_resid"] = number(sol.endpoint_residual);
    report["energy_resid"] = number(sol.energy_residual);
    write_signal_csv((dir / "solution.csv").string(), sol.u);
    write_json(dir / "report.json", report);
    out << "J = " << csv::format_double(sol.J) << ", mu = " << csv::format_double(sol.mu)
        << ", endpoint residual = " << csv::format_double(sol.endpoint_residual) << '\n';
    return kOk;
}

inline int cmd_min_energy(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    Scenario sc = scenario_from_config(cfg);
    const bool has_prior = sc.prior.has_value();
    if (!has_prior) {
        // Placeholder prior so the Problem is well formed; novelty is not reported.
        sc.prior = Signal::constant(Eigen::VectorXd::Constant(sc.sys.m(), 1.0 / std::sqrt(sc.sys.m())),
                                    sc.horizon, sc.intervals);
    }
    const Problem problem = problem_from(sc);
    for (const auto& w : problem.convention_warnings()) err << "warning: " << w << '\n';
    const fs::path dir = cfg.out_dir();
    ensure_dir(dir);

    const Analysis analysis(problem, cfg.solve_options());
    const MinEnergySolution me = analysis.min_energy();
    json report = {{"T", problem.horizon()},
                   {"er", number(me.er)},
                   {"energy", number(me.avg_energy * problem.horizon())},
                   {"avg_energy", number(me.avg_energy)},
                   {"endpoint_resid", number(me.endpoint_residual)}};
    if (has_prior) {
        report["J_raw"] = number(novelty_of(problem, me.u, false));
        report["J_norm"] = me.avg_energy > 0.0 ? number(novelty_of(problem, me.u, true)) : json(nullptr);
    }
    write_signal_csv((dir / "min_energy.csv").string(), me.u);
    write_json(dir / "report.json", report);
    out << "er = " << csv::format_double(me.er) << ", average energy = " << csv::format_double(me.avg_energy)
        << '\n';
    return kOk;
}

inline int cmd_gramian(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Scenario sc = scenario_from_config(cfg);
    const fs::path dir = cfg.out_dir();
    ensure_dir(dir);
    std::optional<Gramian> w;
    try {
        w = gramian(sc.sys, sc.horizon);
    } catch (const UncontrollableError& e) {
        write_json(dir / "gramian.json", {{"T", sc.horizon}, {"rcond", number(e.rcond())}, {"controllable", false}});
        err << e.what() << '\n';
        return kInfeasible;
    }
    csv::write_matrix((dir / "gramian.csv").string(), w->matrix());
    json report = {{"T", sc.horizon}, {"n", sc.sys.n()}, {"rcond", number(w->rcond())}, {"controllable", true}};
    if (sc.prior) {
        const HoldDiscretization d = discretize(sc.sys, sc.horizon, sc.intervals);
        report["es"] = number(w->inverse_quad(GridReach(d).image(*sc.prior)));
    }
    if (sc.endpoints && sc.endpoints->x0.size() && sc.endpoints->xT.size()) {
        const Eigen::VectorXd r = sc.endpoints->xT - expm(sc.sys.A() * sc.horizon) * sc.endpoints->x0;
        report["er"] = number(w->inverse_quad(r));
    }
    write_json(dir / "gramian.json", report);
    out << "rcond = " << csv::format_double(w->rcond()) << '\n';
    return kOk;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const Scenario sc = scenario_from_config(cfg);
    if (!cfg.doc.contains("input")) throw InvalidArgument("config: simulate needs 'input'");
    Rng rng(cfg.seed());
    json input = cfg.doc.at("input");
    if (!input.contains("normalize")) input["normalize"] = false;
    const Signal u = signal_from_json(cfg, input, sc.sys.m(), sc.horizon, sc.intervals, rng, "input");
    if (!sc.endpoints || sc.endpoints->x0.size() == 0) throw InvalidArgument("config: simulate needs endpoints.x0");
    const HoldDiscretization d = discretize(sc.sys, sc.horizon, sc.intervals);
    const Eigen::MatrixXd xs = simulate(d, sc.endpoints->x0, u);

    const fs::path dir = cfg.out_dir();
    ensure_dir(dir);
    auto file = csv::open_for_write((dir / "trajectory.csv").string());
    file << 't';
    for (int i = 1; i <= sc.sys.n(); ++i) file << ",x" << i;
    file << '\n';
    for (int k = 0; k <= sc.intervals; ++k) {
        file << csv::format_double(u.time(k));
        for (int i = 0; i < sc.sys.n(); ++i) file << ',' << csv::format_double(xs(i, k));
        file << '\n';
    }
    out << "x(T) =";
    for (int i = 0; i < sc.sys.n(); ++i) out << ' ' << csv::format_double(xs(i, sc.intervals));
    out << '\n';
    return kOk;
}

inline EnsembleConfig ensemble_from_config(const RunConfig& cfg) {
    EnsembleConfig ec;
    const json& doc = cfg.doc;
    if (doc.contains("system")) {
        const json& s = doc.at("system");
        if (!s.contains("network") || s.size() != 1) throw InvalidArgument("config: ensemble needs system.network");
        ec.network = network_from_json(s.at("network"));
    }
    ec.horizon = cfg.horizon(ec.horizon);
    ec.intervals = cfg.grid();
    if (doc.contains("endpoints")) ec.gamma = doc.at("endpoints").value("gamma", ec.gamma);
    const json ens = doc.value("ensemble", json::object());
    ec.realizations = cfg.flags.realizations ? *cfg.flags.realizations : ens.value("realizations", ec.realizations);
    ec.fixed_prior = cfg.flags.fixed_prior || ens.value("fixed_prior", false);
    ec.threads = ens.value("threads", 0);
    ec.base_seed = cfg.seed();
    ec.solve = cfg.solve_options();
    return ec;
}

inline int cmd_ensemble(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const EnsembleConfig ec = ensemble_from_config(cfg);
    const bool normalized = !(cfg.flags.no_normalize_baseline ||
                              !cfg.doc.value("ensemble", json::object()).value("normalize_baseline", true));
    const std::vector<EnsembleRecord> records = run_ensemble(ec);
    const fs::path dir = cfg.out_dir();
    ensure_dir(dir);
    {
        auto file = csv::open_for_write((dir / "ensemble.csv").string());
        write_ensemble_csv(file, records);
    }
    const EnsembleSummary s = summarize(records, normalized);
    const json summary = {{"realizations", s.total},
                          {"feasible", s.feasible},
                          {"baseline", normalized ? "J_me_norm" : "J_me_raw"},
                          {"J_nov", {{"min", number(s.j_nov_min)}, {"mean", number(s.j_nov_mean)}, {"max", number(s.j_nov_max)}}},
                          {"J_baseline", {{"min", number(s.j_base_min)}, {"mean", number(s.j_base_mean)}, {"max", number(s.j_base_max)}}},
                          {"fraction_J_nov_ge_baseline", number(s.fraction_nov_ge_base)}};
    write_json(dir / "summary.json", summary);
    out << "feasible " << s.feasible << '/' << s.total << '\n'
        << "J_nov       min " << csv::format_double(s.j_nov_min) << " mean " << csv::format_double(s.j_nov_mean)
        << " max " << csv::format_double(s.j_nov_max) << '\n'
        << (normalized ? "J_me_norm" : "J_me_raw ") << "   min " << csv::format_double(s.j_base_min) << " mean "
        << csv::format_double(s.j_base_mean) << " max " << csv::format_double(s.j_base_max) << '\n'
        << "fraction with J_nov >= baseline: " << csv::format_double(s.fraction_nov_ge_base) << '\n';
    return kOk;
}

// -----------------------------------------------------------------------------
// entry point
// -----------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Minimally novel inputs for linear time-invariant systems"};
    app.require_subcommand(1);
    Flags flags;
    auto add_common = [&](CLI::App* sub, bool ensemble) {
        sub->add_option("--config", flags.config, "JSON config file");
        sub->add_option("--seed", flags.seed, "random seed");
        sub->add_option("--grid", flags.grid, "number of grid intervals on [0, T]");
        sub->add_option("--out", flags.out, "output directory");
        if (ensemble) {
            sub->add_option("--realizations", flags.realizations, "number of network realizations");
            sub->add_flag("--fixed-prior", flags.fixed_prior, "share one prior input across realizations");
            sub->add_flag("--no-normalize-baseline", flags.no_normalize_baseline,
                          "compare against the unnormalized minimum-energy novelty");
        }
    };
    auto* solve = app.add_subcommand("solve", "minimally novel input");
    auto* min_energy = app.add_subcommand("min-energy", "minimum-energy input");
    auto* gram = app.add_subcommand("gramian", "controllability Gramian");
    auto* sim = app.add_subcommand("simulate", "state trajectory under a sampled input");
    auto* ens = app.add_subcommand("ensemble", "recurrent network ensemble");
    for (auto* sub : {solve, min_energy, gram, sim}) add_common(sub, false);
    add_common(ens, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*ens) return cmd_ensemble(load_config(flags, false), out, err);
        const RunConfig cfg = load_config(flags, true);
        if (*solve) return cmd_solve(cfg, out, err);
        if (*min_energy) return cmd_min_energy(cfg, out, err);
        if (*gram) return cmd_gramian(cfg, out, err);
        return cmd_simulate(cfg, out, err);
    } catch (const InfeasibleError& e) {
        err << e.what() << '\n';
        return kInfeasible;
    } catch (const UncontrollableError& e) {
        err << e.what() << '\n';
        return kInfeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace minnov::cli

#endif  // MINNOV_TOOLS_CLI_HPP
