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
#ifndef MINNOV_NETGEN_HPP
#define MINNOV_NETGEN_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "minnov/csv.hpp"
#include "minnov/errors.hpp"
#include "minnov/lti.hpp"
#include "minnov/novelty.hpp"
#include "minnov/signal.hpp"

namespace minnov {

/**
 * @brief Portable random stream for the network experiments.
 *
 * Wraps std::mt19937_64, whose output sequence is fixed by the standard.
 * Distributions are derived by hand rather than through <random>'s
 * distribution classes (whose algorithms are implementation-defined):
 *   uniform01 = (next() >> 11) * 2^-53
 *   normal    = sqrt(-2 ln(1 - u1)) cos(2 pi u2), two uniforms per draw.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    double normal() {
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

/// Linearized firing-rate network S dx/dt = (-I + W) x + B u with B = I.
struct NetworkSpec {
    int n = 100;
    int inhibitory_period = 5;  // neuron i (1-based) is inhibitory iff i % period == 0
    double tau_low = 5.0;       // ms
    double tau_high = 10.0;
    double w_exc_low = 0.0;
    double w_exc_high = 1.0;
    double w_inh_low = -1.0;
    double w_inh_high = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 2) throw InvalidArgument("NetworkSpec: n must be >= 2");
        if (inhibitory_period < 2) throw InvalidArgument("NetworkSpec: inhibitory_period must be >= 2");
        if (!(tau_low > 0.0) || !(tau_high >= tau_low)) {
            throw InvalidArgument("NetworkSpec: need 0 < tau_low <= tau_high");
        }
        if (!(w_exc_high >= w_exc_low) || !(w_inh_high >= w_inh_low)) {
            throw InvalidArgument("NetworkSpec: weight ranges must be ordered");
        }
    }
};

inline bool is_inhibitory(const NetworkSpec& spec, int i) { return (i + 1) % spec.inhibitory_period == 0; }

/// The sampled network pieces, kept for inspection alongside A = S^{-1}(-I + W).
struct Network {
    Eigen::VectorXd tau;  // diagonal of S
    Eigen::MatrixXd W;    // row i holds neuron i's outgoing weights
    LtiSystem system;
};

/// Draw order: n time constants, then W row by row (diagonal skipped).
inline Network sample_network(const NetworkSpec& spec, Rng& rng) {
    spec.validate();
    const int n = spec.n;
    Eigen::VectorXd tau(n);
    for (int i = 0; i < n; ++i) tau(i) = rng.uniform(spec.tau_low, spec.tau_high);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const bool inh = is_inhibitory(spec, i);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            w(i, j) = inh ? rng.uniform(spec.w_inh_low, spec.w_inh_high)
                          : rng.uniform(spec.w_exc_low, spec.w_exc_high);
        }
    }
    Eigen::MatrixXd a = w - Eigen::MatrixXd::Identity(n, n);
    a = tau.cwiseInverse().asDiagonal() * a;
    return {std::move(tau), std::move(w), LtiSystem(std::move(a), Eigen::MatrixXd::Identity(n, n))};
}

inline LtiSystem build_network(const NetworkSpec& spec, Rng& rng) { return sample_network(spec, rng).system; }

inline LtiSystem build_network(const NetworkSpec& spec) {
    Rng rng(spec.seed);
    return build_network(spec, rng);
}

namespace detail {

inline Eigen::VectorXd gaussian_vector(int n, Rng& rng) {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = rng.normal();
    return g;
}

}  // namespace detail

struct Endpoints {
    Eigen::VectorXd x0;
    Eigen::VectorXd xT;
};

/// Unit vectors with x0'xT = gamma: x0 uniform on the sphere, xT rotated from
/// it through a Gram-Schmidt direction.
inline Endpoints sample_endpoints(int n, double gamma, Rng& rng) {
    if (n < 2) throw InvalidArgument("sample_endpoints: need n >= 2");
    if (!(std::abs(gamma) < 1.0)) throw InvalidArgument("sample_endpoints: need |gamma| < 1");
    Eigen::VectorXd x0;
    do {
        x0 = detail::gaussian_vector(n, rng);
    } while (x0.norm() < 1e-8);
    x0.normalize();
    Eigen::VectorXd w;
    do {
        w = detail::gaussian_vector(n, rng);
        w -= w.dot(x0) * x0;
    } while (w.norm() < 1e-8);
    w -= w.dot(x0) * x0;
    w.normalize();
    Eigen::VectorXd xT = gamma * x0 + std::sqrt(1.0 - gamma * gamma) * w;
    xT.normalize();
    return {std::move(x0), std::move(xT)};
}

/// Constant prior with a unit-norm direction of i.i.d. U(0,1) components.
inline Signal constant_prior(int m, double horizon, int intervals, Rng& rng) {
    if (m < 1) throw InvalidArgument("constant_prior: m must be >= 1");
    Eigen::VectorXd c(m);
    do {
        for (int i = 0; i < m; ++i) c(i) = rng.uniform01();
    } while (c.norm() == 0.0);
    c.normalize();
    return Signal::constant(c, horizon, intervals);
}

// =============================================================================
// Ensemble
// =============================================================================

struct EnsembleConfig {
    NetworkSpec network;
    double horizon = 3.0;  // ms
    double gamma = 0.7645;
    int realizations = 1000;
    int intervals = kDefaultGridIntervals;
    std::uint64_t base_seed = 0;
    bool fixed_prior = false;  // reuse realization 0's prior everywhere
    SolveOptions solve;
    int threads = 0;  // 0: hardware concurrency
};

/// One (minimum novelty, minimum energy) pair. NaN marks quantities that
/// could not be computed for an infeasible realization.
struct EnsembleRecord {
    int index = 0;
    std::uint64_t seed = 0;
    double J_nov = std::numeric_limits<double>::quiet_NaN();
    double J_me_norm = std::numeric_limits<double>::quiet_NaN();
    double J_me_raw = std::numeric_limits<double>::quiet_NaN();
    double mu = std::numeric_limits<double>::quiet_NaN();
    double es = std::numeric_limits<double>::quiet_NaN();
    double er = std::numeric_limits<double>::quiet_NaN();
    double endpoint_resid = std::numeric_limits<double>::quiet_NaN();
    double energy_resid = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
};

inline std::uint64_t realization_seed(std::uint64_t base_seed, int index) {
    return base_seed ^ static_cast<std::uint64_t>(index);
}

/// Everything drawn for one realization, in stream order: network, endpoints,
/// prior.
struct Realization {
    std::uint64_t seed;
    LtiSystem system;
    Endpoints endpoints;
    Signal prior;
};

inline Realization draw_realization(const EnsembleConfig& cfg, int index) {
    const std::uint64_t seed = realization_seed(cfg.base_seed, index);
    Rng rng(seed);
    NetworkSpec spec = cfg.network;
    spec.seed = seed;
    LtiSystem sys = build_network(spec, rng);
    Endpoints ends = sample_endpoints(spec.n, cfg.gamma, rng);
    Signal prior = constant_prior(sys.m(), cfg.horizon, cfg.intervals, rng);
    return {seed, std::move(sys), std::move(ends), std::move(prior)};
}

inline EnsembleRecord evaluate_realization(const Realization& rz, int index, const SolveOptions& opts) {
    EnsembleRecord rec;
    rec.index = index;
    rec.seed = rz.seed;
    const double T = rz.prior.horizon();
    Problem problem(rz.system, T, rz.prior, rz.endpoints.x0, rz.endpoints.xT);
    try {
        const Analysis analysis(problem, opts);
        rec.es = analysis.geometry().es;
        rec.er = analysis.geometry().er;
        if (!analysis.existence().feasible) return rec;
        const NoveltySolution sol = analysis.min_novelty();
        const MinEnergySolution me = analysis.min_energy();
        rec.J_nov = sol.J;
        rec.mu = sol.mu;
        rec.endpoint_resid = sol.endpoint_residual;
        rec.energy_resid = sol.energy_residual;
        rec.J_me_raw = novelty_of(problem, me.u, false);
        if (avg_energy(me.u) > 0.0) rec.J_me_norm = novelty_of(problem, me.u, true);
        rec.feasible = true;
    } catch (const UncontrollableError&) {
        rec.feasible = false;
    }
    return rec;
}

/// Runs every realization; the result is ordered by index and does not depend
/// on the thread count.
inline std::vector<EnsembleRecord> run_ensemble(const EnsembleConfig& cfg) {
    if (cfg.realizations < 1) throw InvalidArgument("run_ensemble: realizations must be >= 1");
    cfg.network.validate();
    std::vector<EnsembleRecord> records(cfg.realizations);
    std::optional<Signal> shared_prior;
    if (cfg.fixed_prior) shared_prior = draw_realization(cfg, 0).prior;

    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(cfg.realizations);
    auto worker = [&] {
        for (int k = next++; k < cfg.realizations; k = next++) {
            try {
                Realization rz = draw_realization(cfg, k);
                if (shared_prior) rz.prior = *shared_prior;
                records[k] = evaluate_realization(rz, k, cfg.solve);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, cfg.realizations);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return records;
}

inline constexpr const char* kEnsembleHeader =
    "idx,seed,J_nov,J_me_norm,J_me_raw,mu,es,er,endpoint_resid,energy_resid,feasible";

namespace detail {

inline std::string field(double x) { return std::isnan(x) ? std::string("nan") : csv::format_double(x); }

}  // namespace detail

inline void write_ensemble_csv(std::ostream& out, const std::vector<EnsembleRecord>& records) {
    out << kEnsembleHeader << '\n';
    for (const auto& r : records) {
        out << r.index << ',' << r.seed << ',' << detail::field(r.J_nov) << ',' << detail::field(r.J_me_norm)
            << ',' << detail::field(r.J_me_raw) << ',' << detail::field(r.mu) << ',' << detail::field(r.es)
            << ',' << detail::field(r.er) << ',' << detail::field(r.endpoint_resid) << ','
            << detail::field(r.energy_resid) << ',' << (r.feasible ? 1 : 0) << '\n';
    }
}

inline std::vector<EnsembleRecord> read_ensemble_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || csv::detail::trim(header) != kEnsembleHeader) {
        throw InvalidArgument("ensemble csv: unexpected header");
    }
    std::vector<EnsembleRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (csv::detail::trim(line).empty()) continue;
        const auto f = csv::detail::split(line);
        if (f.size() != 11) throw InvalidArgument("ensemble csv: expected 11 fields");
        double v[11];
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (i == 1) continue;
            if (!csv::detail::parse_double(f[i], v[i])) throw InvalidArgument("ensemble csv: bad number");
        }
        EnsembleRecord r;
        r.index = static_cast<int>(v[0]);
        r.seed = std::stoull(std::string(f[1]));
        r.J_nov = v[2];
        r.J_me_norm = v[3];
        r.J_me_raw = v[4];
        r.mu = v[5];
        r.es = v[6];
        r.er = v[7];
        r.endpoint_resid = v[8];
        r.energy_resid = v[9];
        r.feasible = v[10] != 0.0;
        records.push_back(r);
    }
    return records;
}

struct EnsembleSummary {
    int total = 0;
    int feasible = 0;
    double j_nov_min = 0, j_nov_mean = 0, j_nov_max = 0;
    double j_base_min = 0, j_base_mean = 0, j_base_max = 0;
    double fraction_nov_ge_base = 0;  // over feasible records
};

/// `normalized_baseline` picks J_me_norm (default) or J_me_raw as the
/// comparison column.
inline EnsembleSummary summarize(const std::vector<EnsembleRecord>& records, bool normalized_baseline = true,
                                 double tolerance = 1e-9) {
    EnsembleSummary s;
    s.total = static_cast<int>(records.size());
    double sum_nov = 0, sum_base = 0;
    int wins = 0;
    s.j_nov_min = s.j_base_min = std::numeric_limits<double>::infinity();
    s.j_nov_max = s.j_base_max = -std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        if (!r.feasible) continue;
        const double base = normalized_baseline ? r.J_me_norm : r.J_me_raw;
        ++s.feasible;
        sum_nov += r.J_nov;
        sum_base += base;
        s.j_nov_min = std::min(s.j_nov_min, r.J_nov);
        s.j_nov_max = std::max(s.j_nov_max, r.J_nov);
        s.j_base_min = std::min(s.j_base_min, base);
        s.j_base_max = std::max(s.j_base_max, base);
        if (r.J_nov >= base - tolerance) ++wins;
    }
    if (s.feasible > 0) {
        s.j_nov_mean = sum_nov / s.feasible;
        s.j_base_mean = sum_base / s.feasible;
        s.fraction_nov_ge_base = static_cast<double>(wins) / s.feasible;
    }
    return s;
}

}  // namespace minnov

#endif  // MINNOV_NETGEN_HPP
