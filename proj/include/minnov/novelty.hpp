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
#ifndef MINNOV_NOVELTY_HPP
#define MINNOV_NOVELTY_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minnov/errors.hpp"
#include "minnov/lti.hpp"
#include "minnov/signal.hpp"

namespace minnov {

/// Tolerance on the unit-energy prior and the unit-norm endpoint convention.
inline constexpr double kUnitTolerance = 1e-9;

/// Relative width of the rejected band around the existence boundary.
inline constexpr double kExistenceMargin = 1e-9;

/**
 * How the closed-form law is evaluated on the sampling grid.
 *
 * kGridConsistent uses the Gramian and adjoint of the exact hold
 * discretization (GridReach); the returned input then meets the endpoint and
 * energy constraints to rounding error and is the exact optimum among
 * sampled inputs. kSampledContinuous samples B'e^{A'(T-t)}W_c^{-1}(.) with the
 * Van Loan Gramian; its residuals shrink as O(h^2).
 */
enum class ControlLaw { kGridConsistent, kSampledContinuous };

struct SolveOptions {
    ControlLaw law = ControlLaw::kGridConsistent;
};

/// Transfer x0 -> xT over [0, T] measured against a unit-energy prior v.
class Problem {
public:
    Problem(LtiSystem sys, double horizon, Signal prior, Eigen::VectorXd x0, Eigen::VectorXd xT)
        : sys_(std::move(sys)), horizon_(horizon), prior_(std::move(prior)), x0_(std::move(x0)),
          xT_(std::move(xT)) {
        if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw InvalidArgument("Problem: horizon must be positive");
        if (prior_.dim() != sys_.m()) throw InvalidArgument("Problem: prior dimension differs from input dimension");
        if (std::abs(prior_.horizon() - horizon_) > 1e-12 * horizon_) {
            throw InvalidArgument("Problem: prior is not sampled over [0, T]");
        }
        if (x0_.size() != sys_.n() || xT_.size() != sys_.n()) {
            throw InvalidArgument("Problem: endpoint dimension differs from state dimension");
        }
        if (!x0_.allFinite() || !xT_.allFinite()) throw InvalidArgument("Problem: endpoints must be finite");
        // Either quadrature of the prior may carry the unit-energy convention:
        // trapezoid (what normalize_energy produces) or the exact energy of the
        // interpolated signal (what a sampled closed-form prior has).
        const double e = avg_energy(prior_);
        if (std::abs(e - 1.0) > kUnitTolerance && std::abs(interpolant_energy(prior_) - 1.0) > kUnitTolerance) {
            throw InvalidArgument("Problem: prior must have unit average energy (got " + csv::format_double(e) + ")");
        }
    }

    const LtiSystem& system() const noexcept { return sys_; }
    double horizon() const noexcept { return horizon_; }
    const Signal& prior() const noexcept { return prior_; }
    const Eigen::VectorXd& x0() const noexcept { return x0_; }
    const Eigen::VectorXd& xT() const noexcept { return xT_; }
    int intervals() const noexcept { return prior_.intervals(); }

    /// Unit-norm endpoints are a convention, not a requirement of the closed
    /// form, so violations are reported rather than rejected.
    std::vector<std::string> convention_warnings() const {
        std::vector<std::string> out;
        if (std::abs(x0_.norm() - 1.0) > kUnitTolerance) out.emplace_back("||x0|| differs from 1");
        if (std::abs(xT_.norm() - 1.0) > kUnitTolerance) out.emplace_back("||xT|| differs from 1");
        return out;
    }

private:
    LtiSystem sys_;
    double horizon_;
    Signal prior_;
    Eigen::VectorXd x0_;
    Eigen::VectorXd xT_;
};

/// Reachability image s of the prior, required displacement r, the Gramian,
/// and the minimum energies es = s'W^{-1}s, er = r'W^{-1}r.
struct Geometry {
    Eigen::VectorXd s;
    Eigen::VectorXd r;
    Gramian W;
    double es;
    double er;
};

struct NoveltySolution {
    Signal u;
    double mu;
    double J;
    double J1;
    double endpoint_residual;
    double energy_residual;
};

struct MinEnergySolution {
    Signal u;
    double avg_energy;  // measured by quadrature; er / T in exact arithmetic
    double er;
    double endpoint_residual;
};

/// Feasible iff T > max(es, er) + kExistenceMargin * T. The regime
/// T < min(es, er), where the multiplier is also real, is rejected.
inline ExistenceReport existence_check(const Geometry& g, double horizon) {
    ExistenceReport rep;
    rep.margin_prior = horizon - g.es;
    rep.margin_target = horizon - g.er;
    rep.epsilon = kExistenceMargin * horizon;
    rep.feasible = horizon > std::max(g.es, g.er) + rep.epsilon;
    return rep;
}

/**
 * @brief Shared state for every closed-form quantity of one Problem.
 *
 * Holds the hold discretization and the Gramian so the minimum-novelty,
 * Euclidean and minimum-energy solutions reuse one factorization.
 */
class Analysis {
public:
    explicit Analysis(Problem p, SolveOptions opts = {})
        : problem_(std::move(p)),
          opts_(opts),
          reach_(discretize(problem_.system(), problem_.horizon(), problem_.intervals())),
          geometry_(make_geometry()) {
        finish_geometry();
    }

    const Problem& problem() const noexcept { return problem_; }
    const Geometry& geometry() const noexcept { return geometry_; }
    const HoldDiscretization& discretization() const noexcept { return reach_.discretization(); }
    ExistenceReport existence() const { return existence_check(geometry_, problem_.horizon()); }

    /// Samples of B' e^{A'(T-t)} W^{-1} w under the configured law.
    Signal steering(const Eigen::VectorXd& w) const { return refined_solve(w).samples; }

    /// z with W z = w. The Cholesky solve is refined against the operator the
    /// input actually passes through (adjoint sampling then forward
    /// simulation for the grid law), which keeps endpoint errors at rounding
    /// level even when W is badly conditioned.
    Eigen::VectorXd solve_gramian(const Eigen::VectorXd& w) const { return refined_solve(w).z; }

private:
    static constexpr int kRefinementSteps = 2;

    struct Steered {
        Eigen::VectorXd z;
        Signal samples;  // steer(z)
    };

    Steered refined_solve(const Eigen::VectorXd& w) const {
        Steered best{geometry_.W.solve(w), steer(geometry_.W.solve(w))};
        Eigen::VectorXd resid = w - apply_gramian(best);
        for (int it = 0; it < kRefinementSteps && resid.norm() > 0.0; ++it) {
            Eigen::VectorXd z = best.z + geometry_.W.solve(resid);
            Steered trial{z, steer(z)};
            Eigen::VectorXd trial_resid = w - apply_gramian(trial);
            if (!(trial_resid.norm() < resid.norm())) break;
            best = std::move(trial);
            resid = std::move(trial_resid);
        }
        return best;
    }

    Signal steer(const Eigen::VectorXd& z) const {
        if (opts_.law == ControlLaw::kGridConsistent) return Signal(reach_.adjoint(z), problem_.horizon());
        const auto& d = reach_.discretization();
        const Eigen::MatrixXd& b = problem_.system().B();
        Eigen::MatrixXd out(d.m(), d.intervals + 1);
        Eigen::VectorXd y = z;
        out.col(d.intervals) = b.transpose() * y;
        for (int k = d.intervals - 1; k >= 0; --k) {
            y = d.transition.transpose() * y;
            out.col(k) = b.transpose() * y;
        }
        return Signal(std::move(out), problem_.horizon());
    }

    Eigen::VectorXd apply_gramian(const Steered& st) const {
        if (opts_.law == ControlLaw::kGridConsistent) return reach_.image(st.samples);
        return geometry_.W.matrix() * st.z;
    }

public:
    /// ||x(T) - xT|| from an independent forward simulation of `u`.
    double endpoint_residual(const Signal& u) const {
        return (propagate(reach_.discretization(), problem_.x0(), u) - problem_.xT()).norm();
    }

    NoveltySolution min_novelty() const {
        require_feasible("solve_min_novelty");
        const Geometry& g = geometry_;
        const double T = problem_.horizon();
        const double gain = std::sqrt((T - g.er) / (T - g.es));  // 1 / (2 mu)
        const double mu = 0.5 / gain;
        Signal u(gain * (problem_.prior().samples() - steer_s_->samples.samples()) + steer_r_->samples.samples(), T);
        const double sr = g.s.dot(steer_r_->z);
        const double J = sr / T + gain * (1.0 - g.es / T);
        const double J1 = euclid_novelty(problem_.prior(), u);
        const double resid = endpoint_residual(u);
        const double energy_resid = std::abs(avg_energy(u) - 1.0);
        return {std::move(u), mu, J, J1, resid, energy_resid};
    }

    /// Euclidean-distance formulation; `mu` is that problem's multiplier
    /// (-1 + sqrt((T-es)/(T-er))) and J is measured from the returned input.
    NoveltySolution min_euclid() const {
        require_feasible("solve_min_euclid");
        const Geometry& g = geometry_;
        const double T = problem_.horizon();
        const double mu = -1.0 + std::sqrt((T - g.es) / (T - g.er));
        const double inv = 1.0 / (1.0 + mu);
        Signal u(inv * (problem_.prior().samples() - steer_s_->samples.samples()) + steer_r_->samples.samples(), T);
        const double sr = g.s.dot(steer_r_->z);
        const double J1 = 2.0 * (1.0 - sr / T) + 2.0 * inv * (g.es / T - 1.0);
        const double J = novelty(problem_.prior(), u);
        const double resid = endpoint_residual(u);
        const double energy_resid = std::abs(avg_energy(u) - 1.0);
        return {std::move(u), mu, J, J1, resid, energy_resid};
    }

    MinEnergySolution min_energy() const {
        Signal u = steer_r_->samples;
        const double e = avg_energy(u);
        const double resid = endpoint_residual(u);
        return {std::move(u), e, geometry_.er, resid};
    }

private:
    Geometry make_geometry() const {
        const auto& sys = problem_.system();
        const double T = problem_.horizon();
        Gramian w = opts_.law == ControlLaw::kGridConsistent ? Gramian(reach_.gramian_matrix(), T)
                                                             : gramian(sys, T);
        Eigen::VectorXd s = reach_.image(problem_.prior());
        Eigen::VectorXd r = problem_.xT() - expm(sys.A() * T) * problem_.x0();
        return {std::move(s), std::move(r), std::move(w), 0.0, 0.0};
    }

    // Quadratic forms through the refined solves, so the energy bookkeeping of
    // the returned inputs matches es and er to rounding.
    void finish_geometry() {
        steer_s_.emplace(refined_solve(geometry_.s));
        steer_r_.emplace(refined_solve(geometry_.r));
        geometry_.es = std::max(0.0, geometry_.s.dot(steer_s_->z));
        geometry_.er = std::max(0.0, geometry_.r.dot(steer_r_->z));
    }

    void require_feasible(const char* who) const {
        const ExistenceReport rep = existence();
        if (!rep.feasible) {
            throw InfeasibleError(std::string(who) + ": infeasible, need T > max(es, er) (T - es = " +
                                      csv::format_double(rep.margin_prior) +
                                      ", T - er = " + csv::format_double(rep.margin_target) + ")",
                                  rep);
        }
    }

    Problem problem_;
    SolveOptions opts_;
    GridReach reach_;
    Geometry geometry_;
    std::optional<Steered> steer_s_;  // W^{-1} s and its samples
    std::optional<Steered> steer_r_;  // W^{-1} r and its samples
};

inline Geometry geometry(const Problem& p, SolveOptions opts = {}) { return Analysis(p, opts).geometry(); }

inline NoveltySolution solve_min_novelty(const Problem& p, SolveOptions opts = {}) {
    return Analysis(p, opts).min_novelty();
}

inline NoveltySolution solve_min_euclid(const Problem& p, SolveOptions opts = {}) {
    return Analysis(p, opts).min_euclid();
}

inline MinEnergySolution solve_min_energy(const Problem& p, SolveOptions opts = {}) {
    return Analysis(p, opts).min_energy();
}

/// Novelty of an arbitrary candidate against the problem's prior, optionally
/// after rescaling the candidate to unit average energy.
inline double novelty_of(const Problem& p, const Signal& u, bool normalize = true) {
    if (!u.same_grid(p.prior())) throw InvalidArgument("novelty_of: candidate is not on the prior's grid");
    return normalize ? novelty(p.prior(), normalize_energy(u)) : novelty(p.prior(), u);
}

}  // namespace minnov

#endif  // MINNOV_NOVELTY_HPP
