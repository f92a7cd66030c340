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
#ifndef MINNOV_LTI_HPP
#define MINNOV_LTI_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "minnov/errors.hpp"
#include "minnov/signal.hpp"

namespace minnov {

/// Continuous-time plant dx/dt = A x + B u.
class LtiSystem {
public:
    LtiSystem(Eigen::MatrixXd a, Eigen::MatrixXd b) : a_(std::move(a)), b_(std::move(b)) {
        if (a_.rows() < 1 || a_.rows() != a_.cols()) throw InvalidArgument("LtiSystem: A must be square, n >= 1");
        if (b_.rows() != a_.rows() || b_.cols() < 1) {
            throw InvalidArgument("LtiSystem: B must be n x m with m >= 1");
        }
        if (!a_.allFinite() || !b_.allFinite()) throw InvalidArgument("LtiSystem: entries must be finite");
    }

    const Eigen::MatrixXd& A() const noexcept { return a_; }
    const Eigen::MatrixXd& B() const noexcept { return b_; }
    int n() const noexcept { return static_cast<int>(a_.rows()); }
    int m() const noexcept { return static_cast<int>(b_.cols()); }

private:
    Eigen::MatrixXd a_;
    Eigen::MatrixXd b_;
};

// =============================================================================
// Matrix exponential
// =============================================================================

/**
 * @brief e^M by scaling and squaring around a [13/13] Padé approximant.
 *
 * M is scaled by 2^-s so that ||M||_1 / 2^s <= 5.37, the Padé core is
 * evaluated with the even/odd split, and the result is squared s times.
 */
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw InvalidArgument("expm: matrix must be square");
    if (!m.allFinite()) throw InvalidArgument("expm: entries must be finite");
    const Eigen::Index n = m.rows();
    if (n == 0) return m;

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    const Eigen::MatrixXd x = m / std::ldexp(1.0, squarings);

    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd x2 = x * x;
    const Eigen::MatrixXd x4 = x2 * x2;
    const Eigen::MatrixXd x6 = x4 * x2;

    Eigen::MatrixXd u = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2);
    u += b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id;
    u = x * u;
    Eigen::MatrixXd v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2);
    v += b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;

    // (V - U)^{-1}(V + U) = I + 2 (V - U)^{-1} U, exact for M = 0.
    Eigen::MatrixXd r = id + 2.0 * (v - u).partialPivLu().solve(u);
    for (int i = 0; i < squarings; ++i) r = r * r;
    return r;
}

// =============================================================================
// Gramian
// =============================================================================

/**
 * @brief Symmetric positive definite Gramian with its Cholesky factor.
 *
 * Construction symmetrizes W, factors it and rejects it with
 * UncontrollableError when the factorization fails or the reciprocal
 * condition estimate drops below kMinRcond.
 */
class Gramian {
public:
    static constexpr double kMinRcond = 1e-12;

    Gramian(const Eigen::MatrixXd& w, double horizon) : horizon_(horizon) {
        if (w.rows() != w.cols() || w.rows() < 1) throw InvalidArgument("Gramian: matrix must be square");
        if (!w.allFinite()) throw InvalidArgument("Gramian: entries must be finite");
        w_ = 0.5 * (w + w.transpose());
        llt_.compute(w_);
        rcond_ = llt_.info() == Eigen::Success ? llt_.rcond() : 0.0;
        if (!(rcond_ >= kMinRcond) || !(llt_.matrixLLT().diagonal().array() > 0.0).all()) {
            throw UncontrollableError(
                "uncontrollable-at-horizon: Gramian is not numerically positive definite (rcond = " +
                    csv::format_double(rcond_) + ")",
                rcond_);
        }
    }

    const Eigen::MatrixXd& matrix() const noexcept { return w_; }
    double horizon() const noexcept { return horizon_; }
    double rcond() const noexcept { return rcond_; }
    int dim() const noexcept { return static_cast<int>(w_.rows()); }

    /// Lower-triangular L with W = L L'.
    Eigen::MatrixXd factor() const { return llt_.matrixL(); }

    /// z with W z = b; two triangular solves plus one refinement step.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        if (b.size() != w_.rows()) throw InvalidArgument("Gramian::solve: dimension mismatch");
        Eigen::VectorXd z = llt_.solve(b);
        z += llt_.solve(b - w_ * z);
        return z;
    }

    /// b' W^{-1} b, evaluated as ||L^{-1} b||² so it is never negative.
    double inverse_quad(const Eigen::VectorXd& b) const {
        if (b.size() != w_.rows()) throw InvalidArgument("Gramian::inverse_quad: dimension mismatch");
        return llt_.matrixL().solve(b).squaredNorm();
    }

private:
    Eigen::MatrixXd w_;
    double horizon_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double rcond_ = 0.0;
};

inline Eigen::VectorXd solve_spd(const Gramian& g, const Eigen::VectorXd& b) { return g.solve(b); }

namespace detail {

inline void require_horizon(double horizon, const char* who) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument(std::string(who) + ": horizon must be positive and finite");
    }
}

}  // namespace detail

/// W_c(T) = ∫_0^T e^{A(T-t)} B B' e^{A'(T-t)} dt by Van Loan's block
/// exponential of [[-A, BB'], [0, A']] T.
inline Gramian gramian(const LtiSystem& sys, double horizon) {
    detail::require_horizon(horizon, "gramian");
    const int n = sys.n();
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = -sys.A() * horizon;
    block.topRightCorner(n, n) = sys.B() * sys.B().transpose() * horizon;
    block.bottomRightCorner(n, n) = sys.A().transpose() * horizon;
    const Eigen::MatrixXd e = expm(block);
    return Gramian(e.bottomRightCorner(n, n).transpose() * e.topRightCorner(n, n), horizon);
}

/// Composite Simpson rule on the Gramian integrand with `panels` panels.
/// Slower than gramian(); kept as an independent cross-check.
inline Gramian simpson_gramian(const LtiSystem& sys, double horizon, int panels = 1000) {
    detail::require_horizon(horizon, "simpson_gramian");
    if (panels < 1) throw InvalidArgument("simpson_gramian: panels must be >= 1");
    const int nodes = 2 * panels;
    const double h = horizon / nodes;
    const Eigen::MatrixXd step = expm(sys.A() * h);
    // Walk tau = T - t from 0 to T; the integrand is symmetric in the walk direction.
    Eigen::MatrixXd propagator = sys.B();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(sys.n(), sys.n());
    for (int j = 0; j <= nodes; ++j) {
        const double weight = (j == 0 || j == nodes) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        acc.noalias() += weight * propagator * propagator.transpose();
        propagator = step * propagator;
    }
    return Gramian(acc * (h / 3.0), horizon);
}

// =============================================================================
// Sampled-input propagation
// =============================================================================

/**
 * @brief Exact one-step map for inputs that are linear between grid samples.
 *
 * x_{k+1} = transition x_k + head u_k + tail u_{k+1}, read off the
 * exponential of [[A h, B h, 0], [0, 0, I], [0, 0, 0]].
 */
struct HoldDiscretization {
    Eigen::MatrixXd transition;
    Eigen::MatrixXd head;
    Eigen::MatrixXd tail;
    double horizon = 0.0;
    int intervals = 0;

    double step() const noexcept { return horizon / intervals; }
    int n() const noexcept { return static_cast<int>(transition.rows()); }
    int m() const noexcept { return static_cast<int>(head.cols()); }
};

inline HoldDiscretization discretize(const LtiSystem& sys, double horizon, int intervals) {
    detail::require_horizon(horizon, "discretize");
    if (intervals < 1) throw InvalidArgument("discretize: need at least one interval");
    const int n = sys.n();
    const int m = sys.m();
    const double h = horizon / intervals;
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 2 * m, n + 2 * m);
    aug.topLeftCorner(n, n) = sys.A() * h;
    aug.block(0, n, n, m) = sys.B() * h;
    aug.block(n, n + m, m, m).setIdentity();
    const Eigen::MatrixXd e = expm(aug);

    HoldDiscretization d;
    d.transition = e.topLeftCorner(n, n);
    d.tail = e.block(0, n + m, n, m);
    d.head = e.block(0, n, n, m) - d.tail;
    d.horizon = horizon;
    d.intervals = intervals;
    return d;
}

namespace detail {

inline void require_compatible(const HoldDiscretization& d, const Eigen::VectorXd& x0, const Signal& u) {
    if (x0.size() != d.n()) throw InvalidArgument("propagate: initial state has wrong dimension");
    if (u.dim() != d.m()) throw InvalidArgument("propagate: input has wrong dimension");
    if (u.intervals() != d.intervals || std::abs(u.horizon() - d.horizon) > 1e-12 * d.horizon) {
        throw InvalidArgument("propagate: input grid does not match the horizon/discretization");
    }
}

}  // namespace detail

/// State at every grid point, n x (N+1).
inline Eigen::MatrixXd simulate(const HoldDiscretization& d, const Eigen::VectorXd& x0, const Signal& u) {
    detail::require_compatible(d, x0, u);
    const Eigen::MatrixXd& us = u.samples();
    Eigen::MatrixXd xs(d.n(), d.intervals + 1);
    xs.col(0) = x0;
    for (int k = 0; k < d.intervals; ++k) {
        xs.col(k + 1).noalias() = d.transition * xs.col(k) + d.head * us.col(k) + d.tail * us.col(k + 1);
    }
    return xs;
}

inline Eigen::VectorXd propagate(const HoldDiscretization& d, const Eigen::VectorXd& x0, const Signal& u) {
    detail::require_compatible(d, x0, u);
    const Eigen::MatrixXd& us = u.samples();
    Eigen::VectorXd x = x0;
    for (int k = 0; k < d.intervals; ++k) {
        x = d.transition * x + d.head * us.col(k) + d.tail * us.col(k + 1);
    }
    return x;
}

/// x(T) = e^{AT} x0 + ∫_0^T e^{A(T-t)} B u(t) dt with u linear between samples.
inline Eigen::VectorXd propagate(const LtiSystem& sys, const Eigen::VectorXd& x0, const Signal& u,
                                 double horizon) {
    detail::require_horizon(horizon, "propagate");
    if (u.intervals() < 1 || std::abs(u.horizon() - horizon) > 1e-12 * horizon) {
        throw InvalidArgument("propagate: input grid does not span [0, T]");
    }
    return propagate(discretize(sys, horizon, u.intervals()), x0, u);
}

// =============================================================================
// Reachability map of the sampled problem
// =============================================================================

namespace detail {

struct SteinSum {
    Eigen::MatrixXd sum;    // sum_{j<count} F^j X F^j'
    Eigen::MatrixXd power;  // F^count
};

// Binary doubling, O(n^3 log count).
inline SteinSum stein_sum(const Eigen::MatrixXd& f, const Eigen::MatrixXd& x, int count) {
    const Eigen::Index n = f.rows();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    int highest = 0;
    while ((count >> highest) > 1) ++highest;
    for (int bit = count > 0 ? highest : -1; bit >= 0; --bit) {
        sum += power * sum * power.transpose();
        power = power * power;
        if ((count >> bit) & 1) {
            sum = x + f * sum * f.transpose();
            power = f * power;
        }
    }
    return {std::move(sum), std::move(power)};
}

}  // namespace detail

/**
 * @brief Linear map from input samples to x(T) - e^{AT}x(0) on a fixed grid,
 * together with its adjoint under the trapezoid inner product (1/T)Σ q_k a_k'b_k.
 *
 * With G_k the n x m weight of sample k in the hold recursion,
 *   image(u)   = Σ_k G_k u_k
 *   adjoint(z) = { G_k' z / q_k }_k            (≈ B' e^{A'(T - t_k)} z)
 *   gramian()  = Σ_k G_k G_k' / q_k           (≈ W_c(T))
 * so image(adjoint(z)) = gramian() z holds exactly, not just as h -> 0.
 */
class GridReach {
public:
    explicit GridReach(HoldDiscretization d) : d_(std::move(d)) {
        coupled_ = d_.head + d_.transition * d_.tail;
    }

    const HoldDiscretization& discretization() const noexcept { return d_; }

    Eigen::VectorXd image(const Signal& u) const {
        return propagate(d_, Eigen::VectorXd::Zero(d_.n()), u);
    }

    /// The backward recursion runs in extended precision: for strongly
    /// unstable A, rounding noise in y leaks into the growing modes and is
    /// amplified again by the forward map.
    Eigen::MatrixXd adjoint(const Eigen::VectorXd& z) const {
        using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
        using WideVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
        const int last = d_.intervals;
        const long double h = static_cast<long double>(d_.horizon) / last;
        const Wide phi_t = d_.transition.transpose().cast<long double>();
        const Wide coupled_t = coupled_.transpose().cast<long double>();
        Eigen::MatrixXd out(d_.m(), last + 1);
        WideVec y = z.cast<long double>();
        out.col(last) = ((2.0L / h) * (d_.tail.transpose().cast<long double>() * y)).cast<double>();
        for (int k = last - 1; k >= 1; --k) {
            out.col(k) = ((coupled_t * y) / h).cast<double>();
            y = phi_t * y;
        }
        out.col(0) = ((2.0L / h) * (d_.head.transpose().cast<long double>() * y)).cast<double>();
        return out;
    }

    Eigen::MatrixXd gramian_matrix() const {
        const int last = d_.intervals;
        const double h = d_.step();
        const auto interior = detail::stein_sum(d_.transition, coupled_ * coupled_.transpose(), last - 1);
        const Eigen::MatrixXd first = interior.power * d_.head;
        return interior.sum / h + (2.0 / h) * (d_.tail * d_.tail.transpose() + first * first.transpose());
    }

private:
    HoldDiscretization d_;
    Eigen::MatrixXd coupled_;  // head + transition * tail
};

}  // namespace minnov

#endif  // MINNOV_LTI_HPP
