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
#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <random>

#include "minnov/lti.hpp"
#include "test_support.hpp"

using namespace minnov;
namespace ts = minnov::test_support;
using ts::random_matrix;
using ts::random_state_matrix;

namespace {

double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
    return (got - want).norm() / want.norm();
}

}  // namespace

// -----------------------------------------------------------------------------
// expm
// -----------------------------------------------------------------------------

TEST(Expm, ZeroMatrixIsIdentity) {
    EXPECT_LE((expm(Eigen::MatrixXd::Zero(2, 2)) - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Expm, DiagonalMatchesScalarExp) {
    Eigen::MatrixXd m = Eigen::Vector2d(1.0, -1.0).asDiagonal();
    const Eigen::MatrixXd e = expm(m);
    EXPECT_NEAR(e(0, 0), std::exp(1.0), 1e-12 * std::exp(1.0));
    EXPECT_NEAR(e(1, 1), std::exp(-1.0), 1e-12 * std::exp(-1.0));
    EXPECT_EQ(e(0, 1), 0.0);
    EXPECT_EQ(e(1, 0), 0.0);
}

TEST(Expm, NilpotentSeriesTerminates) {
    Eigen::MatrixXd m(2, 2);
    m << 0, 1, 0, 0;
    Eigen::MatrixXd want(2, 2);
    want << 1, 1, 0, 1;
    EXPECT_LE((expm(m) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Expm, RejectsBadInput) {
    EXPECT_THROW(expm(Eigen::MatrixXd::Zero(2, 3)), InvalidArgument);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(expm(m), InvalidArgument);
}

TEST(Expm, AgreesWithEigenMatrixFunctions) {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + trial % 8;
        const double norm = 0.25 * (1 + trial % 40);  // up to 10
        const Eigen::MatrixXd m = random_state_matrix(n, norm, false, gen);
        const Eigen::MatrixXd oracle = m.exp();
        EXPECT_LE(rel_err(expm(m), oracle), 1e-12) << "n=" << n << " norm=" << norm;
    }
}

TEST(Expm, GroupProperties) {
    std::mt19937_64 gen(5);
    const Eigen::MatrixXd m = random_state_matrix(6, 3.0, false, gen);
    EXPECT_LE((expm(m) * expm(-m) - Eigen::MatrixXd::Identity(6, 6)).norm(), 1e-12);
    const Eigen::MatrixXd e = expm(m);
    EXPECT_LE(rel_err(expm(2.0 * m), e * e), 1e-12);
}

// -----------------------------------------------------------------------------
// Gramian
// -----------------------------------------------------------------------------

TEST(Gramian, IntegratorWithIdentityInput) {
    LtiSystem sys(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
    const Gramian w = gramian(sys, 2.0);
    EXPECT_LE((w.matrix() - 2.0 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gramian, ScalarMatchesAntiderivativeAndQuadrature) {
    for (double a : {-2.0, -0.3, 0.7, 1.5}) {
        for (double T : {0.5, 2.0, 3.0}) {
            LtiSystem sys(Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Constant(1, 1, 1.0));
            const double analytic = (std::exp(2 * a * T) - 1.0) / (2 * a);
            const double quad = ts::simpson([&](double t) { return std::exp(2 * a * (T - t)); }, 0.0, T);
            EXPECT_NEAR(quad, analytic, 1e-10 * analytic);
            EXPECT_NEAR(gramian(sys, T).matrix()(0, 0), analytic, 1e-12 * analytic) << "a=" << a << " T=" << T;
        }
    }
}

TEST(Gramian, ScalarIntegratorLimit) {
    LtiSystem sys(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, 1.0));
    EXPECT_NEAR(gramian(sys, 2.0).matrix()(0, 0), 2.0, 1e-14);
}

TEST(Gramian, RejectsNonPositiveHorizon) {
    LtiSystem sys(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, 1.0));
    EXPECT_THROW(gramian(sys, 0.0), InvalidArgument);
    EXPECT_THROW(gramian(sys, -1.0), InvalidArgument);
}

TEST(Gramian, RankDeficientInputIsUncontrollable) {
    Eigen::MatrixXd b(2, 1);
    b << 1, 0;
    LtiSystem sys(Eigen::MatrixXd::Zero(2, 2), b);
    try {
        gramian(sys, 2.0);
        FAIL() << "expected UncontrollableError";
    } catch (const UncontrollableError& e) {
        EXPECT_LT(e.rcond(), Gramian::kMinRcond);
        EXPECT_NE(std::string(e.what()).find("uncontrollable-at-horizon"), std::string::npos);
    }
}

TEST(Gramian, SymmetricWithPositivePivots) {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 9;
        LtiSystem sys(random_state_matrix(n, 2.0, trial % 2 == 0, gen), random_matrix(n, n, gen));
        const Gramian w = gramian(sys, 1.0 + 0.2 * trial);
        EXPECT_EQ((w.matrix() - w.matrix().transpose()).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GT(w.factor().diagonal().minCoeff(), 0.0);
        EXPECT_GT(w.rcond(), 0.0);
        EXPECT_LE(w.rcond(), 1.0);
    }
}

TEST(Gramian, BlockExponentialAgreesWithSimpson) {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 1 + trial % 10;
        const double T = 0.5 + 4.5 * trial / 14.0;
        LtiSystem sys(random_state_matrix(n, 2.0, true, gen), random_matrix(n, n, gen));
        EXPECT_LE(rel_err(gramian(sys, T).matrix(), simpson_gramian(sys, T, 1000).matrix()), 1e-6);
    }
}

TEST(Gramian, SemigroupAdditivity) {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 6;
        const double T = 1.0 + trial * 0.4;
        LtiSystem sys(random_state_matrix(n, 2.0, trial % 2 == 1, gen), random_matrix(n, 2, gen));
        const Eigen::MatrixXd half = gramian(sys, T / 2).matrix();
        const Eigen::MatrixXd e = expm(sys.A() * (T / 2));
        EXPECT_LE(rel_err(e * half * e.transpose() + half, gramian(sys, T).matrix()), 1e-8);
    }
}

// -----------------------------------------------------------------------------
// solve_spd
// -----------------------------------------------------------------------------

TEST(SolveSpd, DiagonalAndCoupledExamples) {
    const Gramian diag(2.0 * Eigen::MatrixXd::Identity(2, 2), 1.0);
    EXPECT_LE((solve_spd(diag, Eigen::Vector2d(4, 6)) - Eigen::Vector2d(2, 3)).norm(), 1e-15);
    Eigen::MatrixXd w(2, 2);
    w << 2, 1, 1, 2;
    EXPECT_LE((solve_spd(Gramian(w, 1.0), Eigen::Vector2d(3, 3)) - Eigen::Vector2d(1, 1)).norm(), 1e-15);
}

TEST(SolveSpd, RandomResidual) {
    std::mt19937_64 gen(29);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd r = random_matrix(10, 10, gen);
        const Eigen::MatrixXd w = r * r.transpose() + 0.1 * Eigen::MatrixXd::Identity(10, 10);
        const Eigen::VectorXd b = random_matrix(10, 1, gen);
        const Gramian g(w, 1.0);
        EXPECT_LE((w * solve_spd(g, b) - b).norm(), 1e-10 * b.norm());
        EXPECT_NEAR(g.inverse_quad(b), b.dot(w.ldlt().solve(b)), 1e-9 * b.dot(w.ldlt().solve(b)));
    }
}

TEST(Gramian, RejectsIndefinite) {
    Eigen::MatrixXd w(2, 2);
    w << 1, 2, 2, 1;
    EXPECT_THROW(Gramian(w, 1.0), UncontrollableError);
}

// -----------------------------------------------------------------------------
// propagate
// -----------------------------------------------------------------------------

namespace {

LtiSystem scalar(double a) { return LtiSystem(Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Constant(1, 1, 1.0)); }

}  // namespace

TEST(Propagate, NoDriftNoInput) {
    const Signal zero = Signal::constant(Eigen::VectorXd::Zero(1), 2.0, 100);
    EXPECT_NEAR(propagate(scalar(0.0), Eigen::VectorXd::Constant(1, 1.0), zero, 2.0)(0), 1.0, 1e-15);
}

TEST(Propagate, ZeroMeanRampOnIntegrator) {
    const Signal ramp = Signal::sample(1, 2.0, 1000, [](double t) { return std::sqrt(3.0) * (t - 1.0); });
    EXPECT_NEAR(propagate(scalar(0.0), Eigen::VectorXd::Constant(1, 1.0), ramp, 2.0)(0), 1.0, 1e-12);
}

TEST(Propagate, ScalarDecay) {
    const Signal zero = Signal::constant(Eigen::VectorXd::Zero(1), 1.0, 1000);
    EXPECT_NEAR(propagate(scalar(-1.0), Eigen::VectorXd::Constant(1, 1.0), zero, 1.0)(0), std::exp(-1.0), 1e-10);
}

TEST(Propagate, FreeResponseMatchesExpm) {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial;
        LtiSystem sys(random_state_matrix(n, 2.0, trial % 2 == 0, gen), random_matrix(n, 2, gen));
        const Eigen::VectorXd x0 = random_matrix(n, 1, gen);
        const double T = 0.5 + 0.4 * trial;
        const Signal zero = Signal::constant(Eigen::VectorXd::Zero(2), T, 1000);
        const Eigen::VectorXd want = expm(sys.A() * T) * x0;
        EXPECT_LE((propagate(sys, x0, zero, T) - want).norm(), 1e-10 * want.norm());
    }
}

TEST(Propagate, SecondOrderInGridSpacing) {
    // x' = -x + sin t, x(0) = 0:  x(T) = (sin T - cos T + e^{-T}) / 2
    const double T = 2.0;
    const double exact = 0.5 * (std::sin(T) - std::cos(T) + std::exp(-T));
    double previous = 0.0;
    for (int n : {20, 40, 80, 160}) {
        const Signal u = Signal::sample(1, T, n, [](double t) { return std::sin(t); });
        const double err = std::abs(propagate(scalar(-1.0), Eigen::VectorXd::Zero(1), u, T)(0) - exact);
        if (previous > 0.0) EXPECT_NEAR(previous / err, 4.0, 0.2) << "n=" << n;
        previous = err;
    }
}

TEST(Propagate, RejectsMismatches) {
    const Signal u = Signal::constant(Eigen::VectorXd::Zero(1), 2.0, 10);
    EXPECT_THROW(propagate(scalar(0.0), Eigen::VectorXd::Zero(1), u, 3.0), InvalidArgument);
    EXPECT_THROW(propagate(scalar(0.0), Eigen::VectorXd::Zero(2), u, 2.0), InvalidArgument);
    const Signal wide = Signal::constant(Eigen::VectorXd::Zero(2), 2.0, 10);
    EXPECT_THROW(propagate(scalar(0.0), Eigen::VectorXd::Zero(1), wide, 2.0), InvalidArgument);
}

TEST(Simulate, TrajectoryEndsAtPropagate) {
    std::mt19937_64 gen(37);
    LtiSystem sys(random_state_matrix(3, 1.0, true, gen), random_matrix(3, 2, gen));
    const Signal u = ts::random_smooth_signal(2, 1.5, 50, gen);
    const HoldDiscretization d = discretize(sys, 1.5, 50);
    const Eigen::MatrixXd xs = simulate(d, Eigen::VectorXd::Ones(3), u);
    EXPECT_EQ(xs.cols(), 51);
    EXPECT_LE((xs.col(50) - propagate(d, Eigen::VectorXd::Ones(3), u)).norm(), 1e-14);
}

// -----------------------------------------------------------------------------
// GridReach
// -----------------------------------------------------------------------------

TEST(GridReach, ImageMatchesDenseForwardMap) {
    std::mt19937_64 gen(41);
    LtiSystem sys(random_state_matrix(3, 1.5, false, gen), random_matrix(3, 2, gen));
    const double T = 1.3;
    const int N = 40;
    const Eigen::MatrixXd dense = ts::dense_reach_matrix(sys, T, N);
    const Signal u = ts::random_smooth_signal(2, T, N, gen);
    const GridReach reach(discretize(sys, T, N));
    EXPECT_LE((reach.image(u) - dense * ts::flatten(u)).norm(), 1e-12 * reach.image(u).norm());
}

TEST(GridReach, AdjointUnderTrapezoidInnerProduct) {
    // <L* z, u>_T = z' L u with <a, b>_T = (1/T) sum q_k a_k' b_k and L* = T * adjoint.
    std::mt19937_64 gen(43);
    LtiSystem sys(random_state_matrix(4, 1.5, false, gen), random_matrix(4, 2, gen));
    const double T = 2.0;
    const GridReach reach(discretize(sys, T, 200));
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd z = random_matrix(4, 1, gen);
        const Signal u = ts::random_smooth_signal(2, T, 200, gen);
        const double lhs = T * novelty(Signal(reach.adjoint(z), T), u);
        const double rhs = z.dot(reach.image(u));
        EXPECT_NEAR(lhs, rhs, 1e-11 * std::abs(rhs) + 1e-13);
    }
}

TEST(GridReach, GramianIsImageOfAdjoint) {
    std::mt19937_64 gen(47);
    LtiSystem sys(random_state_matrix(5, 2.0, false, gen), random_matrix(5, 3, gen));
    const double T = 2.5;
    const GridReach reach(discretize(sys, T, 1000));
    const Eigen::MatrixXd w = reach.gramian_matrix();
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd z = random_matrix(5, 1, gen);
        const Eigen::VectorXd want = w * z;
        EXPECT_LE((reach.image(Signal(reach.adjoint(z), T)) - want).norm(), 1e-11 * want.norm());
    }
}

TEST(GridReach, ConvergesToContinuousQuantities) {
    std::mt19937_64 gen(53);
    LtiSystem sys(random_state_matrix(4, 2.0, true, gen), random_matrix(4, 2, gen));
    const double T = 3.0;
    const Eigen::MatrixXd wc = gramian(sys, T).matrix();
    const Eigen::VectorXd z = random_matrix(4, 1, gen);
    double prev_w = 0.0;
    double prev_a = 0.0;
    for (int n : {100, 200, 400}) {
        const GridReach reach(discretize(sys, T, n));
        const double err_w = rel_err(reach.gramian_matrix(), wc);
        // continuous steering B' e^{A'(T - t_k)} z
        const Eigen::MatrixXd adj = reach.adjoint(z);
        double err_a = 0.0;
        for (int k = 0; k <= n; ++k) {
            const Eigen::VectorXd exact = sys.B().transpose() * expm(sys.A().transpose() * (T - T * k / n)) * z;
            err_a = std::max(err_a, (adj.col(k) - exact).norm());
        }
        if (prev_w > 0.0) {
            EXPECT_NEAR(prev_w / err_w, 4.0, 0.5);
            EXPECT_GT(prev_a / err_a, 1.8);  // endpoint samples converge at first order
        }
        prev_w = err_w;
        prev_a = err_a;
    }
    EXPECT_LT(prev_w, 1e-4);
}
