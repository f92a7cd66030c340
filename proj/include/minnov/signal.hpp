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
#ifndef MINNOV_SIGNAL_HPP
#define MINNOV_SIGNAL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <utility>

#include "minnov/csv.hpp"
#include "minnov/errors.hpp"

namespace minnov {

/// Default number of grid intervals on [0, T].
inline constexpr int kDefaultGridIntervals = 1000;

/**
 * @brief Vector-valued input sampled on the uniform grid t_k = kT/N.
 *
 * Column k of `samples()` holds the value at t_k; between samples the signal
 * is the linear interpolant. A prior input v(t - T) is stored already shifted
 * onto [0, T], so column k holds v(t_k - T).
 */
class Signal {
public:
    Signal(Eigen::MatrixXd samples, double horizon)
        : samples_(std::move(samples)), horizon_(horizon) {
        if (samples_.rows() < 1) throw InvalidArgument("Signal: dimension must be >= 1");
        if (samples_.cols() < 3) throw InvalidArgument("Signal: need at least 2 grid intervals");
        if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
            throw InvalidArgument("Signal: horizon must be positive and finite");
        }
        if (!samples_.allFinite()) throw InvalidArgument("Signal: samples must be finite");
    }

    static Signal constant(const Eigen::VectorXd& value, double horizon,
                           int intervals = kDefaultGridIntervals) {
        check_intervals(intervals);
        return Signal(value.replicate(1, intervals + 1), horizon);
    }

    /// Samples `f(t)` on the grid. `f` returns either a double (m = 1) or an
    /// Eigen vector of length `dim`.
    template <class F>
    static Signal sample(int dim, double horizon, int intervals, F&& f) {
        check_intervals(intervals);
        Eigen::MatrixXd samples(dim, intervals + 1);
        for (int k = 0; k <= intervals; ++k) {
            const double t = horizon * k / intervals;
            if constexpr (std::is_arithmetic_v<std::invoke_result_t<F&, double>>) {
                samples.col(k).setConstant(f(t));
            } else {
                samples.col(k) = f(t);
            }
        }
        return Signal(std::move(samples), horizon);
    }

    int dim() const noexcept { return static_cast<int>(samples_.rows()); }
    int intervals() const noexcept { return static_cast<int>(samples_.cols()) - 1; }
    double horizon() const noexcept { return horizon_; }
    double step() const noexcept { return horizon_ / intervals(); }
    double time(int k) const noexcept { return k == intervals() ? horizon_ : horizon_ * k / intervals(); }

    const Eigen::MatrixXd& samples() const noexcept { return samples_; }

    bool same_grid(const Signal& other) const noexcept {
        return dim() == other.dim() && intervals() == other.intervals() &&
               std::abs(horizon_ - other.horizon_) <= 1e-12 * horizon_;
    }

private:
    static void check_intervals(int intervals) {
        if (intervals < 2) throw InvalidArgument("Signal: need at least 2 grid intervals");
    }

    Eigen::MatrixXd samples_;
    double horizon_;
};

/// Trapezoid weights q_k on the grid with `intervals` steps over [0, horizon].
inline Eigen::VectorXd trapezoid_weights(int intervals, double horizon) {
    const double h = horizon / intervals;
    Eigen::VectorXd q = Eigen::VectorXd::Constant(intervals + 1, h);
    q(0) = q(intervals) = 0.5 * h;
    return q;
}

namespace detail {

inline void require_same_grid(const Signal& a, const Signal& b, const char* who) {
    if (!a.same_grid(b)) throw InvalidArgument(std::string(who) + ": signals are on different grids");
}

// (1/T) sum_k q_k a_k' b_k
inline double mean_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double horizon) {
    const int intervals = static_cast<int>(a.cols()) - 1;
    const Eigen::VectorXd q = trapezoid_weights(intervals, horizon);
    return (a.cwiseProduct(b).colwise().sum() * q)(0) / horizon;
}

}  // namespace detail

/// (1/T) ∫ ||s(t)||² dt by the trapezoid rule.
inline double avg_energy(const Signal& s) {
    return detail::mean_inner(s.samples(), s.samples(), s.horizon());
}

/// Exact (1/T) ∫ ||s(t)||² dt of the piecewise-linear interpolant. Differs
/// from avg_energy by O(h²).
inline double interpolant_energy(const Signal& s) {
    const Eigen::MatrixXd& x = s.samples();
    const Eigen::Index n = x.cols() - 1;
    const Eigen::MatrixXd a = x.leftCols(n);
    const Eigen::MatrixXd b = x.rightCols(n);
    const double sum = (a.cwiseProduct(a) + a.cwiseProduct(b) + b.cwiseProduct(b)).sum();
    return sum * s.step() / (3.0 * s.horizon());
}

/// Time-averaged inner product (1/T) ∫ v(t-T)' u(t) dt. Equals 1 when u
/// repeats a unit-energy prior exactly and -1 when it reverses it.
inline double novelty(const Signal& v, const Signal& u) {
    detail::require_same_grid(v, u, "novelty");
    return detail::mean_inner(v.samples(), u.samples(), v.horizon());
}

/// Mean squared distance (1/T) ∫ ||v(t-T) - u(t)||² dt.
inline double euclid_novelty(const Signal& v, const Signal& u) {
    detail::require_same_grid(v, u, "euclid_novelty");
    const Eigen::MatrixXd d = v.samples() - u.samples();
    return detail::mean_inner(d, d, v.horizon());
}

/// Rescales `s` to unit average energy.
inline Signal normalize_energy(const Signal& s) {
    const double e = avg_energy(s);
    if (!(e > 0.0)) throw DegenerateInputError("normalize_energy: signal has zero energy");
    return Signal(s.samples() / std::sqrt(e), s.horizon());
}

/// CSV with header `t,u1,...,um`, one row per grid point.
inline void write_signal_csv(std::ostream& out, const Signal& s) {
    out << 't';
    for (int i = 1; i <= s.dim(); ++i) out << ",u" << i;
    out << '\n';
    for (int k = 0; k <= s.intervals(); ++k) {
        out << csv::format_double(s.time(k));
        for (int i = 0; i < s.dim(); ++i) out << ',' << csv::format_double(s.samples()(i, k));
        out << '\n';
    }
}

inline void write_signal_csv(const std::string& path, const Signal& s) {
    auto out = csv::open_for_write(path);
    write_signal_csv(out, s);
}

/// Inverse of write_signal_csv. The time column must start at 0 and be
/// uniform to within 1e-9 of the step.
inline Signal read_signal_csv(std::istream& in) {
    const Eigen::MatrixXd table = csv::read_matrix(in);
    if (table.cols() < 2) throw InvalidArgument("signal csv: need a time column and at least one component");
    const Eigen::Index intervals = table.rows() - 1;
    if (intervals < 2) throw InvalidArgument("signal csv: need at least 3 rows");
    const double horizon = table(intervals, 0);
    if (table(0, 0) != 0.0 || !(horizon > 0.0)) {
        throw InvalidArgument("signal csv: time column must run from 0 to T > 0");
    }
    const double h = horizon / static_cast<double>(intervals);
    for (Eigen::Index k = 0; k <= intervals; ++k) {
        if (std::abs(table(k, 0) - h * static_cast<double>(k)) > 1e-9 * h) {
            throw InvalidArgument("signal csv: time grid is not uniform at row " + std::to_string(k));
        }
    }
    return Signal(table.rightCols(table.cols() - 1).transpose(), horizon);
}

inline Signal read_signal_csv(const std::string& path) {
    auto in = csv::open_for_read(path);
    return read_signal_csv(in);
}

}  // namespace minnov

#endif  // MINNOV_SIGNAL_HPP
