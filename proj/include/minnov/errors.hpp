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
#ifndef MINNOV_ERRORS_HPP
#define MINNOV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace minnov {

/// Bad shapes, non-finite entries, grid mismatches and similar caller errors.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A zero signal was handed to an operation that needs to rescale it.
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The controllability Gramian is not numerically positive definite on the
/// requested horizon.
class UncontrollableError : public std::runtime_error {
public:
    UncontrollableError(const std::string& what, double rcond)
        : std::runtime_error(what), rcond_(rcond) {}

    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

/// Energy margins T - s'W^{-1}s and T - r'W^{-1}r, plus the tolerance used to
/// decide feasibility.
struct ExistenceReport {
    bool feasible = false;
    double margin_prior = 0.0;   // T - es
    double margin_target = 0.0;  // T - er
    double epsilon = 0.0;
};

/// The requested transfer cannot be made with unit average energy.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, ExistenceReport report)
        : std::runtime_error(what), report_(report) {}

    const ExistenceReport& report() const noexcept { return report_; }

private:
    ExistenceReport report_;
};

}  // namespace minnov

#endif  // MINNOV_ERRORS_HPP
