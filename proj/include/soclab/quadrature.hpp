#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace soclab::quad {

struct Estimate {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b] to absolute tolerance `abs_tol`.
/// The interval with the largest error estimate is bisected until the summed
/// error drops below the tolerance or `max_intervals` is reached.
Estimate integrate_gk15(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, std::size_t max_intervals = 500);

/// Wynn epsilon acceleration of a sequence of partial sums.
class WynnEpsilon {
public:
    /// Adds the next partial sum and returns the current extrapolated value.
    double push(double partial_sum);

    double value() const { return value_; }
    /// Difference between the last two extrapolations (or +inf if too few terms).
    double error() const { return error_; }
    std::size_t size() const { return count_; }

private:
    // Last anti-diagonal of the epsilon table.
    std::vector<double> diagonal_;
    double value_ = 0.0;
    double previous_ = 0.0;
    double error_ = 0.0;
    std::size_t count_ = 0;
};

}  // namespace soclab::quad
