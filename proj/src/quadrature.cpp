#include "soclab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

namespace soclab::quad {

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (0.949..., 0.741..., 0.405..., 0).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (std::size_t i = 0; i < kKronrodNodes.size(); ++i) {
        const double x = kKronrodNodes[i];
        const double fsum = (x == 0.0) ? f(center) : f(center - half * x) + f(center + half * x);
        kronrod += kKronrodWeights[i] * fsum;
        if (i % 2 == 1) {
            gauss += kGaussWeights[i / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

Estimate integrate_gk15(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, std::size_t max_intervals) {
    std::priority_queue<Segment> heap;
    Segment first = gk15(f, a, b);
    Estimate out{first.value, first.error, 15, true};
    heap.push(first);
    while (out.error > abs_tol) {
        if (heap.size() >= max_intervals) {
            out.converged = false;
            break;
        }
        const Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            out.converged = false;
            break;
        }
        heap.pop();
        const Segment left = gk15(f, worst.a, mid);
        const Segment right = gk15(f, mid, worst.b);
        out.evaluations += 30;
        out.value += left.value + right.value - worst.value;
        out.error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed accumulated rounding from the incremental updates.
    double value = 0.0;
    double error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = value;
    out.error = error;
    return out;
}

double WynnEpsilon::push(double partial_sum) {
    constexpr std::size_t kMaxDiagonal = 40;
    std::vector<double> next;
    next.reserve(std::min(diagonal_.size() + 1, kMaxDiagonal));
    next.push_back(partial_sum);
    for (std::size_t k = 0; k < diagonal_.size() && next.size() < kMaxDiagonal; ++k) {
        const double diff = next[k] - diagonal_[k];
        if (diff == 0.0 || !std::isfinite(diff)) {
            break;
        }
        const double below = (k == 0) ? 0.0 : diagonal_[k - 1];
        next.push_back(below + 1.0 / diff);
    }
    diagonal_ = std::move(next);
    ++count_;

    // Highest even column holds the best estimate.
    const std::size_t last_even = (diagonal_.size() - 1) & ~std::size_t{1};
    const double estimate = diagonal_[last_even];
    if (count_ == 1) {
        error_ = std::numeric_limits<double>::infinity();
    } else if (count_ == 2) {
        error_ = std::abs(estimate - value_);
    } else {
        error_ = std::max(std::abs(estimate - value_), std::abs(estimate - previous_));
    }
    previous_ = value_;
    value_ = estimate;
    return value_;
}

}  // namespace soclab::quad
