#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "soclab/netmodel.hpp"

// Monte Carlo simulation of the Poisson bipolar network. Fading and ALOHA are
// averaged analytically, so each link contributes its exact conditional
// success probability given the transmitter and receiver locations.

namespace soclab::sim {

enum class BoundaryKind { torus, guard };

struct Boundary {
    BoundaryKind kind = BoundaryKind::torus;
    double guard_width = 0.0;  // only links with receivers this far inside count
};

struct SimConfig {
    ModelParams params;
    double window_side = 30.0;
    std::uint64_t seed = 0;
    std::size_t num_realizations = 1;
    Boundary boundary{};

    /// Throws std::domain_error when the window is too small for the link model.
    void validate() const;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct NetworkRealization {
    std::uint64_t index = 0;
    double window_side = 0.0;
    std::vector<Point> transmitters;
    std::vector<Point> receivers;      // receivers[i] is the receiver of transmitter i
    std::vector<double> link_lengths;  // |transmitters[i] - receivers[i]|

    bool empty() const { return transmitters.empty(); }
};

/// Draws realization `realization_index`. Identical (seed, index) pairs give
/// bit-identical realizations regardless of the order in which they are drawn.
NetworkRealization sample_network(const SimConfig& cfg, std::uint64_t realization_index);

/// Per-link P_s = prod_z (p / (1 + theta (R / d_z)^alpha) + 1 - p). Serial
/// reference kernel.
std::vector<double> conditional_success_probs_serial(const NetworkRealization& net,
                                                     const ModelParams& params,
                                                     const Boundary& boundary);

/// OpenMP version of the per-link kernel; bit-identical to the serial one.
std::vector<double> conditional_success_probs(const NetworkRealization& net,
                                              const ModelParams& params,
                                              const Boundary& boundary);

struct EmpiricalDistribution {
    std::vector<double> samples;
    /// samples of realization r occupy [offsets[r], offsets[r + 1])
    std::vector<std::size_t> offsets{0};
    std::size_t realization_count = 0;
    std::size_t empty_realizations = 0;

    std::size_t num_links() const { return samples.size(); }
    void append_realization(const std::vector<double>& link_probs);
};

/// Runs all realizations, in parallel over realizations. The merge follows
/// the realization index, so the result does not depend on scheduling.
EmpiricalDistribution simulate(const SimConfig& cfg);

/// Serial reference for `simulate`.
EmpiricalDistribution simulate_serial(const SimConfig& cfg);

class InsufficientSamplesError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct Estimate {
    double value = 0.0;
    /// Realization-clustered standard error when at least 10 realizations
    /// contribute links, otherwise equal to `iid_std_err`.
    double std_err = 0.0;
    /// Standard error treating every link as independent.
    double iid_std_err = 0.0;
};

/// Fraction of links with P_s > 1 - eps. Requires at least 100 links.
Estimate empirical_meta(const EmpiricalDistribution& dist, double eps);

/// Sample mean of P_s^b, b > 0. Requires at least 100 links.
Estimate empirical_moment(const EmpiricalDistribution& dist, double b);

/// Sample variance of P_s with a bootstrap standard error over realizations.
Estimate empirical_variance(const EmpiricalDistribution& dist, std::size_t replicates = 200,
                            std::uint64_t seed = 0);

/// Equal-width bin counts on [0, 1]; a sample of exactly 1 falls in the top bin.
std::vector<std::size_t> histogram(const EmpiricalDistribution& dist, std::size_t bins);

}  // namespace soclab::sim
