#include "soclab/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace soclab::sim {

namespace {

constexpr std::size_t kMinLinks = 100;
constexpr std::size_t kMinClusters = 10;

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

double wrap(double v, double side) {
    v = std::fmod(v, side);
    return v < 0.0 ? v + side : v;
}

double axis_delta(double a, double b, double side, bool torus) {
    double d = std::abs(a - b);
    if (torus && d > 0.5 * side) {
        d = side - d;
    }
    return d;
}

double dist2(const Point& a, const Point& b, double side, bool torus) {
    const double dx = axis_delta(a.x, b.x, side, torus);
    const double dy = axis_delta(a.y, b.y, side, torus);
    return dx * dx + dy * dy;
}

std::vector<Point> uniform_points(std::mt19937_64& rng, double intensity, double side) {
    std::poisson_distribution<long long> count(intensity * side * side);
    std::uniform_real_distribution<double> coord(0.0, side);
    const auto n = static_cast<std::size_t>(count(rng));
    std::vector<Point> pts(n);
    for (auto& pt : pts) {
        pt.x = coord(rng);
        pt.y = coord(rng);
    }
    return pts;
}

bool inside_inner(const Point& pt, double side, const Boundary& boundary) {
    if (boundary.kind == BoundaryKind::torus) {
        return true;
    }
    const double g = boundary.guard_width;
    return pt.x >= g && pt.x <= side - g && pt.y >= g && pt.y <= side - g;
}

double link_success(const NetworkRealization& net, const ModelParams& params,
                    const Boundary& boundary, std::size_t i) {
    const bool torus = boundary.kind == BoundaryKind::torus;
    const double side = net.window_side;
    const double p = params.p();
    const double theta = params.theta();
    const double half_alpha = 0.5 * params.alpha();
    const double signal = theta * std::pow(net.link_lengths[i], params.alpha());
    const Point& rx = net.receivers[i];
    double prod = 1.0;
    for (std::size_t j = 0; j < net.transmitters.size(); ++j) {
        if (j == i) {
            continue;
        }
        // p / (1 + theta (R/d)^alpha) + 1 - p = 1 - p theta R^alpha / (d^alpha + theta R^alpha)
        const double d_alpha = std::pow(dist2(rx, net.transmitters[j], side, torus), half_alpha);
        prod *= 1.0 - p * signal / (d_alpha + signal);
    }
    return prod;
}

std::vector<std::size_t> counted_links(const NetworkRealization& net, const Boundary& boundary) {
    std::vector<std::size_t> out;
    out.reserve(net.transmitters.size());
    for (std::size_t i = 0; i < net.transmitters.size(); ++i) {
        if (inside_inner(net.receivers[i], net.window_side, boundary)) {
            out.push_back(i);
        }
    }
    return out;
}

void require_links(const EmpiricalDistribution& dist) {
    if (dist.num_links() < kMinLinks) {
        throw InsufficientSamplesError("at least 100 links are required, got " +
                                       std::to_string(dist.num_links()));
    }
}

// Mean of f over links with iid and realization-clustered standard errors.
template <class F>
Estimate clustered_mean(const EmpiricalDistribution& dist, F&& f) {
    const std::size_t n = dist.num_links();
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double s : dist.samples) {
        const double v = f(s);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(n - 1));
    Estimate out;
    out.value = mean;
    out.iid_std_err = std::sqrt(var / static_cast<double>(n));
    out.std_err = out.iid_std_err;

    std::size_t clusters = 0;
    double resid_sq = 0.0;
    for (std::size_t r = 0; r + 1 < dist.offsets.size(); ++r) {
        const std::size_t lo = dist.offsets[r];
        const std::size_t hi = dist.offsets[r + 1];
        if (lo == hi) {
            continue;
        }
        double resid = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            resid += f(dist.samples[k]) - mean;
        }
        resid_sq += resid * resid;
        ++clusters;
    }
    if (clusters >= kMinClusters) {
        const double c = static_cast<double>(clusters);
        out.std_err = std::sqrt(c / (c - 1.0) * resid_sq) / static_cast<double>(n);
    }
    return out;
}

}  // namespace

void SimConfig::validate() const {
    if (!(window_side > 0.0) || !std::isfinite(window_side)) {
        throw std::domain_error("window side must be positive");
    }
    if (num_realizations < 1) {
        throw std::domain_error("num_realizations must be at least 1");
    }
    double scale = 0.0;
    if (const auto* fixed = std::get_if<FixedDistance>(&params.link())) {
        scale = fixed->r;
    } else {
        scale = 1.0 / std::sqrt(std::get<RayleighNearest>(params.link()).mu);
    }
    if (!(window_side > 10.0 * scale)) {
        throw std::domain_error("window side must exceed 10 link-distance units");
    }
    if (boundary.kind == BoundaryKind::guard &&
        !(boundary.guard_width >= 0.0 && 2.0 * boundary.guard_width < window_side)) {
        throw std::domain_error("guard width must lie in [0, L/2)");
    }
}

NetworkRealization sample_network(const SimConfig& cfg, std::uint64_t realization_index) {
    cfg.validate();
    const double side = cfg.window_side;
    const bool torus = cfg.boundary.kind == BoundaryKind::torus;
    auto rng = make_engine(cfg.seed, realization_index);

    NetworkRealization net;
    net.index = realization_index;
    net.window_side = side;
    net.transmitters = uniform_points(rng, cfg.params.lambda(), side);
    const std::size_t n = net.transmitters.size();
    net.receivers.resize(n);
    net.link_lengths.resize(n);

    if (const auto* fixed = std::get_if<FixedDistance>(&cfg.params.link())) {
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < n; ++i) {
            const double phi = angle(rng);
            Point rx{net.transmitters[i].x + fixed->r * std::cos(phi),
                     net.transmitters[i].y + fixed->r * std::sin(phi)};
            if (torus) {
                rx = {wrap(rx.x, side), wrap(rx.y, side)};
            }
            net.receivers[i] = rx;
            net.link_lengths[i] = fixed->r;
        }
        return net;
    }

    const double mu = std::get<RayleighNearest>(cfg.params.link()).mu;
    const std::vector<Point> pool = uniform_points(rng, mu, side);
    if (pool.empty()) {
        // no receiver to link to: the realization carries no links
        net.transmitters.clear();
        net.receivers.clear();
        net.link_lengths.clear();
        return net;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < pool.size(); ++k) {
            const double d2 = dist2(net.transmitters[i], pool[k], side, torus);
            if (d2 < best_d2) {  // strict: ties keep the lowest index
                best_d2 = d2;
                best = k;
            }
        }
        net.receivers[i] = pool[best];
        net.link_lengths[i] = std::sqrt(best_d2);
    }
    return net;
}

std::vector<double> conditional_success_probs_serial(const NetworkRealization& net,
                                                     const ModelParams& params,
                                                     const Boundary& boundary) {
    const auto links = counted_links(net, boundary);
    std::vector<double> out(links.size());
    for (std::size_t k = 0; k < links.size(); ++k) {
        out[k] = link_success(net, params, boundary, links[k]);
    }
    return out;
}

std::vector<double> conditional_success_probs(const NetworkRealization& net,
                                              const ModelParams& params,
                                              const Boundary& boundary) {
    const auto links = counted_links(net, boundary);
    std::vector<double> out(links.size());
    const auto count = static_cast<long long>(links.size());
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < count; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        out[idx] = link_success(net, params, boundary, links[idx]);
    }
    return out;
}

void EmpiricalDistribution::append_realization(const std::vector<double>& link_probs) {
    samples.insert(samples.end(), link_probs.begin(), link_probs.end());
    offsets.push_back(samples.size());
    ++realization_count;
    if (link_probs.empty()) {
        ++empty_realizations;
    }
}

EmpiricalDistribution simulate(const SimConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<double>> per_realization(cfg.num_realizations);
    const auto count = static_cast<long long>(cfg.num_realizations);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long r = 0; r < count; ++r) {
        const auto net = sample_network(cfg, static_cast<std::uint64_t>(r));
        per_realization[static_cast<std::size_t>(r)] =
            conditional_success_probs_serial(net, cfg.params, cfg.boundary);
    }
    EmpiricalDistribution dist;
    for (const auto& probs : per_realization) {
        dist.append_realization(probs);
    }
    return dist;
}

EmpiricalDistribution simulate_serial(const SimConfig& cfg) {
    cfg.validate();
    EmpiricalDistribution dist;
    for (std::size_t r = 0; r < cfg.num_realizations; ++r) {
        const auto net = sample_network(cfg, r);
        dist.append_realization(conditional_success_probs_serial(net, cfg.params, cfg.boundary));
    }
    return dist;
}

Estimate empirical_meta(const EmpiricalDistribution& dist, double eps) {
    require_links(dist);
    if (!(eps > 0.0 && eps <= 1.0)) {
        throw std::domain_error("eps must lie in (0, 1]");
    }
    const double level = 1.0 - eps;
    return clustered_mean(dist, [level](double s) { return s > level ? 1.0 : 0.0; });
}

Estimate empirical_moment(const EmpiricalDistribution& dist, double b) {
    require_links(dist);
    if (!(b > 0.0)) {
        throw std::domain_error("moment order b must be positive");
    }
    return clustered_mean(dist, [b](double s) { return std::pow(s, b); });
}

Estimate empirical_variance(const EmpiricalDistribution& dist, std::size_t replicates,
                            std::uint64_t seed) {
    require_links(dist);
    auto variance_of = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) {
            mean += x;
        }
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - mean) * (x - mean);
        }
        return ss / static_cast<double>(xs.size() - 1);
    };
    Estimate out;
    out.value = variance_of(dist.samples);

    const std::size_t r_count = dist.offsets.size() - 1;
    auto rng = make_engine(seed, 0);
    std::uniform_int_distribution<std::size_t> pick(0, r_count - 1);
    std::vector<double> stats;
    stats.reserve(replicates);
    std::vector<double> resample;
    for (std::size_t rep = 0; rep < replicates; ++rep) {
        resample.clear();
        for (std::size_t k = 0; k < r_count; ++k) {
            const std::size_t r = pick(rng);
            resample.insert(resample.end(), dist.samples.begin() + dist.offsets[r],
                            dist.samples.begin() + dist.offsets[r + 1]);
        }
        if (resample.size() >= 2) {
            stats.push_back(variance_of(resample));
        }
    }
    out.std_err = stats.size() >= 2 ? std::sqrt(variance_of(stats)) : 0.0;
    out.iid_std_err = out.std_err;
    return out;
}

std::vector<std::size_t> histogram(const EmpiricalDistribution& dist, std::size_t bins) {
    if (bins < 2) {
        throw std::domain_error("histogram needs at least two bins");
    }
    std::vector<std::size_t> counts(bins, 0);
    for (double s : dist.samples) {
        const auto k = static_cast<std::size_t>(std::clamp(s, 0.0, 1.0) * static_cast<double>(bins));
        ++counts[std::min(k, bins - 1)];
    }
    return counts;
}

}  // namespace soclab::sim
