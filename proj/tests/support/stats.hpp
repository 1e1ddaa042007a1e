#pragma once

// Test-side statistical oracles, independent of the library's own
// implementation paths: brute-force score evaluation, distribution tests and
// sample-moment helpers.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hawkscan/edges.hpp"
#include "hawkscan/model.hpp"
#include "hawkscan/normal.hpp"

namespace testsupport {

inline double mean(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double variance(const std::vector<double>& xs) {
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / (static_cast<double>(xs.size()) - 1.0);
}

inline double covariance(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double mx = mean(xs), my = mean(ys);
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) ss += (xs[i] - mx) * (ys[i] - my);
    return ss / (static_cast<double>(xs.size()) - 1.0);
}

/// Direct quadratic-time evaluation of the cumulative edge scores at time T:
/// the jump sum over events at the target with explicitly recomputed decayed
/// source sums and intensities, plus the compensator sum over source events.
inline Eigen::VectorXd brute_force_score(const hawkscan::HawkesModel& model,
                                         const hawkscan::EventStream& stream,
                                         const hawkscan::EdgeSet& edges, double t_end) {
    const auto& ev = stream.events;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edges.size()));
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [p, q] = edges[e];
        double jump = 0.0;
        for (std::size_t k = 0; k < ev.size(); ++k) {
            if (ev[k].node != q || ev[k].time >= t_end) continue;
            double decayed_p = 0.0;
            double lambda = model.mu[q];
            for (std::size_t i = 0; i < k; ++i) {
                const double w = std::exp(-model.beta * (ev[k].time - ev[i].time));
                if (ev[i].node == p) decayed_p += w;
                lambda += model.A(ev[i].node, q) * w;
            }
            jump += decayed_p / lambda;
        }
        double comp = 0.0;
        for (const auto& evt : ev)
            if (evt.node == p && evt.time < t_end)
                comp += std::exp(-model.beta * (t_end - evt.time)) - 1.0;
        out[static_cast<Eigen::Index>(e)] = jump + comp / model.beta;
    }
    return out;
}

/// One-sample Kolmogorov-Smirnov distance against a cdf.
template <typename Cdf>
inline double ks_distance(std::vector<double> xs, Cdf&& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

/// Anderson-Darling statistic against the standard normal (fully specified).
/// The 1% critical value for a fully specified distribution is 3.857.
inline double anderson_darling_normal(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const auto n = static_cast<double>(xs.size());
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double fi = std::clamp(hawkscan::normal_cdf(xs[i]), 1e-300, 1.0 - 1e-16);
        const double fj =
            std::clamp(hawkscan::normal_cdf(xs[xs.size() - 1 - i]), 1e-300, 1.0 - 1e-16);
        s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(fi) + std::log1p(-fj));
    }
    return -n - s / n;
}

} // namespace testsupport
