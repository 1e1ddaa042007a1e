#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "hawkscan/clusters.hpp"
#include "hawkscan/fisher.hpp"
#include "hawkscan/mvn_tail.hpp"
#include "hawkscan/parallel.hpp"
#include "hawkscan/scan.hpp"
#include "hawkscan/score.hpp"
#include "hawkscan/simulate.hpp"

namespace hawkscan {

/// Gaussian surrogate for the vector of cluster statistics at a fixed update:
/// same-time correlation matrix plus the temporal overlap resolution. The
/// lagged correlation is always the triangular factor (1 - lag/window)+ of
/// the same-time matrix and is derived, never stored.
struct CalibrationModel {
    Eigen::MatrixXd sigma;
    int w_over_delta = 20;
    bool two_sided = true;

    Eigen::Index num_clusters() const { return sigma.rows(); }

    void validate() const {
        const Eigen::Index l = sigma.rows();
        if (l == 0 || sigma.cols() != l)
            throw config_error("CalibrationModel: sigma must be square and non-empty");
        if (w_over_delta < 1)
            throw config_error("CalibrationModel: w_over_delta must be >= 1");
        for (Eigen::Index i = 0; i < l; ++i) {
            if (std::fabs(sigma(i, i) - 1.0) > 1e-9)
                throw config_error("CalibrationModel: sigma diagonal must be 1");
            for (Eigen::Index j = 0; j < l; ++j) {
                if (std::fabs(sigma(i, j) - sigma(j, i)) > 1e-9)
                    throw config_error("CalibrationModel: sigma must be symmetric");
                if (i != j && std::fabs(sigma(i, j)) >= 1.0 - 1e-12)
                    throw config_error("CalibrationModel: duplicated clusters (|corr| = 1)");
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8 * es.eigenvalues().maxCoeff())
            throw numeric_error("CalibrationModel: sigma not positive semidefinite");
    }
};

/// Tail estimate of P(max_i Gamma_i >= b) decomposed over which coordinate
/// attains the maximum; prob is the sum of the per-argmax terms. scan_prob
/// is the monitored statistic's exceedance (doubled under two-sided
/// scanning, capped at 1).
struct TailEstimate {
    double prob = 0.0;
    double rel_std_err = 0.0;
    long n_samples = 0;
    std::vector<double> per_term;
    double scan_prob = 0.0;
    bool low_confidence = false;
};

/// Same-time correlation of the self-normalized cluster statistics implied
/// by an information matrix over the union edges:
///   sigma_ij = (R_i R_j)^{-1/2} 1^T (I^i)^{-1/2} I^{ij} (I^j)^{-1/2} 1,
/// with the diagonal pinned to 1 by self-normalization.
inline CalibrationModel gamma_covariance(const FisherInfo& fisher, const ClusterSet& clusters,
                                         int w_over_delta = 20, bool two_sided = true) {
    const auto l = static_cast<Eigen::Index>(clusters.size());
    std::vector<Eigen::MatrixXd> isqrt;
    isqrt.reserve(clusters.size());
    for (const Cluster& c : clusters.clusters())
        isqrt.push_back(inverse_sqrt_psd(fisher.block(c.edges)));

    CalibrationModel cal;
    cal.w_over_delta = w_over_delta;
    cal.two_sided = two_sided;
    cal.sigma = Eigen::MatrixXd::Identity(l, l);
    for (Eigen::Index i = 0; i < l; ++i) {
        const Cluster& ci = clusters[static_cast<std::size_t>(i)];
        for (Eigen::Index j = i + 1; j < l; ++j) {
            const Cluster& cj = clusters[static_cast<std::size_t>(j)];
            const Eigen::MatrixXd cross = fisher.cross_block(ci.edges, cj.edges);
            const double ri = static_cast<double>(ci.edges.size());
            const double rj = static_cast<double>(cj.edges.size());
            const double v = (Eigen::VectorXd::Ones(cross.rows()).transpose() *
                              (isqrt[static_cast<std::size_t>(i)] * cross *
                               isqrt[static_cast<std::size_t>(j)]) *
                              Eigen::VectorXd::Ones(cross.cols()))(0) /
                             std::sqrt(ri * rj);
            cal.sigma(i, j) = v;
            cal.sigma(j, i) = v;
        }
    }
    return cal;
}

/// P(max_i Gamma_i >= b) via the argmax decomposition: the i-th term is the
/// orthant-type probability that coordinate i exceeds b while dominating all
/// others, estimated by sequential-conditioning importance sampling with n
/// samples per term.
inline TailEstimate tail_probability(const CalibrationModel& cal, double b, long n,
                                     std::uint64_t seed, double rel_err_cap = 0.05) {
    cal.validate();
    if (!(b > 0.0)) throw std::invalid_argument("tail_probability: b must be positive");
    const Eigen::Index l = cal.num_clusters();

    TailEstimate est;
    est.per_term.resize(static_cast<std::size_t>(l));
    double var_sum = 0.0;
    for (Eigen::Index i = 0; i < l; ++i) {
        // Y = B P_i Gamma: first row picks Gamma_i, the rest are the gaps
        // Gamma_i - Gamma_j; the event is Y >= (b, 0, ..., 0).
        Eigen::MatrixXd p = Eigen::MatrixXd::Identity(l, l);
        if (i != 0) {
            p(0, 0) = p(i, i) = 0.0;
            p(0, i) = p(i, 0) = 1.0;
        }
        Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(l, l);
        bmat.col(0).setOnes();
        for (Eigen::Index r = 1; r < l; ++r) bmat(r, r) = -1.0;
        const Eigen::MatrixXd cov = bmat * p * cal.sigma * p.transpose() * bmat.transpose();
        Eigen::VectorXd lower = Eigen::VectorXd::Zero(l);
        lower[0] = b;
        CounterRng rng(seed, static_cast<std::uint64_t>(i) + 1);
        const MvnTailEstimate term = mvn_lower_tail(cov, lower, n, rng);
        est.per_term[static_cast<std::size_t>(i)] = term.prob;
        est.prob += term.prob;
        var_sum += (term.rel_std_err * term.prob) * (term.rel_std_err * term.prob);
        est.n_samples += term.n_samples;
    }
    est.rel_std_err = est.prob > 0.0 ? std::sqrt(var_sum) / est.prob : 1.0;
    est.scan_prob = cal.two_sided ? std::min(1.0, 2.0 * est.prob) : est.prob;
    est.low_confidence = est.rel_std_err > rel_err_cap;
    return est;
}

/// Threshold with instantaneous scan exceedance alpha: bisection on b with
/// common random numbers across iterates.
inline double threshold_for_alpha(const CalibrationModel& cal, double alpha, long n = 50000,
                                  std::uint64_t seed = 1) {
    cal.validate();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("threshold_for_alpha: alpha in (0,1) required");
    double lo = 0.0, hi = 10.0;
    const double at_lo = tail_probability(cal, 1e-12, n, seed).scan_prob;
    if (alpha >= at_lo)
        throw std::invalid_argument("threshold_for_alpha: alpha unreachable (too large)");
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double p = tail_probability(cal, mid, n, seed).scan_prob;
        if (std::fabs(p - alpha) <= 1e-3 * alpha) return mid;
        (p > alpha ? lo : hi) = mid;
        if (hi - lo < 1e-7) break;
    }
    return 0.5 * (lo + hi);
}

/// Per-update alarm rate of the limiting Gaussian sequence. The sequence is
/// realized exactly as normalized moving sums of w/delta independent
/// increments with the same-time covariance, which reproduces the triangular
/// lag correlation. est1 is P(alarm within m updates)/m; est2 is the
/// single-update exceedance.
struct ArlRates {
    double lambda_est1 = 0.0;
    double lambda_est2 = 0.0;
    double rel_std_err_est1 = 0.0;
    bool flagged = false;
    TailEstimate tail;
};

namespace detail {

/// Max over a block of m consecutive moving-sum scan statistics, one sample
/// path per call.
class GaussianScanPath {
public:
    GaussianScanPath(const CalibrationModel& cal)
        : k_(cal.w_over_delta), two_sided_(cal.two_sided), dim_(cal.num_clusters()) {
        Eigen::LLT<Eigen::MatrixXd> llt(cal.sigma);
        if (llt.info() != Eigen::Success)
            throw numeric_error("gaussian surrogate: sigma not positive definite");
        chol_ = llt.matrixL();
        z_.resize(dim_);
    }

    double block_max(int m, CounterRng& rng) {
        const int total = m + k_ - 1;
        ring_.assign(static_cast<std::size_t>(k_) * dim_, 0.0);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
        const double norm = 1.0 / std::sqrt(static_cast<double>(k_));
        double best = -std::numeric_limits<double>::infinity();
        for (int t = 0; t < total; ++t) {
            for (Eigen::Index i = 0; i < dim_; ++i) z_[i] = rng.next_gauss();
            Eigen::VectorXd inc = chol_ * z_;
            const std::size_t slot = static_cast<std::size_t>(t % k_) * dim_;
            for (Eigen::Index i = 0; i < dim_; ++i) {
                sum[i] += inc[i] - ring_[slot + static_cast<std::size_t>(i)];
                ring_[slot + static_cast<std::size_t>(i)] = inc[i];
            }
            if (t >= k_ - 1) {
                const double stat =
                    two_sided_ ? sum.cwiseAbs().maxCoeff() * norm : sum.maxCoeff() * norm;
                best = std::max(best, stat);
            }
        }
        return best;
    }

private:
    int k_;
    bool two_sided_;
    Eigen::Index dim_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd z_;
    std::vector<double> ring_;
};

/// n independent block maxima, replicate s keyed by (seed, s).
inline std::vector<double> simulate_block_maxima(const CalibrationModel& cal, int m, long n,
                                                 std::uint64_t seed) {
    std::vector<double> maxima(static_cast<std::size_t>(n));
    const std::size_t chunks = 64;
    parallel_replicates(chunks, [&](std::size_t chunk) {
        GaussianScanPath path(cal);
        const auto total = static_cast<std::size_t>(n);
        for (std::size_t s = chunk; s < total; s += chunks) {
            CounterRng rng(seed, 0x70617468ULL + static_cast<std::uint64_t>(s));
            maxima[s] = path.block_max(m, rng);
        }
    });
    return maxima;
}

} // namespace detail

inline ArlRates arl_rate_estimate(const CalibrationModel& cal, double b, int m, double delta,
                                  long n, std::uint64_t seed) {
    cal.validate();
    if (m < 1) throw std::invalid_argument("arl_rate_estimate: m >= 1 required");
    if (!(delta > 0.0)) throw std::invalid_argument("arl_rate_estimate: delta must be positive");
    ArlRates out;
    out.tail = tail_probability(cal, b, n, seed);
    out.lambda_est2 = out.tail.scan_prob;
    if (m == 1) {
        // single-update block: the two bounds are the same quantity
        out.lambda_est1 = out.lambda_est2;
        out.rel_std_err_est1 = out.tail.rel_std_err;
        return out;
    }
    std::vector<double> maxima = detail::simulate_block_maxima(cal, m, n, seed);
    long hits = 0;
    for (double v : maxima)
        if (v > b) ++hits;
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    out.lambda_est1 = p / static_cast<double>(m);
    out.rel_std_err_est1 = hits > 0 ? std::sqrt((1.0 - p) / static_cast<double>(hits)) : 1.0;
    out.flagged = hits < 100;
    return out;
}

/// Thresholds matching a target average run length: the est1 route reads the
/// empirical quantile of simulated block maxima (common random numbers make
/// it deterministic given the seed); the est2 route bisects the
/// instantaneous exceedance.
struct ArlThresholds {
    double b_est1 = 0.0;
    double b_est2 = 0.0;
    double p_target = 0.0;
};

inline ArlThresholds threshold_for_arl(const CalibrationModel& cal, double target_arl, int m,
                                       double delta, long n = 200000, std::uint64_t seed = 1) {
    cal.validate();
    if (!(target_arl > delta))
        throw std::invalid_argument("threshold_for_arl: target must exceed the update interval");
    ArlThresholds out;
    out.p_target = static_cast<double>(m) * delta / target_arl;
    if (out.p_target >= 1.0)
        throw std::invalid_argument("threshold_for_arl: m too large for the target");
    if (out.p_target * static_cast<double>(n) < 100.0)
        throw std::invalid_argument("threshold_for_arl: sample budget too small for the target");

    std::vector<double> maxima = detail::simulate_block_maxima(cal, m, n, seed);
    std::sort(maxima.begin(), maxima.end());
    const auto rank = static_cast<std::size_t>(
        std::llround((1.0 - out.p_target) * static_cast<double>(n)));
    out.b_est1 = maxima[std::min(rank, maxima.size() - 1)];

    // est2: instantaneous exceedance equal to delta / target.
    const double lambda_target = delta / target_arl;
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double p = tail_probability(cal, mid, n / 4 + 1, seed).scan_prob;
        if (std::fabs(p - lambda_target) <= 1e-3 * lambda_target) {
            lo = hi = mid;
            break;
        }
        (p > lambda_target ? lo : hi) = mid;
        if (hi - lo < 1e-7) break;
    }
    out.b_est2 = 0.5 * (lo + hi);
    return out;
}

/// Estimated false discovery rate after an alarm with kappa discoveries:
/// rho / (kappa + 1) with rho = 2 L Phi_bar(b), the expected number of null
/// clusters whose standard-normal statistic exceeds b in absolute value.
inline double fdr_estimate(int kappa, double b, int l) {
    if (kappa < 0) throw std::invalid_argument("fdr_estimate: kappa must be nonnegative");
    if (!(b > 0.0)) throw std::invalid_argument("fdr_estimate: b must be positive");
    if (l < 1) throw std::invalid_argument("fdr_estimate: L must be positive");
    const double rho = 2.0 * static_cast<double>(l) * normal_tail(b);
    return rho / static_cast<double>(kappa + 1);
}

/// Smallest window length at which the cluster statistic's post-change mean
/// reaches the threshold: Monte Carlo estimate of E(Gamma_w) under the
/// post-change model on a doubling grid, then bisection. Returns nullopt when
/// the change produces no drift on the cluster (no finite window).
inline std::optional<double> min_window_for_power(const HawkesModel& pre, const HawkesModel& post,
                                                  const Cluster& cluster, const FisherInfo& fisher,
                                                  double b, int n, std::uint64_t seed,
                                                  double w_cap = 8192.0) {
    pre.validate();
    post.validate();
    if (!(b > 0.0)) throw std::invalid_argument("min_window_for_power: b must be positive");
    const Eigen::MatrixXd isqrt = inverse_sqrt_psd(fisher.block(cluster.edges));
    const double burn = 30.0 / post.beta;

    auto mean_gamma = [&](double w) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            const EventStream stream =
                simulate(post, burn + w, seed * 1000003ULL + static_cast<std::uint64_t>(k));
            ScoreState state(pre, cluster.edges, {});
            std::size_t i = 0;
            while (i < stream.events.size() && stream.events[i].time < burn)
                state.ingest_event(stream.events[i++]);
            const Eigen::VectorXd s0 = state.cumulative_score(burn);
            while (i < stream.events.size()) state.ingest_event(stream.events[i++]);
            const Eigen::VectorXd s1 = state.cumulative_score(burn + w);
            acc += (isqrt * (s1 - s0)).sum() /
                   std::sqrt(w * static_cast<double>(cluster.edges.size()));
        }
        return acc / static_cast<double>(n);
    };

    double w = 1.0;
    while (std::fabs(mean_gamma(w)) < b) {
        w *= 2.0;
        if (w > w_cap) return std::nullopt;
    }
    double lo = w / 2.0, hi = w;
    if (w == 1.0) lo = 0.0;
    while (hi - lo > std::max(0.125, 0.01 * hi)) {
        const double mid = 0.5 * (lo + hi);
        (std::fabs(mean_gamma(mid)) >= b ? hi : lo) = mid;
    }
    return hi;
}

} // namespace hawkscan
