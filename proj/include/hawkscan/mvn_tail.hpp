#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hawkscan/common.hpp"
#include "hawkscan/normal.hpp"
#include "hawkscan/rng.hpp"

namespace hawkscan {

struct MvnTailEstimate {
    double prob = 0.0;
    double rel_std_err = 0.0;
    long n_samples = 0;
};

namespace detail {

/// Cholesky factorization of C with greedy constraint ordering: at each step
/// the remaining coordinate with the smallest conditional non-truncation
/// probability (evaluated at truncated conditional means) is pivoted next.
/// Returns the permuted lower bounds alongside the factor.
struct OrderedCholesky {
    Eigen::MatrixXd L;
    Eigen::VectorXd lower;
};

inline OrderedCholesky ordered_cholesky(Eigen::MatrixXd c, Eigen::VectorXd lower) {
    const Eigen::Index d = c.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd tmean = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::Index best = -1;
        double best_p = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = j; i < d; ++i) {
            double s = c(i, i) - l.row(i).head(j).squaredNorm();
            s = std::max(s, 1e-300);
            const double cond = (lower[i] - l.row(i).head(j).dot(tmean.head(j))) / std::sqrt(s);
            const double p = normal_tail(cond);
            if (p < best_p) {
                best_p = p;
                best = i;
            }
        }
        if (best != j) {
            c.row(j).swap(c.row(best));
            c.col(j).swap(c.col(best));
            l.row(j).swap(l.row(best));
            std::swap(lower[j], lower[best]);
        }
        double s = c(j, j) - l.row(j).head(j).squaredNorm();
        if (s <= 0.0) {
            if (s < -1e-8 * std::max(1.0, c(j, j)))
                throw numeric_error("mvn tail: covariance not positive definite");
            s = 1e-300;
        }
        l(j, j) = std::sqrt(s);
        for (Eigen::Index i = j + 1; i < d; ++i)
            l(i, j) = (c(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
        const double cond = (lower[j] - l.row(j).head(j).dot(tmean.head(j))) / l(j, j);
        const double mass = normal_tail(cond);
        tmean[j] = mass > 0.0 ? normal_pdf(cond) / mass : cond;
    }
    return {std::move(l), std::move(lower)};
}

} // namespace detail

/// Estimate P(Y >= lower) for Y ~ N(0, C) by sequential conditional sampling:
/// coordinates are drawn from their exact truncated conditionals in a greedy
/// difficulty order and the product of conditional tail masses is averaged.
/// Unbiased; the returned relative standard error is the estimator's own.
inline MvnTailEstimate mvn_lower_tail(const Eigen::MatrixXd& c, const Eigen::VectorXd& lower,
                                      long n, CounterRng& rng) {
    if (c.rows() != c.cols() || c.rows() != lower.size())
        throw std::invalid_argument("mvn_lower_tail: dimension mismatch");
    if (n < 1) throw std::invalid_argument("mvn_lower_tail: need n >= 1");
    const Eigen::Index d = c.rows();
    const auto [l, a] = detail::ordered_cholesky(c, lower);

    double sum = 0.0, sum_sq = 0.0;
    Eigen::VectorXd z(d);
    for (long s = 0; s < n; ++s) {
        double weight = 1.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double low = (a[j] - l.row(j).head(j).dot(z.head(j))) / l(j, j);
            const double mass = normal_tail(low);
            weight *= mass;
            if (weight <= 0.0) { weight = 0.0; break; }
            z[j] = truncated_normal_lower(low, rng.next_open());
        }
        sum += weight;
        sum_sq += weight * weight;
    }
    MvnTailEstimate est;
    est.n_samples = n;
    est.prob = sum / static_cast<double>(n);
    if (est.prob > 0.0 && n > 1) {
        const double var = std::max(0.0, sum_sq / n - est.prob * est.prob) / (n - 1.0);
        est.rel_std_err = std::sqrt(var) / est.prob;
    } else {
        est.rel_std_err = est.prob > 0.0 ? 0.0 : 1.0;
    }
    return est;
}

/// Brute-force check of the same tail: fraction of direct N(0, Sigma) draws
/// whose (signed or absolute) maximum exceeds b.
inline double mc_max_exceedance(const Eigen::MatrixXd& sigma, double b, long n,
                                std::uint64_t seed, bool absolute) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw numeric_error("mc_max_exceedance: covariance not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    const Eigen::Index d = sigma.rows();
    CounterRng rng(seed, 0x6d63u);
    Eigen::VectorXd z(d);
    long hits = 0;
    for (long s = 0; s < n; ++s) {
        for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.next_gauss();
        const Eigen::VectorXd y = l * z;
        const double stat = absolute ? y.cwiseAbs().maxCoeff() : y.maxCoeff();
        if (stat > b) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

} // namespace hawkscan
