#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hawkscan/common.hpp"

namespace hawkscan {

/// One observed event: occurrence time and node index.
struct Event {
    double time = 0.0;
    int node = 0;
};

/// Time-ordered marked point pattern on [0, horizon].
/// Times are strictly increasing; node indices are 0-based.
struct EventStream {
    std::vector<Event> events;
    double horizon = 0.0;

    std::size_t size() const { return events.size(); }

    void validate(int num_nodes) const {
        if (horizon < 0.0) throw std::invalid_argument("EventStream: negative horizon");
        double prev = -1.0;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const Event& e = events[i];
            if (!(e.time > prev))
                throw std::invalid_argument("EventStream: times not strictly increasing at index " +
                                            std::to_string(i));
            if (e.time > horizon)
                throw std::invalid_argument("EventStream: event after horizon at index " +
                                            std::to_string(i));
            if (e.node < 0 || e.node >= num_nodes)
                throw std::invalid_argument("EventStream: node index out of range at index " +
                                            std::to_string(i));
            prev = e.time;
        }
    }
};

/// Spectral norm (largest singular value) by power iteration on A^T A.
inline double spectral_norm(const Eigen::MatrixXd& a, double tol = 1e-8, int max_iters = 1000) {
    if (a.size() == 0) return 0.0;
    const Eigen::MatrixXd ata = a.transpose() * a;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols());
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd w = ata * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        w /= norm;
        const double lambda_new = w.dot(ata * w);
        if (std::fabs(lambda_new - lambda) <= tol * std::max(1.0, std::fabs(lambda_new))) {
            lambda = lambda_new;
            break;
        }
        lambda = lambda_new;
        v = w;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

/// Spectral radius of a nonnegative matrix by power iteration. The geometric
/// mean of consecutive step norms damps period-two oscillation of imprimitive
/// matrices.
inline double spectral_radius(const Eigen::MatrixXd& a, double tol = 1e-8, int max_iters = 1000) {
    if (a.size() == 0) return 0.0;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols());
    v /= v.norm();
    double lambda = 0.0;
    double prev_norm = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd w = a * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        w /= norm;
        const double lambda_new = it > 0 ? std::sqrt(norm * prev_norm) : norm;
        prev_norm = norm;
        if (it > 0 && std::fabs(lambda_new - lambda) <= tol * std::max(1.0, std::fabs(lambda_new))) {
            lambda = lambda_new;
            break;
        }
        lambda = lambda_new;
        v = w;
    }
    return lambda;
}

/// Multivariate self-exciting process with exponential decay kernel.
/// mu[m] is the base rate of node m; A(i,j) scales the excitation an event at
/// node i adds to node j's intensity; beta is the shared decay rate.
struct HawkesModel {
    Eigen::VectorXd mu;
    Eigen::MatrixXd A;
    double beta = 1.0;

    int num_nodes() const { return static_cast<int>(mu.size()); }

    bool is_poisson() const { return A.size() == 0 || A.isZero(0.0); }

    void validate() const {
        const int m = num_nodes();
        if (m == 0) throw std::invalid_argument("HawkesModel: empty mu");
        if (A.rows() != m || A.cols() != m)
            throw std::invalid_argument("HawkesModel: A must be MxM");
        if (!(beta > 0.0)) throw std::invalid_argument("HawkesModel: beta must be positive");
        for (int i = 0; i < m; ++i) {
            if (!(mu[i] > 0.0)) throw std::invalid_argument("HawkesModel: mu must be positive");
            for (int j = 0; j < m; ++j)
                if (A(i, j) < 0.0) throw std::invalid_argument("HawkesModel: A must be nonnegative");
        }
        // Subcriticality: the branching matrix A/beta must be spectrally
        // strictly inside the unit disc, or the process explodes.
        if (spectral_radius(A) / beta >= 1.0)
            throw std::invalid_argument(
                "HawkesModel: spectral radius of A/beta must be < 1 (explosive)");
    }

    /// Long-run event rate per node, solving r = mu + (A^T / beta) r.
    Eigen::VectorXd stationary_rate() const {
        const int m = num_nodes();
        const Eigen::MatrixXd sys =
            Eigen::MatrixXd::Identity(m, m) - A.transpose() / beta;
        return sys.partialPivLu().solve(mu);
    }
};

/// Shift of the influence matrix at time tau_star: same base rates and decay,
/// different A. After the change the excitation history restarts, so events
/// before tau_star no longer excite.
struct ChangeScenario {
    HawkesModel pre;
    HawkesModel post;
    double tau_star = 0.0;

    void validate() const {
        pre.validate();
        post.validate();
        if (pre.num_nodes() != post.num_nodes())
            throw std::invalid_argument("ChangeScenario: node count mismatch");
        if (pre.mu != post.mu)
            throw std::invalid_argument("ChangeScenario: mu must match across the change");
        if (pre.beta != post.beta)
            throw std::invalid_argument("ChangeScenario: beta must match across the change");
        if (!(tau_star >= 0.0))
            throw std::invalid_argument("ChangeScenario: tau_star must be nonnegative");
    }
};

/// Conditional intensity of `node` at time t given the strict past (events
/// with time < t).
inline double intensity(const HawkesModel& model, const EventStream& stream, int node, double t) {
    const int m = model.num_nodes();
    if (node < 0 || node >= m) throw std::invalid_argument("intensity: node out of range");
    double acc = model.mu[node];
    for (const Event& e : stream.events) {
        if (e.time >= t) break;
        acc += model.A(e.node, node) * std::exp(-model.beta * (t - e.time));
    }
    return acc;
}

/// Log-likelihood of the stream on [0, horizon] under the model:
/// sum of log intensities at events, minus the compensator.
inline double log_likelihood(const HawkesModel& model, const EventStream& stream) {
    const int m = model.num_nodes();
    stream.validate(m);
    const double beta = model.beta;
    const double t_end = stream.horizon;

    // decayed[p] = sum over prior events at p of exp(-beta*(t - t_i))
    Eigen::VectorXd decayed = Eigen::VectorXd::Zero(m);
    double last = 0.0;
    double loglik = -model.mu.sum() * t_end;
    const bool poisson = model.is_poisson();

    for (const Event& e : stream.events) {
        if (e.time > last) {
            decayed *= std::exp(-beta * (e.time - last));
            last = e.time;
        }
        double lambda = model.mu[e.node];
        if (!poisson) lambda += model.A.col(e.node).dot(decayed);
        if (!(lambda > 0.0))
            throw numeric_error("log_likelihood: zero intensity at an observed event");
        loglik += std::log(lambda);
        decayed[e.node] += 1.0;
    }
    if (!poisson) {
        // Excitation compensator: (1/beta) * sum_k alpha_{u_k,m} (e^{-beta(T-t_k)} - 1)
        Eigen::VectorXd tail = Eigen::VectorXd::Zero(m);   // sum of e^{-beta(T-t_k)} per source
        Eigen::VectorXd count = Eigen::VectorXd::Zero(m);  // event count per source
        for (const Event& e : stream.events) {
            tail[e.node] += std::exp(-beta * (t_end - e.time));
            count[e.node] += 1.0;
        }
        loglik += (model.A * Eigen::VectorXd::Ones(m)).dot(tail - count) / beta;
    }
    return loglik;
}

} // namespace hawkscan
