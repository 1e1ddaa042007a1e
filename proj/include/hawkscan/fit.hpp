#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hawkscan/model.hpp"

namespace hawkscan {

struct FitOptions {
    double grad_tol = 1e-6;       // projected-gradient infinity norm
    int max_iters = 500;
    double mu_floor = 1e-6;
    double ridge = 1e-10;         // regularizer for the Newton solve only
};

struct FitResult {
    HawkesModel model;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;
    double loglik = 0.0;
};

namespace detail {

/// Per-target-node likelihood pieces. The log-likelihood separates across
/// target nodes, so each column of A is fitted together with its mu entry as
/// an independent concave problem.
struct TargetData {
    // rows: events at this node; cols: decayed source sums R_p(t_k)
    Eigen::MatrixXd excite;
    double horizon = 0.0;
};

inline double target_loglik(const TargetData& td, const Eigen::VectorXd& comp_gain,
                            double mu, const Eigen::VectorXd& a) {
    double f = -mu * td.horizon + a.dot(comp_gain);
    for (Eigen::Index k = 0; k < td.excite.rows(); ++k) {
        const double lambda = mu + td.excite.row(k).dot(a);
        if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
        f += std::log(lambda);
    }
    return f;
}

} // namespace detail

/// Maximum-likelihood fit of (mu, A) with the decay rate held fixed.
/// Damped Newton ascent with projection onto mu >= mu_floor, A >= 0;
/// the log-likelihood is concave in (mu, A), so accepted steps are monotone.
inline FitResult fit_mle(const EventStream& stream, double beta, const HawkesModel& init,
                         const FitOptions& opts = {}) {
    if (!(beta > 0.0)) throw std::invalid_argument("fit_mle: beta must be positive");
    const int m = init.num_nodes();
    stream.validate(m);
    const double t_end = stream.horizon;

    // One pass: R_p(t_k) for every event, plus the per-source compensator
    // slope D_p = (1/beta) sum_{k at p} (e^{-beta(T-t_k)} - 1).
    Eigen::VectorXd decayed = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd comp_gain = Eigen::VectorXd::Zero(m);
    std::vector<std::vector<Eigen::VectorXd>> rows(m);
    double last = 0.0;
    for (const Event& e : stream.events) {
        if (e.time > last) {
            decayed *= std::exp(-beta * (e.time - last));
            last = e.time;
        }
        rows[e.node].push_back(decayed);
        comp_gain[e.node] += (std::exp(-beta * (t_end - e.time)) - 1.0) / beta;
        decayed[e.node] += 1.0;
    }

    FitResult res;
    res.model.beta = beta;
    res.model.mu = init.mu;
    res.model.A = init.A;
    res.converged = true;

    for (int q = 0; q < m; ++q) {
        detail::TargetData td;
        td.horizon = t_end;
        td.excite.resize(static_cast<Eigen::Index>(rows[q].size()), m);
        for (std::size_t k = 0; k < rows[q].size(); ++k) td.excite.row(static_cast<Eigen::Index>(k)) = rows[q][k];

        // x = (mu_q, A(., q))
        Eigen::VectorXd x(m + 1);
        x[0] = std::max(init.mu[q], opts.mu_floor);
        x.tail(m) = init.A.col(q).cwiseMax(0.0);
        double f = detail::target_loglik(td, comp_gain, x[0], x.tail(m));

        int it = 0;
        bool ok = false;
        double pg_norm = 0.0;
        for (; it <= opts.max_iters; ++it) {
            // Gradient and curvature at x.
            Eigen::VectorXd g(m + 1);
            g[0] = -t_end;
            g.tail(m) = comp_gain;
            Eigen::MatrixXd curv = Eigen::MatrixXd::Zero(m + 1, m + 1);
            Eigen::VectorXd v(m + 1);
            for (Eigen::Index k = 0; k < td.excite.rows(); ++k) {
                const double lambda = x[0] + td.excite.row(k).dot(x.tail(m));
                v[0] = 1.0;
                v.tail(m) = td.excite.row(k);
                g += v / lambda;
                curv.selfadjointView<Eigen::Lower>().rankUpdate(v, 1.0 / (lambda * lambda));
            }

            // Projected gradient: at an active lower bound only outward ascent counts.
            pg_norm = 0.0;
            for (int i = 0; i <= m; ++i) {
                const double lb = (i == 0) ? opts.mu_floor : 0.0;
                const double gi = (x[i] <= lb && g[i] < 0.0) ? 0.0 : g[i];
                pg_norm = std::max(pg_norm, std::fabs(gi));
            }
            if (pg_norm < opts.grad_tol) { ok = true; break; }

            curv.diagonal().array() += opts.ridge;
            Eigen::VectorXd dir = curv.selfadjointView<Eigen::Lower>().ldlt().solve(g);
            if (!dir.allFinite() || g.dot(dir) <= 0.0) dir = g; // fall back to gradient ascent

            // Backtracking on the projected step.
            double step = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                Eigen::VectorXd xn = x + step * dir;
                xn[0] = std::max(xn[0], opts.mu_floor);
                xn.tail(m) = xn.tail(m).cwiseMax(0.0);
                const double fn = detail::target_loglik(td, comp_gain, xn[0], xn.tail(m));
                if (fn > f + 1e-4 * g.dot(xn - x) || (fn >= f && (xn - x).norm() > 0.0)) {
                    x = xn;
                    f = std::max(f, fn);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                // Near the optimum the per-step gain falls below the floating
                // point resolution of the likelihood; a full Newton step that
                // is tiny and does not measurably hurt is still progress.
                Eigen::VectorXd xn = x + dir;
                xn[0] = std::max(xn[0], opts.mu_floor);
                xn.tail(m) = xn.tail(m).cwiseMax(0.0);
                const double fn = detail::target_loglik(td, comp_gain, xn[0], xn.tail(m));
                const double scale = 1.0 + x.cwiseAbs().maxCoeff();
                if ((xn - x).cwiseAbs().maxCoeff() <= 1e-6 * scale &&
                    fn >= f - 1e-9 * (std::fabs(f) + 1.0)) {
                    x = xn;
                    f = std::max(f, fn);
                } else {
                    break; // no ascent at line-search resolution
                }
            }
        }
        res.model.mu[q] = x[0];
        res.model.A.col(q) = x.tail(m);
        res.iterations = std::max(res.iterations, it);
        res.grad_norm = std::max(res.grad_norm, pg_norm);
        res.converged = res.converged && ok;
        res.loglik += f;
    }
    return res;
}

} // namespace hawkscan
