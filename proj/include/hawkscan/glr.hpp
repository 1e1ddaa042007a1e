#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "hawkscan/clusters.hpp"
#include "hawkscan/edges.hpp"
#include "hawkscan/model.hpp"
#include "hawkscan/scan.hpp"

namespace hawkscan {

struct GlrOptions {
    int em_iters = 30;
    double loglik_rel_tol = 1e-6;
    double mu_floor = 1e-6;
    bool free_mu = false; // estimate mu at the scope's target nodes
};

struct EmFit {
    Eigen::VectorXd mu_hat;
    Eigen::MatrixXd A_hat; // full matrix; entries outside scope pinned to the reference
    double loglik = 0.0;
    int iters = 0;
    bool converged = false;
    bool degenerate = false; // empty window
};

namespace detail {

/// Decayed source counts and compensator slopes for one window, shared by
/// every scope evaluated on it. Event times are relative to the window start.
struct WindowData {
    std::vector<Event> events;
    Eigen::MatrixXd excite;      // per event: R_p(t_k) for all sources p
    Eigen::VectorXd comp_decay;  // per source: (1/beta) sum_k (1 - e^{-beta(T-t_k)})
    double length = 0.0;
};

inline WindowData build_window(const std::vector<Event>& events, double start, double length,
                               int m, double beta) {
    WindowData wd;
    wd.length = length;
    wd.comp_decay = Eigen::VectorXd::Zero(m);
    wd.events.reserve(events.size());
    for (const Event& e : events) wd.events.push_back(Event{e.time - start, e.node});
    wd.excite.resize(static_cast<Eigen::Index>(wd.events.size()), m);
    Eigen::VectorXd decayed = Eigen::VectorXd::Zero(m);
    double last = 0.0;
    for (std::size_t k = 0; k < wd.events.size(); ++k) {
        const Event& e = wd.events[k];
        if (e.time > last) {
            decayed *= std::exp(-beta * (e.time - last));
            last = e.time;
        }
        wd.excite.row(static_cast<Eigen::Index>(k)) = decayed;
        wd.comp_decay[e.node] += (1.0 - std::exp(-beta * (length - e.time))) / beta;
        decayed[e.node] += 1.0;
    }
    return wd;
}

/// Window log-likelihood with excitation restarted at the window start.
inline double window_loglik(const WindowData& wd, const Eigen::VectorXd& mu,
                            const Eigen::MatrixXd& a) {
    double f = -mu.sum() * wd.length;
    for (std::size_t k = 0; k < wd.events.size(); ++k) {
        const int q = wd.events[k].node;
        const double lambda =
            mu[q] + wd.excite.row(static_cast<Eigen::Index>(k)).dot(a.col(q));
        if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
        f += std::log(lambda);
    }
    f -= (a.array().colwise() * wd.comp_decay.array()).sum();
    return f;
}

/// Static structure of one scope against a reference model: target nodes,
/// per-target free sources, and whether any pinned influence feeds a target.
struct ScopePlan {
    std::vector<int> targets;                       // unique, ascending
    std::vector<int> target_of_node;                // node -> index in targets, or -1
    std::vector<std::vector<int>> sources;          // per target: free source nodes
    bool pinned_into_targets = false;

    ScopePlan(const EdgeSet& scope, const HawkesModel& model0) {
        const int m = model0.num_nodes();
        scope.check_in_range(m);
        target_of_node.assign(static_cast<std::size_t>(m), -1);
        for (const auto& [p, q] : scope.edges()) {
            if (target_of_node[static_cast<std::size_t>(q)] < 0) {
                target_of_node[static_cast<std::size_t>(q)] = static_cast<int>(targets.size());
                targets.push_back(q);
                sources.emplace_back();
            }
            sources[static_cast<std::size_t>(target_of_node[static_cast<std::size_t>(q)])]
                .push_back(p);
        }
        for (int q : targets)
            for (int p = 0; p < m; ++p)
                if (model0.A(p, q) > 0.0 && !scope.contains(p, q)) pinned_into_targets = true;
    }
};

/// EM restricted to the events at the scope's target nodes. Events elsewhere
/// contribute likelihood terms that are identical under the fitted and
/// reference parameters, so they enter only through the additive constant
/// needed to report the full window likelihood.
inline EmFit em_fit_window(const WindowData& wd, const HawkesModel& model0,
                           const EdgeSet& scope, const ScopePlan& plan, const GlrOptions& opts,
                           const Eigen::MatrixXd* warm_a, const Eigen::VectorXd* warm_mu,
                           double* stat_out, const double* full_null_hint = nullptr) {
    const int m = model0.num_nodes();
    const auto n_targets = plan.targets.size();

    EmFit fit;
    fit.mu_hat = model0.mu;
    fit.A_hat = model0.A;
    if (wd.events.empty()) {
        if (opts.free_mu) fit.mu_hat.setConstant(opts.mu_floor);
        for (const auto& [p, q] : scope.edges()) fit.A_hat(p, q) = 0.0;
        fit.degenerate = true;
        fit.converged = true;
        fit.loglik = -fit.mu_hat.sum() * wd.length;
        if (stat_out != nullptr)
            *stat_out = std::max(0.0, fit.loglik - (-model0.mu.sum() * wd.length));
        return fit;
    }

    // Zero is a fixed point of the update map, so free influence entries
    // start strictly positive (or at the warm value, floored away from zero).
    for (const auto& [p, q] : scope.edges())
        fit.A_hat(p, q) =
            warm_a != nullptr ? std::max((*warm_a)(p, q), 1e-2) : std::max(fit.A_hat(p, q), 0.1);
    if (warm_mu != nullptr && opts.free_mu)
        for (int q : plan.targets) fit.mu_hat[q] = std::max((*warm_mu)[q], opts.mu_floor);

    // Events at target nodes, with the pinned excitation precomputed.
    std::vector<int> subset;
    subset.reserve(wd.events.size());
    for (std::size_t k = 0; k < wd.events.size(); ++k)
        if (plan.target_of_node[static_cast<std::size_t>(wd.events[k].node)] >= 0)
            subset.push_back(static_cast<int>(k));
    Eigen::VectorXd pinned = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(subset.size()));
    if (plan.pinned_into_targets) {
        for (std::size_t s = 0; s < subset.size(); ++s) {
            const int k = subset[s];
            const int q = wd.events[static_cast<std::size_t>(k)].node;
            double acc = 0.0;
            for (int p = 0; p < m; ++p)
                if (!scope.contains(p, q)) acc += model0.A(p, q) * wd.excite(k, p);
            pinned[static_cast<Eigen::Index>(s)] = acc;
        }
    }

    // Partial likelihood over the restricted terms; differs from the full
    // window likelihood by a parameter-independent constant.
    auto partial_loglik = [&](const Eigen::VectorXd& mu, const Eigen::MatrixXd& a) {
        double f = 0.0;
        for (std::size_t s = 0; s < subset.size(); ++s) {
            const int k = subset[s];
            const int q = wd.events[static_cast<std::size_t>(k)].node;
            const auto t = static_cast<std::size_t>(plan.target_of_node[static_cast<std::size_t>(q)]);
            double lambda = mu[q] + pinned[static_cast<Eigen::Index>(s)];
            for (int p : plan.sources[t]) lambda += a(p, q) * wd.excite(k, p);
            if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
            f += std::log(lambda);
        }
        for (std::size_t t = 0; t < n_targets; ++t) {
            const int q = plan.targets[t];
            f -= mu[q] * wd.length;
            for (int p : plan.sources[t]) f -= a(p, q) * wd.comp_decay[p];
        }
        return f;
    };

    const double null_partial = partial_loglik(model0.mu, model0.A);
    double prev = partial_loglik(fit.mu_hat, fit.A_hat);
    double best = prev;
    for (int it = 1; it <= opts.em_iters; ++it) {
        Eigen::VectorXd background = Eigen::VectorXd::Zero(m);
        Eigen::MatrixXd triggered = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t s = 0; s < subset.size(); ++s) {
            const int k = subset[s];
            const int q = wd.events[static_cast<std::size_t>(k)].node;
            const auto t = static_cast<std::size_t>(plan.target_of_node[static_cast<std::size_t>(q)]);
            double lambda = fit.mu_hat[q] + pinned[static_cast<Eigen::Index>(s)];
            for (int p : plan.sources[t]) lambda += fit.A_hat(p, q) * wd.excite(k, p);
            if (!(lambda > 0.0)) continue;
            if (opts.free_mu) background[q] += fit.mu_hat[q] / lambda;
            for (int p : plan.sources[t])
                triggered(p, q) += fit.A_hat(p, q) * wd.excite(k, p) / lambda;
        }
        if (opts.free_mu)
            for (int q : plan.targets)
                fit.mu_hat[q] = std::max(background[q] / wd.length, opts.mu_floor);
        for (const auto& [p, q] : scope.edges())
            fit.A_hat(p, q) = wd.comp_decay[p] > 0.0 ? triggered(p, q) / wd.comp_decay[p] : 0.0;

        const double cur = partial_loglik(fit.mu_hat, fit.A_hat);
        fit.iters = it;
        best = std::max(best, cur);
        if (cur - prev <= opts.loglik_rel_tol * (std::fabs(prev) + 1.0)) {
            fit.converged = true;
            break;
        }
        prev = cur;
    }
    // Report the full window likelihood: add back the constant terms.
    const double full_null =
        full_null_hint != nullptr ? *full_null_hint : window_loglik(wd, model0.mu, model0.A);
    const double constant = full_null - null_partial;
    fit.loglik = best + constant;
    if (stat_out != nullptr) *stat_out = std::max(0.0, best - null_partial);
    return fit;
}

} // namespace detail

/// Branching-structure EM for the post-change parameters on one window.
/// Each event's intensity mass is split between its background rate and the
/// decayed excitation of earlier events; the M-step renormalizes. Influence
/// entries outside `scope` stay pinned to the reference model. With free_mu,
/// base rates are re-estimated at the scope's target nodes (rates elsewhere
/// cancel in likelihood ratios, so they stay pinned). The window likelihood
/// is monotone over iterations.
inline EmFit em_fit(const EventStream& window_events, const HawkesModel& model0,
                    const EdgeSet& scope, const GlrOptions& opts = {},
                    const Eigen::MatrixXd* warm_a = nullptr,
                    const Eigen::VectorXd* warm_mu = nullptr) {
    const detail::WindowData wd = detail::build_window(
        window_events.events, 0.0, window_events.horizon, model0.num_nodes(), model0.beta);
    const detail::ScopePlan plan(scope, model0);
    return detail::em_fit_window(wd, model0, scope, plan, opts, warm_a, warm_mu, nullptr);
}

/// Windowed generalized likelihood ratio configuration. The statistic is the
/// fitted window likelihood minus the reference-model window likelihood, both
/// with excitation restarted at the window start.
struct GlrConfig {
    double window = 200.0;
    double eval_interval = 10.0;
    EdgeSet edge_scope;
    GlrOptions em;
    double threshold = std::numeric_limits<double>::infinity();
    bool warm_start = true;

    void validate() const {
        if (!(window > 0.0) || !(eval_interval > 0.0) || eval_interval > window)
            throw config_error("GlrConfig: need 0 < eval_interval <= window");
    }
};

/// Nonnegative by construction: the reference point is feasible under the
/// alternative, and a warm-started fit that lands below it is discarded.
inline double glr_stat(const EventStream& window_events, const HawkesModel& model0,
                       const GlrConfig& cfg, const EmFit* warm = nullptr,
                       EmFit* fit_out = nullptr) {
    if (cfg.edge_scope.empty()) throw config_error("glr_stat: empty edge scope");
    const detail::WindowData wd = detail::build_window(
        window_events.events, 0.0, window_events.horizon, model0.num_nodes(), model0.beta);
    const detail::ScopePlan plan(cfg.edge_scope, model0);
    double stat = 0.0;
    EmFit fit = detail::em_fit_window(wd, model0, cfg.edge_scope, plan, cfg.em,
                                      warm != nullptr ? &warm->A_hat : nullptr,
                                      warm != nullptr ? &warm->mu_hat : nullptr, &stat);
    if (fit_out != nullptr) *fit_out = std::move(fit);
    return stat;
}

/// Sliding-window GLR monitor. With clusters supplied, evaluates the
/// statistic per cluster (scope restricted to that cluster's edges) and scans
/// the maximum; otherwise uses cfg.edge_scope as a single scope.
inline DetectionResult run_glr_monitor(const EventStream& stream, const HawkesModel& model0,
                                       const GlrConfig& cfg,
                                       const ClusterSet* clusters = nullptr,
                                       bool keep_trajectory = true) {
    cfg.validate();
    model0.validate();

    std::vector<EdgeSet> scopes;
    if (clusters != nullptr)
        for (const Cluster& c : clusters->clusters()) scopes.push_back(c.edges);
    else
        scopes.push_back(cfg.edge_scope);
    if (scopes.size() == 1 && scopes.front().empty())
        throw config_error("run_glr_monitor: empty edge scope");
    std::vector<detail::ScopePlan> plans;
    plans.reserve(scopes.size());
    for (const EdgeSet& s : scopes) plans.emplace_back(s, model0);
    const auto n_scopes = scopes.size();
    std::vector<std::optional<EmFit>> warm(n_scopes);

    DetectionResult res;
    std::size_t lo = 0, hi = 0;
    const auto n_events = stream.events.size();
    std::vector<Event> window_events;
    long step = 0;
    for (;;) {
        ++step;
        const double t = static_cast<double>(step) * cfg.eval_interval;
        if (t > stream.horizon + 1e-12) break;
        if (t + 1e-12 < cfg.window) continue;
        const double start = t - cfg.window;
        while (lo < n_events && stream.events[lo].time <= start) ++lo;
        if (hi < lo) hi = lo;
        while (hi < n_events && stream.events[hi].time < t) ++hi;
        window_events.assign(stream.events.begin() + static_cast<long>(lo),
                             stream.events.begin() + static_cast<long>(hi));

        const detail::WindowData wd = detail::build_window(window_events, start, cfg.window,
                                                           model0.num_nodes(), model0.beta);
        const double full_null = detail::window_loglik(wd, model0.mu, model0.A);
        GammaSnapshot snap;
        snap.t = t;
        snap.per_cluster.resize(static_cast<Eigen::Index>(n_scopes));
        for (std::size_t c = 0; c < n_scopes; ++c) {
            double stat = 0.0;
            const bool use_warm = cfg.warm_start && warm[c].has_value();
            EmFit fit = detail::em_fit_window(wd, model0, scopes[c], plans[c], cfg.em,
                                              use_warm ? &warm[c]->A_hat : nullptr,
                                              use_warm ? &warm[c]->mu_hat : nullptr, &stat,
                                              &full_null);
            snap.per_cluster[static_cast<Eigen::Index>(c)] = stat;
            if (cfg.warm_start) warm[c] = std::move(fit);
        }
        snap.max_abs = snap.per_cluster.maxCoeff();
        const bool alarm = snap.max_abs > cfg.threshold;
        if (keep_trajectory || alarm) res.trajectory.push_back(snap);
        if (alarm) {
            res.stopped = true;
            res.stop_time = t;
            for (Eigen::Index i = 0; i < snap.per_cluster.size(); ++i)
                if (snap.per_cluster[i] > cfg.threshold)
                    res.flagged_clusters.push_back(static_cast<int>(i));
            break;
        }
    }
    return res;
}

} // namespace hawkscan
