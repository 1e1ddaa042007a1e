#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hawkscan/calibration.hpp"
#include "hawkscan/fixtures.hpp"
#include "hawkscan/glr.hpp"
#include "hawkscan/io.hpp"
#include "hawkscan/parallel.hpp"
#include "hawkscan/scan.hpp"
#include "hawkscan/simulate.hpp"

namespace hawkscan {

namespace detail {

/// Drives the scan monitor over a lazily simulated stream: events are
/// generated chunk by chunk and discarded once consumed, so arbitrarily long
/// null runs stay in constant memory. The callback sees every snapshot from
/// t = w onward and returns true to stop.
template <typename SnapshotFn>
inline void lazy_monitor(const ChangeScenario& scn, double horizon, std::uint64_t seed,
                         const ClusterSet& clusters, const ScanWeights& weights,
                         const MonitorConfig& cfg, SnapshotFn&& fn) {
    cfg.validate();
    CounterRng rng(seed);
    ThinningState sim(scn.pre.num_nodes());

    ScoreState::Options opts;
    opts.checkpoint_interval = cfg.delta;
    opts.checkpoint_slots = cfg.w_over_delta() + 1;
    ScoreState state(scn.pre, clusters.union_edges(), opts);
    state.checkpoint(0.0);

    std::vector<Event> buf;
    std::size_t consumed = 0;
    const double chunk = std::max(cfg.w, 64.0 * cfg.delta);
    bool post_phase = !(scn.tau_star > 0.0);
    if (post_phase) sim.time = scn.tau_star;
    double generated = post_phase ? scn.tau_star : 0.0;
    long step = 0;
    double next_t = cfg.delta;

    while (next_t <= horizon + 1e-12) {
        // extend simulation past the next checkpoint
        while (generated < std::min(next_t + cfg.delta, horizon) - 1e-12) {
            if (!post_phase) {
                const double end = std::min(generated + chunk, scn.tau_star);
                simulate_segment(scn.pre, end, rng, sim, buf);
                generated = end;
                if (generated >= scn.tau_star) {
                    sim.reset(); // post-change excitation history restarts
                    post_phase = true;
                }
            } else {
                const double end = std::min(generated + chunk, horizon);
                simulate_segment(scn.post, end, rng, sim, buf);
                generated = end;
            }
        }
        while (consumed < buf.size() && buf[consumed].time < next_t)
            state.ingest_event(buf[consumed++]);
        state.checkpoint(next_t);
        if (next_t + 1e-12 >= cfg.w) {
            GammaSnapshot snap;
            snap.t = next_t;
            snap.per_cluster =
                weights.gammas(state.window_score(next_t, cfg.w, clusters.union_edges()));
            snap.max_abs = snap.per_cluster.cwiseAbs().maxCoeff();
            if (fn(snap)) return;
        }
        if (consumed > 4096) {
            buf.erase(buf.begin(), buf.begin() + static_cast<long>(consumed));
            consumed = 0;
        }
        ++step;
        next_t = static_cast<double>(step + 1) * cfg.delta;
    }
}

inline ChangeScenario null_scenario(const HawkesModel& model0) {
    return ChangeScenario{model0, model0, 0.0};
}

} // namespace detail

struct RunLength {
    double t = 0.0;     // stop time, or the cap when censored
    bool stopped = false;
};

/// One null run length: first update whose scan statistic exceeds b, censored
/// at the cap.
inline RunLength sample_run_length(const HawkesModel& model0, const ClusterSet& clusters,
                                   const ScanWeights& weights, const MonitorConfig& cfg,
                                   double cap, std::uint64_t seed) {
    RunLength out{cap, false};
    detail::lazy_monitor(detail::null_scenario(model0), cap, seed, clusters, weights, cfg,
                         [&](const GammaSnapshot& s) {
                             const double stat =
                                 cfg.two_sided ? s.max_abs : s.per_cluster.maxCoeff();
                             if (stat > cfg.b) {
                                 out = {s.t, true};
                                 return true;
                             }
                             return false;
                         });
    return out;
}

struct DelaySample {
    double delay = 0.0;
    bool detected = false;
    int attempts = 1; // draws consumed until a run survived past tau_star
    std::vector<int> flagged;
};

/// Detection delay for a change injected at tau_star after a stationary
/// burn-in. Runs that alarm at or before tau_star are discarded and redrawn
/// with a fresh seed.
inline DelaySample sample_detection_delay(const ChangeScenario& scn, const ClusterSet& clusters,
                                          const ScanWeights& weights, const MonitorConfig& cfg,
                                          double max_delay, std::uint64_t seed,
                                          int max_attempts = 64) {
    DelaySample out;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        out.attempts = attempt + 1;
        bool false_alarm = false;
        bool detected = false;
        double stop = 0.0;
        std::vector<int> flagged;
        detail::lazy_monitor(scn, scn.tau_star + max_delay,
                             seed + 0x9E37ULL * static_cast<std::uint64_t>(attempt), clusters,
                             weights, cfg, [&](const GammaSnapshot& s) {
                                 const double stat =
                                     cfg.two_sided ? s.max_abs : s.per_cluster.maxCoeff();
                                 if (stat > cfg.b) {
                                     if (s.t <= scn.tau_star) {
                                         false_alarm = true;
                                     } else {
                                         detected = true;
                                         stop = s.t;
                                         flagged = localize(s, cfg.b, cfg.two_sided);
                                     }
                                     return true;
                                 }
                                 return false;
                             });
        if (false_alarm) continue;
        out.detected = detected;
        out.delay = detected ? stop - scn.tau_star : max_delay;
        out.flagged = std::move(flagged);
        return out;
    }
    throw numeric_error("sample_detection_delay: persistent false alarms before tau_star");
}

// ---------------------------------------------------------------------------
// Experiment drivers

struct ExperimentSpec {
    std::string kind;            // arl | edd | far | fdr | runtime
    std::string network = "fig1";
    std::vector<std::string> cases = {"i", "ii", "iii", "vii"};
    int replicates = 500;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    double w = 200.0;
    double delta = 10.0;
    int m = 50;
    double target_arl = 10000.0;
    double alpha = 0.01;
    double b = 0.0;              // 0 = derive from the targets
    long tail_samples = 200000;
    double horizon_cap = 60000.0;
    double tau_star = 500.0;
    double max_delay = 4000.0;
    // thresholds for the comparison methods, calibrated by null simulation
    // (regenerate with the glr-calibrate subcommand)
    double glrc_threshold = 7.705;
    double glr_threshold = 11.35;
    bool edd_include_vanilla = false;
    std::vector<double> far_thresholds = {3.0, 2.8};
    std::vector<double> fdr_thresholds = {1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0, 3.2, 3.4};
    double fdr_t0 = 350.0;
    double fdr_t1 = 50.0;
    double runtime_span = 50000.0;

    void validate() const {
        if (replicates < 1) throw config_error("ExperimentSpec: replicates >= 1 required");
        if (kind != "arl" && kind != "edd" && kind != "far" && kind != "fdr" && kind != "runtime")
            throw config_error("ExperimentSpec: unknown kind '" + kind + "'");
    }
};

struct TableRow {
    std::vector<std::string> cells;
};

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<TableRow> rows;

    void write_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw config_error("cannot open for writing: " + path);
        for (std::size_t i = 0; i < header.size(); ++i)
            os << header[i] << (i + 1 < header.size() ? "," : "\n");
        for (const TableRow& r : rows)
            for (std::size_t i = 0; i < r.cells.size(); ++i)
                os << r.cells[i] << (i + 1 < r.cells.size() ? "," : "\n");
    }
};

inline std::string fmt(double v, int digits = 6) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// Mean and standard error of a sample.
inline std::pair<double, double> mean_and_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    if (xs.empty()) return {0.0, 0.0};
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

/// Average run length verification: calibrate thresholds for the target via
/// both rate bounds, then simulate run lengths at each.
inline Table experiment_arl(const ExperimentSpec& spec) {
    const Fixture fx = fixture(spec.network);
    MonitorConfig cfg;
    cfg.w = spec.w;
    cfg.delta = spec.delta;
    const FisherInfo fisher = fisher_closed_form(fx.model, fx.clusters.union_edges());
    const ScanWeights weights(fx.clusters, fisher, cfg.w);
    const CalibrationModel cal =
        gamma_covariance(fisher, fx.clusters, cfg.w_over_delta(), cfg.two_sided);

    Table tbl;
    tbl.name = "arl";
    tbl.header = {"method", "m",       "b",           "target_arl", "replicates",
                  "censored", "simulated_arl", "std_err",    "seconds"};

    auto simulate_arl = [&](double b, const std::string& method, int m_used) {
        const auto t0 = std::chrono::steady_clock::now();
        MonitorConfig run_cfg = cfg;
        run_cfg.b = b;
        std::vector<double> lengths(static_cast<std::size_t>(spec.replicates));
        std::vector<char> censored(static_cast<std::size_t>(spec.replicates), 0);
        parallel_replicates(static_cast<std::size_t>(spec.replicates), [&](std::size_t k) {
            const RunLength rl =
                sample_run_length(fx.model, fx.clusters, weights, run_cfg, spec.horizon_cap,
                                  spec.seed + 1000003ULL * (k + 1));
            lengths[k] = rl.t;
            censored[k] = rl.stopped ? 0 : 1;
        });
        const auto [mean, se] = mean_and_se(lengths);
        const long n_cens = std::count(censored.begin(), censored.end(), char(1));
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        tbl.rows.push_back({{method, std::to_string(m_used), fmt(b), fmt(spec.target_arl),
                             std::to_string(spec.replicates), std::to_string(n_cens), fmt(mean),
                             fmt(se), fmt(secs, 4)}});
    };

    for (int m_used : {spec.m, 2 * spec.m}) {
        const ArlThresholds th =
            threshold_for_arl(cal, spec.target_arl, m_used, cfg.delta, spec.tail_samples, spec.seed);
        simulate_arl(th.b_est1, "est1", m_used);
        if (m_used == spec.m) simulate_arl(th.b_est2, "est2", m_used);
    }
    return tbl;
}

/// Expected detection delay comparison: the scan monitor and the per-cluster
/// GLR baseline run paired on identical streams.
inline Table experiment_edd(const ExperimentSpec& spec, bool with_glr = true) {
    const Fixture fx = fixture(spec.network);
    MonitorConfig cfg;
    cfg.w = spec.w;
    cfg.delta = spec.delta;
    cfg.b = spec.b > 0.0 ? spec.b : 3.400;
    const FisherInfo fisher = fisher_closed_form(fx.model, fx.clusters.union_edges());
    const ScanWeights weights(fx.clusters, fisher, cfg.w);

    Table tbl;
    tbl.name = "edd";
    tbl.header = {"method", "case",       "threshold", "replicates",
                  "discarded", "edd",        "std_err",   "seconds"};

    for (const std::string& cs : spec.cases) {
        ChangeScenario scn{fx.model, fig1_case(cs), spec.tau_star};

        // proposed scan statistic
        {
            const auto t0 = std::chrono::steady_clock::now();
            std::vector<double> delays(static_cast<std::size_t>(spec.replicates));
            std::vector<int> attempts(static_cast<std::size_t>(spec.replicates));
            parallel_replicates(static_cast<std::size_t>(spec.replicates), [&](std::size_t k) {
                const DelaySample d =
                    sample_detection_delay(scn, fx.clusters, weights, cfg, spec.max_delay,
                                           spec.seed + 7919ULL * (k + 1));
                delays[k] = d.delay;
                attempts[k] = d.attempts;
            });
            const auto [mean, se] = mean_and_se(delays);
            const long redraws =
                std::accumulate(attempts.begin(), attempts.end(), 0L) - spec.replicates;
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            tbl.rows.push_back({{"proposed", cs, fmt(cfg.b), std::to_string(spec.replicates),
                                 std::to_string(redraws), fmt(mean), fmt(se), fmt(secs, 4)}});
        }

        auto glr_rows = [&](bool clustered, double threshold, const std::string& method) {
            const auto t0 = std::chrono::steady_clock::now();
            GlrConfig gcfg;
            gcfg.window = spec.w;
            gcfg.eval_interval = spec.delta;
            gcfg.threshold = threshold;
            gcfg.edge_scope = fx.clusters.union_edges();
            std::vector<double> delays(static_cast<std::size_t>(spec.replicates));
            std::vector<int> attempts(static_cast<std::size_t>(spec.replicates), 1);
            parallel_replicates(static_cast<std::size_t>(spec.replicates), [&](std::size_t k) {
                for (int attempt = 0;; ++attempt) {
                    if (attempt >= 64)
                        throw numeric_error("glr edd: persistent false alarms");
                    const EventStream stream = simulate_with_change(
                        scn, spec.tau_star + spec.max_delay,
                        spec.seed + 7919ULL * (k + 1) + 0x9E37ULL * static_cast<std::uint64_t>(attempt));
                    const DetectionResult r = run_glr_monitor(stream, fx.model, gcfg,
                                                              clustered ? &fx.clusters : nullptr,
                                                              false);
                    if (r.stopped && r.stop_time <= spec.tau_star) continue;
                    delays[k] = r.stopped ? r.stop_time - spec.tau_star : spec.max_delay;
                    attempts[k] = attempt + 1;
                    return;
                }
            });
            const long redraws =
                std::accumulate(attempts.begin(), attempts.end(), 0L) - spec.replicates;
            const auto [mean, se] = mean_and_se(delays);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            tbl.rows.push_back({{method, cs, fmt(threshold), std::to_string(spec.replicates),
                                 std::to_string(redraws), fmt(mean), fmt(se), fmt(secs, 4)}});
        };
        if (with_glr) {
            glr_rows(true, spec.glrc_threshold, "glr-c");
            if (spec.edd_include_vanilla) glr_rows(false, spec.glr_threshold, "glr");
        }
    }
    return tbl;
}

/// Instantaneous false alarm accuracy plus the conditional per-update alarm
/// rate under the null.
struct FarResult {
    Table snapshots;  // exceedance frequency per threshold vs the surrogate value
    Table updates;    // survivors/alarms per update index at the alpha-calibrated b
};

inline FarResult experiment_far(const ExperimentSpec& spec) {
    const Fixture fx = fixture(spec.network);
    MonitorConfig cfg;
    cfg.w = spec.w;
    cfg.delta = spec.w; // spaced snapshots: one window apart, near-independent
    const FisherInfo fisher = fisher_closed_form(fx.model, fx.clusters.union_edges());
    const ScanWeights weights(fx.clusters, fisher, cfg.w);
    const CalibrationModel cal = gamma_covariance(fisher, fx.clusters,
                                                  static_cast<int>(spec.w / spec.delta),
                                                  cfg.two_sided);

    FarResult out;
    out.snapshots.name = "far_snapshots";
    out.snapshots.header = {"w", "b", "surrogate_prob", "empirical", "std_err", "snapshots"};

    // pooled max-abs snapshots at spacing w
    const int per_rep = 11;
    const long want = std::max<long>(100000, spec.replicates);
    const auto n_reps = static_cast<std::size_t>((want + per_rep - 1) / per_rep);
    std::vector<std::vector<double>> stats(n_reps);
    MonitorConfig snap_cfg = cfg;
    snap_cfg.b = std::numeric_limits<double>::max();
    parallel_replicates(n_reps, [&](std::size_t k) {
        std::vector<double>& mine = stats[k];
        mine.reserve(per_rep);
        detail::lazy_monitor(detail::null_scenario(fx.model),
                             cfg.w * static_cast<double>(per_rep + 1), spec.seed + 104729ULL * (k + 1),
                             fx.clusters, weights, snap_cfg, [&](const GammaSnapshot& s) {
                                 mine.push_back(s.max_abs);
                                 return false;
                             });
    });
    std::vector<double> pooled;
    pooled.reserve(n_reps * per_rep);
    for (const auto& v : stats) pooled.insert(pooled.end(), v.begin(), v.end());

    for (double b : spec.far_thresholds) {
        long hits = 0;
        for (double s : pooled)
            if (s > b) ++hits;
        const double p = static_cast<double>(hits) / static_cast<double>(pooled.size());
        const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(pooled.size()));
        const double surrogate = tail_probability(cal, b, spec.tail_samples / 4, spec.seed).scan_prob;
        out.snapshots.rows.push_back({{fmt(cfg.w), fmt(b), fmt(surrogate), fmt(p), fmt(se),
                                       std::to_string(pooled.size())}});
    }

    // conditional per-update alarm rate at the alpha-calibrated threshold
    out.updates.name = "far_updates";
    out.updates.header = {"update_index", "survivors", "alarms", "conditional_rate",
                          "std_err"};
    MonitorConfig upd_cfg;
    upd_cfg.w = spec.w;
    upd_cfg.delta = spec.delta;
    const CalibrationModel cal_upd = gamma_covariance(fisher, fx.clusters, upd_cfg.w_over_delta(),
                                                      upd_cfg.two_sided);
    upd_cfg.b = threshold_for_alpha(cal_upd, spec.alpha, spec.tail_samples / 4, spec.seed);
    const int horizon_updates = 30;
    const double horizon = spec.w + spec.delta * horizon_updates;
    std::vector<int> stop_index(static_cast<std::size_t>(spec.replicates), -1);
    const ScanWeights weights_upd(fx.clusters, fisher, upd_cfg.w);
    parallel_replicates(static_cast<std::size_t>(spec.replicates), [&](std::size_t k) {
        int idx = 0;
        detail::lazy_monitor(detail::null_scenario(fx.model), horizon,
                             spec.seed + 15485863ULL * (k + 1), fx.clusters, weights_upd, upd_cfg,
                             [&](const GammaSnapshot& s) {
                                 ++idx;
                                 if (s.max_abs > upd_cfg.b) {
                                     stop_index[k] = idx;
                                     return true;
                                 }
                                 return false;
                             });
    });
    for (int idx = 1; idx <= horizon_updates; ++idx) {
        long survivors = 0, alarms = 0;
        for (int s : stop_index) {
            if (s < 0 || s >= idx) ++survivors;
            if (s == idx) ++alarms;
        }
        const double rate = survivors > 0 ? static_cast<double>(alarms) / survivors : 0.0;
        const double se =
            survivors > 0 ? std::sqrt(rate * (1.0 - rate) / static_cast<double>(survivors)) : 0.0;
        out.updates.rows.push_back({{std::to_string(idx), std::to_string(survivors),
                                     std::to_string(alarms), fmt(rate), fmt(se)}});
    }
    return out;
}

/// Post-alarm localization error rates on the chain network: one cluster's
/// change scanned at a single full-history window.
inline Table experiment_fdr(const ExperimentSpec& spec) {
    const Fixture fx = fixture_line20();
    const int signal_cluster = 9;
    ChangeScenario scn{fx.model, line20_change(signal_cluster), spec.fdr_t0};
    const double horizon = spec.fdr_t0 + spec.fdr_t1;
    const FisherInfo fisher = fisher_closed_form(fx.model, fx.clusters.union_edges());
    const ScanWeights weights(fx.clusters, fisher, horizon);
    const auto l = static_cast<int>(fx.clusters.size());

    std::vector<Eigen::VectorXd> gammas(static_cast<std::size_t>(spec.replicates));
    parallel_replicates(static_cast<std::size_t>(spec.replicates), [&](std::size_t k) {
        const EventStream stream =
            simulate_with_change(scn, horizon, spec.seed + 613ULL * (k + 1));
        ScoreState state(fx.model, fx.clusters.union_edges(), {});
        for (const Event& e : stream.events) state.ingest_event(e);
        // single window covering all data: cumulative score at the horizon
        gammas[k] = weights.gammas(state.cumulative_score(horizon));
    });

    Table tbl;
    tbl.name = "fdr";
    tbl.header = {"b",        "mean_fdr",      "mean_false_disc", "mean_true_disc",
                  "rho_analytic", "replicates", "std_err_false_disc"};
    for (double b : spec.fdr_thresholds) {
        std::vector<double> vs, fdrs, trues;
        for (const auto& g : gammas) {
            int v = 0, t = 0;
            for (Eigen::Index i = 0; i < g.size(); ++i) {
                if (std::fabs(g[i]) > b) {
                    if (static_cast<int>(i) == signal_cluster)
                        ++t;
                    else
                        ++v;
                }
            }
            vs.push_back(v);
            trues.push_back(t);
            fdrs.push_back(static_cast<double>(v) / static_cast<double>(v + t + 1));
        }
        const auto [v_mean, v_se] = mean_and_se(vs);
        const auto [t_mean, t_se] = mean_and_se(trues);
        const auto [f_mean, f_se] = mean_and_se(fdrs);
        const double rho = 2.0 * static_cast<double>(l) * normal_tail(b);
        tbl.rows.push_back({{fmt(b), fmt(f_mean), fmt(v_mean), fmt(t_mean), fmt(rho),
                             std::to_string(spec.replicates), fmt(v_se)}});
    }
    return tbl;
}

/// Wall-clock comparison of statistic computation over a long null stream.
/// Simulation time is excluded; every method is timed single-threaded on the
/// same stream.
inline Table experiment_runtime(const ExperimentSpec& spec) {
    const Fixture fx = fixture(spec.network);
    const EventStream stream = simulate(fx.model, spec.runtime_span, spec.seed);
    const FisherInfo fisher = fisher_closed_form(fx.model, fx.clusters.union_edges());

    Table tbl;
    tbl.name = "runtime";
    tbl.header = {"method", "time_units", "evals", "events", "seconds"};

    MonitorConfig cfg;
    cfg.w = spec.w;
    cfg.delta = spec.delta;
    cfg.b = std::numeric_limits<double>::max();
    {
        const auto t0 = std::chrono::steady_clock::now();
        const DetectionResult r = run_monitor(stream, fx.model, fx.clusters, fisher, cfg, false);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const long evals = static_cast<long>((spec.runtime_span - spec.w) / spec.delta) + 1;
        (void)r;
        tbl.rows.push_back({{"proposed", fmt(spec.runtime_span), std::to_string(evals),
                             std::to_string(stream.size()), fmt(secs, 6)}});
    }
    for (const bool clustered : {true, false}) {
        GlrConfig gcfg;
        gcfg.window = spec.w;
        gcfg.eval_interval = spec.delta;
        gcfg.em.free_mu = false;
        gcfg.edge_scope = fx.clusters.union_edges();
        const auto t0 = std::chrono::steady_clock::now();
        const DetectionResult r =
            run_glr_monitor(stream, fx.model, gcfg, clustered ? &fx.clusters : nullptr, false);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const long evals = static_cast<long>((spec.runtime_span - spec.w) / spec.delta) + 1;
        (void)r;
        tbl.rows.push_back({{clustered ? "glr-c" : "glr", fmt(spec.runtime_span),
                             std::to_string(evals), std::to_string(stream.size()), fmt(secs, 6)}});
    }
    return tbl;
}

/// Null-simulation threshold for the GLR monitors: empirical block-maximum
/// quantile matching the target run length, independent segments of m
/// evaluations each.
inline double calibrate_glr_threshold(const HawkesModel& model0, const ClusterSet& clusters,
                                      bool clustered, const GlrConfig& base, double target_arl,
                                      int m, int segments, std::uint64_t seed) {
    const double p_target =
        static_cast<double>(m) * base.eval_interval / target_arl;
    if (!(p_target < 1.0) || p_target * segments < 20.0)
        throw config_error("calibrate_glr_threshold: segment budget too small for the target");
    std::vector<double> maxima(static_cast<std::size_t>(segments));
    const double horizon =
        base.window + static_cast<double>(m) * base.eval_interval;
    parallel_replicates(static_cast<std::size_t>(segments), [&](std::size_t k) {
        const EventStream stream =
            simulate(model0, horizon, seed + 2654435761ULL * (k + 1));
        GlrConfig cfg = base;
        cfg.threshold = std::numeric_limits<double>::infinity();
        double best = 0.0;
        const DetectionResult r =
            run_glr_monitor(stream, model0, cfg, clustered ? &clusters : nullptr, true);
        // drop the first evaluation so each segment contributes exactly m
        for (std::size_t s = 1; s < r.trajectory.size(); ++s)
            best = std::max(best, r.trajectory[s].max_abs);
        maxima[k] = best;
    });
    std::sort(maxima.begin(), maxima.end());
    const auto rank = static_cast<std::size_t>(
        std::llround((1.0 - p_target) * static_cast<double>(segments)));
    return maxima[std::min(rank, maxima.size() - 1)];
}

/// Run an experiment and write its tables under spec.out_dir.
inline std::vector<std::string> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<std::string> written;
    auto emit = [&](const Table& t) {
        const std::string path = spec.out_dir + "/" + t.name + ".csv";
        t.write_csv(path);
        written.push_back(path);
    };
    if (spec.kind == "arl") emit(experiment_arl(spec));
    else if (spec.kind == "edd") emit(experiment_edd(spec));
    else if (spec.kind == "far") {
        const FarResult r = experiment_far(spec);
        emit(r.snapshots);
        emit(r.updates);
    } else if (spec.kind == "fdr") emit(experiment_fdr(spec));
    else emit(experiment_runtime(spec));
    return written;
}

} // namespace hawkscan
