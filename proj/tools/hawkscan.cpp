// Command-line front end: simulation, fitting, threshold calibration, online
// detection and the benchmark experiment drivers. All outputs are CSV or JSON
// and deterministic given --seed.

#include <CLI11.hpp>
#include <iostream>

#include "hawkscan/hawkscan.hpp"

using namespace hawkscan;

namespace {

struct CommonOpts {
    std::uint64_t seed = 1;
    std::string out;
    std::string config;
};

nlohmann::json load_config(const CommonOpts& c) {
    return c.config.empty() ? nlohmann::json::object() : load_json(c.config);
}

template <typename T>
T cfg_get(const nlohmann::json& j, const std::string& key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--out", c.out, "output path (file or directory, command-specific)");
    cmd->add_option("--config", c.config, "JSON config file");
}

int cmd_simulate(const CommonOpts& c, const std::string& model_path,
                 const std::string& post_path, double horizon, double tau_star,
                 bool carry_history) {
    const HawkesModel model = model_from_json(load_json(model_path));
    EventStream stream;
    if (post_path.empty()) {
        stream = simulate(model, horizon, c.seed);
    } else {
        const HawkesModel post = model_from_json(load_json(post_path));
        stream = simulate_with_change(ChangeScenario{model, post, tau_star}, horizon, c.seed,
                                      carry_history);
    }
    if (c.out.empty())
        write_events_csv(std::cout, stream);
    else
        write_events_csv(c.out, stream);
    return 0;
}

int cmd_fit(const CommonOpts& c, const std::string& events_path, double beta, double horizon,
            const std::string& init_path) {
    const EventStream stream = read_events_csv_file(events_path, horizon);
    int m = 0;
    for (const Event& e : stream.events) m = std::max(m, e.node + 1);
    HawkesModel init;
    if (init_path.empty()) {
        init.mu = Eigen::VectorXd::Constant(m, 1.0);
        init.A = Eigen::MatrixXd::Zero(m, m);
        init.beta = beta;
    } else {
        init = model_from_json(load_json(init_path));
        m = init.num_nodes();
    }
    const FitResult fit = fit_mle(stream, beta, init);
    nlohmann::json j = model_to_json(fit.model);
    j["fit"] = {{"converged", fit.converged},
                {"iterations", fit.iterations},
                {"grad_norm", fit.grad_norm},
                {"loglik", fit.loglik}};
    if (c.out.empty())
        std::cout << j.dump(2) << '\n';
    else
        save_json(c.out, j);
    if (!fit.converged) std::cerr << "warning: fit did not converge\n";
    return 0;
}

int cmd_calibrate(const CommonOpts& c, const std::string& model_path,
                  const std::string& clusters_path, const std::string& fisher_path,
                  const std::string& train_path) {
    const nlohmann::json cfg = load_config(c);
    const HawkesModel model = model_from_json(load_json(model_path));
    const ClusterSet clusters = clusters_from_json(load_json(clusters_path));
    const double w = cfg_get(cfg, "w", 200.0);
    const double delta = cfg_get(cfg, "delta", 10.0);
    const bool two_sided = cfg_get(cfg, "two_sided", true);
    const int m_blocks = cfg_get(cfg, "m", 50);
    const long samples = cfg_get<long>(cfg, "tail_samples", 200000);

    FisherInfo fisher;
    if (!fisher_path.empty()) {
        fisher = fisher_from_json(load_json(fisher_path));
    } else if (!train_path.empty()) {
        const EventStream train = read_events_csv_file(train_path);
        fisher = fisher_estimate(train, model, clusters.union_edges());
    } else if (model.is_poisson()) {
        fisher = fisher_closed_form(model, clusters.union_edges());
    } else {
        throw config_error("calibrate: need --fisher or --train for a non-zero influence matrix");
    }

    const int k = static_cast<int>(std::llround(w / delta));
    const CalibrationModel cal = gamma_covariance(fisher, clusters, k, two_sided);

    nlohmann::json targets, estimates;
    double b = cfg_get(cfg, "b", 0.0);
    if (cfg.contains("alpha")) {
        const double alpha = cfg.at("alpha").get<double>();
        b = threshold_for_alpha(cal, alpha, samples, c.seed);
        targets["alpha"] = alpha;
        const TailEstimate tail = tail_probability(cal, b, samples, c.seed);
        estimates["instantaneous_prob"] = tail.scan_prob;
        estimates["rel_std_err"] = tail.rel_std_err;
    } else if (cfg.contains("target_arl")) {
        const double target = cfg.at("target_arl").get<double>();
        const ArlThresholds th = threshold_for_arl(cal, target, m_blocks, delta, samples, c.seed);
        b = th.b_est1;
        targets["target_arl"] = target;
        targets["m"] = m_blocks;
        const ArlRates rates = arl_rate_estimate(cal, b, m_blocks, delta, samples, c.seed);
        estimates["b_est1"] = th.b_est1;
        estimates["b_est2"] = th.b_est2;
        estimates["lambda_est1"] = rates.lambda_est1;
        estimates["lambda_est2"] = rates.lambda_est2;
        estimates["arl_est1"] = rates.lambda_est1 > 0.0 ? delta / rates.lambda_est1 : 0.0;
        estimates["rel_std_err_est1"] = rates.rel_std_err_est1;
    } else if (b > 0.0) {
        targets["b"] = b;
        const TailEstimate tail = tail_probability(cal, b, samples, c.seed);
        estimates["instantaneous_prob"] = tail.scan_prob;
        estimates["rel_std_err"] = tail.rel_std_err;
    } else {
        throw config_error("calibrate: config must set one of alpha, target_arl, b");
    }

    nlohmann::json sampler = {{"tail_samples", samples}, {"seed", c.seed}};
    nlohmann::json report = calibration_report(cal, b, targets, estimates, sampler);
    report["w"] = w;
    report["delta"] = delta;
    report["fisher"] = fisher_to_json(fisher);
    if (c.out.empty())
        std::cout << report.dump(2) << '\n';
    else
        save_json(c.out, report);
    return 0;
}

int cmd_detect(const CommonOpts& c, const std::string& events_path,
               const std::string& model_path, const std::string& clusters_path,
               const std::string& fisher_path, double horizon) {
    const nlohmann::json cfg = load_config(c);
    const EventStream stream = read_events_csv_file(events_path, horizon);
    const HawkesModel model = model_from_json(load_json(model_path));
    const ClusterSet clusters = clusters_from_json(load_json(clusters_path));
    FisherInfo fisher;
    if (!fisher_path.empty())
        fisher = fisher_from_json(load_json(fisher_path));
    else if (model.is_poisson())
        fisher = fisher_closed_form(model, clusters.union_edges());
    else
        throw config_error("detect: need --fisher for a non-zero influence matrix");

    MonitorConfig mc;
    mc.w = cfg_get(cfg, "w", 200.0);
    mc.delta = cfg_get(cfg, "delta", 10.0);
    mc.b = cfg_get(cfg, "b", 3.0);
    mc.two_sided = cfg_get(cfg, "two_sided", true);

    const DetectionResult res = run_monitor(stream, model, clusters, fisher, mc);
    const std::string prefix = c.out.empty() ? std::string("detect") : c.out;
    write_trajectory_csv(prefix + "_trajectory.csv", res.trajectory, clusters.size());

    nlohmann::json j;
    j["stopped"] = res.stopped;
    if (res.trajectory.empty()) j["note"] = "insufficient data: no full window before the horizon";
    if (res.stopped) {
        j["alarm_time"] = res.stop_time;
        j["flagged_clusters"] = res.flagged_clusters;
        j["fdr_estimate"] = fdr_estimate(static_cast<int>(res.flagged_clusters.size()), mc.b,
                                         static_cast<int>(clusters.size()));
    }
    save_json(prefix + "_alarm.json", j);
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_fixture(const CommonOpts& c, const std::string& name) {
    const Fixture f = fixture(name);
    const std::string prefix = c.out.empty() ? name : c.out;
    save_json(prefix + "_model.json", model_to_json(f.model));
    save_json(prefix + "_clusters.json", clusters_to_json(f.clusters));
    std::cout << "wrote " << prefix << "_model.json and " << prefix << "_clusters.json\n";
    return 0;
}

int cmd_bench(const CommonOpts& c, ExperimentSpec spec) {
    const nlohmann::json cfg = load_config(c);
    spec.seed = c.seed;
    if (!c.out.empty()) spec.out_dir = c.out;
    spec.w = cfg_get(cfg, "w", spec.w);
    spec.delta = cfg_get(cfg, "delta", spec.delta);
    spec.m = cfg_get(cfg, "m", spec.m);
    spec.b = cfg_get(cfg, "b", spec.b);
    spec.alpha = cfg_get(cfg, "alpha", spec.alpha);
    spec.target_arl = cfg_get(cfg, "target_arl", spec.target_arl);
    spec.tail_samples = cfg_get<long>(cfg, "tail_samples", spec.tail_samples);
    spec.horizon_cap = cfg_get(cfg, "horizon_cap", spec.horizon_cap);
    spec.tau_star = cfg_get(cfg, "tau_star", spec.tau_star);
    spec.glrc_threshold = cfg_get(cfg, "glrc_threshold", spec.glrc_threshold);
    spec.glr_threshold = cfg_get(cfg, "glr_threshold", spec.glr_threshold);
    spec.edd_include_vanilla = cfg_get(cfg, "edd_include_vanilla", spec.edd_include_vanilla);
    for (const std::string& path : run_experiment(spec)) std::cout << "wrote " << path << '\n';
    return 0;
}

int cmd_glr_calibrate(const CommonOpts& c, const std::string& network, double target_arl, int m,
                      int segments, bool clustered) {
    const Fixture fx = fixture(network);
    GlrConfig gcfg;
    gcfg.em.free_mu = false;
    gcfg.edge_scope = fx.clusters.union_edges();
    const double b = calibrate_glr_threshold(fx.model, fx.clusters, clustered, gcfg, target_arl,
                                             m, segments, c.seed);
    nlohmann::json j = {{"network", network},
                        {"method", clustered ? "glr-c" : "glr"},
                        {"target_arl", target_arl},
                        {"m", m},
                        {"segments", segments},
                        {"threshold", b}};
    if (c.out.empty())
        std::cout << j.dump(2) << '\n';
    else
        save_json(c.out, j);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"online scan monitoring of network point processes"};
    app.require_subcommand(1);

    CommonOpts common;

    // simulate
    auto* sim = app.add_subcommand("simulate", "sample a stream from a model file");
    std::string sim_model, sim_post;
    double sim_horizon = 1000.0, sim_tau = 0.0;
    bool sim_carry = false;
    sim->add_option("--model", sim_model, "model JSON")->required();
    sim->add_option("--post", sim_post, "post-change model JSON (enables a change at --tau-star)");
    sim->add_option("--horizon", sim_horizon, "end time");
    sim->add_option("--tau-star", sim_tau, "change time");
    sim->add_flag("--carry-history", sim_carry, "keep pre-change excitation across the change");
    add_common(sim, common);

    // fit
    auto* fit = app.add_subcommand("fit", "maximum-likelihood fit with fixed decay");
    std::string fit_events, fit_init;
    double fit_beta = 1.0, fit_horizon = -1.0;
    fit->add_option("--events", fit_events, "event CSV")->required();
    fit->add_option("--beta", fit_beta, "decay rate (held fixed)");
    fit->add_option("--horizon", fit_horizon, "observation end (default: last event)");
    fit->add_option("--init", fit_init, "initial model JSON");
    add_common(fit, common);

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "thresholds and the Gaussian surrogate");
    std::string cal_model, cal_clusters, cal_fisher, cal_train;
    cal->add_option("--model", cal_model, "model JSON")->required();
    cal->add_option("--clusters", cal_clusters, "cluster JSON")->required();
    cal->add_option("--fisher", cal_fisher, "information matrix JSON");
    cal->add_option("--train", cal_train, "training events CSV for the plug-in estimate");
    add_common(cal, common);

    // detect
    auto* det = app.add_subcommand("detect", "run the scan monitor over an event file");
    std::string det_events, det_model, det_clusters, det_fisher;
    double det_horizon = -1.0;
    det->add_option("--events", det_events, "event CSV")->required();
    det->add_option("--model", det_model, "pre-change model JSON")->required();
    det->add_option("--clusters", det_clusters, "cluster JSON")->required();
    det->add_option("--fisher", det_fisher, "information matrix JSON");
    det->add_option("--horizon", det_horizon, "observation end (default: last event)");
    add_common(det, common);

    // fixture
    auto* fx = app.add_subcommand("fixture", "write a benchmark network (fig1 or line20)");
    std::string fx_name;
    fx->add_option("name", fx_name, "fixture name")->required();
    add_common(fx, common);

    // bench
    auto* bench = app.add_subcommand("bench", "benchmark experiment drivers");
    ExperimentSpec spec;
    bench->add_option("kind", spec.kind, "arl | edd | far | fdr | runtime")->required();
    bench->add_option("--network", spec.network, "fixture name");
    bench->add_option("--replicates", spec.replicates, "replicate count");
    bench->add_option("--cases", spec.cases, "change cases for edd");
    add_common(bench, common);

    // glr-calibrate
    auto* gc = app.add_subcommand("glr-calibrate", "null-simulation GLR threshold");
    std::string gc_network = "fig1";
    double gc_target = 10000.0;
    int gc_m = 50, gc_segments = 2000;
    bool gc_clustered = true;
    gc->add_option("--network", gc_network, "fixture name");
    gc->add_option("--target-arl", gc_target, "target average run length");
    gc->add_option("--m", gc_m, "block length in evaluations");
    gc->add_option("--segments", gc_segments, "independent null segments");
    gc->add_flag("--clustered,!--vanilla", gc_clustered, "per-cluster scopes vs the union scope");
    add_common(gc, common);

    try {
        app.parse(argc, argv);
        if (sim->parsed())
            return cmd_simulate(common, sim_model, sim_post, sim_horizon, sim_tau, sim_carry);
        if (fit->parsed()) return cmd_fit(common, fit_events, fit_beta, fit_horizon, fit_init);
        if (cal->parsed())
            return cmd_calibrate(common, cal_model, cal_clusters, cal_fisher, cal_train);
        if (det->parsed())
            return cmd_detect(common, det_events, det_model, det_clusters, det_fisher, det_horizon);
        if (fx->parsed()) return cmd_fixture(common, fx_name);
        if (bench->parsed()) return cmd_bench(common, spec);
        if (gc->parsed())
            return cmd_glr_calibrate(common, gc_network, gc_target, gc_m, gc_segments,
                                     gc_clustered);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
