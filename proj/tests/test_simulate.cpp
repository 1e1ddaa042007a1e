#include <catch2/catch_amalgamated.hpp>

#include "hawkscan/fixtures.hpp"
#include "hawkscan/parallel.hpp"
#include "hawkscan/simulate.hpp"
#include "support/stats.hpp"

using namespace hawkscan;

TEST_CASE("poisson reduction: per-node counts have the right mean", "[simulate]") {
    HawkesModel m;
    m.mu = Eigen::VectorXd::Ones(12);
    m.A = Eigen::MatrixXd::Zero(12, 12);
    m.beta = 1.0;
    const int seeds = 200;
    const double horizon = 1000.0;
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(seeds, 12);
    parallel_replicates(seeds, [&](std::size_t k) {
        const EventStream s = simulate(m, horizon, 900 + k);
        for (const Event& e : s.events) counts(static_cast<Eigen::Index>(k), e.node) += 1.0;
    });
    const double band = 3.0 * std::sqrt(horizon / seeds);
    for (int node = 0; node < 12; ++node) {
        const double sample_mean = counts.col(node).mean();
        INFO("node " << node);
        CHECK(std::fabs(sample_mean - horizon) <= band);
    }
}

TEST_CASE("self-excited rate approaches mu/(1 - alpha/beta)", "[simulate]") {
    HawkesModel m;
    m.mu = Eigen::VectorXd::Ones(1);
    m.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
    m.beta = 1.0;
    const double horizon = 10000.0;
    const EventStream s = simulate(m, horizon, 7);
    const double rate = static_cast<double>(s.size()) / horizon;
    CHECK(rate == Catch::Approx(2.0).epsilon(0.03));
    CHECK(m.stationary_rate()[0] == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("same model, horizon and seed reproduce the stream exactly", "[simulate]") {
    HawkesModel m;
    m.mu = Eigen::VectorXd::Ones(3);
    m.A = Eigen::MatrixXd::Constant(3, 3, 0.1);
    m.beta = 2.0;
    const EventStream a = simulate(m, 500.0, 42);
    const EventStream b = simulate(m, 500.0, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.events[i].time == b.events[i].time);
        CHECK(a.events[i].node == b.events[i].node);
    }
    const EventStream c = simulate(m, 500.0, 43);
    REQUIRE(!c.events.empty());
    CHECK(a.events[0].time != c.events[0].time);
}

TEST_CASE("explosive influence is rejected before simulation", "[simulate]") {
    HawkesModel m;
    m.mu = Eigen::VectorXd::Ones(1);
    m.A = Eigen::MatrixXd::Constant(1, 1, 1.2);
    m.beta = 1.0;
    CHECK_THROWS_AS(simulate(m, 10.0, 1), std::invalid_argument);
    // small weights are still explosive against a slow decay
    m.A(0, 0) = 0.9;
    m.beta = 0.5;
    CHECK_THROWS_AS(simulate(m, 10.0, 1), std::invalid_argument);
    // above unit norm yet subcritical against a fast decay is fine
    m.A(0, 0) = 1.2;
    m.beta = 2.0;
    CHECK_NOTHROW(simulate(m, 10.0, 1));
}

TEST_CASE("inter-event gaps of a poisson stream pass a KS check", "[simulate]") {
    HawkesModel m;
    m.mu = Eigen::VectorXd::Constant(1, 1.0);
    m.A = Eigen::MatrixXd::Zero(1, 1);
    m.beta = 1.0;
    const EventStream s = simulate(m, 11000.0, 11);
    std::vector<double> gaps;
    double prev = 0.0;
    for (const Event& e : s.events) {
        gaps.push_back(e.time - prev);
        prev = e.time;
        if (gaps.size() == 10000) break;
    }
    REQUIRE(gaps.size() == 10000);
    const double d = testsupport::ks_distance(
        gaps, [](double x) { return 1.0 - std::exp(-x); });
    // KS critical value at level 0.01 for n = 1e4
    CHECK(d < 1.628 / std::sqrt(10000.0));
}

TEST_CASE("change at the horizon reproduces the pre-change stream", "[simulate]") {
    const Fixture fx = fixture_fig1();
    ChangeScenario scn{fx.model, fig1_case("ii"), 300.0};
    scn.tau_star = 300.0;
    const EventStream full = simulate_with_change(scn, 300.0, 5);
    const EventStream pre = simulate(scn.pre, 300.0, 5);
    REQUIRE(full.size() == pre.size());
    for (std::size_t i = 0; i < full.size(); ++i)
        CHECK(full.events[i].time == pre.events[i].time);
}

TEST_CASE("change at time zero reproduces the post-change stream", "[simulate]") {
    const Fixture fx = fixture_fig1();
    ChangeScenario scn{fx.model, fig1_case("ii"), 0.0};
    const EventStream full = simulate_with_change(scn, 300.0, 5);
    const EventStream post = simulate(scn.post, 300.0, 5);
    REQUIRE(full.size() == post.size());
    for (std::size_t i = 0; i < full.size(); ++i)
        CHECK(full.events[i].time == post.events[i].time);
}

TEST_CASE("tau_star beyond the horizon is rejected", "[simulate]") {
    const Fixture fx = fixture_fig1();
    ChangeScenario scn{fx.model, fig1_case("i"), 400.0};
    CHECK_THROWS_AS(simulate_with_change(scn, 300.0, 1), std::invalid_argument);
}

TEST_CASE("post-change rates match the stationary solve for case i", "[simulate]") {
    const Fixture fx = fixture_fig1();
    const HawkesModel post = fig1_case("i");
    const Eigen::VectorXd expect = post.stationary_rate();
    // targets of the changed edges (0-based): 0, 2, 4, 7 at rate 1.2
    for (int node : {0, 2, 4, 7}) CHECK(expect[node] == Catch::Approx(1.2).epsilon(1e-12));

    ChangeScenario scn{fx.model, post, 0.0};
    const double horizon = 8000.0;
    const int reps = 8;
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(reps, 12);
    parallel_replicates(reps, [&](std::size_t k) {
        const EventStream s = simulate_with_change(scn, horizon, 100 + k);
        for (const Event& e : s.events) counts(static_cast<Eigen::Index>(k), e.node) += 1.0;
    });
    for (int node : {0, 2, 4, 7}) {
        const double rate = counts.col(node).sum() / (horizon * reps);
        INFO("node " << node);
        CHECK(rate == Catch::Approx(1.2).epsilon(0.05));
    }
}

TEST_CASE("likelihood ranks the true model above perturbed ones", "[simulate]") {
    HawkesModel truth;
    truth.mu = Eigen::VectorXd::Ones(1);
    truth.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
    truth.beta = 1.0;
    HawkesModel lower = truth, higher = truth;
    lower.A(0, 0) = 0.2;
    higher.A(0, 0) = 0.8;

    const int reps = 50;
    Eigen::MatrixXd ll = Eigen::MatrixXd::Zero(reps, 3);
    parallel_replicates(reps, [&](std::size_t k) {
        const EventStream s = simulate(truth, 1000.0, 3000 + k);
        ll(static_cast<Eigen::Index>(k), 0) = log_likelihood(truth, s);
        ll(static_cast<Eigen::Index>(k), 1) = log_likelihood(lower, s);
        ll(static_cast<Eigen::Index>(k), 2) = log_likelihood(higher, s);
    });
    CHECK(ll.col(0).mean() > ll.col(1).mean());
    CHECK(ll.col(0).mean() > ll.col(2).mean());
}

TEST_CASE("carrying history keeps excitation alive across the change", "[simulate]") {
    HawkesModel m;
    m.mu = Eigen::VectorXd::Ones(1);
    m.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
    m.beta = 1.0;
    ChangeScenario scn{m, m, 50.0};
    const int reps = 400;
    std::vector<double> carried(reps), truncated(reps);
    parallel_replicates(reps, [&](std::size_t k) {
        auto count_after = [&](bool carry) {
            const EventStream s = simulate_with_change(scn, 54.0, 4242 + k, carry);
            int n = 0;
            for (const Event& e : s.events)
                if (e.time > 50.0) ++n;
            return static_cast<double>(n);
        };
        carried[k] = count_after(true);
        truncated[k] = count_after(false);
    });
    const double mean_carried = testsupport::mean(carried);
    const double mean_truncated = testsupport::mean(truncated);
    // stationary rate is 2; a truncated restart ramps up from the base rate
    CHECK(mean_carried > mean_truncated + 0.5);
    CHECK(mean_carried == Catch::Approx(8.0).margin(1.0));
}
