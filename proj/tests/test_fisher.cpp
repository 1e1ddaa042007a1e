#include <catch2/catch_amalgamated.hpp>

#include "hawkscan/fisher.hpp"
#include "hawkscan/parallel.hpp"
#include "hawkscan/simulate.hpp"
#include "support/stats.hpp"

using namespace hawkscan;

namespace {

HawkesModel poisson(std::initializer_list<double> mus, double beta = 1.0) {
    HawkesModel m;
    m.mu.resize(static_cast<Eigen::Index>(mus.size()));
    Eigen::Index i = 0;
    for (double v : mus) m.mu[i++] = v;
    m.A = Eigen::MatrixXd::Zero(m.mu.size(), m.mu.size());
    m.beta = beta;
    return m;
}

} // namespace

TEST_CASE("closed form: self edge variance", "[fisher]") {
    const FisherInfo info = fisher_closed_form(poisson({1.0}), EdgeSet({{0, 0}}));
    CHECK(info.matrix(0, 0) == Catch::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("closed form: shared-target covariance", "[fisher]") {
    const FisherInfo info =
        fisher_closed_form(poisson({1.0, 1.0, 1.0}), EdgeSet({{0, 2}, {1, 2}}));
    CHECK(info.matrix(0, 0) == Catch::Approx(1.5).epsilon(1e-12));
    CHECK(info.matrix(0, 1) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(info.matrix(1, 0) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed form: unequal rates and decay", "[fisher]") {
    const FisherInfo info =
        fisher_closed_form(poisson({2.0, 1.0}, 2.0), EdgeSet({{0, 1}}));
    CHECK(info.matrix(0, 0) == Catch::Approx(2.0 * (0.25 + 0.5)).epsilon(1e-12));
    CHECK(info.matrix(0, 0) == Catch::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("closed form requires a zero influence matrix", "[fisher]") {
    HawkesModel m = poisson({1.0});
    m.A(0, 0) = 0.2;
    CHECK_THROWS_AS(fisher_closed_form(m, EdgeSet({{0, 0}})), std::invalid_argument);
}

TEST_CASE("plug-in estimate agrees with the closed form on long data", "[fisher]") {
    const HawkesModel m = poisson({1.0, 1.0});
    const EdgeSet edges({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    const FisherInfo exact = fisher_closed_form(m, edges);
    // a single stream at this horizon still fluctuates a few percent, so
    // average a batch of independent streams
    const int reps = 16;
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(4, 4);
    std::vector<Eigen::MatrixXd> mats(reps);
    parallel_replicates(reps, [&](std::size_t k) {
        const EventStream s = simulate(m, 2000.0, 31 + k);
        mats[k] = fisher_estimate(s, m, edges).matrix;
    });
    for (const auto& mm : mats) avg += mm / reps;
    for (Eigen::Index i = 0; i < 4; ++i) {
        INFO("diagonal " << i);
        CHECK(avg(i, i) == Catch::Approx(exact.matrix(i, i)).epsilon(0.05));
    }
    CHECK(avg(0, 1) == Catch::Approx(exact.matrix(0, 1)).margin(0.06)); // shared target
    CHECK(avg(0, 2) == 0.0);                                            // distinct targets
}

TEST_CASE("plug-in estimate blocks vanish without events at the target", "[fisher]") {
    const HawkesModel m = poisson({1.0, 1.0});
    EventStream s;
    s.horizon = 10.0;
    s.events = {{1.0, 0}, {2.0, 0}, {5.5, 0}}; // nothing at node 1
    const EdgeSet edges({{0, 1}, {1, 1}});
    const FisherInfo est = fisher_estimate(s, m, edges);
    CHECK(est.matrix.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("edges with distinct targets have exactly zero entries", "[fisher]") {
    const HawkesModel m = poisson({1.0, 1.0, 1.0});
    const EdgeSet edges({{0, 1}, {0, 2}});
    const EventStream s = simulate(m, 500.0, 32);
    const FisherInfo est = fisher_estimate(s, m, edges);
    const FisherInfo exact = fisher_closed_form(m, edges);
    CHECK(est.matrix(0, 1) == 0.0);
    CHECK(est.matrix(1, 0) == 0.0);
    CHECK(exact.matrix(0, 1) == 0.0);
}

TEST_CASE("empty stream yields a flagged zero matrix", "[fisher]") {
    EventStream s;
    s.horizon = 0.0;
    const FisherInfo est = fisher_estimate(s, poisson({1.0}), EdgeSet({{0, 0}}));
    CHECK(est.degenerate);
    CHECK(est.matrix(0, 0) == 0.0);
}

TEST_CASE("every produced matrix is symmetric positive semidefinite", "[fisher]") {
    const HawkesModel m = poisson({1.0, 0.6, 1.3});
    const EdgeSet edges({{0, 1}, {1, 1}, {2, 1}, {0, 2}, {2, 2}});
    for (std::uint64_t seed : {41u, 42u}) {
        const EventStream s = simulate(m, 800.0, seed);
        const FisherInfo est = fisher_estimate(s, m, edges);
        CHECK((est.matrix - est.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est.matrix, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8 * es.eigenvalues().maxCoeff());
    }
}

TEST_CASE("normalized scores are asymptotically standard normal", "[fisher]") {
    const HawkesModel m = poisson({1.0});
    const EdgeSet edges({{0, 0}});
    const int reps = 2000;
    const double horizon = 500.0;
    std::vector<double> standardized(reps);
    parallel_replicates(reps, [&](std::size_t k) {
        const EventStream s = simulate(m, horizon, 7000 + k);
        ScoreState st(m, edges);
        for (const Event& e : s.events) st.ingest_event(e);
        standardized[k] = st.cumulative_score(horizon)[0] / std::sqrt(horizon * 1.5);
    });
    const double var = testsupport::variance(standardized);
    CHECK(var > 0.9);
    CHECK(var < 1.1);
    // fully specified AD critical value at level 0.01
    CHECK(testsupport::anderson_darling_normal(standardized) < 3.857);
}

TEST_CASE("simulated variance resolves the unequal-rate closed form", "[fisher]") {
    // Distinguishes (mu_p/mu_q)(1/(2b) + mu_p/b^2) from the same expression
    // with the target rate inside the bracket: 10 versus 2 at these rates.
    const HawkesModel m = poisson({2.0, 0.5});
    const EdgeSet edges({{0, 1}});
    const int reps = 2000;
    const double horizon = 500.0;
    std::vector<double> scores(reps);
    parallel_replicates(reps, [&](std::size_t k) {
        const EventStream s = simulate(m, horizon, 8000 + k);
        ScoreState st(m, edges);
        for (const Event& e : s.events) st.ingest_event(e);
        scores[k] = st.cumulative_score(horizon)[0] / std::sqrt(horizon);
    });
    const double var = testsupport::variance(scores);
    const double predicted = (2.0 / 0.5) * (0.5 + 2.0);
    CHECK(var == Catch::Approx(predicted).epsilon(0.15));
    CHECK(std::fabs(var - 2.0) > 3.0);
}

TEST_CASE("plug-in estimate matches score covariances at a self-exciting reference",
          "[fisher]") {
    HawkesModel m;
    m.mu = Eigen::VectorXd::Ones(2);
    m.A.resize(2, 2);
    m.A << 0.4, 0.2, 0.0, 0.3;
    m.beta = 1.0;
    const EdgeSet edges({{0, 0}, {0, 1}, {1, 1}});

    const int reps = 2000;
    const double horizon = 400.0;
    Eigen::MatrixXd scores(reps, 3);
    parallel_replicates(reps, [&](std::size_t k) {
        const EventStream s = simulate(m, horizon, 9000 + k);
        ScoreState st(m, edges);
        for (const Event& e : s.events) st.ingest_event(e);
        scores.row(static_cast<Eigen::Index>(k)) =
            (st.cumulative_score(horizon) / std::sqrt(horizon)).transpose();
    });
    Eigen::MatrixXd plug = Eigen::MatrixXd::Zero(3, 3);
    const int pl_reps = 8;
    std::vector<Eigen::MatrixXd> mats(pl_reps);
    parallel_replicates(pl_reps, [&](std::size_t k) {
        const EventStream s = simulate(m, 5000.0, 500 + k);
        mats[k] = fisher_estimate(s, m, edges).matrix;
    });
    for (const auto& mm : mats) plug += mm / pl_reps;

    for (int i = 0; i < 3; ++i) {
        const double mean = scores.col(i).mean();
        const double var = (scores.col(i).array() - mean).square().sum() / (reps - 1.0);
        INFO("edge " << i);
        CHECK(std::fabs(mean) <= 3.0 * std::sqrt(var / reps)); // martingale: zero mean
        CHECK(var == Catch::Approx(plug(i, i)).epsilon(0.10));
    }
    const auto c0 = scores.col(0).array() - scores.col(0).mean();
    const auto c1 = scores.col(1).array() - scores.col(1).mean();
    const auto c2 = scores.col(2).array() - scores.col(2).mean();
    CHECK(plug(0, 1) == 0.0); // distinct targets stay exactly uncorrelated
    CHECK(std::fabs((c0 * c1).sum() / (reps - 1.0)) < 0.1);
    CHECK((c1 * c2).sum() / (reps - 1.0) == Catch::Approx(plug(1, 2)).epsilon(0.12));
}
