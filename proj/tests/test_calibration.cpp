#include <catch2/catch_amalgamated.hpp>

#include "hawkscan/calibration.hpp"
#include "hawkscan/fixtures.hpp"

using namespace hawkscan;

namespace {

CalibrationModel fig1_cal(int k = 20) {
    const Fixture fx = fixture_fig1();
    const FisherInfo fisher = fisher_closed_form(fx.model, fx.clusters.union_edges());
    return gamma_covariance(fisher, fx.clusters, k, true);
}

} // namespace

TEST_CASE("benchmark network correlation has the 0 / 1-3 pattern", "[calibration]") {
    const CalibrationModel cal = fig1_cal();
    const double third = 1.0 / 3.0;
    Eigen::MatrixXd expect(4, 4);
    expect << 1.0, 0.0, 0.0, third,
              0.0, 1.0, third, 0.0,
              0.0, third, 1.0, 0.0,
              third, 0.0, 0.0, 1.0;
    CHECK((cal.sigma - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("disjoint-target clusters decorrelate exactly", "[calibration]") {
    const Fixture fx = fixture_fig1();
    ClusterSet two({fx.clusters[0], fx.clusters[1]});
    const FisherInfo fisher = fisher_closed_form(fx.model, two.union_edges());
    const CalibrationModel cal = gamma_covariance(fisher, two, 20, true);
    CHECK(cal.sigma(0, 1) == 0.0);
}

TEST_CASE("a single cluster calibrates to the identity", "[calibration]") {
    const Fixture fx = fixture_fig1();
    ClusterSet one({fx.clusters[0]});
    const FisherInfo fisher = fisher_closed_form(fx.model, one.union_edges());
    const CalibrationModel cal = gamma_covariance(fisher, one, 20, true);
    CHECK(cal.sigma.rows() == 1);
    CHECK(cal.sigma(0, 0) == 1.0);
}

TEST_CASE("missing cluster edges in the information matrix are reported", "[calibration]") {
    const Fixture fx = fixture_fig1();
    const FisherInfo partial =
        fisher_closed_form(fx.model, fx.clusters[0].edges); // only one cluster's edges
    CHECK_THROWS_AS(gamma_covariance(partial, fx.clusters, 20, true), config_error);
}

TEST_CASE("duplicated clusters are rejected at validation", "[calibration]") {
    CalibrationModel cal;
    cal.sigma = Eigen::MatrixXd::Ones(2, 2); // correlation exactly one
    CHECK_THROWS_AS(cal.validate(), config_error);
}

TEST_CASE("single-cluster tail equals the normal tail", "[calibration]") {
    CalibrationModel cal;
    cal.sigma = Eigen::MatrixXd::Identity(1, 1);
    const TailEstimate est = tail_probability(cal, 3.0, 1000, 1);
    CHECK(est.prob == Catch::Approx(1.349898e-3).epsilon(0.02));
    CHECK(est.prob == Catch::Approx(normal_tail(3.0)).epsilon(1e-9));
    CHECK(est.scan_prob == Catch::Approx(2.0 * est.prob));
}

TEST_CASE("decomposition matches the independence closed form", "[calibration]") {
    CalibrationModel cal;
    cal.sigma = Eigen::MatrixXd::Identity(4, 4);
    const double b = 2.8;
    const TailEstimate est = tail_probability(cal, b, 100000, 2);
    const double exact = 1.0 - std::pow(normal_cdf(b), 4);
    CHECK(est.prob == Catch::Approx(exact).epsilon(3.0 * std::max(est.rel_std_err, 1e-3)));
    double sum = 0.0;
    for (double t : est.per_term) sum += t;
    CHECK(est.prob == Catch::Approx(sum).epsilon(1e-12));
}

TEST_CASE("threshold for a two-percent instantaneous level is near 2.8", "[calibration]") {
    const CalibrationModel cal = fig1_cal();
    const double b = threshold_for_alpha(cal, 0.02, 50000, 3);
    CHECK(b == Catch::Approx(2.8).margin(0.03));
}

TEST_CASE("threshold for a one-percent instantaneous level is near 3.0", "[calibration]") {
    const CalibrationModel cal = fig1_cal();
    const double b = threshold_for_alpha(cal, 0.01, 50000, 3);
    CHECK(b == Catch::Approx(3.0).margin(0.03));
}

TEST_CASE("single-cluster two-sided threshold is the normal quantile", "[calibration]") {
    CalibrationModel cal;
    cal.sigma = Eigen::MatrixXd::Identity(1, 1);
    const double b = threshold_for_alpha(cal, 0.05, 20000, 4);
    // 2 * P(Gamma >= b) = 0.05  =>  b at the upper 2.5% point
    CHECK(b == Catch::Approx(normal_tail_quantile(0.025)).margin(2e-3));
    CHECK(b == Catch::Approx(1.95996).margin(2e-3));
}

TEST_CASE("unreachable alpha raises an argument error", "[calibration]") {
    CalibrationModel cal;
    cal.sigma = Eigen::MatrixXd::Identity(1, 1);
    cal.two_sided = false;
    CHECK_THROWS_AS(threshold_for_alpha(cal, 0.9, 1000, 1), std::invalid_argument);
}

TEST_CASE("single-block rates coincide", "[calibration]") {
    const CalibrationModel cal = fig1_cal();
    const ArlRates rates = arl_rate_estimate(cal, 3.0, 1, 10.0, 5000, 5);
    CHECK(rates.lambda_est1 == rates.lambda_est2);
}

TEST_CASE("the block bound never exceeds the instantaneous bound", "[calibration]") {
    const CalibrationModel cal = fig1_cal();
    for (double b : {2.8, 3.2}) {
        const ArlRates rates = arl_rate_estimate(cal, b, 50, 10.0, 40000, 6);
        const double se1 = rates.lambda_est1 * rates.rel_std_err_est1;
        const double se2 = rates.lambda_est2 * rates.tail.rel_std_err;
        INFO("b " << b);
        CHECK(rates.lambda_est1 <= rates.lambda_est2 + 3.0 * std::hypot(se1, se2));
    }
}

TEST_CASE("doubling the target run length raises the threshold", "[calibration]") {
    const CalibrationModel cal = fig1_cal();
    const ArlThresholds a = threshold_for_arl(cal, 10000.0, 50, 10.0, 60000, 7);
    const ArlThresholds b = threshold_for_arl(cal, 20000.0, 50, 10.0, 60000, 7);
    CHECK(b.b_est1 > a.b_est1);
    CHECK(b.b_est2 > a.b_est2);
}

TEST_CASE("false discovery estimates reproduce the analytic column", "[calibration]") {
    CHECK(2.0 * 20.0 * normal_tail(2.0) == Catch::Approx(0.910).margin(5e-4));
    CHECK(2.0 * 20.0 * normal_tail(3.0) == Catch::Approx(0.054).margin(5e-4));
    CHECK(fdr_estimate(0, 2.0, 20) == Catch::Approx(0.910).margin(5e-4));
    CHECK(fdr_estimate(3, 2.0, 20) == Catch::Approx(0.910 / 4.0).margin(5e-4));
    CHECK(fdr_estimate(0, 3.0, 20) == Catch::Approx(0.054).margin(5e-4));
}

TEST_CASE("no drift means no finite window", "[calibration]") {
    const Fixture fx = fixture_fig1();
    const FisherInfo fisher = fisher_closed_form(fx.model, fx.clusters.union_edges());
    const auto w = min_window_for_power(fx.model, fx.model, fx.clusters[0], fisher, 3.0, 20, 8,
                                        256.0);
    CHECK_FALSE(w.has_value());
}

TEST_CASE("stronger shifts need shorter windows", "[calibration]") {
    const Fixture fx = fixture_fig1();
    const FisherInfo fisher = fisher_closed_form(fx.model, fx.clusters.union_edges());
    const auto w_weak =
        min_window_for_power(fx.model, fig1_case("i"), fx.clusters[0], fisher, 3.0, 60, 9);
    const auto w_strong =
        min_window_for_power(fx.model, fig1_case("ii"), fx.clusters[0], fisher, 3.0, 60, 9);
    REQUIRE(w_weak.has_value());
    REQUIRE(w_strong.has_value());
    CHECK(*w_strong < *w_weak);
}

TEST_CASE("run-length target 20000 reproduces the published threshold", "[calibration]") {
    const Fixture fx = fixture_fig1();
    const FisherInfo fisher = fisher_closed_form(fx.model, fx.clusters.union_edges());
    const CalibrationModel cal = gamma_covariance(fisher, fx.clusters, 20, true);
    const ArlThresholds th = threshold_for_arl(cal, 20000.0, 50, 10.0, 150000, 11);
    CHECK(th.b_est1 == Catch::Approx(3.5867).margin(0.05));
}
