#pragma once

#include <cmath>
#include <cstdint>

#include "hawkscan/model.hpp"
#include "hawkscan/rng.hpp"

namespace hawkscan {

namespace detail {

/// Thinning state: per-source decayed excitation counts R_p(t) so that
/// lambda_m(t) = mu_m + sum_p A(p,m) R_p(t).
struct ThinningState {
    Eigen::VectorXd decayed;
    double time = 0.0;

    explicit ThinningState(int m) : decayed(Eigen::VectorXd::Zero(m)) {}

    void reset() {
        decayed.setZero();
    }
};

inline void simulate_segment(const HawkesModel& model, double t_end, CounterRng& rng,
                             ThinningState& st, std::vector<Event>& out) {
    const int m = model.num_nodes();
    const bool poisson = model.is_poisson();
    Eigen::VectorXd lambda(m);

    while (true) {
        // Intensities only decay between events, so the current total bounds
        // the future total until the next accepted point.
        double bound;
        if (poisson) {
            bound = model.mu.sum();
        } else {
            lambda = model.mu + model.A.transpose() * st.decayed;
            bound = lambda.sum();
        }
        const double wait = rng.next_exp(bound);
        const double t_next = st.time + wait;
        if (t_next > t_end) {
            if (!poisson) st.decayed *= std::exp(-model.beta * (t_end - st.time));
            st.time = t_end;
            return;
        }
        if (!poisson) st.decayed *= std::exp(-model.beta * wait);
        st.time = t_next;

        double total;
        if (poisson) {
            total = bound;
        } else {
            lambda = model.mu + model.A.transpose() * st.decayed;
            total = lambda.sum();
        }
        if (rng.next_open() * bound <= total) {
            // Pick the node proportionally to its intensity.
            double u = rng.next_open() * total;
            int node = m - 1;
            if (poisson) {
                for (int i = 0; i < m; ++i) {
                    u -= model.mu[i];
                    if (u <= 0.0) { node = i; break; }
                }
            } else {
                for (int i = 0; i < m; ++i) {
                    u -= lambda[i];
                    if (u <= 0.0) { node = i; break; }
                }
            }
            out.push_back(Event{t_next, node});
            if (!poisson) st.decayed[node] += 1.0;
        }
    }
}

inline void check_stable(const HawkesModel& model) {
    model.validate(); // includes the subcriticality guard
}

} // namespace detail

/// Exact sample of the process on [0, horizon] by thinning with the recursive
/// exponential-kernel intensity. Deterministic given the seed.
inline EventStream simulate(const HawkesModel& model, double horizon, std::uint64_t seed) {
    detail::check_stable(model);
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be positive");
    CounterRng rng(seed);
    EventStream stream;
    stream.horizon = horizon;
    stream.events.reserve(static_cast<std::size_t>(model.stationary_rate().sum() * horizon * 1.1) + 16);
    detail::ThinningState st(model.num_nodes());
    detail::simulate_segment(model, horizon, rng, st, stream.events);
    return stream;
}

/// Sample a stream whose influence matrix switches at tau_star. The
/// post-change intensity sums excitation only over events at or after
/// tau_star; with carry_history=true the pre-change history keeps exciting
/// (reweighted by the post-change matrix).
inline EventStream simulate_with_change(const ChangeScenario& scn, double horizon,
                                        std::uint64_t seed, bool carry_history = false) {
    scn.validate();
    detail::check_stable(scn.pre);
    detail::check_stable(scn.post);
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate_with_change: horizon must be positive");
    if (scn.tau_star > horizon)
        throw std::invalid_argument("simulate_with_change: tau_star exceeds horizon");

    CounterRng rng(seed);
    EventStream stream;
    stream.horizon = horizon;
    detail::ThinningState st(scn.pre.num_nodes());
    if (scn.tau_star > 0.0)
        detail::simulate_segment(scn.pre, scn.tau_star, rng, st, stream.events);
    if (!carry_history) st.reset();
    st.time = scn.tau_star;
    if (horizon > scn.tau_star)
        detail::simulate_segment(scn.post, horizon, rng, st, stream.events);
    return stream;
}

} // namespace hawkscan
