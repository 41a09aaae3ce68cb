#include <doctest.h>

#include "clap/gae.hpp"
#include "clap/rng.hpp"
#include "clap/scalarize.hpp"
#include "support/oracles.hpp"

using namespace clap;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("linear scalarization is the dot product") {
  CHECK(linear_scalarize(vec2(7.0, -3.0), vec2(1.0, 0.0)) == doctest::Approx(7.0));
  CHECK(linear_scalarize(vec2(10.0, 0.0), vec2(0.3, 0.7)) == doctest::Approx(3.0));
  CHECK(linear_scalarize(vec2(2.0, 4.0), vec2(0.5, 0.5)) == doctest::Approx(3.0));
}

TEST_CASE("chebyshev scalar: hand evaluation") {
  const Eigen::VectorXd w = vec2(0.5, 0.5);
  const Eigen::VectorXd v = vec2(3.0, 1.0);
  const Eigen::VectorXd z = vec2(4.0, 2.0);
  CHECK(chebyshev_distance(v, w, z) == doctest::Approx(0.5));
  CHECK(chebyshev_scalar(v, w, z) == doctest::Approx(-0.5));
  CHECK(chebyshev_scalar(v, w, z, /*literal_sign=*/true) == doctest::Approx(0.5));
}

TEST_CASE("chebyshev scalar: zero exactly at the utopian point") {
  const Eigen::VectorXd w = vec2(0.4, 0.6);
  const Eigen::VectorXd z = vec2(5.0, 7.0);
  CHECK(chebyshev_scalar(z, w, z) == 0.0);
  // Non-positive everywhere, strictly negative off the utopian point
  // (both weights positive here).
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd v = vec2(rng.uniform(-10, 10), rng.uniform(-10, 10));
    const double s = chebyshev_scalar(v, w, z);
    CHECK(s <= 0.0);
    if (v != z) CHECK(s < 0.0);
  }
}

TEST_CASE("chebyshev scalar: single-objective degeneracy with w=(1,0)") {
  const Eigen::VectorXd w = vec2(1.0, 0.0);
  const Eigen::VectorXd z = vec2(4.0, 2.0);
  CHECK(chebyshev_scalar(vec2(1.5, -100.0), w, z) == doctest::Approx(-2.5));
  CHECK(chebyshev_scalar(vec2(4.0, 55.0), w, z) == doctest::Approx(0.0));
}

TEST_CASE("chebyshev scalar: positive scaling of w preserves the argmax") {
  Rng rng(17);
  const Eigen::VectorXd z = vec2(10.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd w = vec2(rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0));
    const double scale = rng.uniform(0.1, 9.0);
    std::vector<Eigen::VectorXd> candidates;
    for (int i = 0; i < 8; ++i) candidates.push_back(vec2(rng.uniform(0, 10), rng.uniform(0, 10)));
    int best = 0, best_scaled = 0;
    for (int i = 1; i < 8; ++i) {
      if (chebyshev_scalar(candidates[i], w, z) >
          chebyshev_scalar(candidates[best], w, z))
        best = i;
      if (chebyshev_scalar(candidates[i], scale * w, z) >
          chebyshev_scalar(candidates[best_scaled], scale * w, z))
        best_scaled = i;
      // The scalar itself scales linearly in w.
      CHECK(chebyshev_scalar(candidates[i], scale * w, z) ==
            doctest::Approx(scale * chebyshev_scalar(candidates[i], w, z)));
    }
    CHECK(best == best_scaled);
  }
}

TEST_CASE("chebyshev TD: terminal hand evaluation") {
  const Eigen::VectorXd w = vec2(0.5, 0.5);
  const Eigen::VectorXd z = vec2(4.0, 2.0);
  const Eigen::VectorXd v_t = vec2(3.0, 1.0);   // s(V_t) = -0.5
  const Eigen::VectorXd r = vec2(1.0, 1.0);     // w . r = 1
  const double delta = chebyshev_td(r, v_t, vec2(0.0, 0.0), w, z, 0.99, /*terminal=*/true);
  CHECK(delta == doctest::Approx(1.5));
}

TEST_CASE("chebyshev TD: gamma zero removes the bootstrap") {
  const Eigen::VectorXd w = vec2(0.5, 0.5);
  const Eigen::VectorXd z = vec2(4.0, 2.0);
  const Eigen::VectorXd v_t = vec2(3.0, 1.0);
  const Eigen::VectorXd v_t1 = vec2(2.0, 2.0);
  const Eigen::VectorXd r = vec2(2.0, 0.0);
  CHECK(chebyshev_td(r, v_t, v_t1, w, z, 0.0, false) ==
        doctest::Approx(linear_scalarize(r, w) - chebyshev_scalar(v_t, w, z)));
}

TEST_CASE("chebyshev TD: fixed point gives zero") {
  const Eigen::VectorXd w = vec2(0.5, 0.5);
  const Eigen::VectorXd z = vec2(4.0, 2.0);
  const Eigen::VectorXd v = vec2(3.0, 1.0);
  CHECK(chebyshev_td(vec2(0.0, 0.0), v, v, w, z, 1.0, false) == doctest::Approx(0.0));
}

TEST_CASE("utopian tracker: definition applied by hand") {
  UtopianTracker tracker(2, 1.0);
  CHECK_FALSE(tracker.initialized());
  tracker.update(vec2(5.0, 2.0));
  CHECK(tracker.initialized());
  CHECK(tracker.utopia() == vec2(6.0, 3.0));

  tracker.update(vec2(4.0, 1.0));  // strictly worse: unchanged
  CHECK(tracker.utopia() == vec2(6.0, 3.0));

  tracker.update(vec2(3.0, 7.0));  // improves objective 2 only
  CHECK(tracker.utopia() == vec2(6.0, 8.0));
}

TEST_CASE("utopian tracker: dominates every observed return by at least tau") {
  const double tau = 0.5;
  UtopianTracker tracker(2, tau);
  Rng rng(29);
  std::vector<Eigen::VectorXd> seen;
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd r = vec2(rng.uniform(-50, 50), rng.uniform(-50, 50));
    tracker.update(r);
    seen.push_back(r);
    const Eigen::VectorXd z = tracker.utopia();
    for (const auto& past : seen) {
      CHECK(z[0] >= past[0] + tau);
      CHECK(z[1] >= past[1] + tau);
    }
  }
}

TEST_CASE("gae: single step equals its delta") {
  Eigen::VectorXd deltas(1);
  deltas << 0.7;
  ArrayXb terminal(1);
  terminal << true;
  CHECK(gae(deltas, 0.99, 0.95, terminal)[0] == doctest::Approx(0.7));
}

TEST_CASE("gae: gamma=lambda=1 sums the tail") {
  Eigen::VectorXd deltas(3);
  deltas << 1.0, 1.0, 1.0;
  ArrayXb terminal(3);
  terminal << false, false, true;
  const Eigen::VectorXd adv = gae(deltas, 1.0, 1.0, terminal);
  CHECK(adv[0] == doctest::Approx(3.0));
  CHECK(adv[1] == doctest::Approx(2.0));
  CHECK(adv[2] == doctest::Approx(1.0));
}

TEST_CASE("gae: lambda=0 collapses to the TD errors") {
  Eigen::VectorXd deltas(4);
  deltas << 0.3, -0.2, 0.9, 0.1;
  ArrayXb terminal = ArrayXb::Constant(4, false);
  const Eigen::VectorXd adv = gae(deltas, 0.9, 0.0, terminal);
  for (int t = 0; t < 4; ++t) CHECK(adv[t] == doctest::Approx(deltas[t]));
}

TEST_CASE("gae: matches the brute-force definition on random instances") {
  Rng rng(31);
  double max_err = 0.0;
  for (int instance = 0; instance < 200; ++instance) {
    const int len = 1 + rng.uniform_int(32);
    Eigen::VectorXd deltas(len);
    ArrayXb terminal(len);
    for (int t = 0; t < len; ++t) {
      deltas[t] = rng.uniform(-5, 5);
      terminal[t] = rng.bernoulli(0.15);
    }
    const double gamma = rng.uniform(0.0, 1.0);
    const double lambda = rng.uniform(0.0, 1.0);
    const Eigen::VectorXd fast = gae(deltas, gamma, lambda, terminal);
    const Eigen::VectorXd slow = oracles::gae_brute_force(deltas, gamma, lambda, terminal);
    max_err = std::max(max_err, (fast - slow).cwiseAbs().maxCoeff());
  }
  CHECK(max_err <= 1e-10);
}

TEST_CASE("discounted returns match brute force with bootstrap") {
  Rng rng(33);
  for (int instance = 0; instance < 100; ++instance) {
    const int len = 1 + rng.uniform_int(24);
    Eigen::VectorXd rewards(len);
    ArrayXb terminal(len);
    for (int t = 0; t < len; ++t) {
      rewards[t] = rng.uniform(-3, 3);
      terminal[t] = rng.bernoulli(0.2);
    }
    const double gamma = rng.uniform(0.5, 1.0);
    const double bootstrap = rng.uniform(-2, 2);
    const Eigen::VectorXd fast = discounted_returns(rewards, gamma, terminal, bootstrap);
    const Eigen::VectorXd slow = oracles::returns_brute_force(rewards, gamma, terminal, bootstrap);
    CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("n=1: chebyshev and linear TD differ by a gamma-scaled constant") {
  // With one objective, w=(1) and values below the utopian point,
  // s_cheby(V) = V - Z, so deltas differ by Z(1-gamma) on non-terminal steps
  // and by Z on terminal ones.
  Rng rng(37);
  Eigen::VectorXd w1(1), z1(1);
  w1 << 1.0;
  z1 << 40.0;
  const double gamma = 0.97;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd r(1), v_t(1), v_t1(1);
    r << rng.uniform(-2, 2);
    v_t << rng.uniform(-20, 20);
    v_t1 << rng.uniform(-20, 20);
    const bool terminal = rng.bernoulli(0.2);
    const double cheby = chebyshev_td(r, v_t, v_t1, w1, z1, gamma, terminal);
    const double linear = linear_td(r, v_t, v_t1, w1, gamma, terminal);
    const double constant = terminal ? z1[0] : z1[0] * (1.0 - gamma);
    CHECK(std::abs(cheby - (linear + constant)) <= 1e-10);
  }
}
