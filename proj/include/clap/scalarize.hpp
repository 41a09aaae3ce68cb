#pragma once

#include <Eigen/Core>

#include <limits>
#include <stdexcept>

namespace clap {

enum class Scalarization { Chebyshev, Linear };

// Weighted-sum scalarization of a reward or value vector.
inline double linear_scalarize(Eigen::Ref<const Eigen::VectorXd> r, Eigen::Ref<const Eigen::VectorXd> w) {
  return w.dot(r);
}

// Weighted Chebyshev (L-infinity) distance to the utopian point z.
inline double chebyshev_distance(Eigen::Ref<const Eigen::VectorXd> v, Eigen::Ref<const Eigen::VectorXd> w,
                                 Eigen::Ref<const Eigen::VectorXd> z) {
  return (w.array() * (v - z).array().abs()).maxCoeff();
}

// Critic scalarization. The default negates the distance so that maximizing
// the scalar moves value vectors toward the utopian point; `literal_sign`
// keeps the raw distance for ablation.
inline double chebyshev_scalar(Eigen::Ref<const Eigen::VectorXd> v, Eigen::Ref<const Eigen::VectorXd> w,
                               Eigen::Ref<const Eigen::VectorXd> z, bool literal_sign = false) {
  const double d = chebyshev_distance(v, w, z);
  return literal_sign ? d : -d;
}

// TD error through the Chebyshev-scalarized critic; the vector reward enters
// as w . r.
inline double chebyshev_td(Eigen::Ref<const Eigen::VectorXd> r, Eigen::Ref<const Eigen::VectorXd> v_t,
                           Eigen::Ref<const Eigen::VectorXd> v_t1, Eigen::Ref<const Eigen::VectorXd> w,
                           Eigen::Ref<const Eigen::VectorXd> z, double gamma, bool terminal,
                           bool literal_sign = false) {
  const double bootstrap = terminal ? 0.0 : gamma * chebyshev_scalar(v_t1, w, z, literal_sign);
  return linear_scalarize(r, w) + bootstrap - chebyshev_scalar(v_t, w, z, literal_sign);
}

// Linear-mode TD error with the same shape.
inline double linear_td(Eigen::Ref<const Eigen::VectorXd> r, Eigen::Ref<const Eigen::VectorXd> v_t,
                        Eigen::Ref<const Eigen::VectorXd> v_t1, Eigen::Ref<const Eigen::VectorXd> w,
                        double gamma, bool terminal) {
  const double bootstrap = terminal ? 0.0 : gamma * linear_scalarize(v_t1, w);
  return linear_scalarize(r, w) + bootstrap - linear_scalarize(v_t, w);
}

// Tracks the per-objective best episode return seen so far; the utopian point
// is that best plus a fixed positive offset, so it dominates every observed
// return and never decreases.
class UtopianTracker {
 public:
  UtopianTracker(int objectives, double offset)
      : offset_(offset),
        best_(Eigen::VectorXd::Constant(objectives, -std::numeric_limits<double>::infinity())) {
    if (!(offset > 0.0)) throw std::invalid_argument("utopian offset must be positive");
  }

  void update(Eigen::Ref<const Eigen::VectorXd> episode_return) {
    best_ = best_.cwiseMax(episode_return);
    seen_ = true;
  }

  bool initialized() const { return seen_; }
  double offset() const { return offset_; }
  const Eigen::VectorXd& best() const { return best_; }
  Eigen::VectorXd utopia() const { return best_.array() + offset_; }

 private:
  double offset_;
  Eigen::VectorXd best_;
  bool seen_ = false;
};

}  // namespace clap
