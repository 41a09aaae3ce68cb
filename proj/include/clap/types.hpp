#pragma once

#include <Eigen/Core>

namespace clap {

using ArrayXb = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Per-action legality flags over the global action index space.
using MaskArray = ArrayXb;

}  // namespace clap
