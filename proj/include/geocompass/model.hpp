#pragma once

// The parameter triple every formula consumes.

#include <stdexcept>

namespace geocompass {

// lambda: rate of the direction-changing Poisson clock (> 0);
// c: speed along the current geodesic (>= 0);
// t: time horizon (>= 0).
struct ModelParams {
  double lambda = 1.0;
  double c = 1.0;
  double t = 1.0;
};

inline void validate(const ModelParams& p) {
  if (!(p.lambda > 0.0) || !(p.c >= 0.0) || !(p.t >= 0.0))
    throw std::invalid_argument("ModelParams: require lambda > 0, c >= 0, t >= 0");
}

}  // namespace geocompass
