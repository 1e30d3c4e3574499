#pragma once

#include <functional>
#include <vector>

namespace surfdist {

struct LeastSquaresOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;  // relative step norm that counts as converged
  double initial_damping = 1e-3;
  double difference_step = 1e-6;  // relative central-difference step
};

struct LeastSquaresResult {
  std::vector<double> x;
  double cost = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

// Damped Gauss-Newton (Levenberg-Marquardt) with a central-difference Jacobian.
LeastSquaresResult levenberg_marquardt(const ResidualFn& residuals, std::vector<double> x0,
                                       const LeastSquaresOptions& options = {});

}  // namespace surfdist
