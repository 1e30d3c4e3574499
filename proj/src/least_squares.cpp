#include "surfdist/least_squares.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "surfdist/errors.hpp"

namespace surfdist {

namespace {

double half_squared_norm(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return 0.5 * s;
}

}  // namespace

LeastSquaresResult levenberg_marquardt(const ResidualFn& residuals, std::vector<double> x0,
                                       const LeastSquaresOptions& options) {
  if (x0.empty()) throw InvalidArgument("least squares needs at least one parameter");
  const auto n = static_cast<Eigen::Index>(x0.size());

  LeastSquaresResult result;
  result.x = std::move(x0);
  auto r = residuals(result.x);
  result.cost = half_squared_norm(r);
  double damping = options.initial_damping;

  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    const auto m = static_cast<Eigen::Index>(r.size());
    Eigen::MatrixXd J(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = options.difference_step * (1.0 + std::abs(result.x[j]));
      auto xp = result.x, xm = result.x;
      xp[j] += h;
      xm[j] -= h;
      const auto rp = residuals(xp);
      const auto rm = residuals(xm);
      for (Eigen::Index i = 0; i < m; ++i) J(i, j) = (rp[i] - rm[i]) / (2.0 * h);
    }
    const Eigen::Map<const Eigen::VectorXd> rv(r.data(), m);
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * rv;
    if (g.lpNorm<Eigen::Infinity>() == 0.0) {
      result.converged = true;
      break;
    }

    const Eigen::Map<const Eigen::VectorXd> xv(result.x.data(), n);
    const double x_scale = 1.0 + xv.norm();
    bool accepted = false;
    // Raise the damping until the step lowers the cost or becomes negligible.
    while (!accepted) {
      Eigen::MatrixXd damped = A;
      for (Eigen::Index j = 0; j < n; ++j) damped(j, j) += damping * std::max(A(j, j), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      if (step.norm() <= options.step_tolerance * x_scale) {
        result.converged = true;
        break;
      }
      std::vector<double> candidate(result.x);
      for (Eigen::Index j = 0; j < n; ++j) candidate[j] += step[j];
      auto r_new = residuals(candidate);
      const double cost_new = half_squared_norm(r_new);
      if (std::isfinite(cost_new) && cost_new < result.cost) {
        result.x = std::move(candidate);
        r = std::move(r_new);
        result.cost = cost_new;
        damping = std::max(damping / 3.0, 1e-12);
        accepted = true;
        if (step.norm() <= options.step_tolerance * x_scale) result.converged = true;
      } else {
        damping *= 4.0;
        if (damping > 1e16) {
          result.converged = true;
          break;
        }
      }
    }
    if (result.converged) break;
  }
  return result;
}

}  // namespace surfdist
