#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spiked/spectral.hpp"
#include "spiked/time_grid.hpp"

namespace spiked {

/// Limiting second moments under the product measure pi_infinity.
struct Moments {
  double e_u2 = 1.0;   // E[u^2] = lambda
  double e_y0u = 0.0;  // E[Y0 u] = sqrt(lambda) rho
  double e_y02 = 1.0;  // E[Y0^2] = 1

  static Moments from_params(double lambda, double rho);
  void validate() const;
};

/// Deterministic limit solution on a grid. When scale_shift = c is nonzero
/// the stored g, F, h carry the factors e^{-ct}, e^{-2ct}, e^{-2ct}; the
/// recovered overlap/autocorr and corr_ratio are scale-invariant either way.
struct ChsckSolution {
  TimeGrid grid;
  std::vector<double> g;
  std::vector<double> big_f;  // F = E^2
  std::vector<double> h;      // F'/2, evaluated from the right-hand side
  std::vector<double> phi;
  std::vector<double> overlap;   // R = g / sqrt(F)
  std::vector<double> autocorr;  // K(t,t) = h / F
  std::vector<double> corr_ratio;
  QuadratureRule rule;
  Moments moments;
  double scale_shift = 0.0;
  std::string route = "fast";
  int picard_iterations = 0;
  double picard_residual = 0.0;
};

/// g(t) = E[Y0 u] M(t) + E[u^2] int_0^t g(s) M(t-s) ds by product-trapezoid
/// stepping with per-atom accumulators A_j(t) = int_0^t g(s) e^{-sigma_j s} ds;
/// the diagonal trapezoid weight is solved as a scalar linear equation per
/// step. O(n_steps * m). A nonzero scale_shift c solves for e^{-ct} g(t).
std::vector<double> solve_g_volterra(const Moments& moments, const QuadratureRule& rule,
                                     const TimeGrid& grid, double scale_shift = 0.0);

/// Phi(t) = 2 E[Y0^2] M(2t) + 4 E[Y0 u] sum_j w_j e^{2 t sigma_j} A_j(t)
///          + 2 E[u^2] sum_j w_j e^{2 t sigma_j} A_j(t)^2.
/// The (s1, s2) double integral factorizes per atom.
std::vector<double> compute_phi(const std::vector<double>& g, const Moments& moments,
                                const QuadratureRule& rule, const TimeGrid& grid,
                                double scale_shift = 0.0);

struct FSolveResult {
  std::vector<double> big_f;
  std::vector<double> h;
};

/// Integrates F'(t) = 2 beta^{-1} sum_j w_j e^{2 t sigma_j} C_j(t) + Phi(t),
/// C_j(t) = int_0^t F(s) e^{-2 sigma_j s} ds, F(0) = 1, trapezoidal with the
/// implicit diagonal weight handled exactly; h = F'/2 from the right-hand side.
FSolveResult solve_big_f(const std::vector<double>& phi, const QuadratureRule& rule,
                         const TimeGrid& grid, double beta, double scale_shift = 0.0);

struct RKResult {
  std::vector<double> overlap;
  std::vector<double> autocorr;
};

/// R = g / sqrt(F), K = h / F. Throws PositivityError if F is not positive.
RKResult recover_rk(const std::vector<double>& g, const std::vector<double>& big_f,
                    const std::vector<double>& h);

/// Full fast route for the quadratic confinement f(x) = x^2/2; picks the
/// rescaling shift automatically when the growth budget requires it.
ChsckSolution solve_fast(const Moments& moments, const QuadratureRule& rule,
                         const TimeGrid& grid, double beta);

struct PicardOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

struct PicardResult {
  std::vector<double> overlap;
  std::vector<double> autocorr;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  // Telemetry for the exponential-factor bounds checked every iteration:
  // every H must lie in [0,1] and every int_0^t |DH| must stay <= 1.
  double h_factor_min = 1.0;
  double h_factor_max = 1.0;
  double dh_integral_max = 0.0;
};

/// Picard iteration of the limiting system restricted to the diagonal, for a
/// general nonnegative Lipschitz f'. All five structural terms of the K
/// equation are evaluated with trapezoidal quadrature and per-atom
/// accumulators. Throws NoConvergenceError after max_iter.
PicardResult solve_picard_general(const std::function<double(double)>& fprime, double beta,
                                  const Moments& moments, const QuadratureRule& rule,
                                  const TimeGrid& grid, const PicardOptions& options = {});

/// Explicit two-time evaluation of K(t,s) on a subsampled grid from the
/// solved diagonal; symmetric by construction. Fills `steps` with the chosen
/// subsample step indices when non-null.
Eigen::MatrixXd evaluate_k_offdiag(const std::vector<double>& overlap,
                                   const std::vector<double>& autocorr,
                                   const std::function<double(double)>& fprime, double beta,
                                   const Moments& moments, const QuadratureRule& rule,
                                   const TimeGrid& grid, int subsample,
                                   std::vector<int>* steps = nullptr);

/// R^2(t) / (lambda K(t,t)) = g^2(t) / (lambda h(t)) per grid point.
std::vector<double> correlation_ratio(const ChsckSolution& solution);

/// Largest root of E[u^2] S(z) = 1 above the top atom: the exponential growth
/// rate of g, used for the rescaling shift and the overflow guard.
double growth_rate_estimate(const QuadratureRule& rule, double e_u2);

}  // namespace spiked
