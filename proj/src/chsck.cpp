#include "spiked/chsck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spiked/errors.hpp"

namespace spiked {

namespace {

constexpr double kExpBudget = 700.0;

double beta_inverse(double beta) {
  if (!(beta > 0.0)) throw InvalidParameterError("beta must be positive (inf allowed)");
  return std::isinf(beta) ? 0.0 : 1.0 / beta;
}

void check_rule(const QuadratureRule& rule) {
  if (rule.size() < 1) throw InvalidParameterError("empty quadrature rule");
}

void check_grid_match(std::size_t got, const TimeGrid& grid, const char* what) {
  if (got != static_cast<std::size_t>(grid.n_points())) {
    throw GridMismatchError(std::string(what) + ": array size does not match the grid");
  }
}

// All accumulators below are kept in "moving" form, e.g.
//   B_j(t) = int_0^t g(s) e^{sigma_j (t - s)} ds,
// advanced by one factor e^{sigma_j dt} per step, so the largest stored
// magnitude is the size of the outputs themselves. The budget is then set by
// the growth rate of g (and nothing at all once the scale shift equals it).
void check_exponent_budget(const TimeGrid& grid, double shift, double growth) {
  if (2.0 * grid.t_end * std::max(growth - shift, 0.0) > kExpBudget) {
    throw OverflowGuardError(
        "exponent budget exceeded; increase the scale shift or shorten t_end");
  }
}

}  // namespace

Moments Moments::from_params(double lambda, double rho) {
  if (!(lambda > 0.0)) throw InvalidParameterError("moments: lambda must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidParameterError("moments: rho must be in [0,1]");
  return Moments{lambda, std::sqrt(lambda) * rho, 1.0};
}

void Moments::validate() const {
  if (!(e_u2 > 0.0) || !(e_y02 > 0.0)) {
    throw InvalidParameterError("moments: E[u^2] and E[Y0^2] must be positive");
  }
  if (e_y0u * e_y0u > e_u2 * e_y02 * (1.0 + 1e-12)) {
    throw InvalidParameterError("moments: Cauchy-Schwarz violated");
  }
}

double growth_rate_estimate(const QuadratureRule& rule, double e_u2) {
  check_rule(rule);
  const double top = rule.max_node();
  auto excess = [&](double z) {
    double s = 0.0;
    for (int j = 0; j < rule.size(); ++j) s += rule.weights[j] / (z - rule.nodes[j]);
    return e_u2 * s - 1.0;
  };
  double lo = top + 1e-14 * std::max(1.0, std::abs(top));
  double hi = top + e_u2 + 1.0;
  if (excess(lo) <= 0.0) return top;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> solve_g_volterra(const Moments& moments, const QuadratureRule& rule,
                                     const TimeGrid& grid, double scale_shift) {
  moments.validate();
  check_rule(rule);
  check_exponent_budget(grid, scale_shift, growth_rate_estimate(rule, moments.e_u2));

  const int m = rule.size();
  const int points = grid.n_points();
  const double dt = grid.dt;
  const double half_dt = 0.5 * dt;
  const double a = moments.e_y0u;
  const double lam = moments.e_u2;

  std::vector<double> step(m), pos(m, 1.0), conv(m, 0.0);
  for (int j = 0; j < m; ++j) step[j] = std::exp((rule.nodes[j] - scale_shift) * dt);

  std::vector<double> g(points);
  g[0] = a;  // M(0) = 1 and the convolution vanishes at t = 0
  for (int k = 1; k < points; ++k) {
    double known = 0.0, mgf_k = 0.0;
    for (int j = 0; j < m; ++j) {
      conv[j] = step[j] * (conv[j] + half_dt * g[k - 1]);
      pos[j] *= step[j];
      known += rule.weights[j] * conv[j];
      mgf_k += rule.weights[j] * pos[j];
    }
    // The diagonal trapezoid weight contributes lam dt/2 of the unknown.
    g[k] = (a * mgf_k + lam * known) / (1.0 - lam * half_dt);
    for (int j = 0; j < m; ++j) conv[j] += half_dt * g[k];
  }
  return g;
}

std::vector<double> compute_phi(const std::vector<double>& g, const Moments& moments,
                                const QuadratureRule& rule, const TimeGrid& grid,
                                double scale_shift) {
  moments.validate();
  check_rule(rule);
  check_grid_match(g.size(), grid, "compute_phi");

  const int m = rule.size();
  const int points = grid.n_points();
  const double half_dt = 0.5 * grid.dt;
  const double a = moments.e_y0u;
  const double lam = moments.e_u2;

  std::vector<double> step(m), pos(m, 1.0), conv(m, 0.0);
  for (int j = 0; j < m; ++j) step[j] = std::exp((rule.nodes[j] - scale_shift) * grid.dt);

  std::vector<double> phi(points);
  for (int k = 0; k < points; ++k) {
    if (k > 0) {
      for (int j = 0; j < m; ++j) {
        conv[j] = step[j] * (conv[j] + half_dt * g[k - 1]) + half_dt * g[k];
        pos[j] *= step[j];
      }
    }
    // e^{2 sigma t} A_j = pos * conv and e^{2 sigma t} A_j^2 = conv^2.
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      sum += rule.weights[j] * (2.0 * moments.e_y02 * pos[j] * pos[j] +
                                4.0 * a * pos[j] * conv[j] + 2.0 * lam * conv[j] * conv[j]);
    }
    phi[k] = sum;
  }
  return phi;
}

FSolveResult solve_big_f(const std::vector<double>& phi, const QuadratureRule& rule,
                         const TimeGrid& grid, double beta, double scale_shift) {
  check_rule(rule);
  check_grid_match(phi.size(), grid, "solve_big_f");
  const double beta_inv = beta_inverse(beta);

  const int m = rule.size();
  const int points = grid.n_points();
  const double dt = grid.dt;
  const double half_dt = 0.5 * dt;
  const double c = scale_shift;

  // D_j(t) = int_0^t F(s) e^{2 sigma_j (t-s)} ds, advanced per step.
  std::vector<double> step2(m), conv(m, 0.0);
  for (int j = 0; j < m; ++j) {
    step2[j] = std::exp(2.0 * (rule.nodes[j] - c) * dt);
  }

  FSolveResult out;
  out.big_f.resize(points);
  out.h.resize(points);

  double f_cur = 1.0;
  double rhs = phi[0];
  out.big_f[0] = 1.0;
  out.h[0] = 0.5 * rhs;
  double fdot = rhs - 2.0 * c * f_cur;  // F' of the shifted variable

  for (int k = 1; k < points; ++k) {
    double weighted = 0.0;
    for (int j = 0; j < m; ++j) {
      conv[j] = step2[j] * (conv[j] + half_dt * f_cur);
      weighted += rule.weights[j] * conv[j];
    }
    const double explicit_part = phi[k] + 2.0 * beta_inv * weighted;
    // Trapezoid with the implicit diagonal solved as a scalar equation:
    // F'_k = explicit + (beta^{-1} dt - 2c) F_k.
    const double denom = 1.0 - half_dt * (beta_inv * dt - 2.0 * c);
    const double f_new = (f_cur + half_dt * (fdot + explicit_part)) / denom;
    const double rhs_new = explicit_part + beta_inv * dt * f_new;

    for (int j = 0; j < m; ++j) conv[j] += half_dt * f_new;
    f_cur = f_new;
    fdot = rhs_new - 2.0 * c * f_new;
    out.big_f[k] = f_new;
    out.h[k] = 0.5 * rhs_new;  // h from the right-hand side, not by differencing
  }
  return out;
}

RKResult recover_rk(const std::vector<double>& g, const std::vector<double>& big_f,
                    const std::vector<double>& h) {
  if (g.size() != big_f.size() || h.size() != big_f.size()) {
    throw GridMismatchError("recover_rk: input arrays differ in length");
  }
  RKResult out;
  out.overlap.resize(g.size());
  out.autocorr.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!(big_f[k] > 0.0)) {
      throw PositivityError("recover_rk: F <= 0 (integration failure)");
    }
    out.overlap[k] = g[k] / std::sqrt(big_f[k]);
    out.autocorr[k] = h[k] / big_f[k];
  }
  return out;
}

namespace {

std::vector<double> ratio_from(const std::vector<double>& num, const std::vector<double>& den,
                               double lambda) {
  std::vector<double> out(num.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = num[k] * num[k] / (lambda * den[k]);
  }
  return out;
}

}  // namespace

ChsckSolution solve_fast(const Moments& moments, const QuadratureRule& rule,
                         const TimeGrid& grid, double beta) {
  moments.validate();
  const double growth = growth_rate_estimate(rule, moments.e_u2);
  // Default horizons need no rescaling; past the budget, evolve e^{-ct} g and
  // e^{-2ct} F instead. The ratio outputs are scale invariant.
  const double shift = (growth * grid.t_end > 300.0) ? growth : 0.0;

  ChsckSolution sol;
  sol.grid = grid;
  sol.rule = rule;
  sol.moments = moments;
  sol.scale_shift = shift;
  sol.route = "fast";
  sol.g = solve_g_volterra(moments, rule, grid, shift);
  sol.phi = compute_phi(sol.g, moments, rule, grid, shift);
  auto fh = solve_big_f(sol.phi, rule, grid, beta, shift);
  sol.big_f = std::move(fh.big_f);
  sol.h = std::move(fh.h);
  auto rk = recover_rk(sol.g, sol.big_f, sol.h);
  sol.overlap = std::move(rk.overlap);
  sol.autocorr = std::move(rk.autocorr);
  sol.corr_ratio = ratio_from(sol.g, sol.h, moments.e_u2);
  return sol;
}

std::vector<double> correlation_ratio(const ChsckSolution& solution) {
  if (!solution.g.empty() && !solution.h.empty()) {
    return ratio_from(solution.g, solution.h, solution.moments.e_u2);
  }
  return ratio_from(solution.overlap, solution.autocorr, solution.moments.e_u2);
}

PicardResult solve_picard_general(const std::function<double(double)>& fprime, double beta,
                                  const Moments& moments, const QuadratureRule& rule,
                                  const TimeGrid& grid, const PicardOptions& options) {
  moments.validate();
  check_rule(rule);
  if (!(options.tol > 0.0)) throw InvalidParameterError("picard: tol must be positive");
  check_exponent_budget(grid, 0.0, growth_rate_estimate(rule, moments.e_u2));
  const double beta_inv = beta_inverse(beta);

  const int m = rule.size();
  const int points = grid.n_points();
  const double dt = grid.dt;
  const double half_dt = 0.5 * dt;
  const double a = moments.e_y0u;
  const double lam = moments.e_u2;

  std::vector<double> step(m);
  for (int j = 0; j < m; ++j) step[j] = std::exp(rule.nodes[j] * dt);

  PicardResult res;
  res.overlap.resize(points);
  res.autocorr.resize(points);

  // Initial guess: the no-interaction terms, already exact at t = 0.
  {
    std::vector<double> pos(m, 1.0);
    for (int k = 0; k < points; ++k) {
      double m1 = 0.0, m2 = 0.0;
      for (int j = 0; j < m; ++j) {
        m1 += rule.weights[j] * pos[j];
        m2 += rule.weights[j] * pos[j] * pos[j];
        pos[j] *= step[j];
      }
      res.overlap[k] = a * m1;
      res.autocorr[k] = moments.e_y02 * m2;
    }
  }

  // Per-atom moving functionals of the current iterate:
  //   mov_m = e^{sigma t - e(t)},
  //   mov_p = int R(r) e^{sigma (t-r)} H_r^t dr,
  //   mov_n = int e^{2 sigma (t-r)} (H_r^t)^2 dr.
  std::vector<double> mov_m(m), mov_p(m), mov_n(m);
  std::vector<double> r_new(points), k_new(points);

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    std::fill(mov_m.begin(), mov_m.end(), 1.0);
    std::fill(mov_p.begin(), mov_p.end(), 0.0);
    std::fill(mov_n.begin(), mov_n.end(), 0.0);
    double dh_moving = 0.0;  // int |DH_u^t| du in moving form
    double fp_prev = fprime(res.autocorr[0]);
    double min_increment = 0.0;
    double e_total = 0.0;

    for (int k = 0; k < points; ++k) {
      if (k > 0) {
        const double fp = fprime(res.autocorr[k]);
        const double inc = half_dt * (fp_prev + fp);
        min_increment = std::min(min_increment, inc);
        e_total += inc;
        const double decay = std::exp(-inc);
        dh_moving = decay * (dh_moving + half_dt * fp_prev) + half_dt * fp;
        for (int j = 0; j < m; ++j) {
          const double v = step[j] * decay;
          mov_p[j] = v * (mov_p[j] + half_dt * res.overlap[k - 1]) +
                     half_dt * res.overlap[k];
          mov_n[j] = v * v * (mov_n[j] + half_dt) + half_dt;
          mov_m[j] *= v;
        }
        fp_prev = fp;
      }
      res.dh_integral_max = std::max(res.dh_integral_max, dh_moving);

      double sum_r = 0.0, sum_k = 0.0, m1 = 0.0;
      for (int j = 0; j < m; ++j) {
        const double w = rule.weights[j];
        m1 += w * mov_m[j];
        sum_r += w * mov_p[j];
        sum_k += w * (moments.e_y02 * mov_m[j] * mov_m[j] + beta_inv * mov_n[j] +
                      2.0 * a * mov_m[j] * mov_p[j] + lam * mov_p[j] * mov_p[j]);
      }
      r_new[k] = a * m1 + lam * sum_r;
      k_new[k] = sum_k;
    }

    // Bounds on the exponential factors: H in [0,1] and int |DH| <= 1.
    res.h_factor_max = std::max(res.h_factor_max, std::exp(-min_increment));
    res.h_factor_min = std::min(res.h_factor_min, std::exp(-e_total));
    if (res.h_factor_max > 1.0 + 1e-9) {
      throw InternalInconsistencyError("picard: an H factor left [0,1]; f' must be nonnegative");
    }
    if (res.dh_integral_max > 1.0 + 1e-9) {
      throw InternalInconsistencyError("picard: int |DH| exceeded 1");
    }

    double residual = 0.0;
    for (int k = 0; k < points; ++k) {
      residual = std::max(residual, std::abs(r_new[k] - res.overlap[k]));
      residual = std::max(residual, std::abs(k_new[k] - res.autocorr[k]));
    }
    res.overlap.swap(r_new);
    res.autocorr.swap(k_new);
    res.iterations = iter;
    res.residual = residual;
    res.residual_history.push_back(residual);
    if (residual < options.tol) return res;
  }
  throw NoConvergenceError("picard: no convergence after max_iter (residual " +
                               std::to_string(res.residual) + ")",
                           res.residual);
}

Eigen::MatrixXd evaluate_k_offdiag(const std::vector<double>& overlap,
                                   const std::vector<double>& autocorr,
                                   const std::function<double(double)>& fprime, double beta,
                                   const Moments& moments, const QuadratureRule& rule,
                                   const TimeGrid& grid, int subsample,
                                   std::vector<int>* steps) {
  moments.validate();
  check_rule(rule);
  check_grid_match(overlap.size(), grid, "evaluate_k_offdiag");
  check_grid_match(autocorr.size(), grid, "evaluate_k_offdiag");
  if (subsample < 1) throw InvalidParameterError("evaluate_k_offdiag: subsample must be >= 1");
  const double beta_inv = beta_inverse(beta);

  const int m = rule.size();
  const int points = grid.n_points();
  const double half_dt = 0.5 * grid.dt;
  const double a = moments.e_y0u;
  const double lam = moments.e_u2;

  // Cumulative e(t) = int f'(K), plus a budget check before exponentiating.
  std::vector<double> e_cum(points, 0.0);
  for (int k = 1; k < points; ++k) {
    e_cum[k] = e_cum[k - 1] +
               half_dt * (fprime(autocorr[k - 1]) + fprime(autocorr[k]));
  }
  double max_abs_node = 0.0;
  for (double s : rule.nodes) max_abs_node = std::max(max_abs_node, std::abs(s));
  if (2.0 * (e_cum[points - 1] + max_abs_node * grid.t_end) > kExpBudget) {
    throw OverflowGuardError("evaluate_k_offdiag: exponent budget exceeded");
  }

  std::vector<int> snap_steps;
  for (int k = 0; k < points; k += subsample) snap_steps.push_back(k);
  const int ns = static_cast<int>(snap_steps.size());

  std::vector<double> e_at(ns);
  Eigen::MatrixXd p_snap(m, ns), n_snap(m, ns), pos_snap(m, ns);

  std::vector<double> p_acc(m, 0.0), n_acc(m, 0.0), p_prev(m), n_prev(m);
  std::vector<double> pos(m, 1.0), neg(m, 1.0), step_pos(m), step_neg(m);
  for (int j = 0; j < m; ++j) {
    step_pos[j] = std::exp(rule.nodes[j] * grid.dt);
    step_neg[j] = 1.0 / step_pos[j];
  }

  int snap = 0;
  for (int k = 0; k < points; ++k) {
    if (k > 0) {
      const double grow = std::exp(e_cum[k]);
      const double cur_r = grow * overlap[k];
      const double cur_n = grow * grow;
      for (int j = 0; j < m; ++j) {
        const double pj = cur_r * neg[j];
        const double nj = cur_n * neg[j] * neg[j];
        p_acc[j] += half_dt * (p_prev[j] + pj);
        n_acc[j] += half_dt * (n_prev[j] + nj);
        p_prev[j] = pj;
        n_prev[j] = nj;
      }
    } else {
      for (int j = 0; j < m; ++j) {
        p_prev[j] = overlap[0];
        n_prev[j] = 1.0;
      }
    }
    if (snap < ns && snap_steps[snap] == k) {
      e_at[snap] = e_cum[k];
      for (int j = 0; j < m; ++j) {
        p_snap(j, snap) = p_acc[j];
        n_snap(j, snap) = n_acc[j];
        pos_snap(j, snap) = pos[j];
      }
      ++snap;
    }
    for (int j = 0; j < m; ++j) {
      pos[j] *= step_pos[j];
      neg[j] *= step_neg[j];
    }
  }

  Eigen::MatrixXd out(ns, ns);
  for (int ia = 0; ia < ns; ++ia) {
    for (int ib = 0; ib <= ia; ++ib) {  // t_b <= t_a
      const double decay = std::exp(-e_at[ia] - e_at[ib]);
      double sum = 0.0;
      for (int j = 0; j < m; ++j) {
        const double cross = pos_snap(j, ia) * pos_snap(j, ib);
        sum += rule.weights[j] * cross *
               (moments.e_y02 + beta_inv * n_snap(j, ib) +
                a * (p_snap(j, ia) + p_snap(j, ib)) +
                lam * p_snap(j, ia) * p_snap(j, ib));
      }
      out(ia, ib) = decay * sum;
      out(ib, ia) = out(ia, ib);  // mirrored, symmetric by construction
    }
  }
  if (steps) *steps = snap_steps;
  return out;
}

}  // namespace spiked
