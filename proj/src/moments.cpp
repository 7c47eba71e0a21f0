#include "usf/moments.hpp"

#include <cmath>
#include <string>

#include "usf/errors.hpp"

namespace usf {
namespace {

// index into the packed symmetric tensor
constexpr int kPack[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};

}  // namespace

double& MomentState::operator()(int i, int j) { return m[kPack[i][j]]; }
double MomentState::operator()(int i, int j) const { return m[kPack[i][j]]; }

MomentState MomentState::isotropic(double e) {
  MomentState s;
  s.m = {e / 3.0, 0.0, 0.0, e / 3.0, 0.0, e / 3.0};
  return s;
}

MomentState closure_rhs(const MomentState& M, double alpha, double b0) {
  const double tr3 = M.trace() / 3.0;
  MomentState r;
  // shear part: -alpha (d_{i1} M_{2j} + d_{j1} M_{i2})
  r.m[0] = -2.0 * alpha * M.m[1];  // 11
  r.m[1] = -alpha * M.m[3];        // 12
  r.m[2] = -alpha * M.m[4];        // 13
  r.m[3] = 0.0;                    // 22
  r.m[4] = 0.0;                    // 23
  r.m[5] = 0.0;                    // 33
  // collision part: -2 b0 (M - tr/3 I), traceless
  r.m[0] -= 2.0 * b0 * (M.m[0] - tr3);
  r.m[1] -= 2.0 * b0 * M.m[1];
  r.m[2] -= 2.0 * b0 * M.m[2];
  r.m[3] -= 2.0 * b0 * (M.m[3] - tr3);
  r.m[4] -= 2.0 * b0 * M.m[4];
  r.m[5] -= 2.0 * b0 * (M.m[5] - tr3);
  return r;
}

MomentState rescaled_closure_rhs(const MomentState& M, double alpha, double b0,
                                 double beta) {
  MomentState r = closure_rhs(M, alpha, b0);
  for (int k = 0; k < 6; ++k) r.m[k] -= 2.0 * beta * M.m[k];
  return r;
}

MomentTrajectory integrate_moments(const MomentState& M0, double alpha,
                                   double b0, double dt, double t_end,
                                   double cadence, bool rescaled, double beta) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive", "run.dt");
  if (t_end < 0.0) throw ConfigError("t_end must be >= 0", "run.t_end");
  if (!(dt * (2.0 * b0 + alpha) < 0.1))
    throw GuardError("moment integrator requires dt*(2*b0 + alpha) < 0.1, got " +
                         std::to_string(dt * (2.0 * b0 + alpha)),
                     "run.dt");

  auto rhs = [&](const MomentState& M) {
    return rescaled ? rescaled_closure_rhs(M, alpha, b0, beta)
                    : closure_rhs(M, alpha, b0);
  };

  const long long n_steps = std::llround(std::ceil(t_end / dt - 1e-9));
  const long long stride =
      cadence > 0.0 ? std::max(1LL, std::llround(cadence / dt)) : 1;

  MomentTrajectory traj;
  traj.t.reserve(std::size_t(n_steps / stride) + 2);
  MomentState M = M0;
  traj.t.push_back(0.0);
  traj.M.push_back(M);
  for (long long step = 1; step <= n_steps; ++step) {
    const MomentState k1 = rhs(M);
    MomentState y;
    for (int k = 0; k < 6; ++k) y.m[k] = M.m[k] + 0.5 * dt * k1.m[k];
    const MomentState k2 = rhs(y);
    for (int k = 0; k < 6; ++k) y.m[k] = M.m[k] + 0.5 * dt * k2.m[k];
    const MomentState k3 = rhs(y);
    for (int k = 0; k < 6; ++k) y.m[k] = M.m[k] + dt * k3.m[k];
    const MomentState k4 = rhs(y);
    for (int k = 0; k < 6; ++k)
      M.m[k] += dt / 6.0 * (k1.m[k] + 2.0 * k2.m[k] + 2.0 * k3.m[k] + k4.m[k]);
    if (step % stride == 0 || step == n_steps) {
      traj.t.push_back(double(step) * dt);
      traj.M.push_back(M);
    }
  }
  return traj;
}

SelfSimilarSolution growth_rate_exact(double alpha, double b0) {
  if (!(b0 > 0.0)) throw ConfigError("b0 must be positive");
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0", "run.alpha");

  SelfSimilarSolution sol;
  if (alpha == 0.0) {
    sol.steady = MomentState::isotropic(3.0);
    return sol;
  }

  const double K = (4.0 / 3.0) * alpha * alpha * b0;
  auto f = [&](double s) { return s * (s + 2.0 * b0) * (s + 2.0 * b0) - K; };

  // f is strictly increasing for s >= 0 with f(0) < 0: bracket then bisect,
  // finish with Newton.
  double lo = 0.0, hi = std::max(alpha, std::cbrt(K));
  while (f(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-18 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double g = s + 2.0 * b0;
    const double df = g * g + 2.0 * s * g;
    s -= f(s) / df;
  }

  sol.s = s;
  sol.beta = 0.5 * s;
  sol.residual = f(s);

  const double e = 3.0;
  const double m22 = 2.0 * b0 * e / (3.0 * (s + 2.0 * b0));
  sol.steady.m = {e - 2.0 * m22, -s * e / (2.0 * alpha), 0.0, m22, 0.0, m22};
  return sol;
}

}  // namespace usf
