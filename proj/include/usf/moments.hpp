#pragma once

#include <array>
#include <vector>

namespace usf {

// Symmetric second-moment tensor M_ij = <xi_i xi_j>, packed [11,12,13,22,23,33].
struct MomentState {
  std::array<double, 6> m{};

  double& operator()(int i, int j);
  double operator()(int i, int j) const;
  double trace() const { return m[0] + m[3] + m[5]; }

  static MomentState isotropic(double e = 3.0);
};

// Second moments close under shear + Maxwell collisions:
//   dM_ij/dt = -alpha (d_{i1} M_{2j} + d_{j1} M_{i2}) - 2 b0 (M_ij - tr(M)/3 d_ij)
// The collision part is traceless, so d tr(M)/dt = -2 alpha M_12 exactly.
MomentState closure_rhs(const MomentState& M, double alpha, double b0);

// Same flow seen in the frame rescaled at rate beta: adds -2 beta M.
MomentState rescaled_closure_rhs(const MomentState& M, double alpha, double b0,
                                 double beta);

struct MomentTrajectory {
  std::vector<double> t;
  std::vector<MomentState> M;
};

// Fixed-step classical RK4. Guard: dt * (2 b0 + alpha) < 0.1.
// Records every `cadence` time units (snapped to whole steps) plus t=0 and
// t_end. rescaled/beta select the rescaled flow.
MomentTrajectory integrate_moments(const MomentState& M0, double alpha,
                                   double b0, double dt, double t_end,
                                   double cadence = 0.0, bool rescaled = false,
                                   double beta = 0.0);

// Self-similar profile data: the unique positive root s of
//   s (s + 2 b0)^2 = (4/3) alpha^2 b0,
// beta = s/2, and the steady second-moment tensor with trace 3.
struct SelfSimilarSolution {
  double s = 0.0;
  double beta = 0.0;
  double residual = 0.0;  // cubic residual at the returned root
  MomentState steady;
};

SelfSimilarSolution growth_rate_exact(double alpha, double b0);

}  // namespace usf
