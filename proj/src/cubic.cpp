#include "mixsim/cubic.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace mixsim {

namespace {

constexpr double kMinHorizon = 1e-6;
constexpr double kResidualTol = 1e-8;

CubicSegment solve_cubic_bvp(double p0, double v0, double t0, double T,
                             const Eigen::RowVector4d& terminal_row, double terminal_rhs,
                             double pf) {
  // Local frame s in [0, T]; coefficient order (a, b, c, d).
  Eigen::Matrix4d A;
  A << 0, 0, 0, 1,                      // p(0)
       0, 0, 1, 0,                      // v(0)
       T * T * T, T * T, T, 1,          // p(T)
       terminal_row;                    // u(T) or v(T)
  Eigen::Vector4d rhs(p0, v0, pf, terminal_rhs);
  const Eigen::Vector4d x = A.partialPivLu().solve(rhs);
  const double residual = (A * x - rhs).cwiseAbs().maxCoeff();
  if (!(residual < kResidualTol))
    throw Error("cubic solve: boundary residual above tolerance");
  CubicSegment seg;
  seg.t_begin = t0;
  seg.t_end = t0 + T;
  seg.a = x[0];
  seg.b = x[1];
  seg.c = x[2];
  seg.d = x[3];
  return seg;
}

}  // namespace

CubicSegment solve_unconstrained(double p0, double v0, double t0, double pf, double tf) {
  const double T = tf - t0;
  if (!(T > kMinHorizon)) throw DegenerateError("solve_unconstrained: horizon too short");
  return solve_cubic_bvp(p0, v0, t0, T, Eigen::RowVector4d(6.0 * T, 2.0, 0.0, 0.0), 0.0, pf);
}

CubicSegment solve_stop_cubic(double p0, double v0, double t0, double p_stop, double ts) {
  const double T = ts - t0;
  if (!(T > kMinHorizon)) throw DegenerateError("solve_stop_cubic: horizon too short");
  return solve_cubic_bvp(p0, v0, t0, T, Eigen::RowVector4d(3.0 * T * T, 2.0 * T, 1.0, 0.0),
                         0.0, p_stop);
}

bool respects_bounds(const CubicSegment& seg, const Bounds& bounds, double margin) {
  if (seg.min_velocity() < bounds.v_min - margin) return false;
  if (seg.max_velocity() > bounds.v_max + margin) return false;
  if (seg.min_acceleration() < bounds.u_min - margin) return false;
  if (seg.max_acceleration() > bounds.u_max + margin) return false;
  return true;
}

bool respects_bounds_grid(const CubicSegment& seg, const Bounds& bounds, double grid_step,
                          double margin) {
  const int n = std::max(1, int(std::ceil(seg.duration() / grid_step)));
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? seg.t_end : seg.t_begin + grid_step * double(i);
    if (!bounds.speed_ok(seg.velocity(t), margin)) return false;
    if (!bounds.accel_ok(seg.acceleration(t), margin)) return false;
  }
  return true;
}

}  // namespace mixsim
