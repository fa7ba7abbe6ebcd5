#pragma once
// Boundary-value solves for the minimum-effort cubic family. Minimizing
// 0.5 * integral(u^2) with free terminal speed yields a cubic position
// profile with zero terminal acceleration; fixing the terminal speed instead
// (stop arcs) drops that condition for v(tf) = 0.

#include "mixsim/trajectory.hpp"
#include "mixsim/types.hpp"

namespace mixsim {

// Cubic with p(t0) = p0, v(t0) = v0, p(tf) = pf, u(tf) = 0.
// Throws DegenerateError when tf - t0 is not meaningfully positive.
CubicSegment solve_unconstrained(double p0, double v0, double t0, double pf, double tf);

// Stop arc: p(t0) = p0, v(t0) = v0, p(ts) = p_stop, v(ts) = 0.
CubicSegment solve_stop_cubic(double p0, double v0, double t0, double p_stop, double ts);

// Exact bound check over the whole validity interval (velocity extrema are
// endpoint-or-vertex, acceleration is linear).
bool respects_bounds(const CubicSegment& seg, const Bounds& bounds, double margin = 1e-6);

// Sampled bound check on a fixed grid, endpoint included. Slower; kept for
// oracle-style verification.
bool respects_bounds_grid(const CubicSegment& seg, const Bounds& bounds,
                          double grid_step = 0.01, double margin = 1e-6);

}  // namespace mixsim
