"""Backward adjoint solver and its characteristic-representation oracles.

The adjoint problem runs backward in time and age from terminal data at
t = T, with zero inflow at the maximal age and a nonlocal source that feeds
the newborn trace back into every age:

    dw/dt + dw/da + (k w_x)_x - mu w = -beta(t, a, x) w(t, 0, x) + h,
    w(T, a, x) = wT(a, x),      w(t, A, x) = 0,      w(t, a, 0) = w(t, a, 1) = 0.

Integrating along a characteristic from (t_n, a_j) to (t_{n+1}, a_{j+1}) and
treating dispersion/mortality implicitly at the earlier (unknown) point gives
the backward step

    (I + dt*(-L_k + mu(t_n, a_j, .))) w(t_n, a_j, .)
        = w(t_{n+1}, a_{j+1}, .) + dt * (beta(t_n, a_j, .) * w(t_n, 0, .) - h(t_n, a_j, .)).

Within each level the age-zero row is solved FIRST: its own source vanishes
(newborns are not fertile), after which every other age has w(t_n, 0, .)
available.  The matrices are exactly the ones the forward sweep factors at
the same level, which is what makes the discrete duality identity exact for
arbitrary mortality.

Two independent representations of the same solution are provided as
oracles: the age-zero trace as a pure dispersion/mortality evolution of
terminal data read along the characteristic (exact whenever fertility
vanishes on ages up to T), and the characteristic integral reconstructing
w(t, a) from the newborn trace in the region whose characteristics exit
through the maximal age before time T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Field, inner_product, rate_level_block, TOL_ABS
from .stepping import LevelOperators


@dataclass
class AdjointProblem:
    """Terminal data, optional distributed source, and support bookkeeping.

    When `require_box_support` is set, the terminal data must vanish at ages
    below the observation threshold (the form used by observability and
    control); violations raise at construction.
    """

    coeffs: object
    grid: object
    wT: Field
    source_h: Field | None = None
    require_box_support: bool = False

    def __post_init__(self):
        if self.wT.kind != "age_gene":
            raise ValueError("wT must be an age_gene field")
        if not np.all(np.isfinite(self.wT.values)):
            raise ValueError("wT contains non-finite values")
        if self.source_h is not None and self.source_h.kind != "trajectory":
            raise ValueError("source_h must be a trajectory field")
        if self.require_box_support:
            low = np.max(np.abs(self.wT.values[: self.grid.delta_index]))
            if low > TOL_ABS:
                raise ValueError(
                    "terminal data must vanish at ages below the observation "
                    f"threshold (max abs {low:.3g} found)"
                )


def solve_adjoint(problem: AdjointProblem) -> Field:
    """Run the backward scheme; returns the full trajectory field."""
    grid, coeffs = problem.grid, problem.coeffs
    nt, na = grid.nt, grid.na
    dt = grid.dt
    ops = LevelOperators(coeffs, grid)
    h = None if problem.source_h is None else problem.source_h.values

    w = np.zeros((nt + 1, na + 1, grid.nx + 1))
    w[nt] = problem.wT.values
    w[nt, :, 0] = 0.0
    w[nt, :, -1] = 0.0

    for n in range(nt - 1, -1, -1):
        level = ops.level(n)
        w[n, na, :] = 0.0
        # age-zero row first: its fertility factor is zero by hypothesis
        rhs0 = w[n + 1, 1, 1:-1]
        if h is not None:
            rhs0 = rhs0 - dt * h[n, 0, 1:-1]
        w[n, 0, 1:-1] = level.solve(rhs0[None, :], rows=slice(0, 1))[0]
        # remaining interior ages, all fed by the fresh newborn trace
        beta_rows = rate_level_block(coeffs.beta, n, grid)[1:na, 1:-1]
        rhs = w[n + 1, 2:na + 1, 1:-1] + dt * (beta_rows * w[n, 0, 1:-1])
        if h is not None:
            rhs = rhs - dt * h[n, 1:na, 1:-1]
        w[n, 1:na, 1:-1] = level.solve(rhs, rows=slice(1, na))
    return Field(w, "trajectory", grid)


def trace_age_zero(problem: AdjointProblem) -> Field:
    """Newborn trace by the terminal-data representation, per time level.

    At time t the trace equals the terminal slice at age T - t evolved
    backward over the horizon T - t by pure dispersion/mortality (no
    fertility coupling), stepping with the same implicit kernel and the
    mortality samples of the characteristic through (t, 0).  This is an
    identity for the true solution whenever fertility vanishes on ages up to
    T; discretely it then reproduces the solver's age-zero row bit for bit.
    """
    grid, coeffs = problem.grid, problem.coeffs
    nt = grid.nt
    ops = LevelOperators(coeffs, grid)
    out = np.zeros((nt + 1, grid.nx + 1))
    for n in range(nt + 1):
        z = problem.wT.values[nt - n, 1:-1][None, :].copy()
        for m in range(nt - 1, n - 1, -1):
            z = ops.level(m).solve(z, rows=slice(m - n, m - n + 1))
        out[n, 1:-1] = z[0]
    return Field(out, "time_gene", grid)


def duhamel_first_case(problem: AdjointProblem, t, a, w_traj: Field | None = None):
    """Reconstruct w(t, a, .) from the newborn trace along its characteristic.

    Valid where the characteristic through (t, a) exits through the maximal
    age before reaching t = T, i.e. a > t + (A - T): there the terminal data
    are never seen, and the solution is the accumulated fertility source

        w(t, a, .) = integral_0^{A-a} S(A - a - l)
                       [beta(t', A - l, .) * w(t', 0, .)] dl,
        t' = t + (A - a) - l,

    with S realized by the same implicit stepper (trapezoid in l).  The
    trace rows are taken from the solver's own trajectory (computed here if
    not supplied), so the comparison isolates the quadrature of the source
    accumulation.  Returns one gene row.
    """
    grid, coeffs = problem.grid, problem.coeffs
    nt, na = grid.nt, grid.na
    n = grid.t_index(t)
    j = grid.a_index(a)
    if j <= n + na - nt:
        raise ValueError(
            f"(t,a)=({t},{a}) lies outside the exit region a > t + (A - T)"
        )
    if w_traj is None:
        w_traj = solve_adjoint(problem)
    trace = w_traj.values[:, 0, 1:-1]
    steps = na - j  # characteristic length in cells up to the age boundary
    row = np.zeros(grid.nx + 1)
    if steps == 0:
        return row
    ops = LevelOperators(coeffs, grid)
    da = grid.da
    exit_level = n + steps

    def source(level, age_idx):
        beta_row = rate_level_block(coeffs.beta, level, grid)[age_idx, 1:-1]
        return beta_row * trace[level]

    acc = 0.5 * da * source(exit_level, na)[None, :]
    for r in range(exit_level - 1, n - 1, -1):
        age_idx = j + r - n
        acc = ops.level(r).solve(acc, rows=slice(age_idx, age_idx + 1))
        weight = 0.5 * da if r == n else da
        acc = acc + weight * source(r, age_idx)[None, :]
    row[1:-1] = acc[0]
    return row


def duality_residual(y_traj: Field, w_traj: Field, control, y0, wT, grid) -> float:
    """Defect of the discrete integration-by-parts identity.

    For a forward trajectory with control theta and an adjoint trajectory
    with terminal data wT (matching coefficients, no adjoint source):

        <y(T), wT> - <y0, w(0)> = <theta, w>_q.

    Terminal/initial pairings use the age-gene trapezoid product; the control
    pairing uses the rule the scheme itself conserves — the rectangle rule
    over the foot samples {(t_n, a_j): n < nt, j < na} times the gene
    trapezoid.  Returns |lhs - rhs| / max(1, largest term magnitude).
    """
    yv = y_traj.values
    wv = w_traj.values
    y0v = y0.values if isinstance(y0, Field) else np.asarray(y0, float)
    wTv = wT.values if isinstance(wT, Field) else np.asarray(wT, float)
    pair_T = inner_product(yv[grid.nt], wTv, grid, kind="age_gene")
    pair_0 = inner_product(y0v, wv[0], grid, kind="age_gene")
    if control is None:
        pair_q = 0.0
    else:
        cv = control.values if isinstance(control, Field) else np.asarray(control, float)
        block = cv[: grid.nt, : grid.na] * wv[: grid.nt, : grid.na]
        pair_q = float(grid.dt * grid.da * np.einsum("tax,x->", block, grid.wx))
    scale = max(abs(pair_T), abs(pair_0), abs(pair_q))
    return abs(pair_T - pair_0 - pair_q) / max(1.0, scale)
