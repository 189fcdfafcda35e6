"""Reproducible random function ensembles.

All stochastic experiments (duality checks, Gram-operator probes,
observability and inequality trials) draw their data from Fourier sine sums
with algebraically decaying coefficients,

    sum_{modes} c / (|mode|^2) * product of sine factors,   c ~ N(0, 1),

which are smooth, satisfy the homogeneous Dirichlet conditions in the gene
variable, vanish at the age endpoints (and, when a window is given, are
supported in that age window), and are reproducible from a single seed via
numpy's PCG64 generator.
"""

from __future__ import annotations

import numpy as np

from .model import Field

#: Seed used by every shipped experiment unless overridden.
DEFAULT_SEED = 4127


def make_rng(seed=None):
    return np.random.Generator(np.random.PCG64(DEFAULT_SEED if seed is None else seed))


def _sine_table(coords, length, modes):
    """Rows sin(m*pi*coords/length) for m = 1..modes.

    Columns at (or beyond) the interval endpoints are set to exact zeros:
    evaluating sin(m*pi) in floating point leaves round-off residue, and in
    exponentially weighted integrals a 1e-16 residue at a favourable node can
    outweigh every genuine interior contribution.
    """
    m = np.arange(1, modes + 1)[:, None]
    table = np.sin(m * np.pi * coords[None, :] / length)
    table[:, (coords <= 0.0) | (coords >= length)] = 0.0
    return table


def age_gene_draw(rng, grid, age_window=None, modes=8):
    """Random age-gene Field; supported in age_window when given.

    With a window (lo, hi) the age factors are sin(m*pi*(a-lo)/(hi-lo)) on
    the window and zero outside, so the draw vanishes at both window edges.
    """
    coeff = rng.standard_normal((modes, modes))
    m2 = np.arange(1, modes + 1) ** 2
    coeff = coeff / (m2[:, None] + m2[None, :])
    if age_window is None:
        age_tab = _sine_table(grid.a_levels, grid.A, modes)
    else:
        lo, hi = age_window
        shifted = grid.a_levels - lo
        age_tab = _sine_table(np.clip(shifted, 0.0, hi - lo), hi - lo, modes)
        age_tab[:, (grid.a_levels <= lo) | (grid.a_levels >= hi)] = 0.0
    gene_tab = _sine_table(grid.x_nodes, 1.0, modes)
    values = np.einsum("mn,ma,nx->ax", coeff, age_tab, gene_tab)
    return Field(values, "age_gene", grid)


def box_terminal_draw(rng, grid, modes=8):
    """Random terminal datum supported in the observation ages (delta, A)."""
    return age_gene_draw(rng, grid, age_window=(grid.delta, grid.A), modes=modes)


def trajectory_draw(rng, grid, modes=4):
    """Random trajectory Field, smooth and vanishing on every face."""
    coeff = rng.standard_normal((modes, modes, modes))
    m2 = np.arange(1, modes + 1) ** 2
    coeff = coeff / (m2[:, None, None] + m2[None, :, None] + m2[None, None, :])
    t_tab = _sine_table(grid.t_levels, grid.T, modes)
    a_tab = _sine_table(grid.a_levels, grid.A, modes)
    x_tab = _sine_table(grid.x_nodes, 1.0, modes)
    values = np.einsum("lmn,lt,ma,nx->tax", coeff, t_tab, a_tab, x_tab)
    return Field(values, "trajectory", grid)


def gene_draw(rng, grid, modes=8):
    """Random gene row vanishing at x = 0 and x = 1."""
    coeff = rng.standard_normal(modes) / np.arange(1, modes + 1) ** 2
    return coeff @ _sine_table(grid.x_nodes, 1.0, modes)
