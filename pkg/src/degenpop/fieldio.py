"""Deterministic CSV persistence for grid fields.

Fields are stored in long format with the fixed header ``t,a,x,value`` and
one row per grid point, written in t-major, then age, then gene order.
Floats are serialized with ``repr``, the shortest decimal string that parses
back to the identical IEEE double, so round-trips are exact and repeated
writes of the same field are byte-identical.

Two-dimensional fields reuse the same four-column layout with a constant
label in the collapsed coordinate: age-gene slices default to the terminal
time and time-gene traces to age zero (they are newborn-line traces in this
package).  The reader infers the field kind from which axes are fully
covered and validates complete, duplicate-free coverage of the grid.
"""

from __future__ import annotations

import numpy as np

from .model import Field, SpaceTimeGrid

HEADER = "t,a,x,value"


def _axis_labels(values: np.ndarray) -> list:
    return [repr(float(v)) for v in values]


def write_field_csv(field: Field, path, label: float | None = None) -> None:
    """Write a Field to ``path`` in long CSV format.

    ``label`` overrides the constant coordinate written for 2-D fields (the
    time column of an age-gene slice, the age column of a time-gene trace);
    it is ignored for trajectories.
    """
    grid = field.grid
    t_strs = _axis_labels(grid.t_levels)
    a_strs = _axis_labels(grid.a_levels)
    x_strs = _axis_labels(grid.x_nodes)
    lines = [HEADER]
    if field.kind == "trajectory":
        for it, t_s in enumerate(t_strs):
            level = field.values[it]
            for ia, a_s in enumerate(a_strs):
                prefix = t_s + "," + a_s + ","
                row = level[ia]
                lines.extend(
                    prefix + x_s + "," + repr(float(v))
                    for x_s, v in zip(x_strs, row)
                )
    elif field.kind == "age_gene":
        t_s = repr(float(grid.T if label is None else label))
        for ia, a_s in enumerate(a_strs):
            prefix = t_s + "," + a_s + ","
            row = field.values[ia]
            lines.extend(
                prefix + x_s + "," + repr(float(v)) for x_s, v in zip(x_strs, row)
            )
    elif field.kind == "time_gene":
        a_s = repr(float(0.0 if label is None else label))
        for it, t_s in enumerate(t_strs):
            prefix = t_s + "," + a_s + ","
            row = field.values[it]
            lines.extend(
                prefix + x_s + "," + repr(float(v)) for x_s, v in zip(x_strs, row)
            )
    else:  # pragma: no cover - Field constructor forbids other kinds
        raise ValueError(f"unsupported field kind {field.kind!r}")
    with open(path, "w", newline="") as handle:
        handle.write("\n".join(lines))
        handle.write("\n")


def _parse_rows(path):
    ts, as_, xs, vals = [], [], [], []
    with open(path, "r", newline="") as handle:
        header = handle.readline().rstrip("\r\n")
        if header != HEADER:
            raise ValueError(
                f"{path}: expected header {HEADER!r}, found {header!r}"
            )
        for lineno, raw in enumerate(handle, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ValueError(
                    f"{path}:{lineno}: expected 4 comma-separated entries"
                )
            try:
                t, a, x, v = (float(p) for p in parts)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric entry") from exc
            ts.append(t)
            as_.append(a)
            xs.append(x)
            vals.append(v)
    if not ts:
        raise ValueError(f"{path}: no data rows")
    return (
        np.array(ts),
        np.array(as_),
        np.array(xs),
        np.array(vals),
    )


def _axis_indices(coords, n_cells, step, name, path):
    """Map coordinates of a fully covered uniform axis to indices."""
    idx = np.rint(coords / step).astype(int)
    bad = (idx < 0) | (idx > n_cells) | (np.abs(coords - idx * step) > 1e-9 * step)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise ValueError(
            f"{path}: coordinate {name}={coords[j]!r} does not match any grid node"
        )
    return idx


def read_field_csv(path, grid: SpaceTimeGrid) -> Field:
    """Read a Field written by :func:`write_field_csv` back onto ``grid``.

    The field kind is inferred from the coordinate coverage: full coverage
    of all three axes gives a trajectory, a constant time column with full
    age/gene coverage an age-gene slice, a constant age column a time-gene
    trace.  Raises on header mismatch, non-numeric entries, coordinates off
    the grid, duplicate rows, and incomplete coverage (naming the gap).
    """
    ts, as_, xs, vals = _parse_rows(path)
    t_single = np.unique(ts).size == 1
    a_single = np.unique(as_).size == 1

    if t_single and not a_single:
        kind = "age_gene"
        shape = (grid.na + 1, grid.nx + 1)
        ii = _axis_indices(as_, grid.na, grid.da, "a", path)
        jj = _axis_indices(xs, grid.nx, grid.dx, "x", path)
        flat = ii * (grid.nx + 1) + jj
        coords = lambda f: (  # noqa: E731
            f"a={grid.a_levels[f // (grid.nx + 1)]!r}, "
            f"x={grid.x_nodes[f % (grid.nx + 1)]!r}"
        )
    elif a_single and not t_single:
        kind = "time_gene"
        shape = (grid.nt + 1, grid.nx + 1)
        ii = _axis_indices(ts, grid.nt, grid.dt, "t", path)
        jj = _axis_indices(xs, grid.nx, grid.dx, "x", path)
        flat = ii * (grid.nx + 1) + jj
        coords = lambda f: (  # noqa: E731
            f"t={grid.t_levels[f // (grid.nx + 1)]!r}, "
            f"x={grid.x_nodes[f % (grid.nx + 1)]!r}"
        )
    else:
        kind = "trajectory"
        shape = (grid.nt + 1, grid.na + 1, grid.nx + 1)
        ii = _axis_indices(ts, grid.nt, grid.dt, "t", path)
        jj = _axis_indices(as_, grid.na, grid.da, "a", path)
        kk = _axis_indices(xs, grid.nx, grid.dx, "x", path)
        flat = (ii * (grid.na + 1) + jj) * (grid.nx + 1) + kk
        na1, nx1 = grid.na + 1, grid.nx + 1
        coords = lambda f: (  # noqa: E731
            f"t={grid.t_levels[f // (na1 * nx1)]!r}, "
            f"a={grid.a_levels[(f // nx1) % na1]!r}, "
            f"x={grid.x_nodes[f % nx1]!r}"
        )

    total = int(np.prod(shape))
    counts = np.bincount(flat, minlength=total)
    if np.any(counts > 1):
        f = int(np.argmax(counts > 1))
        raise ValueError(f"{path}: duplicate row for {coords(f)}")
    if np.any(counts == 0):
        f = int(np.argmax(counts == 0))
        raise ValueError(f"{path}: missing row for {coords(f)}")

    values = np.empty(total)
    values[flat] = vals
    return Field(values.reshape(shape), kind, grid)
