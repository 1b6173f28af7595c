"""Binary trajectory containers and the CSV artifacts.

Container layout (all integers/floats little-endian 64-bit):

    magic (6 ASCII bytes) | nx ny nt (int64) | dt lx ly (float64)
    then per time level, row-major float64 arrays:
      state   "NCHNS1", levels 0..nt:   phi, ux, uy, pi
      tangent "NCHNT1", levels 0..nt:   dphi, dux, duy, dpi
      adjoint "NCHNA1", levels 0..nt:   aphi, aux, auy, api
      control "NCHNC1", steps 0..nt-1:  ux, uy
"""

from __future__ import annotations

import csv
import struct

import numpy as np

from .grid import Grid2D, ScalarField, VectorField

STATE_MAGIC = b"NCHNS1"
TANGENT_MAGIC = b"NCHNT1"
ADJOINT_MAGIC = b"NCHNA1"
CONTROL_MAGIC = b"NCHNC1"

_HEADER = struct.Struct("<3q3d")


def _write_header(f, magic: bytes, nx: int, ny: int, nt: int, dt: float,
                  lx: float, ly: float):
    f.write(magic)
    f.write(_HEADER.pack(nx, ny, nt, dt, lx, ly))


def _read_header(f, expect_magic: bytes):
    magic = f.read(6)
    if magic != expect_magic:
        raise ValueError(f"bad magic {magic!r}, expected {expect_magic!r}")
    nx, ny, nt, dt, lx, ly = _HEADER.unpack(f.read(_HEADER.size))
    return int(nx), int(ny), int(nt), float(dt), float(lx), float(ly)


def _write_array(f, a: np.ndarray):
    f.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def _read_array(f, shape):
    n = int(np.prod(shape))
    buf = f.read(8 * n)
    if len(buf) != 8 * n:
        raise ValueError("truncated checkpoint file")
    return np.frombuffer(buf, dtype="<f8").reshape(shape).copy()


def _write_levels(path, magic, grid: Grid2D, nt: int, dt: float, scalars,
                  vectors, extra_scalars):
    with open(path, "wb") as f:
        _write_header(f, magic, grid.nx, grid.ny, nt, dt, grid.lx, grid.ly)
        for s, w, e in zip(scalars, vectors, extra_scalars):
            _write_array(f, s.values)
            _write_array(f, w.ux)
            _write_array(f, w.uy)
            _write_array(f, e.values)


def write_state(path, traj):
    _write_levels(path, STATE_MAGIC, traj.grid, traj.nt, traj.scheme.dt,
                  traj.phi, traj.u, traj.pi)


def write_tangent(path, tan, dt: float):
    _write_levels(path, TANGENT_MAGIC, tan.grid, tan.nt, dt,
                  tan.dphi, tan.du, tan.dpi)


def write_adjoint(path, adj, dt: float):
    _write_levels(path, ADJOINT_MAGIC, adj.grid, adj.nt, dt,
                  adj.aphi, adj.au, adj.api)


def write_control(path, v, grid: Grid2D, dt: float):
    with open(path, "wb") as f:
        _write_header(f, CONTROL_MAGIC, grid.nx, grid.ny, len(v), dt,
                      grid.lx, grid.ly)
        for vk in v:
            _write_array(f, vk.ux)
            _write_array(f, vk.uy)


def read_levels(path, magic):
    """Read a state/tangent/adjoint container; returns (meta, fields dict)."""
    with open(path, "rb") as f:
        nx, ny, nt, dt, lx, ly = _read_header(f, magic)
        grid = Grid2D(nx, ny, lx, ly)
        scalars, vectors, extras = [], [], []
        for _ in range(nt + 1):
            scalars.append(ScalarField(grid, _read_array(f, (nx, ny))))
            ux = _read_array(f, (nx + 1, ny))
            uy = _read_array(f, (nx, ny + 1))
            vectors.append(VectorField(grid, ux, uy))
            extras.append(ScalarField(grid, _read_array(f, (nx, ny))))
    meta = {"grid": grid, "nt": nt, "dt": dt}
    return meta, {"scalar": scalars, "vector": vectors, "pressure": extras}


def read_state(path):
    return read_levels(path, STATE_MAGIC)


def read_control(path):
    with open(path, "rb") as f:
        nx, ny, nt, dt, lx, ly = _read_header(f, CONTROL_MAGIC)
        grid = Grid2D(nx, ny, lx, ly)
        v = []
        for _ in range(nt):
            ux = _read_array(f, (nx + 1, ny))
            uy = _read_array(f, (nx, ny + 1))
            v.append(VectorField(grid, ux, uy))
    return {"grid": grid, "nt": nt, "dt": dt}, v


# ---------------------------------------------------------------------------
# CSV artifacts


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_diagnostics_csv(path, rows, columns):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


OPT_LOG_COLUMNS = ("iter", "J", "grad_norm", "kkt_residual", "tau_accepted",
                   "armijo_shrinks")


def write_optimization_log(path, state):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(OPT_LOG_COLUMNS)
        for i, J in enumerate(state.cost_history):
            tau = state.tau_history[i] if i < len(state.tau_history) else ""
            shr = state.shrink_history[i] if i < len(state.shrink_history) else ""
            writer.writerow([i, _fmt(J), _fmt(state.grad_norm_history[i]),
                             _fmt(state.kkt_history[i]), _fmt(tau), _fmt(shr)])
