"""Conjugate-gradient solvers for the two Neumann problems in the scheme.

Both solves share the structure (alpha(x) I - dt Lap_N) u = b with the
mirror-ghost Neumann Laplacian: alpha > 0 gives the SPD Helmholtz-type system
of the semi-implicit phase steps, alpha = 0 the singular pressure Poisson
problem whose constant null space is projected out.

CG is preconditioned with the exact constant-coefficient inverse, applied in
the DCT-II basis that diagonalizes the Neumann Laplacian, so iteration counts
stay flat under grid refinement.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .grid import Grid2D, laplacian_neumann_array


class SolverConvergenceError(RuntimeError):
    """Iterative solve failed to reach the requested residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def fft_workers() -> int:
    """Worker cap for FFT-backed kernels, from NCHNS_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("NCHNS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class SolveInfo:
    iterations: int
    residual: float


class _NeumannSpectralInverse:
    """Exact inverse of (alpha I - dt Lap_N) for constant alpha, via DCT-II."""

    def __init__(self, grid: Grid2D, alpha: float, dt: float):
        kx = np.arange(grid.nx)
        ky = np.arange(grid.ny)
        lam_x = (2.0 * np.cos(np.pi * kx / grid.nx) - 2.0) / grid.dx ** 2
        lam_y = (2.0 * np.cos(np.pi * ky / grid.ny) - 2.0) / grid.dy ** 2
        sym = alpha - dt * (lam_x[:, None] + lam_y[None, :])
        self.singular = abs(sym[0, 0]) < 1e-300
        if self.singular:
            sym[0, 0] = 1.0
        self._inv = 1.0 / sym

    def apply(self, r: np.ndarray) -> np.ndarray:
        w = fft_workers()
        rhat = sfft.dctn(r, type=2, norm="ortho", workers=w)
        rhat *= self._inv
        if self.singular:
            rhat[0, 0] = 0.0
        return sfft.idctn(rhat, type=2, norm="ortho", workers=w)


def _cg(apply_op, b, precond, atol, maxiter, project_mean=False):
    vol_mean = (lambda a: a - a.mean()) if project_mean else (lambda a: a)
    b = vol_mean(b)
    x = np.zeros_like(b)
    r = b.copy()
    res = float(np.max(np.abs(r)))
    if res <= atol:
        return x, SolveInfo(0, res)
    z = vol_mean(precond(r))
    p = z.copy()
    rz = float(np.vdot(r, z))
    for it in range(1, maxiter + 1):
        ap = vol_mean(apply_op(p))
        denom = float(np.vdot(p, ap))
        if denom <= 0.0:
            raise SolverConvergenceError(
                "CG breakdown: operator not positive definite on the iterate space",
                residual=res, iterations=it)
        alpha = rz / denom
        x += alpha * p
        r -= alpha * ap
        res = float(np.max(np.abs(r)))
        if res <= atol:
            return x, SolveInfo(it, res)
        z = vol_mean(precond(r))
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverConvergenceError(
        f"CG did not reach residual {atol:.3e} in {maxiter} iterations "
        f"(got {res:.3e})", residual=res, iterations=maxiter)


class NeumannPoissonSolver:
    """Solves Lap_N p = b for mean-zero b, returning the mean-zero solution."""

    def __init__(self, grid: Grid2D, maxiter: int = 2000):
        self.grid = grid
        self.maxiter = maxiter
        self._pc = _NeumannSpectralInverse(grid, alpha=0.0, dt=1.0)

    def solve(self, b: np.ndarray, atol: float):
        grid = self.grid
        # work with the SPD operator -Lap on the mean-zero subspace
        rhs = -(b - b.mean())

        def apply_op(v):
            return -laplacian_neumann_array(v, grid)

        x, info = _cg(apply_op, rhs, self._pc.apply, atol=atol,
                      maxiter=self.maxiter, project_mean=True)
        return x, info


class HelmholtzNeumannSolver:
    """Solves u / c(x) - dt Lap_N u = b with cellwise c > 0 (SPD system)."""

    def __init__(self, grid: Grid2D, c: np.ndarray, dt: float, maxiter: int = 2000):
        c = np.asarray(c, dtype=np.float64)
        if np.any(c <= 0.0):
            raise ValueError("Helmholtz coefficient must be positive everywhere")
        self.grid = grid
        self.inv_c = 1.0 / c
        self.dt = dt
        self.maxiter = maxiter
        self._pc = _NeumannSpectralInverse(grid, alpha=float(self.inv_c.mean()), dt=dt)

    def solve(self, b: np.ndarray, atol: float):
        grid, dt, inv_c = self.grid, self.dt, self.inv_c

        def apply_op(v):
            return inv_c * v - dt * laplacian_neumann_array(v, grid)

        return _cg(apply_op, b, self._pc.apply, atol=atol, maxiter=self.maxiter)
