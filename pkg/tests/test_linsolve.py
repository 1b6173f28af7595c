import numpy as np
import pytest

from nchns import Grid2D
from nchns.grid import laplacian_neumann_array
from nchns.linsolve import (HelmholtzNeumannSolver, NeumannPoissonSolver,
                            SolverConvergenceError)


def test_poisson_solves_to_requested_residual(rng):
    grid = Grid2D(32, 32, 1.0, 1.0)
    b = rng.standard_normal((32, 32))
    b -= b.mean()
    solver = NeumannPoissonSolver(grid)
    x, info = solver.solve(b, atol=1e-12)
    res = b - laplacian_neumann_array(x, grid)
    assert np.max(np.abs(res - res.mean())) <= 1e-12
    assert abs(x.mean()) < 1e-12


def test_poisson_nonsquare_grid(rng):
    grid = Grid2D(24, 40, 2.0, 1.0)
    b = rng.standard_normal((24, 40))
    b -= b.mean()
    x, _ = NeumannPoissonSolver(grid).solve(b, atol=1e-11)
    res = b - laplacian_neumann_array(x, grid)
    assert np.max(np.abs(res)) <= 1e-11


def test_poisson_zero_rhs_returns_zero():
    grid = Grid2D(16, 16)
    x, info = NeumannPoissonSolver(grid).solve(np.zeros((16, 16)), atol=1e-13)
    assert np.all(x == 0.0)
    assert info.iterations == 0


def test_helmholtz_variable_coefficient(rng):
    grid = Grid2D(32, 32, 1.0, 1.0)
    c = 1.5 + 0.8 * rng.random((32, 32))
    dt = 1e-3
    b = rng.standard_normal((32, 32))
    solver = HelmholtzNeumannSolver(grid, c, dt)
    x, info = solver.solve(b, atol=1e-13)
    res = b - (x / c - dt * laplacian_neumann_array(x, grid))
    assert np.max(np.abs(res)) <= 1e-13


def test_helmholtz_rejects_nonpositive_coefficient():
    grid = Grid2D(16, 16)
    with pytest.raises(ValueError):
        HelmholtzNeumannSolver(grid, np.zeros((16, 16)), 1e-3)


def test_helmholtz_iteration_cap(rng):
    grid = Grid2D(16, 16)
    c = 1.0 + 0.5 * rng.random((16, 16))
    solver = HelmholtzNeumannSolver(grid, c, 1e-3, maxiter=1)
    with pytest.raises(SolverConvergenceError):
        solver.solve(rng.standard_normal((16, 16)), atol=1e-15)
