import numpy as np
import pytest
import sympy as sp

from nchns import (CFLViolationError, DoubleWell, ForwardSolver, Grid2D,
                   HypothesisConstants, InitialData, ScalarField,
                   StepFailureError, TimeScheme, VectorField, Viscosity,
                   diagnostics, divergence_face_to_cc, gradient_cc_to_face,
                   integral, make_kernel, norm_l2, total_energy, zero_control)

from conftest import solenoidal
from oracles import fit_slope, pairwise_mixing_energy


def default_setup(n=32, dt=5e-5, nt=20, seed=3, lx=1.0):
    grid = Grid2D(n, n, lx, lx)
    constants = HypothesisConstants()
    pot = DoubleWell()
    kern = make_kernel(grid, "gaussian", width=0.15 * lx,
                       auto_scale_target=pot.scale + constants.c1)
    visc = Viscosity()
    scheme = TimeScheme(dt=dt, nt=nt)
    solver = ForwardSolver(grid, kern, pot, visc, scheme)
    rng = np.random.default_rng(seed)
    X, Y = grid.cell_centers()
    phi0 = ScalarField(grid, 0.2 * np.cos(2 * np.pi * X / lx)
                       * np.cos(np.pi * Y / lx)
                       + 0.05 * rng.standard_normal((n, n)))
    init = InitialData(VectorField.zeros(grid), phi0)
    return solver, init


def test_uniform_state_is_steady():
    grid = Grid2D(16, 16)
    kern = make_kernel(grid, "delta")
    solver = ForwardSolver(grid, kern, DoubleWell(), Viscosity(),
                           TimeScheme(dt=5e-5, nt=5))
    init = InitialData(VectorField.zeros(grid), ScalarField.full(grid, 0.3))
    traj = solver.run(zero_control(grid, 5), init)
    for k in range(6):
        np.testing.assert_allclose(traj.phi[k].values, 0.3, atol=1e-13)
        assert np.max(np.abs(traj.u[k].ux)) < 1e-13
        assert np.max(np.abs(traj.u[k].uy)) < 1e-13


def test_mass_conservation_and_divergence():
    solver, init = default_setup(nt=50)
    traj = solver.run(zero_control(solver.grid, 50), init)
    m0 = integral(init.phi0)
    for k in range(51):
        assert abs(integral(traj.phi[k]) - m0) <= 1e-10 * abs(m0) + 1e-12
        div = np.max(np.abs(divergence_face_to_cc(traj.u[k]).values))
        assert div <= solver.scheme.tol_p
        assert traj.u[k].ux[0, :].max() == 0.0 and traj.u[k].ux[-1, :].max() == 0.0
        assert traj.u[k].uy[:, 0].max() == 0.0 and traj.u[k].uy[:, -1].max() == 0.0


def test_energy_non_increasing():
    solver, init = default_setup(nt=200)
    traj = solver.run(zero_control(solver.grid, 200), init)
    kin, mix, bulk = total_energy(traj.u[0], traj.phi[0], solver.kernel,
                                  solver.potential)
    e_prev = kin + mix + bulk
    e0 = e_prev
    slack = 10.0 * solver.scheme.dt * e0
    for k in range(1, 201):
        kin, mix, bulk = total_energy(traj.u[k], traj.phi[k], solver.kernel,
                                      solver.potential)
        e = kin + mix + bulk
        assert e <= e_prev + slack
        e_prev = e


def test_mixing_energy_identity_against_pairwise_sum(rng):
    # the a/convolution form of the mixing energy equals the literal
    # quarter-double-sum over cell pairs in the same quadrature
    grid = Grid2D(12, 12)
    kern = make_kernel(grid, "gaussian", width=0.2)
    phi = ScalarField(grid, rng.standard_normal((12, 12)))
    _, mix, _ = total_energy(VectorField.zeros(grid), phi, kern, DoubleWell())
    direct = pairwise_mixing_energy(kern, phi.values)
    assert abs(mix - direct) <= 1e-12 * max(1.0, abs(direct))


def test_gradient_controls_are_annihilated(rng):
    solver, init = default_setup(nt=10)
    grid = solver.grid
    base = solver.run(zero_control(grid, 10), init)
    s = ScalarField(grid, rng.standard_normal((grid.nx, grid.ny)))
    v_grad = [gradient_cc_to_face(s) for _ in range(10)]
    pushed = solver.run(v_grad, init)
    du = pushed.u[-1] - base.u[-1]
    dphi = pushed.phi[-1] - base.phi[-1]
    assert norm_l2(du) <= 1e-8
    assert norm_l2(dphi) <= 1e-8


def test_cfl_violation_reports_suggested_dt():
    grid = Grid2D(16, 16)
    kern = make_kernel(grid, "gaussian", width=0.2, auto_scale_target=1.1)
    scheme = TimeScheme(dt=1e-2, nt=3)   # far above the viscous bound
    solver = ForwardSolver(grid, kern, DoubleWell(), Viscosity(), scheme)
    init = InitialData(VectorField.zeros(grid), ScalarField.full(grid, 0.1))
    with pytest.raises(StepFailureError) as err:
        solver.run(zero_control(grid, 3), init)
    assert err.value.step == 0
    assert isinstance(err.value.__cause__, CFLViolationError)
    assert err.value.__cause__.suggested_dt < 1e-2


def test_initial_data_validation():
    grid = Grid2D(16, 16)
    u0 = VectorField.zeros(grid)
    u0.ux[0, 3] = 1.0
    with pytest.raises(ValueError):
        InitialData(u0, ScalarField.zeros(grid)).validate(1e-10)
    u1 = VectorField.zeros(grid)
    u1.ux[5, 5] = 1.0   # interior divergence
    with pytest.raises(ValueError):
        InitialData(u1, ScalarField.zeros(grid)).validate(1e-10)


def test_dt_refinement_first_order():
    diffs = []
    for dt, nt in ((4e-5, 25), (2e-5, 50), (1e-5, 100)):
        grid = Grid2D(32, 32)
        constants = HypothesisConstants()
        pot = DoubleWell()
        kern = make_kernel(grid, "gaussian", width=0.15,
                           auto_scale_target=pot.scale + constants.c1)
        solver = ForwardSolver(grid, kern, pot, Viscosity(),
                               TimeScheme(dt=dt, nt=nt))
        X, Y = grid.cell_centers()
        phi0 = ScalarField(grid, 0.3 * np.cos(2 * np.pi * X) * np.cos(np.pi * Y))
        init = InitialData(VectorField.zeros(grid), phi0)
        traj = solver.run(zero_control(grid, nt), init)
        diffs.append((traj.u[-1], traj.phi[-1]))
    d1 = norm_l2(diffs[0][1] - diffs[1][1]) + norm_l2(diffs[0][0] - diffs[1][0])
    d2 = norm_l2(diffs[1][1] - diffs[2][1]) + norm_l2(diffs[1][0] - diffs[2][0])
    assert 1.5 <= d1 / d2 <= 2.5  # first order in dt


def test_momentum_step_manufactured_convergence():
    # decaying no-slip vortex with sympy-derived forcing; constant viscosity,
    # uniform phase so the capillary force vanishes
    x, y, t = sp.symbols("x y t")
    psi = sp.sin(sp.pi * x) ** 2 * sp.sin(sp.pi * y) ** 2 * sp.exp(-t)
    ux_s = sp.diff(psi, y)
    uy_s = -sp.diff(psi, x)
    nu0 = 1.0
    fx_s = (sp.diff(ux_s, t) + ux_s * sp.diff(ux_s, x) + uy_s * sp.diff(ux_s, y)
            - nu0 * (sp.diff(ux_s, x, 2) + sp.diff(ux_s, y, 2)))
    fy_s = (sp.diff(uy_s, t) + ux_s * sp.diff(uy_s, x) + uy_s * sp.diff(uy_s, y)
            - nu0 * (sp.diff(uy_s, x, 2) + sp.diff(uy_s, y, 2)))
    psi_f = sp.lambdify((x, y, t), psi, "numpy")
    fx_f = sp.lambdify((x, y, t), fx_s, "numpy")
    fy_f = sp.lambdify((x, y, t), fy_s, "numpy")

    T = 2e-3
    errs, hs = [], []
    for n, dt in ((16, 2.5e-4), (32, 6.25e-5), (64, 1.5625e-5)):
        nt = int(round(T / dt))
        grid = Grid2D(n, n)
        kern = make_kernel(grid, "delta")
        visc = Viscosity(mean=nu0, modulation=0.0, nu_min=nu0, nu_max=nu0)
        solver = ForwardSolver(grid, kern, DoubleWell(), visc,
                               TimeScheme(dt=dt, nt=nt))
        XN, YN = grid.nodes()
        u0 = VectorField.from_stream_function(grid, psi_f(XN, YN, 0.0))
        u0.enforce_noslip_normal()   # clear sin(pi)^2 round-off on the walls
        init = InitialData(u0, ScalarField.full(grid, 0.0))
        v = []
        for k in range(nt):
            tk = k * dt
            XF, YF = grid.xface_centers()
            XG, YG = grid.yface_centers()
            f = VectorField(grid, fx_f(XF, YF, tk), fy_f(XG, YG, tk))
            f.enforce_noslip_normal()
            v.append(f)
        traj = solver.run(v, init)
        exact = VectorField.from_stream_function(grid, psi_f(XN, YN, T))
        errs.append(norm_l2(traj.u[-1] - exact))
        hs.append(grid.dx)
    slope = fit_slope(hs, errs)
    assert 1.7 <= slope <= 2.4


def test_diagnostics_rows():
    solver, init = default_setup(nt=5)
    init = InitialData(VectorField.zeros(solver.grid),
                       ScalarField.full(solver.grid, 0.2))
    traj = solver.run(zero_control(solver.grid, 5), init)
    rows = diagnostics(traj, solver.kernel, solver.potential)
    assert len(rows) == 6
    for row in rows:
        assert row["kinetic_energy"] <= 1e-20
        assert row["max_div"] <= solver.scheme.tol_p
        assert row["min_phi"] == pytest.approx(0.2, abs=1e-10)
