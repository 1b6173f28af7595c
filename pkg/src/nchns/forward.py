"""Forward time integration of the coupled phase-field / flow system.

One step advances the order parameter with a semi-implicit, stabilized,
mass-conservative update of the convective nonlocal Cahn-Hilliard equation,
then the velocity with an explicit predictor (viscous stress, advection,
capillary force, control) followed by an exact pressure projection.

The phase update solves, with c = a + s_stab,

    phi_new - dt Lap_N(c phi_new + g) = phi_old - dt div(u phi_old),
    g = -K*phi_old + F'(phi_old) - s_stab phi_old,

through the SPD substitution psi = c * phi_new, and then *reconstructs*
phi_new from the flux form so the cell sum of phi is conserved to round-off
independently of the linear-solver residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (Grid2D, ScalarField, VectorField, advect_scalar,
                   advect_vector, divergence_face_to_cc, div_viscous_stress,
                   gradient_cc_to_face, inner_product_l2, integral,
                   laplacian_neumann_array, scalar_to_xfaces, scalar_to_yfaces)
from .kernels import Kernel, convolve
from .linsolve import (HelmholtzNeumannSolver, NeumannPoissonSolver,
                       SolverConvergenceError)
from .physics import DoubleWell, Viscosity, chemical_potential


class CFLViolationError(RuntimeError):
    def __init__(self, dt, suggested_dt, reason):
        super().__init__(
            f"time step {dt:.3e} violates the {reason} stability bound; "
            f"use dt <= {suggested_dt:.3e}")
        self.suggested_dt = suggested_dt


class StepFailureError(RuntimeError):
    """A solver step failed; carries the failing step index when known."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class TimeScheme:
    """Step size, step count and the solver knobs shared by all three solvers."""

    dt: float
    nt: int
    s_stab: float = None          # default set from the potential (2 * scale)
    tol_p: float = 1e-10          # max |div u| after projection
    solve_rtol: float = 1e-13     # relative residual floor for the implicit solves
    max_solver_iter: int = 4000

    def __post_init__(self):
        if self.dt <= 0 or self.nt < 1:
            raise ValueError("need dt > 0 and nt >= 1")
        if self.s_stab is not None and self.s_stab < 0:
            raise ValueError("stabilization must be nonnegative")

    @property
    def final_time(self) -> float:
        return self.dt * self.nt


@dataclass
class InitialData:
    u0: VectorField
    phi0: ScalarField

    def validate(self, tol_p: float):
        if not (np.all(np.isfinite(self.u0.ux)) and np.all(np.isfinite(self.u0.uy))
                and np.all(np.isfinite(self.phi0.values))):
            raise ValueError("initial data must be finite")
        bmax = max(np.max(np.abs(self.u0.ux[0, :])), np.max(np.abs(self.u0.ux[-1, :])),
                   np.max(np.abs(self.u0.uy[:, 0])), np.max(np.abs(self.u0.uy[:, -1])))
        if bmax != 0.0:
            raise ValueError("initial velocity must have zero boundary-normal faces")
        dmax = float(np.max(np.abs(divergence_face_to_cc(self.u0).values)))
        if dmax > tol_p:
            raise ValueError(
                f"initial velocity divergence {dmax:.3e} exceeds tolerance {tol_p:.3e}")


@dataclass
class StateTrajectory:
    """Snapshots (u_k, phi_k, mu_k, pi_k) at every time level 0..nt."""

    grid: Grid2D
    scheme: TimeScheme
    times: np.ndarray
    u: list
    phi: list
    mu: list
    pi: list

    @property
    def nt(self) -> int:
        return len(self.times) - 1


def zero_control(grid: Grid2D, nt: int):
    return [VectorField.zeros(grid) for _ in range(nt)]


def kelvin_force(mu: ScalarField, phi: ScalarField) -> VectorField:
    """Capillary body force mu grad(phi) on faces (zero at boundary faces)."""
    gphi = gradient_cc_to_face(phi)
    fx = scalar_to_xfaces(mu) * gphi.ux
    fy = scalar_to_yfaces(mu) * gphi.uy
    return VectorField(phi.grid, fx, fy)


def total_energy(u: VectorField, phi: ScalarField, kernel: Kernel,
                 potential: DoubleWell):
    """(kinetic, nonlocal mixing, bulk) energies; mixing uses the identity

    1/4 int int K(x-y)(phi(x)-phi(y))^2 = 1/2 (a phi, phi) - 1/2 (phi, K*phi),

    which is exact in the shared midpoint quadrature.
    """
    kinetic = 0.5 * inner_product_l2(u, u)
    a = kernel.mass_field.values
    kphi = convolve(kernel, phi).values
    mixing = 0.5 * float(np.sum((a * phi.values - kphi) * phi.values)) \
        * phi.grid.cell_volume
    bulk = float(np.sum(potential.f(phi.values))) * phi.grid.cell_volume
    return kinetic, mixing, bulk


class ForwardSolver:
    """Owns the discrete problem setup; immutable after construction."""

    def __init__(self, grid: Grid2D, kernel: Kernel, potential: DoubleWell,
                 viscosity: Viscosity, scheme: TimeScheme):
        if kernel.grid != grid:
            raise ValueError("kernel tabulated on a different grid")
        self.grid = grid
        self.kernel = kernel
        self.potential = potential
        self.viscosity = viscosity
        self.scheme = scheme
        self.s_stab = scheme.s_stab if scheme.s_stab is not None \
            else 2.0 * potential.scale
        self.c_implicit = kernel.mass_field.values + self.s_stab
        if np.any(self.c_implicit <= 0):
            raise ValueError("implicit coefficient a + s_stab must be positive")
        self._helmholtz = HelmholtzNeumannSolver(grid, self.c_implicit, scheme.dt,
                                                 maxiter=scheme.max_solver_iter)
        self._poisson = NeumannPoissonSolver(grid, maxiter=scheme.max_solver_iter)

    # -- tolerances ---------------------------------------------------------

    def _atol(self, b: np.ndarray) -> float:
        # purely relative: keeps the solve maps scale-equivariant, which the
        # linearity/superposition guarantees of the tangent solver rely on
        return self.scheme.solve_rtol * float(np.max(np.abs(b)))

    def _pressure_atol(self, b: np.ndarray) -> float:
        return min(self.scheme.tol_p / self.scheme.dt, self._atol(b))

    def check_cfl(self, u: VectorField):
        dt, g = self.scheme.dt, self.grid
        h = min(g.dx, g.dy)
        visc_bound = h ** 2 / (8.0 * self.viscosity.nu_max)
        if dt > visc_bound:
            raise CFLViolationError(dt, visc_bound, "viscous")
        umax = max(float(np.max(np.abs(u.ux))), float(np.max(np.abs(u.uy))))
        adv_bound = h / (4.0 * umax + 1e-12)
        if dt > adv_bound:
            raise CFLViolationError(dt, adv_bound, "advective")

    # -- phase step ----------------------------------------------------------

    def step_ch(self, phi: ScalarField, u: VectorField):
        """Advance the order parameter one step; returns (phi_new, mu_new)."""
        dt = self.scheme.dt
        g_expl = (-convolve(self.kernel, phi).values
                  + self.potential.df(phi.values) - self.s_stab * phi.values)
        b = (phi.values - dt * advect_scalar(u, phi).values
             + dt * laplacian_neumann_array(g_expl, self.grid))
        psi, _ = self._helmholtz.solve(b, atol=self._atol(b))
        phi_new = ScalarField(self.grid, b + dt * laplacian_neumann_array(psi, self.grid))
        mu_new = chemical_potential(phi_new, self.kernel, self.potential)
        return phi_new, mu_new

    # -- momentum step -------------------------------------------------------

    def project(self, u_star: VectorField):
        """Leray projection by one pressure-Poisson solve; returns (u, pi)."""
        dt = self.scheme.dt
        b = divergence_face_to_cc(u_star).values / dt
        pi, _ = self._poisson.solve(b, atol=self._pressure_atol(b))
        gpi = gradient_cc_to_face(ScalarField(self.grid, pi))
        u = VectorField(self.grid, u_star.ux - dt * gpi.ux, u_star.uy - dt * gpi.uy)
        u.enforce_noslip_normal()
        return u, ScalarField(self.grid, pi)

    def momentum_rhs(self, u: VectorField, phi_new: ScalarField,
                     mu_new: ScalarField, v: VectorField) -> VectorField:
        nu_cc = ScalarField(self.grid, self.viscosity.nu(phi_new.values))
        rhs = div_viscous_stress(nu_cc, u) - advect_vector(u, u) \
            + kelvin_force(mu_new, phi_new) + v
        return rhs

    def step_ns(self, u: VectorField, phi_new: ScalarField, mu_new: ScalarField,
                v: VectorField):
        """Explicit predictor plus projection; returns (u_new, pi_new)."""
        self.check_cfl(u)
        rhs = self.momentum_rhs(u, phi_new, mu_new, v)
        u_star = u + self.scheme.dt * rhs
        u_star.enforce_noslip_normal()
        return self.project(u_star)

    # -- full run -------------------------------------------------------------

    def run(self, v_traj, init: InitialData) -> StateTrajectory:
        """Integrate nt steps storing every snapshot (needed by the sweeps)."""
        scheme = self.scheme
        if len(v_traj) != scheme.nt:
            raise ValueError(f"control has {len(v_traj)} steps, scheme wants {scheme.nt}")
        init.validate(scheme.tol_p)
        phi = init.phi0.copy()
        u = init.u0.copy()
        mu = chemical_potential(phi, self.kernel, self.potential)
        traj = StateTrajectory(
            self.grid, scheme, scheme.dt * np.arange(scheme.nt + 1),
            u=[u], phi=[phi], mu=[mu], pi=[ScalarField.zeros(self.grid)])
        for k in range(scheme.nt):
            try:
                phi_new, mu_new = self.step_ch(traj.phi[k], traj.u[k])
                u_new, pi_new = self.step_ns(traj.u[k], phi_new, mu_new, v_traj[k])
            except (CFLViolationError, SolverConvergenceError) as exc:
                raise StepFailureError(str(exc), step=k) from exc
            traj.phi.append(phi_new)
            traj.mu.append(mu_new)
            traj.u.append(u_new)
            traj.pi.append(pi_new)
        return traj


DIAGNOSTIC_COLUMNS = ("step", "time", "mass", "kinetic_energy", "free_energy",
                      "max_div", "max_u", "min_phi", "max_phi")


def diagnostics(traj: StateTrajectory, kernel: Kernel, potential: DoubleWell):
    """Per-step observables as a list of rows matching DIAGNOSTIC_COLUMNS."""
    rows = []
    for k in range(traj.nt + 1):
        u, phi = traj.u[k], traj.phi[k]
        kin, mixing, bulk = total_energy(u, phi, kernel, potential)
        rows.append({
            "step": k,
            "time": float(traj.times[k]),
            "mass": integral(phi),
            "kinetic_energy": kin,
            "free_energy": mixing + bulk,
            "max_div": float(np.max(np.abs(divergence_face_to_cc(u).values))),
            "max_u": max(float(np.max(np.abs(u.ux))), float(np.max(np.abs(u.uy)))),
            "min_phi": float(phi.values.min()),
            "max_phi": float(phi.values.max()),
        })
    return rows
