"""Directional state derivatives: the linearization of the forward scheme.

Every term here is the exact derivative of the corresponding term of the
discrete forward step, evaluated at the stored state trajectory and at the
same time levels the forward splitting uses.  That makes the map
h -> (du, dphi) the honest Jacobian action of the discrete solver (up to
linear-solve residuals), which is what the quadratic-remainder checks rely
on.

The flux condition on the linearized chemical potential is inherited
structurally: the implicit solve acts on the assembled combination
a*dphi - K*dphi_old + F''(phi_old) dphi_old + s_stab (dphi - dphi_old)
through the same mirror-ghost Laplacian as the forward step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import ForwardSolver, StateTrajectory, StepFailureError, kelvin_force
from .grid import (Grid2D, ScalarField, VectorField, advect_scalar,
                   advect_vector, div_viscous_stress, laplacian_neumann_array)
from .kernels import convolve
from .linsolve import SolverConvergenceError
from .physics import chemical_potential  # noqa: F401  (re-exported for callers)


@dataclass
class TangentTrajectory:
    """Per-step directional derivatives (du_k, dphi_k) and their pressure."""

    grid: Grid2D
    times: np.ndarray
    du: list
    dphi: list
    dpi: list

    @property
    def nt(self) -> int:
        return len(self.times) - 1


class TangentSolver:
    """Linearized stepper bound to one forward solver and its trajectory."""

    def __init__(self, forward: ForwardSolver):
        self.fwd = forward

    def linearized_mu(self, phi: ScalarField, dphi: ScalarField) -> ScalarField:
        """Derivative of the assembled chemical potential at phi."""
        kern, pot = self.fwd.kernel, self.fwd.potential
        vals = (kern.mass_field.values * dphi.values
                - convolve(kern, dphi).values
                + pot.d2f(phi.values) * dphi.values)
        return ScalarField(phi.grid, vals)

    def step(self, state_phi: ScalarField, state_u: VectorField,
             state_phi_new: ScalarField, state_mu_new: ScalarField,
             du: VectorField, dphi: ScalarField, h: VectorField):
        """One linearized step; returns (du_new, dphi_new, dpi_new)."""
        fwd = self.fwd
        dt = fwd.scheme.dt
        grid = fwd.grid

        # phase half: derivative of the conservative semi-implicit update
        dg = (-convolve(fwd.kernel, dphi).values
              + fwd.potential.d2f(state_phi.values) * dphi.values
              - fwd.s_stab * dphi.values)
        db = (dphi.values
              - dt * (advect_scalar(state_u, dphi).values
                      + advect_scalar(du, state_phi).values)
              + dt * laplacian_neumann_array(dg, grid))
        dpsi, _ = fwd._helmholtz.solve(db, atol=fwd._atol(db))
        dphi_new = ScalarField(grid, db + dt * laplacian_neumann_array(dpsi, grid))
        dmu_new = self.linearized_mu(state_phi_new, dphi_new)

        # momentum half: derivative of predictor + (linear) projection
        nu_cc = ScalarField(grid, fwd.viscosity.nu(state_phi_new.values))
        dnu_cc = ScalarField(grid, fwd.viscosity.dnu(state_phi_new.values)
                             * dphi_new.values)
        drhs = (div_viscous_stress(nu_cc, du)
                + div_viscous_stress(dnu_cc, state_u, require_positive=False)
                - advect_vector(du, state_u) - advect_vector(state_u, du)
                + kelvin_force(dmu_new, state_phi_new)
                + kelvin_force(state_mu_new, dphi_new)
                + h)
        du_star = du + dt * drhs
        du_star.enforce_noslip_normal()
        du_new, dpi_new = fwd.project(du_star)
        return du_new, dphi_new, dpi_new

    def run(self, traj: StateTrajectory, h_traj) -> TangentTrajectory:
        """Integrate the linearized system from zero initial data."""
        fwd = self.fwd
        nt = fwd.scheme.nt
        if traj.nt != nt:
            raise ValueError("state trajectory does not match the scheme")
        if len(h_traj) != nt:
            raise ValueError(f"direction has {len(h_traj)} steps, scheme wants {nt}")
        tan = TangentTrajectory(
            fwd.grid, traj.times.copy(),
            du=[VectorField.zeros(fwd.grid)],
            dphi=[ScalarField.zeros(fwd.grid)],
            dpi=[ScalarField.zeros(fwd.grid)])
        for k in range(nt):
            try:
                du_new, dphi_new, dpi_new = self.step(
                    traj.phi[k], traj.u[k], traj.phi[k + 1], traj.mu[k + 1],
                    tan.du[k], tan.dphi[k], h_traj[k])
            except SolverConvergenceError as exc:
                raise StepFailureError(str(exc), step=k) from exc
            tan.du.append(du_new)
            tan.dphi.append(dphi_new)
            tan.dpi.append(dpi_new)
        return tan


def run_tangent(forward: ForwardSolver, traj: StateTrajectory, h_traj):
    return TangentSolver(forward).run(traj, h_traj)
