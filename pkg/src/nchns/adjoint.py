"""Backward-in-time integration of the adjoint tracking system.

The continuous adjoint equations are discretized with the forward solver's
stencils (optimize-then-discretize): after reversing time both equations are
forward-parabolic, so one backward step applies

* an explicit viscous/transport update of the adjoint velocity followed by
  the same pressure projection as the forward solver, then
* a semi-implicit update of the adjoint phase in which the stiff part
  (a + F''(phi)) Lap q is implicit (coercive under the validated hypothesis
  a + F'' >= c1 > 0) and the bounded nonlocal term grad K .* grad q, the
  transport and all velocity couplings are explicit.

Step n consumes the state snapshot at level n and the adjoint at level n+1;
terminal values are seeded from the terminal tracking residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import ForwardSolver, StateTrajectory, StepFailureError, kelvin_force
from .grid import (Grid2D, ScalarField, VectorField, advect_vector,
                   cc_components_to_faces, div_viscous_stress,
                   full_gradient_cc, gradient_cc_to_face, sym_gradient,
                   vector_to_cc)
from .kernels import convolve, grad_dot_convolve
from .linsolve import HelmholtzNeumannSolver, SolverConvergenceError
from .problem import CostWeights, Targets


@dataclass
class AdjointTrajectory:
    """Adjoint velocity/phase pairs per time level plus adjoint pressure."""

    grid: Grid2D
    times: np.ndarray
    au: list
    aphi: list
    api: list

    @property
    def nt(self) -> int:
        return len(self.times) - 1


def transpose_grad_contract(p: VectorField, u: VectorField) -> VectorField:
    """(p . grad^T u)_j = sum_i p_i d_j u_i, assembled at faces via centers."""
    dux_dx, dux_dy, duy_dx, duy_dy = full_gradient_cc(u, noslip=True)
    px, py = vector_to_cc(p)
    tx = px * dux_dx + py * duy_dx
    ty = px * dux_dy + py * duy_dy
    return cc_components_to_faces(u.grid, tx, ty, boundary="zero")


def face_dot_to_cc(p: VectorField, g: VectorField) -> np.ndarray:
    """Cell average of the facewise dot product p . g."""
    px = 0.5 * (p.ux[1:, :] * g.ux[1:, :] + p.ux[:-1, :] * g.ux[:-1, :])
    py = 0.5 * (p.uy[:, 1:] * g.uy[:, 1:] + p.uy[:, :-1] * g.uy[:, :-1])
    return px + py


class AdjointSolver:
    """Backward stepper bound to a forward solver and a stored trajectory."""

    def __init__(self, forward: ForwardSolver):
        self.fwd = forward

    def terminal_values(self, traj: StateTrajectory, targets: Targets,
                        weights: CostWeights):
        grid = self.fwd.grid
        seed = weights.b3 * (traj.u[-1] - targets.u_terminal)
        if weights.b3 != 0.0:
            au_T, _ = self.fwd.project(seed)     # realize the divergence-free seed
        else:
            au_T = VectorField.zeros(grid)
        aphi_T = ScalarField(grid, weights.b4
                             * (traj.phi[-1].values - targets.phi_terminal.values))
        return au_T, aphi_T

    def step_back(self, state_u: VectorField, state_phi: ScalarField,
                  state_mu: ScalarField, au_next: VectorField,
                  aphi_next: ScalarField, u_target: VectorField,
                  phi_target: ScalarField, weights: CostWeights):
        """One reversed-time step; returns (au, aphi, api) at the lower level."""
        fwd = self.fwd
        dt = fwd.scheme.dt
        grid = fwd.grid
        fwd.check_cfl(state_u)

        # adjoint momentum: explicit update in reversed time, then projection
        nu_cc = ScalarField(grid, fwd.viscosity.nu(state_phi.values))
        rhs = (div_viscous_stress(nu_cc, au_next)
               + advect_vector(state_u, au_next)
               - transpose_grad_contract(au_next, state_u)
               - kelvin_force(aphi_next, state_phi))
        if weights.b1 != 0.0:
            rhs = rhs + weights.b1 * (state_u - u_target)
        au_star = au_next + dt * rhs
        au_star.enforce_noslip_normal()
        au, api = fwd.project(au_star)

        # adjoint phase: stiff diffusion implicit, couplings explicit
        gphi = gradient_cc_to_face(state_phi)
        w = ScalarField(grid, face_dot_to_cc(au, gphi))
        nonlocal_coupling = (fwd.kernel.mass_field.values * w.values
                             - convolve(fwd.kernel, w).values
                             + fwd.potential.d2f(state_phi.values) * w.values)
        d_state = sym_gradient(state_u)
        d_adj = sym_gradient(au)
        visc_coupling = 2.0 * fwd.viscosity.dnu(state_phi.values) * (
            d_state.xx * d_adj.xx + 2.0 * d_state.xy * d_adj.xy
            + d_state.yy * d_adj.yy)
        transport = face_dot_to_cc(state_u, gradient_cc_to_face(aphi_next))
        mu_coupling = face_dot_to_cc(au, gradient_cc_to_face(state_mu))

        explicit = (grad_dot_convolve(fwd.kernel, aphi_next).values
                    + transport - visc_coupling + nonlocal_coupling - mu_coupling)
        if weights.b2 != 0.0:
            explicit = explicit + weights.b2 * (state_phi.values - phi_target.values)

        c_tilde = fwd.kernel.mass_field.values + fwd.potential.d2f(state_phi.values)
        if np.any(c_tilde <= 0.0):
            raise StepFailureError(
                "adjoint diffusion coefficient a + F''(phi) is not positive; "
                "the coercivity hypothesis fails on this state")
        rhs_phase = (aphi_next.values + dt * explicit) / c_tilde
        solver = HelmholtzNeumannSolver(grid, c_tilde, dt,
                                        maxiter=fwd.scheme.max_solver_iter)
        aphi_vals, _ = solver.solve(rhs_phase, atol=fwd._atol(rhs_phase))
        return au, ScalarField(grid, aphi_vals), api

    def run(self, traj: StateTrajectory, targets: Targets,
            weights: CostWeights) -> AdjointTrajectory:
        """March from the terminal conditions down to t = 0, storing all steps."""
        fwd = self.fwd
        nt = fwd.scheme.nt
        if traj.nt != nt:
            raise ValueError("state trajectory does not match the scheme")
        targets.validate(fwd.grid, nt, fwd.scheme.tol_p)
        au_T, aphi_T = self.terminal_values(traj, targets, weights)
        au = [None] * (nt + 1)
        aphi = [None] * (nt + 1)
        api = [None] * (nt + 1)
        au[nt], aphi[nt], api[nt] = au_T, aphi_T, ScalarField.zeros(fwd.grid)
        for n in range(nt - 1, -1, -1):
            try:
                au[n], aphi[n], api[n] = self.step_back(
                    traj.u[n], traj.phi[n], traj.mu[n], au[n + 1], aphi[n + 1],
                    targets.u_running[n], targets.phi_running[n], weights)
            except SolverConvergenceError as exc:
                raise StepFailureError(str(exc), step=n) from exc
        return AdjointTrajectory(fwd.grid, traj.times.copy(), au, aphi, api)


def run_adjoint(forward: ForwardSolver, traj: StateTrajectory, targets: Targets,
                weights: CostWeights) -> AdjointTrajectory:
    return AdjointSolver(forward).run(traj, targets, weights)
