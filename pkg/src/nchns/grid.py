"""Staggered (MAC) grid and the local finite-difference operators.

Scalars (order parameter, chemical potential, pressure, ...) live at cell
centers, velocity-like fields on cell faces.  All stencils are second order
in the interior; boundary closures implement the two boundary conditions the
solvers need: zero-flux mirror ghosts for cell-centered scalars and no-slip
reflection ghosts for face-centered velocities.

Array layout: a scalar field is an ``(nx, ny)`` array indexed ``[i, j]`` with
``i`` the x index; the x component of a vector field is ``(nx+1, ny)`` on
x-faces, the y component ``(nx, ny+1)`` on y-faces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridMismatchError(ValueError):
    """Raised when fields on different grids are combined."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular grid on [0, lx] x [0, ly] with nx*ny cells."""

    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid must be at least 4x4, got {self.nx}x{self.ny}")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("domain edge lengths must be positive")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy

    def cell_centers(self):
        """Meshgrid (X, Y) of cell-center coordinates, shape (nx, ny)."""
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    def xface_centers(self):
        x = np.arange(self.nx + 1) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    def yface_centers(self):
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = np.arange(self.ny + 1) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    def nodes(self):
        x = np.arange(self.nx + 1) * self.dx
        y = np.arange(self.ny + 1) * self.dy
        return np.meshgrid(x, y, indexing="ij")


def _require_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


@dataclass
class ScalarField:
    """Cell-centered scalar, values shape (nx, ny)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"scalar values shape {self.values.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )

    @classmethod
    def zeros(cls, grid: Grid2D) -> "ScalarField":
        return cls(grid, np.zeros((grid.nx, grid.ny)))

    @classmethod
    def full(cls, grid: Grid2D, value: float) -> "ScalarField":
        return cls(grid, np.full((grid.nx, grid.ny), float(value)))

    @classmethod
    def from_function(cls, grid: Grid2D, fn) -> "ScalarField":
        X, Y = grid.cell_centers()
        return cls(grid, np.asarray(fn(X, Y), dtype=np.float64))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def __add__(self, other):
        _require_same_grid(self, other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _require_same_grid(self, other)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, scalar: float):
        return ScalarField(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass
class VectorField:
    """Face-centered vector: ux on x-faces (nx+1, ny), uy on y-faces (nx, ny+1)."""

    grid: Grid2D
    ux: np.ndarray
    uy: np.ndarray

    def __post_init__(self):
        self.ux = np.asarray(self.ux, dtype=np.float64)
        self.uy = np.asarray(self.uy, dtype=np.float64)
        nx, ny = self.grid.nx, self.grid.ny
        if self.ux.shape != (nx + 1, ny) or self.uy.shape != (nx, ny + 1):
            raise ValueError(
                f"vector component shapes {self.ux.shape}, {self.uy.shape} do not "
                f"match grid ({nx + 1}, {ny}) / ({nx}, {ny + 1})"
            )

    @classmethod
    def zeros(cls, grid: Grid2D) -> "VectorField":
        return cls(grid, np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1)))

    @classmethod
    def from_functions(cls, grid: Grid2D, fx, fy) -> "VectorField":
        XF, YF = grid.xface_centers()
        XG, YG = grid.yface_centers()
        return cls(grid, np.asarray(fx(XF, YF), dtype=np.float64),
                   np.asarray(fy(XG, YG), dtype=np.float64))

    @classmethod
    def from_stream_function(cls, grid: Grid2D, psi_nodes: np.ndarray) -> "VectorField":
        """Exactly divergence-free field (d_y psi, -d_x psi) from node values.

        If ``psi_nodes`` is constant along the boundary the result is no-slip
        in the normal direction; if it vanishes on the whole boundary the
        tangential boundary faces are zero as well.
        """
        psi = np.asarray(psi_nodes, dtype=np.float64)
        if psi.shape != (grid.nx + 1, grid.ny + 1):
            raise ValueError("stream function must be given on grid nodes")
        ux = (psi[:, 1:] - psi[:, :-1]) / grid.dy
        uy = -(psi[1:, :] - psi[:-1, :]) / grid.dx
        return cls(grid, ux, uy)

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.ux.copy(), self.uy.copy())

    def enforce_noslip_normal(self) -> "VectorField":
        """Zero the boundary-normal faces in place; returns self."""
        self.ux[0, :] = 0.0
        self.ux[-1, :] = 0.0
        self.uy[:, 0] = 0.0
        self.uy[:, -1] = 0.0
        return self

    def __add__(self, other):
        _require_same_grid(self, other)
        return VectorField(self.grid, self.ux + other.ux, self.uy + other.uy)

    def __sub__(self, other):
        _require_same_grid(self, other)
        return VectorField(self.grid, self.ux - other.ux, self.uy - other.uy)

    def __mul__(self, scalar: float):
        return VectorField(self.grid, self.ux * scalar, self.uy * scalar)

    __rmul__ = __mul__


@dataclass
class TensorField:
    """Cell-centered 2x2 tensor with symmetric storage (xy is yx)."""

    grid: Grid2D
    xx: np.ndarray
    xy: np.ndarray
    yy: np.ndarray
    yx: np.ndarray = field(init=False)

    def __post_init__(self):
        self.yx = self.xy


# ---------------------------------------------------------------------------
# padding helpers (ghost layers)

def _pad_mirror_x(phi):
    """Neumann ghost columns: phi[-1] = phi[0], phi[nx] = phi[nx-1]."""
    return np.pad(phi, ((1, 1), (0, 0)), mode="edge")


def _pad_mirror_y(phi):
    return np.pad(phi, ((0, 0), (1, 1)), mode="edge")


def _pad_reflect_neg_y(w):
    """No-slip ghost rows for a tangential face component: w[-1] = -w[0]."""
    return np.concatenate([-w[:, :1], w, -w[:, -1:]], axis=1)


def _pad_reflect_neg_x(w):
    return np.concatenate([-w[:1, :], w, -w[-1:, :]], axis=0)


# ---------------------------------------------------------------------------
# first-order building blocks

def gradient_cc_to_face(phi: ScalarField) -> VectorField:
    """Cell-center to face gradient with zero gradient at boundary faces.

    Interior faces get the two-point centered difference; boundary faces are
    zero, consistent with the homogeneous Neumann conditions every scalar in
    the model carries.
    """
    g = phi.grid
    v = phi.values
    ux = np.zeros((g.nx + 1, g.ny))
    uy = np.zeros((g.nx, g.ny + 1))
    ux[1:-1, :] = (v[1:, :] - v[:-1, :]) / g.dx
    uy[:, 1:-1] = (v[:, 1:] - v[:, :-1]) / g.dy
    return VectorField(g, ux, uy)


def divergence_face_to_cc(w: VectorField) -> ScalarField:
    """Conservative per-cell flux difference."""
    g = w.grid
    out = (w.ux[1:, :] - w.ux[:-1, :]) / g.dx + (w.uy[:, 1:] - w.uy[:, :-1]) / g.dy
    return ScalarField(g, out)


def laplacian_neumann(phi: ScalarField) -> ScalarField:
    """5-point Laplacian with mirror (zero-flux) ghost cells."""
    g = phi.grid
    return ScalarField(g, laplacian_neumann_array(phi.values, g))


def laplacian_neumann_array(v: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Array-level Neumann Laplacian (hot path for the iterative solvers)."""
    px = _pad_mirror_x(v)
    py = _pad_mirror_y(v)
    return ((px[2:, :] - 2.0 * v + px[:-2, :]) / grid.dx ** 2
            + (py[:, 2:] - 2.0 * v + py[:, :-2]) / grid.dy ** 2)


# ---------------------------------------------------------------------------
# interpolation between staggered locations

def scalar_to_xfaces(phi: ScalarField, boundary: str = "edge") -> np.ndarray:
    """Average a cell scalar to x-faces; boundary faces copy the edge cell."""
    v = phi.values
    out = np.empty((phi.grid.nx + 1, phi.grid.ny))
    out[1:-1, :] = 0.5 * (v[1:, :] + v[:-1, :])
    if boundary == "edge":
        out[0, :] = v[0, :]
        out[-1, :] = v[-1, :]
    else:
        out[0, :] = 0.0
        out[-1, :] = 0.0
    return out


def scalar_to_yfaces(phi: ScalarField, boundary: str = "edge") -> np.ndarray:
    v = phi.values
    out = np.empty((phi.grid.nx, phi.grid.ny + 1))
    out[:, 1:-1] = 0.5 * (v[:, 1:] + v[:, :-1])
    if boundary == "edge":
        out[:, 0] = v[:, 0]
        out[:, -1] = v[:, -1]
    else:
        out[:, 0] = 0.0
        out[:, -1] = 0.0
    return out


def vector_to_cc(w: VectorField):
    """Per-component face-to-center average; returns (wx_cc, wy_cc) arrays."""
    wx = 0.5 * (w.ux[1:, :] + w.ux[:-1, :])
    wy = 0.5 * (w.uy[:, 1:] + w.uy[:, :-1])
    return wx, wy


def cc_components_to_faces(grid: Grid2D, tx: np.ndarray, ty: np.ndarray,
                           boundary: str = "zero") -> VectorField:
    """Interpolate cell-centered vector components onto faces."""
    ux = np.zeros((grid.nx + 1, grid.ny))
    uy = np.zeros((grid.nx, grid.ny + 1))
    ux[1:-1, :] = 0.5 * (tx[1:, :] + tx[:-1, :])
    uy[:, 1:-1] = 0.5 * (ty[:, 1:] + ty[:, :-1])
    if boundary == "edge":
        ux[0, :] = tx[0, :]
        ux[-1, :] = tx[-1, :]
        uy[:, 0] = ty[:, 0]
        uy[:, -1] = ty[:, -1]
    return VectorField(grid, ux, uy)


def uy_at_xfaces(w: VectorField) -> np.ndarray:
    """Average the y component to interior x-face locations (zero at boundary)."""
    g = w.grid
    out = np.zeros((g.nx + 1, g.ny))
    out[1:-1, :] = 0.25 * (w.uy[1:, :-1] + w.uy[1:, 1:] + w.uy[:-1, :-1] + w.uy[:-1, 1:])
    return out


def ux_at_yfaces(w: VectorField) -> np.ndarray:
    g = w.grid
    out = np.zeros((g.nx, g.ny + 1))
    out[:, 1:-1] = 0.25 * (w.ux[:-1, 1:] + w.ux[1:, 1:] + w.ux[:-1, :-1] + w.ux[1:, :-1])
    return out


# ---------------------------------------------------------------------------
# derived operators

def _node_shear_rates(u: VectorField):
    """(d_y ux, d_x uy) at grid nodes with no-slip reflection ghosts."""
    g = u.grid
    uxp = _pad_reflect_neg_y(u.ux)      # (nx+1, ny+2)
    duxdy = (uxp[:, 1:] - uxp[:, :-1]) / g.dy          # (nx+1, ny+1) at nodes
    uyp = _pad_reflect_neg_x(u.uy)      # (nx+2, ny+1)
    duydx = (uyp[1:, :] - uyp[:-1, :]) / g.dx          # (nx+1, ny+1)
    return duxdy, duydx


def _nodes_to_cc(n: np.ndarray) -> np.ndarray:
    return 0.25 * (n[1:, 1:] + n[1:, :-1] + n[:-1, 1:] + n[:-1, :-1])


def sym_gradient(u: VectorField) -> TensorField:
    """Symmetric gradient (grad u + grad u^T)/2 averaged to cell centers.

    Assumes ``u`` carries the no-slip condition; the off-diagonal entry uses
    reflection ghosts so the velocity interpolates to zero on the walls.
    """
    g = u.grid
    dxx = (u.ux[1:, :] - u.ux[:-1, :]) / g.dx
    dyy = (u.uy[:, 1:] - u.uy[:, :-1]) / g.dy
    duxdy, duydx = _node_shear_rates(u)
    dxy = _nodes_to_cc(0.5 * (duxdy + duydx))
    return TensorField(g, dxx, dxy, dyy)


def full_gradient_cc(u: VectorField, noslip: bool = True):
    """All four entries of grad u at cell centers.

    Returns (dux_dx, dux_dy, duy_dx, duy_dy).  With ``noslip=False`` the
    off-diagonal node stencils use edge replication instead of reflection
    (for fields that do not vanish on the boundary).
    """
    g = u.grid
    dxx = (u.ux[1:, :] - u.ux[:-1, :]) / g.dx
    dyy = (u.uy[:, 1:] - u.uy[:, :-1]) / g.dy
    if noslip:
        duxdy, duydx = _node_shear_rates(u)
    else:
        uxp = np.pad(u.ux, ((0, 0), (1, 1)), mode="edge")
        duxdy = (uxp[:, 1:] - uxp[:, :-1]) / g.dy
        uyp = np.pad(u.uy, ((1, 1), (0, 0)), mode="edge")
        duydx = (uyp[1:, :] - uyp[:-1, :]) / g.dx
    return dxx, _nodes_to_cc(duxdy), _nodes_to_cc(duydx), dyy


class HypothesisViolationError(ValueError):
    """Raised when an input violates one of the model hypotheses."""


def div_viscous_stress(nu_cc: ScalarField, u: VectorField,
                       require_positive: bool = True) -> VectorField:
    """Conservative discretization of 2 div(nu D u) on faces.

    The viscosity is given at cell centers and averaged arithmetically to the
    nodes where the shear stress lives.  ``require_positive`` applies to the
    physical viscosity; linearized solvers pass products like nu'(phi)*eta
    that may change sign.
    """
    _require_same_grid(nu_cc, u)
    if require_positive and np.any(nu_cc.values <= 0.0):
        raise HypothesisViolationError("viscosity must be positive everywhere")
    g = u.grid
    nu = nu_cc.values
    dxx = (u.ux[1:, :] - u.ux[:-1, :]) / g.dx
    dyy = (u.uy[:, 1:] - u.uy[:, :-1]) / g.dy
    duxdy, duydx = _node_shear_rates(u)
    d12 = 0.5 * (duxdy + duydx)
    nu_node = _nodes_from_cc(nu)
    txx = 2.0 * nu * dxx
    tyy = 2.0 * nu * dyy
    txy = 2.0 * nu_node * d12
    ux = np.zeros((g.nx + 1, g.ny))
    uy = np.zeros((g.nx, g.ny + 1))
    ux[1:-1, :] = (txx[1:, :] - txx[:-1, :]) / g.dx \
        + (txy[1:-1, 1:] - txy[1:-1, :-1]) / g.dy
    uy[:, 1:-1] = (tyy[:, 1:] - tyy[:, :-1]) / g.dy \
        + (txy[1:, 1:-1] - txy[:-1, 1:-1]) / g.dx
    return VectorField(g, ux, uy)


def _nodes_from_cc(c: np.ndarray) -> np.ndarray:
    """4-point average of a cell field to nodes (edge replication outside)."""
    p = np.pad(c, 1, mode="edge")
    return 0.25 * (p[1:, 1:] + p[1:, :-1] + p[:-1, 1:] + p[:-1, :-1])


def advect_scalar(u: VectorField, phi: ScalarField) -> ScalarField:
    """div(u phi) in conservative flux form with centered face interpolation.

    For discretely divergence-free u this equals u . grad phi; the cell sum of
    the output vanishes to round-off because the boundary fluxes are zero.
    """
    _require_same_grid(u, phi)
    g = phi.grid
    v = phi.values
    fx = np.zeros((g.nx + 1, g.ny))
    fy = np.zeros((g.nx, g.ny + 1))
    fx[1:-1, :] = u.ux[1:-1, :] * 0.5 * (v[1:, :] + v[:-1, :])
    fy[:, 1:-1] = u.uy[:, 1:-1] * 0.5 * (v[:, 1:] + v[:, :-1])
    return divergence_face_to_cc(VectorField(g, fx, fy))


def advect_vector(u: VectorField, w: VectorField) -> VectorField:
    """(u . grad) w per component with centered differences on faces."""
    _require_same_grid(u, w)
    g = u.grid
    out_x = np.zeros((g.nx + 1, g.ny))
    out_y = np.zeros((g.nx, g.ny + 1))

    dwx_dx = (w.ux[2:, :] - w.ux[:-2, :]) / (2.0 * g.dx)           # interior x-faces
    wxp = _pad_reflect_neg_y(w.ux)
    dwx_dy = (wxp[1:-1, 2:] - wxp[1:-1, :-2]) / (2.0 * g.dy)
    uy_x = uy_at_xfaces(u)
    out_x[1:-1, :] = u.ux[1:-1, :] * dwx_dx + uy_x[1:-1, :] * dwx_dy

    dwy_dy = (w.uy[:, 2:] - w.uy[:, :-2]) / (2.0 * g.dy)
    wyp = _pad_reflect_neg_x(w.uy)
    dwy_dx = (wyp[2:, 1:-1] - wyp[:-2, 1:-1]) / (2.0 * g.dx)
    ux_y = ux_at_yfaces(u)
    out_y[:, 1:-1] = u.uy[:, 1:-1] * dwy_dy + ux_y[:, 1:-1] * dwy_dx
    return VectorField(g, out_x, out_y)


# ---------------------------------------------------------------------------
# inner products / norms

def _xface_weights(grid: Grid2D) -> np.ndarray:
    w = np.ones((grid.nx + 1, grid.ny))
    w[0, :] = 0.5
    w[-1, :] = 0.5
    return w


def _yface_weights(grid: Grid2D) -> np.ndarray:
    w = np.ones((grid.nx, grid.ny + 1))
    w[:, 0] = 0.5
    w[:, -1] = 0.5
    return w


def inner_product_l2(f, g) -> float:
    """Midpoint-quadrature L2 inner product for matching field types.

    Face values are weighted by the volume of their dual cell (half cells at
    the boundary), so the measure of the domain is reproduced exactly.
    """
    _require_same_grid(f, g)
    vol = f.grid.cell_volume
    if isinstance(f, ScalarField) and isinstance(g, ScalarField):
        return float(np.vdot(f.values, g.values) * vol)
    if isinstance(f, VectorField) and isinstance(g, VectorField):
        wx = _xface_weights(f.grid)
        wy = _yface_weights(f.grid)
        return float((np.vdot(f.ux * wx, g.ux) + np.vdot(f.uy * wy, g.uy)) * vol)
    raise TypeError("inner_product_l2 requires two fields of the same kind")


def norm_l2(f) -> float:
    return float(np.sqrt(max(inner_product_l2(f, f), 0.0)))


def integral(phi: ScalarField) -> float:
    return float(np.sum(phi.values) * phi.grid.cell_volume)
