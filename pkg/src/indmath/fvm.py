"""Finite-volume steady advection-diffusion solver used to check the plume formula.

Solves ``U dC/dx = Ky d2C/dy2 + Kz d2C/dz2 + Q delta`` on a uniform box with
first-order upwind advection in x and central diffusion in y and z.
Boundaries: zero inflow at x = x0, convective outflow at the far x face,
zero flux on the ground, top and sides. The point source is one cell.

With constant diffusivities the plume formula is an exact solution of the
same equation (``sigma**2 = 2 K x / U``), which makes it a true reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import GridMismatch, NotConverged
from .plume import DispersionSpec, Source, concentration


@dataclass(frozen=True)
class Grid3D:
    """Uniform cell grid on ``[x0, x0+lx] x [y0, y0+ly] x [0, lz]``."""

    nx: int
    ny: int
    nz: int
    lx: float
    ly: float
    lz: float
    x0: float = 0.0
    y0: float | None = None  # default centers the domain on y = 0

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 2:
            raise ValueError("cell counts must be >= 2")
        if min(self.lx, self.ly, self.lz) <= 0:
            raise ValueError("extents must be > 0")

    @classmethod
    def cube(cls, n, lx, ly, lz, **kw) -> "Grid3D":
        return cls(n, n, n, lx, ly, lz, **kw)

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def spacing(self):
        return self.lx / self.nx, self.ly / self.ny, self.lz / self.nz

    @property
    def ylo(self):
        return -0.5 * self.ly if self.y0 is None else self.y0

    def centers(self):
        dx, dy, dz = self.spacing
        return (
            self.x0 + (np.arange(self.nx) + 0.5) * dx,
            self.ylo + (np.arange(self.ny) + 0.5) * dy,
            (np.arange(self.nz) + 0.5) * dz,
        )

    def locate(self, point):
        """Index of the cell containing ``point``; raises if outside."""
        dx, dy, dz = self.spacing
        x, y, z = point
        idx = (
            int(math.floor((x - self.x0) / dx)),
            int(math.floor((y - self.ylo) / dy)),
            int(math.floor(z / dz)),
        )
        if not all(0 <= i < n for i, n in zip(idx, self.shape)):
            raise ValueError(f"point {point} lies outside the grid")
        return idx


@dataclass(frozen=True)
class FvmParams:
    u_speed: float
    ky: float
    kz: float
    source: tuple[float, float, float]
    q: float = 1.0

    def __post_init__(self):
        if not self.u_speed > 0:
            raise ValueError("u_speed must be > 0")
        if not (self.ky > 0 and self.kz > 0):
            raise ValueError("diffusivities must be > 0")


@dataclass
class Field3D:
    grid: Grid3D
    values: np.ndarray
    converged: bool = True
    iterations: int = 0
    last_update: float = 0.0
    meta: dict = field(default_factory=dict)


def _neumann_second_difference(n, h):
    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


def _plane_operator(grid, params):
    # per unit volume: (U/dx) C_i - Ky Dyy C_i - Kz Dzz C_i = (U/dx) C_{i-1} + S_i
    dx, dy, dz = grid.spacing
    Dy = _neumann_second_difference(grid.ny, dy)
    Dz = _neumann_second_difference(grid.nz, dz)
    diff = params.ky * sp.kron(Dy, sp.identity(grid.nz)) + params.kz * sp.kron(sp.identity(grid.ny), Dz)
    return (params.u_speed / dx) * sp.identity(grid.ny * grid.nz) - diff


def fvm_steady_solve(grid: Grid3D, params: FvmParams, tol=1e-10, max_iter=20, strict=False) -> Field3D:
    """Steady field by plane-implicit Gauss-Seidel sweeps along the wind.

    Each sweep visits the x-planes in upwind order and solves the y-z
    diffusion system of a plane exactly, using the newest upstream plane.
    Sweeps repeat until the relative update drops below ``tol``. Because
    advection is upwinded and there is no streamwise diffusion, the
    operator is block lower triangular and the second sweep confirms
    convergence. ``strict=True`` raises :class:`NotConverged` instead of
    returning a flagged field.
    """
    i_s, j_s, k_s = grid.locate(params.source)
    dx, dy, dz = grid.spacing
    lu = spla.splu(_plane_operator(grid, params).tocsc())
    c = np.zeros(grid.shape)
    a = params.u_speed / dx
    src = params.q / (dx * dy * dz)

    update = np.inf
    it = 0
    while it < max_iter:
        it += 1
        delta = 0.0
        upstream = np.zeros(grid.ny * grid.nz)
        for i in range(grid.nx):
            rhs = a * upstream
            if i == i_s:
                rhs[j_s * grid.nz + k_s] += src
            plane = lu.solve(rhs)
            delta = max(delta, float(np.max(np.abs(plane - c[i].ravel()))))
            c[i] = plane.reshape(grid.ny, grid.nz)
            upstream = plane
        scale = float(np.max(np.abs(c)))
        update = delta / scale if scale > 0 else delta
        if update < tol:
            break
    converged = update < tol
    if strict and not converged:
        raise NotConverged(f"relative update {update:.3e} after {it} sweeps")
    return Field3D(grid, c, converged, it, update, {"source_cell": (i_s, j_s, k_s)})


def flux_residual(field: Field3D, params: FvmParams) -> float:
    """Largest cell flux imbalance relative to the source strength (or peak flux)."""
    grid = field.grid
    dx, dy, dz = grid.spacing
    c = field.values
    adv = params.u_speed * dy * dz * (c - np.concatenate([np.zeros((1, grid.ny, grid.nz)), c[:-1]], axis=0))
    fy = np.diff(c, axis=1) * params.ky * dx * dz / dy  # flux into cell j from j+1
    fz = np.diff(c, axis=2) * params.kz * dx * dy / dz
    net_diff = np.zeros_like(c)
    net_diff[:, :-1, :] += fy
    net_diff[:, 1:, :] -= fy
    net_diff[:, :, :-1] += fz
    net_diff[:, :, 1:] -= fz
    res = adv - net_diff
    i_s, j_s, k_s = grid.locate(params.source)
    res[i_s, j_s, k_s] -= params.q
    scale = max(abs(params.q), float(np.max(np.abs(params.u_speed * dy * dz * c))), np.finfo(float).tiny)
    return float(np.max(np.abs(res)) / scale)


def boundary_outflux(field: Field3D, params: FvmParams) -> float:
    """Net mass leaving the domain per unit time (g/s); only the outflow face carries flux."""
    _, dy, dz = field.grid.spacing
    return float(params.u_speed * dy * dz * field.values[-1].sum())


def matched_source(grid: Grid3D, params: FvmParams) -> Source:
    """Point source at the center of the cell that receives ``q``."""
    i, j, k = grid.locate(params.source)
    xc, yc, zc = grid.centers()
    return Source(float(xc[i]), float(yc[j]), float(zc[k]), params.q)


def analytic_field(grid: Grid3D, params: FvmParams) -> Field3D:
    """Plume formula sampled at cell centers with ``sigma**2 = 2 K x / U``."""
    src = matched_source(grid, params)
    spec = DispersionSpec.from_diffusivity(params.ky, params.kz, params.u_speed)
    X, Y, Z = np.meshgrid(*grid.centers(), indexing="ij")
    vals = concentration(src, params.u_speed, spec, (X, Y, Z))
    return Field3D(grid, np.asarray(vals, dtype=float))


@dataclass(frozen=True)
class ErrorReport:
    rel_l2: float
    max_abs: float
    rel_max: float
    n_cells: int
    h: float

    def lines(self):
        return [f"{k}={v:.12g}" if isinstance(v, float) else f"{k}={v}" for k, v in vars(self).items()]


def compare_to_analytic(field: Field3D, params: FvmParams, min_downwind=None, reference: Field3D | None = None) -> ErrorReport:
    """Errors of ``field`` against the matched plume solution.

    Only cells more than ``min_downwind`` (default five cells) downwind of
    the source cell center are compared, which excludes the region where the
    one-cell source dominates.
    """
    grid = field.grid
    if field.values.shape != grid.shape:
        raise GridMismatch(f"field shape {field.values.shape} does not match grid {grid.shape}")
    ref = reference if reference is not None else analytic_field(grid, params)
    if ref.values.shape != field.values.shape:
        raise GridMismatch(f"reference shape {ref.values.shape} != field shape {field.values.shape}")
    dx = grid.spacing[0]
    if min_downwind is None:
        min_downwind = 5 * dx
    xs = matched_source(grid, params).x
    xc = grid.centers()[0]
    mask = (xc - xs) > min_downwind
    num = field.values[mask]
    exact = ref.values[mask]
    if exact.size == 0:
        raise GridMismatch("no cells lie beyond the comparison cutoff")
    err = num - exact
    norm = float(np.linalg.norm(exact))
    peak = float(np.max(np.abs(exact)))
    return ErrorReport(
        rel_l2=float(np.linalg.norm(err) / norm) if norm > 0 else float(np.linalg.norm(err)),
        max_abs=float(np.max(np.abs(err))),
        rel_max=float(np.max(np.abs(err)) / peak) if peak > 0 else float(np.max(np.abs(err))),
        n_cells=int(err.size),
        h=float(dx),
    )


def observed_orders(reports):
    """Convergence orders ``log(e_k / e_{k+1}) / log(h_k / h_{k+1})`` of relative L2 errors."""
    return [
        math.log(a.rel_l2 / b.rel_l2) / math.log(a.h / b.h) for a, b in zip(reports[:-1], reports[1:])
    ]


@dataclass
class RefinementStudy:
    levels: list[int]
    reports: list[ErrorReport]
    orders: list[float]
    mass_balance: list[float]
    flux_residuals: list[float]

    def lines(self):
        out = []
        for n, rep, mb, fr in zip(self.levels, self.reports, self.mass_balance, self.flux_residuals):
            out.append(f"level={n}")
            out.extend(rep.lines())
            out.append(f"mass_balance_rel={mb:.12g}")
            out.append(f"flux_residual_rel={fr:.12g}")
        for (a, b), p in zip(zip(self.levels[:-1], self.levels[1:]), self.orders):
            out.append(f"order_{a}_{b}={p:.12g}")
        return out


#: box and flow used by the default validation study
DEFAULT_DOMAIN = dict(lx=1000.0, ly=400.0, lz=200.0)
DEFAULT_PARAMS = FvmParams(u_speed=5.0, ky=4.0, kz=2.0, source=(50.0, 0.0, 50.0), q=1.0)


def refinement_study(levels=(32, 64, 128), params: FvmParams = DEFAULT_PARAMS, domain=None) -> RefinementStudy:
    """Solve on ``n^3`` grids and measure error against the plume formula.

    The comparison cutoff is fixed at five cells of the coarsest grid so all
    levels are measured over the same region.
    """
    domain = dict(DEFAULT_DOMAIN if domain is None else domain)
    levels = list(levels)
    cutoff = 5 * domain["lx"] / levels[0]
    reports, mass, fluxes = [], [], []
    for n in levels:
        grid = Grid3D.cube(n, **domain)
        fld = fvm_steady_solve(grid, params)
        reports.append(compare_to_analytic(fld, params, min_downwind=cutoff))
        mass.append(abs(boundary_outflux(fld, params) - params.q) / params.q)
        fluxes.append(flux_residual(fld, params))
    return RefinementStudy(levels, reports, observed_orders(reports), mass, fluxes)
