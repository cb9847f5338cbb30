"""Constrained relaxation of circle-valued lattice fields and the solvers
built on it: vortex core energy, harmonic boundary-value extension,
renormalized energy, and the excised-ball minimum with free ring phases.

The relaxation is checkerboard coordinate descent: every free site is set
to the normalized sum of its present neighbors, the exact one-site
minimizer of the quadratic chord energy on the unit circle, so the energy
never increases at any update.  Sites of one parity are updated
simultaneously (they only interact with the other parity), then the
colors swap; the result is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constructions import VortexSpec, vortex_field
from .energy import xy_energy
from .errors import InvalidArgumentError
from .geometry import Domain, rotate, unit_from_angle
from .lattice import Lattice, SpinField, build_lattice, discrete_boundary
from .solver_limits import (
    LAPLACE_MAX_SWEEPS,
    LAPLACE_RESIDUAL,
    RELAX_MAX_SWEEPS,
    RELAX_TOL,
)
from .vorticity import VortexMeasure

TWO_PI = 2.0 * np.pi


@dataclass
class BoundaryCondition:
    """Prescribed unit values on a set of lattice sites."""

    sites: np.ndarray      # ordinals
    values: np.ndarray     # (m, 2) unit vectors

    @staticmethod
    def empty() -> "BoundaryCondition":
        return BoundaryCondition(np.empty(0, dtype=np.int64), np.empty((0, 2)))


@dataclass
class MinimizationResult:
    field: SpinField
    energy: float
    iterations: int        # completed sweeps (each sweep updates both colors)
    residual: float        # max angular update during the last sweep
    converged: bool


class _GridRelaxer:
    """Dense-grid embedding of a lattice for checkerboard sweeps."""

    def __init__(self, lat: Lattice, free: np.ndarray):
        imin = lat.ij[:, 0].min()
        jmin = lat.ij[:, 1].min()
        ni = lat.ij[:, 0].max() - imin + 1
        nj = lat.ij[:, 1].max() - jmin + 1
        self.ii = lat.ij[:, 0] - imin + 1
        self.jj = lat.ij[:, 1] - jmin + 1
        shape = (ni + 2, nj + 2)
        self.X = np.zeros(shape)
        self.Y = np.zeros(shape)
        parity = (lat.ij[:, 0] + lat.ij[:, 1]) % 2
        self.upd_masks = []
        for color in (0, 1):
            mask = np.zeros(shape, dtype=bool)
            sel = free & (parity == color)
            mask[self.ii[sel], self.jj[sel]] = True
            self.upd_masks.append(mask)

    def set_values(self, values: np.ndarray) -> None:
        self.X[self.ii, self.jj] = values[:, 0]
        self.Y[self.ii, self.jj] = values[:, 1]

    def get_values(self) -> np.ndarray:
        return np.column_stack([self.X[self.ii, self.jj], self.Y[self.ii, self.jj]])

    def sweep(self) -> float:
        """One full checkerboard sweep; returns the max angular update."""
        if _kernels.HAVE_NUMBA:
            return float(_kernels.spin_sweep(self.X, self.Y, *self.upd_masks))
        return self._sweep_numpy()

    def _sweep_numpy(self) -> float:
        worst = 0.0
        X, Y = self.X, self.Y
        cx = X[1:-1, 1:-1]
        cy = Y[1:-1, 1:-1]
        for mask in self.upd_masks:
            sx = X[2:, 1:-1] + X[:-2, 1:-1] + X[1:-1, 2:] + X[1:-1, :-2]
            sy = Y[2:, 1:-1] + Y[:-2, 1:-1] + Y[1:-1, 2:] + Y[1:-1, :-2]
            norm = np.hypot(sx, sy)
            upd = mask[1:-1, 1:-1] & (norm > 0.0)
            if not np.any(upd):
                continue
            nx = sx[upd] / norm[upd]
            ny = sy[upd] / norm[upd]
            # atan2 keeps full precision for tiny updates, unlike arccos
            dot = cx[upd] * nx + cy[upd] * ny
            cross = cx[upd] * ny - cy[upd] * nx
            worst = max(worst, float(np.max(np.arctan2(np.abs(cross), dot))))
            cx[upd] = nx
            cy[upd] = ny
        return worst


def relax(
    u0: SpinField,
    bc: BoundaryCondition,
    tol: float = RELAX_TOL,
    max_sweeps: int = RELAX_MAX_SWEEPS,
) -> MinimizationResult:
    """Checkerboard coordinate descent from u0 at fixed boundary values.

    Stops when the largest per-site angular update in a sweep drops below
    tol; hitting max_sweeps first flags the result instead of raising.
    Sites whose neighbor sum vanishes keep their current value.
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    lat = u0.lattice
    values = u0.values.copy()
    fixed = np.zeros(lat.n_sites, dtype=bool)
    if len(bc.sites):
        sites = np.asarray(bc.sites, dtype=np.int64)
        if sites.min() < 0 or sites.max() >= lat.n_sites:
            raise InvalidArgumentError("boundary sites must belong to the lattice")
        fixed[sites] = True
        values[sites] = bc.values
    free = ~fixed
    if not np.any(free):
        field = SpinField(lat, values)
        return MinimizationResult(field, xy_energy(field), 0, 0.0, True)

    relaxer = _GridRelaxer(lat, free)
    relaxer.set_values(values)
    residual = np.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        residual = relaxer.sweep()
        if residual < tol:
            break
    field = SpinField(lat, _renormalize(relaxer.get_values()))
    return MinimizationResult(
        field, xy_energy(field), sweeps, residual, residual < tol
    )


def _renormalize(values: np.ndarray) -> np.ndarray:
    norm = np.hypot(values[:, 0], values[:, 1])
    return values / norm[:, None]


# ---------------------------------------------------------------------------
# vortex core energy
# ---------------------------------------------------------------------------

def core_energy_solve(
    eps: float,
    r: float,
    center=(0.0, 0.0),
    tol: float = RELAX_TOL,
    max_sweeps: int = RELAX_MAX_SWEEPS,
) -> tuple[float, MinimizationResult]:
    """Minimize the scaled energy on the eps-lattice of the ball B_r(center)
    with radial boundary values on the sites within eps of the sphere;
    returns (energy / eps^2, relaxation diagnostics)."""
    ball = Domain.disk(center[0], center[1], r)
    lat = build_lattice(ball, eps)
    ring = discrete_boundary(lat, ball)
    u0 = vortex_field(lat, VortexSpec(tuple(center), 1))
    bc = BoundaryCondition(ring, u0.values[ring])
    result = relax(u0, bc, tol=tol, max_sweeps=max_sweeps)
    return result.energy / eps ** 2, result


def core_energy(eps, r, center=(0.0, 0.0), tol=RELAX_TOL, max_sweeps=RELAX_MAX_SWEEPS) -> float:
    return core_energy_solve(eps, r, center, tol, max_sweeps)[0]


def core_energy_limit(eps_list, r, center=(0.0, 0.0), tol=RELAX_TOL,
                      max_sweeps=RELAX_MAX_SWEEPS) -> np.ndarray:
    """Values of core_energy(eps, r) - 2*pi*log(r/eps) along decreasing eps."""
    eps_arr = np.asarray(eps_list, dtype=float)
    if np.any(np.diff(eps_arr) >= 0):
        raise InvalidArgumentError("eps_list must be strictly decreasing")
    out = []
    for eps in eps_arr:
        gamma = core_energy(eps, r, center, tol, max_sweeps)
        out.append(gamma - TWO_PI * np.log(r / eps))
    return np.asarray(out)


# ---------------------------------------------------------------------------
# harmonic extension and renormalized energy
# ---------------------------------------------------------------------------

class HarmonicGrid:
    """Five-point Laplace solution on a uniform grid with bilinear evaluation."""

    def __init__(self, x0, y0, h, values, unknown, residual, sweeps, converged):
        self.x0 = x0
        self.y0 = y0
        self.h = h
        self.values = values
        self.unknown = unknown
        self.residual = residual
        self.sweeps = sweeps
        self.converged = converged

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        fx = (p[..., 0] - self.x0) / self.h
        fy = (p[..., 1] - self.y0) / self.h
        ix = np.clip(np.floor(fx).astype(int), 0, self.values.shape[0] - 2)
        iy = np.clip(np.floor(fy).astype(int), 0, self.values.shape[1] - 2)
        tx = fx - ix
        ty = fy - iy
        v = self.values
        return (
            v[ix, iy] * (1 - tx) * (1 - ty)
            + v[ix + 1, iy] * tx * (1 - ty)
            + v[ix, iy + 1] * (1 - tx) * ty
            + v[ix + 1, iy + 1] * tx * ty
        )


def solve_laplace_dirichlet(
    domain: Domain,
    grid_h: float,
    g,
    residual_tol: float = LAPLACE_RESIDUAL,
    max_sweeps: int = LAPLACE_MAX_SWEEPS,
) -> HarmonicGrid:
    """Dirichlet problem for the Laplacian with boundary data g.

    Rectangle boundaries fall on grid nodes.  For the disk, nodes inside
    are unknowns and every outside node adjacent to an unknown carries the
    datum at its radial projection onto the circle (first-order embedded
    boundary).  Red-black SOR runs until the max-norm residual of the
    five-point stencil update drops below residual_tol.
    """
    if not grid_h > 0:
        raise InvalidArgumentError("grid_h must be positive")
    xmin, xmax, ymin, ymax = domain.bbox
    if domain.kind == "rectangle":
        nx = max(int(round((xmax - xmin) / grid_h)), 2) + 1
        ny = max(int(round((ymax - ymin) / grid_h)), 2) + 1
        # keep the grid uniform: a common step close to the request
        h = min((xmax - xmin) / (nx - 1), (ymax - ymin) / (ny - 1))
        nx = int(round((xmax - xmin) / h)) + 1
        ny = int(round((ymax - ymin) / h)) + 1
        x0, y0 = xmin, ymin
    else:
        h = grid_h
        x0 = xmin - h
        y0 = ymin - h
        nx = int(np.ceil((xmax + h - x0) / h)) + 1
        ny = int(np.ceil((ymax + h - y0) / h)) + 1

    xs = x0 + h * np.arange(nx)
    ys = y0 + h * np.arange(ny)
    px, py = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.stack([px, py], axis=-1)

    values = np.zeros((nx, ny))
    if domain.kind == "rectangle":
        unknown = np.zeros((nx, ny), dtype=bool)
        unknown[1:-1, 1:-1] = True
        dirichlet = ~unknown
        values[dirichlet] = np.asarray(g(nodes[dirichlet]), dtype=float)
    else:
        cx, cy, r = domain.params
        sd = domain.signed_dist(nodes)
        unknown = sd > 0
        near = np.zeros_like(unknown)
        near[1:, :] |= unknown[:-1, :]
        near[:-1, :] |= unknown[1:, :]
        near[:, 1:] |= unknown[:, :-1]
        near[:, :-1] |= unknown[:, 1:]
        dirichlet = near & ~unknown
        d_nodes = nodes[dirichlet]
        radial = d_nodes - np.array([cx, cy])
        proj = np.array([cx, cy]) + r * radial / np.hypot(radial[:, 0], radial[:, 1])[:, None]
        values[dirichlet] = np.asarray(g(proj), dtype=float)

    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    omega = 2.0 / (1.0 + np.sin(np.pi / max(nx, ny)))
    colors = [unknown & ((ix + iy) % 2 == c) for c in (0, 1)]

    converged = False
    residual = np.inf
    sweeps = 0
    v = values
    if _kernels.HAVE_NUMBA:
        for sweeps in range(1, max_sweeps + 1):
            _kernels.sor_sweep(v, colors[0], colors[1], omega)
            residual = float(_kernels.laplace_residual(v, unknown))
            if residual < residual_tol:
                converged = True
                break
    else:
        core = v[1:-1, 1:-1]
        core_colors = [c[1:-1, 1:-1] for c in colors]
        inner_unknown = unknown[1:-1, 1:-1]
        for sweeps in range(1, max_sweeps + 1):
            for cmask in core_colors:
                avg = 0.25 * (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2])
                core[cmask] += omega * (avg[cmask] - core[cmask])
            avg = 0.25 * (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2])
            residual = float(np.max(np.abs(avg[inner_unknown] - core[inner_unknown]), initial=0.0))
            if residual < residual_tol:
                converged = True
                break
    return HarmonicGrid(x0, y0, h, values, unknown, residual, sweeps, converged)


def harmonic_R0(mu: VortexMeasure, grid_h: float, **solver_kw) -> HarmonicGrid:
    """Harmonic function matching -sum_h d_h log|x - x_h| on the boundary."""
    pos = mu.positions
    chg = mu.charges
    if len(pos) and np.any(mu.domain.signed_dist(pos) <= 1e-12):
        raise InvalidArgumentError("vortex atoms must lie strictly inside the domain")

    def g(points):
        points = np.atleast_2d(points)
        out = np.zeros(len(points))
        for (x, y), d in zip(pos, chg):
            out -= d * np.log(np.hypot(points[:, 0] - x, points[:, 1] - y))
        return out

    return solve_laplace_dirichlet(mu.domain, grid_h, g, **solver_kw)


def renormalized_energy(mu: VortexMeasure, grid_h: float, **solver_kw) -> float:
    """Finite vortex interaction energy:

        -2*pi * sum_{h != k} d_h d_k log|x_h - x_k| - 2*pi * sum_h d_h R0(x_h)

    with R0 the harmonic extension computed by harmonic_R0 (ordered pairs:
    each unordered pair counts twice)."""
    pos = mu.positions
    chg = mu.charges.astype(float)
    if len(pos) == 0:
        raise InvalidArgumentError("renormalized energy needs at least one atom")
    if len(pos) > 1:
        ii, jj = np.triu_indices(len(pos), k=1)
        dist = np.hypot(*(pos[ii] - pos[jj]).T)
        if np.any(dist < 1e-12):
            raise InvalidArgumentError("coincident vortex atoms")
        pair = -TWO_PI * 2.0 * np.sum(chg[ii] * chg[jj] * np.log(dist))
    else:
        pair = 0.0
    r0 = harmonic_R0(mu, grid_h, **solver_kw)
    return float(pair - TWO_PI * np.sum(chg * r0(pos)))


# ---------------------------------------------------------------------------
# excised-ball minimum with free ring phases
# ---------------------------------------------------------------------------

@dataclass
class RenormalizedInput:
    """Vortex configuration, excision radius, and lattice step for the
    discrete Dirichlet minimization with free per-ball phases."""

    measure: VortexMeasure
    eta: float
    grid_h: float

    def __post_init__(self):
        pos = self.measure.positions
        if len(pos) == 0:
            raise InvalidArgumentError("the vortex configuration is empty")
        if np.any(self.measure.domain.signed_dist(pos) <= self.eta):
            raise InvalidArgumentError("excised balls must stay inside the domain")
        if len(pos) > 1:
            ii, jj = np.triu_indices(len(pos), k=1)
            if np.min(np.hypot(*(pos[ii] - pos[jj]).T)) < 2 * self.eta:
                raise InvalidArgumentError("excised balls overlap")


@dataclass
class MTildeResult:
    value: float
    alpha: np.ndarray        # (M, 2) optimized ring phases
    alternations: int
    converged: bool
    relax_sweeps: int
    energy_trace: list[float]   # reported energy after each round


def m_tilde_solve(
    inp: RenormalizedInput,
    tol: float = 1e-8,
    max_sweeps: int = RELAX_MAX_SWEEPS,
    max_alternations: int = 50,
) -> MTildeResult:
    """Alternating minimization of the discrete Dirichlet energy outside the
    excised balls.

    Ball sites carry the rotated radial power field; the outer boundary is
    free (natural condition of the discrete energy).  Each round relaxes
    the free sites, then each ball phase is set to the exact minimizer
    given the field across its seam bonds.  The reported value sums the
    squared chords over bonds with at least one endpoint outside every
    ball.
    """
    mu = inp.measure
    eta = inp.eta
    lat = build_lattice(mu.domain, inp.grid_h)
    pos = mu.positions
    n_atoms = len(pos)

    radial = np.zeros((n_atoms, lat.n_sites, 2))
    in_ball = np.zeros((n_atoms, lat.n_sites), dtype=bool)
    base_angle = np.zeros(lat.n_sites)
    for h in range(n_atoms):
        dx = lat.xy - pos[h]
        r = np.hypot(dx[:, 0], dx[:, 1])
        ang = np.arctan2(dx[:, 1], dx[:, 0])
        base_angle += mu.charges[h] * ang
        radial[h] = unit_from_angle(mu.charges[h] * ang)
        radial[h][r < 1e-12] = (1.0, 0.0)
        in_ball[h] = r < eta
    fixed = np.any(in_ball, axis=0)
    if not np.any(~fixed):
        raise InvalidArgumentError("no free sites outside the excised balls")

    b = lat.bonds
    ball_of = np.where(fixed, np.argmax(in_ball, axis=0), -1)
    inside0, inside1 = fixed[b[:, 0]], fixed[b[:, 1]]
    energy_bonds = ~(inside0 & inside1)
    seam = inside0 ^ inside1
    seam_fixed = np.where(inside0[seam], b[seam, 0], b[seam, 1])
    seam_free = np.where(inside0[seam], b[seam, 1], b[seam, 0])
    seam_ball = ball_of[seam_fixed]

    alpha = np.tile([1.0, 0.0], (n_atoms, 1))
    values = unit_from_angle(base_angle)

    def apply_bc():
        for h in range(n_atoms):
            values[in_ball[h]] = rotate(alpha[h], radial[h][in_ball[h]])

    def update_alpha() -> float:
        # exact energy minimizer over each ball phase given its seam bonds
        w = values[seam_free]
        q = radial[seam_ball, seam_fixed]
        contrib = rotate(w, np.column_stack([q[:, 0], -q[:, 1]]))
        moved = 0.0
        for h in range(n_atoms):
            s = contrib[seam_ball == h].sum(axis=0)
            norm = np.hypot(s[0], s[1])
            if norm > 0:
                new = s / norm
                moved = max(moved, float(np.hypot(*(new - alpha[h]))))
                alpha[h] = new
        return moved

    def reported_energy():
        d = values[b[energy_bonds, 0]] - values[b[energy_bonds, 1]]
        return float(np.sum(d[:, 0] ** 2 + d[:, 1] ** 2))

    relaxer = _GridRelaxer(lat, ~fixed)
    energy = np.inf
    trace: list[float] = []
    total_sweeps = 0
    converged = False
    rounds = 0
    for rounds in range(1, max_alternations + 1):
        # phases first: starting each round from the current field keeps the
        # ring data consistent with the ambient winding (a fixed initial
        # phase can sit antipodal to it and lock in a spurious wall)
        moved = update_alpha()
        apply_bc()
        relaxer.set_values(values)
        residual = np.inf
        for _ in range(max_sweeps):
            total_sweeps += 1
            residual = relaxer.sweep()
            if residual < tol:
                break
        values[:] = _renormalize(relaxer.get_values())
        apply_bc()

        new_energy = reported_energy()
        trace.append(new_energy)
        done = abs(energy - new_energy) <= max(1e-12, tol * abs(new_energy))
        energy = new_energy
        if done and moved < 1e-8 and residual < tol:
            converged = True
            break
    return MTildeResult(energy, alpha, rounds, converged, total_sweeps, trace)


def m_tilde(inp: RenormalizedInput, tol: float = 1e-8, **kw) -> float:
    return m_tilde_solve(inp, tol=tol, **kw).value
