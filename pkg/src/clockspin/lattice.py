"""Square-lattice site sets, spin/clock fields, projection, interpolation, file I/O.

Sites are the integer pairs i with eps*i inside the open domain.  All
per-site data is stored in arrays ordered lexicographically by (i, j),
and fields are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateLatticeError,
    InvalidArgumentError,
    OutOfSupportError,
)
from .geometry import Domain, angle_of, unit_from_angle

TWO_PI = 2.0 * np.pi

# Relative snap tolerance for cell / clock-sector location: a coordinate this
# close to the next cell boundary is treated as lying on it, so exact corner
# points survive floating-point round-trips.
_SNAP = 1e-9


@dataclass(frozen=True)
class ClockParams:
    """N equi-spaced directions on the circle; the step angle is derived from N."""

    N: int

    def __post_init__(self):
        if self.N < 3:
            raise InvalidArgumentError("clock discretization requires N >= 3")

    @property
    def theta(self) -> float:
        return TWO_PI / self.N


class Lattice:
    """Sites {i in Z^2 : eps*i in domain} with neighbor/bond/plaquette tables."""

    def __init__(self, domain: Domain, eps: float, ij: np.ndarray):
        self.domain = domain
        self.eps = float(eps)
        self.ij = ij                      # (n, 2) int64, lexicographic (i, then j)
        self.n_sites = len(ij)
        self.xy = ij.astype(float) * self.eps

        imin = ij[:, 0].min()
        jmin = ij[:, 1].min()
        ni = ij[:, 0].max() - imin + 1
        nj = ij[:, 1].max() - jmin + 1
        grid = np.full((ni, nj), -1, dtype=np.int64)
        grid[ij[:, 0] - imin, ij[:, 1] - jmin] = np.arange(self.n_sites)
        self._grid = grid
        self._origin = (int(imin), int(jmin))

        # neighbor ordinals in +x and +y direction (-1 when absent)
        self.nbr_e = self._shift_lookup(1, 0)
        self.nbr_n = self._shift_lookup(0, 1)
        self.nbr_w = self._shift_lookup(-1, 0)
        self.nbr_s = self._shift_lookup(0, -1)

        own = np.arange(self.n_sites)
        eb = self.nbr_e >= 0
        nb = self.nbr_n >= 0
        self.bonds = np.concatenate(
            [
                np.column_stack([own[eb], self.nbr_e[eb]]),
                np.column_stack([own[nb], self.nbr_n[nb]]),
            ]
        )

        # plaquettes anchored at i: corners i, i+e1, i+e1+e2, i+e2 all present
        ne = self._shift_lookup(1, 1)
        ok = eb & nb & (ne >= 0)
        self.plaq_anchor = own[ok]
        self.plaq_corners = np.column_stack(
            [own[ok], self.nbr_e[ok], ne[ok], self.nbr_n[ok]]
        )

    def _shift_lookup(self, di: int, dj: int) -> np.ndarray:
        imin, jmin = self._origin
        ii = self.ij[:, 0] - imin + di
        jj = self.ij[:, 1] - jmin + dj
        ok = (ii >= 0) & (ii < self._grid.shape[0]) & (jj >= 0) & (jj < self._grid.shape[1])
        out = np.full(self.n_sites, -1, dtype=np.int64)
        out[ok] = self._grid[ii[ok], jj[ok]]
        return out

    def ordinal(self, i: int, j: int) -> int:
        """Site ordinal for integer pair (i, j); -1 when absent."""
        imin, jmin = self._origin
        ii, jj = i - imin, j - jmin
        if 0 <= ii < self._grid.shape[0] and 0 <= jj < self._grid.shape[1]:
            return int(self._grid[ii, jj])
        return -1

    def __len__(self) -> int:
        return self.n_sites


def build_lattice(domain: Domain, eps: float) -> Lattice:
    """All integer pairs i with eps*i in the open domain, sorted by (i, j)."""
    if not eps > 0:
        raise InvalidArgumentError("eps must be positive")
    xmin, xmax, ymin, ymax = domain.bbox
    irange = np.arange(int(np.floor(xmin / eps)) - 1, int(np.ceil(xmax / eps)) + 2)
    jrange = np.arange(int(np.floor(ymin / eps)) - 1, int(np.ceil(ymax / eps)) + 2)
    ii, jj = np.meshgrid(irange, jrange, indexing="ij")
    ij = np.column_stack([ii.ravel(), jj.ravel()])
    inside = domain.contains(ij * eps)
    ij = ij[inside]
    if len(ij) == 0:
        raise DegenerateLatticeError("no lattice site falls inside the domain")
    order = np.lexsort((ij[:, 1], ij[:, 0]))
    return Lattice(domain, eps, np.ascontiguousarray(ij[order]))


def bonds(lat: Lattice) -> np.ndarray:
    """Unordered nearest-neighbor pairs, each exactly once, as ordinal pairs.

    Energy sums downstream give each unordered bond net weight 1 (the
    ordered-pair convention's double count and the global 1/2 cancel).
    """
    return lat.bonds


def discrete_boundary(lat: Lattice, region: Domain) -> np.ndarray:
    """Ordinals of sites inside `region` within distance eps of its boundary."""
    if not lat.domain.contains_domain(region):
        raise InvalidArgumentError("region must be contained in the lattice domain")
    sd = region.signed_dist(lat.xy)
    return np.nonzero((sd > 0) & (sd <= lat.eps))[0]


class SpinField:
    """Circle-valued field: one unit vector per lattice site."""

    def __init__(self, lattice: Lattice, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != (lattice.n_sites, 2):
            raise InvalidArgumentError("value count must equal site count")
        norm2 = values[:, 0] ** 2 + values[:, 1] ** 2
        if not np.all(np.abs(norm2 - 1.0) <= 1e-12):
            raise InvalidArgumentError("spin values must be unit vectors")
        self.lattice = lattice
        self.values = values

    def angles(self) -> np.ndarray:
        """Per-site phase in [0, 2*pi)."""
        return np.asarray(angle_of(self.values))


class ClockField:
    """Clock-valued field: one index in {0, ..., N-1} per lattice site."""

    def __init__(self, lattice: Lattice, clock: ClockParams, indices: np.ndarray):
        indices = np.asarray(indices, dtype=np.int64)
        if indices.shape != (lattice.n_sites,):
            raise InvalidArgumentError("index count must equal site count")
        if indices.min(initial=0) < 0 or indices.max(initial=0) >= clock.N:
            raise InvalidArgumentError("clock indices out of range")
        self.lattice = lattice
        self.clock = clock
        self.indices = indices

    def embed(self) -> SpinField:
        """The spin field k -> (cos k*theta, sin k*theta)."""
        return SpinField(self.lattice, unit_from_angle(self.indices * self.clock.theta))

    def angles(self) -> np.ndarray:
        # k <= N-1 keeps every phase strictly below 2*pi
        return self.indices * self.clock.theta


Field = SpinField | ClockField


def as_spin(u: Field) -> SpinField:
    return u.embed() if isinstance(u, ClockField) else u


def project_clock(u: SpinField, clock: ClockParams) -> ClockField:
    """Round each phase down to its clock sector: k = floor(phi / theta).

    Exact clock values are fixed points (sector location snaps when the
    phase sits within 1e-9 sectors of a boundary), and the projected value
    trails the input by strictly less than one step.
    """
    r = u.angles() / clock.theta
    k = np.floor(r)
    k = np.where(r - k > 1.0 - _SNAP, k + 1, k).astype(np.int64)
    return ClockField(u.lattice, clock, k % clock.N)


def _locate_cell(lat: Lattice, x) -> tuple[int, int]:
    r = np.asarray(x, dtype=float) / lat.eps
    k = np.floor(r)
    k = np.where(r - k > 1.0 - _SNAP, k + 1, k)
    return int(k[0]), int(k[1])


def pc_value(u: Field, x) -> np.ndarray:
    """Piecewise-constant value at x: the site value of the half-open cell
    eps*i + [0, eps)^2 containing x (bottom-left anchored)."""
    lat = u.lattice
    ci, cj = _locate_cell(lat, x)
    ordinal = lat.ordinal(ci, cj)
    if ordinal < 0:
        raise OutOfSupportError(f"point {x} lies in no lattice cell")
    return as_spin(u).values[ordinal]


class PiecewiseAffineField:
    """Piecewise-affine view of a spin field on lattice squares.

    Each square is split along its bottom-left to top-right diagonal; the
    field is affine on each triangle and matches the (generally non-unit
    in between) site values at corners.
    """

    def __init__(self, u: SpinField):
        self._init(u.lattice, u.values)

    def _init(self, lat: Lattice, values: np.ndarray) -> None:
        self.lattice = lat
        self.values = values
        self.square_corners = lat.plaq_corners      # (q, 4): a, a+e1, a+e1+e2, a+e2
        self.square_anchor_ij = lat.ij[lat.plaq_anchor]

    @staticmethod
    def from_values(lat: Lattice, values) -> "PiecewiseAffineField":
        """Interpolate arbitrary per-site vectors (no unit constraint)."""
        values = np.asarray(values, dtype=float)
        if values.shape != (lat.n_sites, 2):
            raise InvalidArgumentError("value count must equal site count")
        out = PiecewiseAffineField.__new__(PiecewiseAffineField)
        out._init(lat, values)
        return out

    def _square(self, x) -> tuple[int, int, float, float]:
        lat = self.lattice
        ci, cj = _locate_cell(lat, x)
        a = lat.ordinal(ci, cj)
        if a < 0 or lat.nbr_e[a] < 0 or lat.nbr_n[a] < 0 or lat.ordinal(ci + 1, cj + 1) < 0:
            raise OutOfSupportError(f"square at {x} is missing a corner site")
        xl = float(x[0]) / lat.eps - ci
        yl = float(x[1]) / lat.eps - cj
        return a, lat.ordinal(ci + 1, cj + 1), xl, yl

    def evaluate(self, x) -> np.ndarray:
        lat = self.lattice
        a, d, xl, yl = self._square(x)
        v00 = self.values[a]
        v10 = self.values[lat.nbr_e[a]]
        v01 = self.values[lat.nbr_n[a]]
        v11 = self.values[d]
        if yl <= xl:
            return v00 + (v10 - v00) * xl + (v11 - v10) * yl
        return v00 + (v11 - v01) * xl + (v01 - v00) * yl

    def gradient(self, x) -> np.ndarray:
        """Constant gradient of the triangle containing x, shape (2, 2):
        rows are field components, columns are d/dx and d/dy."""
        lat = self.lattice
        a, d, xl, yl = self._square(x)
        v00 = self.values[a]
        v10 = self.values[lat.nbr_e[a]]
        v01 = self.values[lat.nbr_n[a]]
        v11 = self.values[d]
        if yl <= xl:
            gx, gy = (v10 - v00), (v11 - v10)
        else:
            gx, gy = (v11 - v01), (v01 - v00)
        return np.column_stack([gx, gy]) / lat.eps

    def triangle_tables(self):
        """Vectorized per-triangle data over all interpolable squares.

        Returns (corner values v00, v10, v01, v11) each of shape (q, 2) and
        the anchor coordinates of the squares, shape (q, 2).
        """
        c = self.square_corners
        return (
            self.values[c[:, 0]],
            self.values[c[:, 1]],
            self.values[c[:, 3]],
            self.values[c[:, 2]],
            self.square_anchor_ij.astype(float) * self.lattice.eps,
        )


def affine_interpolation(u: Field) -> PiecewiseAffineField:
    return PiecewiseAffineField(as_spin(u))


# ---------------------------------------------------------------------------
# CLOCKFIELD v1 text format
#
#   line 1: "CLOCKFIELD v1"
#   line 2: domain spec ("rectangle xmin xmax ymin ymax" | "disk cx cy r")
#   line 3: "eps N"   (N = 0 marks an unconstrained circle-valued field)
#   then one line "i j value" per site in lexicographic order, where value
#   is an integer index (N > 0) or a phase in radians (N = 0).
# ---------------------------------------------------------------------------

MAGIC = "CLOCKFIELD v1"


def save_field(u: Field, path) -> None:
    lat = u.lattice
    lines = [MAGIC, lat.domain.spec_str()]
    if isinstance(u, ClockField):
        lines.append(f"{lat.eps!r} {u.clock.N}")
        for (i, j), k in zip(lat.ij, u.indices):
            lines.append(f"{i} {j} {k}")
    else:
        lines.append(f"{lat.eps!r} 0")
        for (i, j), phi in zip(lat.ij, u.angles()):
            lines.append(f"{i} {j} {float(phi)!r}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path) -> Field:
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise InvalidArgumentError(f"{path}: not a {MAGIC} file")
    domain = Domain.from_spec_str(lines[1])
    eps_text, n_text = lines[2].split()
    eps, N = float(eps_text), int(n_text)
    lat = build_lattice(domain, eps)
    rows = [line.split() for line in lines[3:] if line]
    if len(rows) != lat.n_sites:
        raise InvalidArgumentError(
            f"{path}: {len(rows)} site lines but the lattice has {lat.n_sites} sites"
        )
    ij = np.array([[int(r[0]), int(r[1])] for r in rows], dtype=np.int64)
    if not np.array_equal(ij, lat.ij):
        raise InvalidArgumentError(f"{path}: site list does not match the lattice")
    if N > 0:
        k = np.array([int(r[2]) for r in rows], dtype=np.int64)
        return ClockField(lat, ClockParams(N), k)
    phi = np.array([float(r[2]) for r in rows])
    return SpinField(lat, unit_from_angle(phi))
