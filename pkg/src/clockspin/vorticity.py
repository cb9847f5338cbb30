"""Plaquette winding numbers and integer-weighted vortex measures.

Phases live in [0, 2*pi).  Phase increments are folded into [-pi, pi] by
subtracting the nearest multiple of 2*pi, breaking ties toward minimal
modulus; with that convention the fold is odd everywhere, so increments
shared by two plaquettes cancel exactly and winding sums telescope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ChargeResidueError,
    IncompletePlaquetteError,
    InvalidArgumentError,
    InvalidLoopError,
)
from .geometry import Domain
from .lattice import Field

TWO_PI = 2.0 * np.pi

# winding sums must land on integers to this absolute tolerance
RESIDUE_TOL = 1e-9

# incenter offset of the right isoceles half-square triangles, in units of eps
_INCENTER = 1.0 - np.sqrt(2.0) / 2.0

# safe floor for the scaled four-bond energy of any plaquette carrying
# nonzero winding; brute-force minimization over tie-free phase
# configurations (see the test suite) puts the sharp constant at 7 for the
# full plaquette and 4 for a half-square triangle, so this bound is
# conservative but certainly valid
WINDING_ENERGY_FLOOR = 4.0 - 2.0 * np.sqrt(2.0)


def q_project(t):
    """Nearest multiple of 2*pi; exact ties resolve to the multiple of
    minimal modulus (so both +pi and -pi project to 0)."""
    t = np.asarray(t, dtype=float)
    r = t / TWO_PI
    n = np.floor(r + 0.5)
    frac = r - np.floor(r)
    n = np.where(frac == 0.5, np.trunc(r), n)
    return n * TWO_PI if t.ndim else float(n * TWO_PI)


def psi(t):
    """Fold t into [-pi, pi]: t minus its nearest multiple of 2*pi."""
    t = np.asarray(t, dtype=float)
    out = t - q_project(t)
    return out if t.ndim else float(out)


@dataclass
class VortexMeasure:
    """Finite integer atomic measure sum_h d_h * delta at x_h on a domain."""

    domain: Domain
    positions: np.ndarray       # (n, 2)
    charges: np.ndarray         # (n,) int64, nonzero

    @staticmethod
    def from_atoms(domain: Domain, positions, charges) -> "VortexMeasure":
        positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        charges = np.asarray(charges, dtype=np.int64).reshape(-1)
        if len(positions) != len(charges):
            raise InvalidArgumentError("positions and charges must pair up")
        if len(positions) and np.any(domain.signed_dist(positions) < -1e-12):
            raise InvalidArgumentError("atoms must lie inside the closed domain")
        merged: dict[tuple[float, float], int] = {}
        for (x, y), d in zip(positions, charges):
            key = (float(x), float(y))
            merged[key] = merged.get(key, 0) + int(d)
        keep = [(p, d) for p, d in merged.items() if d != 0]
        if not keep:
            return VortexMeasure(domain, np.empty((0, 2)), np.empty(0, dtype=np.int64))
        pos = np.array([p for p, _ in keep], dtype=float)
        chg = np.array([d for _, d in keep], dtype=np.int64)
        order = np.lexsort((pos[:, 1], pos[:, 0]))
        return VortexMeasure(domain, pos[order], chg[order])

    @property
    def n_atoms(self) -> int:
        return len(self.charges)

    def total_variation(self) -> int:
        return int(np.sum(np.abs(self.charges)))

    def total_charge(self) -> int:
        return int(np.sum(self.charges))

    def to_json(self) -> dict:
        return {
            "domain": self.domain.to_json(),
            "atoms": [
                {"x": float(x), "y": float(y), "d": int(d)}
                for (x, y), d in zip(self.positions, self.charges)
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "VortexMeasure":
        try:
            domain = Domain.from_json(obj["domain"])
            atoms = obj.get("atoms", [])
            return VortexMeasure.from_atoms(
                domain,
                [[a["x"], a["y"]] for a in atoms],
                [a["d"] for a in atoms],
            )
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"not a vortex-measure JSON object: {exc}") from exc


def _to_int_charges(raw: np.ndarray, limit: int) -> np.ndarray:
    d = np.rint(raw)
    residue = np.abs(raw - d)
    if residue.size and residue.max() >= RESIDUE_TOL:
        raise ChargeResidueError(
            f"winding sum off an integer by {residue.max():.3e}"
        )
    if d.size and np.abs(d).max() > limit:
        raise ChargeResidueError(f"winding number exceeds +-{limit}")
    return d.astype(np.int64)


def _all_plaquette_charges(u: Field) -> np.ndarray:
    phi = u.angles()
    c = u.lattice.plaq_corners          # columns: 00, 10, 11, 01
    p1, p2, p3, p4 = (phi[c[:, k]] for k in range(4))
    s = psi(p2 - p1) + psi(p3 - p2) + psi(p4 - p3) + psi(p1 - p4)
    return _to_int_charges(s / TWO_PI, limit=1)


def plaquette_vorticity(u: Field, site) -> int:
    """Winding of the plaquette whose bottom-left corner is integer pair `site`."""
    lat = u.lattice
    i, j = int(site[0]), int(site[1])
    ords = [lat.ordinal(*p) for p in ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))]
    if any(o < 0 for o in ords):
        raise IncompletePlaquetteError(f"plaquette at {site} is missing a corner")
    phi = u.angles()
    p1, p2, p3, p4 = (phi[o] for o in ords)
    s = psi(p2 - p1) + psi(p3 - p2) + psi(p4 - p3) + psi(p1 - p4)
    return int(_to_int_charges(np.array([s / TWO_PI]), limit=1)[0])


def vorticity_measure(u: Field) -> VortexMeasure:
    """Atoms at the far corner eps*i + (eps, eps) of each winding plaquette."""
    lat = u.lattice
    d = _all_plaquette_charges(u)
    keep = d != 0
    pos = lat.xy[lat.plaq_corners[keep, 2]]     # far corner is itself a site
    return VortexMeasure.from_atoms(lat.domain, pos, d[keep])


def vorticity_measure_centered(u: Field) -> VortexMeasure:
    """Atoms at square centers eps*i + (eps/2, eps/2).

    Only squares contained in the domain carry atoms; with the convex
    domains supported here that is every complete plaquette, since the
    closed square is the hull of its four corner sites.
    """
    lat = u.lattice
    d = _all_plaquette_charges(u)
    keep = d != 0
    pos = lat.xy[lat.plaq_anchor[keep]] + lat.eps / 2.0
    return VortexMeasure.from_atoms(lat.domain, pos, d[keep])


def triangle_vorticity(u: Field) -> VortexMeasure:
    """Half-square winding measure: each complete lattice square carries one
    atom per triangle of the diagonal split, placed at the incenters
    eps*i + (1 - sqrt(2)/2) * eps * (1, 1)  and  eps*i + sqrt(2)/2 * eps * (1, 1),
    with the three-increment winding of that triangle as charge.  The two
    charges of a square sum to its plaquette winding wherever no increment
    ties occur.
    """
    lat = u.lattice
    phi = u.angles()
    c = lat.plaq_corners
    p00, p10, p11, p01 = (phi[c[:, k]] for k in range(4))

    s_lower = psi(p10 - p00) + psi(p01 - p10) + psi(p00 - p01)
    s_upper = psi(p01 - p11) + psi(p10 - p01) + psi(p11 - p10)
    d_lower = _to_int_charges(s_lower / TWO_PI, limit=1)
    d_upper = _to_int_charges(s_upper / TWO_PI, limit=1)

    anchor = lat.xy[lat.plaq_anchor]
    pos_lower = anchor + _INCENTER * lat.eps
    pos_upper = anchor + (1.0 - _INCENTER) * lat.eps
    pos = np.concatenate([pos_lower, pos_upper])
    d = np.concatenate([d_lower, d_upper])
    keep = d != 0
    return VortexMeasure.from_atoms(lat.domain, pos[keep], d[keep])


def loop_degree(u: Field, loop) -> int:
    """Winding of the field along a closed cycle of pairwise-adjacent sites.

    `loop` lists integer pairs; the last site connects back to the first.
    """
    lat = u.lattice
    loop = np.asarray(loop, dtype=np.int64).reshape(-1, 2)
    if len(loop) < 4:
        raise InvalidLoopError("a lattice cycle needs at least 4 sites")
    ords = np.array([lat.ordinal(i, j) for i, j in loop])
    if np.any(ords < 0):
        raise InvalidLoopError("loop visits a non-site")
    step = np.abs(np.diff(np.vstack([loop, loop[:1]]), axis=0))
    if np.any(step.sum(axis=1) != 1):
        raise InvalidLoopError("consecutive loop sites must be nearest neighbors")
    phi = u.angles()[ords]
    s = np.sum(psi(np.roll(phi, -1) - phi))
    return int(_to_int_charges(np.array([s / TWO_PI]), limit=len(loop))[0])
