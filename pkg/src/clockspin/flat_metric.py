"""Exact flat distance between finite integer atomic measures.

The distance is the supremum of the pairing against test functions that
vanish on the boundary, are 1-Lipschitz, and are bounded by 1 in absolute
value (the norm is the max of the sup norm and the Lipschitz constant).
Because any feasible assignment of values at the atoms extends to such a
function (shortest-distance extension clamped by the caps), the supremum
is the optimum of a finite linear program over the atom values alone:

    maximize  sum_i a_i * psi_i
    subject   |psi_i| <= min(1, dist(x_i, boundary))
              |psi_i - psi_j| <= |x_i - x_j|         for all pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import InvalidArgumentError, ResourceLimitError
from .solver_limits import FLAT_ATOM_LIMIT
from .vorticity import VortexMeasure

MERGE_TOL = 1e-12
_FEAS_SLACK = 1e-7


@dataclass
class FlatResult:
    """Optimal value with the witness test-function values at the atoms."""

    value: float
    positions: np.ndarray    # (n, 2) atoms of the difference measure
    charges: np.ndarray      # (n,) integer weights
    psi: np.ndarray          # (n,) witness values

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "witness": [
                {"x": float(x), "y": float(y), "d": int(d), "psi": float(p)}
                for (x, y), d, p in zip(self.positions, self.charges, self.psi)
            ],
        }


def _merge_close(positions: np.ndarray, charges: np.ndarray):
    """Merge atoms closer than MERGE_TOL (charge addition), drop zeros."""
    keep_pos: list[np.ndarray] = []
    keep_chg: list[int] = []
    for p, d in zip(positions, charges):
        for k, q in enumerate(keep_pos):
            if abs(p[0] - q[0]) <= MERGE_TOL and abs(p[1] - q[1]) <= MERGE_TOL:
                keep_chg[k] += int(d)
                break
        else:
            keep_pos.append(p)
            keep_chg.append(int(d))
    pos = np.array(keep_pos, dtype=float).reshape(-1, 2)
    chg = np.array(keep_chg, dtype=np.int64)
    nz = chg != 0
    return pos[nz], chg[nz]


def _difference_atoms(mu: VortexMeasure, nu: VortexMeasure | None):
    if nu is None:
        return _merge_close(mu.positions, mu.charges)
    if mu.domain != nu.domain:
        raise InvalidArgumentError("measures must live on the same domain")
    pos = np.concatenate([mu.positions, nu.positions])
    chg = np.concatenate([mu.charges, -nu.charges])
    return _merge_close(pos, chg)


def _caps(mu: VortexMeasure, positions: np.ndarray, cap: float) -> np.ndarray:
    b = np.minimum(cap, mu.domain.signed_dist(positions))
    return np.maximum(b, 0.0)     # atoms on the boundary are pinned to 0


def flat_distance(mu: VortexMeasure, nu: VortexMeasure | None = None,
                  cap: float = 1.0) -> FlatResult:
    """Exact flat distance between mu and nu (nu omitted means the zero measure)."""
    pos, chg = _difference_atoms(mu, nu)
    n = len(chg)
    if n == 0:
        return FlatResult(0.0, pos, chg, np.empty(0))
    if n > FLAT_ATOM_LIMIT:
        raise ResourceLimitError(
            f"{n} atoms exceed the flat-distance limit of {FLAT_ATOM_LIMIT}"
        )
    b = _caps(mu, pos, cap)

    if n == 1:
        psi = np.array([np.sign(chg[0]) * b[0]])
        return FlatResult(float(abs(chg[0]) * b[0]), pos, chg, psi)

    ii, jj = np.triu_indices(n, k=1)
    dist = np.hypot(pos[ii, 0] - pos[jj, 0], pos[ii, 1] - pos[jj, 1])
    m = len(ii)
    rows = np.repeat(np.arange(2 * m), 2)
    cols = np.concatenate([np.column_stack([ii, jj]).ravel(),
                           np.column_stack([jj, ii]).ravel()])
    data = np.tile([1.0, -1.0], 2 * m)
    a_ub = sparse.coo_matrix((data, (rows, cols)), shape=(2 * m, n)).tocsr()
    b_ub = np.concatenate([dist, dist])

    res = linprog(
        c=-chg.astype(float),
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=list(zip(-b, b)),
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"flat-distance LP failed: {res.message}")
    psi = np.asarray(res.x)
    value = float(chg @ psi)
    _validate_witness(pos, chg, psi, b, value)
    return FlatResult(value, pos, chg, psi)


def _validate_witness(pos, chg, psi, caps, value) -> None:
    if np.any(np.abs(psi) > caps + _FEAS_SLACK):
        raise RuntimeError("flat-distance witness violates its cap")
    ii, jj = np.triu_indices(len(psi), k=1)
    gap = np.abs(psi[ii] - psi[jj]) - np.hypot(*(pos[ii] - pos[jj]).T)
    if gap.size and gap.max() > _FEAS_SLACK:
        raise RuntimeError("flat-distance witness violates the Lipschitz bound")
    if abs(value - float(chg @ psi)) > _FEAS_SLACK:
        raise RuntimeError("flat-distance value does not match its witness")


def flat_lower_bound(mu: VortexMeasure, nu: VortexMeasure | None,
                     sample_points, sample_values, cap: float = 1.0) -> float:
    """Certified lower bound from an admissible sampled test function.

    The samples must respect the cap and be 1-Lipschitz pairwise; they are
    extended to the atoms by the midpoint of the two shortest-distance
    envelopes, clamped at the caps.  The extension is 1-Lipschitz, matches
    the samples, and respects the caps, so the resulting pairing never
    exceeds the exact flat distance.
    """
    pts = np.asarray(sample_points, dtype=float).reshape(-1, 2)
    vals = np.asarray(sample_values, dtype=float).reshape(-1)
    if len(pts) != len(vals) or len(pts) == 0:
        raise InvalidArgumentError("need matching, nonempty sample points/values")
    caps_s = _caps(mu, pts, cap)
    if np.any(np.abs(vals) > caps_s + 1e-12):
        raise InvalidArgumentError("test-function samples violate the cap")
    ii, jj = np.triu_indices(len(pts), k=1)
    if ii.size:
        dist = np.hypot(*(pts[ii] - pts[jj]).T)
        if np.any(np.abs(vals[ii] - vals[jj]) > dist + 1e-12):
            raise InvalidArgumentError("test-function samples are not 1-Lipschitz")

    pos, chg = _difference_atoms(mu, nu)
    if len(chg) == 0:
        return 0.0
    d_atom_sample = np.hypot(
        pos[:, None, 0] - pts[None, :, 0], pos[:, None, 1] - pts[None, :, 1]
    )
    upper = np.min(vals[None, :] + d_atom_sample, axis=1)
    lower = np.max(vals[None, :] - d_atom_sample, axis=1)
    caps_a = _caps(mu, pos, cap)
    ext = np.clip((upper + lower) / 2.0, -caps_a, caps_a)
    return float(chg @ ext)
