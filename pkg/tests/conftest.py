"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from clockspin import Domain, SpinField, build_lattice
from clockspin.geometry import unit_from_angle
from clockspin.lattice import ClockField, ClockParams


def rect_lattice(n: int, lo: float = 0.0, hi: float = 1.0):
    """Lattice of exactly n x n sites on the open square (lo, hi)^2."""
    return build_lattice(Domain.rectangle(lo, hi, lo, hi), (hi - lo) / (n + 1))


def random_spin_field(lat, rng) -> SpinField:
    return SpinField(lat, unit_from_angle(rng.uniform(0.0, 2.0 * np.pi, lat.n_sites)))


def random_clock_field(lat, clock: ClockParams, rng) -> ClockField:
    return ClockField(lat, clock, rng.integers(0, clock.N, lat.n_sites))


def random_unit_vectors(rng, n: int) -> np.ndarray:
    return unit_from_angle(rng.uniform(0.0, 2.0 * np.pi, n))


def flat_dual_oracle(domain, positions, charges, cap: float = 1.0) -> float:
    """Exact flat distance of an atomic measure by brute-force enumeration
    of its cancellation structures.

    Each unit of charge is either destroyed at the cheaper of the sup cap
    and its boundary distance, or annihilated against an opposite-sign
    unit at their Euclidean distance (direct transport is optimal by the
    triangle inequality).  This is the linear program's dual, solved by
    exhaustive branch and bound; keep the total number of charge units
    small.
    """
    units: list[tuple[tuple[float, float], int]] = []
    for p, d in zip(positions, charges):
        units += [((float(p[0]), float(p[1])), int(np.sign(d)))] * abs(int(d))
    kill = {
        (float(p[0]), float(p[1])): min(cap, float(domain.signed_dist(p)))
        for p in positions
    }
    best = [np.inf]

    def rec(items, acc):
        if acc >= best[0]:
            return
        if not items:
            best[0] = acc
            return
        (p, s), rest = items[0], items[1:]
        rec(rest, acc + kill[p])
        for k, (q, t) in enumerate(rest):
            if t == -s:
                rec(rest[:k] + rest[k + 1:], acc + float(np.hypot(p[0] - q[0], p[1] - q[1])))

    rec(units, 0.0)
    return best[0]


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
