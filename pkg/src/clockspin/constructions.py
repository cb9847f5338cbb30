"""Generators for the explicit spin-field families used throughout:
pure jumps, quantized jump-wall transitions, vortex fields, composites,
and shifted-lattice samplings of smooth fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import angle_of, unit_from_angle
from .lattice import ClockField, ClockParams, Lattice, SpinField

TWO_PI = 2.0 * np.pi
_AXIS_TOL = 1e-12
_REPR_TOL = 1e-9


@dataclass(frozen=True)
class JumpSpec:
    """Two spin values separated by an oriented straight wall."""

    v1: tuple[float, float]
    v2: tuple[float, float]
    wall_point: tuple[float, float] = (0.0, 0.0)
    wall_normal: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        for name in ("v1", "v2", "wall_normal"):
            x, y = getattr(self, name)
            if abs(x * x + y * y - 1.0) > 1e-9:
                raise InvalidArgumentError(f"{name} must be a unit vector")


@dataclass(frozen=True)
class VortexSpec:
    """Center, integer degree, and global phase of a radial winding field."""

    center: tuple[float, float]
    degree: int
    phase: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        if abs(self.degree) < 1:
            raise InvalidArgumentError("vortex degree must be a nonzero integer")
        x, y = self.phase
        if abs(x * x + y * y - 1.0) > 1e-9:
            raise InvalidArgumentError("phase must be a unit vector")


def _side(lat: Lattice, spec: JumpSpec) -> np.ndarray:
    nu = np.asarray(spec.wall_normal, dtype=float)
    return (lat.xy - np.asarray(spec.wall_point, dtype=float)) @ nu


def pure_jump_field(lat: Lattice, spec: JumpSpec) -> SpinField:
    """v1 on the non-positive side of the wall, v2 on the positive side."""
    t = _side(lat, spec)
    values = np.where(
        (t <= 0.0)[:, None], np.asarray(spec.v1, float), np.asarray(spec.v2, float)
    )
    return SpinField(lat, values)


def _clock_index_of(v, clock: ClockParams) -> int:
    r = float(angle_of(np.asarray(v, dtype=float))) / clock.theta
    k = int(np.rint(r))
    if abs(r - k) > _REPR_TOL:
        raise InvalidArgumentError(
            f"value at angle {r * clock.theta:.6f} is not one of the {clock.N} clock directions"
        )
    return k % clock.N


def transition_field(lat: Lattice, spec: JumpSpec, clock: ClockParams) -> ClockField:
    """Quantized jump transition: a strip of one-clock-step columns.

    The wall must be axis-aligned and both values must be exact clock
    directions.  Phases interpolate linearly across a strip of as many
    lattice columns as there are clock steps along the shorter arc from
    v1 to v2 (antipodal values turn counterclockwise), so adjacent
    columns differ by exactly one step and the total winding equals the
    index difference.
    """
    nu = np.asarray(spec.wall_normal, dtype=float)
    if min(abs(nu[0]), abs(nu[1])) > _AXIS_TOL:
        raise InvalidArgumentError("transition wall must be axis-aligned")
    k1 = _clock_index_of(spec.v1, clock)
    k2 = _clock_index_of(spec.v2, clock)
    m = (k2 - k1) % clock.N
    delta = m if m <= clock.N // 2 else m - clock.N

    r = _side(lat, spec) / lat.eps
    col = np.ceil(r)
    col = np.where(col - r > 1.0 - _REPR_TOL, col - 1, col)  # snap exact columns
    steps = np.clip(col, 0, abs(delta)).astype(np.int64)
    k = (k1 + int(np.sign(delta)) * steps) % clock.N
    return ClockField(lat, clock, k)


def vortex_field(lat: Lattice, spec: VortexSpec) -> SpinField:
    """phase * ((x - center)/|x - center|)^degree; sites at the center get
    the bare phase."""
    dx = lat.xy - np.asarray(spec.center, dtype=float)
    r = np.hypot(dx[:, 0], dx[:, 1])
    base = np.arctan2(dx[:, 1], dx[:, 0])
    alpha = float(angle_of(np.asarray(spec.phase, dtype=float)))
    values = unit_from_angle(alpha + spec.degree * base)
    values[r < 1e-12] = spec.phase
    return SpinField(lat, values)


def composite_field(
    lat: Lattice,
    vortices: list[VortexSpec],
    background: SpinField,
    radii: list[float],
) -> SpinField:
    """Vortex values inside each ball, background outside, no smoothing at
    the seams; seam energy is whatever it is and is reported, not tuned."""
    if background.lattice is not lat:
        raise InvalidArgumentError("background must live on the same lattice")
    if len(vortices) != len(radii):
        raise InvalidArgumentError("one radius per vortex is required")
    centers = np.array([s.center for s in vortices], dtype=float).reshape(-1, 2)
    radii_arr = np.asarray(radii, dtype=float)
    for h, (c, r) in enumerate(zip(centers, radii_arr)):
        if not r > 0:
            raise InvalidArgumentError("ball radii must be positive")
        if lat.domain.signed_dist(c) < r:
            raise InvalidArgumentError(f"ball {h} is not contained in the domain")
    for a in range(len(vortices)):
        for b in range(a + 1, len(vortices)):
            if np.hypot(*(centers[a] - centers[b])) < radii_arr[a] + radii_arr[b]:
                raise InvalidArgumentError(f"balls {a} and {b} overlap")

    values = background.values.copy()
    for spec, c, r in zip(vortices, centers, radii_arr):
        inside = np.hypot(*(lat.xy - c).T) <= r
        if np.any(inside):
            values[inside] = vortex_field(lat, spec).values[inside]
    return SpinField(lat, values)


def sample_smooth(lat: Lattice, f, shift=(0.0, 0.0)) -> SpinField:
    """Point sampling of a circle-valued map on the shifted lattice."""
    pts = lat.xy + np.asarray(shift, dtype=float)
    try:
        values = np.asarray(f(pts), dtype=float)
        if values.shape != (lat.n_sites, 2):
            raise TypeError
    except TypeError:
        values = np.asarray([f(p) for p in pts], dtype=float)
    norm = np.hypot(values[:, 0], values[:, 1])
    if np.any(np.abs(norm - 1.0) > 1e-9):
        raise InvalidArgumentError("sampled map must take unit values on all shifted sites")
    return SpinField(lat, values / norm[:, None])
