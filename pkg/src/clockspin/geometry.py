"""Planar domains and circle/matrix helpers shared by every other module.

Unit vectors are plain arrays of shape (2,) or (n, 2); 2x2 matrices are
plain arrays.  Functions are vectorized over leading axes where it is
natural to do so.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class Domain:
    """Bounded open planar region: an axis-aligned rectangle or a disk.

    The signed boundary distance is exact (closed form): positive inside,
    zero on the boundary, negative outside.
    """

    kind: str                      # "rectangle" | "disk"
    params: tuple[float, ...]      # rectangle: (xmin, xmax, ymin, ymax); disk: (cx, cy, r)

    @staticmethod
    def rectangle(xmin: float, xmax: float, ymin: float, ymax: float) -> "Domain":
        if not (xmin < xmax and ymin < ymax):
            raise InvalidArgumentError("rectangle requires xmin < xmax and ymin < ymax")
        return Domain("rectangle", (float(xmin), float(xmax), float(ymin), float(ymax)))

    @staticmethod
    def disk(cx: float, cy: float, r: float) -> "Domain":
        if not r > 0:
            raise InvalidArgumentError("disk requires radius > 0")
        return Domain("disk", (float(cx), float(cy), float(r)))

    @property
    def diameter(self) -> float:
        if self.kind == "disk":
            return 2.0 * self.params[2]
        xmin, xmax, ymin, ymax = self.params
        return float(np.hypot(xmax - xmin, ymax - ymin))

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        if self.kind == "disk":
            cx, cy, r = self.params
            return (cx - r, cx + r, cy - r, cy + r)
        return self.params

    def signed_dist(self, p) -> np.ndarray | float:
        """Exact signed Euclidean distance to the boundary (positive inside)."""
        p = np.asarray(p, dtype=float)
        x, y = p[..., 0], p[..., 1]
        if self.kind == "disk":
            cx, cy, r = self.params
            return r - np.hypot(x - cx, y - cy)
        xmin, xmax, ymin, ymax = self.params
        qx = np.maximum(xmin - x, x - xmax)
        qy = np.maximum(ymin - y, y - ymax)
        outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
        inside = -np.maximum(qx, qy)
        return np.where((qx <= 0) & (qy <= 0), inside, -outside)

    def contains(self, p) -> np.ndarray | bool:
        """Open-set membership."""
        return self.signed_dist(p) > 0

    def contains_domain(self, other: "Domain") -> bool:
        """Whether `other` is a subset of this domain (closed-form check)."""
        if other.kind == "disk":
            cx, cy, r = other.params
            # disk fits iff its center's depth covers the radius
            return bool(self.signed_dist((cx, cy)) >= r)
        xmin, xmax, ymin, ymax = other.params
        corners = np.array([(xmin, ymin), (xmin, ymax), (xmax, ymin), (xmax, ymax)])
        return bool(np.all(self.signed_dist(corners) >= 0))

    def spec_str(self) -> str:
        vals = " ".join(repr(v) for v in self.params)
        return f"{self.kind} {vals}"

    @staticmethod
    def from_spec_str(text: str) -> "Domain":
        parts = text.split()
        if parts and parts[0] == "rectangle" and len(parts) == 5:
            return Domain.rectangle(*(float(v) for v in parts[1:]))
        if parts and parts[0] == "disk" and len(parts) == 4:
            return Domain.disk(*(float(v) for v in parts[1:]))
        raise InvalidArgumentError(f"unrecognized domain spec {text!r}")

    def to_json(self) -> dict:
        if self.kind == "disk":
            cx, cy, r = self.params
            return {"kind": "disk", "center": [cx, cy], "radius": r}
        xmin, xmax, ymin, ymax = self.params
        return {"kind": "rectangle", "xmin": xmin, "xmax": xmax, "ymin": ymin, "ymax": ymax}

    @staticmethod
    def from_json(obj: dict) -> "Domain":
        try:
            if obj.get("kind") == "disk":
                return Domain.disk(obj["center"][0], obj["center"][1], obj["radius"])
            if obj.get("kind") == "rectangle":
                return Domain.rectangle(obj["xmin"], obj["xmax"], obj["ymin"], obj["ymax"])
        except (KeyError, TypeError, IndexError) as exc:
            raise InvalidArgumentError(f"malformed domain JSON: {exc}") from exc
        raise InvalidArgumentError(f"unrecognized domain JSON {obj!r}")


def boundary_dist(domain: Domain, p) -> np.ndarray | float:
    """Signed distance from p to the domain boundary (positive inside)."""
    return domain.signed_dist(p)


def _check_unit(u: np.ndarray, name: str) -> None:
    norm2 = u[..., 0] ** 2 + u[..., 1] ** 2
    if not np.all(np.abs(norm2 - 1.0) <= 2 * UNIT_TOL):
        raise InvalidArgumentError(f"{name} is not a unit vector within tolerance")


def unit_from_angle(phi) -> np.ndarray:
    """Unit vector(s) (cos phi, sin phi); phi may be an array."""
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def angle_of(u) -> np.ndarray | float:
    """Phase in [0, 2*pi) of unit vector(s): atan2 lifted by 2*pi on negatives."""
    u = np.asarray(u, dtype=float)
    phi = np.arctan2(u[..., 1], u[..., 0])
    return np.where(phi < 0, phi + 2.0 * np.pi, phi)


def geodesic_dist(u, v, check: bool = True) -> np.ndarray | float:
    """Angle in [0, pi] between unit vectors: arccos of the clamped dot product.

    Satisfies |u - v| / 2 = sin(d / 2).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if check:
        _check_unit(u, "u")
        _check_unit(v, "v")
    dot = u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]
    return np.arccos(np.clip(dot, -1.0, 1.0))


def rotate(u, v) -> np.ndarray:
    """Complex product of unit vectors (composition of rotations)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.stack(
        [
            u[..., 0] * v[..., 0] - u[..., 1] * v[..., 1],
            u[..., 0] * v[..., 1] + u[..., 1] * v[..., 0],
        ],
        axis=-1,
    )


def cpow(u, d: int) -> np.ndarray:
    """Integer complex power of unit vector(s): d-fold rotation, d < 0 conjugates."""
    u = np.asarray(u, dtype=float)
    z = (u[..., 0] + 1j * u[..., 1]) ** int(d)
    return np.stack([z.real, z.imag], axis=-1)


def norm21(A) -> float:
    """Sum of the Euclidean norms of the two columns of a 2x2 matrix."""
    A = np.asarray(A, dtype=float)
    return float(np.hypot(A[0, 0], A[1, 0]) + np.hypot(A[0, 1], A[1, 1]))
