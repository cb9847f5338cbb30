"""Scalar energy functionals on lattice spin fields.

All bond sums run over the lattice's unordered bond list in its stored
order and are reduced with numpy's pairwise summation, so results are
reproducible bit-for-bit for identical inputs.  Each unordered bond
carries net weight 1: the ordered-pair double count and the global 1/2
prefactor cancel once and for all.

A bond belongs to a localized energy iff both endpoints lie in the
(open) region.

For distinct clock values at geodesic distance d = k*theta the squared
chord obeys 4*sin(d/2)^2 >= (1 - theta^2/12) * theta * d: the case k = 1
is the series bound 4*sin(theta/2)^2 = theta^2 (1 - theta^2/12 + ...),
and for k >= 2 the left side grows quadratically in k against the right
side's linear growth.  This per-bond constant ties the clock energy to
the jump functional: clock_energy / (eps*theta) >= (1 - theta^2/12) *
jump_functional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfSupportError
from .geometry import Domain, geodesic_dist
from .lattice import ClockField, Field, as_spin

TWO_PI = 2.0 * np.pi


def _bond_mask(u: Field, region: Domain | None) -> np.ndarray | slice:
    if region is None:
        return slice(None)
    lat = u.lattice
    inside = region.contains(lat.xy)
    return inside[lat.bonds[:, 0]] & inside[lat.bonds[:, 1]]


def xy_energy(u: Field, region: Domain | None = None) -> float:
    """Ferromagnetic nearest-neighbor energy: eps^2 * sum of squared chords."""
    spin = as_spin(u)
    b = spin.lattice.bonds[_bond_mask(u, region)]
    d = spin.values[b[:, 0]] - spin.values[b[:, 1]]
    return float(spin.lattice.eps ** 2 * np.sum(d[:, 0] ** 2 + d[:, 1] ** 2))


def clock_energy(u: ClockField, region: Domain | None = None) -> float:
    """Same energy computed from clock indices with the exact chord
    2*sin(|dk|_N * theta / 2); equals xy_energy of the embedding."""
    lat = u.lattice
    b = lat.bonds[_bond_mask(u, region)]
    dk = np.abs(u.indices[b[:, 0]] - u.indices[b[:, 1]])
    dk = np.minimum(dk, u.clock.N - dk)
    chord = 2.0 * np.sin(dk * (u.clock.theta / 2.0))
    return float(lat.eps ** 2 * np.sum(chord ** 2))


def bond_geodesic(u: Field, region: Domain | None = None) -> np.ndarray:
    """Geodesic distance across each (region-filtered) bond."""
    lat = u.lattice
    b = lat.bonds[_bond_mask(u, region)]
    if isinstance(u, ClockField):
        dk = np.abs(u.indices[b[:, 0]] - u.indices[b[:, 1]])
        dk = np.minimum(dk, u.clock.N - dk)
        return dk * u.clock.theta
    return np.asarray(geodesic_dist(u.values[b[:, 0]], u.values[b[:, 1]], check=False))


def jump_functional(u: Field, region: Domain | None = None) -> float:
    """Anisotropic jump energy of the piecewise-constant interpolation:
    eps * sum over bonds of the geodesic distance.

    Cell interfaces are axis-aligned segments of length eps with unit
    1-norm normal, so the bond sum is the exact interface integral.
    """
    return float(u.lattice.eps * np.sum(bond_geodesic(u, region)))


def phi_integrand(xi) -> float:
    """Column-pair norm sqrt(xi21^2 + xi22^2) + sqrt(xi11^2 + xi12^2) of a
    4-component argument ordered (xi21, xi22, xi11, xi12); convex and
    positively 1-homogeneous."""
    xi21, xi22, xi11, xi12 = np.asarray(xi, dtype=float)
    return float(np.hypot(xi21, xi22) + np.hypot(xi11, xi12))


def dirichlet_energy(u: Field, region: Domain | None = None) -> float:
    """Discrete Dirichlet form: sum over bonds of the squared chord
    (the eps^2 scale of xy_energy cancels against the difference quotient)."""
    return xy_energy(u, region) / u.lattice.eps ** 2


def _phi_samples(u: Field, phi) -> np.ndarray:
    if callable(phi):
        return np.asarray([phi(p) for p in u.lattice.xy], dtype=float)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (u.lattice.n_sites,):
        raise OutOfSupportError("phi samples must provide one value per site")
    return phi


def _check_support(u: Field, phi: np.ndarray) -> None:
    # every square incident to a site where phi != 0 must be interpolable
    lat = u.lattice
    ok_anchor = np.zeros(lat.n_sites, dtype=bool)
    ok_anchor[lat.plaq_anchor] = True
    for s in np.nonzero(phi != 0.0)[0]:
        i, j = lat.ij[s]
        for di, dj in ((0, 0), (-1, 0), (0, -1), (-1, -1)):
            a = lat.ordinal(i + di, j + dj)
            if a < 0 or not ok_anchor[a]:
                raise OutOfSupportError(
                    "support of the test function touches a non-interpolable square"
                )


def jacobian_pairing(u: Field, phi) -> float:
    """Pairing of the normalized Jacobian of the piecewise-affine
    interpolation with a Lipschitz test function, in divergence form:

        -(1/(2*pi)) * integral of (u x grad_2 u, -(u x grad_1 u)) . grad(phi)

    with u x v = u1*v2 - u2*v1.  phi is a callable or an array of per-site
    samples, itself interpolated piecewise-affinely; the integrand is then
    polynomial per triangle and the 3-point edge-midpoint rule (exact for
    quadratics) integrates it exactly.
    """
    spin = as_spin(u)
    lat = spin.lattice
    phi = _phi_samples(u, phi)
    _check_support(u, phi)

    c = lat.plaq_corners            # columns: 00, 10, 11, 01
    v00, v10, v11, v01 = (spin.values[c[:, k]] for k in range(4))
    p00, p10, p11, p01 = (phi[c[:, k]] for k in range(4))
    eps = lat.eps
    area3 = eps ** 2 / 2.0 / 3.0

    def cross(a, b):
        return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]

    def triangle(va, vb, vd, gx, gy, fx, fy):
        mids = ((va + vb) / 2.0, (vb + vd) / 2.0, (va + vd) / 2.0)
        integrand = sum(cross(w, gy) * fx - cross(w, gx) * fy for w in mids)
        return area3 * np.sum(integrand)

    lower = triangle(
        v00, v10, v11,
        (v10 - v00) / eps, (v11 - v10) / eps,
        (p10 - p00) / eps, (p11 - p10) / eps,
    )
    upper = triangle(
        v00, v01, v11,
        (v11 - v01) / eps, (v01 - v00) / eps,
        (p11 - p01) / eps, (p01 - p00) / eps,
    )
    return float(-(lower + upper) / TWO_PI)


@dataclass
class EnergyReport:
    """Raw energy of a field plus the standard normalizations."""

    eps: float
    raw: float
    theta: float | None = None
    region: str | None = None

    @property
    def scaled(self) -> dict[str, float]:
        out = {
            "per_eps2": self.raw / self.eps ** 2,
            "per_eps2_log": self.raw / (self.eps ** 2 * abs(np.log(self.eps))),
        }
        if self.theta is not None:
            out["per_eps_theta"] = self.raw / (self.eps * self.theta)
        return out

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "theta": self.theta,
            "raw": self.raw,
            "scaled": self.scaled,
            "region": self.region,
        }


def energy_report(u: Field, region: Domain | None = None, region_tag: str | None = None) -> EnergyReport:
    if isinstance(u, ClockField):
        return EnergyReport(
            eps=u.lattice.eps,
            raw=clock_energy(u, region),
            theta=u.clock.theta,
            region=region_tag,
        )
    return EnergyReport(eps=u.lattice.eps, raw=xy_energy(u, region), region=region_tag)
