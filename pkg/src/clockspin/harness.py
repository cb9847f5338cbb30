"""Experiment orchestration: construction specs, regime sweeps with CSV and
figure output, field rendering, and the winding/Jacobian cross-check."""

from __future__ import annotations

import colorsys
import time
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, log, pi

import numpy as np

from . import constructions as cons
from .energy import clock_energy, jacobian_pairing
from .errors import InvalidArgumentError
from .flat_metric import flat_distance
from .geometry import Domain, rotate
from .lattice import (
    ClockField,
    ClockParams,
    Field,
    SpinField,
    as_spin,
    build_lattice,
    project_clock,
)
from .vorticity import VortexMeasure, vorticity_measure

TWO_PI = 2.0 * pi


# ---------------------------------------------------------------------------
# construction specs (JSON face of the generators)
# ---------------------------------------------------------------------------

def _turns(value) -> Fraction:
    # going through str() keeps human-entered decimals exact (0.25 -> 1/4)
    return Fraction(str(value))


def _unit_of_turns(t: Fraction) -> tuple[float, float]:
    ang = TWO_PI * float(t)
    return (float(np.cos(ang)), float(np.sin(ang)))


def construction_denominator(spec: dict) -> int:
    """Least N0 such that every exact clock value in the construction is
    representable whenever N is a multiple of N0 (recursing into nested
    composite backgrounds and product factors)."""
    kind = spec.get("kind")
    if kind == "transition":
        d1 = _turns(spec.get("v1_turns", 0)).limit_denominator(10**9).denominator
        d2 = _turns(spec.get("v2_turns", 0)).limit_denominator(10**9).denominator
        return int(np.lcm(d1, d2))
    if kind == "composite":
        return construction_denominator(spec.get("background", {}))
    if kind == "product":
        out = 1
        for sub in spec.get("factors", []):
            out = int(np.lcm(out, construction_denominator(sub)))
        return out
    return 1


def _jump_spec(spec: dict) -> cons.JumpSpec:
    return cons.JumpSpec(
        v1=_unit_of_turns(_turns(spec.get("v1_turns", 0))),
        v2=_unit_of_turns(_turns(spec.get("v2_turns", 0))),
        wall_point=tuple(spec.get("wall_point", (0.0, 0.0))),
        wall_normal=tuple(spec.get("wall_normal", (1.0, 0.0))),
    )


def build_construction(spec: dict, eps: float, clock: ClockParams | None = None) -> Field:
    """Materialize a construction spec on the eps-lattice of its domain.

    Kinds: "constant", "pure_jump", "transition" (needs a clock),
    "vortex", "composite" (vortex balls over a nested background), and
    "product" (pointwise rotation composition of nested factors).  Clock
    values are given in turns so exact representability is checkable.
    """
    if "domain" not in spec or "kind" not in spec:
        raise InvalidArgumentError("construction spec needs 'domain' and 'kind'")
    lat = build_lattice(Domain.from_json(spec["domain"]), eps)
    return _build_on(lat, spec, clock)


def _build_on(lat, spec: dict, clock: ClockParams | None) -> Field:
    kind = spec.get("kind")
    if kind == "constant":
        v = _unit_of_turns(_turns(spec.get("value_turns", 0)))
        return SpinField(lat, np.tile(v, (lat.n_sites, 1)))
    if kind == "pure_jump":
        return cons.pure_jump_field(lat, _jump_spec(spec))
    if kind == "transition":
        if clock is None:
            raise InvalidArgumentError("a transition construction needs a clock N")
        return cons.transition_field(lat, _jump_spec(spec), clock)
    if kind == "vortex":
        v = spec.get("phase_turns", 0)
        return cons.vortex_field(
            lat,
            cons.VortexSpec(tuple(spec["center"]), int(spec["degree"]),
                            _unit_of_turns(_turns(v))),
        )
    if kind == "composite":
        vort = [
            cons.VortexSpec(tuple(s["center"]), int(s["degree"]),
                            _unit_of_turns(_turns(s.get("phase_turns", 0))))
            for s in spec["vortices"]
        ]
        radii = [float(s["radius"]) for s in spec["vortices"]]
        background = as_spin(_build_on(lat, spec["background"], clock))
        return cons.composite_field(lat, vort, background, radii)
    if kind == "product":
        factors = spec.get("factors", [])
        if len(factors) < 2:
            raise InvalidArgumentError("a product construction needs >= 2 factors")
        values = as_spin(_build_on(lat, factors[0], clock)).values
        for sub in factors[1:]:
            values = rotate(values, as_spin(_build_on(lat, sub, clock)).values)
        return SpinField(lat, values)
    raise InvalidArgumentError(f"unknown construction kind {kind!r}")


# ---------------------------------------------------------------------------
# regime sweeps
# ---------------------------------------------------------------------------

# sweeps finer than this need an explicit opt-in
DESK_SCALE_FLOOR = 2.0 ** -9


@dataclass
class RegimeSweepSpec:
    regime: str                       # jump | critical | vortex
    eps_list: list[float]
    theta_rule: dict                  # {"kind": "power", "a":..., "c":...} |
                                      # {"kind": "critical"} | {"kind": "fixedN", "N":...}
    construction: dict
    target: VortexMeasure | None = None
    seed: int = 0
    allow_fine: bool = False
    out_csv: str | None = None
    out_fig: str | None = None

    @staticmethod
    def from_json(obj: dict) -> "RegimeSweepSpec":
        target = None
        if obj.get("target"):
            target = VortexMeasure.from_json(obj["target"])
        try:
            return RegimeSweepSpec(
                regime=obj["regime"],
                eps_list=[float(e) for e in obj["eps_list"]],
                theta_rule=obj["theta_rule"],
                construction=obj["construction"],
                target=target,
                seed=int(obj.get("seed", 0)),
                allow_fine=bool(obj.get("allow_fine", False)),
                out_csv=obj.get("out_csv"),
                out_fig=obj.get("out_fig"),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"malformed sweep config: {exc}") from exc


@dataclass
class SweepRow:
    eps: float
    N: int
    theta: float
    raw_energy: float
    scaled_energy: float
    vorticity_total: int
    flat_dist: float
    wall_ms: float

    HEADER = "eps,N,theta,raw_energy,scaled_energy,vorticity_total,flat_dist,wall_ms"

    def csv(self) -> str:
        return ",".join(
            [
                repr(self.eps),
                str(self.N),
                repr(self.theta),
                repr(self.raw_energy),
                repr(self.scaled_energy),
                str(self.vorticity_total),
                repr(self.flat_dist),
                f"{self.wall_ms:.1f}",
            ]
        )


def _theta_target(rule: dict, eps: float) -> float:
    kind = rule.get("kind")
    if kind == "power":
        return float(rule["c"]) * eps ** float(rule["a"])
    if kind == "critical":
        return eps * abs(log(eps))
    if kind == "fixedN":
        return TWO_PI / int(rule["N"])
    raise InvalidArgumentError(f"unknown theta rule {rule!r}")


def _derive_clock(spec: RegimeSweepSpec, eps: float) -> ClockParams:
    n = ceil(TWO_PI / _theta_target(spec.theta_rule, eps))
    n0 = construction_denominator(spec.construction)
    n = max(n, 3)
    if n % n0:
        n += n0 - n % n0
    return ClockParams(n)


def validate_regime(spec: RegimeSweepSpec) -> None:
    """Reject inconsistent (regime, theta-rule) pairs before any computation."""
    if spec.regime not in ("jump", "critical", "vortex"):
        raise InvalidArgumentError(f"unknown regime {spec.regime!r}")
    if not spec.eps_list:
        raise InvalidArgumentError("eps_list is empty")
    finest = min(spec.eps_list)
    if finest < DESK_SCALE_FLOOR and not spec.allow_fine:
        raise InvalidArgumentError(
            f"eps below {DESK_SCALE_FLOOR} needs allow_fine (desk-scale guard)"
        )
    if spec.regime == "jump":
        theta = _derive_clock(spec, finest).theta
        if theta / (finest * abs(log(finest))) < 5.0:
            raise InvalidArgumentError(
                "jump regime needs theta / (eps |log eps|) >= 5 at the finest eps"
            )
    if spec.regime == "vortex":
        for eps in spec.eps_list:
            if _derive_clock(spec, eps).theta > eps / 5.0:
                raise InvalidArgumentError("vortex regime needs theta <= eps / 5")


def run_sweep(spec: RegimeSweepSpec) -> list[SweepRow]:
    """One row per eps: build the construction, project onto the clock,
    evaluate the regime's scaled energy, the total winding, and the flat
    distance to the target measure."""
    validate_regime(spec)
    rows = []
    for eps in sorted(spec.eps_list, reverse=True):
        t0 = time.perf_counter()
        clock = _derive_clock(spec, eps)
        u = build_construction(spec.construction, eps, clock)
        if not isinstance(u, ClockField):
            u = project_clock(u, clock)
        raw = clock_energy(u)
        mu = vorticity_measure(u)
        if spec.regime in ("jump", "critical"):
            scaled = raw / (eps * clock.theta)
        else:
            m = spec.target.total_variation() if spec.target is not None else mu.total_variation()
            scaled = raw / eps ** 2 - TWO_PI * m * abs(log(eps))
        fd = flat_distance(mu, spec.target).value
        rows.append(
            SweepRow(
                eps=eps,
                N=clock.N,
                theta=clock.theta,
                raw_energy=raw,
                scaled_energy=scaled,
                vorticity_total=mu.total_charge(),
                flat_dist=fd,
                wall_ms=(time.perf_counter() - t0) * 1e3,
            )
        )
    if spec.out_csv:
        write_sweep_csv(rows, spec.out_csv, spec.seed)
    if spec.out_fig:
        plot_sweep(rows, spec.out_fig, spec.regime)
    return rows


def write_sweep_csv(rows: list[SweepRow], path, seed: int) -> None:
    lines = [f"# seed={seed}", SweepRow.HEADER]
    lines += [row.csv() for row in rows]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def plot_sweep(rows: list[SweepRow], path, regime: str) -> None:
    """Scaled energy and flat distance against eps, log-scaled in eps."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    eps = [r.eps for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.semilogx(eps, [r.scaled_energy for r in rows], "o-")
    ax1.set_xlabel(r"$\varepsilon$")
    ax1.set_ylabel("scaled energy")
    ax1.invert_xaxis()
    ax2.semilogx(eps, [r.flat_dist for r in rows], "s-", color="tab:red")
    ax2.set_xlabel(r"$\varepsilon$")
    ax2.set_ylabel("flat distance to target")
    ax2.invert_xaxis()
    fig.suptitle(f"{regime} regime sweep")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def render_field(u: Field, out, measure: VortexMeasure | None = None,
                 cell_px: float = 18.0) -> None:
    """Write an SVG with one phase-colored arrow per site and optional
    charge markers; output is byte-identical for identical input."""
    spin = as_spin(u)
    lat = spin.lattice
    imin, jmin = lat.ij[:, 0].min(), lat.ij[:, 1].min()
    imax, jmax = lat.ij[:, 0].max(), lat.ij[:, 1].max()
    width = (imax - imin + 2) * cell_px
    height = (jmax - jmin + 2) * cell_px

    def px(xy):
        x = (xy[0] / lat.eps - imin + 1) * cell_px
        y = height - (xy[1] / lat.eps - jmin + 1) * cell_px
        return x, y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
    ]
    angles = spin.angles()
    half = 0.38 * cell_px
    head = 0.16 * cell_px
    for k in range(lat.n_sites):
        cx, cy = px(lat.xy[k])
        a = float(angles[k])
        dx, dy = np.cos(a), -np.sin(a)
        x1, y1 = cx - half * dx, cy - half * dy
        x2, y2 = cx + half * dx, cy + half * dy
        r, g, b = colorsys.hsv_to_rgb(a / TWO_PI, 0.85, 0.8)
        color = f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"
        wx, wy = -dy * head * 0.6, dx * head * 0.6
        parts.append(
            f'<path d="M {x1:.2f} {y1:.2f} L {x2:.2f} {y2:.2f} '
            f'M {x2 - head * dx + wx:.2f} {y2 - head * dy + wy:.2f} '
            f'L {x2:.2f} {y2:.2f} '
            f'L {x2 - head * dx - wx:.2f} {y2 - head * dy - wy:.2f}" '
            f'stroke="{color}" fill="none" stroke-width="1.2"/>'
        )
    if measure is not None:
        for (x, y), d in zip(measure.positions, measure.charges):
            cx, cy = px((x, y))
            label = f"+{d}" if d > 0 else str(d)
            if abs(d) == 1:
                label = label[0]
            parts.append(
                f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{0.45 * cell_px:.2f}" '
                f'fill="white" stroke="black" stroke-width="1"/>'
                f'<text x="{cx:.2f}" y="{cy + 0.18 * cell_px:.2f}" '
                f'text-anchor="middle" font-size="{0.62 * cell_px:.1f}" '
                f'font-family="monospace">{label}</text>'
            )
    parts.append("</svg>")
    with open(out, "w", encoding="ascii") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# winding / Jacobian cross-check
# ---------------------------------------------------------------------------

def jacobian_equivalence_check(u: Field, phi) -> tuple[float, float]:
    """Pair the vortex measure and the normalized affine-interpolation
    Jacobian with the same test function; returns both pairings."""
    mu = vorticity_measure(u)
    if callable(phi):
        mu_pairing = float(sum(d * phi(p) for p, d in zip(mu.positions, mu.charges)))
    else:
        phi_arr = np.asarray(phi, dtype=float)
        lat = u.lattice
        keep = np.asarray(
            [lat.ordinal(int(round(x / lat.eps)), int(round(y / lat.eps)))
             for x, y in mu.positions],
            dtype=np.int64,
        )
        mu_pairing = float(np.sum(mu.charges * phi_arr[keep]))
    return mu_pairing, jacobian_pairing(u, phi)
