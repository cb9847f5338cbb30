import numpy as np
import pytest

from clockspin import (
    Domain,
    SpinField,
    build_lattice,
    clock_energy,
    composite_field,
    jump_functional,
    loop_degree,
    pure_jump_field,
    sample_smooth,
    transition_field,
    vortex_field,
)
from clockspin.constructions import JumpSpec, VortexSpec
from clockspin.errors import InvalidArgumentError
from clockspin.geometry import geodesic_dist, rotate, unit_from_angle
from clockspin.lattice import ClockParams

from conftest import rect_lattice


def vertical_wall(v1, v2, x=0.5):
    return JumpSpec(v1, v2, wall_point=(x, 0.0), wall_normal=(1.0, 0.0))


def test_pure_jump_constant_when_equal():
    lat = rect_lattice(6)
    u = pure_jump_field(lat, vertical_wall((0.0, 1.0), (0.0, 1.0)))
    assert np.all(u.values == [0.0, 1.0])


def test_pure_jump_splits_sites():
    lat = rect_lattice(8)   # eps = 1/9, wall at 0.5 between columns 4 and 5
    u = pure_jump_field(lat, vertical_wall((1.0, 0.0), (-1.0, 0.0)))
    left = lat.xy[:, 0] <= 0.5
    assert np.all(u.values[left] == [1.0, 0.0])
    assert np.all(u.values[~left] == [-1.0, 0.0])
    assert left.sum() == 8 * 4


def test_pure_jump_wall_energy_vs_bond_count():
    lat = rect_lattice(15)   # eps = 1/16, wall exactly on a lattice column
    spec = vertical_wall((1.0, 0.0), (0.0, 1.0))
    u = pure_jump_field(lat, spec)
    # every row contributes exactly one crossing bond
    d = float(geodesic_dist(np.array(spec.v1), np.array(spec.v2)))
    assert jump_functional(u) == pytest.approx(15 * lat.eps * d, abs=1e-12)


def test_transition_constant_when_equal():
    lat = rect_lattice(6)
    cf = transition_field(lat, vertical_wall((1.0, 0.0), (1.0, 0.0)), ClockParams(8))
    assert np.all(cf.indices == 0)


def test_transition_quarter_turn_strip():
    # N = 8: two one-step columns carry the quarter turn
    lat = rect_lattice(15)
    clock = ClockParams(8)
    cf = transition_field(lat, vertical_wall((1.0, 0.0), (0.0, 1.0)), clock)
    by_column = {i: set() for i in range(1, 16)}
    for (i, j), k in zip(lat.ij, cf.indices):
        by_column[i].add(int(k))
    assert all(len(s) == 1 for s in by_column.values())
    ks = [by_column[i].pop() for i in range(1, 16)]
    assert ks[:8] == [0] * 8            # wall sits at x=0.5, column 8
    assert ks[8:10] == [1, 2]           # strip of one-step columns
    assert ks[10:] == [2] * 5
    steps = np.abs(np.diff(ks))
    assert set(steps) <= {0, 1}


def test_transition_winds_shortest_arc():
    lat = rect_lattice(10)
    clock = ClockParams(8)
    # from k=7 to k=1 the short way crosses k=0
    spec = vertical_wall(tuple(unit_from_angle(7 * clock.theta)),
                         tuple(unit_from_angle(1 * clock.theta)))
    cf = transition_field(lat, spec, clock)
    cols = {}
    for (i, j), k in zip(lat.ij, cf.indices):
        cols[i] = int(k)
    ks = [cols[i] for i in sorted(cols)]
    assert ks[0] == 7 and ks[-1] == 1
    assert 4 not in ks      # never takes the long way


def test_transition_antipodal_tie_counterclockwise():
    lat = rect_lattice(10)
    clock = ClockParams(8)
    spec = vertical_wall((1.0, 0.0), (-1.0, 0.0))
    cf = transition_field(lat, spec, clock)
    ks = sorted(set(int(k) for k in cf.indices))
    assert ks == [0, 1, 2, 3, 4]     # counterclockwise through the upper arc


def test_transition_requires_representable_values():
    lat = rect_lattice(6)
    with pytest.raises(InvalidArgumentError):
        transition_field(lat, vertical_wall((1.0, 0.0), tuple(unit_from_angle(1.0))),
                         ClockParams(8))
    with pytest.raises(InvalidArgumentError):
        transition_field(
            lat,
            JumpSpec((1.0, 0.0), (0.0, 1.0), (0.5, 0.5), tuple(unit_from_angle(0.3))),
            ClockParams(8),
        )


def test_transition_energy_trend_toward_geodesic_wall():
    # scaled energy approaches the geodesic gap times the wall length
    target = np.pi / 2
    prev_err = np.inf
    for k in (4, 6, 8):
        eps = 2.0 ** -k
        theta_t = eps ** 0.4
        n = int(np.ceil(2 * np.pi / theta_t))
        n += -n % 4
        lat = build_lattice(Domain.rectangle(0, 1, 0, 1), eps)
        cf = transition_field(lat, vertical_wall((1.0, 0.0), (0.0, 1.0)), ClockParams(n))
        scaled = clock_energy(cf) / (eps * 2 * np.pi / n)
        err = abs(scaled - target)
        assert err < prev_err
        prev_err = err
    assert prev_err <= 0.10 * target


def test_vortex_field_radial_values():
    lat = build_lattice(Domain.disk(0, 0, 1), 0.25)
    u = vortex_field(lat, VortexSpec((0, 0), 1))
    for k, p in enumerate(lat.xy):
        r = np.hypot(*p)
        if r > 0:
            np.testing.assert_allclose(u.values[k], p / r, atol=1e-14)
    assert tuple(u.values[lat.ordinal(0, 0)]) == (1.0, 0.0)


def test_vortex_field_phase_equivariant(rng):
    lat = build_lattice(Domain.disk(0, 0, 1), 0.2)
    g = unit_from_angle(0.81)
    u = vortex_field(lat, VortexSpec((0.05, 0.02), 2))
    v = vortex_field(lat, VortexSpec((0.05, 0.02), 2, tuple(g)))
    np.testing.assert_allclose(v.values, rotate(g, u.values), atol=1e-12)


def test_composite_empty_is_background(rng):
    lat = rect_lattice(8)
    bg = SpinField(lat, unit_from_angle(rng.uniform(0, 2 * np.pi, len(lat))))
    out = composite_field(lat, [], bg, [])
    np.testing.assert_array_equal(out.values, bg.values)


def test_composite_matches_background_outside_balls():
    lat = build_lattice(Domain.disk(0, 0, 1), 1 / 24)
    bg = SpinField(lat, np.tile([0.0, 1.0], (len(lat), 1)))
    spec = VortexSpec((0.3, -0.1), 1)
    out = composite_field(lat, [spec], bg, [0.25])
    inside = np.hypot(*(lat.xy - [0.3, -0.1]).T) <= 0.25
    np.testing.assert_array_equal(out.values[~inside], bg.values[~inside])
    ref = vortex_field(lat, spec)
    np.testing.assert_array_equal(out.values[inside], ref.values[inside])


def test_composite_ball_winding_is_degree():
    lat = build_lattice(Domain.disk(0, 0, 1), 1 / 24)
    bg = vortex_field(lat, VortexSpec((0.0, 0.0), 1))   # compatible background
    out = composite_field(lat, [VortexSpec((0.0, 0.0), 1, tuple(unit_from_angle(0.4)))],
                          bg, [0.3])
    m = 12
    loop = (
        [(i, -m) for i in range(-m, m)]
        + [(m, j) for j in range(-m, m)]
        + [(i, m) for i in range(m, -m, -1)]
        + [(-m, j) for j in range(m, -m, -1)]
    )
    assert loop_degree(out, loop) == 1


def test_composite_seam_energy_scales_with_perimeter():
    # crude gluing: the seam adds at most O(perimeter / eps) bonds of O(1)
    r = 0.3
    for eps in (1 / 16, 1 / 32):
        lat = build_lattice(Domain.disk(0, 0, 1), eps)
        bg = SpinField(lat, np.tile([1.0, 0.0], (len(lat), 1)))
        out = composite_field(lat, [VortexSpec((0, 0), 1)], bg, [r])
        inside = np.hypot(*lat.xy.T) <= r
        b = lat.bonds
        seam = inside[b[:, 0]] ^ inside[b[:, 1]]
        d = out.values[b[seam, 0]] - out.values[b[seam, 1]]
        seam_energy = lat.eps ** 2 * float(np.sum(d ** 2))
        assert seam_energy <= 4 * lat.eps ** 2 * seam.sum()
        assert seam.sum() <= 16 * r / eps


def test_composite_validation():
    lat = build_lattice(Domain.disk(0, 0, 1), 0.1)
    bg = SpinField(lat, np.tile([1.0, 0.0], (len(lat), 1)))
    with pytest.raises(InvalidArgumentError):
        composite_field(lat, [VortexSpec((0.0, 0.0), 1), VortexSpec((0.2, 0.0), 1)],
                        bg, [0.15, 0.15])
    with pytest.raises(InvalidArgumentError):
        composite_field(lat, [VortexSpec((0.9, 0.0), 1)], bg, [0.3])


def test_sample_smooth_constant_and_shift():
    lat = rect_lattice(6)
    const = sample_smooth(lat, lambda p: np.tile([0.0, -1.0], (len(p), 1)))
    assert np.all(const.values == [0.0, -1.0])

    def f(p):
        return unit_from_angle(3.0 * p[:, 0] + p[:, 1])

    eps = lat.eps
    a = sample_smooth(lat, f, (0.0, 0.0))
    b = sample_smooth(lat, f, (eps, 0.0))
    # shifting the sampling by one spacing reproduces the neighbor's values
    for (i, j) in ((1, 1), (3, 4), (5, 2)):
        k = lat.ordinal(i, j)
        t = lat.ordinal(i + 1, j)
        if t >= 0:
            np.testing.assert_allclose(b.values[k], a.values[t], atol=1e-12)


def test_sample_smooth_radial_annulus_energy():
    dom = Domain.rectangle(-1, 1, -1, 1)
    r, R = 0.25, 0.75
    eps = r / 8
    lat = build_lattice(dom, eps)
    u = sample_smooth(lat, lambda p: p / np.hypot(p[:, 0], p[:, 1])[:, None],
                      (eps / 2, eps / 2))
    rho = np.hypot(*(lat.xy + [eps / 2, eps / 2]).T)
    inside = (rho > r) & (rho < R)
    b = lat.bonds
    keep = inside[b[:, 0]] & inside[b[:, 1]]
    d = u.values[b[keep, 0]] - u.values[b[keep, 1]]
    exact = 2 * np.pi * np.log(R / r)
    assert abs(float(np.sum(d ** 2)) - exact) <= 0.10 * exact


def test_sample_smooth_rejects_non_unit():
    lat = rect_lattice(4)
    with pytest.raises(InvalidArgumentError):
        sample_smooth(lat, lambda p: p)     # not unit on the lattice


def test_transition_other_wall_orientations():
    # horizontal wall, normal +e2: the strip marches upward
    lat = rect_lattice(12)
    clock = ClockParams(8)
    spec = JumpSpec((1.0, 0.0), (0.0, 1.0), wall_point=(0.0, 0.5),
                    wall_normal=(0.0, 1.0))
    cf = transition_field(lat, spec, clock)
    rows = {}
    for (i, j), k in zip(lat.ij, cf.indices):
        rows.setdefault(j, set()).add(int(k))
    assert all(len(s) == 1 for s in rows.values())
    ks = [rows[j].pop() for j in sorted(rows)]
    assert ks[0] == 0 and ks[-1] == 2
    assert set(np.abs(np.diff(ks))) <= {0, 1}

    # reversed normal flips which side holds v1
    spec_rev = JumpSpec((1.0, 0.0), (0.0, 1.0), wall_point=(0.5, 0.0),
                        wall_normal=(-1.0, 0.0))
    cf_rev = transition_field(lat, spec_rev, clock)
    cols = {}
    for (i, j), k in zip(lat.ij, cf_rev.indices):
        cols.setdefault(i, set()).add(int(k))
    ks = [cols[i].pop() for i in sorted(cols)]
    assert ks[0] == 2 and ks[-1] == 0
