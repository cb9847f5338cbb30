import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from clockspin import (
    Domain,
    RegimeSweepSpec,
    SpinField,
    build_construction,
    build_lattice,
    jacobian_equivalence_check,
    render_field,
    run_sweep,
    vortex_field,
    vorticity_measure,
)
from clockspin.cli import main
from clockspin.constructions import VortexSpec
from clockspin.errors import InvalidArgumentError
from clockspin.harness import construction_denominator
from clockspin.lattice import ClockField, ClockParams, load_field

GOLDEN = Path(__file__).parent / "golden" / "vortex_render.svg"

UNIT_SQUARE = {"kind": "rectangle", "xmin": 0, "xmax": 1, "ymin": 0, "ymax": 1}
DISK = {"kind": "disk", "center": [0.0, 0.0], "radius": 1.0}

JUMP_CONSTRUCTION = {
    "domain": UNIT_SQUARE,
    "kind": "transition",
    "v1_turns": 0.0,
    "v2_turns": 0.25,
    "wall_point": [0.5, 0.0],
    "wall_normal": [1.0, 0.0],
}


def test_construction_denominator():
    assert construction_denominator(JUMP_CONSTRUCTION) == 4
    assert construction_denominator({**JUMP_CONSTRUCTION, "v2_turns": 0.1}) == 10
    assert construction_denominator({"kind": "vortex"}) == 1


def test_build_construction_kinds():
    lat_field = build_construction(
        {"domain": DISK, "kind": "vortex", "center": [0.0, 0.0], "degree": 1}, 1 / 8
    )
    assert isinstance(lat_field, SpinField)
    cf = build_construction(JUMP_CONSTRUCTION, 1 / 8, ClockParams(8))
    assert isinstance(cf, ClockField)
    comp = build_construction(
        {
            "domain": DISK,
            "kind": "composite",
            "vortices": [{"center": [0.0, 0.0], "degree": 1, "radius": 0.3}],
            "background": {"kind": "vortex", "center": [0.0, 0.0], "degree": 1},
        },
        1 / 16,
    )
    assert isinstance(comp, SpinField)
    with pytest.raises(InvalidArgumentError):
        build_construction({"domain": DISK, "kind": "nope"}, 1 / 8)
    with pytest.raises(InvalidArgumentError):
        build_construction(JUMP_CONSTRUCTION, 1 / 8)    # needs a clock


def test_regime_guard_rejects_inconsistent_rules():
    bad_jump = RegimeSweepSpec(
        regime="jump",
        eps_list=[1 / 64],
        theta_rule={"kind": "power", "a": 2.0, "c": 1.0},   # theta far below eps|log eps|
        construction=JUMP_CONSTRUCTION,
    )
    with pytest.raises(InvalidArgumentError):
        run_sweep(bad_jump)
    bad_vortex = RegimeSweepSpec(
        regime="vortex",
        eps_list=[1 / 32],
        theta_rule={"kind": "power", "a": 0.4, "c": 1.0},   # theta too coarse
        construction={"domain": DISK, "kind": "vortex", "center": [0, 0], "degree": 1},
    )
    with pytest.raises(InvalidArgumentError):
        run_sweep(bad_vortex)


def test_run_sweep_jump_rows_and_outputs(tmp_path):
    spec = RegimeSweepSpec(
        regime="jump",
        eps_list=[2 ** -5, 2 ** -6],
        theta_rule={"kind": "power", "a": 0.4, "c": 3.0},
        construction=JUMP_CONSTRUCTION,
        out_csv=str(tmp_path / "sweep.csv"),
        out_fig=str(tmp_path / "sweep.png"),
    )
    rows = run_sweep(spec)
    assert [r.eps for r in rows] == [2 ** -5, 2 ** -6]
    assert all(r.N % 4 == 0 for r in rows)
    assert rows[1].scaled_energy > rows[0].scaled_energy
    assert (tmp_path / "sweep.png").stat().st_size > 0
    text = (tmp_path / "sweep.csv").read_text()
    assert text.startswith("# seed=0\n")
    # bit-exact reproducibility of everything except the timing column
    rows2 = run_sweep(spec)
    strip = lambda rs: [r.csv().rsplit(",", 1)[0] for r in rs]
    assert strip(rows) == strip(rows2)


def test_run_sweep_critical_composite():
    # a vortex-compatible background with a jump wall: the winding stays at
    # the vortex and the scaled energy clears the vortex-plus-wall floor
    target = {
        "domain": DISK,
        "atoms": [{"x": 0.0, "y": 0.0, "d": 1}],
    }
    spec = RegimeSweepSpec(
        regime="critical",
        eps_list=[1 / 32, 1 / 64],
        theta_rule={"kind": "critical"},
        construction={
            "domain": DISK,
            "kind": "composite",
            "vortices": [{"center": [0.0, 0.0], "degree": 1, "radius": 0.25}],
            "background": {"kind": "vortex", "center": [0.0, 0.0], "degree": 1},
        },
        target=__import__("clockspin").VortexMeasure.from_json(target),
    )
    rows = run_sweep(spec)
    assert rows[-1].flat_dist < rows[0].flat_dist or rows[-1].flat_dist < 0.05
    assert all(r.vorticity_total == 1 for r in rows)
    assert rows[-1].scaled_energy >= 0.9 * 2 * np.pi


def test_render_matches_golden(tmp_path):
    lat = build_lattice(Domain.disk(0, 0, 1), 1 / 6)
    u = vortex_field(lat, VortexSpec((0, 0), 1))
    mu = vorticity_measure(u)
    out = tmp_path / "render.svg"
    render_field(u, out, mu)
    render_field(u, tmp_path / "render_again.svg", mu)
    assert out.read_bytes() == (tmp_path / "render_again.svg").read_bytes()
    assert hashlib.sha256(out.read_bytes()).hexdigest() == hashlib.sha256(
        GOLDEN.read_bytes()
    ).hexdigest()


def test_render_without_measure_has_no_markers(tmp_path):
    lat = build_lattice(Domain.rectangle(0, 1, 0, 1), 1 / 4)
    u = SpinField(lat, np.tile([1.0, 0.0], (len(lat), 1)))
    out = tmp_path / "plain.svg"
    render_field(u, out)
    text = out.read_text()
    assert "circle" not in text
    # all arrows identical up to translation: one unique path shape
    assert text.count("<path") == len(lat)


def test_jacobian_equivalence_trivial_and_vortex():
    lat = build_lattice(Domain.disk(0, 0, 1), 1 / 32)
    const = SpinField(lat, np.tile([1.0, 0.0], (len(lat), 1)))

    def cone(p):
        return float(np.clip((0.5 - np.hypot(p[0], p[1])) / 0.25, 0.0, 1.0))

    mp, jp = jacobian_equivalence_check(const, cone)
    assert mp == 0.0 and jp == pytest.approx(0.0, abs=1e-14)

    u = vortex_field(lat, VortexSpec((0, 0), 1))
    cf = __import__("clockspin").project_clock(u, ClockParams(128))
    mp, jp = jacobian_equivalence_check(cf, cone)
    assert mp == pytest.approx(1.0, abs=1e-12)
    assert abs(mp - jp) < 0.05


def _write_json(path, payload):
    path.write_text(json.dumps(payload))


def test_cli_field_pipeline(tmp_path):
    spec = tmp_path / "spec.json"
    _write_json(spec, {**JUMP_CONSTRUCTION, "eps": 1 / 16, "N": 8})
    field = tmp_path / "a.field"
    assert main(["make-field", str(spec), str(field)]) == 0
    u = load_field(field)
    assert isinstance(u, ClockField) and u.clock.N == 8

    report = tmp_path / "report.json"
    assert main(["energy", str(field), "--out", str(report)]) == 0
    blob = json.loads(report.read_text())
    assert blob["eps"] == pytest.approx(1 / 16)
    assert "per_eps_theta" in blob["scaled"]

    mu_path = tmp_path / "mu.json"
    assert main(["vorticity", str(field), "--out", str(mu_path)]) == 0
    assert json.loads(mu_path.read_text())["atoms"] == []

    svg = tmp_path / "field.svg"
    assert main(["render", str(field), str(svg), "--mark-vortices"]) == 0
    assert svg.stat().st_size > 0


def test_cli_flat_dist(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    _write_json(a, {"domain": DISK, "atoms": [{"x": 0.0, "y": 0.0, "d": 1}]})
    _write_json(b, {"domain": DISK, "atoms": []})
    out = tmp_path / "d.json"
    assert main(["flat-dist", str(a), str(b), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["value"] == pytest.approx(1.0, abs=1e-9)
    # mismatched domains exit with the invalid-argument code
    c = tmp_path / "c.json"
    _write_json(c, {"domain": UNIT_SQUARE, "atoms": []})
    assert main(["flat-dist", str(a), str(c)]) == 2


def test_cli_core_energy_exit_codes(tmp_path):
    out = tmp_path / "core.json"
    code = main(["core-energy", "--eps", "0.125", "--r", "0.5",
                 "--tol", "1e-6", "--out", str(out)])
    assert code == 0
    blob = json.loads(out.read_text())
    assert blob["gamma"] >= 0 and blob["converged"]
    # starved of sweeps: result flagged via exit code 4, output still written
    code = main(["core-energy", "--eps", "0.03125", "--r", "1.0",
                 "--tol", "1e-12", "--max-sweeps", "3", "--out", str(out)])
    assert code == 4
    assert not json.loads(out.read_text())["converged"]


def test_cli_regime_sweep_and_guard(tmp_path):
    config = {
        "regime": "jump",
        "eps_list": [2 ** -5, 2 ** -6],
        "theta_rule": {"kind": "power", "a": 0.4, "c": 3.0},
        "construction": JUMP_CONSTRUCTION,
    }
    cfg = tmp_path / "sweep.json"
    _write_json(cfg, config)
    csv_path = tmp_path / "rows.csv"
    fig_path = tmp_path / "rows.png"
    assert main(["regime-sweep", str(cfg), "--out-csv", str(csv_path),
                 "--out-fig", str(fig_path)]) == 0
    lines = csv_path.read_text().splitlines()
    assert lines[1].startswith("eps,")
    assert len(lines) == 4
    assert fig_path.stat().st_size > 0

    _write_json(cfg, {**config, "theta_rule": {"kind": "power", "a": 2.0, "c": 1.0}})
    assert main(["regime-sweep", str(cfg)]) == 2


def test_cli_jacobian_check(tmp_path):
    lat = build_lattice(Domain.disk(0, 0, 1), 1 / 16)
    u = vortex_field(lat, VortexSpec((0, 0), 1))
    from clockspin import project_clock, save_field

    field = tmp_path / "v.field"
    save_field(project_clock(u, ClockParams(64)), field)
    out = tmp_path / "jac.json"
    assert main(["jacobian-check", str(field), "--cone", "0,0,0.25,0.5",
                 "--out", str(out)]) == 0
    blob = json.loads(out.read_text())
    assert blob["mu_pairing"] == pytest.approx(1.0, abs=1e-12)
    assert abs(blob["difference"]) < 0.2


def test_cli_renorm(tmp_path):
    m = tmp_path / "mu.json"
    _write_json(m, {"domain": DISK, "atoms": [{"x": 0.0, "y": 0.0, "d": 1}]})
    out = tmp_path / "renorm.csv"
    code = main(["renorm", "--measure", str(m), "--eta-list", "0.25",
                 "--grid-h", "0.03125", "--fd-h", "0.015625",
                 "--tol", "1e-6", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "eta,m_tilde,m_tilde_minus_log,renormalized_energy"
    eta, m_t, shifted, w = (float(v) for v in lines[1].split(","))
    assert m_t == pytest.approx(2 * np.pi * np.log(4), rel=0.05)
    assert abs(w) < 1e-10


def test_cli_renorm_flags_non_convergence(tmp_path):
    m = tmp_path / "mu.json"
    _write_json(m, {"domain": DISK, "atoms": [{"x": 0.0, "y": 0.0, "d": 1}]})
    out = tmp_path / "renorm.csv"
    code = main(["renorm", "--measure", str(m), "--eta-list", "0.25",
                 "--grid-h", "0.03125", "--fd-h", "0.03125",
                 "--tol", "1e-12", "--max-sweeps", "2", "--out", str(out)])
    assert code == 4
    assert out.read_text().count("\n") == 2   # header + one row still written


def test_cli_rejects_malformed_measure_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"nope\": 1}")
    good = tmp_path / "good.json"
    _write_json(good, {"domain": DISK, "atoms": []})
    assert main(["flat-dist", str(good), str(bad)]) == 2
    assert main(["flat-dist", str(good), str(tmp_path / "missing.json")]) == 2


def test_jacobian_gap_order_of_magnitude():
    # at the critical step rule the winding/Jacobian gap stays within the
    # theta * sqrt(|log eps|) envelope (fixed multiple of the coarsest ratio)
    from clockspin import project_clock

    def cone(p):
        return float(np.clip((0.5 - np.hypot(p[0], p[1])) / 0.25, 0.0, 1.0))

    ratios = []
    for eps in (1 / 16, 1 / 32, 1 / 64):
        lat = build_lattice(Domain.disk(0, 0, 1), eps)
        u = vortex_field(lat, VortexSpec((0, 0), 1))
        theta_t = eps * abs(np.log(eps))
        n = int(np.ceil(2 * np.pi / theta_t))
        cf = project_clock(u, ClockParams(n))
        mp, jp = jacobian_equivalence_check(cf, cone)
        theta = 2 * np.pi / n
        ratios.append(abs(mp - jp) / (theta * np.sqrt(abs(np.log(eps)))))
    assert max(ratios) <= 5 * ratios[0] + 1e-12


def test_run_sweep_vortex_normalization():
    target = __import__("clockspin").VortexMeasure.from_json(
        {"domain": DISK, "atoms": [{"x": 0.0, "y": 0.0, "d": 1}]}
    )
    spec = RegimeSweepSpec(
        regime="vortex",
        eps_list=[1 / 32],
        theta_rule={"kind": "power", "a": 2.0, "c": 1.0},
        construction={"domain": DISK, "kind": "vortex", "center": [0.0, 0.0],
                      "degree": 1},
        target=target,
    )
    (row,) = run_sweep(spec)
    # independent recomputation of the scaled column
    from clockspin import clock_energy, project_clock

    lat = build_lattice(Domain.disk(0, 0, 1), row.eps)
    u = vortex_field(lat, VortexSpec((0, 0), 1))
    cf = project_clock(u, ClockParams(row.N))
    expected = clock_energy(cf) / row.eps ** 2 - 2 * np.pi * 1 * abs(np.log(row.eps))
    assert row.scaled_energy == pytest.approx(expected, rel=1e-12)
    assert row.raw_energy == pytest.approx(clock_energy(cf), rel=1e-12)


def test_desk_scale_guard(tmp_path):
    config = {
        "regime": "vortex",
        "eps_list": [2 ** -10],
        "theta_rule": {"kind": "power", "a": 2.0, "c": 1.0},
        "construction": {"domain": DISK, "kind": "vortex",
                         "center": [0.0, 0.0], "degree": 1},
    }
    cfg = tmp_path / "fine.json"
    _write_json(cfg, config)
    assert main(["regime-sweep", str(cfg), "--out-csv", str(tmp_path / "x.csv")]) == 2
    assert main(["regime-sweep", str(cfg), "--allow-fine",
                 "--out-csv", str(tmp_path / "x.csv")]) == 0


def test_run_sweep_critical_vortex_plus_wall():
    # the lower-bound surrogate with both terms: one vortex plus a
    # transition-quantized wall away from it; the scaled energy clears
    # 0.9 * (2 pi + wall * geodesic gap), stays bounded (a raw jump would
    # blow up like 2 * wall / theta), and the winding stays a single unit
    # charge at the vortex
    wall_x = 0.3
    wall_len = 2 * np.sqrt(1 - wall_x ** 2)
    construction = {
        "domain": DISK,
        "kind": "composite",
        "vortices": [{"center": [-0.4, 0.0], "degree": 1, "radius": 0.25}],
        "background": {
            "kind": "product",
            "factors": [
                {"kind": "vortex", "center": [-0.4, 0.0], "degree": 1},
                {"kind": "transition", "v1_turns": 0.0, "v2_turns": 0.25,
                 "wall_point": [wall_x, 0.0], "wall_normal": [1.0, 0.0]},
            ],
        },
    }
    target = __import__("clockspin").VortexMeasure.from_json(
        {"domain": DISK, "atoms": [{"x": -0.4, "y": 0.0, "d": 1}]}
    )
    spec = RegimeSweepSpec(
        regime="critical",
        eps_list=[1 / 32, 1 / 64, 1 / 128],
        theta_rule={"kind": "critical"},
        construction=construction,
        target=target,
    )
    rows = run_sweep(spec)
    floor = 0.9 * (2 * np.pi + wall_len * np.pi / 2)
    for row in rows:
        assert floor <= row.scaled_energy <= 20.0
        assert row.vorticity_total == 1
    assert all(r.N % 4 == 0 for r in rows)   # nested transition drives N
    flats = [r.flat_dist for r in rows]
    assert flats[-1] < 0.01 and flats[-1] < flats[0]


def test_product_construction_requires_factors():
    with pytest.raises(InvalidArgumentError):
        build_construction({"domain": DISK, "kind": "product",
                            "factors": [{"kind": "constant"}]}, 1 / 8)


def test_cli_core_energy_sequence(tmp_path):
    out = tmp_path / "core.csv"
    fig = tmp_path / "core.png"
    code = main(["core-energy", "--eps-list", "0.125,0.0625", "--r", "1.0",
                 "--tol", "1e-6", "--out", str(out), "--out-fig", str(fig)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "eps,gamma,g"
    assert len(lines) == 3
    g_coarse, g_fine = (float(l.split(",")[2]) for l in lines[1:])
    assert g_fine > g_coarse > 0      # g grows toward its limit at desk scale
    assert fig.stat().st_size > 0
    assert main(["core-energy", "--r", "1.0"]) == 2     # neither eps form given
