"""Exit criteria. Each check prints one PASS/FAIL line in the session summary."""

import math
import random
import time

import pytest

from cowkin import config as cfg
from cowkin.cli import main
from cowkin.core import ANGSTROM, CrystalSlab, PhysicalConstants, RB87, WaveVector2
from cowkin.laue import delta_kx_exact, delta_kx_first_order, laue_reflect
from cowkin.loop import AtomConfig, LoopMode, laser_mirror_reflect, run_atom_loop, run_cow_loop


def rel_err(value, target):
    return abs(value - target) / abs(target)


@pytest.fixture(scope="module")
def reference():
    run = cfg.load(preset="paper-2013")
    start = time.perf_counter()
    result = run_cow_loop(run.cow_config())
    elapsed = time.perf_counter() - start
    return run, result, elapsed


# 1. reference numbers, preset paper-2013, exact mode
@pytest.mark.parametrize(
    "name,attr,target,tol",
    [
        ("dky/ky = 2.7e-7 within 3%", "dky_per_leg_rel", 2.7e-7, 0.03),
        ("dkx/kx = 1.8e-7 within 4%", "dkx_rel", 1.8e-7, 0.04),
        ("(T3-T)/T = +1.8e-7 within 4%", "defocus_t3_rel", 1.8e-7, 0.04),
        ("(T4-T)/T = -1.8e-7 within 4%", "defocus_t4_rel", -1.8e-7, 0.04),
        ("(ky3-ky4)/ky = 9.5e-14 within 5%", "closure_rel", 9.5e-14, 0.05),
        ("acceptance margin = 0.054 within 10%", "acceptance_margin", 2.7e-7 / 5e-6, 0.10),
    ],
)
def test_1_reference_numbers(reference, criterion, name, attr, target, tol):
    run, result, _ = reference
    assert result.mode is LoopMode.EXACT
    value = getattr(result, attr)
    err = rel_err(value, target)
    assert criterion(f"1 {name}", err <= tol, f"{value:.4g}, off {err:.2%}")


# 2. flight time
def test_2_flight_time(reference, criterion):
    run, result, _ = reference
    k = 2 * math.pi / run.wavelength
    oracle = run.span_x * run.mass / (run.hbar * k * math.cos(result.theta_B))
    implied = 2.7e-7 * abs(result.ky_ref) * run.hbar / (run.mass * run.g)
    ok = (
        rel_err(result.flight_time, oracle) < 1e-12
        and rel_err(result.flight_time, 2.77e-5) <= 0.03
        and rel_err(result.flight_time, implied) <= 0.03
    )
    detail = f"T = {result.flight_time:.4g} s; oracle {oracle:.4g}; implied by 2.7e-7: {implied:.4g}"
    assert criterion("2 T ≈ 2.77e-5 s within 3%", ok, detail)


# 3. first-order equivalence
def test_3_first_order_equivalence(criterion):
    ok = True
    for preset in ("paper-2013", "si220-1.9A"):
        values = cfg.with_override(cfg.load_values(preset=preset), "physics.g", 9.81)
        values["engine.mode"] = "first_order"
        r = run_cow_loop(cfg.resolve(values).cow_config())
        ok &= r.path_upper.k_final == r.path_lower.k_final
        ok &= r.closure_rel == 0.0

    rng = random.Random(3)
    for _ in range(500):
        a = AtomConfig(
            wavelength=rng.uniform(1e-10, 1e-7),
            k_transfer=rng.uniform(1e5, 1e8),
            span_time=rng.uniform(1e-4, 1.0),
            species=RB87,
            constants=PhysicalConstants(g=rng.uniform(0.0, 20.0)),
        )
        r = run_atom_loop(a)
        ok &= r.path_upper.k_final == r.path_lower.k_final and r.closure_rel == 0.0
    assert criterion("3 first-order COW exits identical; atom loop closes exactly", ok)


# 4. oracle equivalence
def test_4_oracle_equivalence(criterion):
    rng = random.Random(4)
    worst_ratio = 0.0
    worst_energy = 0.0
    for _ in range(10_000):
        H = rng.uniform(1e10, 6e10)
        slab = CrystalSlab(2 * math.pi / H)
        kx = rng.uniform(0.5, 4.0) * slab.H
        sign = rng.choice((-1.0, 1.0))
        dky = rng.uniform(-1e-5, 1e-5) * slab.H
        ky = sign * slab.H / 2 + dky
        dky = ky - sign * slab.H / 2
        exact = delta_kx_exact(kx, dky, sign * slab.H)
        if dky != 0:
            first = delta_kx_first_order(kx, dky, sign * slab.H)
            bound = 2 * abs(dky) * slab.H / kx**2
            worst_ratio = max(worst_ratio, rel_err(first, exact) / bound)
        k = WaveVector2(kx, ky)
        out = laue_reflect(k, slab)
        worst_energy = max(worst_energy, abs(out.reflected.magnitude() - k.magnitude()) / k.magnitude())
    ok_fo = criterion("4a first-order vs exact dkx below 2|dky|H/kx^2", worst_ratio < 1, f"worst error/bound {worst_ratio:.3f}")
    ok_en = criterion("4b Laue reflection elastic to 1e-12", worst_energy < 1e-12, f"worst {worst_energy:.2e}")
    assert ok_fo and ok_en


# 5. trivial limits
def test_5_trivial_limits(criterion):
    values = cfg.with_override(cfg.load_values(preset="paper-2013"), "physics.g", 0.0)
    zero_ok = True
    for mode in ("exact", "first_order"):
        values["engine.mode"] = mode
        r = run_cow_loop(cfg.resolve(values).cow_config())
        diags = (r.dky_per_leg_rel, r.dkx_rel, *r.defocus_rel, r.closure_rel, r.closure_kx_rel, r.time_mismatch, *r.acceptance_margins)
        zero_ok &= all(v == 0.0 for v in diags)
        zero_ok &= r.path_upper.k_final == r.path_lower.k_final

    slab = CrystalSlab(1.920 * ANGSTROM)
    out = laue_reflect(WaveVector2(2.834e10, -slab.H / 2), slab)
    spec_ok = out.specular and out.delta_kx == 0.0 and out.reflected.ky == slab.H / 2

    k = WaveVector2(1.3e9, -4.2e6)
    laser_ok = laser_mirror_reflect(k, 0.0, 1) == k and laser_mirror_reflect(k, 0.0, -1) == k

    criterion("5a g = 0 zeroes every gravity diagnostic", zero_ok)
    criterion("5b dky = 0 gives specular reflection with dkx = 0", spec_ok)
    criterion("5c k_transfer = 0 laser mirror is the identity", laser_ok)
    assert zero_ok and spec_ok and laser_ok


def _line_residual(xs, ys):
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
    icept = my - slope * mx
    return max(abs(y - (slope * x + icept)) / abs(y) for x, y in zip(xs, ys))


# 6. scaling
def test_6_scaling(criterion):
    base = cfg.load_values(preset="paper-2013")

    def run(key, x):
        return run_cow_loop(cfg.resolve(cfg.with_override(base, key, x)).cow_config())

    gs = [1.0 + i for i in range(10)]
    spans = [1.0 + i for i in range(10)]
    res_g = _line_residual(gs, [run("physics.g", g).dky_per_leg_rel for g in gs])
    res_l = _line_residual(spans, [run("setup.span_cm", s).dky_per_leg_rel for s in spans])
    ratio = run("physics.g", 9.81).closure_rel / run("physics.g", 9.81 / 2).closure_rel

    ok_g = criterion("6a dky/ky linear in g (residual < 1e-10)", res_g < 1e-10, f"{res_g:.1e}")
    ok_l = criterion("6b dky/ky linear in l (residual < 1e-10)", res_l < 1e-10, f"{res_l:.1e}")
    ok_q = criterion("6c closure quadratic in g (ratio 4 ± 1e-3)", abs(ratio - 4.0) <= 1e-3, f"{ratio:.6f}")
    assert ok_g and ok_l and ok_q


# 7. determinism
def test_7_determinism(tmp_path, criterion, capsys):
    commands = {
        "paper-table": ["paper-table", "--preset", "paper-2013", "--trace"],
        "sweep": ["sweep", "--preset", "paper-2013", "--key", "physics.g", "--from", "0", "--to", "9.81", "--steps", "5"],
        "compare": ["compare", "--preset", "paper-2013", "--trace"],
    }
    ok = True
    for name, argv in commands.items():
        outputs = []
        for i in range(2):
            out = tmp_path / f"{name}-{i}.out"
            assert main(argv + ["--out", str(out)]) == 0
            outputs.append(out.read_bytes())
        ok &= outputs[0] == outputs[1] and len(outputs[0]) > 0
    capsys.readouterr()
    assert criterion("7 repeated runs give byte-identical output files", ok)


def test_desk_scale(reference, criterion):
    _, _, elapsed = reference
    assert criterion("desk-scale: reference loop well under one second", elapsed < 1.0, f"{elapsed * 1e3:.2f} ms")
