"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py`` (the lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py``.
"""

import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from haloslhe import (
    DoGParams,
    EqualizerConfig,
    ImagePlane,
    SigmaField,
    SigmaParams,
    SpatialKernel,
    StepEdgeSpec,
    build_sigma_field,
    decode_pnm,
    encode_pnm,
    equalize_binned,
    equalize_reference,
    local_mean,
    make_step_edge,
    measure_halo,
    perceived_luminance,
    read_pnm,
    sigma_at,
    sigma_sweep,
    stacked_li_report,
)
from haloslhe.bench import bench_engines, synthetic_image
from haloslhe.cli import run_cli

DATA = Path(__file__).parent / "data"
L = 1023.0
RESULTS = {}
STEP = StepEdgeSpec(256, 256, 200, 800, 128)
BOX32 = SpatialKernel.box(32)


def record(number, title, checks, elapsed, budget):
    """Print and store one criterion line, then fail the test if any check failed."""
    checks = dict(checks)
    checks[f"runtime {elapsed:.1f}s < {budget:g}s"] = elapsed < budget
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    detail = "; ".join(failed) if failed else "; ".join(checks)
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} [{detail}]"
    RESULTS[number] = line
    print(line)
    assert ok, line


def test_criterion_1_sigma_rule():
    t0 = time.perf_counter()
    params = SigmaParams(64, 256, "paper")
    checks = {}
    for p, expected in [(512, 64.0), (0, 256.0), (256, 160.0)]:
        got = sigma_at(p / L, 512 / L, params)
        checks[f"sigma({p:g}|512)={got:.9g} vs {expected:g}"] = abs(got - expected) <= 1e-9 * expected
    worst = 0.0
    for m in np.linspace(1 / L, 1.0, 257):
        below = np.nextafter(m, 0.0)
        worst = max(worst, abs(sigma_at(below, m, params) - sigma_at(m, m, params)))
    checks[f"boundary jump {worst:.3g} <= {1e-6 * 192:.3g}"] = worst <= 1e-6 * (256 - 64)
    record(1, "sigma rule canonical cases and continuity", checks, time.perf_counter() - t0, 1)


def test_criterion_2_reference_properties():
    t0 = time.perf_counter()
    kernel = SpatialKernel.box(3)
    params = SigmaParams(64, 256)
    n_seeds = 100
    bad = {"range": 0, "constant": 0, "offset": 0, "flip": 0, "monotone": 0}
    for seed in range(n_seeds):
        rng = np.random.default_rng(seed)
        levels = rng.uniform(0, 923, (64, 64))
        plane = ImagePlane.from_levels(levels)
        sigmas = build_sigma_field(plane, local_mean(plane, kernel), params)
        out = equalize_reference(plane, kernel, sigmas).samples
        bad["range"] += not (out.min() >= 0.0 and out.max() <= 1.0)

        const = ImagePlane(np.full((64, 64), rng.random()))
        bad["constant"] += not np.all(equalize_reference(const, kernel, sigmas).samples == 0.5)

        s = SigmaField.uniform(plane.shape, rng.uniform(20, 400))
        shifted = ImagePlane.from_levels(levels + 100.0)
        delta = np.abs(equalize_reference(shifted, kernel, s).samples
                       - equalize_reference(plane, kernel, s).samples).max()
        bad["offset"] += not delta <= 1e-9

        lr = equalize_reference(ImagePlane(plane.samples[:, ::-1]), kernel,
                                SigmaField(sigmas.values[:, ::-1])).samples
        ud = equalize_reference(ImagePlane(plane.samples[::-1]), kernel,
                                SigmaField(sigmas.values[::-1])).samples
        bad["flip"] += not (np.array_equal(lr, out[:, ::-1]) and np.array_equal(ud, out[::-1]))

        # raising the centre of a fixed neighbourhood never lowers its output
        ring = rng.uniform(0, 1023, (3, 3))
        sigma = SigmaField.uniform((3, 3), rng.uniform(5, 300))
        prev = -1.0
        for c in np.linspace(0, 1023, 12):
            ring[1, 1] = c
            o = equalize_reference(ImagePlane.from_levels(ring), SpatialKernel.box(1), sigma).samples[1, 1]
            bad["monotone"] += o < prev
            prev = o
    checks = {f"{name} violations={count}/{n_seeds}": count == 0 for name, count in bad.items()}
    record(2, "reference engine algebraic properties", checks, time.perf_counter() - t0, 60)


def _oracle_equivalence(plane, checks, label):
    sigmas = build_sigma_field(plane, local_mean(plane, BOX32), SigmaParams(64, 256))
    ref = equalize_reference(plane, BOX32, sigmas).levels()
    b256 = np.abs(equalize_binned(plane, BOX32, sigmas, EqualizerConfig(bin_count=256)).levels() - ref)
    b1024 = np.abs(equalize_binned(plane, BOX32, sigmas, EqualizerConfig(bin_count=1024)).levels() - ref)
    checks[f"{label} B256 max {b256.max():.3f} <= 2"] = b256.max() <= 2.0
    checks[f"{label} B256 mean {b256.mean():.3f} <= 0.5"] = b256.mean() <= 0.5
    checks[f"{label} B1024 max {b1024.max():.3f} <= 1"] = b1024.max() <= 1.0


@pytest.mark.slow
def test_criterion_3_oracle_equivalence():
    t0 = time.perf_counter()
    checks = {}
    _oracle_equivalence(synthetic_image(512), checks, "synthetic")
    _oracle_equivalence(read_pnm(DATA / "camera.pgm"), checks, "camera")
    record(3, "binned engine vs reference", checks, time.perf_counter() - t0, 120)


def _uniform_run(sigma):
    plane = make_step_edge(STEP)
    return equalize_reference(plane, BOX32, SigmaField.uniform(plane.shape, sigma))


def test_criterion_4_halo_monotonicity():
    t0 = time.perf_counter()
    rows = sigma_sweep(STEP, [50, 100, 200, 500], BOX32)
    light = [r.report.light_amp for r in rows]
    dark = [r.report.dark_amp for r in rows]
    checks = {
        "light " + "/".join(f"{a:.2f}" for a in light) + " non-increasing":
            all(a >= b for a, b in zip(light, light[1:])),
        "dark " + "/".join(f"{a:.2f}" for a in dark) + " non-increasing":
            all(a >= b for a, b in zip(dark, dark[1:])),
        "amp(500) < amp(50)": light[-1] < light[0] and dark[-1] < dark[0],
    }
    profile = rows[0].output.levels().mean(axis=0)
    closed = oracles.step_profile(256, 128, 200, 800, 32, lambda p, m: 50.0)
    checks[f"near-edge {profile[127]:.2f} vs closed form {closed[127]:.2f} (~256)"] = (
        abs(profile[127] - closed[127]) <= 4 and abs(profile[127] - 256) <= 4)
    checks[f"dark plateau {profile[0]:.2f} vs closed form {closed[0]:.2f} (~512)"] = (
        abs(profile[0] - closed[0]) <= 4 and abs(profile[0] - 512) <= 4)
    record(4, "uniform-sigma halo monotonicity", checks, time.perf_counter() - t0, 60)


def test_criterion_5_selectivity():
    t0 = time.perf_counter()
    (uniform,) = sigma_sweep(STEP, [64], BOX32)
    (adaptive,) = sigma_sweep(STEP, [], BOX32, SigmaParams(64, 512, "paper"))
    u, a = uniform.report, adaptive.report
    reduction = 1.0 - a.dark_amp / u.dark_amp
    checks = {
        f"dark {u.dark_amp:.3f} -> {a.dark_amp:.3f} reduced {100 * reduction:.1f}% >= 10%": reduction >= 0.10,
        f"light {u.light_amp:.3f} -> {a.light_amp:.3f} within 1 level": abs(a.light_amp - u.light_amp) <= 1.0,
    }
    record(5, "adaptive paper policy selectivity", checks, time.perf_counter() - t0, 60)


def test_criterion_6_lateral_inhibition():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = 0.0
    for value in rng.random(20):
        plane = ImagePlane(np.full((64, 64), value))
        worst = max(worst, float(np.abs(perceived_luminance(plane, DoGParams()).samples - value).max()))
    clean = make_step_edge(STEP)
    original, processed = stacked_li_report(clean, _uniform_run(50.0), STEP)
    checks = {
        f"constant fixed point err {worst:.2g} <= 1e-6": worst <= 1e-6,
        f"perceived light {processed.light_amp:.2f} > {original.light_amp:.2f}":
            processed.light_amp > original.light_amp,
        f"perceived dark {processed.dark_amp:.2f} > {original.dark_amp:.2f}":
            processed.dark_amp > original.dark_amp,
    }
    record(6, "lateral inhibition model and stacked LI", checks, time.perf_counter() - t0, 30)


def test_criterion_7_io_bit_exactness(tmp_path):
    t0 = time.perf_counter()
    checks = {}
    for name in ("gray8.pgm", "gray16.pgm", "color8.ppm", "color16.ppm", "camera.pgm"):
        raw = (DATA / name).read_bytes()
        image = decode_pnm(raw)
        checks[f"round trip {name}"] = encode_pnm(image, image.source_maxval) == raw
    runs = []
    for tag in ("a", "b"):
        tm = tmp_path / f"tm_{tag}.ppm"
        sw = tmp_path / f"sw_{tag}.csv"
        fig = tmp_path / f"sw_{tag}.png"
        codes = (run_cli(["tonemap", str(DATA / "color16.ppm"), str(tm), "--radius", "5"]),
                 run_cli(["sweep", "--sigmas", "50,200", "--width", "96", "--height", "8",
                          "--radius", "12", "--out", str(sw), "--figure", str(fig)]))
        checks[f"cli run {tag} exit codes {codes}"] = codes == (0, 0)
        runs.append(b"".join(p.read_bytes() for p in (tm, sw, fig) if p.exists()))
    checks["cli outputs byte-identical"] = runs[0] == runs[1] and len(runs[0]) > 0
    record(7, "PNM round trips and CLI determinism", checks, time.perf_counter() - t0, 60)


@pytest.mark.slow
def test_criterion_8_performance():
    t0 = time.perf_counter()
    rows = bench_engines(synthetic_image(1024), radii=(8, 64), ref_rows=8, repeats=3)
    cell = {(r.engine, r.radius): r for r in rows}
    speedup = cell["binned", 64].mpix_per_s / cell["reference", 64].mpix_per_s
    ratio = cell["binned", 64].seconds / cell["binned", 8].seconds
    checks = {
        f"binned/reference throughput at r64 {speedup:.1f}x >= 5x": speedup >= 5.0,
        f"binned r64/r8 wall time {ratio:.2f} <= 1.3": ratio <= 1.3,
        f"binned error {cell['binned', 64].max_err_levels:.3f} <= 2 levels":
            cell["binned", 64].max_err_levels <= 2.0,
    }
    record(8, "engine performance", checks, time.perf_counter() - t0, 300)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
