"""Acceptance gate: every criterion at its stated tolerance.

Run `pytest tests/test_acceptance.py -v -s` to get one PASS/FAIL line per
criterion on stdout.
"""

import functools
import json
import math
import struct
import subprocess
import sys
import time

import numpy as np
import pytest

from hmcodec import (
    DecodeConfig,
    FormatError,
    GaussianParams,
    Heatmap,
    KeypointDocument,
    NoiseModel,
    TrialSpec,
    dark_decode,
    decode,
    generate_trial,
    read_heatmaps,
    read_keypoints,
    write_heatmaps,
    write_keypoints,
)
from hmcodec.bench import _trial_rng
from hmcodec.cli import main as cli_main

from _oracles import (
    grid_search_center,
    monte_carlo_mean_floor_displacement,
    monte_carlo_mean_offset_norm,
)

LAM = 4.0
SEED = 20260809
SIGMA2 = GaussianParams(2.0)
N_FULL = 10_000

ARGMAX_CFG = DecodeConfig(method="argmax", lam=LAM)
SHIFT_CFG = DecodeConfig(method="standard_shift", lam=LAM)
DARK_CFG = DecodeConfig(method="dark", modulate=False, sigma=SIGMA2, lam=LAM)
DARK_MOD_CFG = DecodeConfig(method="dark", modulate=True, sigma=SIGMA2, lam=LAM)

# "exactly 0.25": p = m + shift quantizes the offset at ulp(m), so exact
# equality is asserted at a few ulps of the coordinate magnitude.
SHIFT_NORM_TOL = 2e-14


def criterion(name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE FAIL  {name}", flush=True)
                raise
            print(f"ACCEPTANCE PASS  {name}", flush=True)
            return result

        return wrapper

    return deco


def paired_gap_sems(a: np.ndarray, b: np.ndarray) -> float:
    """Mean gap of a - b in units of the paired standard error."""
    diff = a - b
    sem = diff.std(ddof=1) / math.sqrt(len(diff))
    return float(diff.mean() / sem)


def run_suite(spec: TrialSpec, configs: dict[str, DecodeConfig]):
    """Decode every trial with every config; collect per-trial diagnostics."""
    n = spec.count
    errors = {label: np.empty(n) for label in configs}
    shift_norm_dev = 0.0
    for i in range(n):
        heatmap, (gu, gv) = generate_trial(spec, i)
        for label, cfg in configs.items():
            r = decode(heatmap, cfg)
            errors[label][i] = math.hypot(r.p_hat[0] - gu, r.p_hat[1] - gv)
            if cfg.method == "standard_shift" and r.fallback == "none":
                norm = math.hypot(r.p[0] - r.m[0], r.p[1] - r.m[1])
                shift_norm_dev = max(shift_norm_dev, abs(norm - 0.25))
    return errors, shift_norm_dev


@pytest.fixture(scope="module")
def noiseless_suite():
    spec = TrialSpec(
        count=N_FULL, height=48, width=64, sigma_range=(1.0, 3.0), lam=LAM, seed=SEED
    )
    # timed pass: trial generation + dark decode only, single worker
    axis_err = np.empty((N_FULL, 2))
    dark_err = np.empty(N_FULL)
    t0 = time.perf_counter()
    for i in range(N_FULL):
        heatmap, (gu, gv) = generate_trial(spec, i)
        r = dark_decode(heatmap, DARK_CFG)
        axis_err[i, 0] = abs(r.p[0] - gu / LAM)
        axis_err[i, 1] = abs(r.p[1] - gv / LAM)
        dark_err[i] = math.hypot(r.p_hat[0] - gu, r.p_hat[1] - gv)
    dark_runtime = time.perf_counter() - t0
    errors, shift_dev = run_suite(spec, {"argmax": ARGMAX_CFG, "shift": SHIFT_CFG})
    errors["dark"] = dark_err
    return {
        "spec": spec,
        "axis_err": axis_err,
        "errors": errors,
        "dark_runtime": dark_runtime,
        "shift_norm_dev": shift_dev,
    }


@pytest.fixture(scope="module")
def gaussian_suite():
    spec = TrialSpec(
        count=3000,
        height=48,
        width=64,
        sigma_range=(1.0, 3.0),
        lam=LAM,
        noise=NoiseModel(kind="gaussian_additive", amplitude=0.02),
        seed=SEED + 1,
    )
    errors, shift_dev = run_suite(
        spec, {"argmax": ARGMAX_CFG, "shift": SHIFT_CFG, "dark": DARK_CFG}
    )
    return {"spec": spec, "errors": errors, "shift_norm_dev": shift_dev}


@criterion("exact recovery: 10k noiseless unbiased trials, dark decode < 1e-5 px in < 5 s")
def test_exact_recovery(noiseless_suite):
    axis_err = noiseless_suite["axis_err"]
    assert axis_err.max() < 1e-5, f"max per-axis error {axis_err.max():.3e}"
    assert noiseless_suite["dark_runtime"] < 5.0, (
        f"10k generate+decode took {noiseless_suite['dark_runtime']:.2f}s"
    )


@criterion("exact recovery oracle: fine-grid (1e-3 px) template argmax on 100 trials")
def test_exact_recovery_oracle(noiseless_suite):
    spec = noiseless_suite["spec"]
    for i in range(0, N_FULL, N_FULL // 100):
        heatmap, (gu, gv) = generate_trial(spec, i)
        true_center = (gu / LAM, gv / LAM)
        # the trial's sigma is the generator's first draw (mirrors generate_trial)
        sigma = float(_trial_rng(spec.seed, i).uniform(*spec.sigma_range))
        r = dark_decode(heatmap, DARK_CFG)
        coarse = r.m
        ou, ov = grid_search_center(heatmap.values, sigma, coarse, half_window=0.75)
        assert abs(ou - true_center[0]) <= 6e-4
        assert abs(ov - true_center[1]) <= 6e-4
        assert abs(r.p[0] - ou) <= 6e-4 + 1e-5
        assert abs(r.p[1] - ov) <= 6e-4 + 1e-5


@criterion("argmax baseline: mean heatmap-space error 0.3826 +/- 0.01")
def test_argmax_baseline(noiseless_suite):
    closed_form = (math.sqrt(2) + math.log(1 + math.sqrt(2))) / 6
    mc = monte_carlo_mean_offset_norm(500_000, seed=3)
    assert mc == pytest.approx(closed_form, abs=1.5e-3)  # independent confirmation
    mean_hm = noiseless_suite["errors"]["argmax"].mean() / LAM
    assert abs(mean_hm - 0.3826) < 0.01, f"argmax mean {mean_hm:.5f}"


@criterion("method ordering: dark < shift < argmax by >= 5 SEM on noiseless and noisy suites")
def test_method_ordering(noiseless_suite, gaussian_suite):
    for suite in (noiseless_suite, gaussian_suite):
        err = suite["errors"]
        assert err["dark"].mean() < err["shift"].mean() < err["argmax"].mean()
        assert paired_gap_sems(err["shift"], err["dark"]) >= 5.0
        assert paired_gap_sems(err["argmax"], err["shift"]) >= 5.0


@criterion("encoding gap: biased(floor) exceeds unbiased by >= lambda * 0.3 px for dark at sigma 2")
def test_encoding_gap():
    n = 3000
    base = dict(count=n, height=48, width=64, sigma_range=(2.0, 2.0), lam=LAM, seed=SEED + 2)
    biased = TrialSpec(encoding_mode="biased", quantiser="floor", **base)
    unbiased = TrialSpec(encoding_mode="unbiased", **base)
    err_b, _ = run_suite(biased, {"dark": DARK_CFG})
    err_u, _ = run_suite(unbiased, {"dark": DARK_CFG})
    gap = err_b["dark"].mean() - err_u["dark"].mean()
    assert gap >= LAM * 0.3, f"gap {gap:.3f} < {LAM * 0.3}"
    # Monte Carlo oracle: the mean floor displacement is E||(frac u, frac v)||
    expected = LAM * monte_carlo_mean_floor_displacement(500_000, seed=4)
    sem = LAM * err_b["dark"].std(ddof=1) / math.sqrt(n)
    assert abs(err_b["dark"].mean() - expected) < 5 * sem + 0.01


@criterion("modulation gain: dark+modulation beats dark alone by >= 3 SEM on impulse noise")
def test_modulation_gain():
    spec = TrialSpec(
        count=2000,
        height=48,
        width=64,
        sigma_range=(1.0, 3.0),
        lam=LAM,
        noise=NoiseModel(kind="impulse", amplitude=0.5, density=0.02),
        seed=SEED + 3,
    )
    errors, _ = run_suite(spec, {"plain": DARK_CFG, "modulated": DARK_MOD_CFG})
    assert errors["modulated"].mean() <= errors["plain"].mean()
    assert paired_gap_sems(errors["plain"], errors["modulated"]) >= 3.0


@criterion("scale invariance: p within 1e-9 px and identical flags for c in {1e-3, 1, 1e3}")
def test_scale_invariance():
    specs = [
        TrialSpec(count=500, height=48, width=64, sigma_range=(1.0, 3.0), lam=LAM, seed=SEED + 4),
        TrialSpec(
            count=500,
            height=48,
            width=64,
            sigma_range=(1.0, 3.0),
            lam=LAM,
            noise=NoiseModel(kind="gaussian_additive", amplitude=0.02),
            seed=SEED + 5,
        ),
    ]
    checked = 0
    for spec in specs:
        for i in range(spec.count):
            heatmap, _ = generate_trial(spec, i)
            ref = dark_decode(heatmap, DARK_MOD_CFG)
            for c in (1e-3, 1e3):
                scaled = dark_decode(Heatmap(heatmap.values * c), DARK_MOD_CFG)
                assert scaled.m == ref.m
                assert scaled.fallback == ref.fallback
                assert abs(scaled.p[0] - ref.p[0]) < 1e-9
                assert abs(scaled.p[1] - ref.p[1]) < 1e-9
            checked += 1
    assert checked == 1000


@criterion("standard shift contract: ||p - m|| = 0.25 exactly on all non-degenerate heatmaps")
def test_shift_contract(noiseless_suite, gaussian_suite):
    assert noiseless_suite["shift_norm_dev"] <= SHIFT_NORM_TOL
    assert gaussian_suite["shift_norm_dev"] <= SHIFT_NORM_TOL
    impulse = TrialSpec(
        count=1000,
        height=48,
        width=64,
        sigma_range=(1.0, 3.0),
        lam=LAM,
        noise=NoiseModel(kind="impulse", amplitude=0.5, density=0.02),
        seed=SEED + 6,
    )
    _, dev = run_suite(impulse, {"shift": SHIFT_CFG})
    assert dev <= SHIFT_NORM_TOL


@criterion("format round-trips: binary bitwise, JSON value-exact, named corruption errors")
def test_format_round_trips(tmp_path):
    spec = TrialSpec(count=6, height=12, width=16, sigma_range=(1.0, 3.0), lam=2.0, seed=1)
    heatmaps = [generate_trial(spec, i)[0] for i in range(6)]

    a = tmp_path / "a.hmap"
    b = tmp_path / "b.hmap"
    write_heatmaps(a, heatmaps)
    write_heatmaps(b, read_heatmaps(a))
    assert a.read_bytes() == b.read_bytes()

    doc = KeypointDocument(
        lam=4.0,
        keypoints=((12.7, 8.3, 0.9777512371933362), (1 / 3, 63.0, 1.0)),
        fallbacks=("none", "step_capped"),
    )
    p1 = tmp_path / "kp1.json"
    p2 = tmp_path / "kp2.json"
    write_keypoints(p1, doc)
    back = read_keypoints(p1)
    assert back == doc
    write_keypoints(p2, back)
    assert read_keypoints(p2) == doc

    raw = bytearray(a.read_bytes())
    bad_magic = tmp_path / "magic.hmap"
    bad_magic.write_bytes(b"HMAQ" + bytes(raw[4:]))
    with pytest.raises(FormatError, match="magic"):
        read_heatmaps(bad_magic)

    short = tmp_path / "short.hmap"
    short.write_bytes(bytes(raw[:-4]))
    with pytest.raises(FormatError, match="length"):
        read_heatmaps(short)

    nan_file = tmp_path / "nan.hmap"
    nan_raw = bytearray(raw)
    nan_raw[20:24] = struct.pack("<f", float("nan"))
    nan_file.write_bytes(bytes(nan_raw))
    with pytest.raises(FormatError, match="nan"):
        read_heatmaps(nan_file)


@criterion("overhead sanity: dark+modulation <= 25x argmax and >= 10,000 heatmaps/s")
def test_overhead_sanity(capsys):
    spec = TrialSpec(
        count=400, height=48, width=64, sigma_range=(2.0, 2.0), lam=LAM, seed=SEED + 7
    )
    heatmaps = [generate_trial(spec, i)[0] for i in range(spec.count)]

    def best_time(cfg):
        best = math.inf
        for _ in range(3):
            t0 = time.perf_counter()
            for h in heatmaps:
                decode(h, cfg)
            best = min(best, time.perf_counter() - t0)
        return best / len(heatmaps)

    t_argmax = best_time(ARGMAX_CFG)
    t_dark = best_time(DARK_MOD_CFG)
    ratio = t_dark / t_argmax
    throughput = 1.0 / t_dark
    assert ratio <= 25.0, f"dark+mod costs {ratio:.1f}x argmax"
    assert throughput >= 10_000.0, f"dark+mod throughput {throughput:.0f}/s"

    # both figures appear in the bench report
    code = cli_main([
        "bench", "--trials", "200", "--sigma-lo", "2", "--sigma-hi", "2",
        "--noise", "impulse", "--amplitude", "0.5", "--density", "0.02", "--seed", "5",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "cost ratio dark_modulated/argmax:" in out
    assert "dark_modulated throughput:" in out and "heatmaps/s" in out


@criterion("determinism: cmd_bench emits byte-identical JSON across runs and worker counts")
def test_bench_determinism():
    base = [
        sys.executable, "-m", "hmcodec.cli", "bench",
        "--trials", "200", "--noise", "gaussian", "--amplitude", "0.02",
        "--seed", "7", "--json",
    ]
    import os

    env = dict(os.environ, OPENBLAS_NUM_THREADS="1", OMP_NUM_THREADS="1", MKL_NUM_THREADS="1")
    outputs = []
    for extra in ([], [], ["--workers", "4"]):
        proc = subprocess.run(base + extra, capture_output=True, env=env, timeout=300)
        assert proc.returncode == 0, proc.stderr.decode()
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1] == outputs[2]
    json.loads(outputs[0].decode())  # well-formed
