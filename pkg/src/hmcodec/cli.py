"""Command-line surface: encode, decode, bench, eval, and inspect.

Data goes to stdout or --out; diagnostics go to stderr. Exit codes:
0 success, 1 operational error (bad file, bad config), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import NoiseModel, TrialSpec, compare_report, evaluate, pck, stats_to_json
from .core import EncodingConfig, GaussianParams, MODES, NORMALIZATIONS, QUANTISERS, encode
from .decode import DecodeConfig, argmax_decode, decode
from .errors import FormatError, InvalidConfig, InvalidInput
from .io import KeypointDocument, read_heatmaps, read_keypoints, write_heatmaps, write_keypoints

_METHOD_FLAGS = {"argmax": "argmax", "shift": "standard_shift", "dark": "dark"}
_NOISE_FLAGS = {"none": "none", "gaussian": "gaussian_additive", "impulse": "impulse"}


class _UsageError(Exception):
    """Raised by handlers for post-parse flag validation failures (exit 2)."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmcodec",
        description="Keypoint heatmap coordinate codec: encode targets, decode "
        "predictions, and benchmark decoders on synthetic trials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode a keypoint document into a heatmap file")
    enc.add_argument("--keypoints", required=True, help="input keypoint JSON document")
    enc.add_argument("--out", required=True, help="output heatmap file")
    enc.add_argument("--height", type=int, required=True)
    enc.add_argument("--width", type=int, required=True)
    enc.add_argument("--sigma", type=float, required=True, help="Gaussian spread in heatmap px")
    enc.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="resolution reduction ratio (defaults to the document's lambda)")
    enc.add_argument("--mode", choices=MODES, default="unbiased")
    enc.add_argument("--quantise", choices=QUANTISERS, default=None,
                     help="quantiser for biased mode (default floor)")
    enc.add_argument("--normalization", choices=NORMALIZATIONS, default="peak_one")
    enc.set_defaults(func=_cmd_encode)

    dec = sub.add_parser("decode", help="decode a heatmap file into a keypoint document")
    dec.add_argument("--heatmaps", required=True, help="input heatmap file")
    dec.add_argument("--out", required=True, help="output keypoint JSON document")
    dec.add_argument("--method", choices=sorted(_METHOD_FLAGS), default="dark")
    dec.add_argument("--modulate", action=argparse.BooleanOptionalAction, default=None,
                     help="smooth the heatmap before decoding (default: on for dark)")
    dec.add_argument("--sigma", type=float, default=None,
                     help="kernel spread; required for dark or --modulate")
    dec.add_argument("--lambda", dest="lam", type=float, required=True,
                     help="resolution reduction ratio")
    dec.add_argument("--step-cap", type=float, default=1.0)
    dec.set_defaults(func=_cmd_decode)

    ben = sub.add_parser("bench", help="run seeded synthetic decoding trials")
    ben.add_argument("--trials", type=int, default=1000)
    ben.add_argument("--height", type=int, default=48)
    ben.add_argument("--width", type=int, default=64)
    ben.add_argument("--sigma-lo", type=float, default=1.0)
    ben.add_argument("--sigma-hi", type=float, default=3.0)
    ben.add_argument("--lambda", dest="lam", type=float, default=4.0)
    ben.add_argument("--encoding", choices=MODES, default="unbiased")
    ben.add_argument("--quantise", choices=QUANTISERS, default="floor")
    ben.add_argument("--noise", choices=sorted(_NOISE_FLAGS), default="none")
    ben.add_argument("--amplitude", type=float, default=0.02,
                     help="noise amplitude as a fraction of the peak")
    ben.add_argument("--density", type=float, default=0.02,
                     help="impulse probability per pixel (impulse noise only)")
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--workers", type=int, default=1)
    ben.add_argument("--json", action="store_true", help="machine-readable output")
    ben.set_defaults(func=_cmd_bench)

    ev = sub.add_parser("eval", help="score predictions against ground truth (PCK)")
    ev.add_argument("--pred", required=True, help="predicted keypoint document")
    ev.add_argument("--gt", required=True, help="ground-truth keypoint document")
    ev.add_argument("--pck-threshold", type=float, default=0.5)
    ev.add_argument("--norm", type=float, required=True,
                    help="normalization distance in the documents' coordinate space")
    ev.set_defaults(func=_cmd_eval)

    ins = sub.add_parser("inspect", help="print a heatmap file's header and per-map maxima")
    ins.add_argument("--heatmaps", required=True)
    ins.set_defaults(func=_cmd_inspect)

    return parser


def _cmd_encode(args) -> int:
    doc = read_keypoints(args.keypoints)
    lam = args.lam if args.lam is not None else doc.lam
    quantiser = args.quantise if args.quantise is not None else "floor"
    if args.quantise is not None and args.mode == "unbiased":
        print("hmcodec: warning: --quantise is ignored with --mode unbiased", file=sys.stderr)
    config = EncodingConfig(
        lam=lam,
        sigma=GaussianParams(args.sigma),
        mode=args.mode,
        quantiser=quantiser,
        normalization=args.normalization,
    )
    heatmaps = [
        encode((x, y), config, args.height, args.width)[0] for x, y, _score in doc.keypoints
    ]
    write_heatmaps(args.out, heatmaps)
    print(f"wrote {len(heatmaps)} heatmap(s) ({args.height}x{args.width}) to {args.out}",
          file=sys.stderr)
    return 0


def _cmd_decode(args) -> int:
    method = _METHOD_FLAGS[args.method]
    modulate = args.modulate if args.modulate is not None else method == "dark"
    if (modulate or method == "dark") and args.sigma is None:
        raise _UsageError(f"--sigma is required with --method {args.method}"
                          + (" and --modulate" if modulate and method != "dark" else ""))
    config = DecodeConfig(
        method=method,
        modulate=modulate,
        sigma=GaussianParams(args.sigma) if args.sigma is not None else None,
        lam=args.lam,
        step_cap=args.step_cap,
    )
    heatmaps = read_heatmaps(args.heatmaps)
    results = [decode(h, config) for h in heatmaps]
    doc = KeypointDocument(
        lam=args.lam,
        keypoints=tuple((r.p_hat[0], r.p_hat[1], r.confidence) for r in results),
        fallbacks=tuple(r.fallback for r in results),
    )
    write_keypoints(args.out, doc)
    print(f"decoded {len(results)} heatmap(s) to {args.out}", file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    if args.trials < 1:
        raise _UsageError("--trials must be >= 1")
    if not (0 < args.sigma_lo <= args.sigma_hi):
        raise _UsageError("--sigma-lo/--sigma-hi must satisfy 0 < lo <= hi")
    if args.lam <= 0:
        raise _UsageError("--lambda must be positive")
    if args.amplitude < 0:
        raise _UsageError("--amplitude must be >= 0")
    if not (0.0 <= args.density <= 1.0):
        raise _UsageError("--density must be in [0, 1]")
    if args.workers < 1:
        raise _UsageError("--workers must be >= 1")
    if args.height < 5 or args.width < 5:
        raise _UsageError("--height/--width must be at least 5 for interior trial centers")

    noise_kind = _NOISE_FLAGS[args.noise]
    noise = NoiseModel(
        kind=noise_kind,
        amplitude=args.amplitude if noise_kind != "none" else 0.0,
        density=args.density if noise_kind == "impulse" else 0.0,
    )
    spec = TrialSpec(
        count=args.trials,
        height=args.height,
        width=args.width,
        sigma_range=(args.sigma_lo, args.sigma_hi),
        lam=args.lam,
        encoding_mode=args.encoding,
        quantiser=args.quantise,
        noise=noise,
        seed=args.seed,
    )
    sigma_mid = GaussianParams(0.5 * (args.sigma_lo + args.sigma_hi))
    labels = ["argmax", "shift", "dark"]
    methods = [
        DecodeConfig(method="argmax", lam=args.lam),
        DecodeConfig(method="standard_shift", lam=args.lam),
        DecodeConfig(method="dark", modulate=False, sigma=sigma_mid, lam=args.lam),
    ]
    if noise_kind != "none":
        labels.append("dark_modulated")
        methods.append(DecodeConfig(method="dark", modulate=True, sigma=sigma_mid, lam=args.lam))

    stats = evaluate(spec, methods, workers=args.workers)
    if args.json:
        print(stats_to_json(spec, stats, labels))
    else:
        print(compare_report(stats, labels))
        dark_label = labels[-1] if noise_kind != "none" else "dark"
        dark_stat = stats[labels.index(dark_label)]
        ratio = stats[0].throughput / dark_stat.throughput
        print(f"cost ratio {dark_label}/argmax: {ratio:.2f}x per heatmap")
        print(f"{dark_label} throughput: {dark_stat.throughput:.0f} heatmaps/s")
    return 0


def _cmd_eval(args) -> int:
    if args.pck_threshold <= 0:
        raise _UsageError("--pck-threshold must be positive")
    if args.norm <= 0:
        raise _UsageError("--norm must be positive")
    pred = read_keypoints(args.pred)
    gt = read_keypoints(args.gt)
    if len(pred.keypoints) != len(gt.keypoints):
        raise InvalidInput(
            f"--pred has {len(pred.keypoints)} keypoints but --gt has {len(gt.keypoints)}"
        )
    pred_xy = [(x, y) for x, y, _ in pred.keypoints]
    gt_xy = [(x, y) for x, y, _ in gt.keypoints]
    result = pck(pred_xy, gt_xy, args.pck_threshold, args.norm)
    dists = np.hypot(
        np.array([p[0] for p in pred_xy]) - np.array([g[0] for g in gt_xy]),
        np.array([p[1] for p in pred_xy]) - np.array([g[1] for g in gt_xy]),
    )
    print(f"pck@{result.threshold:g} (norm {result.norm:g} px): {result.fraction:.4f}")
    print(f"mean error: {float(np.mean(dists)):.4f} px")
    return 0


def _cmd_inspect(args) -> int:
    heatmaps = read_heatmaps(args.heatmaps)
    first = heatmaps[0]
    print(f"HMAP v1 f32le count={len(heatmaps)} height={first.height} width={first.width}")
    for k, h in enumerate(heatmaps):
        (mx, my), value = argmax_decode(h)
        print(f"[{k}] max={value:.6g} argmax=({mx}, {my})")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"hmcodec: usage error: {exc}", file=sys.stderr)
        return 2
    except (InvalidConfig, InvalidInput, FormatError, OSError) as exc:
        print(f"hmcodec: error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
