"""Command-line surface: analyze / infer / bench / make-model / frontend.

Exit codes are fixed for scriptability: 0 ok, 2 usage, 3 bad input,
4 model-integrity failure, 5 I/O failure. Defaults reproduce the reference
operating point (4 s windows, 430 MMAC/s budget); AEDET_BUDGET_MMACS and
AEDET_SAMPLE_RATE override the respective defaults.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import analyzer, audio, modelio
from .errors import AedetError, FileFormatError, ModelFormatError
from .frontend import FrontendConfig, build_mel_filterbank, log_mel_spectrogram
from .graph import PRESET_NAMES, build_preset, classify, forward, init_weights
from .kernels import Tensor

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INTEGRITY = 4
EXIT_IO = 5

DEFAULT_BUDGET_MMACS = 430.0
DEFAULT_WINDOW_S = 4.0
DEFAULT_HOP_S = 1.0


def _env_float(name: str, fallback: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError:
        return fallback


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        return fallback


def _fail(code: int, message: str) -> int:
    print(f"aedet: {message}", file=sys.stderr)
    return code


def cmd_analyze(args) -> int:
    spec = build_preset(args.arch)
    report = analyzer.analyze(spec, frontend_mode=args.frontend_mode)
    if args.format == "json":
        print(analyzer.to_json(report, arch=args.arch))
    elif args.format == "csv":
        print(analyzer.to_csv(report), end="")
    else:
        title = f"{args.arch.upper()} over {spec.input_shape[0]}x{spec.input_shape[1]}x{spec.input_shape[2]}"
        print(analyzer.format_table(report, title=title))
    return EXIT_OK


def _load_window_audio(args, cfg: FrontendConfig):
    """Shared wav -> samples plumbing for infer/frontend; raises AedetError."""
    samples, rate = audio.read_wav(args.wav)
    if rate != cfg.sample_rate:
        raise FileFormatError(
            f"{args.wav}: sample rate {rate} Hz does not match the expected "
            f"{cfg.sample_rate} Hz (no resampling is performed)"
        )
    return samples


def _window_starts(n_samples: int, window: int, hop: int) -> range:
    return range(0, n_samples - window + 1, hop)


def cmd_infer(args) -> int:
    if args.hop_s <= 0:
        return _fail(EXIT_USAGE, f"hop must be positive, got {args.hop_s}")
    try:
        spec, weights, cfg, labels = modelio.load_model(args.model)
    except ModelFormatError as e:
        return _fail(EXIT_INTEGRITY, str(e))
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    try:
        samples = _load_window_audio(args, cfg)
    except (FileFormatError, OSError) as e:
        return _fail(EXIT_INPUT, str(e))

    window = round(cfg.span_seconds * cfg.sample_rate)
    hop = max(1, round(args.hop_s * cfg.sample_rate))
    if len(samples) < window:
        return _fail(
            EXIT_INPUT,
            f"{args.wav}: audio is {len(samples) / cfg.sample_rate:.2f} s, "
            f"needs at least {cfg.span_seconds:.2f} s ({window} samples at {cfg.sample_rate} Hz)",
        )
    fb = build_mel_filterbank(cfg)
    tail = max(0, cfg.min_samples - window)  # frontend needs window+hop overlap coverage
    records = []
    for start in _window_starts(len(samples), window, hop):
        seg = samples[start : start + window]
        if tail:
            seg = np.pad(seg, (0, tail))
        mel = log_mel_spectrogram(seg, cfg, fb)
        probs = forward(spec, weights, mel)
        label, conf = classify(probs, labels)
        records.append(
            {
                "start_s": start / cfg.sample_rate,
                "label": label,
                "confidence": conf,
                "probabilities": [float(p) for p in probs],
            }
        )
    if args.format == "json":
        print(json.dumps({"model": str(args.model), "wav": str(args.wav), "records": records}, indent=2))
    else:
        for rec in records:
            print(f"{rec['start_s']:8.2f}s  {rec['label']}  {rec['confidence']:.4f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.budget_mmacs <= 0:
        return _fail(EXIT_USAGE, f"budget must be positive, got {args.budget_mmacs}")
    if args.window_s <= 0:
        return _fail(EXIT_USAGE, f"window must be positive, got {args.window_s}")
    spec = build_preset(args.arch)
    report = analyzer.analyze(spec)
    verdict = analyzer.realtime_check(report, args.budget_mmacs, args.window_s)
    print(f"arch:                {args.arch}")
    print(f"total MACs:          {report.total_macs} ({analyzer.format_count(report.total_macs, totals_row=True)})")
    print(f"budget:              {args.budget_mmacs:g} MMAC/s, window {args.window_s:g} s")
    print(f"modeled compute:     {verdict.compute_time_s:.2f} s")
    print(f"feasible:            {'yes' if verdict.feasible else 'no'} "
          f"(realtime factor {verdict.realtime_factor:.2f})")

    weights = init_weights(spec, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    x = Tensor(rng.standard_normal(spec.input_shape, dtype=np.float32))
    forward(spec, weights, x)  # warm-up, excluded from timing
    t0 = time.perf_counter()
    forward(spec, weights, x)
    elapsed = time.perf_counter() - t0
    net_macs = report.total_macs - sum(r.macs for r in report.rows if r.layer in ("input", "frontend"))
    print(f"measured (this host): {elapsed:.3f} s for one forward pass "
          f"= {net_macs / elapsed / 1e6:.0f} MMAC/s effective (network layers only; "
          f"wall-clock, not the embedded budget)")
    return EXIT_OK


def cmd_make_model(args) -> int:
    if args.num_classes < 2:
        return _fail(EXIT_USAGE, f"need at least 2 classes, got {args.num_classes}")
    spec = build_preset(args.arch, num_classes=args.num_classes)
    weights = init_weights(spec, seed=args.seed)
    if args.labels:
        labels = [s.strip() for s in args.labels.split(",")]
        if len(labels) != args.num_classes:
            return _fail(EXIT_USAGE, f"{len(labels)} labels given for {args.num_classes} classes")
    else:
        labels = [f"class_{i:02d}" for i in range(args.num_classes)]
    sample_rate = _env_int("AEDET_SAMPLE_RATE", 16000)
    cfg = FrontendConfig(sample_rate=sample_rate)
    try:
        modelio.save_model(spec, weights, cfg, labels, args.out)
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    print(f"wrote {args.out} ({os.path.getsize(args.out)} bytes, seed {args.seed})")
    return EXIT_OK


def cmd_frontend(args) -> int:
    sample_rate = args.sample_rate or _env_int("AEDET_SAMPLE_RATE", 0)
    try:
        samples, rate = audio.read_wav(args.wav)
    except (FileFormatError, OSError) as e:
        return _fail(EXIT_INPUT, str(e))
    cfg = FrontendConfig(sample_rate=sample_rate or rate)
    window = round(cfg.span_seconds * cfg.sample_rate)
    if len(samples) < window:
        return _fail(
            EXIT_INPUT,
            f"{args.wav}: audio is {len(samples) / cfg.sample_rate:.2f} s, "
            f"needs at least {cfg.span_seconds:.2f} s ({window} samples at {cfg.sample_rate} Hz)",
        )
    if len(samples) < cfg.min_samples:
        samples = np.pad(samples, (0, cfg.min_samples - len(samples)))
    mel = log_mel_spectrogram(samples, cfg)
    grid = mel.data[:, :, 0]
    try:
        if args.format == "csv":
            audio.write_mels_csv(args.out, grid)
        else:
            audio.write_mels(args.out, grid)
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    print(f"wrote {args.out} ({grid.shape[0]} frames x {grid.shape[1]} mels)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aedet",
        description="Inference runtime and resource analyzer for small acoustic-event CNNs.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="per-layer parameter/MAC table for a preset")
    pa.add_argument("--arch", required=True, choices=PRESET_NAMES)
    pa.add_argument("--format", default="table", choices=("table", "json", "csv"))
    pa.add_argument(
        "--frontend-mode",
        default=analyzer.FRONTEND_MODE_PAPER,
        choices=(analyzer.FRONTEND_MODE_PAPER, analyzer.FRONTEND_MODE_COMPUTED),
    )
    pa.set_defaults(fn=cmd_analyze)

    pi = sub.add_parser("infer", help="classify sliding windows of a WAV file")
    pi.add_argument("--model", required=True)
    pi.add_argument("--wav", required=True)
    pi.add_argument("--hop-s", type=float, default=DEFAULT_HOP_S)
    pi.add_argument("--format", default="text", choices=("text", "json"))
    pi.set_defaults(fn=cmd_infer)

    pb = sub.add_parser("bench", help="modeled real-time check plus local throughput")
    pb.add_argument("--arch", required=True, choices=PRESET_NAMES)
    pb.add_argument(
        "--budget-mmacs", type=float, default=_env_float("AEDET_BUDGET_MMACS", DEFAULT_BUDGET_MMACS)
    )
    pb.add_argument("--window-s", type=float, default=DEFAULT_WINDOW_S)
    pb.add_argument("--seed", type=int, default=0)
    pb.set_defaults(fn=cmd_bench)

    pm = sub.add_parser("make-model", help="write an AEDM file with seeded random weights")
    pm.add_argument("--arch", required=True, choices=PRESET_NAMES)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--out", required=True)
    pm.add_argument("--num-classes", type=int, default=28)
    pm.add_argument("--labels", default="", help="comma-separated label names")
    pm.set_defaults(fn=cmd_make_model)

    pf = sub.add_parser("frontend", help="dump the log-mel grid of a WAV file")
    pf.add_argument("--wav", required=True)
    pf.add_argument("--out", required=True)
    pf.add_argument("--format", default="mels", choices=("mels", "csv"))
    pf.add_argument("--sample-rate", type=int, default=0, help="override the WAV header rate")
    pf.set_defaults(fn=cmd_frontend)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except AedetError as e:
        return _fail(EXIT_INPUT, str(e))


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
