"""Command-line front end: analyze, synth, train, eval, convert-fb."""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import evaluate, mlp, pipeline, synth
from .audio_io import WavFormatError, read_wav, write_wav
from .dsp import frame_length, frame_signal
from .features import load_features, rasta_plp, save_features, stack_context
from .allpole import SingularSystemError
from .evaluate import (
    EvalConfig,
    GroundTruthFormatError,
    aggregate_report,
    evaluate_utterance,
    load_ground_truth,
    load_mask,
    mix_noise,
    white_noise,
)
from .synth import SynthSpecError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


def _load_config(args) -> pipeline.PipelineConfig:
    cfg = pipeline.PipelineConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        try:
            cfg = pipeline.config_from_dict(data, cfg)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    overrides = {
        "estimator": "estimator",
        "frame_ms": "frame_ms",
        "hop_ms": "hop_ms",
        "order": "order",
        "preemphasis": "preemphasis",
        "nfft": "nfft",
        "gauss_width": "gauss_width_hz",
        "candidates": "n_candidates",
        "model": "model_path",
        "tau_r": "tau_r",
        "tau_a": "tau_a",
        "seed": "seed",
    }
    for arg_name, attr in overrides.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            setattr(cfg, attr, value)
    for arg_name, attr in (
        ("qcp_dq", "dq"), ("qcp_pq", "pq"),
        ("qcp_ramp", "ramp_samples"), ("qcp_dfloor", "d_floor"),
    ):
        value = getattr(args, arg_name, None)
        if value is not None:
            setattr(cfg.qcp, attr, value)
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return cfg


def _load_signal(path, args, cfg) -> "pipeline.Signal":
    try:
        sig = read_wav(path)
    except (WavFormatError, OSError) as exc:
        raise UsageError(str(exc)) from exc
    noise_arg = getattr(args, "noise", None)
    snr_arg = getattr(args, "snr", None)
    if (noise_arg is None) != (snr_arg is None):
        raise UsageError("--noise and --snr must be given together")
    if noise_arg and snr_arg is not None:
        if noise_arg == "white":
            noise = white_noise(len(sig.samples), cfg.seed + 1)
        elif noise_arg.startswith("babble:"):
            noise = read_wav(noise_arg.split(":", 1)[1])
        else:
            raise UsageError(
                f"--noise must be 'white' or 'babble:<path>', got {noise_arg!r}"
            )
        sig = mix_noise(sig, noise, args.snr, cfg.seed)
    return sig


def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    sig = _load_signal(args.wav, args, cfg)
    flen = frame_length(sig.sample_rate, cfg.frame_ms)
    if len(sig.samples) < flen:
        raise UsageError("signal shorter than one frame")
    model = None
    if cfg.estimator in pipeline.DNN_ESTIMATORS:
        if not cfg.model_path:
            raise UsageError(f"estimator {cfg.estimator!r} requires --model")
        try:
            model = mlp.load_model(cfg.model_path)
        except (OSError, mlp.ModelFormatError) as exc:
            raise UsageError(f"cannot load model: {exc}") from exc
    result = pipeline.analyze(sig, cfg, model)
    pipeline.write_track_csv(args.output, result.track)
    if args.candidates_csv:
        if result.lattice is None:
            raise UsageError(
                f"estimator {cfg.estimator!r} produces no candidate lattice"
            )
        pipeline.write_candidates_csv(args.candidates_csv, result.lattice, cfg.n_candidates)
    if args.spectrogram:
        pipeline.write_spectrogram_pgm(args.spectrogram, sig, cfg)
    print(f"wrote {result.n_frames} frames to {args.output}")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        segments = synth.load_synth_spec(args.spec)
        for seg in segments:
            seg.validate(synth.SYNTH_RATE)
            if len(seg.formants) < 3:
                raise SynthSpecError(
                    "segments need at least 3 formants for ground truth output"
                )
        sig, owner = synth.synthesize(segments, seed=args.seed or 0)
    except SynthSpecError as exc:
        raise UsageError(str(exc)) from exc
    write_wav(args.output, sig)
    rows = synth.ground_truth_rows(segments, owner, sig.sample_rate)
    gt_path = args.truth or str(Path(args.output).with_suffix(".csv"))
    evaluate.save_ground_truth(gt_path, rows)
    print(f"wrote {sig.duration_s():.2f}s to {args.output}, truth to {gt_path}")
    return EXIT_OK


def _read_manifest(path) -> list[tuple[str, str]]:
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read manifest {path}: {exc}") from exc
    pairs = []
    for i, line in enumerate(lines):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise UsageError(f"manifest row {i + 1} must be 'wav,truth': {line!r}")
        for part in parts:
            if not Path(part).exists():
                raise UsageError(f"manifest row {i + 1}: missing file {part}")
        pairs.append((parts[0], parts[1]))
    if not pairs:
        raise UsageError(f"manifest {path} is empty")
    return pairs


def _utterance_features(wav_path, truth_path, cache_dir=None):
    sig = read_wav(wav_path)
    cache_path = None
    if cache_dir:
        cache_path = Path(cache_dir) / (Path(wav_path).stem + ".fplp")
        if cache_path.exists():
            context = load_features(cache_path)
            truth = load_ground_truth(truth_path)
            n = min(len(context), len(truth))
            return context[:n], truth.formants_hz[:n]
    frames = frame_signal(sig)
    context = stack_context(rasta_plp(frames, sig.sample_rate))
    if cache_path is not None:
        save_features(cache_path, context)
    truth = load_ground_truth(truth_path)
    n = min(len(context), len(truth))
    return context[:n], truth.formants_hz[:n]


def cmd_train(args) -> int:
    pairs = _read_manifest(args.manifest)
    if args.cache_features:
        Path(args.cache_features).mkdir(parents=True, exist_ok=True)
    jobs = max(args.jobs or 1, 1)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            extracted = list(pool.map(
                _utterance_features,
                [p[0] for p in pairs], [p[1] for p in pairs],
                [args.cache_features] * len(pairs),
            ))
    else:
        extracted = [
            _utterance_features(w, t, args.cache_features) for w, t in pairs
        ]
    x = np.concatenate([e[0] for e in extracted])
    y = np.concatenate([e[1] for e in extracted])
    cfg = mlp.TrainConfig(
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        dropout_prob=args.dropout,
        seed=args.seed or 0,
    )
    try:
        model, history = mlp.train(x, y, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    mlp.save_model(args.output, model)
    fee = history["val_fee_hz"]
    print(
        f"trained on {len(x)} frames from {len(pairs)} utterances; "
        f"final train loss {history['train_loss'][-1]:.6f}, "
        f"val loss {history['val_loss'][-1]:.6f}, "
        f"val FEE Hz {fee[0]:.1f}/{fee[1]:.1f}/{fee[2]:.1f}"
    )
    return EXIT_OK


def _eval_one(wav_path, truth_path, args, cfg, model):
    sig = _load_signal(wav_path, args, cfg)
    result = pipeline.analyze(sig, cfg, model)
    truth = load_ground_truth(truth_path)
    mask = load_mask(args.mask) if args.mask else None
    return evaluate_utterance(
        result.track.frequencies, truth, EvalConfig(cfg.tau_r, cfg.tau_a), mask,
        gated=bool(getattr(args, "gated_fee", False)),
    )


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    eval_cfg = EvalConfig(cfg.tau_r, cfg.tau_a)
    mask = load_mask(args.mask) if args.mask else None

    if args.track:
        if not args.truth:
            raise UsageError("--truth is required")
        track = pipeline.read_track_csv(args.track)
        truth = load_ground_truth(args.truth)
        scores = [evaluate_utterance(track.frequencies, truth, eval_cfg, mask,
                                     gated=bool(args.gated_fee))]
        method = "track-csv"
    elif args.wav:
        if not args.truth:
            raise UsageError("--truth is required")
        model = _maybe_model(cfg)
        scores = [_eval_one(args.wav, args.truth, args, cfg, model)]
        method = cfg.estimator
    elif args.manifest:
        pairs = _read_manifest(args.manifest)
        model = _maybe_model(cfg)
        jobs = max(args.jobs or 1, 1)
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                scores = list(pool.map(
                    _eval_worker,
                    [(w, t, args, cfg) for w, t in pairs],
                ))
        else:
            scores = [_eval_one(w, t, args, cfg, model) for w, t in pairs]
        method = cfg.estimator
    else:
        raise UsageError("provide --track, --wav, or --manifest")

    report = aggregate_report(method, scores)
    _print_report(report)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def _eval_worker(bundle):
    wav, truth, args, cfg = bundle
    model = _maybe_model(cfg)
    return _eval_one(wav, truth, args, cfg, model)


def _maybe_model(cfg):
    if cfg.estimator not in pipeline.DNN_ESTIMATORS:
        return None
    if not cfg.model_path:
        raise UsageError(f"estimator {cfg.estimator!r} requires --model")
    try:
        return mlp.load_model(cfg.model_path)
    except (OSError, mlp.ModelFormatError) as exc:
        raise UsageError(f"cannot load model: {exc}") from exc


def _print_report(report):
    print(f"method: {report.method}")
    print(f"{'':10s} {'F1':>10s} {'F2':>10s} {'F3':>10s}")
    print("FDR (%)   " + "".join(f"{v:>10.2f} " for v in report.fdr))
    print("FEE (Hz)  " + "".join(f"{v:>10.2f} " for v in report.fee))
    gated = [s.gated_fee for s in report.per_utterance]
    if all(g is not None for g in gated):
        means = np.nanmean(np.stack(gated), axis=0)
        print("FEEd (Hz) " + "".join(f"{v:>10.2f} " for v in means))
    print(f"frames: {report.frames}, utterances: {len(report.per_utterance)}")


def cmd_convert_fb(args) -> int:
    try:
        n = evaluate.convert_vtr_fb(args.fb, args.output)
    except (OSError, GroundTruthFormatError) as exc:
        raise UsageError(str(exc)) from exc
    print(f"converted {n} frames to {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formantkit",
        description="Formant estimation and tracking toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file with flat dotted keys")
        p.add_argument("--estimator", choices=pipeline.ESTIMATORS)
        p.add_argument("--frame-ms", dest="frame_ms", type=float)
        p.add_argument("--hop-ms", dest="hop_ms", type=float)
        p.add_argument("--order", type=int)
        p.add_argument("--preemphasis", type=float)
        p.add_argument("--nfft", type=int)
        p.add_argument("--gauss-width", dest="gauss_width", type=float)
        p.add_argument("--candidates", type=int)
        p.add_argument("--model", help="MLP model file for dnn estimators")
        p.add_argument("--qcp-dq", dest="qcp_dq", type=float)
        p.add_argument("--qcp-pq", dest="qcp_pq", type=float)
        p.add_argument("--qcp-ramp", dest="qcp_ramp", type=int)
        p.add_argument("--qcp-dfloor", dest="qcp_dfloor", type=float)
        p.add_argument("--tau-r", dest="tau_r", type=float)
        p.add_argument("--tau-a", dest="tau_a", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--noise", help="'white' or 'babble:<wav path>'")
        p.add_argument("--snr", type=float, help="SNR in dB for --noise")

    p = sub.add_parser("analyze", help="track formants in a WAV file")
    add_common(p)
    p.add_argument("wav")
    p.add_argument("-o", "--output", required=True, help="track CSV path")
    p.add_argument("--candidates-csv", help="also dump the candidate lattice")
    p.add_argument("--spectrogram", help="also dump a PGM spectrogram")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="synthesize a test signal from a JSON spec")
    p.add_argument("spec")
    p.add_argument("-o", "--output", required=True, help="WAV path")
    p.add_argument("--truth", help="ground-truth CSV path (default: next to WAV)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the MLP tracker from a manifest")
    p.add_argument("manifest", help="CSV rows of wav_path,ground_truth_path")
    p.add_argument("-o", "--output", required=True, help="model file path")
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=64)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--cache-features", dest="cache_features",
                   help="directory for FPLP feature caches")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a tracker against ground truth")
    add_common(p)
    p.add_argument("--track", help="existing track CSV to score")
    p.add_argument("--wav", help="WAV to analyze and score")
    p.add_argument("--manifest", help="CSV rows of wav_path,ground_truth_path")
    p.add_argument("--truth", help="ground-truth CSV (for --track/--wav)")
    p.add_argument("--mask", help="frame inclusion mask file (one 0/1 per line)")
    p.add_argument("--gated-fee", dest="gated_fee", action="store_true",
                   help="also report FEE averaged over detected frames only")
    p.add_argument("--json", help="write the report as JSON here")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("convert-fb", help="convert a VTR .fb file to canonical CSV")
    p.add_argument("fb")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_convert_fb)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WavFormatError, GroundTruthFormatError, SynthSpecError,
            mlp.ModelFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularSystemError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
