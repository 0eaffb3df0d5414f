#!/usr/bin/env python3
"""Sweep noise conditions over one estimator on the synthetic benchmark corpus.

Runs clean plus white noise at the requested SNRs (babble optional via a WAV),
mirroring the degraded-speech comparison conditions.

    python scripts/noise_sweep.py --estimator qcp-fbcov --snrs 10 5
"""

import argparse
from pathlib import Path

import numpy as np

from formantkit.audio_io import read_wav
from formantkit.evaluate import (
    aggregate_report,
    evaluate_utterance,
    load_ground_truth,
    mix_noise,
    white_noise,
)
from formantkit.pipeline import PipelineConfig, analyze

from synthetic_benchmark import build_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--estimator", default="qcp-fbcov")
    parser.add_argument("--snrs", type=float, nargs="+", default=[10.0, 5.0])
    parser.add_argument("--babble", help="optional babble WAV to add as a condition")
    parser.add_argument("--utterances", type=int, default=8)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workdir", default="/tmp/formantkit-noise")
    args = parser.parse_args()

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    pairs = build_corpus(workdir, args.utterances, rng)
    cfg = PipelineConfig(estimator=args.estimator, seed=args.seed)

    conditions = [("clean", None, np.inf)]
    for snr in args.snrs:
        conditions.append((f"white {snr:g} dB", "white", snr))
        if args.babble:
            conditions.append((f"babble {snr:g} dB", args.babble, snr))

    print(f"estimator: {args.estimator}")
    print(f"{'condition':16s} {'FDR1':>7s} {'FDR2':>7s} {'FDR3':>7s} "
          f"{'FEE1':>7s} {'FEE2':>7s} {'FEE3':>7s}")
    for label, source, snr in conditions:
        scores = []
        for wav, gt_path in pairs:
            sig = read_wav(wav)
            if source is not None:
                if source == "white":
                    noise = white_noise(len(sig.samples), args.seed + 2)
                else:
                    noise = read_wav(source)
                sig = mix_noise(sig, noise, snr, seed=args.seed)
            result = analyze(sig, cfg)
            truth = load_ground_truth(gt_path)
            scores.append(evaluate_utterance(result.track.frequencies, truth))
        report = aggregate_report(label, scores)
        row = " ".join(f"{v:7.1f}" for v in (*report.fdr, *report.fee))
        print(f"{label:16s} {row}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
