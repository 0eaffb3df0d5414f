#!/usr/bin/env python3
"""Train the MLP tracker on synthetic vowels and measure peak refinement gains.

Reproduces the shape of the neural-tracker comparison at desk scale: the plain
network prediction versus refinement by LP-FBCOV and QCP-FBCOV spectral peaks,
scored on held-out synthetic utterances.

    python scripts/train_synthetic_dnn.py --train 20 --held-out 5 --epochs 150
"""

import argparse
from pathlib import Path

import numpy as np

from formantkit import cli, mlp
from formantkit.audio_io import read_wav
from formantkit.evaluate import aggregate_report, evaluate_utterance, load_ground_truth
from formantkit.pipeline import DNN_ESTIMATORS, PipelineConfig, analyze

from synthetic_benchmark import build_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--train", type=int, default=20)
    parser.add_argument("--held-out", dest="held_out", type=int, default=5)
    parser.add_argument("--epochs", type=int, default=150)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--workdir", default="/tmp/formantkit-dnn")
    args = parser.parse_args()

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    pairs = build_corpus(workdir, args.train + args.held_out, rng)
    train_pairs, held_out = pairs[:args.train], pairs[args.train:]

    manifest = workdir / "manifest.csv"
    manifest.write_text("\n".join(f"{w},{g}" for w, g in train_pairs) + "\n")
    model_path = workdir / "model.fmlp"
    rc = cli.main([
        "train", str(manifest), "-o", str(model_path),
        "--epochs", str(args.epochs), "--seed", str(args.seed),
    ])
    if rc != 0:
        return rc

    model = mlp.load_model(model_path)
    print(f"\nheld-out scores over {len(held_out)} utterances:")
    print(f"{'method':16s} {'FDR1':>7s} {'FDR2':>7s} {'FDR3':>7s} "
          f"{'FEE1':>7s} {'FEE2':>7s} {'FEE3':>7s}")
    for estimator in DNN_ESTIMATORS:
        cfg = PipelineConfig(estimator=estimator, model_path=str(model_path))
        scores = []
        for wav, gt_path in held_out:
            result = analyze(read_wav(wav), cfg, model)
            truth = load_ground_truth(gt_path)
            scores.append(evaluate_utterance(result.track.frequencies, truth))
        report = aggregate_report(estimator, scores)
        row = " ".join(f"{v:7.1f}" for v in (*report.fdr, *report.fee))
        print(f"{estimator:16s} {row}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
