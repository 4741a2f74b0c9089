"""Command-line surface: gen, train, identify, eval.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error. All
randomness flows from explicit --seed flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classify, dataset, evaluation
from .dataset import SPECTRA, Spectrum
from .features import DEFAULT_BLOCK, extract_feature_matrix


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="palmid",
        description="Palmprint identification from block statistics and "
        "wavelet subband energies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic multispectral dataset")
    p_gen.add_argument("--persons", type=int, required=True)
    p_gen.add_argument("--samples", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", type=Path, required=True, help="output directory")

    p_train = sub.add_parser("train", help="fit a gallery model from a dataset")
    p_train.add_argument("--dataset", type=Path, required=True,
                         help="dataset directory or manifest.json path")
    p_train.add_argument("--train-per-person", type=int, default=6)
    p_train.add_argument("--all", action="store_true",
                         help="enroll every sample (leaves no test data)")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--block", type=int, default=DEFAULT_BLOCK)
    p_train.add_argument("--model-out", type=Path, required=True)

    p_id = sub.add_parser("identify", help="identify one multispectral probe")
    p_id.add_argument("--model", type=Path, required=True)
    p_id.add_argument("--red", type=Path, required=True)
    p_id.add_argument("--green", type=Path, required=True)
    p_id.add_argument("--blue", type=Path, required=True)
    p_id.add_argument("--nir", type=Path, required=True)
    p_id.add_argument("--method", choices=("mdc", "wmv"), default="mdc")

    p_eval = sub.add_parser("eval", help="run the identification experiment")
    p_eval.add_argument("--dataset", type=Path, required=True)
    p_eval.add_argument("--ratios", type=str, default="3,4,5,6",
                        help="comma-separated train counts per person")
    p_eval.add_argument("--trials", type=int, default=10)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--block", type=int, default=DEFAULT_BLOCK)
    p_eval.add_argument("--report", type=Path, default=None,
                        help="also write the report as JSON")
    return parser


def _cmd_gen(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    if args.persons < 2:
        parser.error("--persons must be >= 2")
    if args.samples < 2:
        parser.error("--samples must be >= 2")
    manifest = dataset.generate_synthetic(args.persons, args.samples, args.seed, args.out)
    print(args.out / "manifest.json")
    print(f"{len(manifest.records)} images for {manifest.persons} persons")
    return 0


def _cmd_train(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    manifest = dataset.load_manifest(args.dataset)
    if args.all:
        train_pairs = [
            (p, i)
            for p in manifest.person_ids
            for i in range(manifest.samples_per_person)
        ]
    else:
        if args.train_per_person >= manifest.samples_per_person:
            parser.error(
                f"--train-per-person {args.train_per_person} would leave no test "
                f"data ({manifest.samples_per_person} samples per person); "
                "pass --all to enroll everything"
            )
        config = evaluation.SplitConfig(
            train_per_person=args.train_per_person, trials=1, rng_seed=args.seed
        )
        train_pairs, _ = evaluation.split(manifest, config, trial=0)

    training = {}
    for person, sample in train_pairs:
        training.setdefault(person, []).append(
            {
                s: extract_feature_matrix(
                    dataset.load_image(manifest.image_path(person, sample, s)),
                    args.block,
                )
                for s in SPECTRA
            }
        )
    model = classify.fit_gallery(training, args.block)
    classify.save_model(model, args.model_out)
    print(args.model_out)
    print(
        f"enrolled {len(model.templates)} persons, "
        f"{model.blocks_per_image} blocks per image"
    )
    return 0


def _cmd_identify(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    model = classify.load_model(args.model)
    paths = {
        Spectrum.RED: args.red,
        Spectrum.GREEN: args.green,
        Spectrum.BLUE: args.blue,
        Spectrum.NIR: args.nir,
    }
    probe = {
        s: extract_feature_matrix(dataset.load_image(paths[s]), model.block_size)
        for s in SPECTRA
    }
    if args.method == "mdc":
        print(f"predicted: {classify.identify_mdc(probe, model)}")
    else:
        person, board = classify.identify_wmv(probe, model)
        print(f"predicted: {person}")
        top = " ".join(f"{pid}={score:.6g}" for pid, score in board.ranked()[:3])
        print(f"top-3: {top}")
    return 0


def _cmd_eval(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    try:
        ratios = [int(r) for r in args.ratios.split(",") if r.strip()]
    except ValueError:
        parser.error(f"--ratios must be comma-separated integers, got {args.ratios!r}")
    manifest = dataset.load_manifest(args.dataset)
    for r in ratios:
        if not 2 <= r < manifest.samples_per_person:
            parser.error(
                f"--ratios entry {r} must lie in 2..{manifest.samples_per_person - 1}"
            )
    if args.trials < 1:
        parser.error("--trials must be >= 1")

    features = evaluation.extract_features(manifest, args.block)
    reports = [
        evaluation.run_experiment(
            manifest,
            evaluation.SplitConfig(
                train_per_person=r, trials=args.trials, rng_seed=args.seed
            ),
            block=args.block,
            features=features,
        )
        for r in ratios
    ]
    print(evaluation.render_report(reports))
    if args.report is not None:
        doc = {
            "dataset": str(args.dataset),
            "seed": args.seed,
            "trials": args.trials,
            "rows": [report.to_dict() for report in reports],
        }
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        print(f"report written to {args.report}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "train": _cmd_train,
    "identify": _cmd_identify,
    "eval": _cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](parser, args)
    except SystemExit as exc:  # parser.error inside a command
        return int(exc.code or 0)
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
