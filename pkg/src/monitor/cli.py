"""Command-line entry point: extract, select, calibrate, train, evaluate, score."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .fuse import FEATURE_SETS, FusionPipeline, select_textual
from .learn import KINDS, TrainedModel, predict

logger = logging.getLogger("monitor")

BUNDLE_FORMAT = "monitor-bundle"


class CliError(RuntimeError):
    def __init__(self, stage: str, msg: str):
        super().__init__(f"[{stage}] {msg}")


def _common(p: argparse.ArgumentParser, dataset: bool = True) -> None:
    if dataset:
        p.add_argument("--dataset", type=Path, required=True,
                       help="post file (JSONL) or a directory written by `extract`")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iqa-models", type=Path, default=None, help="directory with brisque.json / niqe.json")
    p.add_argument("--lexicon", type=Path, default=None, help="lexicon manifest (JSON)")


def _split_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--split", choices=("fixed", "ratio"), default="fixed")
    p.add_argument("--ratio", type=float, default=0.8)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="monitor", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="corpus -> feature matrices")
    _common(p)
    p.add_argument("--identity", choices=("pixel", "perceptual"), default="pixel")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed record")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("select", help="gain-ratio selection report on the training split")
    _common(p)
    _split_args(p)
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--out", type=Path, default=None, help="write the report here (default: stdout)")

    p = sub.add_parser("calibrate", help="pristine images -> IQA model files")
    _common(p, dataset=False)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--images", type=Path, help="directory of pristine PNG/JPEG images")
    src.add_argument("--synthetic", action="store_true", help="use the bundled procedural-scene recipe")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("train", help="fit one (feature set, model) pair on the training split")
    _common(p)
    _split_args(p)
    p.add_argument("--features", choices=FEATURE_SETS, default="monitor")
    p.add_argument("--model", choices=KINDS, default="forest")
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--out", type=Path, required=True, help="bundle file (JSON)")

    p = sub.add_parser("evaluate", help="full (model x feature set) grid")
    _common(p)
    _split_args(p)
    p.add_argument("--features", choices=FEATURE_SETS, nargs="+", default=list(FEATURE_SETS))
    p.add_argument("--model", choices=KINDS, nargs="+", default=list(KINDS))
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--protocol", choices=("cv", "holdout", "both"), default="both")
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("score", help="label posts with a trained bundle")
    _common(p)
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("make-corpus", help="write the toy or the synthetic multimodal corpus")
    p.add_argument("--kind", choices=("toy", "synthetic"), default="synthetic")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--events", type=int, default=100)
    p.add_argument("--out", type=Path, required=True)
    return ap


def _features(args, identity: str = "pixel", strict: bool = False):
    from .eval.pipeline import load_features

    return load_features(args.dataset, args.iqa_models, args.lexicon, identity, strict)


def cmd_extract(args) -> None:
    fs = _features(args, args.identity, args.strict)
    fs.save(args.out)
    print(f"wrote {len(fs.row_ids)} rows to {args.out}")


def cmd_select(args) -> None:
    from .eval.pipeline import split_features

    train, _ = split_features(_features(args), args.split, args.seed, args.ratio)
    rep = select_textual(train.textual, list(train.y()), args.k)
    text = rep.to_tsv()
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def cmd_calibrate(args) -> None:
    from .iqa import calibrate_dir
    from .synth import default_calibration

    models = default_calibration(args.seed) if args.synthetic else calibrate_dir(args.images, args.seed)
    models.save(args.out)
    print(f"BRISQUE held-out Spearman {models.brisque.meta['holdout_spearman']:.4f}; "
          f"NIQE from {models.niqe.n_patches} patches; written to {args.out}")


def cmd_train(args) -> None:
    from .eval import fit_fold
    from .eval.pipeline import RunConfig, split_features

    cfg = RunConfig(args.dataset, args.out, args.split, args.seed)
    train, _ = split_features(_features(args), args.split, args.seed, args.ratio)
    pipe, model = fit_fold(cfg.spec(args.model), train, args.features, args.k)
    bundle = {"format": BUNDLE_FORMAT, "version": 1, "pipeline": pipe.to_dict(), "model": model.to_dict()}
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(bundle, sort_keys=True) + "\n")
    print(f"trained {args.model} on {len(train.row_ids)} rows ({args.features}); bundle at {args.out}")


def cmd_evaluate(args) -> None:
    from .eval.pipeline import RunConfig, run_pipeline

    protocols = ("cv", "holdout") if args.protocol == "both" else (args.protocol,)
    cfg = RunConfig(
        dataset=args.dataset, out=args.out, split=args.split, seed=args.seed,
        feature_sets=tuple(args.features), models=tuple(args.model), k_folds=args.folds,
        k_select=args.k, stratified=not args.no_stratify, protocols=protocols, ratio=args.ratio,
        model_dir=args.iqa_models, lexicon=args.lexicon,
    )
    run_pipeline(cfg)
    sys.stdout.write((args.out / "grid.txt").read_text())


def cmd_score(args) -> None:
    from .corpus import filter_usable, load_posts
    from .features import extract_features
    from .iqa import QualityModels, load_default_models
    from .textfeat import Lexicon, default_lexicon

    bundle = json.loads(args.bundle.read_text())
    if bundle.get("format") != BUNDLE_FORMAT:
        raise CliError("score", f"{args.bundle} is not a model bundle")
    pipe = FusionPipeline.from_dict(bundle["pipeline"])
    model = TrainedModel.from_dict(bundle["model"])
    d = filter_usable(load_posts(args.dataset))
    models = QualityModels.load(args.iqa_models) if args.iqa_models else load_default_models()
    lex = Lexicon.from_manifest(args.lexicon) if args.lexicon else default_lexicon()
    fs = extract_features(d, models, lex)
    pred = predict(model, pipe.transform(fs.textual, fs.image))
    lines = ["id\tlabel\tscore"]
    lines += [f"{rid}\t{'fake' if lab else 'real'}\t{s:.6f}"
              for rid, lab, s in zip(fs.row_ids, pred.labels, pred.scores)]
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def cmd_make_corpus(args) -> None:
    from .corpora import make_synthetic_corpus, make_toy_corpus

    if args.kind == "toy":
        path = make_toy_corpus(args.out, 7 if args.seed is None else args.seed)
    else:
        path = make_synthetic_corpus(args.out, n_events=args.events, seed=args.seed or 0)
    print(f"wrote {path}")


COMMANDS = {
    "extract": cmd_extract,
    "select": cmd_select,
    "calibrate": cmd_calibrate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "score": cmd_score,
    "make-corpus": cmd_make_corpus,
}


class _OncePerMessage(logging.Filter):
    """Drop repeats of an identical log message (fold loops repeat the same warnings)."""

    def __init__(self):
        super().__init__()
        self.seen: set[tuple[str, int, str]] = set()

    def filter(self, record: logging.LogRecord) -> bool:
        key = (record.name, record.levelno, record.getMessage())
        if key in self.seen:
            return False
        self.seen.add(key)
        return True


def main(argv: list[str] | None = None) -> int:
    from .eval.pipeline import StageError

    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    for h in logging.getLogger().handlers:
        if not any(isinstance(f, _OncePerMessage) for f in h.filters):
            h.addFilter(_OncePerMessage())
    try:
        COMMANDS[args.command](args)
    except (StageError, CliError) as exc:
        print(f"monitor {args.command}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - every failure leaves with a stage-tagged message
        print(f"monitor {args.command}: [{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
