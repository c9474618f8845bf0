"""Command-line entry point: ``liarcred <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (
    VARIANTS,
    CorpusError,
    CreditCounts,
    LabelSix,
    SplitSpec,
    label_histogram,
    parse_liar,
    parse_row,
    write_tsv,
)
from .credit import CreditScoreParams, credit_score, history_ratio
from .harness import (
    Fitted,
    MetricsReport,
    TrainConfig,
    compare,
    cross_validate,
    evaluate,
    train_eval,
    write_json,
    write_loss_history,
)
from .harness.metrics import SIX_NAMES
from .models import KINDS, LABEL_SPACES, ModelConfig
from .text import load_embeddings, tokenize

log = logging.getLogger("liarcred")

# file names of the published splits, per variant
SPLIT_FILES = {
    "liar": ("train.tsv", "valid.tsv", "test.tsv"),
    "liar-plus": ("train2.tsv", "val2.tsv", "test2.tsv"),
}


class UsageError(Exception):
    pass


def _existing(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file or directory: {p}")
    return p


def resolve_data(args) -> tuple[str, tuple[Path, Path, Path]]:
    """Return (variant, (train, valid, test)) from --data or --train/--valid/--test."""
    if args.data:
        root = _existing(args.data)
        if root.is_dir():
            variants = [args.variant] if args.variant else ["liar-plus", "liar"]
            for variant in variants:
                paths = tuple(root / name for name in SPLIT_FILES[variant])
                if all(p.exists() for p in paths):
                    return variant, paths
            missing = [str(root / n) for v in variants for n in SPLIT_FILES[v] if not (root / n).exists()]
            raise FileNotFoundError(f"split files not found: {', '.join(missing)}")
        raise UsageError("--data must be a directory holding the train/validation/test files")
    if not (args.train and args.valid and args.test):
        raise UsageError("give --data DIR or all of --train, --valid, --test")
    paths = tuple(_existing(p) for p in (args.train, args.valid, args.test))
    variant = args.variant or ("liar-plus" if paths[0].name.endswith("2.tsv") else "liar")
    return variant, paths


def load_splits(args):
    variant, paths = resolve_data(args)
    parts = [parse_liar(p, variant) for p in paths]
    records, split = SplitSpec.from_partitions(*parts, seed=args.seed)
    return variant, paths, records, split


def corpus_tokens(records) -> set:
    vocab = set()
    for r in records:
        vocab.update(tokenize(r.statement))
        if r.justification:
            vocab.update(tokenize(r.justification))
    return vocab


def load_table(args, records=None, vocab=None):
    path = _existing(args.embeddings)
    if vocab is None:
        vocab = corpus_tokens(records)
    return load_embeddings(path, args.embedding_dim, vocabulary=vocab)


MODEL_FIELDS = [f for f in fields(ModelConfig)]
TRAIN_FIELDS = [f for f in fields(TrainConfig) if f.name != "seed"]


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _field_type(f):
    t = str(f.type)
    if "bool" in t:
        return _bool
    if "float" in t:
        return float
    if "int" in t:
        return int
    return str


def add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model (mirrors ModelConfig)")
    g.add_argument("--config", help="JSON file of ModelConfig/TrainConfig fields; flags override it")
    for f in MODEL_FIELDS:
        names = [_flag(f.name)]
        if f.name == "kind":
            names.append("--model")
            g.add_argument(*names, dest=f.name, choices=KINDS, default=None)
        elif f.name == "label_space":
            names.append("--labels")
            g.add_argument(*names, dest=f.name, choices=LABEL_SPACES, default=None)
        else:
            g.add_argument(*names, dest=f.name, type=_field_type(f), default=None)
    t = p.add_argument_group("training (mirrors TrainConfig)")
    for f in TRAIN_FIELDS:
        t.add_argument(_flag(f.name), dest=f.name, type=_field_type(f), default=None)


def add_data_flags(p: argparse.ArgumentParser, embeddings: bool = True) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--data", help="directory with the published split files")
    g.add_argument("--train")
    g.add_argument("--valid")
    g.add_argument("--test")
    g.add_argument("--variant", choices=VARIANTS)
    if embeddings:
        g.add_argument("--embeddings", required=True, help="GloVe-format text file")
        g.add_argument("--embedding-dim", type=int, default=100)


def build_configs(args) -> tuple[ModelConfig, TrainConfig, dict]:
    base = {}
    if args.config:
        base = json.loads(_existing(args.config).read_text())
    model_keys = {f.name for f in MODEL_FIELDS}
    train_keys = {f.name for f in fields(TrainConfig)}
    unknown = set(base) - model_keys - train_keys
    if unknown:
        raise UsageError(f"unknown keys in {args.config}: {sorted(unknown)}")
    model_kw = {k: v for k, v in base.items() if k in model_keys}
    train_kw = {k: v for k, v in base.items() if k in train_keys and k != "seed"}
    for f in MODEL_FIELDS:
        value = getattr(args, f.name)
        if value is not None:
            model_kw[f.name] = value
    for f in TRAIN_FIELDS:
        value = getattr(args, f.name)
        if value is not None:
            train_kw[f.name] = value
    config = ModelConfig.from_dict(model_kw)
    if "epochs" not in train_kw and "batch_size" not in train_kw:
        from .harness import default_train_config

        defaults = default_train_config(config.kind, config.label_space).to_dict()
        defaults.update(train_kw)
        train_kw = defaults
    train_kw["seed"] = args.seed
    return config, TrainConfig(**train_kw), base


def write_manifest(args, out: Path, extra: dict) -> None:
    manifest = {
        "command": args.command,
        "argv": args.argv,
        "config_path": getattr(args, "config", None),
        "seed": args.seed,
        "output_directory": str(out),
        "artifact_version": __version__,
        **extra,
    }
    write_json(manifest, out / "run_manifest.json")


def cmd_prepare(args) -> int:
    variant, paths, records, split = load_splits(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = ("train", "validation", "test")
    for name, idx in zip(names, (split.train, split.validation, split.test)):
        write_tsv([records[i] for i in idx], out / f"{name}.tsv", variant)
    split.write_manifest(out / "split_manifest.json")
    summary = {
        "variant": variant,
        "sizes": {n: int(len(i)) for n, i in zip(names, (split.train, split.validation, split.test))},
        "labels": {n: label_histogram([records[i] for i in idx])
                   for n, idx in zip(names, (split.train, split.validation, split.test))},
        "split_fingerprint": split.fingerprint(),
        "note": "official published splits are used; no resplitting",
    }
    write_json(summary, out / "prepare_summary.json")
    write_manifest(args, out, {"variant": variant, "data_paths": [str(p) for p in paths]})
    print(json.dumps(summary["sizes"]))
    return 0


def cmd_train(args) -> int:
    config, train_cfg, _ = build_configs(args)
    variant, paths, records, split = load_splits(args)
    table = load_table(args, records)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report, fitted = train_eval(config, records, split, table, train_cfg, return_model=True)
    report.notes["variant"] = variant
    report.notes["split_source"] = "official published partitions, used as distributed (no resplit)"
    write_json(report.to_dict(), out / "report.json")
    write_loss_history(report, out)
    config.save(out / "config.json")
    split.write_manifest(out / "split_manifest.json")
    fitted.save(out / "checkpoint", {
        "seed": train_cfg.seed,
        "train_config": train_cfg.to_dict(),
        "embedding_vocab": [table.token(i) for i in range(1, len(table) + 1)],
        "embedding_dim": table.dim,
    })
    write_manifest(args, out, {
        "variant": variant,
        "data_paths": [str(p) for p in paths],
        "embeddings": str(args.embeddings),
        "model_config": config.to_dict(),
        "train_config": train_cfg.to_dict(),
        "config_hash": config.config_hash(),
    })
    print(f"test accuracy {report.accuracy:.4f}  f1 {report.f1:.4f}")
    return 0


def cmd_cv(args) -> int:
    config, train_cfg, _ = build_configs(args)
    variant, paths, records, split = load_splits(args)
    table = load_table(args, records)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    # the official test split is never folded
    pool = [records[i] for i in np.concatenate([split.train, split.validation])]
    report = cross_validate(config, pool, table, train_cfg, k=args.k, n_jobs=args.n_jobs)
    report.notes["variant"] = variant
    write_json(report.to_dict(), out / "cv_report.json")
    write_manifest(args, out, {
        "variant": variant,
        "data_paths": [str(p) for p in paths],
        "embeddings": str(args.embeddings),
        "model_config": config.to_dict(),
        "train_config": train_cfg.to_dict(),
        "k": args.k,
        "config_hash": config.config_hash(),
    })
    print(f"mean accuracy {report.mean['accuracy']:.4f}  variance {report.variance['accuracy']:.3e}")
    return 0


def load_fitted(args) -> tuple[Fitted, dict]:
    from .engine import load_checkpoint

    ckpt = _existing(args.checkpoint)
    _, meta = load_checkpoint(ckpt)
    vocab = meta.get("embedding_vocab", [])
    table = load_embeddings(_existing(args.embeddings), meta.get("embedding_dim", args.embedding_dim),
                            vocabulary=set(vocab))
    if [table.token(i) for i in range(1, len(table) + 1)] != vocab:
        raise UsageError(f"{args.embeddings} does not reproduce the checkpoint's embedding vocabulary")
    return Fitted.load(ckpt, table), meta


def cmd_evaluate(args) -> int:
    fitted, meta = load_fitted(args)
    path = _existing(args.data_file)
    records = parse_liar(path, args.variant)
    threshold = args.threshold if args.threshold is not None else 0.5
    cm = evaluate(fitted, records, threshold)
    report = MetricsReport.from_confusion(
        cm, fitted.config.label_space, config_hash=fitted.config.config_hash(), seed=meta.get("seed", 0),
        split_manifest=str(path), notes={"kind": fitted.config.kind, "threshold": threshold},
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(report.to_dict(), out / "report.json")
    write_manifest(args, out, {"checkpoint": str(args.checkpoint), "data_paths": [str(path)],
                               "embeddings": str(args.embeddings), "config_hash": fitted.config.config_hash()})
    print(f"accuracy {report.accuracy:.4f}  f1 {report.f1:.4f}")
    return 0


def read_unlabeled(path: Path, variant: str):
    """Rows in the normalized layout; the label column may be blank."""
    records = []
    with path.open(encoding="utf-8") as fh:
        for row, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields_ = line.split("\t")
            offset = 1 if variant == "liar-plus" and len(fields_) == 16 else 0
            if len(fields_) > 1 + offset and not fields_[1 + offset].strip():
                fields_[1 + offset] = LabelSix.TRUE.text
            records.append(parse_row(fields_, variant, path, row))
    return records


def cmd_predict(args) -> int:
    fitted, _ = load_fitted(args)
    path = _existing(args.input)
    records = read_unlabeled(path, args.variant)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    threshold = args.threshold if args.threshold is not None else 0.5
    preds = fitted.predict(records, threshold) if records else np.array([], dtype=np.int64)
    binary = fitted.config.label_space == "binary"
    probs = None
    if records and fitted.config.kind != "linreg":
        probs = fitted.predict_proba(records)
    with (out / "predictions.tsv").open("w", encoding="utf-8") as fh:
        for i, r in enumerate(records):
            label = ("fake" if preds[i] == 1 else "real") if binary else SIX_NAMES[preds[i]]
            extra = ""
            if probs is not None:
                extra = "\t" + (repr(float(probs[i])) if binary else ",".join(repr(float(p)) for p in probs[i]))
            fh.write(f"{r.id}\t{label}{extra}\n")
    write_manifest(args, out, {"checkpoint": str(args.checkpoint), "data_paths": [str(path)],
                               "embeddings": str(args.embeddings), "config_hash": fitted.config.config_hash()})
    print(f"{len(records)} predictions written")
    return 0


def cmd_compare(args) -> int:
    reports = {}
    for item in args.reports:
        name, sep, path = item.partition("=")
        if not sep:
            raise UsageError(f"--reports entries look like NAME=PATH, got {item!r}")
        data = json.loads(_existing(path).read_text())
        reports[name] = MetricsReport.from_dict(data)
    result = compare(reports)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(result, out / "comparison.json")
    write_manifest(args, out, {"reports": args.reports})
    for v in result["verdicts"]:
        delta = "n/a" if v["delta"] is None else f"{v['delta']:+.4f}"
        print(f"{v['hypothesis']}: {v['verdict']} ({delta})")
    return 0


def cmd_score_speaker(args) -> int:
    params = CreditScoreParams()
    if args.checkpoint:
        from .engine import load_checkpoint

        tensors, _ = load_checkpoint(_existing(args.checkpoint))
        if "c.w" not in tensors:
            raise UsageError(f"{args.checkpoint} has no credit-score branch")
        params = CreditScoreParams(float(tensors["c.w"][0]), float(tensors["c.b"][0]))
    if args.w is not None:
        params.w = args.w
    if args.b is not None:
        params.b = args.b
    counts = CreditCounts(btc=args.btc, fc=args.fc, htc=args.htc, mtc=args.mtc, pfc=args.pfc)
    result = {"history_ratio": history_ratio(counts), "credit_score": credit_score(counts, params),
              "w": params.w, "b": params.b}
    print(f"history_ratio {result['history_ratio']:.6f}")
    print(f"credit_score {result['credit_score']:.6f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(result, out / "score.json")
        write_manifest(args, out, {"counts": counts.as_tuple(), "checkpoint": args.checkpoint})
    return 0


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("counts must be non-negative")
    return value


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liarcred", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("prepare", help="parse, validate and normalize the TSV splits")
    common(p)
    add_data_flags(p, embeddings=False)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train on the official splits and report test metrics")
    common(p)
    add_data_flags(p)
    add_model_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="stratified k-fold cross-validation over train+validation")
    common(p)
    add_data_flags(p)
    add_model_flags(p)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--n-jobs", type=int, default=1)
    p.set_defaults(func=cmd_cv)

    for name, func, helptext in (
        ("evaluate", cmd_evaluate, "metrics of a checkpoint on a labelled file"),
        ("predict", cmd_predict, "label a TSV of statements"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--checkpoint", required=True)
        p.add_argument("--embeddings", required=True)
        p.add_argument("--embedding-dim", type=int, default=100)
        p.add_argument("--variant", choices=VARIANTS, default="liar")
        p.add_argument("--threshold", type=float)
        if name == "evaluate":
            p.add_argument("--data-file", required=True)
        else:
            p.add_argument("--input", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("compare", help="accuracy deltas and hypothesis verdicts")
    common(p)
    p.add_argument("--reports", nargs="+", required=True, metavar="NAME=PATH")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("score-speaker", help="history ratio and credit score for given counts")
    common(p, out_required=False)
    for name in ("btc", "fc", "htc", "mtc", "pfc"):
        p.add_argument(f"--{name}", type=_nonneg_int, default=0)
    p.add_argument("--w", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--checkpoint")
    p.set_defaults(func=cmd_score_speaker)
    return parser


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"liarcred: error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, CorpusError, ValueError) as exc:
        print(f"liarcred: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
