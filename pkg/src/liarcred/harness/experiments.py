"""Train/evaluate on fixed splits, stratified cross-validation, comparisons."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from ..corpus import CorpusError, Record, SplitSpec, class_index, stratified_folds
from ..engine import load_checkpoint, save_checkpoint
from ..models import FeatureEncoder, Model, ModelConfig, RegressionFeaturizer, build, fit_regression
from ..models.regression import LinearRegressionClassifier, OneVsRestLogistic, OrdinalLogistic
from ..text import EmbeddingTable
from .metrics import ConfusionMatrix, CVReport, MetricsReport
from .training import TrainConfig, TrainResult, fit_network

log = logging.getLogger(__name__)


class ExperimentError(ValueError):
    pass


@dataclass
class Fitted:
    """A trained classifier together with the feature pipeline it was fitted with."""

    config: ModelConfig
    encoder: object  # FeatureEncoder | RegressionFeaturizer
    model: object  # Model | regression estimator
    history: TrainResult | None = None

    def predict_proba(self, records) -> np.ndarray:
        if self.config.is_regression:
            X = self.encoder.transform(records)
            if isinstance(self.model, LinearRegressionClassifier):
                raise ExperimentError("linear regression has no probability output")
            p = self.model.predict_proba(X)
            return p[:, 0] if self.config.label_space == "binary" else p
        batch = self.encoder.transform(records, justification=self.config.has_justification)
        return self.model.predict_proba(batch)

    def predict(self, records, threshold: float = 0.5) -> np.ndarray:
        if self.config.is_regression:
            return self.model.predict(self.encoder.transform(records))
        batch = self.encoder.transform(records, justification=self.config.has_justification)
        return self.model.predict(batch, threshold)

    def save(self, directory, metadata: dict | None = None) -> None:
        meta = {"config": self.config.to_dict(), "config_hash": self.config.config_hash(), **(metadata or {})}
        if self.config.is_regression:
            enc = self.encoder
            tensors = {"features.mean": enc.mean_, "features.std": enc.std_}
            meta["features"] = {"count_means": list(enc.stats.count_means), "use_justification": enc.use_justification}
            m = self.model
            tensors["coef"] = m.coef_
            if isinstance(m, LinearRegressionClassifier):
                tensors["intercept"] = np.array([m.intercept_])
            elif isinstance(m, OneVsRestLogistic):
                tensors["intercept"] = m.intercept_
            else:
                tensors["thresholds"] = m.thresholds_
        else:
            tensors = self.model.state_dict()
            meta["features"] = self.encoder.state()
        save_checkpoint(directory, tensors, meta)

    @classmethod
    def load(cls, directory, table: EmbeddingTable) -> "Fitted":
        from ..corpus import TrainingStats

        tensors, meta = load_checkpoint(directory)
        config = ModelConfig.from_dict(meta["config"])
        if config.is_regression:
            feat = meta["features"]
            enc = RegressionFeaturizer(table, feat["use_justification"], TrainingStats(tuple(feat["count_means"])))
            enc.mean_, enc.std_ = tensors["features.mean"], tensors["features.std"]
            n = config.n_classes
            if config.kind == "linreg":
                model = LinearRegressionClassifier(n, tensors["coef"], float(tensors["intercept"][0]))
            elif config.kind == "logreg-ovr":
                model = OneVsRestLogistic(n, config.l2, coef_=tensors["coef"], intercept_=tensors["intercept"])
            else:
                model = OrdinalLogistic(n, config.l2, coef_=tensors["coef"], thresholds_=tensors["thresholds"])
            return cls(config, enc, model)
        encoder = FeatureEncoder.from_state(meta["features"], table)
        model = build(config, table, encoder.metadata)
        model.load_state_dict(tensors)
        return cls(config, encoder, model)


def _check_labels(records, label_space: str) -> np.ndarray:
    y = np.array([class_index(r.label, label_space) for r in records], dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise ExperimentError(f"training data has fewer than two {label_space} classes")
    return y


def fit(config: ModelConfig, train: list[Record], val: list[Record] | None, table: EmbeddingTable,
        train_cfg: TrainConfig) -> Fitted:
    """Fit any model kind on ``train`` (``val`` drives early stopping for networks)."""
    if not train:
        raise ExperimentError("empty training set")
    y = _check_labels(train, config.label_space)
    if config.is_regression:
        use_j = all(r.justification is not None for r in train)
        featurizer = RegressionFeaturizer(table, use_justification=use_j).fit(train)
        model = fit_regression(config.kind, featurizer.transform(train), y, config.n_classes, l2=config.l2)
        return Fitted(config, featurizer, model)
    encoder = FeatureEncoder.fit(train, table, config)
    model = build(config, table, encoder.metadata, seed=train_cfg.seed)
    j = config.has_justification
    train_batch = encoder.transform(train, config.label_space, justification=j)
    val_batch = encoder.transform(val, config.label_space, justification=j) if val else None
    history = fit_network(model, train_batch, val_batch, train_cfg)
    return Fitted(config, encoder, model, history)


def evaluate(fitted: Fitted, records, threshold: float = 0.5) -> ConfusionMatrix:
    y = np.array([class_index(r.label, fitted.config.label_space) for r in records], dtype=np.int64)
    return ConfusionMatrix.from_predictions(y, fitted.predict(records, threshold), fitted.config.n_classes)


def _report(fitted: Fitted, train, test, train_cfg: TrainConfig, split_ref: str) -> MetricsReport:
    cfg = fitted.config
    cm = evaluate(fitted, test, train_cfg.threshold)
    train_cm = evaluate(fitted, train, train_cfg.threshold)
    notes = {"kind": cfg.kind, "threshold": train_cfg.threshold, "n_train": len(train), "n_test": len(test)}
    history = {}
    if fitted.history is not None:
        history = {"train": fitted.history.train_loss, "validation": fitted.history.val_loss}
        notes.update(best_epoch=fitted.history.best_epoch, stopped_epoch=fitted.history.stopped_epoch)
        notes.update(max_len_s=fitted.encoder.max_len_s, max_len_j=fitted.encoder.max_len_j,
                     max_len_basis="training partition")
    return MetricsReport.from_confusion(
        cm,
        cfg.label_space,
        train_accuracy=float(np.trace(train_cm.counts) / train_cm.total),
        loss_history=history,
        config_hash=cfg.config_hash(),
        seed=train_cfg.seed,
        split_manifest=split_ref,
        notes=notes,
    )


def train_eval(config: ModelConfig, records: list[Record], split: SplitSpec, table: EmbeddingTable,
               train_cfg: TrainConfig, return_model: bool = False):
    """Train on the split's train part, early-stop on validation, report on test."""
    train = [records[i] for i in split.train]
    val = [records[i] for i in split.validation]
    test = [records[i] for i in split.test]
    if not test:
        raise ExperimentError("empty test partition")
    fitted = fit(config, train, val, table, train_cfg)
    report = _report(fitted, train, test, train_cfg, split.fingerprint())
    return (report, fitted) if return_model else report


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def _run_fold(args):
    config, pool, train_idx, val_idx, test_idx, table, train_cfg, fold = args
    cfg = TrainConfig(**{**train_cfg.to_dict(), "seed": fold_seed(train_cfg.seed, fold)})
    train = [pool[i] for i in train_idx]
    val = [pool[i] for i in val_idx] if len(val_idx) else None
    test = [pool[i] for i in test_idx]
    fitted = fit(config, train, val, table, cfg)
    report = _report(fitted, train, test, cfg, f"fold {fold}")
    report.notes["fold"] = fold
    return report


def cross_validate(config: ModelConfig, pool: list[Record], table: EmbeddingTable, train_cfg: TrainConfig,
                   k: int = 5, n_jobs: int = 1) -> CVReport:
    """Stratified k-fold CV over ``pool`` (normally train + validation).

    Networks early-stop on the fold after the test fold; regressions train
    on every non-test fold.
    """
    folds = stratified_folds(pool, k, train_cfg.seed, config.label_space)
    jobs = []
    for f, (_, test_idx) in enumerate(folds):
        if config.is_regression:
            val_idx = np.array([], dtype=np.int64)
            train_idx = folds[f][0]
        else:
            val_idx = folds[(f + 1) % k][1]
            train_idx = np.setdiff1d(folds[f][0], val_idx)
        jobs.append((config, pool, train_idx, val_idx, test_idx, table, train_cfg, f))
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            reports = list(ex.map(_run_fold, jobs))
    else:
        reports = [_run_fold(j) for j in jobs]
    return CVReport(
        reports,
        config_hash=config.config_hash(),
        seed=train_cfg.seed,
        notes={"k": k, "kind": config.kind, "label_space": config.label_space, "pool_size": len(pool)},
    )


# (hypothesis, better kind, worse kind)
HYPOTHESES = (
    ("justification helps", "seq-just", "seq"),
    ("credit score and metadata help", "enhanced", "seq-just"),
)


def _kind(name: str, report: MetricsReport) -> str:
    return report.notes.get("kind", name)


def compare(reports: dict) -> dict:
    """Pairwise accuracy deltas plus verdicts on the expected model orderings.

    ``reports`` maps a display name to a MetricsReport; all must share the
    label space and test split.
    """
    if not reports:
        raise ExperimentError("nothing to compare")
    items = list(reports.items())
    spaces = {r.label_space for _, r in items}
    splits = {r.split_manifest for _, r in items}
    if len(spaces) > 1:
        raise ExperimentError(f"reports use different label spaces: {sorted(spaces)}")
    if len(splits) > 1:
        raise ExperimentError(f"reports use different test splits: {sorted(splits)}")
    deltas = [
        {"a": a, "b": b, "accuracy_delta": ra.accuracy - rb.accuracy}
        for (a, ra), (b, rb) in combinations(items, 2)
    ]
    by_kind = {}
    for name, r in items:
        by_kind.setdefault(_kind(name, r), r)
    verdicts = []
    for label, better, worse in HYPOTHESES:
        if better in by_kind and worse in by_kind:
            delta = by_kind[better].accuracy - by_kind[worse].accuracy
            verdicts.append({"hypothesis": label, "better": better, "worse": worse,
                             "delta": delta, "verdict": "supported" if delta > 0 else "not supported"})
        else:
            verdicts.append({"hypothesis": label, "better": better, "worse": worse,
                             "delta": None, "verdict": "not tested"})
    baselines = [r for k, r in by_kind.items() if k in ("linreg", "logreg-ovr", "ordinal-logreg")]
    if baselines:
        best = max(r.accuracy for r in baselines)
        for k, r in by_kind.items():
            if k in ("seq", "seq-just", "enhanced", "siamese-shared"):
                delta = r.accuracy - best
                verdicts.append({"hypothesis": f"{k} beats regression baseline", "better": k, "worse": "baseline",
                                 "delta": delta, "verdict": "supported" if delta > 0 else "not supported"})
    return {"label_space": spaces.pop(), "split": splits.pop(), "deltas": deltas, "verdicts": verdicts}


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def write_loss_history(report: MetricsReport, directory) -> list:
    """One ``epoch<TAB>loss`` file per recorded series."""
    written = []
    for series, values in report.loss_history.items():
        path = Path(directory) / f"loss_{series}.tsv"
        path.write_text("".join(f"{i}\t{v!r}\n" for i, v in enumerate(values, start=1)))
        written.append(path)
    return written
