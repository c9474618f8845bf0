import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liarcred.corpus import SplitSpec, class_index
from liarcred.harness import (
    ConfusionMatrix,
    CVReport,
    ExperimentError,
    Fitted,
    MetricsError,
    MetricsReport,
    TrainConfig,
    compare,
    cross_validate,
    default_train_config,
    f1_score,
    metrics,
    train_eval,
)
from liarcred.models import ModelConfig

from helpers import make_records, make_table


def binary_cm(tp, tn, fp, fn):
    # rows: true (0 real, 1 fake); cols: predicted
    return ConfusionMatrix(np.array([[tn, fp], [fn, tp]]))


class TestMetrics:
    def test_worked_example(self):
        m = metrics(binary_cm(2, 2, 1, 1))
        assert m["accuracy"] == pytest.approx(4 / 6)
        assert m["precision"] == pytest.approx(2 / 3)
        assert m["recall"] == pytest.approx(2 / 3)
        assert m["f1"] == pytest.approx(2 / 3)

    def test_all_correct(self):
        m = metrics(binary_cm(5, 7, 0, 0))
        assert (m["accuracy"], m["precision"], m["recall"], m["f1"]) == (1.0, 1.0, 1.0, 1.0)

    def test_zero_denominator(self):
        m = metrics(binary_cm(0, 5, 0, 3))
        assert m["precision"] == 0.0 and m["f1"] == 0.0

    def test_empty(self):
        with pytest.raises(MetricsError):
            metrics(ConfusionMatrix(np.zeros((2, 2), dtype=int)))

    def test_fake_is_positive(self):
        cm = ConfusionMatrix.from_predictions([1, 1, 0, 0], [1, 0, 1, 0], 2)
        assert (cm.tp, cm.fn, cm.fp, cm.tn) == (1, 1, 1, 1)

    def test_six_way_all_correct(self):
        y = np.repeat(np.arange(6), 3)
        m = metrics(ConfusionMatrix.from_predictions(y, y, 6))
        assert m["accuracy"] == 1.0 and m["macro"] == {"precision": 1.0, "recall": 1.0, "f1": 1.0}


def brute_force(y_true, y_pred, k):
    """Per-class counts by direct iteration over the prediction list."""
    out = []
    for c in range(k):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        out.append((prec, rec, f1))
    acc = sum(1 for t, p in zip(y_true, y_pred) if t == p) / len(y_true)
    return acc, out


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 6]), st.integers(1, 60))
def test_metrics_match_brute_force(seed, k, n):
    rng = np.random.default_rng(seed)
    y, p = rng.integers(0, k, n), rng.integers(0, k, n)
    m = metrics(ConfusionMatrix.from_predictions(y, p, k))
    acc, per = brute_force(y, p, k)
    assert abs(m["accuracy"] - acc) <= 1e-12
    if k == 2:
        assert abs(m["precision"] - per[1][0]) <= 1e-12
        assert abs(m["recall"] - per[1][1]) <= 1e-12
        assert abs(m["f1"] - per[1][2]) <= 1e-12
    else:
        for c in range(6):
            for j, key in enumerate(("precision", "recall", "f1")):
                assert abs(m["per_class"][c][key] - per[c][j]) <= 1e-12
        assert abs(m["macro"]["f1"] - np.mean([q[2] for q in per])) <= 1e-12
    assert abs(m["f1"] - f1_score(m["precision"], m["recall"])) <= 1e-12 or k == 6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 80))
def test_collapse_matches_direct_binary(seed, n):
    rng = np.random.default_rng(seed)
    y6, p6 = rng.integers(0, 6, n), rng.integers(0, 6, n)
    collapsed = ConfusionMatrix.from_predictions(y6, p6, 6).collapse()
    direct = ConfusionMatrix.from_predictions((y6 <= 2).astype(int), (p6 <= 2).astype(int), 2)
    assert np.array_equal(collapsed.counts, direct.counts)
    assert metrics(collapsed) == metrics(direct)
    assert collapsed.total == n


class TestCVReport:
    def test_mean_variance_recompute(self):
        folds = [
            MetricsReport.from_confusion(binary_cm(tp, 10 - tp, 2, 1), "binary", train_accuracy=0.9)
            for tp in (3, 5, 6, 7, 8)
        ]
        cv = CVReport(folds)
        accs = np.array([f.accuracy for f in folds])
        assert abs(cv.mean["accuracy"] - accs.sum() / 5) <= 1e-12
        assert abs(cv.variance["accuracy"] - ((accs - accs.mean()) ** 2).sum() / 5) <= 1e-12
        assert cv.variance_kind == "population"

    def test_round_trip(self):
        folds = [MetricsReport.from_confusion(binary_cm(3, 4, 1, 2), "binary", seed=1)]
        cv = CVReport(folds, seed=2)
        again = CVReport.from_dict(cv.to_dict())
        assert again.mean == cv.mean and again.folds[0] == folds[0]


def split_of(records, seed=0):
    n = len(records)
    a, b = int(n * 0.6), int(n * 0.8)
    return SplitSpec.from_partitions(records[:a], records[a:b], records[b:], seed=seed)


class TestTrainEval:
    def test_deterministic(self):
        records, split = split_of(make_records(90, seed=7))
        cfg = TrainConfig(epochs=3, batch_size=16, seed=4)
        a = train_eval(ModelConfig(kind="enhanced"), records, split, make_table(), cfg)
        b = train_eval(ModelConfig(kind="enhanced"), records, split, make_table(), cfg)
        assert a.to_dict() == b.to_dict()
        assert sum(map(sum, a.confusion)) == len(split.test)

    def test_separable_toy_perfect(self):
        # strong cues in every statement make the fixture separable by a bag of words
        records, split = split_of(make_records(150, seed=8, cue_rate=1.0))
        report = train_eval(ModelConfig(kind="logreg-ovr", label_space="binary"), records, split, make_table(),
                            TrainConfig(seed=0))
        assert report.accuracy == 1.0

    def test_network_learns_separable(self):
        records, split = split_of(make_records(200, seed=9, cue_rate=1.0))
        report = train_eval(ModelConfig(kind="seq", lstm_hidden=16), records, split, make_table(),
                            TrainConfig(epochs=60, batch_size=32, lr=0.01, patience=10, seed=0))
        assert report.accuracy == 1.0
        assert report.notes["best_epoch"] >= 1
        assert len(report.loss_history["train"]) == report.notes["stopped_epoch"]

    def test_single_class_rejected(self):
        records = [r for r in make_records(200, seed=1) if class_index(r.label, "binary") == 1]
        records, split = split_of(records)
        with pytest.raises(ExperimentError):
            train_eval(ModelConfig(kind="linreg"), records, split, make_table(), TrainConfig())

    @pytest.mark.parametrize("kind", ["linreg", "logreg-ovr", "ordinal-logreg", "seq", "enhanced"])
    def test_checkpoint_round_trip(self, tmp_path, kind):
        records, split = split_of(make_records(80, seed=2))
        table = make_table()
        cfg = TrainConfig(epochs=2, batch_size=16, seed=1)
        _, fitted = train_eval(ModelConfig(kind=kind, label_space="six"), records, split, table, cfg,
                               return_model=True)
        fitted.save(tmp_path / "ck", {"seed": 1})
        again = Fitted.load(tmp_path / "ck", table)
        test = [records[i] for i in split.test]
        assert again.predict(test).tobytes() == fitted.predict(test).tobytes()
        if kind != "linreg":
            assert again.predict_proba(test).tobytes() == fitted.predict_proba(test).tobytes()


class TestCrossValidate:
    def test_fold_sizes(self):
        pool = make_records(100, seed=3)
        cv = cross_validate(ModelConfig(kind="linreg", label_space="six"), pool, make_table(), TrainConfig(seed=2), k=5)
        assert len(cv.folds) == 5
        assert [sum(map(sum, f.confusion)) for f in cv.folds] == [20] * 5

    def test_network_folds_deterministic(self):
        pool = make_records(60, seed=3)
        cfg = TrainConfig(epochs=2, batch_size=16, seed=5)
        a = cross_validate(ModelConfig(kind="seq", lstm_hidden=8), pool, make_table(), cfg, k=3)
        b = cross_validate(ModelConfig(kind="seq", lstm_hidden=8), pool, make_table(), cfg, k=3)
        assert a.to_dict() == b.to_dict()
        seeds = {f.seed for f in a.folds}
        assert len(seeds) == 3


def report(acc_cm, kind, split="s1", space="binary"):
    r = MetricsReport.from_confusion(acc_cm, space, split_manifest=split, notes={"kind": kind})
    return r


class TestCompare:
    def test_identical_zero_delta(self):
        r = report(binary_cm(3, 3, 1, 1), "seq")
        out = compare({"a": r, "b": r})
        assert out["deltas"][0]["accuracy_delta"] == 0.0

    def test_hypotheses(self):
        out = compare({
            "seq": report(binary_cm(3, 3, 2, 2), "seq"),
            "seq-just": report(binary_cm(4, 3, 1, 2), "seq-just"),
            "enhanced": report(binary_cm(4, 4, 1, 1), "enhanced"),
            "lr": report(binary_cm(2, 2, 3, 3), "linreg"),
        })
        verdicts = {v["hypothesis"]: v["verdict"] for v in out["verdicts"]}
        assert verdicts["justification helps"] == "supported"
        assert verdicts["credit score and metadata help"] == "supported"
        assert verdicts["enhanced beats regression baseline"] == "supported"

    def test_mismatched_split(self):
        with pytest.raises(ExperimentError):
            compare({"a": report(binary_cm(1, 1, 1, 1), "seq", "s1"), "b": report(binary_cm(1, 1, 1, 1), "seq", "s2")})

    def test_mismatched_label_space(self):
        six = ConfusionMatrix.from_predictions([0, 1], [0, 1], 6)
        with pytest.raises(ExperimentError):
            compare({"a": report(binary_cm(1, 1, 1, 1), "seq"), "b": report(six, "seq", space="six")})


def test_default_train_configs():
    assert default_train_config("seq", "binary") == TrainConfig(epochs=120, batch_size=512)
    assert default_train_config("seq-just", "six").epochs == 40
    enhanced = default_train_config("enhanced", "binary")
    assert (enhanced.epochs, enhanced.batch_size, enhanced.lr, enhanced.patience) == (500, 256, 0.001, 15)
