"""Regression baselines over averaged word vectors.

Features: mean embedding of the statement's in-vocabulary tokens (plus the
justification's mean when present) and the standardized credit counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_expit

from ..corpus import Record, TrainingStats, class_index, impute_missing
from ..text import EmbeddingTable, mean_vector, tokenize


class DegenerateFeatures(ValueError):
    pass


@dataclass
class RegressionFeaturizer:
    table: EmbeddingTable
    use_justification: bool = False
    stats: TrainingStats | None = None
    mean_: np.ndarray | None = None
    std_: np.ndarray | None = None

    def _raw(self, records) -> np.ndarray:
        records = impute_missing(records, self.stats)
        rows = []
        for r in records:
            parts = [mean_vector(tokenize(r.statement), self.table)]
            if self.use_justification:
                parts.append(mean_vector(tokenize(r.justification or ""), self.table))
            parts.append(np.asarray(r.credit.as_tuple(), dtype=np.float64))
            rows.append(np.concatenate(parts))
        return np.array(rows).reshape(len(records), -1)

    def fit(self, records) -> "RegressionFeaturizer":
        self.stats = TrainingStats.from_records(records)
        X = self._raw(records)
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0] = 1.0
        self.std_ = std
        return self

    def transform(self, records) -> np.ndarray:
        return (self._raw(records) - self.mean_) / self.std_


def _check_design(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValueError(f"X has shape {X.shape} but y has {len(y)} labels")
    if X.shape[0] == 0:
        raise DegenerateFeatures("no training rows")
    if np.all(np.ptp(X, axis=0) == 0):
        raise DegenerateFeatures("every feature column is constant")


@dataclass
class LinearRegressionClassifier:
    n_classes: int
    coef_: np.ndarray = None
    intercept_: float = 0.0

    def fit(self, X, y):
        X, y = np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.float64)
        _check_design(X, y)
        A = np.hstack([X, np.ones((len(X), 1))])
        sol, *_ = np.linalg.lstsq(A, y, rcond=None)
        self.coef_, self.intercept_ = sol[:-1], float(sol[-1])
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X) @ self.coef_ + self.intercept_

    def predict(self, X) -> np.ndarray:
        z = np.floor(self.decision_function(X) + 0.5)
        return np.clip(z, 0, self.n_classes - 1).astype(np.int64)


def _fit_logistic(X: np.ndarray, t: np.ndarray, l2: float, tol: float):
    """Binary logistic regression; L2 on the weights only. Returns (w, b)."""
    n, p = X.shape

    def objective(theta):
        w, b = theta[:p], theta[p]
        z = X @ w + b
        loss = -(t * log_expit(z) + (1 - t) * log_expit(-z)).sum() + 0.5 * l2 * w @ w
        r = expit(z) - t
        grad = np.concatenate([X.T @ r + l2 * w, [r.sum()]])
        return loss, grad

    res = minimize(objective, np.zeros(p + 1), jac=True, method="L-BFGS-B", options={"gtol": tol, "maxiter": 10000})
    return res.x[:p], float(res.x[p])


@dataclass
class OneVsRestLogistic:
    n_classes: int
    l2: float = 1.0
    tol: float = 1e-8
    coef_: np.ndarray = None
    intercept_: np.ndarray = None

    def fit(self, X, y):
        X, y = np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)
        _check_design(X, y)
        if self.n_classes == 2:
            w, b = _fit_logistic(X, (y == 1).astype(np.float64), self.l2, self.tol)
            self.coef_, self.intercept_ = w[None, :], np.array([b])
            return self
        ws, bs = [], []
        for k in range(self.n_classes):
            w, b = _fit_logistic(X, (y == k).astype(np.float64), self.l2, self.tol)
            ws.append(w)
            bs.append(b)
        self.coef_, self.intercept_ = np.array(ws), np.array(bs)
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Per-class one-vs-rest probabilities (binary: P(class 1) column)."""
        return expit(np.asarray(X) @ self.coef_.T + self.intercept_)

    def predict(self, X) -> np.ndarray:
        p = self.predict_proba(X)
        if self.n_classes == 2:
            return (p[:, 0] >= 0.5).astype(np.int64)
        # argmax returns the first maximum: ties go to the lower class
        return p.argmax(axis=1)


@dataclass
class OrdinalLogistic:
    """Proportional-odds model: P(y <= k | x) = sigmoid(theta_k - x @ beta).

    Thresholds are ``theta_0`` followed by cumulative ``exp`` gaps, so they
    stay sorted whatever the optimizer does.
    """

    n_classes: int
    l2: float = 1.0
    tol: float = 1e-8
    coef_: np.ndarray = None
    thresholds_: np.ndarray = None
    threshold_trace: list = field(default_factory=list, repr=False)

    @staticmethod
    def thresholds_from(raw: np.ndarray) -> np.ndarray:
        return np.cumsum(np.concatenate([raw[:1], np.exp(raw[1:])]))

    def _split(self, theta, p):
        return theta[:p], self.thresholds_from(theta[p:])

    def fit(self, X, y):
        X, y = np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)
        _check_design(X, y)
        n, p = X.shape
        K = self.n_classes
        rows = np.arange(n)

        def objective(theta):
            beta, cuts = self._split(theta, p)
            bounds = np.concatenate([[-np.inf], cuts, [np.inf]])
            eta = X @ beta
            upper = bounds[y + 1] - eta
            lower = bounds[y] - eta
            F_up, F_lo = expit(upper), expit(lower)
            prob = np.maximum(F_up - F_lo, 1e-300)
            loss = -np.log(prob).sum() + 0.5 * self.l2 * beta @ beta
            f_up = np.where(np.isfinite(upper), F_up * (1 - F_up), 0.0)
            f_lo = np.where(np.isfinite(lower), F_lo * (1 - F_lo), 0.0)
            d_up = f_up / prob
            d_lo = -f_lo / prob
            g_beta = X.T @ (d_up + d_lo) + self.l2 * beta
            g_cuts = np.zeros(K + 1)
            np.add.at(g_cuts, y + 1, -d_up)
            np.add.at(g_cuts, y, -d_lo)
            g_cuts = g_cuts[1:K]
            # chain through cumulative exp gaps
            tail = np.cumsum(g_cuts[::-1])[::-1]
            g_raw = np.concatenate([[tail[0]], tail[1:] * np.exp(theta[p + 1 :])])
            return loss, np.concatenate([g_beta, g_raw])

        init = np.zeros(p + K - 1)
        # start thresholds at the empirical cumulative logits
        cum = np.clip(np.cumsum(np.bincount(y, minlength=K))[:-1] / n, 1e-3, 1 - 1e-3)
        start = np.log(cum / (1 - cum))
        start = np.maximum.accumulate(start + np.arange(K - 1) * 1e-3)
        init[p] = start[0]
        init[p + 1 :] = np.log(np.maximum(np.diff(start), 1e-3))
        self.threshold_trace = []

        def record(theta):
            self.threshold_trace.append(self.thresholds_from(theta[p:]).copy())

        res = minimize(
            objective, init, jac=True, method="L-BFGS-B", callback=record, options={"gtol": self.tol, "maxiter": 10000}
        )
        self.coef_, self.thresholds_ = self._split(res.x, p)
        return self

    def predict_proba(self, X) -> np.ndarray:
        eta = np.asarray(X) @ self.coef_
        cdf = expit(self.thresholds_[None, :] - eta[:, None])
        cdf = np.hstack([np.zeros((len(eta), 1)), cdf, np.ones((len(eta), 1))])
        return np.diff(cdf, axis=1)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)


def fit_regression(kind: str, X, y, n_classes: int, l2: float = 1.0, tol: float = 1e-8):
    if kind == "linreg":
        return LinearRegressionClassifier(n_classes).fit(X, y)
    if kind == "logreg-ovr":
        return OneVsRestLogistic(n_classes, l2, tol).fit(X, y)
    if kind == "ordinal-logreg":
        return OrdinalLogistic(n_classes, l2, tol).fit(X, y)
    raise ValueError(f"unknown regression kind {kind!r}")


def regression_targets(records: list[Record], label_space: str) -> np.ndarray:
    return np.array([class_index(r.label, label_space) for r in records], dtype=np.int64)
