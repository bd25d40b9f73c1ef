"""Soft-margin SVM trained by sequential minimal optimization.

Dual problem: minimize 0.5*a'Qa - sum(a) subject to 0 <= a_i <= C and
sum(y_i a_i) = 0, with Q_ij = y_i y_j k(x_i, x_j). Each step picks the
maximal KKT-violating pair, solves the two-variable subproblem in closed
form, and updates the gradient. Feature columns are standardized
internally, so accuracy is invariant under affine rescaling of inputs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .features import FEATURE_IDS

DEFAULT_TOL = 1e-3
DEFAULT_MAX_UPDATES = 10**6
SWEEP_C = 100.0
SWEEP_GAMMA = 2.0

SWEEP_HEADER = (
    "feature_1",
    "feature_2",
    "feature_3",
    "n",
    "kernel",
    "C",
    "gamma",
    "accuracy",
    "support_vector_count",
)


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"kernel kind must be 'linear' or 'rbf', got {self.kind!r}")
        if self.kind == "rbf":
            if self.gamma is None or self.gamma <= 0:
                raise ValueError(f"rbf kernel needs gamma > 0, got {self.gamma!r}")

    def gram(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Kernel matrix k(a_i, b_j) for row matrices a and b."""
        if self.kind == "linear":
            return a @ b.T
        sq = (
            np.sum(a * a, axis=1)[:, None]
            + np.sum(b * b, axis=1)[None, :]
            - 2.0 * (a @ b.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-self.gamma * sq)


@dataclass(frozen=True)
class Dataset:
    """Rows of feature values with labels -1 (easy) / +1 (hard)."""

    X: np.ndarray
    y: np.ndarray
    feature_ids: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} rows but {y.shape[0]} labels")
        if not np.all(np.isfinite(X)):
            raise ValueError("non-finite feature values in dataset")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_ids", tuple(self.feature_ids))

    @classmethod
    def from_evaluated(cls, easy, hard, feature_ids) -> "Dataset":
        """Easy members get label -1, hard members +1."""
        feature_ids = tuple(feature_ids)
        rows = [[m.features[f] for f in feature_ids] for m in easy]
        rows += [[m.features[f] for f in feature_ids] for m in hard]
        labels = [-1.0] * len(easy) + [1.0] * len(hard)
        return cls(np.array(rows, dtype=np.float64), np.array(labels), feature_ids)

    def project(self, feature_ids) -> "Dataset":
        feature_ids = tuple(feature_ids)
        cols = [self.feature_ids.index(f) for f in feature_ids]
        return Dataset(self.X[:, cols], self.y, feature_ids)

    def __len__(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class SvmModel:
    """Support rows are stored standardized; coef holds alpha_i * y_i."""

    kernel: KernelSpec
    C: float
    coef: np.ndarray
    support: np.ndarray
    support_y: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray
    iterations: int
    kkt_violation: float
    feature_ids: tuple[str, ...] = ()

    @property
    def alphas(self) -> np.ndarray:
        return self.coef * self.support_y

    def to_dict(self) -> dict:
        return {
            "kernel": {"kind": self.kernel.kind, "gamma": self.kernel.gamma},
            "C": self.C,
            "coef": self.coef.tolist(),
            "support": self.support.tolist(),
            "support_y": self.support_y.tolist(),
            "bias": self.bias,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "iterations": self.iterations,
            "kkt_violation": self.kkt_violation,
            "feature_ids": list(self.feature_ids),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        return cls(
            kernel=KernelSpec(d["kernel"]["kind"], d["kernel"]["gamma"]),
            C=float(d["C"]),
            coef=np.array(d["coef"], dtype=np.float64),
            support=np.array(d["support"], dtype=np.float64),
            support_y=np.array(d["support_y"], dtype=np.float64),
            bias=float(d["bias"]),
            mean=np.array(d["mean"], dtype=np.float64),
            std=np.array(d["std"], dtype=np.float64),
            iterations=int(d["iterations"]),
            kkt_violation=float(d["kkt_violation"]),
            feature_ids=tuple(d.get("feature_ids", ())),
        )


def train(
    ds: Dataset,
    kernel: KernelSpec,
    C: float = 1.0,
    tol: float = DEFAULT_TOL,
    max_updates: int = DEFAULT_MAX_UPDATES,
) -> SvmModel:
    """Fit the dual by SMO until the maximal KKT violation drops below tol.

    Pair selection is the most-violating pair, so training is deterministic.
    Hitting the update cap returns the current model with the residual
    violation recorded in kkt_violation.
    """
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    if len(ds) < 2:
        raise ValueError("training needs at least two rows")
    y = ds.y
    if np.all(y == y[0]):
        raise ValueError("training needs both classes present")

    mean = ds.X.mean(axis=0)
    std = ds.X.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    X = (ds.X - mean) / std

    m = len(ds)
    K = kernel.gram(X, X)
    Q = (y[:, None] * y[None, :]) * K
    alpha = np.zeros(m)
    G = -np.ones(m)

    it = 0
    violation = np.inf
    while it < max_updates:
        neg_yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        up_vals = np.where(up, neg_yG, -np.inf)
        low_vals = np.where(low, neg_yG, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        violation = up_vals[i] - low_vals[j]
        if violation < tol:
            break
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        # step in the y-scaled space; the equality constraint is preserved
        delta = violation / quad
        room_i = C - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else C - alpha[j]
        delta = min(delta, room_i, room_j)
        alpha[i] += y[i] * delta
        alpha[j] -= y[j] * delta
        G += Q[:, i] * (y[i] * delta) - Q[:, j] * (y[j] * delta)
        it += 1

    np.clip(alpha, 0.0, C, out=alpha)
    bias = _bias(alpha, y, G, C)
    sv = alpha > 1e-12
    return SvmModel(
        kernel=kernel,
        C=float(C),
        coef=alpha[sv] * y[sv],
        support=X[sv],
        support_y=y[sv],
        bias=bias,
        mean=mean,
        std=std,
        iterations=it,
        kkt_violation=float(max(violation, 0.0)),
        feature_ids=ds.feature_ids,
    )


def _bias(alpha: np.ndarray, y: np.ndarray, G: np.ndarray, C: float) -> float:
    """b = mean of -y_t G_t over free vectors; bound midpoint if none free."""
    yG = y * G
    free = (alpha > 0.0) & (alpha < C)
    if np.any(free):
        return float(-yG[free].mean())
    ub = np.inf
    lb = -np.inf
    at_upper = alpha >= C
    at_lower = alpha <= 0.0
    hi = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lo = (at_upper & (y > 0)) | (at_lower & (y < 0))
    if np.any(hi):
        ub = yG[hi].min()
    if np.any(lo):
        lb = yG[lo].max()
    if not np.isfinite(ub) or not np.isfinite(lb):
        return 0.0
    return float(-(ub + lb) / 2.0)


def decision_values(model: SvmModel, rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if rows.shape[1] != model.support.shape[1]:
        raise ValueError(
            f"row has {rows.shape[1]} features, model expects {model.support.shape[1]}"
        )
    Z = (rows - model.mean) / model.std
    K = model.kernel.gram(Z, model.support)
    return K @ model.coef + model.bias


def predict(model: SvmModel, row) -> tuple[int, float]:
    """Label in {-1, +1} and raw decision value for one row."""
    value = float(decision_values(model, row)[0])
    return (1 if value >= 0.0 else -1), value


def training_accuracy(model: SvmModel, ds: Dataset) -> float:
    values = decision_values(model, ds.X)
    labels = np.where(values >= 0.0, 1.0, -1.0)
    return float(np.mean(labels == ds.y))


@dataclass(frozen=True)
class SweepCell:
    features: tuple[str, ...]
    n: int
    kernel: KernelSpec
    C: float
    accuracy: float | None
    support_vector_count: int | None
    error: str | None = None


def combination_sweep(
    easy,
    hard,
    sizes=(2, 3),
    kernel: KernelSpec = KernelSpec("rbf", SWEEP_GAMMA),
    C: float = SWEEP_C,
    pool: bool = False,
) -> list[SweepCell]:
    """Train one model per feature subset (all 2-of-7 and 3-of-7 subsets by
    default) and instance size, recording training accuracy.

    With pool=True all sizes share one dataset per subset (n recorded as 0).
    A failing cell is recorded with its error message, not raised.
    """
    if not easy or not hard:
        raise ValueError("sweep needs both easy and hard instances")
    full = Dataset.from_evaluated(easy, hard, FEATURE_IDS)
    ns = np.array([m.inst.n for m in easy] + [m.inst.n for m in hard])
    groups = [(0, full)] if pool else [
        (int(n), Dataset(full.X[ns == n], full.y[ns == n], FEATURE_IDS))
        for n in sorted(set(ns.tolist()))
    ]
    cells = []
    for size in sorted(sizes):
        for subset in itertools.combinations(FEATURE_IDS, size):
            for n, ds in groups:
                try:
                    projected = ds.project(subset)
                    model = train(projected, kernel, C)
                    cells.append(
                        SweepCell(
                            subset,
                            n,
                            kernel,
                            C,
                            training_accuracy(model, projected),
                            int(model.coef.shape[0]),
                        )
                    )
                except ValueError as exc:
                    cells.append(SweepCell(subset, n, kernel, C, None, None, str(exc)))
    return cells


def sweep_rows(cells) -> list[list[str]]:
    """CSV rows (with header) for a sweep result."""
    rows = [list(SWEEP_HEADER)]
    for cell in cells:
        feats = list(cell.features) + [""] * (3 - len(cell.features))
        gamma = "" if cell.kernel.gamma is None else repr(cell.kernel.gamma)
        if cell.error is None:
            acc = repr(cell.accuracy)
            svc = str(cell.support_vector_count)
        else:
            acc = "NA"
            svc = "NA"
        rows.append(
            [*feats, str(cell.n), cell.kernel.kind, repr(cell.C), gamma, acc, svc]
        )
    return rows
