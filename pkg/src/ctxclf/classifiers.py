"""Base classifiers: Euclidean 1-NN, Gaussian naive Bayes, random forest.

All three are self-contained, deterministic given the spec seed, and
serializable to JSON. Ties always break towards the smallest class label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ctxclf.errors import DegenerateTraining, DimensionMismatch
from ctxclf.rng import derive_rng

ALGORITHMS = ("NearestNeighbor", "GaussianNB", "RandomForest")

VARIANCE_FLOOR = 1e-9
MIN_LEAF = 2


@dataclass(frozen=True)
class ClassifierSpec:
    algorithm: str = "GaussianNB"
    num_trees: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.num_trees < 1:
            raise ValueError("num_trees must be >= 1")


@dataclass(frozen=True)
class TrainedModel:
    algorithm: str
    classes: tuple[int, ...]
    dimension: int
    params: dict = field(compare=False)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "algorithm": self.algorithm,
            "classes": list(self.classes),
            "dimension": self.dimension,
            "params": _params_to_jsonable(self.algorithm, self.params),
        }

    @staticmethod
    def from_dict(d: dict) -> "TrainedModel":
        if d.get("version") != 1:
            raise ValueError(f"unsupported model version {d.get('version')}")
        return TrainedModel(
            algorithm=d["algorithm"],
            classes=tuple(int(c) for c in d["classes"]),
            dimension=int(d["dimension"]),
            params=_params_from_jsonable(d["algorithm"], d["params"]),
        )


def _params_to_jsonable(alg: str, params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, np.ndarray):
            out[k] = {"__array__": v.tolist(), "dtype": str(v.dtype)}
        elif alg == "RandomForest" and k == "trees":
            out[k] = [{kk: vv.tolist() for kk, vv in t.items()} for t in v]
        else:
            out[k] = v
    return out


def _params_from_jsonable(alg: str, params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, dict) and "__array__" in v:
            out[k] = np.asarray(v["__array__"], dtype=v["dtype"])
        elif alg == "RandomForest" and k == "trees":
            out[k] = [
                {
                    "feature": np.asarray(t["feature"], dtype=np.int64),
                    "threshold": np.asarray(t["threshold"], dtype=np.float64),
                    "left": np.asarray(t["left"], dtype=np.int64),
                    "right": np.asarray(t["right"], dtype=np.int64),
                    "label": np.asarray(t["label"], dtype=np.int64),
                }
                for t in v
            ]
        else:
            out[k] = v
    return out


def train(spec: ClassifierSpec, X, y) -> TrainedModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite training rows")
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise DegenerateTraining("training labels contain a single class")

    if spec.algorithm == "NearestNeighbor":
        params = {"X": X.copy(), "y": y.copy()}
    elif spec.algorithm == "GaussianNB":
        means, variances, priors = [], [], []
        for c in classes:
            rows = X[y == c]
            means.append(rows.mean(axis=0))
            variances.append(np.maximum(rows.var(axis=0), VARIANCE_FLOOR))
            priors.append(len(rows) / len(y))
        params = {
            "means": np.vstack(means),
            "variances": np.vstack(variances),
            "priors": np.asarray(priors),
        }
    else:
        rng = derive_rng(spec.seed, "forest")
        trees = []
        n = len(y)
        for _ in range(spec.num_trees):
            boot = rng.integers(0, n, size=n)
            trees.append(_grow_tree(X[boot], y[boot], rng))
        params = {"trees": trees}
    return TrainedModel(
        algorithm=spec.algorithm, classes=classes, dimension=X.shape[1], params=params
    )


def _gini_split(col: np.ndarray, y: np.ndarray, classes: np.ndarray):
    """Best (impurity, threshold) for one feature column, or None."""
    order = np.argsort(col, kind="stable")
    xs, ys = col[order], y[order]
    n = len(ys)
    onehot = ys[:, None] == classes[None, :]
    left_counts = np.cumsum(onehot, axis=0)[:-1]  # split after position i
    total = left_counts[-1] + onehot[-1]
    right_counts = total[None, :] - left_counts
    nl = np.arange(1, n)
    nr = n - nl
    valid = xs[1:] != xs[:-1]
    if not valid.any():
        return None
    gini_l = 1.0 - np.sum((left_counts / nl[:, None]) ** 2, axis=1)
    gini_r = 1.0 - np.sum((right_counts / nr[:, None]) ** 2, axis=1)
    impurity = (nl * gini_l + nr * gini_r) / n
    impurity[~valid] = np.inf
    best = int(np.argmin(impurity))
    thr = 0.5 * (xs[best] + xs[best + 1])
    return float(impurity[best]), thr


def _grow_tree(X: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> dict:
    """CART with Gini splits, sqrt(d) features per split, grown to purity."""
    d = X.shape[1]
    n_try = max(1, int(math.isqrt(d)))
    feature, threshold, left, right, label = [], [], [], [], []

    def majority(ys: np.ndarray) -> int:
        vals, counts = np.unique(ys, return_counts=True)
        return int(vals[np.argmax(counts)])  # unique is sorted: ties to smallest label

    def build(idx: np.ndarray) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        label.append(majority(y[idx]))
        ys = y[idx]
        if len(idx) < MIN_LEAF or len(np.unique(ys)) == 1:
            return node
        classes = np.unique(ys)
        candidates = rng.choice(d, size=n_try, replace=False)
        best = None
        for f in sorted(candidates):
            res = _gini_split(X[idx, f], ys, classes)
            if res is not None and (best is None or res[0] < best[0]):
                best = (res[0], f, res[1])
        if best is None:
            return node
        _, f, thr = best
        mask = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left[node] = build(idx[mask])
        right[node] = build(idx[~mask])
        return node

    build(np.arange(len(y)))
    return {
        "feature": np.asarray(feature, dtype=np.int64),
        "threshold": np.asarray(threshold, dtype=np.float64),
        "left": np.asarray(left, dtype=np.int64),
        "right": np.asarray(right, dtype=np.int64),
        "label": np.asarray(label, dtype=np.int64),
    }


def _tree_predict(tree: dict, x: np.ndarray) -> int:
    node = 0
    while tree["feature"][node] >= 0:
        if x[tree["feature"][node]] <= tree["threshold"][node]:
            node = tree["left"][node]
        else:
            node = tree["right"][node]
    return int(tree["label"][node])


def predict(model: TrainedModel, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dimension,):
        raise DimensionMismatch(f"expected {model.dimension} features, got {x.shape}")
    if model.algorithm == "NearestNeighbor":
        d2 = np.sum((model.params["X"] - x) ** 2, axis=1)
        return int(model.params["y"][int(np.argmin(d2))])
    if model.algorithm == "GaussianNB":
        means = model.params["means"]
        variances = model.params["variances"]
        log_post = (
            np.log(model.params["priors"])
            - 0.5 * np.sum(np.log(2.0 * np.pi * variances), axis=1)
            - 0.5 * np.sum((x[None, :] - means) ** 2 / variances, axis=1)
        )
        return model.classes[int(np.argmax(log_post))]
    votes = np.zeros(len(model.classes), dtype=np.int64)
    lookup = {c: i for i, c in enumerate(model.classes)}
    for tree in model.params["trees"]:
        votes[lookup[_tree_predict(tree, x)]] += 1
    return model.classes[int(np.argmax(votes))]  # classes sorted: ties to smallest
