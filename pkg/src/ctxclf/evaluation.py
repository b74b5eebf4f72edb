"""Sequence generation, ZO/SqCov metrics, and the cross-validated experiment.

Testing follows a sequence-level protocol: movement sequences are derived
from the box structure (one per root-to-leaf path, so every box classifier
is activated), converted to class sequences through the binding under
test, instantiated R times with randomly drawn test objects, and fed to
the classifier. ZO scores a sequence 1 only when every position is
correct; SqCov credits the correctly classified prefix before the first
error.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ctxclf.classifiers import ClassifierSpec
from ctxclf.context import Binding, ContextStructure
from ctxclf.errors import CtxclfError
from ctxclf.optimize import EAParams, Fitness, ea_search, exhaustive_search, feasible_set
from ctxclf.rng import derive_rng, derive_seed
from ctxclf.runtime import (
    ContextEnsemble,
    PlainModel,
    initial_state,
    reset,
    step,
    train_ensemble,
    train_plain,
)
from ctxclf.signals import SignalSet, stratified_folds
from ctxclf.features import feature_matrix

METHODS = ("plain", "rctx", "octx")


@dataclass(frozen=True)
class MovementSequence:
    movements: tuple[int, ...]
    path: tuple[int, ...]  # box indices from root to leaf


@dataclass(frozen=True)
class SequenceOutcome:
    """Per-position hit flags of one evaluated object sequence."""

    hits: tuple[bool, ...]

    @property
    def length(self) -> int:
        return len(self.hits)

    @property
    def error_free(self) -> bool:
        return all(self.hits)

    @property
    def first_error(self) -> int | None:
        """1-based position of the first miss, or None."""
        for i, h in enumerate(self.hits):
            if not h:
                return i + 1
        return None


def generate_movement_sequences(structure: ContextStructure) -> list[MovementSequence]:
    """One sequence per root-to-leaf path; every box appears on some path."""
    root = structure.root
    if not root.children:
        return [MovementSequence(movements=root.member_movements(), path=(root.index,))]
    sequences = []

    def descend(box, prefix_moves: list[int], prefix_path: list[int]):
        moves = list(prefix_moves)
        path = prefix_path + [box.index]
        if not box.is_root:
            moves.append(box.opener)
            moves.extend(box.internal_movements)
        if box.children:
            for child in box.children:
                descend(child, moves, path)
        else:
            for idx in reversed(path):
                b = _box_by_index(structure, idx)
                if not b.is_root:
                    moves.append(b.opener)
            sequences.append(MovementSequence(movements=tuple(moves), path=tuple(path)))

    descend(root, [], [])
    return sequences


def _box_by_index(structure: ContextStructure, index: int):
    for b in structure.root.walk():
        if b.index == index:
            return b
    raise KeyError(index)


def sequence_to_classes(
    seq: MovementSequence, structure: ContextStructure, binding: Binding
) -> tuple[int, ...]:
    """Map each movement to its bound class (closer shares the opener's)."""
    return tuple(binding.class_of_movement(m) for m in seq.movements)


def sample_object_sequences(
    class_seq, test_pool: dict[int, list[int]], R: int, rng: np.random.Generator
) -> list[list[int]]:
    """R object-index sequences, each position drawn uniformly with replacement."""
    for c in class_seq:
        if not test_pool.get(c):
            raise CtxclfError(f"test pool has no objects of class {c}")
    out = []
    for _ in range(R):
        out.append([test_pool[c][int(rng.integers(0, len(test_pool[c])))] for c in class_seq])
    return out


def evaluate_sequence(system, objects, true_classes) -> SequenceOutcome:
    """Feed objects in order; ensembles are reset to the root afterwards."""
    if len(objects) != len(true_classes):
        raise ValueError("objects and true classes must have equal length")
    hits = []
    if isinstance(system, ContextEnsemble):
        state = initial_state(system)
        for x, truth in zip(objects, true_classes):
            predicted, _, state = step(system, state, x)
            hits.append(predicted == truth)
        reset(state)
    elif isinstance(system, PlainModel):
        for x, truth in zip(objects, true_classes):
            hits.append(system.predict(np.asarray(x)) == truth)
    else:
        raise TypeError(f"cannot evaluate {type(system).__name__}")
    return SequenceOutcome(hits=tuple(hits))


def zo_metric(outcomes) -> float:
    """Fraction of sequences with no classification error."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("no outcomes")
    return sum(1.0 for o in outcomes if o.error_free) / len(outcomes)


def sqcov_metric(outcomes) -> float:
    """Mean correctly classified prefix fraction before the first error."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("no outcomes")
    total = 0.0
    for o in outcomes:
        if o.error_free:
            total += 1.0
        else:
            total += (o.first_error - 1) / o.length
    return total / len(outcomes)


@dataclass(frozen=True)
class RunConfig:
    signalset: SignalSet
    structure: ContextStructure
    classifier_specs: tuple[ClassifierSpec, ...]
    methods: tuple[str, ...] = METHODS
    cv_folds: int = 10
    inner_folds: int = 3
    repetitions: int = 20  # R object sequences per movement sequence
    inner_repetitions: int = 5  # cheaper resampling inside the binding search
    feature_fraction: float = 0.5
    ea_params: EAParams = EAParams()
    exhaustive_limit: int = 500  # above this feasible-set size the EA is used
    master_seed: int = 0

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")


@dataclass(frozen=True)
class MetricsRow:
    method: str
    classifier: str
    fold: int
    zo: float
    sqcov: float


@dataclass(frozen=True)
class MetricsTable:
    rows: tuple[MetricsRow, ...]
    sequences_per_fold: int  # K = G * R
    optimizer_traces: dict = field(default_factory=dict, compare=False)

    def to_csv(self) -> str:
        lines = ["method,classifier,fold,zo,sqcov"]
        for r in self.rows:
            lines.append(f"{r.method},{r.classifier},{r.fold},{r.zo!r},{r.sqcov!r}")
        return "\n".join(lines) + "\n"

    def values(self, method: str, classifier: str, criterion: str) -> list[float]:
        return [
            getattr(r, criterion)
            for r in self.rows
            if r.method == method and r.classifier == classifier
        ]

    def summary(self) -> dict:
        out: dict = {"sequences_per_fold": self.sequences_per_fold, "cells": {}}
        pairs = sorted({(r.method, r.classifier) for r in self.rows})
        for method, clf in pairs:
            for criterion in ("zo", "sqcov"):
                vals = self.values(method, clf, criterion)
                out["cells"].setdefault(clf, {}).setdefault(method, {})[criterion] = {
                    "mean": float(np.mean(vals)),
                    "std": float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0,
                }
        return out


def _class_pools(labels: np.ndarray, indices: list[int]) -> dict[int, list[int]]:
    pools: dict[int, list[int]] = {}
    for i in indices:
        pools.setdefault(int(labels[i]), []).append(i)
    return pools


def _evaluate_system(system, binding, structure, X, pools, R, rng) -> list[SequenceOutcome]:
    outcomes = []
    for seq in generate_movement_sequences(structure):
        classes = sequence_to_classes(seq, structure, binding)
        for obj_idx in sample_object_sequences(classes, pools, R, rng):
            outcomes.append(evaluate_sequence(system, [X[i] for i in obj_idx], classes))
    return outcomes


def _binding_fitness(config: RunConfig, spec, X, y, train_indices, fold: int) -> Fitness:
    """Mean SqCov of a candidate binding under inner cross-validation."""
    inner_seed = derive_seed(config.master_seed, "inner", fold, spec.algorithm)
    labels = y[train_indices]
    assignments = _stratified_assignments(labels, config.inner_folds, inner_seed)

    def objective(binding: Binding) -> float:
        scores = []
        for inner in range(config.inner_folds):
            tr = [train_indices[i] for i in range(len(labels)) if assignments[i] != inner]
            te = [train_indices[i] for i in range(len(labels)) if assignments[i] == inner]
            ensemble = train_ensemble(
                config.structure, binding, X[tr], y[tr], spec, config.feature_fraction
            )
            rng = derive_rng(inner_seed, "sample", inner, *binding.secondary)
            outcomes = _evaluate_system(
                ensemble,
                binding,
                config.structure,
                X,
                _class_pools(y, te),
                config.inner_repetitions,
                rng,
            )
            scores.append(sqcov_metric(outcomes))
        return float(np.mean(scores))

    return Fitness(objective)


def _stratified_assignments(labels: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = derive_rng(seed, "stratified_assignments", k)
    out = np.empty(len(labels), dtype=np.int64)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        order = rng.permutation(len(idx))
        for pos, o in enumerate(order):
            out[idx[o]] = pos % k
    return out


def run_experiment(config: RunConfig) -> MetricsTable:
    """Outer stratified CV over Plain / RCtx / OCtx for every classifier spec."""
    sset = config.signalset
    X, y = feature_matrix(sset)
    plan = stratified_folds(sset, config.cv_folds, derive_seed(config.master_seed, "outer"))
    feas = feasible_set(config.structure)
    G = len(generate_movement_sequences(config.structure))

    rows: list[MetricsRow] = []
    traces: dict = {}
    for spec in config.classifier_specs:
        for fold in range(config.cv_folds):
            train_idx, test_idx = plan.split(sset, fold)
            pools = _class_pools(y, test_idx)

            rctx_rng = derive_rng(config.master_seed, "rctx", fold, spec.algorithm)
            rctx_binding = feas[int(rctx_rng.integers(0, len(feas)))]

            systems: dict[str, tuple] = {}
            if "plain" in config.methods:
                plain = train_plain(X[train_idx], y[train_idx], spec, config.feature_fraction)
                systems["plain"] = (plain, rctx_binding)
            if "rctx" in config.methods:
                ens = train_ensemble(
                    config.structure, rctx_binding, X[train_idx], y[train_idx], spec,
                    config.feature_fraction,
                )
                systems["rctx"] = (ens, rctx_binding)
            if "octx" in config.methods:
                fitness = _binding_fitness(config, spec, X, y, train_idx, fold)
                if len(feas) <= config.exhaustive_limit:
                    best, _, _ = exhaustive_search(feas, fitness)
                else:
                    params = replace(
                        config.ea_params,
                        seed=derive_seed(config.master_seed, "ea", fold, spec.algorithm),
                    )
                    best, _, trace = ea_search(feas, fitness, params)
                    traces[(spec.algorithm, fold)] = trace
                ens = train_ensemble(
                    config.structure, best, X[train_idx], y[train_idx], spec,
                    config.feature_fraction,
                )
                systems["octx"] = (ens, best)

            for method in config.methods:
                system, binding = systems[method]
                # plain shares rctx's binding and object draws for comparability
                sample_key = "rctx" if method == "plain" else method
                rng = derive_rng(
                    config.master_seed, "sample", fold, spec.algorithm, sample_key,
                    *binding.secondary,
                )
                outcomes = _evaluate_system(
                    system, binding, config.structure, X, pools, config.repetitions, rng
                )
                rows.append(
                    MetricsRow(
                        method=method,
                        classifier=spec.algorithm,
                        fold=fold,
                        zo=zo_metric(outcomes),
                        sqcov=sqcov_metric(outcomes),
                    )
                )
    return MetricsTable(
        rows=tuple(rows),
        sequences_per_fold=G * config.repetitions,
        optimizer_traces=traces,
    )
