"""Training and execution of the context-dependent ensemble.

One classifier per box (the root classifier covers all classes); each has
its own mutual-information feature mask fitted on the box-restricted
training rows. At run time the ensemble behaves as a finite-state machine:
the current box's classifier predicts a class, the box-local map turns it
into a movement, and opening/closing movements push/pop the box stack.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ctxclf.classifiers import ClassifierSpec, TrainedModel, predict, train
from ctxclf.context import (
    Binding,
    BoxNode,
    ContextStructure,
    binding_feasible,
    local_classes,
    structure_from_dict,
    structure_to_dict,
)
from ctxclf.errors import DuplicateClassInBox, UncoveredClass
from ctxclf.features import FeatureMask, select_features


@dataclass(frozen=True)
class ContextEnsemble:
    structure: ContextStructure
    binding: Binding
    masks: dict[int, FeatureMask] = field(compare=False)  # box index -> mask
    models: dict[int, TrainedModel] = field(compare=False)
    spec: ClassifierSpec = ClassifierSpec()

    def box_by_index(self, index: int) -> BoxNode:
        for b in self.structure.root.walk():
            if b.index == index:
                return b
        raise KeyError(index)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "structure": structure_to_dict(self.structure),
            "binding": list(self.binding.secondary),
            "spec": {
                "algorithm": self.spec.algorithm,
                "num_trees": self.spec.num_trees,
                "seed": self.spec.seed,
            },
            "boxes": {
                str(i): {
                    "mask": {
                        "selected": list(self.masks[i].selected),
                        "source_dim": self.masks[i].source_dim,
                        "scores": list(self.masks[i].scores),
                    },
                    "model": self.models[i].to_dict(),
                }
                for i in self.masks
            },
        }

    @staticmethod
    def from_dict(d: dict) -> "ContextEnsemble":
        if d.get("version") != 1:
            raise ValueError(f"unsupported ensemble version {d.get('version')}")
        structure = structure_from_dict(d["structure"])
        masks, models = {}, {}
        for key, entry in d["boxes"].items():
            i = int(key)
            m = entry["mask"]
            masks[i] = FeatureMask(
                selected=tuple(m["selected"]),
                source_dim=int(m["source_dim"]),
                scores=tuple(m["scores"]),
            )
            models[i] = TrainedModel.from_dict(entry["model"])
        return ContextEnsemble(
            structure=structure,
            binding=Binding(num_classes=structure.num_classes, secondary=tuple(d["binding"])),
            masks=masks,
            models=models,
            spec=ClassifierSpec(**d["spec"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @staticmethod
    def load(path) -> "ContextEnsemble":
        with open(path) as fh:
            return ContextEnsemble.from_dict(json.load(fh))

    def describe(self) -> str:
        """Render the box tree with per-box movement/class tables."""
        lines = []

        def emit(box: BoxNode, depth: int):
            indent = "  " * depth
            if box.is_root:
                lines.append(f"{indent}box 0 (initial)")
            else:
                j = self.binding.class_of_movement(box.opener)
                name = self.structure.movement_name(box.opener)
                lines.append(f"{indent}box {box.index} (opened/closed by {name}, class {j})")
            lines.append(f"{indent}  Movement      Class")
            for m in box.member_movements():
                name = self.structure.movement_name(m)
                mark = " (+)" if any(c.opener == m for c in box.children) else ""
                lines.append(f"{indent}  {name:<12}  {self.binding.class_of_movement(m)}{mark}")
            if not box.is_root:
                name = self.structure.movement_name(box.opener)
                lines.append(
                    f"{indent}  {name:<12}  {self.binding.class_of_movement(box.opener)} (-)"
                )
            for c in box.children:
                emit(c, depth + 1)

        emit(self.structure.root, 0)
        return "\n".join(lines)


@dataclass
class MachineState:
    """Box stack of the running ensemble; the root is never popped."""

    stack: list[BoxNode]

    @property
    def current(self) -> BoxNode:
        return self.stack[-1]


@dataclass(frozen=True)
class PlainModel:
    """Context-free baseline: one global mask and one model over all classes."""

    mask: FeatureMask
    model: TrainedModel

    def predict(self, x: np.ndarray) -> int:
        return predict(self.model, self.mask.apply(x))


def train_ensemble(
    structure: ContextStructure,
    binding: Binding,
    X,
    y,
    spec: ClassifierSpec,
    feature_fraction: float = 0.5,
) -> ContextEnsemble:
    """Fit one (mask, model) pair per box on the box-restricted rows."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if not binding_feasible(structure, binding):
        raise DuplicateClassInBox("binding is infeasible for this structure")
    masks: dict[int, FeatureMask] = {}
    models: dict[int, TrainedModel] = {}
    for box in structure.root.walk():
        classes = local_classes(structure, binding, box)
        for c in classes:
            if np.sum(y == c) == 0:
                raise UncoveredClass(f"box {box.index}: class {c} absent from training data")
        rows = np.isin(y, classes)
        mask = select_features(X[rows], y[rows], fraction=feature_fraction)
        model = train(spec, mask.apply(X[rows]), y[rows])
        masks[box.index] = mask
        models[box.index] = model
    return ContextEnsemble(structure=structure, binding=binding, masks=masks, models=models, spec=spec)


def train_plain(X, y, spec: ClassifierSpec, feature_fraction: float = 0.5) -> PlainModel:
    """Context-free model over all classes, with the global MI mask."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    mask = select_features(X, y, fraction=feature_fraction)
    return PlainModel(mask=mask, model=train(spec, mask.apply(X), y))


def initial_state(ensemble: ContextEnsemble) -> MachineState:
    return MachineState(stack=[ensemble.structure.root])


def reset(state_or_ensemble) -> MachineState:
    """Return the state to the initial one (stack = [root])."""
    if isinstance(state_or_ensemble, ContextEnsemble):
        return initial_state(state_or_ensemble)
    state = state_or_ensemble
    state.stack[:] = state.stack[:1]
    return state


def step(ensemble: ContextEnsemble, state: MachineState, x) -> tuple[int, int, MachineState]:
    """Classify one feature vector in the current box and transition.

    Returns (predicted class, interpreted movement id, state). The state is
    mutated in place and also returned.
    """
    x = np.asarray(x, dtype=np.float64)
    box = state.current
    masked = ensemble.masks[box.index].apply(x)
    j = predict(ensemble.models[box.index], masked)

    if not box.is_root and ensemble.binding.class_of_movement(box.opener) == j:
        state.stack.pop()
        return j, box.opener, state
    for m in box.member_movements():
        if ensemble.binding.class_of_movement(m) == j:
            for child in box.children:
                if child.opener == m:
                    state.stack.append(child)
                    return j, m, state
            return j, m, state
    raise DuplicateClassInBox(
        f"box {box.index}: predicted class {j} has no interpretation"
    )  # unreachable when model range equals the box's class set
