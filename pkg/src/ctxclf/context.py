"""Box-structured context model and feasible-binding enumeration.

A context structure is a tree of boxes. The root box is always open and
covers all C classes through their primary movements (movement i binds
class i for i <= C). Every non-root box is opened by one movement of its
parent box and closed by performing that same movement again, so opener
and closer share a class. Movements C+1..2C are secondary: the class bound
to movement C+k is the k-th entry of a permutation of 1..C, and a
permutation is feasible when no box ends up holding two movements bound to
the same class.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ctxclf.errors import DuplicateClassInBox, InfeasibleStructure, StructureError


@dataclass(frozen=True)
class Movement:
    id: int
    name: str = ""


@dataclass(frozen=True)
class BoxNode:
    """One box: opener (None for the root), plain internals, nested children.

    The box is closed by performing its opening movement again, so the
    closer is implicit. ``declared_closer`` only exists to carry an
    explicit override from a structure file so validation can flag it.
    A movement may be a member of several boxes: primary movements keep
    their fixed class everywhere, which is how they constrain the
    secondary assignment of co-resident movements.
    """

    index: int
    opener: int | None
    internal_movements: tuple[int, ...]
    children: tuple["BoxNode", ...] = ()
    declared_closer: int | None = None

    @property
    def is_root(self) -> bool:
        return self.opener is None

    def member_movements(self) -> tuple[int, ...]:
        """Movements recognized inside this box, excluding the closer."""
        return self.internal_movements + tuple(c.opener for c in self.children)

    @property
    def movement_count(self) -> int:
        """M_l: member movements plus the closer (root has no closer)."""
        return len(self.member_movements()) + (0 if self.is_root else 1)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass(frozen=True)
class ContextStructure:
    num_classes: int
    movements: tuple[Movement, ...]
    root: BoxNode

    @property
    def num_movements(self) -> int:
        return len(self.movements)

    @property
    def num_boxes(self) -> int:
        """L: boxes beyond the root."""
        return sum(1 for _ in self.root.walk()) - 1

    def boxes(self) -> list[BoxNode]:
        """All boxes in pre-order, root first."""
        return list(self.root.walk())

    def box_order(self, box: BoxNode) -> int:
        for depth, b, _ in self._walk_depth():
            if b is box:
                return depth
        raise StructureError(f"box {box.index} not part of this structure")

    def _walk_depth(self):
        stack = [(0, self.root, None)]
        while stack:
            depth, box, parent = stack.pop()
            yield depth, box, parent
            for c in reversed(box.children):
                stack.append((depth + 1, c, box))

    def parent_of(self, box: BoxNode) -> BoxNode | None:
        for _, b, parent in self._walk_depth():
            if b is box:
                return parent
        raise StructureError(f"box {box.index} not part of this structure")

    def movement_name(self, movement_id: int) -> str:
        for m in self.movements:
            if m.id == movement_id:
                return m.name
        return f"m{movement_id}"


@dataclass(frozen=True)
class Binding:
    """Movement-to-class assignment: fixed primary map plus a secondary permutation.

    ``secondary[k-1]`` is the class bound to movement C+k.
    """

    num_classes: int
    secondary: tuple[int, ...]

    def __post_init__(self):
        sec = tuple(int(c) for c in self.secondary)
        if sorted(sec) != list(range(1, self.num_classes + 1)):
            raise ValueError(f"secondary assignment {sec} is not a permutation of 1..{self.num_classes}")
        object.__setattr__(self, "secondary", sec)

    def class_of_movement(self, movement_id: int) -> int:
        if 1 <= movement_id <= self.num_classes:
            return movement_id
        k = movement_id - self.num_classes
        if not 1 <= k <= self.num_classes:
            raise ValueError(f"movement id {movement_id} out of range")
        return self.secondary[k - 1]


@dataclass(frozen=True)
class ConstraintTable:
    """Per-secondary-movement permitted classes plus per-box distinctness groups.

    ``permitted[k]`` is the sorted class tuple allowed for movement C+k.
    Each distinctness group lists the secondary indices k that share a box
    and must therefore receive mutually distinct classes.
    """

    num_classes: int
    permitted: dict[int, tuple[int, ...]] = field(compare=False)
    groups: tuple[tuple[int, ...], ...] = ()


def load_structure(path) -> ContextStructure:
    """Read a structure JSON file; raises StructureError on malformed input."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise StructureError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}") from e
    return structure_from_dict(doc)


def structure_from_dict(doc: dict) -> ContextStructure:
    try:
        num_classes = int(doc["num_classes"])
        movements = tuple(
            Movement(id=int(m["id"]), name=str(m.get("name", ""))) for m in doc["movements"]
        )
        box_docs = {int(b["id"]): b for b in doc["boxes"]}
    except (KeyError, TypeError) as e:
        raise StructureError(f"missing or malformed structure field: {e}") from e
    if 0 not in box_docs:
        raise StructureError("structure must contain the root box with id 0")

    children_of: dict[int, list[int]] = {bid: [] for bid in box_docs}
    for bid, b in box_docs.items():
        parent = b.get("parent")
        if bid == 0:
            if parent is not None:
                raise StructureError("root box must have parent null")
            continue
        if parent is None or int(parent) not in box_docs:
            raise StructureError(f"box {bid}: unknown parent {parent}")
        children_of[int(parent)].append(bid)

    seen: set[int] = set()

    def build(bid: int) -> BoxNode:
        if bid in seen:
            raise StructureError(f"box {bid} appears twice in the tree")
        seen.add(bid)
        b = box_docs[bid]
        opener = b.get("opens_with_movement")
        if bid == 0 and opener is not None:
            raise StructureError("root box must not declare an opening movement")
        if bid != 0 and opener is None:
            raise StructureError(f"box {bid}: missing opens_with_movement")
        closer = b.get("closes_with_movement")
        return BoxNode(
            index=bid,
            opener=None if opener is None else int(opener),
            internal_movements=tuple(int(m) for m in b.get("internal_movements", [])),
            children=tuple(build(c) for c in sorted(children_of[bid])),
            declared_closer=None if closer is None else int(closer),
        )

    root = build(0)
    if seen != set(box_docs):
        raise StructureError(f"boxes unreachable from root: {sorted(set(box_docs) - seen)}")
    return ContextStructure(num_classes=num_classes, movements=movements, root=root)


def structure_to_dict(s: ContextStructure) -> dict:
    boxes = []

    def emit(box: BoxNode, parent: int | None):
        entry = {
            "id": box.index,
            "parent": parent,
            "opens_with_movement": box.opener,
            "internal_movements": list(box.internal_movements),
        }
        boxes.append(entry)
        for c in box.children:
            emit(c, box.index)

    emit(s.root, None)
    return {
        "num_classes": s.num_classes,
        "movements": [{"id": m.id, "name": m.name} for m in s.movements],
        "boxes": boxes,
    }


def validate_structure(s: ContextStructure) -> list[str]:
    """Check the structural assumptions; returns violations, [] when ok."""
    violations = []
    C = s.num_classes
    ids = sorted(m.id for m in s.movements)
    if ids != list(range(1, 2 * C + 1)):
        violations.append(f"movement ids must be exactly 1..{2 * C}, got {ids}")

    placed: set[int] = set()
    for box in s.root.walk():
        placed.update(box.member_movements())
    missing = set(range(1, 2 * C + 1)) - placed
    if missing:
        violations.append(f"movements not placed in any box: {sorted(missing)}")

    root_members = set(s.root.member_movements())
    if root_members != set(range(1, C + 1)):
        violations.append(
            f"root box must hold exactly the primary movements 1..{C}, got {sorted(root_members)}"
        )

    for box in s.root.walk():
        members = box.member_movements()
        if len(members) != len(set(members)):
            violations.append(f"box {box.index} lists a movement twice")
        openers = [c.opener for c in box.children]
        if len(openers) != len(set(openers)):
            violations.append(f"box {box.index} has two nested boxes with the same opener")
        if box.declared_closer is not None and box.declared_closer != box.opener:
            violations.append(
                f"box {box.index}: closing movement {box.declared_closer} cannot share a class "
                f"with opening movement {box.opener}"
            )
        if box.movement_count > C:
            violations.append(
                f"box {box.index} holds {box.movement_count} movements, more than C={C}"
            )
        primary = [m for m in members if m <= C]
        if not box.is_root and box.opener is not None and box.opener <= C:
            primary.append(box.opener)  # closer carries the opener's class
        if len(primary) != len(set(primary)):
            violations.append(
                f"box {box.index} binds a class to two movements under the primary map"
            )
    return violations


def local_classes(s: ContextStructure, binding: Binding, box: BoxNode) -> tuple[int, ...]:
    """The distinct classes recognized in one box, closer class first."""
    classes = []
    if not box.is_root:
        classes.append(binding.class_of_movement(box.opener))
    for m in box.member_movements():
        classes.append(binding.class_of_movement(m))
    if len(set(classes)) != len(classes):
        raise DuplicateClassInBox(f"box {box.index}: duplicate classes {classes}")
    return tuple(classes)


def binding_feasible(s: ContextStructure, binding: Binding) -> bool:
    """Direct per-box distinctness walk, independent of the enumerator."""
    try:
        for box in s.root.walk():
            local_classes(s, binding, box)
    except DuplicateClassInBox:
        return False
    return True


def derive_constraints(s: ContextStructure) -> ConstraintTable:
    """Permitted-class sets for every secondary movement, plus box groups."""
    C = s.num_classes
    permitted = {k: set(range(1, C + 1)) for k in range(1, C + 1)}
    groups = []
    for box in s.root.walk():
        slot_movements = list(box.member_movements())
        if not box.is_root:
            slot_movements.append(box.opener)
        fixed = {m for m in slot_movements if m <= C}
        secondary = sorted({m - C for m in slot_movements if m > C})
        for k in secondary:
            permitted[k] -= fixed
        if len(secondary) > 1:
            groups.append(tuple(secondary))
    for k in range(1, C + 1):
        if not permitted[k]:
            raise InfeasibleStructure(
                f"movement {C + k} has no permitted class; the box arrangement is infeasible"
            )
    return ConstraintTable(
        num_classes=C,
        permitted={k: tuple(sorted(v)) for k, v in permitted.items()},
        groups=tuple(groups),
    )


def enumerate_feasible(table: ConstraintTable, s: ContextStructure) -> list[Binding]:
    """All feasible secondary permutations, in lexicographic order.

    Iterative Cartesian-product construction over movements C+1..C+C:
    partial tuples are pruned as soon as they reuse a class or violate a
    per-box distinctness group. The result may be empty, which signals an
    infeasible box arrangement.
    """
    C = table.num_classes
    groups_touching = {k: [g for g in table.groups if k in g] for k in range(1, C + 1)}
    out: list[Binding] = []
    assignment = [0] * (C + 1)  # 1-based
    used = [False] * (C + 1)

    def extend(k: int):
        if k > C:
            out.append(Binding(num_classes=C, secondary=tuple(assignment[1:])))
            return
        for c in table.permitted[k]:
            if used[c]:
                continue
            ok = True
            for g in groups_touching[k]:
                for other in g:
                    if other != k and assignment[other] == c:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            assignment[k] = c
            used[c] = True
            extend(k + 1)
            used[c] = False
            assignment[k] = 0

    extend(1)
    return out


def brute_force_feasible(s: ContextStructure) -> list[Binding]:
    """Oracle: filter all C! permutations through the per-box walk."""
    C = s.num_classes
    out = []
    for perm in itertools.permutations(range(1, C + 1)):
        b = Binding(num_classes=C, secondary=perm)
        if binding_feasible(s, b):
            out.append(b)
    return out


def combinations_cardinality(C: int, M_l: int) -> int:
    """Candidate count when one class is fixed and M_l-1 more are chosen."""
    if not 1 <= M_l <= C:
        raise ValueError(f"M_l must be in 1..{C}, got {M_l}")
    return math.comb(C - 1, M_l - 1)
