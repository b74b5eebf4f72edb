import numpy as np
import pytest

from ctxclf.context import ContextStructure, structure_from_dict, validate_structure
from ctxclf.errors import InfeasibleStructure
from ctxclf.signals import SignalRecord, SignalSet
from ctxclf.structures import (
    eight_class_grips,
    five_class_example,
    flat_structure,
    six_class_nested,
)


def make_structure(num_classes: int, boxes: list[tuple]) -> ContextStructure:
    """Build a structure from (id, parent, opener, internals) tuples."""
    return structure_from_dict(
        {
            "num_classes": num_classes,
            "movements": [{"id": i} for i in range(1, 2 * num_classes + 1)],
            "boxes": [
                {
                    "id": bid,
                    "parent": parent,
                    "opens_with_movement": opener,
                    "internal_movements": internals,
                }
                for bid, parent, opener, internals in boxes
            ],
        }
    )


def random_structure(rng: np.random.Generator, num_classes: int) -> ContextStructure:
    """A random valid structure; retries until validation passes."""
    C = num_classes
    for _ in range(1000):
        # per box: parent, opener, and the set of member movements (members
        # promoted to child openers are tracked separately)
        boxes = {0: {"parent": None, "opener": None}}
        members = {0: set(range(1, C + 1))}
        opener_used: dict[int, set] = {0: set()}
        next_id = 1
        secondaries = list(range(C + 1, 2 * C + 1))
        rng.shuffle(secondaries)
        attempts = 0
        while secondaries and attempts < 200:
            attempts += 1
            # open a new box from an unused member of a random existing box
            bid = int(rng.choice(list(boxes)))
            candidates = sorted(members[bid] - opener_used[bid])
            if not candidates:
                continue
            opener = int(rng.choice(candidates))
            take = min(int(rng.integers(1, len(secondaries) + 1)), max(C - 2, 1))
            internals = {secondaries.pop() for _ in range(min(take, len(secondaries)))}
            if not internals:
                continue
            # optionally re-list primaries to constrain the secondaries
            spare = C - 1 - len(internals)
            if spare > 0 and rng.random() < 0.5:
                pool = [p for p in range(1, C + 1) if p != opener]
                extra = rng.choice(pool, size=int(rng.integers(0, spare + 1)), replace=False)
                internals |= {int(p) for p in extra}
            opener_used[bid].add(opener)
            boxes[next_id] = {"parent": bid, "opener": opener}
            members[next_id] = internals
            opener_used[next_id] = set()
            next_id += 1
        if secondaries:
            continue
        doc = {
            "num_classes": C,
            "movements": [{"id": i} for i in range(1, 2 * C + 1)],
            "boxes": [
                {
                    "id": bid,
                    "parent": b["parent"],
                    "opens_with_movement": b["opener"],
                    # child openers are implied members, not plain internals
                    "internal_movements": sorted(members[bid] - opener_used[bid]),
                }
                for bid, b in boxes.items()
            ],
        }
        s = structure_from_dict(doc)
        if not validate_structure(s):
            return s
    raise RuntimeError("failed to generate a valid random structure")


@pytest.fixture(scope="session")
def canonical_structures():
    return {
        "five": five_class_example(),
        "six": six_class_nested(),
        "eight": eight_class_grips(),
        "flat4": flat_structure(4),
        "flat5": flat_structure(5),
    }


def toy_signalset(num_classes=3, records_per_class=6, channels=2, samples=64, seed=0):
    """Small deterministic set with class-dependent offsets."""
    rng = np.random.default_rng(seed)
    records = []
    for cls in range(1, num_classes + 1):
        for r in range(records_per_class):
            base = rng.standard_normal((channels, samples))
            base[0] += np.sin(np.linspace(0, 2 + cls, samples)) * cls
            records.append(
                SignalRecord(
                    record_id=f"c{cls}r{r}",
                    channels=base,
                    sample_rate_hz=1000,
                    class_label=cls,
                )
            )
    return SignalSet(
        records=tuple(records),
        num_classes=num_classes,
        num_channels=channels,
        sample_rate_hz=1000,
    )
