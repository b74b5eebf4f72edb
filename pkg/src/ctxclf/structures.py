"""Ready-made context structures used by the demos and tests.

Movement ids 1..C are the primary meanings of the classes; C+1..2C carry
the secondary meanings assigned by the optimized permutation. Boxes may
re-list primary movements as internals, which narrows the permitted
classes of co-resident secondary movements.
"""

from __future__ import annotations

from ctxclf.context import ContextStructure, structure_from_dict

GRIP_NAMES_16 = (
    "pronation", "supination", "oblique grip", "hook grip",
    "spherical grip", "cylindrical grip", "precision grip", "key grip",
    "wrist flexion", "wrist extension", "index finger flexion", "ring finger flexion",
    "finger point", "mouse grip", "lateral grip", "platform grip",
)


def _build(num_classes: int, boxes: list[tuple], names: tuple[str, ...] | None = None) -> ContextStructure:
    movements = [
        {"id": i, "name": names[i - 1] if names else f"m{i}"}
        for i in range(1, 2 * num_classes + 1)
    ]
    return structure_from_dict(
        {
            "num_classes": num_classes,
            "movements": movements,
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


def five_class_example() -> ContextStructure:
    """C=5, M=10 structure with exactly 12 feasible secondary bindings.

    Box 1 (opened by m3) re-lists the primary movements m4 and m5, so its
    two secondary members can only take classes 1 or 2; box 2 (opened by
    m1) holds the remaining three secondary movements.
    """
    return _build(
        5,
        [
            (0, None, None, [2, 4, 5]),
            (1, 0, 3, [4, 5, 6, 7]),
            (2, 0, 1, [8, 9, 10]),
        ],
    )


def six_class_nested() -> ContextStructure:
    """C=6, M=12 tree with a second-order box; 8 feasible bindings."""
    return _build(
        6,
        [
            (0, None, None, [2, 4, 5, 6]),
            (1, 0, 1, [4, 5, 6, 8]),
            (2, 1, 7, [9, 10]),
            (3, 0, 3, [5, 6, 11, 12]),
        ],
    )


def eight_class_grips() -> ContextStructure:
    """C=8, M=16 structure with named grip movements and two nested boxes."""
    return _build(
        8,
        [
            (0, None, None, [2, 4, 6, 7, 8]),
            (1, 0, 1, [4, 6, 10]),
            (2, 1, 9, [11]),
            (3, 0, 3, [13]),
            (4, 3, 12, [2, 14]),
            (5, 0, 5, [15, 16]),
        ],
        names=GRIP_NAMES_16,
    )


def flat_structure(num_classes: int) -> ContextStructure:
    """Degenerate root-only structure over the primary movements.

    Secondary movements each sit alone in a box opened by their primary
    counterpart, which keeps M = 2C while leaving the root flat.
    """
    boxes: list[tuple] = [(0, None, None, [])]
    for c in range(1, num_classes + 1):
        boxes.append((c, 0, c, [num_classes + c]))
    return _build(num_classes, boxes)
