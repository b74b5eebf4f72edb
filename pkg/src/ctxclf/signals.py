"""Loading, windowing and fold-splitting of labelled multichannel records.

On-disk layout of a signalset directory::

    meta.json                  {"num_classes": C, "num_channels": N, "sample_rate_hz": fs}
    records/<id>_<label>.csv   header c1,...,cN, one row per time sample

All types are immutable after construction and safe to share read-only.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ctxclf.errors import NoRecords, RaggedRecord, TooFewPerClass, WindowTooLong
from ctxclf.rng import derive_rng

MIN_SAMPLES = 16


@dataclass(frozen=True)
class SignalRecord:
    """One fixed-length multichannel window with a class label."""

    record_id: str
    channels: np.ndarray  # (num_channels, num_samples), float64
    sample_rate_hz: int
    class_label: int

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.float64)
        if ch.ndim != 2:
            raise RaggedRecord(f"record {self.record_id}: channels must be 2-D, got {ch.ndim}-D")
        if ch.shape[1] < MIN_SAMPLES:
            raise RaggedRecord(
                f"record {self.record_id}: {ch.shape[1]} samples, need >= {MIN_SAMPLES}"
            )
        if self.sample_rate_hz <= 0:
            raise ValueError(f"record {self.record_id}: sample_rate_hz must be positive")
        object.__setattr__(self, "channels", ch)

    @property
    def num_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def num_samples(self) -> int:
        return self.channels.shape[1]


@dataclass(frozen=True)
class SignalSet:
    """A labelled collection of records sharing channel count and rate."""

    records: tuple[SignalRecord, ...]
    num_classes: int
    num_channels: int
    sample_rate_hz: int

    def __post_init__(self):
        if not self.records:
            raise NoRecords("signal set contains no records")
        for r in self.records:
            if r.num_channels != self.num_channels:
                raise RaggedRecord(
                    f"record {r.record_id}: {r.num_channels} channels, expected {self.num_channels}"
                )
            if r.sample_rate_hz != self.sample_rate_hz:
                raise ValueError(f"record {r.record_id}: sample rate differs from set")
            if not 1 <= r.class_label <= self.num_classes:
                raise ValueError(
                    f"record {r.record_id}: label {r.class_label} outside 1..{self.num_classes}"
                )
        missing = set(range(1, self.num_classes + 1)) - {r.class_label for r in self.records}
        if missing:
            raise NoRecords(f"classes without records: {sorted(missing)}")

    @property
    def class_counts(self) -> dict[int, int]:
        counts = {c: 0 for c in range(1, self.num_classes + 1)}
        for r in self.records:
            counts[r.class_label] += 1
        return counts

    def labels(self) -> np.ndarray:
        return np.array([r.class_label for r in self.records], dtype=np.int64)


@dataclass(frozen=True)
class FoldPlan:
    """Stratified assignment of record ids to k folds."""

    k: int
    assignments: dict[str, int] = field(compare=False)
    seed: int = 0

    def fold_of(self, record_id: str) -> int:
        return self.assignments[record_id]

    def split(self, sset: SignalSet, fold: int) -> tuple[list[int], list[int]]:
        """Indices of (train, test) records for one held-out fold."""
        train, test = [], []
        for i, r in enumerate(sset.records):
            (test if self.assignments[r.record_id] == fold else train).append(i)
        return train, test


def load_signalset(path) -> SignalSet:
    """Read a signalset directory into memory, validating all invariants."""
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise NoRecords(f"missing metadata file {meta_path}")
    meta = json.loads(meta_path.read_text())
    num_classes = int(meta["num_classes"])
    num_channels = int(meta["num_channels"])
    sample_rate = int(meta["sample_rate_hz"])

    rec_dir = root / "records"
    csv_paths = sorted(rec_dir.glob("*.csv")) if rec_dir.is_dir() else []
    if not csv_paths:
        raise NoRecords(f"no record CSVs under {rec_dir}")

    records = []
    for p in csv_paths:
        stem = p.stem
        rid, _, label_str = stem.rpartition("_")
        if not rid or not label_str.isdigit():
            raise RaggedRecord(f"record file {p.name}: expected <id>_<label>.csv")
        label = int(label_str)
        if not 1 <= label <= num_classes:
            raise ValueError(f"record {stem}: label {label} outside 1..{num_classes}")
        rows = _read_csv_rows(p, num_channels)
        records.append(
            SignalRecord(
                record_id=stem,
                channels=rows.T,
                sample_rate_hz=sample_rate,
                class_label=label,
            )
        )
    return SignalSet(
        records=tuple(records),
        num_classes=num_classes,
        num_channels=num_channels,
        sample_rate_hz=sample_rate,
    )


def _read_csv_rows(path: Path, num_channels: int) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != num_channels:
            raise RaggedRecord(
                f"record {path.stem}: {0 if header is None else len(header)} columns, "
                f"expected {num_channels}"
            )
        data = []
        for row in reader:
            if len(row) != num_channels:
                raise RaggedRecord(f"record {path.stem}: ragged row with {len(row)} columns")
            data.append([float(v) for v in row])
    return np.asarray(data, dtype=np.float64)


def save_signalset(sset: SignalSet, path) -> None:
    """Write a SignalSet back to the directory layout read by load_signalset."""
    root = Path(path)
    (root / "records").mkdir(parents=True, exist_ok=True)
    meta = {
        "num_classes": sset.num_classes,
        "num_channels": sset.num_channels,
        "sample_rate_hz": sset.sample_rate_hz,
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=2))
    header = ",".join(f"c{i + 1}" for i in range(sset.num_channels))
    for r in sset.records:
        lines = [header]
        for row in r.channels.T:
            lines.append(",".join(repr(float(v)) for v in row))
        out = root / "records" / f"{r.record_id}_{r.class_label}.csv"
        # record_id already carries the label suffix when round-tripping
        if r.record_id.endswith(f"_{r.class_label}"):
            out = root / "records" / f"{r.record_id}.csv"
        out.write_text("\n".join(lines) + "\n")


def segment(sset: SignalSet, window_ms: int) -> SignalSet:
    """Split every record into non-overlapping windows; remainder dropped."""
    window = (window_ms * sset.sample_rate_hz) // 1000
    if window < MIN_SAMPLES:
        raise WindowTooLong(f"window of {window} samples is below the {MIN_SAMPLES}-sample minimum")
    shortest = min(r.num_samples for r in sset.records)
    if window > shortest:
        raise WindowTooLong(f"window of {window} samples exceeds shortest record ({shortest})")
    out = []
    for r in sset.records:
        n_windows = r.num_samples // window
        for w in range(n_windows):
            out.append(
                SignalRecord(
                    record_id=f"{r.record_id}w{w}",
                    channels=r.channels[:, w * window : (w + 1) * window],
                    sample_rate_hz=r.sample_rate_hz,
                    class_label=r.class_label,
                )
            )
    return SignalSet(
        records=tuple(out),
        num_classes=sset.num_classes,
        num_channels=sset.num_channels,
        sample_rate_hz=sset.sample_rate_hz,
    )


def stratified_folds(sset: SignalSet, k: int, seed: int) -> FoldPlan:
    """Assign records to k folds with per-class counts differing by <= 1."""
    if k < 2:
        raise ValueError("k must be >= 2")
    for cls, count in sset.class_counts.items():
        if count < k:
            raise TooFewPerClass(f"class {cls} has {count} records, needs >= {k}")
    rng = derive_rng(seed, "stratified_folds", k)
    assignments: dict[str, int] = {}
    for cls in range(1, sset.num_classes + 1):
        ids = sorted(r.record_id for r in sset.records if r.class_label == cls)
        order = rng.permutation(len(ids))
        for pos, idx in enumerate(order):
            assignments[ids[idx]] = pos % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)
