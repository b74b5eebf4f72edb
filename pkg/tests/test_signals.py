import numpy as np
import pytest

from ctxclf.errors import NoRecords, RaggedRecord, TooFewPerClass, WindowTooLong
from ctxclf.signals import (
    SignalRecord,
    SignalSet,
    load_signalset,
    save_signalset,
    segment,
    stratified_folds,
)
from conftest import toy_signalset


def test_record_validation():
    with pytest.raises(RaggedRecord):
        SignalRecord("r", np.zeros((2, 8)), 1000, 1)  # too few samples
    with pytest.raises(RaggedRecord):
        SignalRecord("r", np.zeros(32), 1000, 1)  # not 2-D
    with pytest.raises(ValueError):
        SignalRecord("r", np.zeros((1, 32)), 0, 1)


def test_set_validation():
    r = SignalRecord("a", np.zeros((2, 32)), 1000, 1)
    with pytest.raises(NoRecords):
        SignalSet(records=(), num_classes=1, num_channels=2, sample_rate_hz=1000)
    with pytest.raises(NoRecords):
        # class 2 has no records
        SignalSet(records=(r,), num_classes=2, num_channels=2, sample_rate_hz=1000)
    with pytest.raises(RaggedRecord):
        SignalSet(records=(r,), num_classes=1, num_channels=3, sample_rate_hz=1000)
    with pytest.raises(ValueError):
        bad = SignalRecord("b", np.zeros((2, 32)), 500, 1)
        SignalSet(records=(r, bad), num_classes=1, num_channels=2, sample_rate_hz=1000)


def test_save_load_round_trip(tmp_path):
    sset = toy_signalset(num_classes=2, records_per_class=3, samples=40)
    save_signalset(sset, tmp_path / "s")
    back = load_signalset(tmp_path / "s")
    assert back.num_classes == sset.num_classes
    assert back.num_channels == sset.num_channels
    assert back.sample_rate_hz == sset.sample_rate_hz
    assert len(back.records) == len(sset.records)
    orig = {r.record_id: r for r in sset.records}
    for r in back.records:
        rid = r.record_id.rsplit("_", 1)[0]
        assert np.array_equal(r.channels, orig[rid].channels)
        assert r.class_label == orig[rid].class_label


def test_load_missing_and_malformed(tmp_path):
    with pytest.raises(NoRecords):
        load_signalset(tmp_path / "nope")
    root = tmp_path / "s"
    (root / "records").mkdir(parents=True)
    (root / "meta.json").write_text(
        '{"num_classes": 1, "num_channels": 2, "sample_rate_hz": 1000}'
    )
    with pytest.raises(NoRecords):
        load_signalset(root)  # no CSVs
    bad = root / "records" / "a_1.csv"
    bad.write_text("c1,c2\n1.0\n")  # ragged row
    with pytest.raises(RaggedRecord):
        load_signalset(root)


def test_segment_windows_and_errors():
    sset = toy_signalset(num_classes=2, records_per_class=2, samples=100)
    seg = segment(sset, window_ms=32)  # 32 samples at 1 kHz
    # floor(100 / 32) = 3 windows per record
    assert len(seg.records) == 3 * len(sset.records)
    assert all(r.num_samples == 32 for r in seg.records)
    with pytest.raises(WindowTooLong):
        segment(sset, window_ms=200)
    with pytest.raises(WindowTooLong):
        segment(sset, window_ms=8)  # below the sample minimum


def test_stratified_folds_balance_and_determinism():
    sset = toy_signalset(num_classes=3, records_per_class=10)
    plan = stratified_folds(sset, 4, seed=5)
    for cls in range(1, 4):
        ids = [r.record_id for r in sset.records if r.class_label == cls]
        counts = [sum(1 for i in ids if plan.fold_of(i) == f) for f in range(4)]
        assert max(counts) - min(counts) <= 1
    again = stratified_folds(sset, 4, seed=5)
    assert plan.assignments == again.assignments
    other = stratified_folds(sset, 4, seed=6)
    assert plan.assignments != other.assignments


def test_split_partitions_everything():
    sset = toy_signalset(num_classes=2, records_per_class=8)
    plan = stratified_folds(sset, 4, seed=0)
    seen = set()
    for fold in range(4):
        train, test = plan.split(sset, fold)
        assert sorted(train + test) == list(range(len(sset.records)))
        seen.update(test)
    assert seen == set(range(len(sset.records)))


def test_stratified_folds_too_few():
    sset = toy_signalset(num_classes=2, records_per_class=3)
    with pytest.raises(TooFewPerClass):
        stratified_folds(sset, 4, seed=0)
    with pytest.raises(ValueError):
        stratified_folds(sset, 1, seed=0)
