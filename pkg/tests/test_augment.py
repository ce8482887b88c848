import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaitseg.augment import AugmentConfig, augment_dataset, stretch_record
from gaitseg.curve import encode_gcc
from gaitseg.records import EventKind, validate_record
from gaitseg.synthetic import SynthConfig, generate_record

from conftest import make_events, make_record


def test_config_validation():
    with pytest.raises(ValueError):
        AugmentConfig(factor_min=0.5)
    with pytest.raises(ValueError):
        AugmentConfig(factor_min=3.0, factor_max=2.0)
    with pytest.raises(ValueError):
        AugmentConfig(copies_per_record=-1)


def test_event_mapping_rounds_half_up():
    rec = make_record(make_events(("LHS", 2)), T=5)
    out = stretch_record(rec, 2.0)
    assert len(out.imu) == 10
    # 2 * 9/4 = 4.5 rounds up to 5
    assert out.events[0].index == 5


def test_factor_one_is_identity():
    rec = make_record(make_events(("LHS", 3), ("RHS", 15)), T=24, seed=4)
    out = stretch_record(rec, 1.0)
    assert np.array_equal(out.imu.samples, rec.imu.samples)
    assert out.events == rec.events


def test_constant_channel_stays_constant():
    from gaitseg.records import ImuSequence, WalkRecord

    rec = WalkRecord(
        "s0", "L", "normal",
        ImuSequence(np.full((10, 2), 2.5)), make_events(("LHS", 3)),
    )
    out = stretch_record(rec, 2.7)
    assert np.allclose(out.imu.samples, 2.5)


def test_factor_below_one_rejected():
    rec = make_record(make_events(("LHS", 3)), T=10)
    with pytest.raises(ValueError):
        stretch_record(rec, 0.99)


def test_default_augmentation_grows_five_fold():
    records = [make_record(make_events(("LHS", 3), ("RHS", 14)), T=25, seed=i) for i in range(10)]
    out = augment_dataset(records, AugmentConfig(seed=1))
    assert len(out) == 50
    assert out[:10] == records  # originals first, untouched


def test_zero_copies_returns_input():
    records = [make_record(make_events(("LHS", 3)), T=10)]
    assert augment_dataset(records, AugmentConfig(copies_per_record=0)) == records


def test_augmentation_deterministic():
    records = [make_record(make_events(("LHS", 3), ("RHS", 14)), T=25, seed=i) for i in range(4)]
    a = augment_dataset(records, AugmentConfig(seed=9))
    b = augment_dataset(records, AugmentConfig(seed=9))
    assert len(a) == len(b)
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.imu.samples, rb.imu.samples)
        assert ra.events == rb.events


def test_integer_factor_mode():
    records = [make_record(make_events(("LHS", 3)), T=10, seed=i) for i in range(6)]
    out = augment_dataset(records, AugmentConfig(integer_factors=True, seed=3))
    for copy in out[6:]:
        ratio = (len(copy.imu) ) / 10
        assert ratio == int(ratio)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(1.0, 4.0, allow_nan=False))
def test_stretch_preserves_structure(seed, factor):
    cfg = SynthConfig(num_subjects=2, records_per_subject=1, seed=seed % 10_000)
    rec = generate_record(cfg, seed % 2, 0)
    out = stretch_record(rec, factor)
    assert validate_record(out, require_training_targets=True) == []
    assert len(out.imu) == int(np.floor(len(rec.imu) * factor + 0.5))
    # event count and side order preserved, no collisions
    assert [e.kind for e in out.events] == [e.kind for e in rec.events]
    strikes_in = [e for e in rec.events if e.kind.is_heel_strike]
    strikes_out = [e for e in out.events if e.kind.is_heel_strike]
    assert len(strikes_out) == len(strikes_in)
    # spacing equals the round-mapped original indices
    scale = (len(out.imu) - 1) / (len(rec.imu) - 1)
    for e_in, e_out in zip(rec.events, out.events):
        assert e_out.index == int(np.floor(e_in.index * scale + 0.5))


def test_reencoded_curve_anchors_exact():
    rec = generate_record(SynthConfig(num_subjects=1, records_per_subject=1, seed=5), 0, 0)
    out = stretch_record(rec, 2.3)
    curve = encode_gcc(out.events, len(out.imu))
    anchor = {EventKind.LHS: 1.0, EventKind.RHS: -1.0, EventKind.TO: 0.0}
    for e in out.events:
        assert curve.values[e.index] == anchor[e.kind]
