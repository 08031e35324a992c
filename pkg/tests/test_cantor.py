import math

import pytest
from hypothesis import given, settings, strategies as st

from finehull.cantor import (CRule, build_cantor_spec, cantor_length,
                             condition_sum, distance_to_gaps, spec_from_json,
                             spec_to_json, sum_gap_lengths)
from finehull.errors import GapOverflow, PlacementFailure, PreconditionFailure

RULE5 = CRule("affine", slope=5.0, offset=0.0)
RULEF = CRule("factorial", shift=2)


def spec5():
    return build_cantor_spec(0.0, 1.0, RULE5, N=16)


def test_rule_validation():
    with pytest.raises(PreconditionFailure):
        CRule("affine", slope=0.0, offset=1.0)
    with pytest.raises(PreconditionFailure):
        CRule("factorial", shift=-1)
    with pytest.raises(PreconditionFailure):
        CRule("hyperbolic")


def test_rule_values():
    assert RULE5.jcj(3) == 45.0
    assert RULEF.jcj(1) == 6.0
    assert RULEF.jcj(2) == 48.0
    assert RULEF.jcj(3) == 360.0
    ex = CRule("explicit", values=(1.0, 2.0, 4.0))
    assert ex.jcj(2) == 4.0
    assert ex.max_defined_index == 3
    with pytest.raises(PreconditionFailure):
        ex.value(4)


def test_factorial_rule_saturates_instead_of_overflowing():
    assert RULEF.jcj(200) == math.inf
    assert 1.0 / RULEF.jcj(200) == 0.0


def test_condition_sum_factorial_oracle():
    cs = condition_sum(RULEF, J=10)
    assert cs.partial == pytest.approx(0.19066924725253923, rel=1e-15)
    assert cs.certified and cs.satisfied is True
    assert cs.tail_bound < 1e-10


def test_condition_sum_affine_brackets_series_value():
    # sum of 1/(5 j^2) is pi^2/30; the certified total must sit above it
    cs = condition_sum(RULE5)
    exact = math.pi ** 2 / 30.0
    assert cs.partial < exact < cs.total
    assert cs.total == pytest.approx(exact, abs=1e-8)
    assert cs.satisfied is True


def test_condition_sum_factorial_deep_truncation():
    # terms underflow near index 170; the loop must stop, not overflow
    cs = condition_sum(RULEF)
    assert cs.certified
    assert cs.total < 0.25


def test_first_gap_is_centered_with_exact_log_length():
    s = spec5()
    g = s.gap(1)
    assert g.center == 0.5
    assert g.log_length == -5.0
    assert g.length == pytest.approx(0.006737946999085467, rel=1e-16)
    assert g.a == pytest.approx(0.5 - g.length / 2.0)


def test_bisect_placement_oracle():
    s = spec5()
    assert s.gap(2).center == pytest.approx(0.7516844867497714, rel=1e-15)
    assert s.gap(3).center == pytest.approx(0.24831551325022863, rel=1e-15)


def test_deeper_build_extends_shallower():
    shallow = build_cantor_spec(0.0, 1.0, RULE5, N=4)
    assert spec5().gaps[:4] == shallow.gaps


def test_length_bookkeeping():
    s = spec5()
    assert cantor_length(s) == pytest.approx(0.9932620509397609, rel=1e-15)
    assert cantor_length(s, 1) == 1.0 - math.exp(-5.0)
    assert sum_gap_lengths(s, 0) == 0.0
    with pytest.raises(PreconditionFailure):
        sum_gap_lengths(s, 17)


def test_underflowed_gap_has_zero_width_but_exact_log():
    s = build_cantor_spec(0.0, 1.0, RULEF, N=4)
    g = s.gap(4)
    assert g.log_length == -4.0 * RULEF.value(4)
    assert g.a == g.b == g.center


def test_distance_to_gaps():
    # the root segment participates, so only off-interval points count
    s = spec5()
    g = s.gap(1)
    assert distance_to_gaps(s, complex(g.center, 0.0), 1) == 0.0
    assert distance_to_gaps(s, complex(-0.5, 0.0), 1) == 0.5
    assert distance_to_gaps(s, complex(g.center, 2.0), 1) == \
        pytest.approx(2.0, rel=1e-9)


def test_gap_overflow_and_placement_failure():
    with pytest.raises(GapOverflow):
        build_cantor_spec(0.0, 1.0,
                          CRule("explicit", values=(0.001, 0.002)), N=2)
    with pytest.raises(PlacementFailure):
        build_cantor_spec(0.0, 1.0, CRule("explicit", values=(0.2, 0.9)),
                          N=2)


def test_json_roundtrip():
    s = spec5()
    assert spec_from_json(spec_to_json(s)) == s
    ex = build_cantor_spec(-1.0, 3.0, CRule("explicit", values=(2.0, 5.0)),
                           N=2)
    assert spec_from_json(spec_to_json(ex)) == ex


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 6.0), st.floats(0.0, 3.0), st.integers(1, 10))
def test_construction_invariants(slope, offset, n):
    rule = CRule("affine", slope=slope, offset=offset)
    s = build_cantor_spec(0.0, 1.0, rule, N=n)
    assert len(s.gaps) == n
    assert len(s.remaining) == n + 1
    spans = sorted([(g.a, g.b) for g in s.gaps] + list(s.remaining))
    # gaps and pieces tile the root interval without overlap
    assert spans[0][0] == 0.0 and spans[-1][1] == 1.0
    for (_, hi), (lo, _) in zip(spans, spans[1:]):
        assert hi == pytest.approx(lo, abs=1e-12)
    assert all(hi > lo for lo, hi in s.remaining)
    assert sum_gap_lengths(s) < s.root_length
