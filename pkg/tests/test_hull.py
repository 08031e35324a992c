import math

import pytest
from hypothesis import given, settings, strategies as st

from finehull.cantor import CRule, build_cantor_spec
from finehull.errors import (DomainViolation, NoValidWeights, PoleHit,
                             PreconditionFailure)
from finehull.hull import (build_weights, eval_v, eval_v_on_graph,
                           fiber_scan, graph_depth_bound, grid_report,
                           grid_rows, make_hull_spec, v_n)
from finehull.product import eval_partial_product

RULE5 = CRule("affine", slope=5.0, offset=0.0)
RULEF = CRule("factorial", shift=2)
SPEC5 = build_cantor_spec(0.0, 1.0, RULE5, N=16)
SPECF = build_cantor_spec(0.0, 1.0, RULEF, N=16)
WRECT = (-1.5, 1.5, -1.5, 1.5)


def test_flat_head_weights():
    ws = build_weights(SPECF, 8)
    assert ws.e == (1.0,) * 8
    assert ws.sum_finite and ws.ratio_divergent
    deep = build_weights(RULEF, 32)
    assert deep.e[31] == 256.0 / 1024.0
    assert sum(deep.e) <= deep.sum_bound


def test_affine_rules_reject_strict_weights():
    with pytest.raises(NoValidWeights):
        build_weights(SPEC5, 8)
    ws = build_weights(SPEC5, 8, strict=False)
    assert not ws.ratio_divergent
    assert build_weights(SPEC5, 1).sum_finite  # M = 1 stays admissible


def test_quadratic_scheme():
    ws = build_weights(RULEF, 4, scheme="quadratic")
    assert ws.e == (1.0, 0.25, 1.0 / 9.0, 0.0625)
    assert ws.sum_bound == pytest.approx(math.pi ** 2 / 6.0)


def test_v_n_vanishing_on_graph():
    # exact cancellation gives -inf; a float graph point only reaches
    # the rounding floor of the polynomial evaluation
    z = 2.0 + 0.0j
    assert v_n(SPECF, 0, z, 0.5) == float("-inf")
    w = eval_partial_product(SPECF, 3, z).to_complex()
    assert v_n(SPECF, 3, z, w) < -30.0
    assert v_n(SPECF, 3, z, w + 1.0) > 0.0


def test_graph_depth_bound_oracles():
    for M, want in ((4, 15.992868818705759), (6, 26.042838447673542),
                    (8, 37.944623865207255)):
        hps = make_hull_spec(SPECF, M)
        assert graph_depth_bound(hps) == pytest.approx(want, rel=1e-14)


def test_eval_v_on_graph_matches_pointwise_floor_sum():
    hps = make_hull_spec(SPECF, 6)
    z = 2.0 + 0.0j
    w = eval_partial_product(SPECF, 6, z).to_complex()
    assert eval_v_on_graph(hps, z) <= eval_v(hps, z, w) + 1e-12


def test_fiber_scan_two_dips_at_the_graph_roots():
    hps = make_hull_spec(SPECF, 8)
    grid = fiber_scan(hps, 2.0 + 0.0j, WRECT, 128, sq=True, delta=20.0)
    root = eval_partial_product(SPECF, 8, 2.0 + 0.0j).sqrt()
    assert len(grid.dips) == 2
    assert {d.w for d in grid.dips} == \
        {root.to_complex(), (-root).to_complex()}
    cell = math.hypot(3.0 / 127.0, 3.0 / 127.0)
    for d in grid.dips:
        assert min(abs(d.cell_w - t)
                   for t in (root.to_complex(), (-root).to_complex())) \
            <= cell
        assert d.depth >= 20.0


def test_fiber_scan_without_squaring_finds_one_dip():
    hps = make_hull_spec(SPECF, 8)
    grid = fiber_scan(hps, 2.0 + 0.0j, WRECT, 128, sq=False, delta=20.0)
    f = eval_partial_product(SPECF, 8, 2.0 + 0.0j).to_complex()
    assert [d.w for d in grid.dips] == [f]


def test_fiber_scan_input_validation():
    hps = make_hull_spec(SPECF, 8)
    with pytest.raises(PreconditionFailure):
        fiber_scan(hps, 2.0, WRECT, 32, sq=True)
    with pytest.raises(PreconditionFailure):
        fiber_scan(hps, 2.0, (1.0, -1.0, 0.0, 1.0), 128)


def test_fiber_scan_guards_real_base_points():
    hps5 = make_hull_spec(SPEC5, 8, strict=False)
    with pytest.raises(PoleHit):
        fiber_scan(hps5, complex(SPEC5.gap(1).b, 0.0), WRECT, 128)
    lo, hi = max(SPEC5.remaining, key=lambda p: p[1] - p[0])
    with pytest.raises(DomainViolation):
        fiber_scan(hps5, complex(0.5 * (lo + hi), 0.0), WRECT, 128)


def test_grid_report_and_rows():
    hps = make_hull_spec(SPECF, 4)
    grid = fiber_scan(hps, 2.0 + 0.0j, WRECT, 64, sq=True, delta=5.0)
    rep = grid_report(grid)
    assert rep["res"] == 64
    assert rep["dips"] and rep["median"] == grid.median
    assert sum(1 for _ in grid_rows(grid)) == 64 * 64


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(min_magnitude=1.6, max_magnitude=5.0,
                          allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=2.0, allow_nan=False,
                          allow_infinity=False))
def test_potential_dominated_by_graph_value(z, w):
    # the graph is the global minimum of the fiber potential
    hps = make_hull_spec(SPECF, 4)
    assert eval_v(hps, z, w) >= eval_v_on_graph(hps, z) - 1e-9
