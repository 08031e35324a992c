"""Truncated and limit evaluation of the gap Moebius product.

The object of study is the function

    f(z) = (z - b0)/(z - a0) * prod_j (z - a_j)/(z - b_j)

attached to a gap construction, normalized to 1 at infinity.  Gap factor
j is evaluated as 1 + u_j with u_j = (b_j - a_j)/(z - b_j), so deviations
from 1 far below double epsilon still enter the accumulated logarithm
correctly.  Square-root branches take principal roots factor by factor;
no path tracking is performed.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import lru_cache

from .cantor import (CantorSpec, _seg_distance, build_cantor_spec,
                     sum_gap_lengths)
from .errors import (DomainViolation, NoConvergence, NotInEN, PoleHit,
                     PreconditionFailure, QuadratureFailure, RegionViolatesEN)
from .logspace import LogComplex, log1p_complex, logsum, wrap_angle

__all__ = [
    "BranchTag",
    "TailBound",
    "eval_partial_product",
    "tail_bound",
    "eval_f",
    "sqrt_branch",
    "laurent_c1",
    "LaurentC1",
    "log_derivative_coeff",
    "fine_boundary_value",
    "tail_product_minus_one",
    "certify_en_point",
]

class BranchTag(enum.Enum):
    """Square-root branch labels.

    The D family lives off the root interval union the open gaps and is
    normalized to +1 at real +infinity.  The H family lives off the real
    axis, glues across the set, and H_plus is normalized to +1 at upper
    infinity.
    """

    D_PLUS = "d_plus"
    D_MINUS = "d_minus"
    H_PLUS = "h_plus"
    H_MINUS = "h_minus"

    @property
    def is_h_family(self) -> bool:
        return self in (BranchTag.H_PLUS, BranchTag.H_MINUS)


def _gap_factor_log(g, z: complex):
    """log of gap factor at z, or None for an exact zero of the factor.

    Degenerate gaps (length underflowed to 0.0) contribute a unit factor:
    their zero/pole pair sits below double resolution and is handled by
    the log-space tail machinery instead.
    """
    length = g.length
    if length == 0.0:
        return complex(0.0, 0.0)
    w = z - g.b
    if w == 0:
        raise PoleHit(f"z hits pole b_{g.index}")
    if abs(z - g.center) <= 8.0 * length:
        num = z - g.a
        if num == 0:
            return None
        r = num / w
        if r.imag == 0.0 and r.real < 0.0:
            # inside the gap on the real axis: argument convention -pi
            return complex(math.log(abs(r.real)), -math.pi)
        return complex(math.log(abs(r)), math.atan2(r.imag, r.real))
    return log1p_complex(length / w)


def _factor_logs(spec: CantorSpec, N: int, z: complex):
    """Per-factor logs (root factor first); None signals f(z) = 0."""
    if N > spec.max_index:
        raise PreconditionFailure("N exceeds materialized gaps", field="N")
    z = complex(z)
    den = z - spec.a0
    if den == 0:
        raise PoleHit("z hits pole a0")
    num = z - spec.b0
    if num == 0:
        return None
    r = num / den
    if r.imag == 0.0 and r.real < 0.0:
        # inside the root interval on the real axis: convention +pi
        logs = [complex(math.log(abs(r.real)), math.pi)]
    else:
        logs = [complex(math.log(abs(r)), math.atan2(r.imag, r.real))]
    for g in spec.gaps[:N]:
        fl = _gap_factor_log(g, z)
        if fl is None:
            return None
        logs.append(fl)
    return logs


def eval_partial_product(spec: CantorSpec, N: int, z: complex) -> LogComplex:
    """Truncation f_N(z) with N gap factors, as a log-polar value."""
    logs = _factor_logs(spec, N, z)
    if logs is None:
        return LogComplex.zero()
    re = 0.0
    im = 0.0
    for l in logs:
        re += l.real
        im += l.imag
    return LogComplex.from_polar(re, wrap_angle(im))


@dataclass(frozen=True)
class TailBound:
    """Certified bound on |f/f_N - 1| at a point or closed disk."""

    log_sum: float          # log of sum of per-factor moduli bounds
    terms: int

    @property
    def log_bound(self) -> float:
        s = self.log_sum
        if s == float("-inf"):
            return s
        if s < -1.0:
            # log(expm1(e^s)) = s + log1p(corrections), corrections <= e^s
            return s + math.log1p(math.exp(s))
        return math.log(math.expm1(math.exp(s))) if s < 5.0 else float("inf")

    @property
    def bound(self) -> float:
        lb = self.log_bound
        if lb == float("-inf"):
            return 0.0
        return math.exp(lb) if lb < 700.0 else float("inf")


def _dist_to_point(region, b: float) -> float:
    """inf |z - b| over the region (a complex point or (center, radius))."""
    if isinstance(region, tuple):
        c, rad = region
        return max(abs(complex(c) - b) - rad, 0.0)
    return abs(complex(region) - b)


def tail_bound(spec: CantorSpec, N: int, region) -> TailBound:
    """Certified sup of |f/f_N - 1| over a point or closed disk.

    Materialized gaps beyond N contribute their actual distance ratios.
    Off the root interval the unmaterialized tail is a geometric series
    under the halving criterion; inside it the would-be gaps are checked
    directly out to the underflow horizon.  Raises RegionViolatesEN when
    the controlling distance conditions fail, so the bound never
    silently turns vacuous.
    """
    if N < 0 or N > spec.max_index:
        raise PreconditionFailure("N out of range", field="N")
    logs = []
    M = spec.max_index
    for g in spec.gaps[N:M]:
        d = _dist_to_point(region, g.b)
        if d == 0.0:
            raise RegionViolatesEN(f"region touches pole b_{g.index}")
        log_u = g.log_length - math.log(d)
        if log_u > spec.log_p(g.index):
            raise RegionViolatesEN(
                f"distance condition fails at gap {g.index}")
        logs.append(log_u)
    # unmaterialized tail
    rule = spec.c_rule
    if rule.max_defined_index is not None:
        # finite construction: nothing beyond the explicit prefix
        pass
    else:
        if not rule.tail_ratio_halves(M + 1):
            raise RegionViolatesEN("rule tail does not certify halving")
        log_p_next = spec.log_p(M + 1)
        if isinstance(region, tuple):
            c, rad = region
            droot = max(_seg_distance(complex(c), spec.a0, spec.b0) - rad, 0.0)
        else:
            droot = _seg_distance(complex(region), spec.a0, spec.b0)
        if droot > 0.0 and log_p_next <= math.log(droot):
            # off the root interval: |u_n| <= length_n / droot, halving sum
            lead = -rule.jcj(M + 1) - math.log(droot)
            logs.append(lead + math.log(2.0))
        else:
            # inside or near the root: the placement rule fixes every
            # later gap, so check the distance conditions against
            # would-be poles out to the underflow horizon
            work = _horizon_spec(spec)
            if work is None:
                raise RegionViolatesEN(
                    "rule keeps thresholds representable past the "
                    "index budget")
            for g in work.gaps[M:]:
                d = _dist_to_point(region, g.b)
                if d == 0.0:
                    raise RegionViolatesEN(
                        f"region touches would-be pole b_{g.index}")
                log_u = g.log_length - math.log(d)
                if log_u > work.log_p(g.index):
                    raise RegionViolatesEN(
                        f"distance condition fails at would-be gap "
                        f"{g.index}")
                logs.append(log_u)
            # past the horizon each term stays below p_n, a certified
            # geometric series with ratio 2^{-1/2}
            logs.append(work.log_p(len(work.gaps) + 1) +
                        math.log(1.0 / (1.0 - 0.5 ** 0.5)))
    if not logs:
        return TailBound(float("-inf"), 0)
    lead = max(logs)
    s = sum(math.exp(l - lead) for l in logs)
    return TailBound(lead + math.log(s), len(logs))


def eval_f(spec: CantorSpec, z: complex, tol: float = 1e-12):
    """Limit product with certified truncation error below tol.

    Returns (value, err_bound, N_used).  Raises NoConvergence when the
    materialized construction cannot push the bound under tol.
    """
    if tol <= 0.0:
        raise PreconditionFailure("tol must be positive", field="tol")
    N = 1 if spec.max_index else 0
    while True:
        N = min(N, spec.max_index)
        try:
            tb = tail_bound(spec, N, z)
            if tb.bound <= tol:
                return eval_partial_product(spec, N, z), tb.bound, N
        except RegionViolatesEN:
            pass
        if N >= spec.max_index:
            raise NoConvergence(
                f"tail bound above tol={tol} at max materialization")
        N = min(2 * N if N else 1, spec.max_index)


def sqrt_branch(spec: CantorSpec, N: int, z: complex, tag: BranchTag) -> LogComplex:
    """One of the four square roots of f_N, by per-factor principal roots."""
    z = complex(z)
    if tag.is_h_family:
        if z.imag == 0.0:
            raise DomainViolation(
                "H-family branches need Im z != 0; use fine_boundary_value "
                "for boundary values on the set")
        d_plus = _d_plus(spec, N, z)
        val = d_plus if z.imag > 0.0 else -d_plus
        return val if tag is BranchTag.H_PLUS else -val
    if z.imag == 0.0 and spec.a0 <= z.real <= spec.b0:
        inside_gap = any(
            g.length > 0.0 and g.a < z.real < g.b for g in spec.gaps[:N])
        if not inside_gap:
            raise DomainViolation(
                "D-family branches are undefined on the set between gaps")
    d_plus = _d_plus(spec, N, z)
    return d_plus if tag is BranchTag.D_PLUS else -d_plus


def _d_plus(spec: CantorSpec, N: int, z: complex) -> LogComplex:
    logs = _factor_logs(spec, N, z)
    if logs is None:
        return LogComplex.zero()
    re = 0.0
    im = 0.0
    for l in logs:
        re += 0.5 * l.real
        im += 0.5 * l.imag
    return LogComplex.from_polar(re, wrap_angle(im))


@dataclass(frozen=True)
class LaurentC1:
    """First moment of 1 - f_N at infinity, two independent routes."""

    formula: float
    contour: float
    radius: float
    nodes: int

    @property
    def spread(self) -> float:
        return abs(self.formula - self.contour)


def laurent_c1(spec: CantorSpec, N: int | None = None, nodes: int = 4096,
               tol: float = 1e-8) -> LaurentC1:
    """z^-1 coefficient of f_N at infinity.

    The closed form is gap-length bookkeeping; the cross-check integrates
    f_N - 1 over the circle of radius 2(|a0|+|b0|)+2 with the trapezoid
    rule.  The two must agree within tol or QuadratureFailure is raised.
    """
    n = spec.max_index if N is None else N
    formula = sum_gap_lengths(spec, n) - spec.root_length
    R = 2.0 * (abs(spec.a0) + abs(spec.b0)) + 2.0
    acc = 0.0 + 0.0j
    for k in range(nodes):
        zk = cmath.rect(R, 2.0 * math.pi * k / nodes)
        fk = eval_partial_product(spec, n, zk).to_complex()
        acc += (fk - 1.0) * zk
    acc /= nodes
    if abs(acc.imag) > tol or abs(acc.real - formula) > tol:
        raise QuadratureFailure(
            f"contour c1 {acc} vs closed form {formula} beyond tol {tol}")
    return LaurentC1(formula, acc.real, R, nodes)


def log_derivative_coeff(spec: CantorSpec, k: int, N: int | None = None) -> float:
    """Moment sum b0^k - a0^k - sum_j (b_j^k - a_j^k) for k >= 1.

    Each gap difference is expanded as length * sum b^i a^(k-1-i), which
    avoids cancellation for short gaps.
    """
    if k < 1:
        raise PreconditionFailure("k must be >= 1", field="k")
    n = spec.max_index if N is None else N

    def pow_diff(a: float, b: float, length: float) -> float:
        s = 0.0
        for i in range(k):
            s += b ** i * a ** (k - 1 - i)
        return length * s

    total = pow_diff(spec.a0, spec.b0, spec.root_length)
    for g in spec.gaps[:n]:
        total -= pow_diff(g.a, g.b, g.length)
    return total


@lru_cache(maxsize=16)
def _extended(spec: CantorSpec, H: int) -> CantorSpec:
    return build_cantor_spec(spec.a0, spec.b0, spec.c_rule,
                             spec.placement, H)


def _horizon_spec(spec: CantorSpec) -> CantorSpec | None:
    """The spec extended with would-be gaps until the distance threshold
    e^{-j c_j / 2} underflows to exact zero.

    Past that horizon every remaining distance condition holds at double
    precision.  Returns None when the rule keeps thresholds representable
    beyond a fixed index budget, or when the extension cannot be built.
    """
    rule = spec.c_rule
    if rule.max_defined_index is not None:
        return spec
    horizon = spec.max_index
    j = spec.max_index + 1
    while 0.5 * rule.jcj(j) <= 746.0:
        horizon = j
        j += 1
        if j > spec.max_index + 8192:
            return None
    if horizon <= spec.max_index:
        return spec
    try:
        return _extended(spec, horizon)
    except PreconditionFailure:
        return None


def certify_en_point(spec: CantorSpec, x: float, N: int) -> bool:
    """Distance conditions |x - b_n| >= exp(-n c_n / 2) for all n >= N
    at machine resolution.

    Materialized gaps are checked directly in log space.  The placement
    rule determines every later gap as well, so the check continues
    against would-be gaps until the threshold e^{-n c_n / 2} underflows
    to exact zero; past that horizon the remaining conditions hold at
    double precision.  A rule whose thresholds stay representable beyond
    a fixed index budget cannot be certified this way.
    """
    work = _horizon_spec(spec)
    if work is None:
        return False
    for g in work.gaps:
        if g.index < N:
            continue
        d = abs(x - g.b)
        if d == 0.0:
            return False
        if math.log(d) < -0.5 * spec.c_rule.jcj(g.index):
            return False
    return True


def fine_boundary_value(spec: CantorSpec, x: float, tag: BranchTag,
                        tol: float = 1e-10):
    """Boundary value of an H-family branch at a point of the set.

    Returns (value, err_bound, N_certified).  The point must sit on a
    remaining piece of the materialized construction and satisfy the
    distance conditions for some N; the value is then purely imaginary,
    i * sqrt(|f(x)|) for H_plus and its negative for H_minus.
    """
    if not tag.is_h_family:
        raise PreconditionFailure("fine boundary values exist for the "
                                  "H family only", field="tag")
    x = float(x)
    if not (spec.a0 <= x <= spec.b0):
        raise NotInEN("x lies off the root interval")
    d_set = min(_seg_distance(complex(x), lo, hi) for lo, hi in spec.remaining)
    scale = max(abs(spec.a0), abs(spec.b0), 1.0)
    if d_set > 64.0 * 2.220446049250313e-16 * scale:
        raise NotInEN("x not within certified distance of the set")
    n_cert = None
    for n in range(1, spec.max_index + 2):
        if certify_en_point(spec, x, n):
            n_cert = n
            break
    if n_cert is None:
        raise NotInEN("distance conditions fail at every materialized depth")
    for g in spec.gaps:
        if g.length > 0.0 and x == g.b:
            raise PoleHit("x is a materialized pole")
    if x == spec.a0:
        raise PoleHit("x is the root pole a0")
    tb = tail_bound(spec, spec.max_index, x)
    if tb.bound > tol:
        raise NoConvergence(f"tail bound {tb.bound} above tol {tol}")
    fx = eval_partial_product(spec, spec.max_index, x)
    if fx.is_zero:
        return fx, tb.bound, n_cert
    if abs(wrap_angle(fx.arg - math.pi)) > 1e-9:
        raise NotInEN("product at x is not negative real; x resolves into "
                      "a gap, not the set")
    arg = 0.5 * math.pi if tag is BranchTag.H_PLUS else -0.5 * math.pi
    return LogComplex(0.5 * fx.log_mag, arg), tb.bound, n_cert


def tail_product_minus_one(spec: CantorSpec, n: int, z: complex,
                           upto: int | None = None) -> LogComplex:
    """prod_{j=n+1..upto} (1 + u_j) - 1 in log space.

    Exact to leading order even when every u_j is far below underflow;
    used for residuals of the truncation against deeper truncations.
    """
    M = spec.max_index if upto is None else upto
    if not 0 <= n < M <= spec.max_index:
        raise PreconditionFailure("need 0 <= n < upto <= materialization")
    z = complex(z)
    terms = []
    log_terms = []
    for g in spec.gaps[n:M]:
        w = z - g.b
        if w == 0:
            raise PoleHit(f"z hits pole b_{g.index}")
        lw = LogComplex.from_complex(w)
        u = LogComplex(g.log_length - lw.log_mag, wrap_angle(-lw.arg))
        terms.append(u)
        log_terms.append(u.log_mag)
    if not terms:
        return LogComplex.zero()
    # L = sum log(1+u_j); each log(1+u) = u * (1 - u/2 + ...) with the
    # correction representable whenever u is
    L_terms = []
    for u in terms:
        if u.log_mag > -300.0:
            corr = log1p_complex(u.to_complex())
            L_terms.append(LogComplex.from_complex(corr)
                           if corr != 0 else LogComplex.zero())
        else:
            L_terms.append(u)
    L = logsum(L_terms)
    if L.is_zero:
        return L
    # exp(L) - 1 = L * (1 + L/2 + L^2/6 + ...); L is tiny here
    if L.log_mag > -1.0:
        return LogComplex.from_complex(cmath.exp(L.to_complex()) - 1.0)
    corr = 1.0 + L.to_complex() / 2.0 if L.log_mag > -300.0 else 1.0
    return L * LogComplex.from_complex(corr)
