"""Linear Cantor-type sets with prescribed gap lengths.

A construction starts from a root interval [a0, b0] and deletes, one per
index j = 1, 2, ..., an open gap of length exp(-j*c(j)) where c is a
strictly increasing positive rule tending to infinity.  Gap j is centered
in the largest remaining closed interval (ties broken leftward), so the
whole construction is deterministic.

Lengths below double underflow are kept in log form: each gap stores its
exact log length next to the rounded endpoint floats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import GapOverflow, PlacementFailure, PreconditionFailure

__all__ = [
    "CRule",
    "GapInterval",
    "CantorSpec",
    "ConditionSum",
    "build_cantor_spec",
    "condition_sum",
    "cantor_length",
    "distance_to_gaps",
    "spec_to_json",
    "spec_from_json",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class CRule:
    """Closed-form family for the gap exponent sequence c(j).

    kind "affine":    c(j) = slope*j + offset, slope > 0, offset >= 0
    kind "factorial": c(j) = (j + shift)!  with integer shift >= 0
    kind "explicit":  finite increasing positive prefix, no tail theory
    """

    kind: str
    slope: float = 0.0
    offset: float = 0.0
    shift: int = 2
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "affine":
            if not (self.slope > 0.0 and self.offset >= 0.0):
                raise PreconditionFailure(
                    "affine rule needs slope > 0 and offset >= 0", field="c_rule")
        elif self.kind == "factorial":
            if self.shift < 0:
                raise PreconditionFailure(
                    "factorial rule needs shift >= 0", field="c_rule")
        elif self.kind == "explicit":
            vals = tuple(float(v) for v in self.values)
            if not vals or any(v <= 0.0 for v in vals):
                raise PreconditionFailure(
                    "explicit rule needs positive entries", field="c_rule")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise PreconditionFailure(
                    "explicit rule must be strictly increasing", field="c_rule")
            object.__setattr__(self, "values", vals)
        else:
            raise PreconditionFailure(f"unknown c rule kind {self.kind!r}",
                                      field="c_rule")

    def value(self, j: int) -> float:
        if j < 1:
            raise PreconditionFailure("gap indices start at 1")
        if self.kind == "affine":
            return self.slope * j + self.offset
        if self.kind == "factorial":
            n = j + self.shift
            if n < 170:
                return float(math.factorial(n))
            try:
                return math.exp(math.lgamma(n + 1))
            except OverflowError:
                return math.inf   # 1/value underflows to exact zero
        if j > len(self.values):
            raise PreconditionFailure(
                f"explicit rule has no entry for index {j}", field="c_rule")
        return self.values[j - 1]

    def jcj(self, j: int) -> float:
        """The product j*c(j); the gap length is exp(-jcj)."""
        return j * self.value(j)

    @property
    def max_defined_index(self) -> int | None:
        return len(self.values) if self.kind == "explicit" else None

    def tail_ratio_halves(self, j: int) -> bool:
        """True when exp(-n*c(n)) at least halves from index n to n+1 for
        every n >= j.  Used to certify geometric tail bounds."""
        if self.kind == "affine":
            # increment of n*c(n) is slope*(2n+1) + offset >= 3*slope + offset
            return 3.0 * self.slope + self.offset >= _LN2
        if self.kind == "factorial":
            return True
        return False

    def to_json_obj(self) -> dict:
        if self.kind == "affine":
            return {"kind": "affine", "slope": _fmt(self.slope),
                    "offset": _fmt(self.offset)}
        if self.kind == "factorial":
            return {"kind": "factorial", "shift": self.shift}
        return {"kind": "explicit", "values": [_fmt(v) for v in self.values]}

    @staticmethod
    def from_json_obj(obj: dict) -> "CRule":
        kind = obj.get("kind")
        if kind == "affine":
            return CRule("affine", slope=_num(obj.get("slope", 0.0)),
                         offset=_num(obj.get("offset", 0.0)))
        if kind == "factorial":
            return CRule("factorial", shift=int(obj.get("shift", 2)))
        if kind == "explicit":
            return CRule("explicit",
                         values=tuple(_num(v) for v in obj.get("values", ())))
        raise PreconditionFailure(f"unknown c rule kind {kind!r}", field="c_rule")


@dataclass(frozen=True)
class GapInterval:
    """One deleted gap: exact log length plus rounded endpoints.

    For underflowed lengths the endpoint floats coincide with the center;
    log_length stays exact in either case.
    """

    index: int
    center: float
    log_length: float

    @property
    def half_width(self) -> float:
        return math.exp(self.log_length - _LN2) if self.log_length > -744.0 else 0.0

    @property
    def a(self) -> float:
        return self.center - self.half_width

    @property
    def b(self) -> float:
        return self.center + self.half_width

    @property
    def length(self) -> float:
        return math.exp(self.log_length) if self.log_length > -744.0 else 0.0


@dataclass(frozen=True)
class CantorSpec:
    a0: float
    b0: float
    c_rule: CRule
    placement: str
    max_index: int
    gaps: tuple[GapInterval, ...] = field(repr=False)
    remaining: tuple[tuple[float, float], ...] = field(repr=False)

    @property
    def root_length(self) -> float:
        return self.b0 - self.a0

    def gap(self, j: int) -> GapInterval:
        if not 1 <= j <= self.max_index:
            raise PreconditionFailure(f"gap {j} not materialized")
        return self.gaps[j - 1]

    def log_p(self, j: int) -> float:
        """log of the tail-control sequence p(j) = exp(-j*c(j)/2)."""
        return -0.5 * self.c_rule.jcj(j)

    def poles(self, upto: int | None = None) -> list[float]:
        """Pole locations of the truncated product: a0 and the right gap
        endpoints."""
        n = self.max_index if upto is None else upto
        return [self.a0] + [g.b for g in self.gaps[:n]]

    def min_remaining_length(self) -> float:
        return min(hi - lo for lo, hi in self.remaining)


def build_cantor_spec(a0: float, b0: float, c_rule: CRule,
                      placement: str = "bisect", N: int = 0) -> CantorSpec:
    """Materialize the first N gaps of the construction.

    Raises GapOverflow when the cumulative gap length would reach the root
    length, PlacementFailure when no remaining interval can host the next
    gap strictly inside itself.
    """
    if not b0 > a0:
        raise PreconditionFailure("need a0 < b0", field="a0")
    if placement != "bisect":
        raise PreconditionFailure(f"unknown placement {placement!r}",
                                  field="placement")
    if N < 0:
        raise PreconditionFailure("N must be >= 0", field="N")
    if c_rule.max_defined_index is not None and N > c_rule.max_defined_index:
        raise PreconditionFailure("explicit rule shorter than N", field="N")
    last = 0.0
    for j in range(1, N + 1):
        c = c_rule.value(j)
        if c <= last:
            raise PreconditionFailure("c rule must increase strictly",
                                      field="c_rule")
        last = c

    pieces = [(a0, b0)]
    gaps: list[GapInterval] = []
    used = 0.0
    for j in range(1, N + 1):
        log_len = -c_rule.jcj(j)
        length = math.exp(log_len) if log_len > -744.0 else 0.0
        if used + length >= (b0 - a0):
            raise GapOverflow(
                f"gap {j} would push removed length past the root interval")
        k = max(range(len(pieces)), key=lambda i: (pieces[i][1] - pieces[i][0],
                                                   -pieces[i][0]))
        lo, hi = pieces[k]
        if length >= hi - lo:
            raise PlacementFailure(
                f"gap {j} of length {length:.3e} does not fit in the largest "
                f"remaining interval ({hi - lo:.3e})")
        center = 0.5 * (lo + hi)
        half = math.exp(log_len - _LN2) if log_len > -744.0 else 0.0
        gaps.append(GapInterval(j, center, log_len))
        pieces[k:k + 1] = [(lo, center - half), (center + half, hi)]
        used += length
    pieces.sort()
    return CantorSpec(a0, b0, c_rule, placement, N, tuple(gaps), tuple(pieces))


@dataclass(frozen=True)
class ConditionSum:
    """Partial sum of 1/(j*c(j)) with an optional certified tail bound."""

    partial: float
    tail_bound: float | None
    terms: int

    @property
    def certified(self) -> bool:
        return self.tail_bound is not None

    @property
    def total(self) -> float:
        return self.partial + (self.tail_bound or 0.0)

    @property
    def satisfied(self) -> bool | None:
        """Certified comparison of the full series against 1/2.

        True and False are certified either way; None means the partial
        sum plus tail bound cannot decide at this truncation.
        """
        if self.partial >= 0.5:
            return False
        if self.certified and self.total < 0.5:
            return True
        return None

    @property
    def finite(self) -> bool | None:
        """Certified finiteness of the full series."""
        return True if self.certified else None


def condition_sum(spec_or_rule, J: int = 10000) -> ConditionSum:
    """Sum 1/(j*c(j)) over j <= J plus a closed-form tail bound.

    Affine rules use the integral comparison sum_{j>J} 1/(s j^2) <= 1/(sJ);
    factorial rules use a geometric majorant; explicit rules carry no tail
    information (the sum is over the defined prefix only).
    """
    rule = spec_or_rule.c_rule if isinstance(spec_or_rule, CantorSpec) else spec_or_rule
    if J < 1:
        raise PreconditionFailure("J must be >= 1", field="J")
    if rule.kind == "explicit":
        J = min(J, len(rule.values))
    partial = 0.0
    terms = 0
    for j in range(1, J + 1):
        t = 1.0 / rule.jcj(j)
        partial += t
        terms = j
        if t == 0.0:            # below double resolution, as is the rest
            break
    tail: float | None
    if rule.kind == "affine":
        tail = 1.0 / (rule.slope * terms)
    elif rule.kind == "factorial":
        t_next = 1.0 / rule.jcj(terms + 1)
        q = 1.0 / (terms + 2 + rule.shift)  # ratio bound of successive terms
        tail = t_next / (1.0 - q)
    else:
        tail = None
    return ConditionSum(partial, tail, terms)


def sum_gap_lengths(spec: CantorSpec, N: int | None = None) -> float:
    """Removed length after N gaps, summed in ascending index order."""
    n = spec.max_index if N is None else N
    if n > spec.max_index:
        raise PreconditionFailure("N exceeds materialized gaps", field="N")
    s = 0.0
    for g in spec.gaps[:n]:
        s += g.length
    return s


def cantor_length(spec: CantorSpec, N: int | None = None) -> float:
    """Length of the set remaining after the first N gaps."""
    return spec.root_length - sum_gap_lengths(spec, N)


def _seg_distance(z: complex, lo: float, hi: float) -> float:
    x, y = z.real, z.imag
    dx = lo - x if x < lo else (x - hi if x > hi else 0.0)
    return math.hypot(dx, y)


def distance_to_gaps(spec: CantorSpec, z: complex, N: int | None = None) -> float:
    """Distance from z to the root segment and the first N gap segments.

    A certified lower bound for the distance to the limit set whenever z
    lies off the root interval.
    """
    n = spec.max_index if N is None else min(N, spec.max_index)
    z = complex(z)
    d = _seg_distance(z, spec.a0, spec.b0)
    for g in spec.gaps[:n]:
        d = min(d, _seg_distance(z, g.a, g.b))
    return d


# -- JSON (17 significant digits keeps floats bit-stable) ---------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _num(v) -> float:
    return float(v)


def spec_to_json(spec: CantorSpec) -> str:
    obj = {
        "a0": _fmt(spec.a0),
        "b0": _fmt(spec.b0),
        "c_rule": spec.c_rule.to_json_obj(),
        "placement": spec.placement,
        "N": spec.max_index,
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def spec_from_json(text: str) -> CantorSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise PreconditionFailure(f"invalid spec JSON: {e}", field="config") from e
    for key in ("a0", "b0", "c_rule", "N"):
        if key not in obj:
            raise PreconditionFailure(f"spec JSON missing {key!r}", field=key)
    return build_cantor_spec(
        _num(obj["a0"]), _num(obj["b0"]),
        CRule.from_json_obj(obj["c_rule"]),
        obj.get("placement", "bisect"), int(obj["N"]))
