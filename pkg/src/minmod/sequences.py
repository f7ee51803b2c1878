"""Symbolic sequence families and the asymptotic checks built on them.

Four families are supported:

* ``BasisTail(space, c, offset)``: ``x_n = c e_{n+offset}``;
* ``FixedPlusBasisTail(space, x, c, offset)``: ``x_n = x + c e_{n+offset}``,
  where ``offset`` defaults to ``max supp(x)`` so the moving part starts just
  past the support of ``x``;
* ``PartialSums(space)``: ``x_n = e_1 + ... + e_n``;
* ``Explicit(space, members)``: a finite list.

Weak nullness is decided from the family's formula, not from numerics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from . import operators as ops
from . import spaces as sp
from .errors import (IndexOutOfRange, InvalidInput, NotUnitNorm, NotWeaklyNull,
                     ParseError, SpaceMismatch, UnsupportedSpace, WrongDomain)
from .modulus import MinModReport, SolverConfig, min_modulus
from .operators import OperatorSpec
from .spaces import C0, DirectSum, FinLp, FinVector, Lp, Space

__all__ = [
    "BasisTail", "FixedPlusBasisTail", "PartialSums", "Explicit", "SequenceFamily",
    "WeakNullVerdict", "nth", "members", "weak_null_classify", "minimizing_check",
    "MinimizingReport", "asymptotic_norm", "AsymptoticReport", "disjoint_residual",
    "basis_lower_bound_check", "LowerBoundReport", "parse_family", "combine_norms",
]

UNIT_TOL = 1e-10


@dataclass(frozen=True)
class BasisTail:
    space: Space
    c: float = 1.0
    offset: int = 0

    def __post_init__(self):
        if self.offset < 0:
            raise InvalidInput("offset must be nonnegative")


@dataclass(frozen=True)
class FixedPlusBasisTail:
    space: Space
    x: FinVector
    c: float = 1.0
    offset: Optional[int] = None

    def __post_init__(self):
        if self.x.space != self.space:
            raise SpaceMismatch(f"fixed vector lives in {self.x.space}, family in {self.space}")
        if self.offset is None:
            object.__setattr__(self, "offset", self.x.max_index())
        if self.offset < 0:
            raise InvalidInput("offset must be nonnegative")

    @property
    def first(self) -> int:
        """First ``n`` whose moving index lies past the support of ``x``."""
        return max(1, self.x.max_index() - self.offset + 1)


@dataclass(frozen=True)
class PartialSums:
    space: Space


@dataclass(frozen=True)
class Explicit:
    space: Space
    members: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        for v in self.members:
            if v.space != self.space:
                raise SpaceMismatch(f"member lives in {v.space}, family in {self.space}")


SequenceFamily = Union[BasisTail, FixedPlusBasisTail, PartialSums, Explicit]


def _check_index(space: Space, i: int):
    if isinstance(space, FinLp) and i > space.n:
        raise IndexOutOfRange(f"index {i} exceeds the dimension {space.n} of {space}")


def nth(f: SequenceFamily, n: int) -> FinVector:
    """The ``n``-th member (1-based)."""
    if n < 1:
        raise IndexOutOfRange("sequence indices start at 1")
    if isinstance(f, BasisTail):
        _check_index(f.space, n + f.offset)
        return FinVector(f.space, {n + f.offset: f.c})
    if isinstance(f, FixedPlusBasisTail):
        _check_index(f.space, n + f.offset)
        return f.x + sp.basis(f.space, n + f.offset) * f.c
    if isinstance(f, PartialSums):
        _check_index(f.space, n)
        return FinVector(f.space, {i: 1.0 for i in range(1, n + 1)})
    if isinstance(f, Explicit):
        if n > len(f.members):
            raise IndexOutOfRange(f"explicit family has {len(f.members)} members, asked for {n}")
        return f.members[n - 1]
    raise TypeError(f"unknown family {f!r}")


def members(f: SequenceFamily, horizon: int, start: int = 1) -> list[FinVector]:
    return [nth(f, n) for n in range(start, horizon + 1)]


# ------------------------------------------------------------- weak nullness

@dataclass(frozen=True)
class WeakNullVerdict:
    status: str      # weakly_null | not_weakly_null | undecided
    rule: str
    citation: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"status": self.status, "rule": self.rule, "citation": self.citation,
                "diagnostics": self.diagnostics}


_SCHUR = "Schur property of ell_1: weakly convergent sequences converge in norm"
_COORD = "bounded sequences in ell_p (1<p<inf) and c0 are weakly null iff every coordinate tends to 0"
_FIN = "finite dimension: weak and norm convergence agree"


def _space_kind(space: Space) -> str:
    if isinstance(space, (DirectSum,)) or sp.is_opaque(space):
        raise UnsupportedSpace(f"weak-null rules cover ell_p, c0 and finite ell_p^n, not {space}")
    if isinstance(space, FinLp):
        return "fin"
    if isinstance(space, Lp) and space.p == 1:
        return "l1"
    return "coord"


def weak_null_classify(f: SequenceFamily) -> WeakNullVerdict:
    kind = _space_kind(f.space)
    V = WeakNullVerdict
    if kind == "fin" and not isinstance(f, Explicit):
        return V("undecided", "finite-dimensional-tail", _FIN,
                 {"note": "tail indices leave a finite-dimensional space"})
    if isinstance(f, BasisTail):
        if f.c == 0:
            return V("weakly_null", "zero-sequence", _COORD)
        if kind == "l1":
            return V("not_weakly_null", "schur-l1", _SCHUR, {"norm": abs(f.c)})
        return V("weakly_null", "basis-tail-coordinates", _COORD)
    if isinstance(f, FixedPlusBasisTail):
        if f.x.max_index() > 0 and any(f.x.coeffs.values()):
            i = f.x.support()[0]
            return V("not_weakly_null", "persistent-coordinate", _COORD,
                     {"coordinate": i, "value": f.x[i]})
        return weak_null_classify(BasisTail(f.space, f.c, f.offset))
    if isinstance(f, PartialSums):
        return V("not_weakly_null", "persistent-coordinate", _COORD,
                 {"coordinate": 1, "value": 1.0})
    # Explicit: a persistent coordinate (or, in ell_1 and finite dimension, a
    # persistent norm) refutes weak nullness; nothing finite confirms it
    mem = f.members
    if len(mem) < 2:
        return V("undecided", "explicit-too-short", _COORD, {"members": len(mem)})
    tail = mem[len(mem) // 2:]
    coords = sorted({i for v in mem for i in v.support()})
    for i in coords:
        peak = max(abs(v[i]) for v in mem)
        low = min(abs(v[i]) for v in tail)
        if peak > 0 and low >= 0.5 * peak:
            return V("not_weakly_null", "persistent-coordinate", _COORD,
                     {"coordinate": i, "tail_min": low, "peak": peak})
    if kind in ("l1", "fin"):
        norms = [sp.norm(v) for v in mem]
        low = min(norms[len(mem) // 2:])
        if max(norms) > 0 and low >= 0.5 * max(norms):
            return V("not_weakly_null", "schur-l1" if kind == "l1" else "finite-dimensional-norm",
                     _SCHUR if kind == "l1" else _FIN, {"tail_min_norm": low})
    return V("undecided", "explicit-no-refutation", _COORD,
             {"members": len(mem), "coordinates": len(coords)})


# ------------------------------------------------------- minimizing sequences

@dataclass(frozen=True)
class MinimizingReport:
    values: tuple
    m_report: MinModReport
    m_estimate: float
    gap: float
    tail_monotone: bool
    minimizing: bool
    weak_null: WeakNullVerdict

    @property
    def weakly_null(self) -> bool:
        return self.weak_null.status == "weakly_null"

    def to_dict(self) -> dict:
        return {"values": list(self.values), "m_estimate": self.m_estimate, "gap": self.gap,
                "tail_monotone": self.tail_monotone, "minimizing": self.minimizing,
                "weak_null": self.weak_null.to_dict(), "m_trace": self.m_report.to_dict()}


def _first_index(f: SequenceFamily) -> int:
    return f.first if isinstance(f, FixedPlusBasisTail) else 1


def minimizing_check(op: OperatorSpec, f: SequenceFamily, horizon: int,
                     cfg: SolverConfig | None = None, gap_tol: float = 0.05,
                     report: MinModReport | None = None) -> MinimizingReport:
    """Evaluate ``||T x_n||`` for ``n <= horizon`` against the m-estimate.

    The family is judged minimizing when the last value is within
    ``gap_tol`` of the m-estimate; whether the values decrease over the
    tail half is reported alongside.  A precomputed m-trace for ``op`` may
    be passed as ``report``.
    """
    if f.space != op.domain:
        raise SpaceMismatch(f"family lives in {f.space}, operator domain is {op.domain}")
    start = _first_index(f)
    if horizon < start:
        raise InvalidInput(f"horizon must be at least {start}")
    xs = members(f, horizon, start)
    for n, x in zip(range(start, horizon + 1), xs):
        if abs(sp.norm(x) - 1.0) > UNIT_TOL:
            raise NotUnitNorm(f"member {n} has norm {sp.norm(x)!r}")
    values = tuple(sp.norm(ops.apply(op, x)) for x in xs)
    report = report or min_modulus(op, cfg)
    m = report.m
    gaps = [abs(v - m) for v in values]
    tail = values[len(values) // 2:]
    monotone = all(b <= a + 1e-12 for a, b in zip(tail, tail[1:]))
    return MinimizingReport(values, report, m, gaps[-1], monotone,
                            bool(gaps[-1] <= gap_tol), weak_null_classify(f))


# ---------------------------------------------------------- asymptotic norms

def combine_norms(space: Space, a: float, b: float) -> float:
    """``(a^p + b^p)^(1/p)`` in ell_p, ``max(a, b)`` in c0."""
    return sp._pnorm([a, b], sp.exponent(space))


@dataclass(frozen=True)
class AsymptoticReport:
    values: tuple
    empirical_limit: float
    closed_form: float
    residual: float
    pointwise_residual: float

    def to_dict(self) -> dict:
        return {"values": list(self.values), "empirical_limit": self.empirical_limit,
                "closed_form": self.closed_form, "residual": self.residual,
                "pointwise_residual": self.pointwise_residual}


def _tail_norm_limit(f: SequenceFamily, xs: Sequence[FinVector]) -> float:
    if isinstance(f, BasisTail):
        return abs(f.c)
    if isinstance(f, FixedPlusBasisTail) and not any(f.x.coeffs.values()):
        return abs(f.c)
    norms = [sp.norm(v) for v in xs]
    return max(norms[len(norms) // 2:])


def _asymptotic(x: FinVector, f: SequenceFamily, horizon: int) -> AsymptoticReport:
    if x.space != f.space:
        raise SpaceMismatch(f"x lives in {x.space}, family in {f.space}")
    _space_kind(f.space)
    start = _first_index(f)
    xs = members(f, horizon, start)
    values = tuple(sp.norm(x + v) for v in xs)
    tail = values[len(values) // 2:]
    empirical = max(tail)
    nx = sp.norm(x)
    closed = combine_norms(f.space, nx, _tail_norm_limit(f, xs))
    supp = set(x.support())
    point = [abs(val - combine_norms(f.space, nx, sp.norm(v)))
             for val, v in zip(values, xs) if not supp & set(v.support())]
    return AsymptoticReport(values, empirical, closed, abs(empirical - closed),
                            max(point, default=math.nan))


def asymptotic_norm(x: FinVector, f: SequenceFamily, horizon: int = 64) -> AsymptoticReport:
    """``limsup ||x + x_n||`` beside ``(||x||^p + limsup ||x_n||^p)^(1/p)``.

    The identity is only asserted for weakly null families.
    """
    verdict = weak_null_classify(f)
    if verdict.status != "weakly_null":
        raise NotWeaklyNull(f"family is {verdict.status} ({verdict.rule})")
    return _asymptotic(x, f, horizon)


def disjoint_residual(x: FinVector, f: SequenceFamily, horizon: int = 64) -> float:
    """Largest ``| ||x + x_n|| - combine(||x||, ||x_n||) |`` over members disjoint from ``x``.

    Unlike :func:`asymptotic_norm` this needs no weak nullness, so it also
    covers ell_1, where the disjoint-support identity holds pointwise.
    """
    return _asymptotic(x, f, horizon).pointwise_residual


@dataclass(frozen=True)
class LowerBoundReport:
    values: tuple
    limsup: float
    m_estimate: float
    bound: float
    margin: float

    def to_dict(self) -> dict:
        return {"values": list(self.values), "limsup": self.limsup,
                "m_estimate": self.m_estimate, "bound": self.bound, "margin": self.margin}


def basis_lower_bound_check(op: OperatorSpec, y: FinVector, horizon: int = 64,
                            cfg: SolverConfig | None = None) -> LowerBoundReport:
    """Compare ``limsup ||y + T e_n||`` with ``(||y||^p + m(T)^p)^(1/p)``."""
    dom = op.domain
    if not (isinstance(dom, Lp) and 1 < dom.p < math.inf):
        raise WrongDomain(f"the basis bound needs a domain ell_p with 1<p<inf, got {dom}")
    if y.space != op.range:
        raise SpaceMismatch(f"y lives in {y.space}, operator range is {op.range}")
    values = tuple(sp.norm(y + ops.apply(op, sp.basis(dom, n))) for n in range(1, horizon + 1))
    limsup = max(values[len(values) // 2:])
    m = min_modulus(op, cfg).m
    bound = sp._pnorm([sp.norm(y), m], dom.p)
    return LowerBoundReport(values, limsup, m, bound, limsup - bound)


# ------------------------------------------------------------------ parsing

def parse_family(text: str, space: Space) -> SequenceFamily:
    """Parse ``basis[:c[:offset]]``, ``fixed+basis:<vector>:<c>[;offset=k]``,
    ``partial-sums`` or ``explicit:@file.json``."""
    t = text.strip()
    low = t.lower()
    try:
        if low == "partial-sums":
            return PartialSums(space)
        if low == "basis" or low.startswith("basis:"):
            parts = t.split(":")[1:]
            c = float(parts[0]) if parts else 1.0
            off = int(parts[1]) if len(parts) > 1 else 0
            if len(parts) > 2:
                raise ParseError(f"too many fields in {text!r}")
            return BasisTail(space, c, off)
        if low.startswith("fixed+basis:"):
            body = t[len("fixed+basis:"):]
            offset = None
            if ";" in body:
                body, opt = body.split(";", 1)
                key, _, val = opt.partition("=")
                if key.strip() != "offset":
                    raise ParseError(f"unknown option {opt!r}")
                offset = int(val)
            vec, _, c = body.rpartition(":")
            if not vec:
                raise ParseError("fixed+basis needs <vector>:<c>")
            return FixedPlusBasisTail(space, sp.parse_vector(vec, space), float(c), offset)
        if low.startswith("explicit:@"):
            data = json.loads(Path(t[len("explicit:@"):]).read_text())
            return Explicit(space, [FinVector.from_dict(space, d) for d in data])
    except (ValueError, OSError) as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise ParseError(f"bad sequence family {text!r}: {exc}") from exc
    raise ParseError(f"unknown sequence family {text!r}; expected basis[:c[:offset]], "
                     "fixed+basis:<vector>:<c>, partial-sums or explicit:@file.json")
