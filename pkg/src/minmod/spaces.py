"""Symbolic Banach space descriptors and finitely supported vectors.

Concrete sequence spaces (``Lp``, ``C0``, ``FinLp`` and p-direct sums of
these) carry a vector model: a :class:`FinVector` stores finitely many
canonical-basis coefficients and its norm is evaluated exactly in double
precision.  ``Opaque`` descriptors (``L_p[0,1]``, James, Tsirelson, Lorentz)
only ever appear in classifier rules and in the closed-form moduli catalog.

Descriptor strings::

    lp:<p>   c0   flp:<p>:<n>   sum(<S>,<S>;outer=<p>)
    Lp[0,1]:<p>   james   tsirelson:<p>   lorentz:<p>

Parsing is case-insensitive and ignores whitespace; exponents may be given
as decimals or rationals such as ``3/2``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Optional, Union

from .errors import (BadDimension, BadExponent, IndexOutOfRange, OpaqueSpace,
                     ParseError, SpaceMismatch, UnsupportedSpace,
                     ZeroVector)

__all__ = [
    "Lp", "C0", "FinLp", "DirectSum", "Opaque", "Space", "FinVector",
    "GRAMMAR", "parse_space", "validate", "exponent", "dimension",
    "is_opaque", "is_reflexive", "is_hilbert", "is_finite_dimensional",
    "vector", "basis", "pair", "zero", "norm", "normalize", "dual_exponent",
    "parse_vector",
]

GRAMMAR = ("lp:<p> | c0 | flp:<p>:<n> | sum(<S>,<S>;outer=<p>) | "
           "Lp[0,1]:<p> | james | tsirelson:<p> | lorentz:<p>")

OPAQUE_TAGS = ("lp-function", "james", "tsirelson", "lorentz")


def _fmt(p: float) -> str:
    s = repr(float(p))
    return s[:-2] if s.endswith(".0") else s


@dataclass(frozen=True)
class Lp:
    """The sequence space ell_p."""
    p: float

    def __str__(self):
        return f"lp:{_fmt(self.p)}"


@dataclass(frozen=True)
class C0:
    """The space c_0 of null sequences with the sup norm."""

    def __str__(self):
        return "c0"


@dataclass(frozen=True)
class FinLp:
    """The n-dimensional space ell_p^n."""
    p: float
    n: int

    def __str__(self):
        return f"flp:{_fmt(self.p)}:{self.n}"


@dataclass(frozen=True)
class DirectSum:
    """``left ⊕_outer right`` normed by the outer ell-combination of the parts."""
    left: "Space"
    right: "Space"
    outer: float

    def __str__(self):
        return f"sum({self.left},{self.right};outer={_fmt(self.outer)})"


@dataclass(frozen=True)
class Opaque:
    """A space known only by name: ``tag`` in :data:`OPAQUE_TAGS`."""
    tag: str
    p: Optional[float] = None

    def __str__(self):
        if self.tag == "lp-function":
            return f"Lp[0,1]:{_fmt(self.p)}"
        if self.tag == "james":
            return "james"
        return f"{self.tag}:{_fmt(self.p)}"


Space = Union[Lp, C0, FinLp, DirectSum, Opaque]


# ---------------------------------------------------------------- validation

def _check_exponent(p, what="exponent"):
    if isinstance(p, bool) or not isinstance(p, (int, float)):
        raise BadExponent(f"{what} must be a real number, got {p!r}")
    if not math.isfinite(p) or p < 1:
        raise BadExponent(f"{what} must be finite and >= 1, got {p!r}")


def validate(space: Space) -> None:
    """Raise if ``space`` violates the descriptor invariants."""
    if isinstance(space, Lp):
        _check_exponent(space.p)
    elif isinstance(space, C0):
        pass
    elif isinstance(space, FinLp):
        _check_exponent(space.p)
        if isinstance(space.n, bool) or not isinstance(space.n, int) or space.n < 1:
            raise BadDimension(f"dimension must be an integer >= 1, got {space.n!r}")
    elif isinstance(space, DirectSum):
        _check_exponent(space.outer, "outer exponent")
        validate(space.left)
        validate(space.right)
    elif isinstance(space, Opaque):
        if space.tag not in OPAQUE_TAGS:
            raise ParseError(f"unknown opaque space tag {space.tag!r}")
        if space.tag == "james":
            if space.p is not None:
                raise BadExponent("the James space takes no exponent")
        else:
            _check_exponent(space.p)
    else:
        raise ParseError(f"not a space descriptor: {space!r}")


# ------------------------------------------------------------------- parsing

_NUM = r"[0-9.eE+\-]+(?:/[0-9]+)?"


def _parse_number(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad number {text!r}; grammar: {GRAMMAR}") from None


def _split_top(body: str) -> tuple[str, str, str]:
    """Split ``A,B;outer=p`` at the top-level comma and semicolon."""
    depth = 0
    comma = semi = None
    for i, ch in enumerate(body):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif depth == 0 and ch == "," and comma is None:
            comma = i
        elif depth == 0 and ch == ";":
            semi = i
    if comma is None or semi is None or semi < comma:
        raise ParseError(f"bad direct sum {body!r}; grammar: {GRAMMAR}")
    return body[:comma], body[comma + 1:semi], body[semi + 1:]


def parse_space(text: str) -> Space:
    """Parse a descriptor string into a validated :data:`Space`."""
    s = re.sub(r"\s+", "", text).lower()
    space: Space
    if s == "c0":
        space = C0()
    elif s == "james":
        space = Opaque("james")
    elif s.startswith("sum(") and s.endswith(")"):
        left, right, outer = _split_top(s[4:-1])
        if not outer.startswith("outer="):
            raise ParseError(f"missing outer=<p> in {text!r}; grammar: {GRAMMAR}")
        space = DirectSum(parse_space(left), parse_space(right),
                          _parse_number(outer[len("outer="):]))
    elif (m := re.fullmatch(rf"lp\[0,1\]:({_NUM})", s)):
        space = Opaque("lp-function", _parse_number(m.group(1)))
    elif (m := re.fullmatch(rf"lp:({_NUM})", s)):
        space = Lp(_parse_number(m.group(1)))
    elif (m := re.fullmatch(rf"flp:({_NUM}):([0-9]+)", s)):
        space = FinLp(_parse_number(m.group(1)), int(m.group(2)))
    elif (m := re.fullmatch(rf"(tsirelson|lorentz):({_NUM})", s)):
        space = Opaque(m.group(1), _parse_number(m.group(2)))
    else:
        raise ParseError(f"cannot parse space {text!r}; grammar: {GRAMMAR}")
    validate(space)
    return space


# ---------------------------------------------------------------- properties

def exponent(space: Space) -> float:
    """Exponent of a sequence space; ``inf`` for c_0."""
    if isinstance(space, (Lp, FinLp)):
        return float(space.p)
    if isinstance(space, C0):
        return math.inf
    if isinstance(space, Opaque) and space.p is not None:
        return float(space.p)
    raise UnsupportedSpace(f"{space} has no single exponent")


def dual_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def dimension(space: Space) -> Optional[int]:
    """Dimension, or ``None`` for infinite-dimensional spaces."""
    if isinstance(space, FinLp):
        return space.n
    if isinstance(space, DirectSum):
        a, b = dimension(space.left), dimension(space.right)
        return None if a is None or b is None else a + b
    return None


def is_finite_dimensional(space: Space) -> bool:
    return dimension(space) is not None


def is_opaque(space: Space) -> bool:
    if isinstance(space, Opaque):
        return True
    if isinstance(space, DirectSum):
        return is_opaque(space.left) or is_opaque(space.right)
    return False


def is_reflexive(space: Space) -> bool:
    """Reflexivity as known background for every descriptor kind."""
    if isinstance(space, Lp):
        return 1 < space.p
    if isinstance(space, C0):
        return False
    if isinstance(space, FinLp):
        return True
    if isinstance(space, DirectSum):
        return is_reflexive(space.left) and is_reflexive(space.right)
    if space.tag == "lp-function":
        return space.p > 1
    # Tsirelson convexifications and Lorentz sequence spaces are reflexive;
    # the James space is not.
    return space.tag in ("tsirelson", "lorentz")


def is_hilbert(space: Space) -> bool:
    if isinstance(space, (Lp, FinLp)):
        return space.p == 2 or (isinstance(space, FinLp) and space.n == 1)
    if isinstance(space, DirectSum):
        return space.outer == 2 and is_hilbert(space.left) and is_hilbert(space.right)
    if isinstance(space, Opaque):
        return space.tag == "lp-function" and space.p == 2
    return False


def _require_concrete(space: Space):
    if is_opaque(space):
        raise OpaqueSpace(f"{space} admits no vector operations")


# ------------------------------------------------------------------- vectors

class FinVector:
    """A finitely supported vector over the canonical basis of ``space``.

    Indices are 1-based.  For a :class:`DirectSum` the vector is the pair
    ``(left, right)`` of component vectors and ``coeffs`` is empty.
    Instances are treated as immutable.
    """

    __slots__ = ("space", "coeffs", "left", "right")

    def __init__(self, space: Space, coeffs: Optional[Mapping[int, float]] = None,
                 left: Optional["FinVector"] = None, right: Optional["FinVector"] = None):
        _require_concrete(space)
        if isinstance(space, DirectSum):
            left = left if left is not None else zero(space.left)
            right = right if right is not None else zero(space.right)
            if left.space != space.left or right.space != space.right:
                raise SpaceMismatch(f"components do not match {space}")
            if coeffs:
                raise SpaceMismatch("direct-sum vectors are built from components")
            clean = {}
        else:
            if left is not None or right is not None:
                raise SpaceMismatch(f"{space} is not a direct sum")
            clean = {}
            limit = space.n if isinstance(space, FinLp) else None
            for i, c in (coeffs or {}).items():
                i = int(i)
                if i < 1 or (limit is not None and i > limit):
                    raise IndexOutOfRange(f"index {i} outside {space}")
                c = float(c)
                if c != 0.0:
                    clean[i] = c
            clean = dict(sorted(clean.items()))
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "coeffs", MappingProxyType(clean))
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __setattr__(self, name, value):
        raise AttributeError("FinVector is immutable")

    @property
    def is_pair(self) -> bool:
        return self.left is not None

    def support(self) -> tuple[int, ...]:
        return tuple(self.coeffs)

    def max_index(self) -> int:
        """Largest index in the support (0 for the zero vector)."""
        if self.is_pair:
            return max(self.left.max_index(), self.right.max_index())
        return max(self.coeffs, default=0)

    def __getitem__(self, i: int) -> float:
        return self.coeffs.get(i, 0.0)

    def _combine(self, other: "FinVector", a: float, b: float) -> "FinVector":
        if not isinstance(other, FinVector):
            return NotImplemented
        if other.space != self.space:
            raise SpaceMismatch(f"{self.space} vs {other.space}")
        if self.is_pair:
            return FinVector(self.space,
                             left=self.left._combine(other.left, a, b),
                             right=self.right._combine(other.right, a, b))
        out = {i: a * c for i, c in self.coeffs.items()}
        for i, c in other.coeffs.items():
            out[i] = out.get(i, 0.0) + b * c
        return FinVector(self.space, out)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, alpha):
        if not isinstance(alpha, (int, float)):
            return NotImplemented
        alpha = float(alpha)
        if self.is_pair:
            return FinVector(self.space, left=self.left * alpha, right=self.right * alpha)
        return FinVector(self.space, {i: alpha * c for i, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, alpha):
        return self * (1.0 / alpha)

    def __neg__(self):
        return self * -1.0

    def retag(self, space: Space) -> "FinVector":
        """Same coefficients viewed in another space of the same shape."""
        if isinstance(space, DirectSum):
            if not self.is_pair:
                raise SpaceMismatch(f"cannot view {self.space} vector in {space}")
            return FinVector(space, left=self.left.retag(space.left),
                             right=self.right.retag(space.right))
        if self.is_pair:
            raise SpaceMismatch(f"cannot view {self.space} vector in {space}")
        return FinVector(space, dict(self.coeffs))

    def __eq__(self, other):
        if not isinstance(other, FinVector):
            return NotImplemented
        if self.space != other.space:
            return False
        if self.is_pair:
            return self.left == other.left and self.right == other.right
        return dict(self.coeffs) == dict(other.coeffs)

    def __hash__(self):
        if self.is_pair:
            return hash((self.space, self.left, self.right))
        return hash((self.space, tuple(self.coeffs.items())))

    def to_dict(self) -> dict:
        """JSON form: ``{"<index>": coeff}`` or ``{"left": ..., "right": ...}``."""
        if self.is_pair:
            return {"left": self.left.to_dict(), "right": self.right.to_dict()}
        return {str(i): c for i, c in self.coeffs.items()}

    @classmethod
    def from_dict(cls, space: Space, data: Mapping) -> "FinVector":
        if isinstance(space, DirectSum):
            return cls(space, left=cls.from_dict(space.left, data.get("left", {})),
                       right=cls.from_dict(space.right, data.get("right", {})))
        return cls(space, {int(k): v for k, v in data.items()})

    def __repr__(self):
        if self.is_pair:
            return f"FinVector({self.space}, left={self.left!r}, right={self.right!r})"
        return f"FinVector({self.space}, {dict(self.coeffs)})"


def vector(space: Space, coeffs: Mapping[int, float]) -> FinVector:
    return FinVector(space, coeffs)


def basis(space: Space, i: int) -> FinVector:
    """The canonical basis vector e_i."""
    return FinVector(space, {i: 1.0})


def pair(space: DirectSum, left: FinVector, right: FinVector) -> FinVector:
    return FinVector(space, left=left, right=right)


def zero(space: Space) -> FinVector:
    if isinstance(space, DirectSum):
        return FinVector(space, left=zero(space.left), right=zero(space.right))
    return FinVector(space, {})


def _pnorm(values, p: float) -> float:
    vals = [abs(v) for v in values]
    if not vals:
        return 0.0
    if math.isinf(p):
        return max(vals)
    if p == 1:
        return math.fsum(vals)
    if p == 2:
        return math.hypot(*vals)
    scale = max(vals)
    if scale == 0.0:
        return 0.0
    return scale * math.fsum((v / scale) ** p for v in vals) ** (1.0 / p)


def norm(v: FinVector) -> float:
    """Exact norm of ``v`` in its space."""
    space = v.space
    if isinstance(space, DirectSum):
        return _pnorm([norm(v.left), norm(v.right)], space.outer)
    return _pnorm(v.coeffs.values(), exponent(space))


def normalize(v: FinVector) -> FinVector:
    n = norm(v)
    if n == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    return v / n


def parse_vector(text: str, space: Space) -> FinVector:
    """Parse a vector literal such as ``1:0.5,3:-1``.

    Direct-sum vectors separate the components with ``|``
    (``1:0.5|1:0.5``).
    """
    s = re.sub(r"\s+", "", text)
    if isinstance(space, DirectSum):
        if s.count("|") != 1:
            raise ParseError(f"direct-sum vector literal needs one '|': {text!r}")
        a, b = s.split("|")
        return pair(space, parse_vector(a, space.left), parse_vector(b, space.right))
    coeffs: dict[int, float] = {}
    for item in filter(None, s.split(",")):
        try:
            i, c = item.split(":")
            coeffs[int(i)] = coeffs.get(int(i), 0.0) + _parse_number(c)
        except ValueError:
            raise ParseError(f"bad vector entry {item!r} (expected index:value)") from None
    return FinVector(space, coeffs)
