"""Column-finite operators between sequence spaces.

An :class:`OperatorSpec` is a symbolic description; it is applied to
:class:`~minmod.spaces.FinVector` inputs exactly and truncated to dense
matrices on demand.  Truncation at level ``N`` restricts the domain to
``span{e_1..e_N}`` and keeps every range row the restricted columns touch,
so no range information is lost.

The named example operators are registered in :data:`NAMED` under the ids
``ex-3.2.1``, ``ex-3.2.2``, ``ex-3.2.3``, ``ex-3.4-T``, ``ex-3.4-K`` and
``psum-identity``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from . import spaces as sp
from .errors import BadParams, InvalidInput, OpaqueSpace, ParseError, SpaceMismatch
from .spaces import C0, DirectSum, FinLp, FinVector, Lp, Space

__all__ = [
    "Diagonal", "Matrix", "RankOneSum", "PSumLift", "LinComb", "Named",
    "OperatorSpec", "Truncation", "NamedExample", "NAMED",
    "apply", "truncate", "combine", "make_example", "diagonal", "matrix",
    "rank_one", "identity", "psum_lift", "domain_basis", "flatten",
    "unflatten", "op_to_dict", "op_from_dict", "load_operator",
]


# --------------------------------------------------------------------- bodies

@dataclass(frozen=True)
class Diagonal:
    """``e_i -> d_i e_i`` with ``d_i = entries[i-1]`` and ``tail`` beyond."""
    entries: tuple = ()
    tail: float = 0.0

    def entry(self, i: int) -> float:
        return self.entries[i - 1] if i <= len(self.entries) else self.tail


@dataclass(frozen=True)
class Matrix:
    """A dense finite matrix; columns beyond its width map to zero."""
    rows: tuple

    @property
    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(len(self.rows), -1)


@dataclass(frozen=True)
class RankOneSum:
    """``sum_k f_k ⊗ y_k``; each functional is stored by its coefficients."""
    terms: tuple  # ((functional FinVector over the domain, image FinVector), ...)


@dataclass(frozen=True)
class PSumLift:
    """``(x, z) -> (inner x, z)`` between p- and q-direct sums."""
    inner: "OperatorSpec"


@dataclass(frozen=True)
class LinComb:
    terms: tuple  # ((scalar, OperatorSpec), ...)


@dataclass(frozen=True)
class Named:
    id: str
    params: tuple = ()

    @property
    def param_dict(self) -> dict:
        return dict(self.params)


Body = Union[Diagonal, Matrix, RankOneSum, PSumLift, LinComb, Named]


@dataclass(frozen=True)
class OperatorSpec:
    domain: Space
    range: Space
    body: Body = field(repr=True)

    def __add__(self, other):
        return combine([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return combine([(1.0, self), (-1.0, other)])

    def __mul__(self, alpha):
        return combine([(float(alpha), self)])

    __rmul__ = __mul__

    def __truediv__(self, alpha):
        return combine([(1.0 / alpha, self)])

    def retag(self, domain: Space | None = None, range: Space | None = None):
        """The same coefficients viewed between other spaces of equal shape."""
        return OperatorSpec(domain or self.domain, range or self.range,
                            _Retagged(self) if not isinstance(self.body, _Retagged)
                            else self.body)


@dataclass(frozen=True)
class _Retagged:
    base: OperatorSpec


# -------------------------------------------------------------- named examples

@dataclass(frozen=True)
class NamedExample:
    id: str
    description: str
    build: Callable[[dict], tuple]   # params -> (domain, range)
    column: Callable | None          # (j, params) -> {row: coeff}
    bandwidth: int
    attains: bool | None             # None when it depends on params
    citation: str
    defaults: dict = field(default_factory=dict)


def _ex1_spaces(params):
    return sp.parse_space(params.get("domain", "lp:1")), sp.parse_space(params.get("range", "lp:1"))


def _ex1_column(j, params):
    return {j: 2.0 ** -j}


def _ex2_spaces(params):
    p = float(params.get("p", 1.0))
    if not p >= 1:
        raise BadParams(f"ex-3.2.2 needs p >= 1, got {p}")
    return C0(), sp.Lp(p)


def _ex2_column(j, params):
    # x*_i(e_j) = 2^-j for i = j and -2^-j for i < j
    col = {i: -(2.0 ** -j) for i in range(1, j)}
    col[j] = 2.0 ** -j
    return col


def _ex3_column(j, params):
    return {j: 2.0 if j == 1 else 1.0 + 1.0 / j}


def _ex4_t_column(j, params):
    if j == 1:
        return {2: -1.5}
    return {2: 3.0 * (1.0 - 2.0 ** -j), j + 1: 3.0}


def _ex4_k_column(j, params):
    return {1: 3.0, 2: 1.5} if j == 1 else {}


def _psum_spaces(params):
    p, q = float(params.get("p", 1.0)), float(params.get("q", 2.0))
    inner = sp.parse_space(params.get("inner", "lp:2"))
    d = int(params.get("dim", 1))
    if sp.is_opaque(inner) or isinstance(inner, DirectSum):
        raise BadParams("psum-identity needs a plain sequence space as inner space")
    z = FinLp(2.0, d)
    for v in (p, q):
        if not v >= 1:
            raise BadParams(f"psum-identity exponents must be >= 1, got {v}")
    return DirectSum(inner, z, p), DirectSum(inner, z, q)


NAMED: dict[str, NamedExample] = {
    e.id: e for e in [
        NamedExample(
            "ex-3.2.1", "ell_1 -> Y diagonal e*_n -> 2^-n g_n",
            _ex1_spaces, _ex1_column, 0, False,
            "ell_1 domain, Te*_n = 2^-n g_n: m(T) = 0, not attained, "
            "(e*_n) minimizing and not weakly null",
            {"domain": "lp:1", "range": "lp:1"}),
        NamedExample(
            "ex-3.2.2", "c_0 -> ell_p, T = sum x*_i ⊗ f_i, x*_j = 2^-j e*_j - sum_{i>j} 2^-i e*_i",
            _ex2_spaces, _ex2_column, 0, False,
            "c_0 -> ell_p triangular operator: ||T(e_1+..+e_m)|| = m^(1/p)/2^m, "
            "m(T) = 0, kernel trivial so not attained",
            {"p": 1.0}),
        NamedExample(
            "ex-3.2.3", "c_0 -> c_0 diagonal (2, 1+1/2, 1+1/3, ...)",
            lambda params: (C0(), C0()), _ex3_column, 0, False,
            "c_0 diagonal 2 e*_1⊗e_1 + sum (1+1/i) e*_i⊗e_i: m(T) = 1, not attained, "
            "(e_1/2 + e_n) minimizing and not weakly null"),
        NamedExample(
            "ex-3.4-T", "ell_1 -> ell_1, T = sum_{i>=2} 3e*_i⊗[(1-2^-i)e_2 + e_{i+1}] - (3/2)e*_1⊗e_2",
            lambda params: (Lp(1.0), Lp(1.0)), _ex4_t_column, 1, False,
            "ell_1 CPPm counterexample T: m(T) <= 1 via (2/3)e_1 + (1/3)e_n, not attained"),
        NamedExample(
            "ex-3.4-K", "ell_1 -> ell_1 compact K = (3/2)e*_1⊗e_2 + 3e*_1⊗e_1",
            lambda params: (Lp(1.0), Lp(1.0)), _ex4_k_column, 0, True,
            "ell_1 CPPm counterexample K: rank one, m(T+K) >= 3"),
        NamedExample(
            "psum-identity", "S(x, z) = (x, z) from X ⊕_p Z to X ⊕_q Z",
            _psum_spaces, None, 0, None,
            "p-sum lift S(x,z) = (Tx,z): m(S) = 2^((p-q)/(pq)) when m(T) = 1 and p < q",
            {"p": 1.0, "q": 2.0, "inner": "lp:2", "dim": 1}),
    ]
}


def make_example(id: str, **params) -> OperatorSpec:
    """Construct a named example operator."""
    try:
        ex = NAMED[id]
    except KeyError:
        raise BadParams(f"unknown named operator {id!r}; known: {sorted(NAMED)}") from None
    merged = {**ex.defaults, **{k: v for k, v in params.items() if v is not None}}
    unknown = set(merged) - set(ex.defaults)
    if unknown:
        raise BadParams(f"{id} does not take parameters {sorted(unknown)}")
    domain, range_ = ex.build(merged)
    if ex.id == "psum-identity":
        inner = identity(domain.left)
        return OperatorSpec(domain, range_, PSumLift(inner))
    key = tuple(sorted((k, v if isinstance(v, str) else float(v)) for k, v in merged.items()))
    return OperatorSpec(domain, range_, Named(id, key))


def named_id(op: OperatorSpec) -> str | None:
    return op.body.id if isinstance(op.body, Named) else None


# -------------------------------------------------------------- constructors

def _check_plain(space: Space):
    if isinstance(space, DirectSum) or sp.is_opaque(space):
        raise SpaceMismatch(f"expected a sequence space, got {space}")


def diagonal(space: Space, entries: Sequence[float], tail: float = 0.0,
             range: Space | None = None) -> OperatorSpec:
    range = range or space
    _check_plain(space)
    _check_plain(range)
    return OperatorSpec(space, range, Diagonal(tuple(float(e) for e in entries), float(tail)))


def identity(space: Space) -> OperatorSpec:
    return diagonal(space, (), 1.0)


def matrix(domain: Space, range: Space, m) -> OperatorSpec:
    _check_plain(domain)
    _check_plain(range)
    arr = np.atleast_2d(np.asarray(m, dtype=float))
    return OperatorSpec(domain, range, Matrix(tuple(map(tuple, arr.tolist()))))


def rank_one(functional: FinVector, image: FinVector, range: Space | None = None) -> OperatorSpec:
    """The rank-one operator ``functional ⊗ image``."""
    return OperatorSpec(functional.space, range or image.space,
                        RankOneSum(((functional, image),)))


def psum_lift(inner: OperatorSpec, z: Space, p: float, q: float) -> OperatorSpec:
    """Lift ``inner`` to ``(x, z) -> (inner x, z)`` from an outer-p to an outer-q sum."""
    domain = DirectSum(inner.domain, z, float(p))
    range_ = DirectSum(inner.range, z, float(q))
    sp.validate(domain)
    sp.validate(range_)
    return OperatorSpec(domain, range_, PSumLift(inner))


def combine(terms: Sequence[tuple[float, OperatorSpec]]) -> OperatorSpec:
    """Linear combination ``sum scalar * op``; all terms share domain and range."""
    terms = [(float(a), op) for a, op in terms]
    if not terms:
        raise BadParams("combine needs at least one term")
    domain, range_ = terms[0][1].domain, terms[0][1].range
    for _, op in terms:
        if op.domain != domain or op.range != range_:
            raise SpaceMismatch(f"cannot combine {op.domain}->{op.range} with {domain}->{range_}")
    return OperatorSpec(domain, range_, LinComb(tuple(terms)))


# -------------------------------------------------------------------- apply

def _pairing(f: FinVector, v: FinVector) -> float:
    if f.is_pair:
        return _pairing(f.left, v.left) + _pairing(f.right, v.right)
    return sum(c * v[i] for i, c in f.coeffs.items())


def _from_columns(range_: Space, v: FinVector, column) -> FinVector:
    out: dict[int, float] = {}
    for j, a in v.coeffs.items():
        for i, c in column(j).items():
            out[i] = out.get(i, 0.0) + a * c
    return FinVector(range_, out)


def apply(op: OperatorSpec, v: FinVector) -> FinVector:
    """Exact image ``T v``."""
    if v.space != op.domain:
        raise SpaceMismatch(f"vector lives in {v.space}, operator domain is {op.domain}")
    if sp.is_opaque(op.domain) or sp.is_opaque(op.range):
        raise OpaqueSpace("operators over opaque spaces cannot be applied")
    body = op.body
    if isinstance(body, Diagonal):
        return FinVector(op.range, {i: body.entry(i) * c for i, c in v.coeffs.items()})
    if isinstance(body, Matrix):
        m = body.array
        return _from_columns(op.range, v, lambda j: (
            {i + 1: m[i, j - 1] for i in range(m.shape[0])} if j <= m.shape[1] else {}))
    if isinstance(body, RankOneSum):
        out = sp.zero(op.range)
        for f, y in body.terms:
            s = _pairing(f, v)
            if s:
                out = out + s * y
        return out
    if isinstance(body, PSumLift):
        tx = apply(body.inner, v.left)
        return sp.pair(op.range, tx, v.right.retag(op.range.right))
    if isinstance(body, LinComb):
        out = sp.zero(op.range)
        for a, term in body.terms:
            out = out + a * apply(term, v)
        return out
    if isinstance(body, Named):
        ex = NAMED[body.id]
        params = body.param_dict
        return _from_columns(op.range, v, lambda j: ex.column(j, params))
    if isinstance(body, _Retagged):
        return apply(body.base, v.retag(body.base.domain)).retag(op.range)
    raise TypeError(f"unknown operator body {body!r}")


# --------------------------------------------------------------- truncation

Layout = Union[int, tuple]


def domain_basis(space: Space, N: int) -> list[FinVector]:
    """Basis of the level-``N`` domain: ``e_1..e_N`` (capped by the dimension).

    For a direct sum, left-component vectors come first.
    """
    if isinstance(space, DirectSum):
        z_left, z_right = sp.zero(space.left), sp.zero(space.right)
        return ([sp.pair(space, b, z_right) for b in domain_basis(space.left, N)]
                + [sp.pair(space, z_left, b) for b in domain_basis(space.right, N)])
    n = min(N, space.n) if isinstance(space, FinLp) else N
    return [sp.basis(space, i) for i in range(1, n + 1)]


def _layout_of(space: Space, vectors: Sequence[FinVector], minimum: Layout | None = None) -> Layout:
    if isinstance(space, DirectSum):
        lo = minimum or (None, None)
        return (_layout_of(space.left, [v.left for v in vectors], lo[0]),
                _layout_of(space.right, [v.right for v in vectors], lo[1]))
    if isinstance(space, FinLp):
        return space.n
    return max([v.max_index() for v in vectors] + [minimum or 0, 1])


def _domain_layout(space: Space, N: int) -> Layout:
    if isinstance(space, DirectSum):
        return (_domain_layout(space.left, N), _domain_layout(space.right, N))
    return min(N, space.n) if isinstance(space, FinLp) else N


def layout_size(layout: Layout) -> int:
    return layout if isinstance(layout, int) else layout_size(layout[0]) + layout_size(layout[1])


def flatten(v: FinVector, layout: Layout) -> np.ndarray:
    if isinstance(layout, tuple):
        return np.concatenate([flatten(v.left, layout[0]), flatten(v.right, layout[1])])
    x = np.zeros(layout)
    for i, c in v.coeffs.items():
        if i > layout:
            raise SpaceMismatch(f"index {i} beyond truncation size {layout}")
        x[i - 1] = c
    return x


def unflatten(space: Space, x: np.ndarray, layout: Layout) -> FinVector:
    if isinstance(layout, tuple):
        k = layout_size(layout[0])
        return sp.pair(space, unflatten(space.left, x[:k], layout[0]),
                       unflatten(space.right, x[k:], layout[1]))
    return FinVector(space, {i + 1: float(c) for i, c in enumerate(x) if c != 0.0})


@dataclass(frozen=True)
class Truncation:
    """Dense restriction of an operator to the level-``N`` domain."""
    N: int
    matrix: np.ndarray
    domain: Space
    range: Space
    domain_layout: Layout
    range_layout: Layout

    def to_vector(self, x: np.ndarray) -> FinVector:
        return unflatten(self.domain, np.asarray(x, dtype=float), self.domain_layout)

    def from_vector(self, v: FinVector) -> np.ndarray:
        return flatten(v, self.domain_layout)


def truncate(op: OperatorSpec, N: int) -> Truncation:
    """Matrix ``M[i, j]`` = coefficient of the i-th range basis vector in ``T e_j``."""
    if sp.is_opaque(op.domain) or sp.is_opaque(op.range):
        raise OpaqueSpace("cannot truncate operators over opaque spaces")
    if N < 1:
        raise InvalidInput(f"truncation level must be >= 1, got {N}")
    cols = domain_basis(op.domain, N)
    images = [apply(op, b) for b in cols]
    dlayout = _domain_layout(op.domain, N)
    rlayout = _layout_of(op.range, images)
    m = np.column_stack([flatten(y, rlayout) for y in images]) if images else np.zeros((1, 0))
    return Truncation(N, m, op.domain, op.range, dlayout, rlayout)


# ---------------------------------------------------------------------- JSON

def op_to_dict(op: OperatorSpec) -> dict:
    return {"domain": str(op.domain), "range": str(op.range), "body": _body_to_dict(op)}


def _body_to_dict(op: OperatorSpec) -> dict:
    b = op.body
    if isinstance(b, Diagonal):
        return {"kind": "diagonal", "entries": list(b.entries), "tail": b.tail}
    if isinstance(b, Matrix):
        return {"kind": "matrix", "rows": [list(r) for r in b.rows]}
    if isinstance(b, RankOneSum):
        return {"kind": "rankOneSum",
                "terms": [{"functional": f.to_dict(), "image": y.to_dict()} for f, y in b.terms]}
    if isinstance(b, PSumLift):
        return {"kind": "psumLift", "inner": op_to_dict(b.inner)}
    if isinstance(b, LinComb):
        return {"kind": "linComb",
                "terms": [{"scalar": a, "op": op_to_dict(t)} for a, t in b.terms]}
    if isinstance(b, Named):
        return {"kind": "named", "id": b.id, "params": b.param_dict}
    if isinstance(b, _Retagged):
        return {"kind": "retag", "base": op_to_dict(b.base)}
    raise TypeError(f"unknown operator body {b!r}")


def op_from_dict(data: Mapping) -> OperatorSpec:
    """Inverse of :func:`op_to_dict`; validates the spaces and the body."""
    try:
        body = data["body"]
        kind = body["kind"]
        if kind == "named":
            op = make_example(body["id"], **body.get("params", {}))
            if "domain" in data and sp.parse_space(data["domain"]) != op.domain:
                raise SpaceMismatch(f"{body['id']} has domain {op.domain}")
            return op
        domain, range_ = sp.parse_space(data["domain"]), sp.parse_space(data["range"])
        if kind == "diagonal":
            return diagonal(domain, body.get("entries", []), body.get("tail", 0.0), range_)
        if kind == "matrix":
            return matrix(domain, range_, body["rows"])
        if kind == "rankOneSum":
            terms = tuple((FinVector.from_dict(domain, t["functional"]),
                           FinVector.from_dict(range_, t["image"])) for t in body["terms"])
            return OperatorSpec(domain, range_, RankOneSum(terms))
        if kind == "psumLift":
            inner = op_from_dict(body["inner"])
            if not (isinstance(domain, DirectSum) and isinstance(range_, DirectSum)):
                raise SpaceMismatch("psumLift needs direct-sum domain and range")
            if domain.left != inner.domain or range_.left != inner.range or domain.right != range_.right:
                raise SpaceMismatch("psumLift spaces do not match the inner operator")
            return OperatorSpec(domain, range_, PSumLift(inner))
        if kind == "linComb":
            op = combine([(t["scalar"], op_from_dict(t["op"])) for t in body["terms"]])
            if op.domain != domain or op.range != range_:
                raise SpaceMismatch("linComb terms do not match the declared spaces")
            return op
        if kind == "retag":
            return op_from_dict(body["base"]).retag(domain, range_)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed operator spec: {exc}") from None
    raise ParseError(f"unknown operator kind {kind!r}")


def load_operator(path) -> OperatorSpec:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from None
    return op_from_dict(data)
