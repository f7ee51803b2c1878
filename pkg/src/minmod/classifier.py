"""Rule engine for WmP / CPPm / property (m) / property (o) verdicts on space pairs.

Rules fire in a fixed priority order: known counterexamples first, then
known positive results, then the moduli route (which can only say yes),
then implications between the properties.  A field that stays ``unknown``
is reported with the nearest facts from the rule table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from . import spaces as sp
from .errors import NotInCatalog
from .moduli import premise_m, premise_o, wmp_via_moduli
from .spaces import C0, DirectSum, FinLp, Lp, Opaque, Space

__all__ = ["PairQuery", "Verdict", "Rule", "RULES", "classify", "explain", "list_rules",
           "space_kind"]

FIELDS = ("wmp", "cppm", "prop_m", "prop_o")


@dataclass(frozen=True)
class PairQuery:
    domain: Space
    range: Space

    def __post_init__(self):
        for name in ("domain", "range"):
            v = getattr(self, name)
            if isinstance(v, str):
                object.__setattr__(self, name, sp.parse_space(v))
            else:
                sp.validate(v)


@dataclass(frozen=True)
class Verdict:
    domain: Space
    range: Space
    wmp: str
    cppm: str
    prop_m: str
    prop_o: str
    chain: tuple
    nearest: tuple = ()
    moduli_chain: tuple = ()

    def to_dict(self) -> dict:
        return {"domain": str(self.domain), "range": str(self.range),
                "wmp": self.wmp, "cppm": self.cppm, "prop_m": self.prop_m, "prop_o": self.prop_o,
                "chain": [{"rule": r, "citation": c} for r, c in self.chain],
                "nearest": list(self.nearest)}


@dataclass(frozen=True)
class Rule:
    id: str
    group: str                 # negative | positive | derived
    matcher: str               # human-readable premise
    conclusions: tuple         # ((field, value), ...)
    citation: str
    kinds: frozenset           # {(domain kind, range kind)} for nearest-fact lookup
    test: Callable[[Space, Space], bool] = field(repr=False, compare=False)

    def conclusion_text(self) -> str:
        return ", ".join(f"{f}={v}" for f, v in self.conclusions)

    def to_dict(self) -> dict:
        return {"id": self.id, "group": self.group, "matcher": self.matcher,
                "conclusion": self.conclusion_text(), "citation": self.citation}


# ----------------------------------------------------------------- matchers

def space_kind(s: Space) -> str:
    if isinstance(s, Lp):
        return "l1" if s.p == 1 else "lp"
    if isinstance(s, C0):
        return "c0"
    if isinstance(s, FinLp):
        return "fin"
    if isinstance(s, DirectSum):
        return "sum"
    return {"lp-function": "Lp01"}.get(s.tag, s.tag)


def _lp(s, lo=1.0, hi=math.inf, lo_open=False):
    return isinstance(s, Lp) and (s.p > lo if lo_open else s.p >= lo) and s.p < hi


def _classical(s):
    return isinstance(s, (Lp, C0))


def _line(s):
    """A one-dimensional summand (all norms on R coincide)."""
    return isinstance(s, FinLp) and s.n == 1


def _same_fin(a, b):
    return isinstance(a, FinLp) and isinstance(b, FinLp) and (a == b or a.n == b.n == 1)


def _psum_line_pair(X, Y):
    return (isinstance(X, DirectSum) and isinstance(Y, DirectSum)
            and isinstance(X.left, Lp) and isinstance(Y.left, Lp)
            and _line(X.right) and _line(Y.right))


def _psum_mixed(X, Y):
    return (_psum_line_pair(X, Y) and 1 <= X.outer < Y.outer < math.inf
            and 1 <= X.left.p <= Y.left.p < math.inf)


def _psum_same_exponent(X, Y):
    return _psum_mixed(X, Y) and X.left.p == Y.left.p > 1 and X.outer > 1


def _psum_theorem(X, Y):
    if not (isinstance(X, DirectSum) and isinstance(Y, DirectSum)):
        return False
    if not (1 <= X.outer < Y.outer < math.inf and _same_fin(X.right, Y.right)):
        return False
    return X.left == Y.left and _classical(X.left)


def _psum_moduli(X, Y):
    if not (isinstance(X, DirectSum) and isinstance(Y, DirectSum)):
        return False
    parts = (X.left, X.right, Y.left, Y.right)
    if not all(isinstance(s, Lp) for s in parts):
        return False
    s, q, r, p = (v.p for v in parts)
    return X.outer == q and Y.outer == p and 1 < p <= r <= s <= q < math.inf


def _tag(s, *tags):
    return isinstance(s, Opaque) and s.tag in tags


def _zero_modulus(X, Y):
    if isinstance(X, Lp) and X.p == 1:
        return (isinstance(Y, Lp) and Y.p > 1) or isinstance(Y, C0)
    return isinstance(X, C0) and isinstance(Y, Lp)


def _hilbert(X, Y):
    return sp.is_hilbert(X) and sp.is_hilbert(Y)


_K = frozenset
_LP = ("l1", "lp")
_CL = ("l1", "lp", "c0")


def _kinds(doms, rngs):
    return _K((a, b) for a in doms for b in rngs)


RULES: tuple[Rule, ...] = (
    # ---- negatives
    Rule("l1-lp-c0-negative", "negative", "X = ell_1, Y = ell_p (1<=p<inf) or c0",
         (("wmp", "no"),),
         "counterexample: the diagonal x -> sum 2^-j x_j e_j has m(T)=0, is not attained, "
         "and is minimized by the non-weakly null basis of ell_1",
         _kinds(["l1"], _CL), lambda X, Y: isinstance(X, Lp) and X.p == 1 and
         (isinstance(Y, C0) or _lp(Y))),
    Rule("c0-lp-negative", "negative", "X = c0, Y = ell_p (1<=p<inf)",
         (("wmp", "no"),),
         "counterexample: T e_j = 2^-j (e_j - e_1 - ... - e_{j-1}) kills no unit vector, has m(T)=0 "
         "and the partial sums of the basis minimize it",
         _kinds(["c0"], _LP), lambda X, Y: isinstance(X, C0) and _lp(Y)),
    Rule("c0-c0-negative", "negative", "X = Y = c0",
         (("wmp", "no"),),
         "counterexample: diag(2, 1+1/2, 1+1/3, ...) on c0 has m(T)=1, is not attained, "
         "and (e_1/2 + e_n) is a non-weakly null minimizing sequence",
         _kinds(["c0"], ["c0"]), lambda X, Y: isinstance(X, C0) and isinstance(Y, C0)),
    Rule("l1-l1-cppm-negative", "negative", "X = Y = ell_1",
         (("cppm", "no"),),
         "counterexample: an operator T on ell_1 with m(T) <= 1 that is not attained, "
         "plus a rank-two K with m(T+K) >= 3",
         _kinds(["l1"], ["l1"]), lambda X, Y: _lp(X) and _lp(Y) and X.p == Y.p == 1),
    Rule("psum-mixed-exponent-negative", "negative",
         "X = ell_r (+)_p R, Y = ell_s (+)_q R with 1<=p<q<inf and 1<=r<=s<inf",
         (("cppm", "no"), ("wmp", "no")),
         "p-sum lift S(x,z) = (Tx,z) of a non-attaining T with m(T)>0 does not attain, "
         "and S differs from (T,0) by the finite-rank (0,id_Z); WmP fails since WmP implies CPPm",
         _kinds(["sum"], ["sum"]), _psum_mixed),
    Rule("psum-same-exponent-prop-m-negative", "negative",
         "X = ell_s (+)_p R, Y = ell_s (+)_q R with 1<p<q<inf and 1<s<inf",
         (("prop_m", "no"),),
         "the pair is reflexive with property (o) but fails the CPPm, so property (m) must fail",
         _kinds(["sum"], ["sum"]), _psum_same_exponent),
    Rule("psum-theorem-negative", "negative",
         "X = A (+)_p Z, Y = A (+)_q Z with A = ell_r or c0, Z finite-dimensional, 1<=p<q<inf",
         (("cppm", "no"), ("wmp", "no")),
         "p-sum lift theorem with the witness diag(1+1/j) on A (m=1, not attained)",
         _kinds(["sum"], ["sum"]), _psum_theorem),
    Rule("c0-c0-not-opial", "negative", "X = Y = c0",
         (("prop_o", "no"),),
         "(X,X) has property (o) iff X is Opial; in c0 limsup||x+x_n|| = max(||x||, limsup||x_n||) "
         "is not strictly above limsup||x_n|| when ||x|| <= limsup||x_n||",
         _kinds(["c0"], ["c0"]), lambda X, Y: isinstance(X, C0) and isinstance(Y, C0)),
    # ---- positives
    Rule("finite-dimensional", "positive", "X or Y finite-dimensional",
         (("wmp", "yes"),), "pairs with a finite-dimensional side have the WmP",
         _K({("fin", "*"), ("*", "fin")}),
         lambda X, Y: sp.is_finite_dimensional(X) or sp.is_finite_dimensional(Y)),
    Rule("hilbert-pair", "positive", "X and Y Hilbert spaces",
         (("wmp", "yes"), ("prop_m", "yes"), ("prop_o", "yes")),
         "every pair of Hilbert spaces has the WmP; Hilbert spaces have property (M) and the "
         "Opial property, which give (m) and (o)",
         _kinds(["lp", "sum", "Lp01", "fin"], ["lp", "sum", "Lp01", "fin"]), _hilbert),
    Rule("lp-lq", "positive", "X = ell_p (1<p<inf), Y = ell_q (1<=q<inf)",
         (("wmp", "yes"),), "(ell_p, ell_q) has the WmP for 1<p<inf, 1<=q<inf",
         _kinds(["lp"], _LP), lambda X, Y: _lp(X, 1, lo_open=True) and _lp(Y)),
    Rule("lp-c0-corollary", "positive", "X = ell_p (1<p<inf), Y = c0",
         (("wmp", "yes"),),
         "reflexive X with property (m_p) and Y with (m_inf), p finite, give the WmP",
         _kinds(["lp"], ["c0"]), lambda X, Y: _lp(X, 1, lo_open=True) and isinstance(Y, C0)),
    Rule("lp-Lp01", "positive", "X = ell_p, Y = L_p[0,1], 2<=p<inf",
         (("prop_m", "yes"), ("wmp", "yes")),
         "(ell_p, L_p[0,1]) has property (m) for 2<=p<inf via the basis lower bound "
         "limsup||y+Te_n|| >= (||y||^p + m(T)^p)^(1/p), hence the WmP",
         _kinds(["lp"], ["Lp01"]),
         lambda X, Y: _lp(X, 2) and _tag(Y, "lp-function") and Y.p == X.p),
    Rule("psum-moduli-positive", "positive",
         "X = ell_s (+)_q ell_q, Y = ell_r (+)_p ell_p with 1<p<=r<=s<=q<inf",
         (("prop_m", "yes"), ("prop_o", "yes"), ("wmp", "yes")),
         "rho_X = (1+t^s)^(1/s)-1 <= (1+t^r)^(1/r)-1 = delta_Y, the latter above t-1, X reflexive",
         _kinds(["sum"], ["sum"]), _psum_moduli),
    Rule("schur-range", "positive", "Y = ell_1 or finite-dimensional, X reflexive",
         (("wmp", "yes"),),
         "Schur range: a weakly convergent minimizing sequence is mapped to a norm convergent one",
         _kinds(["lp", "sum", "Lp01", "tsirelson", "lorentz", "fin"], ["l1", "fin"]),
         lambda X, Y: sp.is_reflexive(X) and
         ((isinstance(Y, Lp) and Y.p == 1) or sp.is_finite_dimensional(Y))),
    Rule("tsirelson-lorentz-lq", "positive",
         "X = T^p or d(w,p), Y = ell_q with 1<q<=p<inf",
         (("prop_m", "yes"), ("prop_o", "yes"), ("wmp", "yes")),
         "rho_Z <= (1+t^p)^(1/p)-1 <= delta_{ell_q}, Z reflexive",
         _kinds(["tsirelson", "lorentz"], ["lp"]),
         lambda X, Y: _tag(X, "tsirelson", "lorentz") and _lp(Y, 1, lo_open=True)
         and Y.p <= X.p),
    Rule("tsirelson-lorentz-james", "positive", "X = T^p or d(w,p) with 2<=p<inf, Y = J",
         (("prop_m", "yes"), ("prop_o", "yes"), ("wmp", "yes")),
         "rho_Z <= (1+t^p)^(1/p)-1 <= (1+t^2)^(1/2)-1 = delta_J, Z reflexive",
         _kinds(["tsirelson", "lorentz"], ["james"]),
         lambda X, Y: _tag(X, "tsirelson", "lorentz") and X.p >= 2 and _tag(Y, "james")),
    Rule("lq-james", "positive", "X = ell_q with 2<=q<inf, Y = J",
         (("prop_m", "yes"), ("prop_o", "yes"), ("wmp", "yes")),
         "rho_{ell_q} = (1+t^q)^(1/q)-1 <= (1+t^2)^(1/2)-1 = delta_J, ell_q reflexive",
         _kinds(["lp"], ["james"]), lambda X, Y: _lp(X, 2) and _tag(Y, "james")),
    Rule("classical-m-o", "positive", "X, Y in {ell_p (1<=p<inf), c0}",
         (("prop_m", "yes"), ("prop_o", "yes")),
         "ell_p has property (M) and the Opial property, c0 has property (M): (M) on both sides "
         "gives (m), an Opial range or an Opial domain with (M) range gives (o)",
         _kinds(_CL, _CL), lambda X, Y: _classical(X) and _classical(Y)),
    # ---- derived
    Rule("wmp-implies-cppm", "derived", "wmp = yes",
         (("cppm", "yes"),), "every pair with the WmP has the CPPm",
         _K({("*", "*")}), lambda X, Y: False),
    Rule("zero-modulus-cppm", "derived",
         "(ell_1, ell_p) with p>1, (ell_1, c0), (c0, ell_p) with p>=1",
         (("cppm", "yes"),),
         "every operator has m(T)=0, and then T - x*(x)Tx attains its minimum modulus "
         "arbitrarily close to T",
         _kinds(["l1", "c0"], _CL), _zero_modulus),
    Rule("c0-c0-cppm-open", "derived", "X = Y = c0",
         (("cppm", "unknown"),), "open question: whether (c0, c0) has the CPPm",
         _kinds(["c0"], ["c0"]), lambda X, Y: isinstance(X, C0) and isinstance(Y, C0)),
)

_BY_ID = {r.id: r for r in RULES}
MODULI_RULE = ("moduli-corollary",
               "rho_X <= delta_Y, a convexity modulus above t-1, and X reflexive give (m), (o) "
               "and the WmP")


def list_rules() -> list[dict]:
    """The full rule table in priority order, plus the moduli route."""
    rows = [r.to_dict() for r in RULES if r.group != "derived"]
    rows.append({"id": MODULI_RULE[0], "group": "moduli",
                 "matcher": "catalog moduli pass the grid premises",
                 "conclusion": "prop_m=yes, prop_o=yes, wmp=yes", "citation": MODULI_RULE[1]})
    rows += [r.to_dict() for r in RULES if r.group == "derived"]
    return rows


def _apply(rule: Rule, state: dict, chain: list):
    changed = False
    for f, v in rule.conclusions:
        if state[f] == "unknown" and v != "unknown":
            state[f] = v
            changed = True
    if changed or all(v == "unknown" for _, v in rule.conclusions):
        chain.append((rule.id, rule.citation))


def _nearest(X: Space, Y: Space) -> tuple:
    kx, ky = space_kind(X), space_kind(Y)
    exact = [r for r in RULES if (kx, ky) in r.kinds]
    loose = [r for r in RULES if r not in exact and any(
        (a == kx and kx not in _CL) or (b == ky and ky not in _CL) for a, b in r.kinds)]
    # a side that no rule mentions falls back to rules sharing the other side, then wildcards
    side = [r for r in RULES if r not in exact + loose and any(
        a == kx or b == ky for a, b in r.kinds)]
    wild = [r for r in RULES if r not in exact + loose + side and any(
        "*" in k for k in r.kinds)]
    picked = (exact + loose)[:5] or (side + wild)[:5]
    return tuple(f"{r.id}: {r.matcher} => {r.conclusion_text()}" for r in picked)


def classify(q: Union[PairQuery, Space, str], range: Union[Space, str, None] = None) -> Verdict:
    """Verdict for a pair; accepts a :class:`PairQuery` or ``(domain, range)``."""
    if not isinstance(q, PairQuery):
        q = PairQuery(q, range)
    X, Y = q.domain, q.range
    state = dict.fromkeys(FIELDS, "unknown")
    chain: list = []
    for group in ("negative", "positive"):
        for r in RULES:
            if r.group == group and r.test(X, Y):
                _apply(r, state, chain)
    moduli_chain: tuple = ()
    if "unknown" in (state["wmp"], state["prop_m"], state["prop_o"]):
        try:
            mv = wmp_via_moduli(X, Y)
            pm = premise_m(X, Y)
            po_y = premise_o(Y).holds if _in_catalog(Y) else False
            po_x = premise_o(X).holds if _in_catalog(X) else False
        except NotInCatalog:
            mv = None
        if mv is not None:
            moduli_chain = mv.chain
            concl = []
            if pm.holds:
                concl.append(("prop_m", "yes"))
                if po_y or po_x:
                    concl.append(("prop_o", "yes"))
            if mv.wmp == "yes":
                concl.append(("wmp", "yes"))
            fired = [(f, v) for f, v in concl if state[f] == "unknown"]
            for f, v in fired:
                state[f] = v
            if fired:
                chain.append(MODULI_RULE)
    if state["wmp"] == "yes" and state["cppm"] == "unknown":
        _apply(_BY_ID["wmp-implies-cppm"], state, chain)
    for r in RULES:
        if r.group == "derived" and r.id != "wmp-implies-cppm" and r.test(X, Y):
            _apply(r, state, chain)
    assert not (state["wmp"] == "yes" and state["cppm"] == "no"), "inconsistent rule table"
    nearest = _nearest(X, Y) if "unknown" in state.values() else ()
    return Verdict(X, Y, *(state[f] for f in FIELDS), tuple(chain), nearest, moduli_chain)


def _in_catalog(S: Space) -> bool:
    try:
        premise_o(S)
        return True
    except NotInCatalog:
        return False


_MODULI_ROUTES = (MODULI_RULE[0], "psum-moduli-positive")


def explain(q: Union[PairQuery, Space, str], range: Union[Space, str, None] = None) -> str:
    v = classify(q, range)
    lines = [f"pair ({v.domain}, {v.range})"]
    for rid, cite in v.chain:
        concl = _BY_ID[rid].conclusion_text() if rid in _BY_ID else "prop_m=yes, prop_o=yes, wmp=yes"
        lines.append(f"  {rid}: {concl}")
        lines.append(f"      {cite}")
        if rid == MODULI_RULE[0]:
            lines += [f"      grid check: {c}" for c in v.moduli_chain]
    source = {}
    for rid, _ in v.chain:
        concl = _BY_ID[rid].conclusions if rid in _BY_ID else \
            (("prop_m", "yes"), ("prop_o", "yes"), ("wmp", "yes"))
        for f, val in concl:
            if val == getattr(v, f) and val != "unknown":
                source.setdefault(f, rid)
    parts = [f"{f}={getattr(v, f)}" + (f" by {source[f]}" if f in source else "") for f in FIELDS]
    if source.get("wmp") in _MODULI_ROUTES:
        parts.append("WmP by the moduli corollary")
    lines.append("; ".join(parts))
    if v.nearest:
        lines.append("unknown; nearest facts:")
        lines += [f"  {n}" for n in v.nearest]
    return "\n".join(lines)
