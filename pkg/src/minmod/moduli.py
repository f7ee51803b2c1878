"""Moduli of asymptotic uniform convexity and smoothness.

``delta_closed``/``rho_closed`` read a small catalog of closed forms:
the power form ``(1 + t^s)^(1/s) - 1`` and, for ``c0``, the max form
``max(t, 1) - 1``.  ``delta_numeric``/``rho_numeric`` evaluate the
definitions directly with the tail subspace ``span{e_i : i > N}`` standing
in for the finite-codimensional subspaces, which is exact for the
1-symmetric bases of ``ell_p`` and ``c0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import spaces as sp
from .errors import (BadParams, NotInCatalog, NotUnitNorm, SupportExceedsTruncation,
                     UnsupportedSpace)
from .spaces import C0, DirectSum, FinVector, Lp, Opaque, Space

__all__ = [
    "ModulusCurve", "modulus_curve", "delta_closed", "rho_closed", "delta_numeric",
    "rho_numeric", "PremiseResult", "premise_m", "premise_o", "wmp_via_moduli",
    "ModuliVerdict", "default_grid", "power_form",
]

_KINDS = {"delta": "convexity", "convexity": "convexity",
          "rho": "smoothness", "smoothness": "smoothness"}


def power_form(t, s: float):
    """``(1 + t^s)^(1/s) - 1``, evaluated without cancellation for small ``t``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        small = np.expm1(np.log1p(t ** s) / s)
        # for large t use t * ((1 + t^-s)^(1/s)) - 1 to avoid overflow of t^s
        big = t * np.exp(np.log1p(t ** -s) / s) - 1.0
    out = np.where(t <= 1.0, small, big)
    return float(out) if out.ndim == 0 else out


def _max_form(t):
    t = np.asarray(t, dtype=float)
    out = np.maximum(t, 1.0) - 1.0
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ModulusCurve:
    space: Space
    kind: str            # convexity | smoothness
    form: str            # power | max
    s: Optional[float]
    bound: str           # exact | upper | lower
    citation: str

    def __call__(self, t):
        if np.any(np.asarray(t) < 0):
            raise BadParams("t must be nonnegative")
        return power_form(t, self.s) if self.form == "power" else _max_form(t)

    @property
    def one_sided(self) -> bool:
        return self.bound != "exact"

    def describe(self) -> str:
        sym = "delta" if self.kind == "convexity" else "rho"
        rel = {"exact": "=", "upper": "<=", "lower": ">="}[self.bound]
        f = f"(1+t^{sp._fmt(self.s)})^(1/{sp._fmt(self.s)}) - 1" if self.form == "power" \
            else "max(t,1) - 1"
        return f"{sym}_{self.space}(t) {rel} {f}"


_CITE_LP = "ell_p: both asymptotic moduli equal (1+t^p)^(1/p) - 1"
_CITE_C0 = "c0: both asymptotic moduli equal max(t,1) - 1"
_CITE_SUM = ("ell_s (+)_q ell_q and ell_s (+)_p ell_p with p <= s <= q: "
             "rho and delta equal (1+t^s)^(1/s) - 1")
_CITE_JAMES = "James space J: delta = rho = (1+t^2)^(1/2) - 1"
_CITE_UPPER = ("upper ell_p-estimate of constant 1 (p-convexified Tsirelson T^p, Lorentz d(w,p)): "
               "rho <= (1+t^p)^(1/p) - 1")


def modulus_curve(space: Space, kind: str) -> ModulusCurve:
    """Catalog lookup; raises :class:`NotInCatalog` for anything else."""
    try:
        k = _KINDS[kind.lower()]
    except (KeyError, AttributeError):
        raise BadParams(f"kind must be delta or rho, got {kind!r}") from None
    C = ModulusCurve
    if isinstance(space, Lp):
        return C(space, k, "power", space.p, "exact", _CITE_LP)
    if isinstance(space, C0):
        return C(space, k, "max", None, "exact", _CITE_C0)
    if isinstance(space, DirectSum) and isinstance(space.left, Lp) and isinstance(space.right, Lp):
        a, b, r = space.left.p, space.right.p, space.outer
        if r == b:
            if a == b:
                return C(space, k, "power", a, "exact", _CITE_LP)
            if a > 1 and b > 1:
                if k == "smoothness" and a <= b:
                    return C(space, k, "power", a, "exact", _CITE_SUM)
                if k == "convexity" and a >= b:
                    return C(space, k, "power", a, "exact", _CITE_SUM)
    if isinstance(space, Opaque):
        if space.tag == "james":
            return C(space, k, "power", 2.0, "exact", _CITE_JAMES)
        if space.tag in ("tsirelson", "lorentz") and k == "smoothness" and space.p is not None \
                and 1 < space.p < math.inf:
            return C(space, k, "power", space.p, "upper", _CITE_UPPER)
    raise NotInCatalog(f"no catalog entry for the {k} modulus of {space}")


def delta_closed(space: Space, t):
    return modulus_curve(space, "delta")(t)


def rho_closed(space: Space, t):
    return modulus_curve(space, "rho")(t)


# ------------------------------------------------------------------ numeric

_RADII_OUTER = (1.0, 1.25, 2.0, 4.0)
_RADII_INNER = (0.0, 0.25, 0.5, 1.0)


def _row_norms(V: np.ndarray, space: Space) -> np.ndarray:
    A = np.abs(V)
    if isinstance(space, C0) or space.p == math.inf:
        return A.max(axis=1)
    p = space.p
    top = A.max(axis=1, keepdims=True)
    top[top == 0] = 1.0
    return top[:, 0] * np.sum((A / top) ** p, axis=1) ** (1.0 / p)


def _tail_samples(space: Space, N: int, t: float, inner: bool, k: int = 4,
                  count: int = 64, seed: int = 0) -> np.ndarray:
    """Tail vectors supported on ``e_{N+1}..e_{N+k}`` with norms on a radius grid.

    Rows hold the coefficients of ``e_{N+1}..e_{N+k}``.  ``inner=False``
    gives norms ``>= t`` (for the convexity infimum), ``inner=True`` norms
    ``<= t`` (smoothness supremum).
    """
    rng = np.random.default_rng([seed, N])
    D = np.vstack([np.eye(k)[:1], rng.normal(size=(count, k))])
    D = D / _row_norms(D, space)[:, None]
    radii = np.array(_RADII_INNER if inner else _RADII_OUTER) * t
    return (D[:, None, :] * radii[None, :, None]).reshape(-1, k)


def _numeric(space: Space, x: FinVector, t: float, N: int, inner: bool) -> float:
    if not isinstance(space, (Lp, C0)):
        raise UnsupportedSpace(f"numeric moduli need ell_p or c0, got {space}")
    if x.space != space:
        raise BadParams(f"x lives in {x.space}, not {space}")
    if abs(sp.norm(x) - 1.0) > 1e-10:
        raise NotUnitNorm(f"x must be a unit vector, has norm {sp.norm(x)!r}")
    if t < 0:
        raise BadParams("t must be nonnegative")
    if x.max_index() > N:
        raise SupportExceedsTruncation(f"support of x reaches {x.max_index()} > N = {N}")
    Y = _tail_samples(space, N, t, inner)
    head = np.zeros(N)
    for i, c in x.coeffs.items():
        head[i - 1] = c
    V = np.hstack([np.broadcast_to(head, (Y.shape[0], N)), Y])
    vals = _row_norms(V, space) - 1.0
    return float(vals.max() if inner else vals.min())


def delta_numeric(space: Space, x: FinVector, t: float, N: int) -> float:
    """``inf{||x + y|| - 1 : y in the tail past N, ||y|| >= t}`` over sampled tails."""
    return _numeric(space, x, t, N, inner=False)


def rho_numeric(space: Space, x: FinVector, t: float, N: int) -> float:
    """``sup{||x + y|| - 1 : y in the tail past N, ||y|| <= t}`` over sampled tails."""
    return _numeric(space, x, t, N, inner=True)


# ---------------------------------------------------------------- premises

def default_grid(n: int = 200) -> np.ndarray:
    return np.logspace(-3, 3, n)


@dataclass(frozen=True)
class PremiseResult:
    holds: bool
    fails_at: Optional[float]
    margin: float
    citation: str = ""

    def to_dict(self) -> dict:
        return {"holds": self.holds, "fails_at": self.fails_at, "margin": self.margin,
                "citation": self.citation}


def premise_m(X: Space, Y: Space, t_grid: Sequence[float] | None = None) -> PremiseResult:
    """Check ``rho_X(t) <= delta_Y(t)`` (slack 1e-12) on the grid.

    A one-sided catalog entry is only usable when it points the safe way:
    an upper bound for ``rho_X`` or a lower bound for ``delta_Y``.
    """
    t = np.asarray(default_grid() if t_grid is None else t_grid, dtype=float)
    rx, dy = modulus_curve(X, "rho"), modulus_curve(Y, "delta")
    cite = f"{rx.describe()}; {dy.describe()}"
    if rx.bound == "lower" or dy.bound == "upper":
        return PremiseResult(False, None, math.nan, cite + "; bound points the wrong way")
    diff = dy(t) - rx(t)
    bad = np.nonzero(diff < -1e-12)[0]
    fails = float(t[bad[0]]) if bad.size else None
    return PremiseResult(not bad.size, fails, float(np.min(diff)), cite)


def premise_o(space: Space, t_grid: Sequence[float] | None = None) -> PremiseResult:
    """Check ``delta(t) > t - 1`` strictly on the grid points with ``t >= 1``."""
    t = np.asarray(default_grid() if t_grid is None else t_grid, dtype=float)
    t = t[t >= 1.0]
    curve = modulus_curve(space, "delta")
    cite = curve.describe()
    if curve.bound == "upper":
        return PremiseResult(False, None, math.nan, cite + "; only an upper bound is known")
    if curve.form == "power":
        # (1+t^s)^(1/s) - t written as t * expm1(log1p(t^-s)/s), positive for every finite t
        margins = t * np.expm1(np.log1p(t ** -curve.s) / curve.s)
        cite += "; (1+t^s)^(1/s) - t > 0 for every t since t^-s > 0"
    else:
        margins = curve(t) - (t - 1.0)
    bad = np.nonzero(margins <= 0)[0]
    fails = float(t[bad[0]]) if bad.size else None
    return PremiseResult(not bad.size, fails, float(np.min(margins)) if t.size else math.nan, cite)


@dataclass(frozen=True)
class ModuliVerdict:
    wmp: str               # yes | inconclusive
    chain: tuple

    def to_dict(self) -> dict:
        return {"wmp": self.wmp, "chain": list(self.chain)}


def wmp_via_moduli(X: Space, Y: Space) -> ModuliVerdict:
    """WmP from ``rho_X <= delta_Y``, a convexity modulus above ``t - 1``, and ``X`` reflexive.

    Never returns a negative verdict.
    """
    chain = []
    pm = premise_m(X, Y)
    chain.append(f"rho_X <= delta_Y: {'holds' if pm.holds else 'fails'} ({pm.citation})")
    po = None
    for S in (X, Y):
        try:
            r = premise_o(S)
        except NotInCatalog:
            continue
        if r.holds:
            po = (S, r)
            break
    chain.append(f"delta > t-1: {'holds on ' + str(po[0]) if po else 'not established'}")
    refl = sp.is_reflexive(X)
    chain.append(f"{X} reflexive: {'yes' if refl else 'no'}")
    ok = pm.holds and po is not None and refl
    return ModuliVerdict("yes" if ok else "inconclusive", tuple(chain))
