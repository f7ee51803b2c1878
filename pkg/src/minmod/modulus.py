"""Minimum modulus ``m(T) = inf{||Tx|| : ||x|| = 1}`` on truncations.

At each truncation level ``N`` the domain is restricted to
``span{e_1..e_N}``; the resulting finite problem is solved exactly where
the structure allows it and by a seeded multistart descent otherwise:

* ``svd``: every space involved is Euclidean, so ``m_N`` is the smallest
  singular value of the truncated matrix;
* ``diagonal``: each column has at most one nonzero, in distinct rows,
  and the range exponent does not exceed the domain exponent;
* ``closed-form``: a p-sum lift ``(x, z) -> (Tx, z)`` reduces to the inner
  operator plus a one-dimensional minimization over the mass split;
* ``multistart``: smoothed projected gradient descent on the sphere from
  the previous certificate, the canonical basis, the constant direction and
  scrambled Sobol directions, followed by an exact face or quasi-Newton
  polish of the best candidates.

Every level reports a unit certificate ``x`` with ``||T x|| = m_N``; the
previous level's certificate is always among the candidates, so ``m_N`` is
non-increasing in ``N``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize
from scipy.linalg import null_space as scipy_null_space
from scipy.stats import norm as _gauss
from scipy.stats import qmc

from . import operators as ops
from . import spaces as sp
from ._dense import DenseNorm
from .errors import (BadExponents, BadParams, DimensionTooLarge, FunctionalNotFound,
                     InvalidInput, NonConvergent, OpaqueSpace)
from .operators import OperatorSpec, PSumLift, Truncation
from .spaces import C0, DirectSum, FinLp, FinVector, Lp, Space

__all__ = [
    "SolverConfig", "LevelResult", "MinModReport", "min_modulus", "solve_level",
    "brute_force_min", "psum_closed_form", "PSumMinimum", "golden_section",
    "attainment_check", "AttainmentResult", "attainify", "AttainifyResult",
    "norming_functional", "dual_norm",
]

_TIE = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    trunc_levels: tuple = (8, 16, 32, 64, 128, 256)
    starts: int = 64
    seed: int = 0
    tol: float = 1e-9
    max_iters: int = 5000
    method: str = "auto"   # "auto" or "multistart"

    def __post_init__(self):
        levels = tuple(int(n) for n in self.trunc_levels)
        object.__setattr__(self, "trunc_levels", levels)
        if not levels or levels[0] < 1 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise InvalidInput(f"trunc_levels must be strictly increasing positive integers, got {levels}")
        if not self.tol > 0:
            raise InvalidInput("tol must be positive")
        if self.starts < 1 or self.max_iters < 1:
            raise InvalidInput("starts and max_iters must be positive")
        if self.method not in ("auto", "multistart"):
            raise InvalidInput(f"unknown method {self.method!r}")

    def with_levels(self, levels) -> "SolverConfig":
        return SolverConfig(tuple(levels), self.starts, self.seed, self.tol,
                            self.max_iters, self.method)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trunc_levels"] = list(self.trunc_levels)
        return d


@dataclass(frozen=True)
class LevelResult:
    N: int
    m: float
    certificate: FinVector
    method: str
    iterations: int = 0
    starts_used: int = 0

    def to_dict(self) -> dict:
        return {"N": self.N, "m": self.m, "certificate": self.certificate.to_dict(),
                "method": self.method, "iterations": self.iterations,
                "starts_used": self.starts_used}


@dataclass(frozen=True)
class MinModReport:
    levels: tuple
    converged: bool
    config: SolverConfig
    notes: tuple = ()

    @property
    def m(self) -> float:
        """The finest-level estimate."""
        return self.levels[-1].m

    @property
    def certificate(self) -> FinVector:
        return self.levels[-1].certificate

    def estimates(self) -> list[float]:
        return [lv.m for lv in self.levels]

    def to_dict(self) -> dict:
        return {"levels": [lv.to_dict() for lv in self.levels],
                "converged": self.converged,
                "config": self.config.to_dict(),
                "notes": list(self.notes)}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# ------------------------------------------------------------ golden section

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-12, max_iter: int = 500) -> tuple[float, float, int]:
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x), iterations)``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while abs(b - a) > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        it += 1
    x = 0.5 * (a + b)
    best = min([(f(x), x), (f(a), a), (f(b), b)])
    return best[1], best[0], it


class PSumMinimum(NamedTuple):
    value: float
    lam: float


def _psum_objective(mT, p, q):
    return lambda lam: (mT ** q * lam ** (q / p) + (1.0 - lam) ** (q / p)) ** (1.0 / q)


def _psum_min(mT: float, p: float, q: float, tol: float = 1e-12) -> PSumMinimum:
    g = _psum_objective(mT, p, q)
    if q <= p:
        # concave or linear in lam: an endpoint is optimal
        return min(PSumMinimum(g(1.0), 1.0), PSumMinimum(g(0.0), 0.0))
    r = q / p - 1.0
    # ``g`` is flat at its minimizer, so bracket the root of the derivative of
    # the inner convex function instead; its magnitude is V-shaped there.
    deriv = lambda lam: abs(mT ** q * lam ** r - (1.0 - lam) ** r)
    lam, _, _ = golden_section(deriv, 0.0, 1.0, tol)
    return PSumMinimum(g(lam), lam)


def psum_closed_form(mT: float, p: float, q: float) -> PSumMinimum:
    """``min over lam in [0,1] of (mT^q lam^(q/p) + (1-lam)^(q/p))^(1/q)``.

    This is the minimum modulus of ``(x, z) -> (Tx, z)`` when the inner
    operator has minimum modulus ``mT`` and attains it; for ``mT = 1`` the
    minimizer is ``lam = 1/2`` and the value ``2^((p-q)/(pq))``.
    """
    if not (1 <= p < q < math.inf):
        raise BadExponents(f"need 1 <= p < q < inf, got p={p}, q={q}")
    if mT < 0:
        raise BadParams("mT must be nonnegative")
    return _psum_min(float(mT), float(p), float(q))


# ------------------------------------------------------------- exact methods

def _all_euclidean(space: Space) -> bool:
    if isinstance(space, DirectSum):
        return space.outer == 2 and _all_euclidean(space.left) and _all_euclidean(space.right)
    return isinstance(space, (Lp, FinLp)) and space.p == 2


def _svd_level(M: np.ndarray):
    r, n = M.shape
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    if r < n:
        return 0.0, vt[-1]
    return float(s[-1]), vt[-1]


def _diagonal_level(trunc: Truncation):
    dom, rng = trunc.domain, trunc.range
    if isinstance(dom, DirectSum) or isinstance(rng, DirectSum):
        return None
    if sp.exponent(rng) > sp.exponent(dom):
        return None
    M = trunc.matrix
    nz = M != 0
    if np.any(nz.sum(axis=0) > 1) or np.any(nz.sum(axis=1) > 1):
        return None
    d = np.abs(M).max(axis=0) if M.shape[0] else np.zeros(M.shape[1])
    j = int(np.argmin(d))
    x = np.zeros(M.shape[1])
    x[j] = 1.0
    return float(d[j]), x


# ----------------------------------------------------------------- multistart

def _sobol_directions(n: int, count: int, seed_seq) -> np.ndarray:
    m = max(0, math.ceil(math.log2(max(count, 1))))
    sobol = qmc.Sobol(d=n, scramble=True, seed=np.random.default_rng(seed_seq))
    u = sobol.random_base2(m)[:count]
    u = np.clip(u, 1e-12, 1 - 1e-12)
    return _gauss.ppf(u).T


def _smooth_ratio(M, dn, rn, X, mu):
    rv, rg = rn.smooth(M @ X, mu)
    dv, dg = dn.smooth(X, mu)
    f = rv / dv
    g = (M.T @ rg) / dv - dg * (rv / dv ** 2)
    return f, g


def _exact_ratio(M, dn, rn, X):
    return rn.value(M @ X) / dn.value(X)


def _descend(M, dn, rn, X, cfg, smooth_problem: bool, budget: int | None = None):
    """Vectorized projected gradient descent with per-start step control."""
    X = X / dn.value(X)
    S = X.shape[1]
    step = np.full(S, 0.1)
    mu = 0.0 if smooth_problem else 1e-2
    mu_floor = 1e-10
    best_hist = []
    f, g = _smooth_ratio(M, dn, rn, X, mu)
    it = 0
    window = 25
    # descent only has to reach the right basin or face; polishing finishes
    if budget is None:
        budget = 400 if smooth_problem else 1500
    budget = min(cfg.max_iters, budget)
    while it < budget:
        it += 1
        gn = np.sqrt(np.sum(g * g, axis=0))
        gn = np.where(gn > 0, gn, 1.0)
        Xt = X - (step / gn) * g
        Xt = Xt / dn.value(Xt)
        ft, gt = _smooth_ratio(M, dn, rn, Xt, mu)
        ok = ft < f
        X[:, ok], f[ok], g[:, ok] = Xt[:, ok], ft[ok], gt[:, ok]
        step = np.where(ok, np.minimum(step * 1.5, 1.0), step * 0.5)
        if it % window == 0:
            best = float(np.min(_exact_ratio(M, dn, rn, X)))
            best_hist.append(best)
            stalled = (len(best_hist) > 1 and
                       best_hist[-2] - best <= 1e-8 * max(abs(best), 1e-300))
            tiny_steps = np.all(step < 1e-13)
            if stalled or tiny_steps:
                if mu > mu_floor:
                    mu = max(mu * 0.1, mu_floor)
                    step = np.maximum(step, 1e-3)
                    f, g = _smooth_ratio(M, dn, rn, X, mu)
                else:
                    break
    return X, it


def _polish_smooth(M, dn, rn, x):
    def fun(y):
        v, g = _smooth_ratio(M, dn, rn, y[:, None], 0.0)
        return float(v[0]), g[:, 0]
    res = optimize.minimize(fun, x, jac=True, method="L-BFGS-B",
                            options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-13})
    return res.x, int(res.nit)


def _face_lp(A: np.ndarray, p_range: float, eq_row, eq_rhs, bounds):
    """min ||A y|| over {eq_row . y = eq_rhs, bounds}, range exponent 1 or inf."""
    r, n = A.shape
    if p_range == 1:
        # variables (y, t), t_i >= |(A y)_i|
        c = np.concatenate([np.zeros(n), np.ones(r)])
        A_ub = np.block([[A, -np.eye(r)], [-A, -np.eye(r)]])
        t_bounds = [(0, None)] * r
    else:
        c = np.concatenate([np.zeros(n), [1.0]])
        A_ub = np.block([[A, -np.ones((r, 1))], [-A, -np.ones((r, 1))]])
        t_bounds = [(0, None)]
    A_eq = None if eq_row is None else np.concatenate([eq_row, np.zeros(len(c) - n)])[None, :]
    b_eq = None if eq_row is None else [eq_rhs]
    res = optimize.linprog(c, A_ub=A_ub, b_ub=np.zeros(2 * r), A_eq=A_eq, b_eq=b_eq,
                           bounds=list(bounds) + t_bounds, method="highs-ds",
                           options={"primal_feasibility_tolerance": 1e-10,
                                    "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        return None
    return res.x[:n], int(getattr(res, "nit", 0) or 0)


def _refine_vertex(A, y, free, p_range, sum_row: bool):
    """Re-solve the active equations of an LP optimum exactly.

    Coordinates outside ``free`` keep their values; ``sum_row`` adds the
    constraint ``sum(y[free]) = 1 - sum(y[~free])``.
    """
    r = A @ y
    if not np.all(np.isfinite(r)):
        return None
    scale = max(float(np.max(np.abs(r))), 1e-300)
    fixed = ~free
    b0 = A[:, fixed] @ y[fixed]
    Af = A[:, free]
    rows, rhs = [], []
    if p_range == 1:
        for i in np.nonzero(np.abs(r) <= 1e-6 * scale)[0]:
            rows.append(Af[i])
            rhs.append(-b0[i])
    else:
        top = np.nonzero(np.abs(r) >= scale * (1 - 1e-6))[0]
        if not top.size:
            return None
        k0 = top[0]
        s0 = math.copysign(1.0, r[k0])
        for i in top[1:]:
            si = math.copysign(1.0, r[i])
            rows.append(si * Af[i] - s0 * Af[k0])
            rhs.append(-(si * b0[i] - s0 * b0[k0]))
    if sum_row:
        rows.append(np.ones(Af.shape[1]))
        rhs.append(1.0 - float(np.sum(y[fixed])))
    if not rows:
        return None
    z, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    out = y.copy()
    out[free] = z
    return out


def _ascend_polytope(M, dn, p_range, x, max_steps=50):
    """Successive linearization of ``max ||y||`` over ``{||M y|| <= 1}``.

    Each step maximizes the linearized domain norm by an LP, which cannot
    decrease the norm, and ends at a vertex.  Returns ``None`` when the
    polytope is unbounded (the truncation is not injective).
    """
    m, n = M.shape
    if p_range == 1:
        A_ub = np.block([[M, -np.eye(m)], [-M, -np.eye(m)],
                         [np.zeros((1, n)), np.ones((1, m))]])
        b_ub = np.concatenate([np.zeros(2 * m), [1.0]])
        extra = m
    else:
        A_ub = np.vstack([M, -M])
        b_ub = np.ones(2 * m)
        extra = 0
    bounds = [(None, None)] * n + [(0, None)] * extra
    y = x / max(float(_polytope_gauge(M @ x, p_range)), 1e-300)
    cur = float(dn.value(y[:, None])[0])
    for _ in range(max_steps):
        _, g = dn.smooth(y[:, None], 0.0)
        c = np.concatenate([-g[:, 0], np.zeros(extra)])
        res = optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs-ds",
                               options={"primal_feasibility_tolerance": 1e-10,
                                        "dual_feasibility_tolerance": 1e-10})
        if res.status == 3:
            return None
        if res.status != 0:
            break
        z = res.x[:n]
        val = float(dn.value(z[:, None])[0])
        if not val > cur * (1 + 1e-14):
            break
        y, cur = z, val
    return y


def _polytope_gauge(r, p_range):
    return np.sum(np.abs(r)) if p_range == 1 else np.max(np.abs(r), initial=0.0)


def _vertex(M, sel, r, p_range):
    """The vertex of ``{||M y|| <= 1}`` picked out by the index set ``sel``."""
    n = M.shape[1]
    if p_range == 1:
        B = scipy_null_space(M[sel]) if len(sel) else np.eye(n)
        if B.shape[1] == 0:
            return None
        return B[:, 0] if B.shape[1] == 1 else B @ (B.T @ r)
    sg = np.where(M[sel] @ r < 0, -1.0, 1.0)
    y, *_ = np.linalg.lstsq(M[sel], sg, rcond=None)
    return y


def _polish_kinks(M, dn, rn, x, p_range, max_hops=10):
    """Vertex refinement for a smooth domain and an ell_1 or sup-norm range.

    Minimizing the ratio is maximizing the convex domain norm over the
    polytope ``{||M y|| <= 1}``, so a minimizer sits at a vertex: ``n - 1``
    vanishing entries of ``M y`` for ell_1, ``n`` entries of maximal modulus
    for the sup norm.  The vertex is guessed from ``x``, solved exactly,
    then improved by swapping the boundary index of the selection with its
    nearest outside neighbours.
    """
    m, n = M.shape
    k = n - 1 if p_range == 1 else n
    if k > m or (p_range != 1 and k == 0):
        return x, 0

    def ratio(y):
        return math.inf if y is None or not np.any(y) else \
            float(_exact_ratio(M, dn, rn, y[:, None])[0])

    mag = np.abs(M @ x)
    order = list(np.argsort(mag if p_range == 1 else -mag, kind="stable"))
    sel, rest = order[:k], order[k:]
    best = _vertex(M, sel, x, p_range)
    best_val = ratio(best)
    hops = 0
    while hops < max_hops and rest and sel:
        hops += 1
        improved = False
        for i in range(max(0, len(sel) - 3), len(sel)):
            for j in range(min(3, len(rest))):
                s2 = sel[:i] + [rest[j]] + sel[i + 1:]
                y = _vertex(M, s2, best if best is not None else x, p_range)
                v = ratio(y)
                if v < best_val * (1 - 1e-14):
                    best, best_val = y, v
                    sel, rest = s2, rest[:j] + [sel[i]] + rest[j + 1:]
                    improved = True
                    break
            if improved:
                break
        if not improved:
            break
    if best is None or not best_val < ratio(x):
        return x, hops
    return best, hops


def _polish_l1_face(M, dn, rn, x, p_range):
    """Minimize over the simplex face of the ell_1 sphere containing ``x``."""
    sigma = np.where(x < 0, -1.0, 1.0)
    A = M * sigma
    n = len(x)
    if p_range in (1, math.inf):
        out = _face_lp(A, p_range, np.ones(n), 1.0, [(0, None)] * n)
        if out is None:
            return x, 0
        y, nit = out
        y = np.maximum(y, 0.0)
        v = _refine_vertex(A, y, y > 1e-9 * y.max(), p_range, True)
        if v is not None and np.all(v >= 0) and \
                rn.value(A @ v)[0] / v.sum() <= rn.value(A @ y)[0] / y.sum():
            y = v
        return sigma * y, nit
    y0 = np.abs(x) / max(np.abs(x).sum(), 1e-300)
    f0 = max(float(rn.value(A @ y0)[0]), 1e-300)

    def fun(y):
        v, g = rn.smooth((A @ y)[:, None], 0.0)
        return float(v[0]) / f0, (A.T @ g[:, 0]) / f0
    res = optimize.minimize(fun, y0, jac=True, method="SLSQP", bounds=[(0, None)] * n,
                            constraints=[{"type": "eq", "fun": lambda y: y.sum() - 1.0,
                                          "jac": lambda y: np.ones(n)}],
                            options={"maxiter": 500, "ftol": 1e-16})
    return sigma * np.maximum(res.x, 0.0), int(res.nit)


def _polish_sup_face(M, dn, rn, x, p_range):
    """Minimize over the face ``x_k = sign`` of the ell_inf sphere containing ``x``."""
    k = int(np.argmax(np.abs(x)))
    s = 1.0 if x[k] >= 0 else -1.0
    n = len(x)
    bounds = [(-1.0, 1.0)] * n
    bounds[k] = (s, s)
    if p_range in (1, math.inf):
        out = _face_lp(M, p_range, None, None, bounds)
        if out is None:
            return x, 0
        y = np.clip(out[0], -1.0, 1.0)
        y[k] = s
        free = np.abs(y) < 1 - 1e-9
        v = _refine_vertex(M, y, free, p_range, False)
        if v is not None and np.all(np.abs(v) <= 1) and \
                rn.value(M @ v)[0] <= rn.value(M @ y)[0]:
            y = v
        return y, out[1]
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    free = np.arange(n) != k
    if p_range == 2:
        res = optimize.lsq_linear(M[:, free], -s * M[:, k], bounds=(lo[free], hi[free]),
                                  method="bvls", tol=1e-15)
        y = np.empty(n)
        y[free], y[k] = res.x, s
        return y, int(res.nit)
    y0 = np.clip(x / np.abs(x[k]), -1.0, 1.0)
    y0[k] = s
    f0 = max(float(rn.value(M @ y0)[0]), 1e-300)

    def fun(z):
        y = np.empty(n)
        y[free], y[k] = z, s
        v, g = rn.smooth((M @ y)[:, None], 0.0)
        return float(v[0]) / f0, (M.T @ g[:, 0])[free] / f0
    res = optimize.minimize(fun, y0[free], jac=True, method="L-BFGS-B",
                            bounds=list(zip(lo[free], hi[free])),
                            options={"maxiter": 2000, "ftol": 1e-16, "gtol": 1e-14})
    y = np.empty(n)
    y[free], y[k] = res.x, s
    return y, int(res.nit)


def _multistart_level(trunc: Truncation, cfg: SolverConfig, extra: Sequence[np.ndarray]):
    M = trunc.matrix
    n = M.shape[1]
    dn = DenseNorm.build(trunc.domain, trunc.domain_layout)
    rn = DenseNorm.build(trunc.range, trunc.range_layout)
    seed_seq = np.random.SeedSequence([cfg.seed & (2 ** 63 - 1), trunc.N])
    cols = [v for v in extra if np.any(v)]
    cols += list(np.eye(n))
    cols.append(np.ones(n))
    X0 = np.column_stack(cols + list(_sobol_directions(n, cfg.starts, seed_seq).T))
    X0 = X0 / dn.value(X0)
    raw = _exact_ratio(M, dn, rn, X0)

    # descend the hints, the Sobol starts and the best few deterministic starts
    n_fixed = len(cols)
    n_hint = len(cols) - n - 1
    fixed_rank = np.argsort(raw[n_hint:n_fixed], kind="stable")[:max(4, cfg.starts // 4)] + n_hint
    chosen = np.unique(np.concatenate([np.arange(n_hint), fixed_rank,
                                       np.arange(n_fixed, X0.shape[1])])).astype(int)
    dom_leaves = dn.leaf_exponents()
    rng_leaves = rn.leaf_exponents()
    smooth = all(1 < p < math.inf for p in dom_leaves + rng_leaves)
    plain_dom = not isinstance(trunc.domain, DirectSum)
    plain_rng = not isinstance(trunc.range, DirectSum)
    kink_range = plain_rng and all(p > 1 for p in dom_leaves) and rng_leaves[0] in (1, math.inf)
    # with a piecewise linear range the LP ascent does the fine work
    Xd, iters = _descend(M, dn, rn, X0[:, chosen].copy(), cfg, smooth,
                         budget=300 if kink_range else None)
    desc = _exact_ratio(M, dn, rn, Xd)

    cand = raw.copy()
    best_x = X0.copy()
    better = desc < raw[chosen]
    cand[chosen[better]] = desc[better]
    best_x[:, chosen[better]] = Xd[:, better]

    p_dom = dom_leaves[0] if plain_dom else None
    if smooth or (p_dom not in (1, math.inf)) or not plain_rng:
        polisher = "smooth" if all(p > 1 for p in dom_leaves) else None
    else:
        polisher = "l1" if p_dom == 1 else "sup"
    k = min(8 if kink_range else 4, best_x.shape[1])
    order = np.argsort(cand, kind="stable")[:k]
    for j in order:
        x = best_x[:, j]
        try:
            if polisher == "smooth":
                if kink_range:
                    # the range norm is piecewise linear: LP ascent, then an exact vertex
                    y, nit = x, 0
                    z = _ascend_polytope(M, dn, rng_leaves[0], x)
                    if z is not None and _exact_ratio(M, dn, rn, z[:, None])[0] < \
                            _exact_ratio(M, dn, rn, x[:, None])[0]:
                        y = z
                    y, nit = _polish_kinks(M, dn, rn, y, rng_leaves[0])
                else:
                    y, nit = _polish_smooth(M, dn, rn, x)
            elif polisher == "l1":
                y, nit = _polish_l1_face(M, dn, rn, x, rng_leaves[0])
            elif polisher == "sup":
                y, nit = _polish_sup_face(M, dn, rn, x, rng_leaves[0])
            else:
                continue
        except (ValueError, np.linalg.LinAlgError):
            continue
        iters += nit
        if not np.all(np.isfinite(y)) or not np.any(y):
            continue
        y = y / dn.value(y)[0]
        val = float(_exact_ratio(M, dn, rn, y[:, None])[0])
        if val < cand[j]:
            cand[j] = val
            best_x[:, j] = y
    j = _pick(cand)
    return float(cand[j]), best_x[:, j], iters, X0.shape[1]


def _pick(values: np.ndarray) -> int:
    """Lowest index among the values tied with the minimum."""
    vmin = float(np.min(values))
    tied = np.nonzero(values <= vmin + _TIE * max(abs(vmin), 1e-300))[0]
    return int(tied[0])


# ------------------------------------------------------------------ levels

def _best_basis(trunc: Truncation) -> np.ndarray:
    n = trunc.matrix.shape[1]
    dn = DenseNorm.build(trunc.domain, trunc.domain_layout)
    rn = DenseNorm.build(trunc.range, trunc.range_layout)
    E = np.eye(n)
    return E[:, _pick(_exact_ratio(trunc.matrix, dn, rn, E))]


def _evaluate(op: OperatorSpec, trunc: Truncation, x: np.ndarray):
    v = trunc.to_vector(x)
    if sp.norm(v) == 0:
        return math.inf, None
    v = sp.normalize(v)
    return sp.norm(ops.apply(op, v)), v


def solve_level(op: OperatorSpec, N: int, cfg: SolverConfig,
                hints: Sequence[FinVector] = ()) -> LevelResult:
    """Minimum of ``||T x||`` over the unit sphere of ``span{e_1..e_N}``."""
    trunc = ops.truncate(op, N)
    hint_x = []
    for h in hints:
        try:
            hint_x.append(trunc.from_vector(h))
        except Exception:
            continue
    method, iters, used = None, 0, 0
    pool: list[tuple[np.ndarray, str]] = [(x, "hint") for x in hint_x]
    pool.append((_best_basis(trunc), "hint"))
    if cfg.method == "auto":
        body = op.body
        if isinstance(body, PSumLift) and op.domain.right == op.range.right:
            inner = solve_level(body.inner, N, cfg,
                                [h.left for h in hints if h.is_pair])
            lam = _psum_min(inner.m, op.domain.outer, op.range.outer).lam
            z = sp.basis(op.domain.right, 1)
            cert = sp.pair(op.domain, inner.certificate * lam ** (1 / op.domain.outer),
                           z * (1 - lam) ** (1 / op.domain.outer))
            pool.append((trunc.from_vector(cert), "closed-form"))
            iters, used = inner.iterations, inner.starts_used
        elif _all_euclidean(op.domain) and _all_euclidean(op.range):
            pool.append((_svd_level(trunc.matrix)[1], "svd"))
        elif (d := _diagonal_level(trunc)) is not None:
            pool.append((d[1], "diagonal"))
    if not any(tag not in ("hint",) for _, tag in pool):
        _, x, iters, used = _multistart_level(trunc, cfg, hint_x)
        pool.append((x, "multistart"))
    values = []
    vecs = []
    for x, tag in pool:
        val, v = _evaluate(op, trunc, x)
        values.append(val)
        vecs.append(v)
    j = _pick(np.array(values))
    # the method tag names the solver that produced the problem's answer
    method = next(tag for _, tag in reversed(pool))
    return LevelResult(N, float(values[j]), vecs[j], method, iters, used)


def min_modulus(op: OperatorSpec, cfg: SolverConfig | None = None,
                hints: Sequence[FinVector] = (), strict: bool = False) -> MinModReport:
    """Trace of ``m_N`` over ``cfg.trunc_levels``.

    With ``strict=True`` a trace that has not stabilized raises
    :class:`~minmod.errors.NonConvergent` (carrying the report); otherwise
    the ``converged`` flag records it.
    """
    cfg = cfg or SolverConfig()
    if sp.is_opaque(op.domain) or sp.is_opaque(op.range):
        raise OpaqueSpace("minimum modulus needs a vector model for both spaces")
    levels: list[LevelResult] = []
    notes = []
    if isinstance(op.domain, C0) or isinstance(op.range, C0):
        notes.append("c0 truncated as ell_inf^N")
    dim = sp.dimension(op.domain)
    for N in cfg.trunc_levels:
        prev = [levels[-1].certificate] if levels else []
        lv = solve_level(op, N, cfg, prev + list(hints))
        if levels and lv.m > levels[-1].m:
            lv = LevelResult(N, levels[-1].m, levels[-1].certificate, lv.method,
                             lv.iterations, lv.starts_used)
        levels.append(lv)
        if dim is not None and N >= dim:
            notes.append(f"domain dimension {dim} exhausted at N={N}")
            break
    ms = [lv.m for lv in levels]
    converged = (len(ms) >= 2 and abs(ms[-1] - ms[-2]) <= cfg.tol) or \
        (max(ms) - min(ms) <= cfg.tol) or (dim is not None and levels[-1].N >= dim)
    report = MinModReport(tuple(levels), bool(converged), cfg, tuple(notes))
    if strict and not converged:
        raise NonConvergent("truncation levels exhausted before the estimates stabilized", report)
    return report


# -------------------------------------------------------------- brute force

def _sphere_directions(d: int, grid: int) -> np.ndarray:
    """Quasi-uniform Euclidean directions in R^d (one of each ±pair)."""
    if d == 1:
        return np.ones((1, 1))
    polar = np.linspace(0.0, math.pi, grid)
    last = np.linspace(0.0, math.pi, grid, endpoint=False)
    angles = np.meshgrid(*([polar] * (d - 2) + [last]), indexing="ij")
    angles = [a.ravel() for a in angles]
    u = np.ones((d, angles[0].size))
    sin_prod = np.ones(angles[0].size)
    for i, a in enumerate(angles):
        u[i] = sin_prod * np.cos(a)
        sin_prod = sin_prod * np.sin(a)
    u[d - 1] = sin_prod
    return u


def brute_force_min(op: OperatorSpec, grid: int, dim: int | None = None) -> float:
    """Grid upper bound on the minimum modulus over a domain of dimension <= 4.

    ``grid`` is the number of points per angle of the hyperspherical grid,
    so dimension ``d`` evaluates about ``grid^(d-1)`` directions.

    ``dim`` truncates an infinite-dimensional domain; finite domains use
    their own dimension.
    """
    if grid < 1:
        raise InvalidInput("grid must be positive")
    d = sp.dimension(op.domain)
    N = dim if dim is not None else d
    if N is None:
        raise DimensionTooLarge("infinite-dimensional domain: pass dim <= 4")
    trunc = ops.truncate(op, N)
    n = trunc.matrix.shape[1]
    if n > 4:
        raise DimensionTooLarge(f"brute force needs domain dimension <= 4, got {n}")
    dn = DenseNorm.build(trunc.domain, trunc.domain_layout)
    rn = DenseNorm.build(trunc.range, trunc.range_layout)
    U = _sphere_directions(n, grid)
    best = math.inf
    chunk = 200_000
    for k in range(0, U.shape[1], chunk):
        X = U[:, k:k + chunk]
        best = min(best, float(np.min(_exact_ratio(trunc.matrix, dn, rn, X))))
    return best


# -------------------------------------------------------- attainment checks

@dataclass(frozen=True)
class AttainmentResult:
    status: str   # attained_at_truncation | rule_based_non_attainment | undecided
    witness: Optional[FinVector] = None
    citation: Optional[str] = None
    report: Optional[MinModReport] = None

    def to_dict(self) -> dict:
        return {"status": self.status,
                "witness": None if self.witness is None else self.witness.to_dict(),
                "citation": self.citation,
                "m_trace": None if self.report is None else self.report.to_dict()}


def _known_non_attaining(op: OperatorSpec) -> Optional[str]:
    body = op.body
    if isinstance(body, ops.Named):
        ex = ops.NAMED[body.id]
        if ex.attains is False:
            return ex.citation
    if isinstance(body, PSumLift) and op.domain.outer < op.range.outer \
            and op.domain.right == op.range.right:
        inner = body.inner
        if isinstance(inner.body, ops.Named) and inner.body.id in ("ex-3.2.3", "ex-3.4-T"):
            return (ops.NAMED["psum-identity"].citation +
                    f"; inner {inner.body.id} has m > 0 and does not attain, so S does not attain")
    return None


def attainment_check(op: OperatorSpec, cfg: SolverConfig | None = None) -> AttainmentResult:
    """Rule-based non-attainment for the named examples, else a truncation witness.

    Non-attainment is an infinite-dimensional fact and is never inferred
    from numerics; an unstabilized trace gives ``undecided``.
    """
    cite = _known_non_attaining(op)
    if cite is not None:
        return AttainmentResult("rule_based_non_attainment", citation=cite)
    report = min_modulus(op, cfg)
    if report.converged:
        return AttainmentResult("attained_at_truncation", report.certificate, report=report)
    return AttainmentResult("undecided", report=report)


# ----------------------------------------------------------------- attainify

def _leaf_functional(x: FinVector) -> FinVector:
    """Unit functional f with f(x) = ||x|| (x nonzero, plain sequence space)."""
    p = sp.exponent(x.space)
    nx = sp.norm(x)
    if math.isinf(p):
        k = max(x.coeffs, key=lambda i: (abs(x.coeffs[i]), -i))
        return FinVector(x.space, {k: math.copysign(1.0, x.coeffs[k])})
    if p == 1:
        return FinVector(x.space, {i: math.copysign(1.0, c) for i, c in x.coeffs.items()})
    return FinVector(x.space, {i: math.copysign((abs(c) / nx) ** (p - 1), c)
                               for i, c in x.coeffs.items()})


def norming_functional(x: FinVector) -> FinVector:
    """Coefficients of a functional ``f`` with ``f(x) = 1`` and ``||f|| = 1``.

    ``x`` must be a unit vector; the functional is stored over the same
    index structure as ``x``.
    """
    space = x.space
    nx = sp.norm(x)
    if nx == 0:
        raise FunctionalNotFound("the zero vector has no norming functional")
    if isinstance(space, DirectSum):
        r = space.outer
        a, b = sp.norm(x.left), sp.norm(x.right)
        parts = []
        for comp, c in ((x.left, a), (x.right, b)):
            if c == 0:
                parts.append(sp.zero(comp.space))
                continue
            w = 1.0 if r == 1 else (c / nx) ** (r - 1)
            f = norming_functional(comp / c)
            parts.append(f * w)
        f = sp.pair(space, *parts)
    elif isinstance(space, (Lp, FinLp, C0)):
        f = _leaf_functional(x)
    else:
        raise FunctionalNotFound(f"no dual representation for {space}")
    s = ops._pairing(f, x)
    if not s > 0:
        raise FunctionalNotFound("norming functional degenerated")
    return f * (1.0 / s)


def dual_norm(f: FinVector) -> float:
    """Norm of the coefficient functional ``f`` in the dual of ``f.space``."""
    space = f.space
    if isinstance(space, DirectSum):
        return sp._pnorm([dual_norm(f.left), dual_norm(f.right)], sp.dual_exponent(space.outer))
    return sp._pnorm(f.coeffs.values(), sp.dual_exponent(sp.exponent(space)))


@dataclass(frozen=True)
class AttainifyResult:
    operator: OperatorSpec
    x: FinVector
    functional: FinVector
    delta: float
    perturbation_norm: float
    branch: str          # "zero" or "delta"
    m_before: float

    def to_dict(self) -> dict:
        return {"operator": ops.op_to_dict(self.operator), "x": self.x.to_dict(),
                "functional": self.functional.to_dict(), "delta": self.delta,
                "perturbation_norm": self.perturbation_norm, "branch": self.branch,
                "m_before": self.m_before}


def attainify(op: OperatorSpec, eps: float, cfg: SolverConfig | None = None,
              report: MinModReport | None = None) -> AttainifyResult:
    """Rank-one perturbation ``S`` with ``||T - S|| <= eps`` that attains at level N.

    With ``x`` the finest-level certificate and ``f`` a norming functional:
    ``S = T - f ⊗ Tx`` when ``m_N < eps``, else
    ``S = T - f ⊗ Tx * delta/||Tx||`` with ``delta = min(eps, m_N/2)``.
    A precomputed m-trace for ``op`` may be passed as ``report``.
    """
    if not eps > 0:
        raise BadParams("eps must be positive")
    report = report or min_modulus(op, cfg)
    x = report.certificate
    f = norming_functional(x)
    tx = ops.apply(op, x)
    ntx = sp.norm(tx)
    m = report.m
    if m < eps:
        scale, delta, branch = 1.0, ntx, "zero"
    else:
        delta = min(eps, m / 2.0)
        scale, branch = delta / ntx, "delta"
    if ntx == 0:
        s_op = op
        pert = 0.0
    else:
        nf = dual_norm(f)
        pert = nf * ntx * scale
        # rounding can push the product an ulp past the budget
        while pert > min(eps, delta):
            scale = float(np.nextafter(scale, 0.0))
            pert = nf * ntx * scale
        s_op = ops.combine([(1.0, op), (-scale, ops.rank_one(f, tx, op.range))])
    return AttainifyResult(s_op, x, f, delta, pert, branch, m)
