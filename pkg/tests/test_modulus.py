import itertools
import json
import math
import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from minmod import operators as ops, spaces as sp
from minmod.errors import (BadExponents, BadParams, DimensionTooLarge, InvalidInput,
                           NonConvergent, OpaqueSpace)
from minmod.modulus import (SolverConfig, attainify, attainment_check, brute_force_min,
                            dual_norm, golden_section, min_modulus, norming_functional,
                            psum_closed_form, solve_level)
from minmod.spaces import C0, DirectSum, FinLp, Lp

FAST = SolverConfig(trunc_levels=(4, 8), starts=16)


# ------------------------------------------------------------- config

def test_config_validation():
    with pytest.raises(InvalidInput):
        SolverConfig(trunc_levels=(8, 4))
    with pytest.raises(InvalidInput):
        SolverConfig(trunc_levels=())
    with pytest.raises(InvalidInput):
        SolverConfig(tol=0)
    with pytest.raises(InvalidInput):
        SolverConfig(method="sgd")
    assert SolverConfig().with_levels([3, 5]).trunc_levels == (3, 5)


def test_report_json_round_trip():
    rep = min_modulus(ops.make_example("ex-3.2.3"), FAST)
    d = json.loads(rep.to_json())
    assert d == rep.to_dict()
    assert [lv["N"] for lv in d["levels"]] == [4, 8]
    assert d["config"]["trunc_levels"] == [4, 8]


# ------------------------------------------------------------- exact paths

def test_diagonal_example():
    D = ops.diagonal(FinLp(2.0, 3), [3.0, 2.0, 5.0])
    rep = min_modulus(D, SolverConfig(trunc_levels=(3,)))
    assert rep.m == 2.0
    assert rep.certificate == sp.basis(D.domain, 2)
    assert rep.converged


def test_finite_domain_stops_at_dimension():
    D = ops.diagonal(FinLp(2.0, 3), [3.0, 2.0, 5.0])
    rep = min_modulus(D, SolverConfig(trunc_levels=(2, 8, 16)))
    assert [lv.N for lv in rep.levels] == [2, 8]
    assert rep.m == 2.0


def test_svd_seed_42():
    A = np.random.default_rng(42).normal(size=(10, 10))
    T = ops.matrix(Lp(2.0), Lp(2.0), A)
    want = scipy.linalg.svdvals(A)[-1]
    for method in ("auto", "multistart"):
        rep = min_modulus(T, SolverConfig(trunc_levels=(10,), method=method))
        assert abs(rep.m - want) <= 1e-6


@pytest.mark.parametrize("p_dom, p_rng", [(1.5, 1.5), (3.0, 2.0), (1.0, 1.0)])
def test_diagonal_closed_form(p_dom, p_rng):
    # range exponent <= domain exponent: the infimum sits on a basis vector
    D = ops.diagonal(Lp(p_dom), [3.0, 0.7, 2.0], tail=1.5, range=Lp(p_rng))
    rep = min_modulus(D, SolverConfig(trunc_levels=(6,)))
    assert rep.m == pytest.approx(0.7, abs=1e-15)
    assert rep.certificate == sp.basis(D.domain, 2)


# ------------------------------------------------------------- multistart

@pytest.mark.parametrize("seed", range(12))
def test_piecewise_linear_range_oracle(seed):
    # square invertible M: m = 1/max over vertices of {||My|| <= 1} of ||y||_p
    rng = np.random.default_rng([5, seed])
    p = [1.5, 2.0, 3.0][seed % 3]
    A = rng.normal(size=(5, 5))
    inv = np.linalg.inv(A)
    sup = seed % 2 == 0
    T = ops.matrix(Lp(p), C0() if sup else Lp(1.0), A)
    if sup:
        exact = 1 / max(np.linalg.norm(inv @ np.array(s), p)
                        for s in itertools.product([-1, 1], repeat=5))
    else:
        exact = 1 / max(np.linalg.norm(inv[:, j], p) for j in range(5))
    rep = min_modulus(T, SolverConfig(trunc_levels=(5,), method="multistart", starts=16))
    assert rep.m == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("domain, range_", [("lp:1", "lp:2"), ("lp:1.5", "lp:3"), ("c0", "lp:1")])
def test_brute_force_agreement(domain, range_):
    rng = np.random.default_rng(7)
    A = rng.normal(size=(3, 3))
    T = ops.matrix(sp.parse_space(domain), sp.parse_space(range_), A)
    bf = brute_force_min(T, 2000, dim=3)
    mm = min_modulus(T, SolverConfig(trunc_levels=(3,))).m
    assert mm <= bf + 1e-12
    assert bf - mm <= 2e-3


def test_brute_force_examples():
    assert brute_force_min(ops.identity(FinLp(1.0, 2)), 10 ** 4) == pytest.approx(1.0, abs=1e-3)
    assert brute_force_min(ops.diagonal(C0(), [1.0, 2.0]), 10 ** 4, dim=2) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(DimensionTooLarge):
        brute_force_min(ops.identity(Lp(2.0)), 100, dim=5)
    with pytest.raises(DimensionTooLarge):
        brute_force_min(ops.identity(Lp(2.0)), 100)


def test_ex4_l1_levels():
    # on span{e_1, e_N} the e_2 coefficient cancels at weight 1/(3 - 2^(1-N)) on e_N
    T = ops.make_example("ex-3.4-T")
    rep = min_modulus(T, SolverConfig(trunc_levels=(8, 16)))
    for lv in rep.levels:
        assert lv.m == pytest.approx(3 / (3 - 2.0 ** (1 - lv.N)), abs=1e-12)


def test_ex1_range_variants():
    # ell_1 domain, diagonal d_j: the minimizer spreads with weights d_j^(-r)
    d = [2.0 ** -j for j in range(1, 9)]
    exact = {"lp:1": lambda N: d[N - 1],
             "lp:2": lambda N: math.fsum(x ** -2 for x in d[:N]) ** -0.5,
             "c0": lambda N: 1 / math.fsum(x ** -1 for x in d[:N])}
    for rng, f in exact.items():
        rep = min_modulus(ops.make_example("ex-3.2.1", range=rng), FAST)
        for lv in rep.levels:
            assert lv.m == pytest.approx(f(lv.N), rel=1e-12), (rng, lv.N)
            assert lv.m <= 2.0 ** -lv.N


def test_solve_level_hint_is_used():
    T = ops.make_example("ex-3.4-T")
    x = sp.vector(T.domain, {1: 2 / 3, 6: 1 / 3})
    lv = solve_level(T, 6, SolverConfig(), hints=[x])
    assert lv.m <= sp.norm(ops.apply(T, x)) + 1e-15


def test_opaque_and_strict():
    J = sp.parse_space("james")
    with pytest.raises(OpaqueSpace):
        min_modulus(ops.OperatorSpec(J, J, ops.Diagonal((1.0,), 1.0)))
    T = ops.make_example("ex-3.2.3")
    with pytest.raises(NonConvergent) as exc:
        min_modulus(T, SolverConfig(trunc_levels=(4, 8)), strict=True)
    assert exc.value.report is not None and len(exc.value.report.levels) == 2


def test_determinism():
    A = np.random.default_rng(3).normal(size=(6, 6))
    T = ops.matrix(Lp(1.5), Lp(3.0), A)
    a = min_modulus(T, FAST).to_json()
    b = min_modulus(T, FAST).to_json()
    assert a == b


# ------------------------------------------------------------- closed forms

def test_golden_section():
    x, fx, it = golden_section(lambda t: (t - 0.3) ** 2, 0.0, 1.0, 1e-12)
    assert abs(x - 0.3) <= 1e-9 and fx <= 1e-18 and it > 0


@pytest.mark.parametrize("p, q, want", [(1, 2, 2 ** -0.5), (2, 3, 2 ** (-1 / 6))])
def test_psum_closed_form(p, q, want):
    r = psum_closed_form(1.0, p, q)
    assert r.value == pytest.approx(want, abs=1e-12)
    assert r.lam == pytest.approx(0.5, abs=1e-9)


def test_psum_zero_modulus():
    r = psum_closed_form(0.0, 1.5, 3.0)
    assert r.value == pytest.approx(0.0, abs=1e-9)
    assert r.lam == pytest.approx(1.0, abs=1e-6)


def test_psum_bad_exponents():
    for p, q in ((2, 2), (3, 2), (0.5, 2), (1, math.inf)):
        with pytest.raises(BadExponents):
            psum_closed_form(1.0, p, q)


@settings(max_examples=40, deadline=None)
@given(mT=st.floats(0.05, 3.0), p=st.floats(1.0, 3.0), dq=st.floats(0.2, 4.0))
def test_psum_minimum_is_a_lower_envelope(mT, p, dq):
    q = p + dq
    r = psum_closed_form(mT, p, q)
    lam = np.linspace(0, 1, 2001)
    vals = ((mT * lam ** (1 / p)) ** q + (1 - lam) ** (q / p)) ** (1 / q)
    assert r.value <= vals.min() + 1e-9
    at = ((mT * r.lam ** (1 / p)) ** q + (1 - r.lam) ** (q / p)) ** (1 / q)
    assert at == pytest.approx(r.value, rel=1e-9)


def test_psum_lift_numeric():
    S = ops.make_example("psum-identity", p=1, q=2)
    a = min_modulus(S, SolverConfig(trunc_levels=(64,)))
    assert a.m == pytest.approx(psum_closed_form(1, 1, 2).value, abs=1e-6)
    b = min_modulus(S, SolverConfig(trunc_levels=(4,), method="multistart"))
    assert b.m == pytest.approx(2 ** -0.5, abs=1e-6)


# ------------------------------------------------------------- attainment

def test_attainment_examples():
    a = attainment_check(ops.make_example("ex-3.2.3"), FAST)
    assert a.status == "rule_based_non_attainment" and "not attained" in a.citation
    b = attainment_check(ops.diagonal(FinLp(2.0, 2), [2.0, 3.0]), FAST)
    assert b.status == "attained_at_truncation" and b.witness == sp.basis(FinLp(2.0, 2), 1)
    c = attainment_check(ops.make_example("ex-3.4-T"), FAST)
    assert c.status == "rule_based_non_attainment"
    d = attainment_check(ops.make_example("ex-3.2.1"), SolverConfig(trunc_levels=(4, 8)))
    assert d.status == "rule_based_non_attainment"


def test_attainify_zero_branch():
    T = ops.make_example("ex-3.2.1")
    res = attainify(T, 0.1, SolverConfig(trunc_levels=(4, 8)))
    assert res.branch == "zero"
    assert res.x == sp.basis(T.domain, 8)
    tr = ops.truncate(res.operator, 8)
    assert np.all(tr.matrix[:, 7] == 0)
    assert res.perturbation_norm <= 0.1
    assert min_modulus(res.operator, SolverConfig(trunc_levels=(8,))).m == 0.0


def test_attainify_delta_branch():
    T = ops.diagonal(Lp(2.0), [1.5, 1.1], tail=2.0)
    res = attainify(T, 0.3, SolverConfig(trunc_levels=(4,)))
    assert res.branch == "delta" and res.delta == pytest.approx(0.3)
    assert res.x == sp.basis(T.domain, 2)
    assert sp.norm(ops.apply(res.operator, res.x)) == pytest.approx(1.1 - 0.3, abs=1e-15)
    assert res.perturbation_norm <= 0.3


def test_attainify_zero_operator():
    Z = ops.diagonal(Lp(2.0), [], tail=0.0)
    res = attainify(Z, 0.5, SolverConfig(trunc_levels=(3,)))
    assert res.perturbation_norm == 0.0
    x = sp.vector(Z.domain, {1: 0.3, 2: 0.4})
    assert sp.norm(ops.apply(res.operator, x)) == 0.0
    with pytest.raises(BadParams):
        attainify(Z, 0.0)


@settings(max_examples=60, deadline=None)
@given(p=st.sampled_from([1.0, 1.5, 2.0, 4.0, math.inf]),
       coeffs=st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=5),
       outer=st.sampled_from([None, 1.0, 2.5]))
def test_norming_functional(p, coeffs, outer):
    X = C0() if p == math.inf else Lp(p)
    v = sp.vector(X, dict(enumerate(coeffs, 1)))
    if sp.norm(v) == 0:
        return
    if outer is not None:
        S = DirectSum(X, FinLp(2.0, 1), outer)
        v = sp.pair(S, v, sp.vector(S.right, {1: 0.5}))
    x = sp.normalize(v)
    f = norming_functional(x)
    assert ops._pairing(f, x) == pytest.approx(1.0, abs=1e-12)
    assert dual_norm(f) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("rng", ["c0", "lp:1", "lp:3"])
def test_non_injective_truncation_is_zero(rng):
    # a 3x3 matrix seen at N=5 has zero columns, so m_5 = 0 with no NaN on the way
    A = [[1.0, 2.0, 0.0], [0.0, 1.0, -1.0], [1.0, 0.0, 3.0]]
    T = ops.matrix(Lp(1.0), sp.parse_space(rng), A)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rep = min_modulus(T, SolverConfig(trunc_levels=(3, 5)))
    assert rep.levels[-1].m == pytest.approx(0.0, abs=1e-12)
    assert abs(sp.norm(rep.levels[-1].certificate) - 1) <= 1e-10
