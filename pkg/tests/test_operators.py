import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minmod import operators as ops, spaces as sp
from minmod.errors import BadParams, OpaqueSpace, ParseError, SpaceMismatch
from minmod.spaces import C0, DirectSum, FinLp, Lp


def test_ex1_apply():
    T = ops.make_example("ex-3.2.1")
    assert ops.apply(T, sp.basis(T.domain, 3)) == sp.vector(T.range, {3: 0.125})


def test_ex2_columns():
    T = ops.make_example("ex-3.2.2", p=2)
    assert T.domain == C0() and T.range == Lp(2.0)
    tr = ops.truncate(T, 3)
    want = np.array([[0.5, -0.25, -0.125], [0, 0.25, -0.125], [0, 0, 0.125]])
    assert np.allclose(tr.matrix, want, rtol=0, atol=0)


def test_truncation_examples():
    assert np.array_equal(ops.truncate(ops.make_example("ex-3.2.3"), 3).matrix,
                          np.diag([2.0, 1.5, 1 + 1 / 3]))
    assert np.array_equal(ops.truncate(ops.make_example("ex-3.2.1"), 2).matrix, np.diag([0.5, 0.25]))
    assert np.array_equal(ops.truncate(ops.identity(Lp(3.0)), 5).matrix, np.eye(5))


def test_ex4_t_and_sum():
    T, K = ops.make_example("ex-3.4-T"), ops.make_example("ex-3.4-K")
    e1 = sp.basis(T.domain, 1)
    assert ops.apply(T + K, e1) == sp.vector(T.range, {1: 3.0})
    assert ops.apply(T, sp.basis(T.domain, 4)) == sp.vector(T.range, {2: 3 * (1 - 1 / 16), 5: 3.0})


def test_lincomb_zero():
    T = ops.make_example("ex-3.4-T")
    Z = ops.combine([(1.0, T), (-1.0, T)])
    x = sp.vector(T.domain, {1: 0.3, 2: -1.0, 5: 2.0})
    assert sp.norm(ops.apply(Z, x)) == 0.0


def test_psum_lift():
    S = ops.make_example("psum-identity", p=1, q=2)
    assert S.domain == DirectSum(Lp(2.0), FinLp(2.0, 1), 1.0)
    assert S.range == DirectSum(Lp(2.0), FinLp(2.0, 1), 2.0)
    v = sp.pair(S.domain, sp.vector(Lp(2.0), {2: 0.5}), sp.vector(FinLp(2.0, 1), {1: 0.5}))
    w = ops.apply(S, v)
    assert w.left.coeffs == {2: 0.5} and w.right.coeffs == {1: 0.5}
    assert sp.norm(v) == 1.0 and sp.norm(w) == pytest.approx(2 ** -0.5)


def test_rank_one_and_diagonal():
    X = Lp(2.0)
    R = ops.rank_one(sp.vector(X, {1: 1.0, 2: 1.0}), sp.vector(X, {3: 2.0}))
    assert ops.apply(R, sp.vector(X, {1: 1.0, 2: 2.0})) == sp.vector(X, {3: 6.0})
    D = ops.diagonal(X, [3.0, 2.0], tail=5.0)
    assert ops.apply(D, sp.vector(X, {1: 1.0, 9: 1.0})) == sp.vector(X, {1: 3.0, 9: 5.0})


def test_errors():
    with pytest.raises(BadParams):
        ops.make_example("nope")
    with pytest.raises(BadParams):
        ops.make_example("ex-3.2.2", p=0.5)
    with pytest.raises(BadParams):
        ops.make_example("ex-3.2.3", p=2)
    T = ops.make_example("ex-3.2.1")
    with pytest.raises(SpaceMismatch):
        ops.apply(T, sp.basis(Lp(2.0), 1))
    with pytest.raises(SpaceMismatch):
        T + ops.identity(Lp(2.0))
    with pytest.raises(OpaqueSpace):
        ops.truncate(ops.OperatorSpec(sp.parse_space("james"), sp.parse_space("james"),
                                      ops.Diagonal((1.0,), 1.0)), 2)


def _ops_for_round_trip():
    X = Lp(2.0)
    return [
        ops.make_example("ex-3.2.1", range="c0"),
        ops.make_example("ex-3.2.2", p=3),
        ops.make_example("ex-3.4-T") + ops.make_example("ex-3.4-K"),
        ops.make_example("psum-identity", p=1.5, q=4),
        ops.diagonal(X, [1.0, -2.0], tail=0.5),
        ops.matrix(Lp(1.0), C0(), [[1.0, 2.0], [3.0, 4.0]]),
        ops.rank_one(sp.vector(X, {1: 1.0}), sp.vector(X, {2: 1.0})),
    ]


@pytest.mark.parametrize("op", _ops_for_round_trip(), ids=lambda o: o.body.__class__.__name__)
def test_json_round_trip(op, tmp_path):
    d = ops.op_to_dict(op)
    p = tmp_path / "op.json"
    p.write_text(json.dumps(d))
    back = ops.load_operator(p)
    assert ops.op_to_dict(back) == d
    assert np.array_equal(ops.truncate(back, 6).matrix, ops.truncate(op, 6).matrix)


def test_bad_specs(tmp_path):
    with pytest.raises(ParseError):
        ops.op_from_dict({"domain": "lp:2", "range": "lp:2", "body": {"kind": "wat"}})
    with pytest.raises(ParseError):
        ops.op_from_dict({"domain": "lp:2"})
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        ops.load_operator(p)


def test_demo_specs_load():
    files = sorted((Path(__file__).parents[1] / "demos" / "specs").glob("*.json"))
    assert files
    for f in files:
        op = ops.load_operator(f)
        assert ops.op_to_dict(op) == ops.op_to_dict(ops.op_from_dict(json.loads(f.read_text())))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), N=st.integers(1, 9),
       name=st.sampled_from(["ex-3.2.1", "ex-3.2.2", "ex-3.2.3", "ex-3.4-T", "ex-3.4-K"]))
def test_truncation_matches_apply(seed, N, name):
    T = ops.make_example(name)
    tr = ops.truncate(T, N)
    x = np.random.default_rng(seed).normal(size=tr.matrix.shape[1])
    v = tr.to_vector(x)
    assert np.array_equal(tr.from_vector(v), x)
    got = ops.flatten(ops.apply(T, v), tr.range_layout)
    assert np.allclose(got, tr.matrix @ x, rtol=1e-14, atol=1e-14)
