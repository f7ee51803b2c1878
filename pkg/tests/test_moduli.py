import math

import numpy as np
import pytest

from minmod import moduli, spaces as sp
from minmod.errors import BadParams, NotInCatalog, SupportExceedsTruncation, UnsupportedSpace
from minmod.spaces import C0, DirectSum, Lp, Opaque

CATALOG = ["lp:1", "lp:1.5", "lp:2", "lp:3", "c0", "sum(lp:2,lp:3;outer=3)",
           "sum(lp:2,lp:1.5;outer=1.5)", "james"]


def test_closed_examples():
    assert moduli.delta_closed(Lp(2.0), 1.0) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    S = sp.parse_space("sum(lp:2,lp:3;outer=3)")
    assert moduli.rho_closed(S, 1.0) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    assert moduli.delta_closed(Opaque("james"), 0.0) == 0.0
    assert moduli.delta_closed(C0(), 0.5) == 0.0 and moduli.rho_closed(C0(), 3.0) == 2.0


def test_one_sided_entries():
    c = moduli.modulus_curve(sp.parse_space("tsirelson:2"), "rho")
    assert c.one_sided and c.bound == "upper" and c.s == 2.0
    assert not moduli.modulus_curve(Lp(2.0), "delta").one_sided
    with pytest.raises(NotInCatalog):
        moduli.modulus_curve(sp.parse_space("tsirelson:2"), "delta")


def test_catalog_errors():
    for S in ("Lp[0,1]:3", "sum(lp:3,lp:2;outer=2)", "sum(lp:2,c0;outer=2)"):
        with pytest.raises(NotInCatalog):
            moduli.delta_closed(sp.parse_space(S), 1.0) if S != "sum(lp:3,lp:2;outer=2)" \
                else moduli.rho_closed(sp.parse_space(S), 1.0)
    with pytest.raises(BadParams):
        moduli.modulus_curve(Lp(2.0), "gamma")
    with pytest.raises(BadParams):
        moduli.delta_closed(Lp(2.0), -1.0)


def test_power_form_stable():
    # no cancellation at small t and no overflow at large t
    assert moduli.power_form(1e-8, 2.0) == pytest.approx(0.5e-16, rel=1e-12)
    assert moduli.power_form(1e300, 2.0) == pytest.approx(1e300, rel=1e-12)


@pytest.mark.parametrize("text", CATALOG)
def test_monotone_and_zero_at_zero(text):
    S = sp.parse_space(text)
    t = np.concatenate([[0.0], moduli.default_grid()])
    for kind in ("delta", "rho"):
        try:
            c = moduli.modulus_curve(S, kind)
        except NotInCatalog:
            continue
        v = c(t)
        assert v[0] == 0.0
        assert np.all(np.diff(v) >= 0)


@pytest.mark.parametrize("text", ["lp:1", "lp:1.5", "lp:2", "lp:3"])
def test_sandwich_equality_lp(text):
    S = sp.parse_space(text)
    t = moduli.default_grid()
    assert np.array_equal(moduli.delta_closed(S, t), moduli.rho_closed(S, t))


def test_psum_moduli_power_form():
    t = moduli.default_grid()
    assert np.array_equal(moduli.rho_closed(sp.parse_space("sum(lp:2,lp:3;outer=3)"), t),
                          moduli.power_form(t, 2.0))
    assert np.array_equal(moduli.delta_closed(sp.parse_space("sum(lp:2,lp:1.5;outer=1.5)"), t),
                          moduli.power_form(t, 2.0))


def test_numeric_examples():
    assert moduli.delta_numeric(Lp(2.0), sp.basis(Lp(2.0), 1), 1.0, 8) == \
        pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    assert moduli.delta_numeric(C0(), sp.basis(C0(), 1), 0.5, 8) == pytest.approx(0.0, abs=1e-12)
    assert moduli.delta_numeric(Lp(1.0), sp.basis(Lp(1.0), 1), 1.0, 8) == pytest.approx(1.0, abs=1e-12)
    assert moduli.rho_numeric(Lp(3.0), sp.basis(Lp(3.0), 1), 2.0, 4) == \
        pytest.approx(moduli.rho_closed(Lp(3.0), 2.0), abs=1e-12)


def test_numeric_errors():
    x = sp.vector(Lp(2.0), {5: 1.0})
    with pytest.raises(SupportExceedsTruncation):
        moduli.delta_numeric(Lp(2.0), x, 1.0, 4)
    with pytest.raises(UnsupportedSpace):
        moduli.delta_numeric(Opaque("james"), x, 1.0, 8)


def test_premise_m_examples():
    r = moduli.premise_m(sp.parse_space("sum(lp:2,lp:3;outer=3)"), sp.parse_space("sum(lp:2,lp:1.5;outer=1.5)"))
    assert r.holds and r.fails_at is None
    r = moduli.premise_m(Lp(2.0), Lp(3.0))
    assert not r.holds and r.margin < 0
    assert moduli.premise_m(Lp(2.0), Lp(3.0), [0.5]).fails_at == 0.5
    r = moduli.premise_m(Lp(2.0), Lp(2.0))
    assert r.holds and r.margin == 0.0
    # one-sided entries only count when they point the safe way
    assert moduli.premise_m(sp.parse_space("tsirelson:2"), Lp(2.0)).holds


@pytest.mark.parametrize("S", [Lp(2.0), Lp(1.0), Opaque("james"), Lp(3.0)])
def test_premise_o_examples(S):
    r = moduli.premise_o(S)
    assert r.holds and r.margin > 0


def test_premise_o_c0_fails():
    r = moduli.premise_o(C0())
    assert not r.holds and r.fails_at == pytest.approx(moduli.default_grid()[moduli.default_grid() >= 1][0])


def test_wmp_via_moduli():
    X, Y = sp.parse_space("sum(lp:2,lp:3;outer=3)"), sp.parse_space("sum(lp:2,lp:1.5;outer=1.5)")
    assert moduli.wmp_via_moduli(X, Y).wmp == "yes"
    assert moduli.wmp_via_moduli(sp.parse_space("tsirelson:2"), Lp(2.0)).wmp == "yes"
    v = moduli.wmp_via_moduli(Lp(1.0), Lp(2.0))
    assert v.wmp == "inconclusive" and any("reflexive: no" in c for c in v.chain)
    assert moduli.wmp_via_moduli(Lp(3.0), Lp(2.0)).wmp == "yes"
    assert moduli.wmp_via_moduli(Lp(2.0), Lp(3.0)).wmp == "inconclusive"
    with pytest.raises(NotInCatalog):
        moduli.wmp_via_moduli(sp.parse_space("Lp[0,1]:3"), Lp(2.0))
