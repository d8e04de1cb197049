import numpy as np
import pytest

from oracles import CyclicGroupAlgebra, TruncPoly, brute_ideal
from skewseries.filtration import (check_j_products, filtration_length, graded_coeff, graded_series,
                                   ideal_table)
from skewseries.instances import builtin_instance

ORACLES = {"PX": TruncPoly(3, 9, 2, 3), "PXN": TruncPoly(5, 12, 2, 4), "IWA": CyclicGroupAlgebra(3, 9, 4)}


@pytest.mark.parametrize("name", sorted(ORACLES))
def test_ideal_table_matches_word_enumeration(name):
    S = builtin_instance(name).skew
    table = ideal_table(S, 4)
    assert [lv.ideal.log_order() for lv in table] == [brute_ideal(ORACLES[name], k) for k in range(5)]
    for lv in table:
        assert all(lv.flags.values()), lv.flags


def test_px_ideals_are_monomial():
    S = builtin_instance("PX").skew
    # I_1 = (X^3), I_2 = (X^5), I_3 = (X^7): delta(X^j) = X^(j+2) for odd j, 0 for even j
    lowest = []
    for lv in ideal_table(S, 4):
        rows = lv.ideal.to_list()
        lowest.append(min((r.index(1) for r in rows), default=None))
    assert lowest == [0, 3, 5, 7, None]
    assert filtration_length(S) == 4


def test_px_graded_ring():
    S = builtin_instance("PX").skew
    gr = graded_coeff(S, 4)
    assert gr.dims == [3, 2, 2, 2, 0]
    # degree 0 is F_3[X]/(X^3) with sigma_bar(X) = 2X
    assert np.array_equal(gr.sections[0], np.eye(9, dtype=np.int64)[:3])
    assert np.array_equal(gr.sigma_bar[0], np.diag([1, 2, 1]))
    x = np.array([0, 1, 0])
    c = gr.constants[(0, 0)]
    x2 = np.einsum("a,b,abc->c", x, x, c) % 3
    x3 = np.einsum("a,b,abc->c", x2, x, c) % 3
    assert x2.tolist() == [0, 0, 1] and not x3.any()
    assert gr.delta_bar_zero


@pytest.mark.parametrize("name,T", [("PX", 9), ("IWA", 3), ("PXN", 8)])
def test_graded_series_model_uses_induced_derivation(name, T):
    res = graded_series(builtin_instance(name).skew, 3, T)
    assert res.checked_pairs > 0
    assert res.derivation_matches


@pytest.mark.parametrize("name,T", [("PX", 9), ("IWA", 3), ("TRIV", 4)])
def test_series_filtration_multiplicative(name, T):
    S = builtin_instance(name).skew
    ok, witness = check_j_products(S, 1, 1, T, np.random.default_rng(0))
    assert ok, witness


def test_trivial_instance_filtration():
    S = builtin_instance("TRIV").skew
    assert [lv.ideal.log_order() for lv in ideal_table(S, 2)] == [1, 0, 0]
