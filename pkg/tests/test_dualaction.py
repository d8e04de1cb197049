import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewseries import dualaction as da
from skewseries import smodules as sm
from skewseries.homology import next_normal
from skewseries.instances import builtin_instance
from skewseries.skewalg import random_series


def battery(name):
    S = builtin_instance(name).skew
    if name == "ZPT":
        return S, [sm.cyclic_module(S, [3, 9]), sm.free_module(S, 2, [[0, 3], [3, 0]])]
    return S, [sm.delta_module(S), sm.radical_quotient(S, 3)]


def random_dual(M, rng):
    basis = da.dual_basis(M)
    F = sum(int(c) * f.matrix for c, f in zip(rng.integers(0, M.q, len(basis)), basis))
    return da.dual_element(M, F % M.q)


def is_r_linear(f):
    M = f.source
    R = M.base.base
    for i in range(R.rank):
        for g in range(M.gens):
            m = np.eye(M.gens, dtype=np.int64)[g]
            if not np.array_equal(f(m @ M.r_action[i] % M.q), R.mul(R.basis(i), f(m))):
                return False
    return True


@pytest.mark.parametrize("name", ["IWA", "PX", "ZPT"])
def test_pointwise_definitions(name):
    S, mods = battery(name)
    R = S.base
    rng = np.random.default_rng(11)
    for M in mods:
        f = random_dual(M, rng)
        assert is_r_linear(f)
        ft = da.act_t(f)
        assert is_r_linear(ft)
        a = rng.integers(0, R.q, R.rank)
        fa = da.act_coeff(f, a)
        assert is_r_linear(fa)
        for g in range(M.gens):
            m = np.eye(M.gens, dtype=np.int64)[g]
            tm = m @ M.t_matrix % M.q
            expect = S.sigma_inv((f(tm) - S.delta(f(m))) % R.q)
            assert np.array_equal(ft(m), expect)
            assert np.array_equal(fa(m), R.mul(f(m), S.sigma_inv(a)))


@pytest.mark.parametrize("name", ["IWA", "PX", "PXN", "ZPT", "TRIV"])
def test_exchange_law_on_dual_basis(name):
    S, mods = battery(name) if name != "TRIV" else (None, [sm.cyclic_module(builtin_instance("TRIV").skew, [3])])
    for M in mods:
        for f in da.dual_basis(M):
            assert da.exchange_law(f) is None


@pytest.mark.parametrize("name", ["IWA", "PX", "PXN", "ZPT"])
def test_closed_formula_matches_iteration(name):
    _, mods = battery(name)
    rng = np.random.default_rng(5)
    for M in mods:
        f = random_dual(M, rng)
        for k in range(6):
            assert da.act_t_power(f, k) == da.act_t_iterated(f, k)


def test_b_words_graded_and_counted():
    for k in range(1, 7):
        assert da.all_words_graded(k)
    assert da.b_words(0, 3) == [""]
    assert da.b_words(4, 3) == []


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["IWA", "PX", "ZPT"]), st.integers(0, 10 ** 6))
def test_composition_law(name, seed):
    _, mods = battery(name)
    rng = np.random.default_rng(seed)
    for M in mods:
        S = M.base
        cw = da.convergence_witness(M, S.base.nilpotency_index)
        T = next_normal(S, max(3, cw.k_j))
        f = random_dual(M, rng)
        x, y = random_series(S, T, rng, "right"), random_series(S, T, rng, "right")
        eq, exact = da.composition_law(f, x, y)
        assert eq and exact


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_coefficient_action_is_a_right_action(seed):
    _, mods = battery("IWA")
    rng = np.random.default_rng(seed)
    M = mods[0]
    R = M.base.base
    f = random_dual(M, rng)
    a, b = rng.integers(0, 3, 9), rng.integers(0, 3, 9)
    assert da.act_coeff(da.act_coeff(f, a), b) == da.act_coeff(f, R.mul(a, b))


def test_convergence_witness_iwa():
    S = builtin_instance("IWA").skew
    M = sm.delta_module(S)
    w = da.convergence_witness(M, 9)
    assert w.k_j == 3
    f = random_dual(M, np.random.default_rng(1))
    # the images shrink to zero: f^(t^k) = 0 once k reaches the witness
    assert da.act_t_iterated(f, w.k_j).is_zero()
