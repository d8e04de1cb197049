import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import rank_mod_p
from skewseries import smodules as sm
from skewseries.instances import builtin_instance
from skewseries.skewalg import series


def rank_exact(pair, g, T, p):
    """Exactness of 0 -> M^T -> M^(T+1) -> M -> 0 for a relation-free module over F_p."""
    k, m = pair.kappa % p, pair.mu % p
    rk, rm = rank_mod_p(k.tolist(), p), rank_mod_p(m.tolist(), p)
    return not (k @ m % p).any() and rk == g * T and rm == g and rk + rm == g * (T + 1)


@pytest.mark.parametrize("name", ["TRIV", "PX", "IWA"])
@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("T", [1, 3, 5, 8])
def test_delta_module_exact_by_rank(name, side, T):
    S = builtin_instance(name).skew
    M = sm.delta_module(S, side) if name != "TRIV" else sm.cyclic_module(S, [3], side=side)
    assert M.relations.is_zero()
    pair = sm.boundary_maps(M, T)
    assert rank_exact(pair, M.gens, T, S.base.p)
    assert sm.verify_exactness(M, T).exact


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6), st.integers(0, 10 ** 6))
def test_random_nilpotent_t_over_field(g, T, seed):
    S = builtin_instance("TRIV").skew
    t = np.triu(np.random.default_rng(seed).integers(0, 3, (g, g)), 1)
    M = sm.free_module(S, g, t)
    assert rank_exact(sm.boundary_maps(M, T), g, T, 3)
    assert sm.verify_exactness(M, T).exact


@pytest.mark.parametrize("name,T", [("IWA", 3), ("PX", 5), ("ZPT", 4)])
def test_radical_quotients_and_torsion_exact(name, T):
    S = builtin_instance(name).skew
    mods = [sm.radical_quotient(S, 3)] if name != "ZPT" else [
        sm.cyclic_module(S, [3]), sm.cyclic_module(S, [9]), sm.cyclic_module(S, [3, 9])]
    for M in mods:
        rep = sm.verify_exactness(M, T)
        assert rep.exact, rep.to_dict()
        assert rep.dims["image_kappa"] == rep.dims["kernel_mu"] == rep.dims["source"]


def test_twist_coherence():
    for name in ("IWA", "PX", "PXN"):
        ok, witness = sm.twist_coherence(sm.delta_module(builtin_instance(name).skew))
        assert ok, witness


def test_g0_witness_iwa():
    S = builtin_instance("IWA").skew
    one, zero = S.base.one, S.base.zero()
    cert = sm.g0_witness(sm.delta_module(S), series(S, [one, one], T=3))
    assert cert.conjugation_ok and cert.valid and cert.exactness.exact
    with pytest.raises(sm.ModuleError, match="unit"):
        sm.g0_witness(sm.delta_module(S), series(S, [zero, one], T=3))


def test_module_axioms_enforced():
    S = builtin_instance("TRIV").skew
    with pytest.raises(sm.ModuleError):
        sm.free_module(S, 2, np.eye(2, dtype=np.int64))   # t = 1 is not t-adically separated
    P = builtin_instance("PX").skew
    with pytest.raises(sm.ModuleError):
        # t = 0 on R violates t a = sigma(a) t + delta(a) since delta != 0
        sm.free_module(P, 1, [[0]])
