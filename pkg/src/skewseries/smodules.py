"""Modules in M_R(S), induced modules S (x)_R M, and the kappa/mu exact sequences.

Underlying modules are finite presented (Z/p^n)-modules ``F / K`` with
``F = (Z/p^n)^g``.  Submodules of ``F / K`` are stored by their preimage in
``F`` (a :class:`Submodule` containing ``K``), so equalities of images and
kernels are Howell-form equalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ringcore import Submodule, jac_power, kernel, quotient_divisors
from .skewalg import SkewData, SkewError, SkewSeries, constant, skew_mul


class ModuleError(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


# ---------------------------------------------------------------------------
# linear algebra on presented modules

def block_relations(K: Submodule, copies: int) -> Submodule:
    g = K.ambient
    rows = []
    for c in range(copies):
        for r in K.basis:
            v = np.zeros(g * copies, dtype=np.int64)
            v[c * g:(c + 1) * g] = r
            rows.append(v)
    return Submodule.span(rows, K.p, K.n, g * copies) if rows else Submodule.zero(K.p, K.n, g * copies)


def map_image(A: np.ndarray, K_target: Submodule) -> Submodule:
    """Preimage in the target free module of the image of ``v -> v @ A``."""
    return Submodule.span(A % K_target.q, K_target.p, K_target.n, K_target.ambient) + K_target


def map_kernel(A: np.ndarray, K_source: Submodule, K_target: Submodule) -> Submodule:
    """Preimage in the source free module of the kernel of ``F1/K1 -> F2/K2``."""
    g1 = A.shape[0]
    stacked = np.vstack([A % K_target.q, K_target.basis]) if not K_target.is_zero() else A % K_target.q
    ker = kernel(stacked, K_source.p, K_source.n)
    return Submodule.span(ker.basis[:, :g1], K_source.p, K_source.n, g1) + K_source


def well_defined(A: np.ndarray, K_source: Submodule, K_target: Submodule) -> bool:
    return all(K_target.contains(r) for r in (K_source.basis @ A % K_source.q))


def equal_mod(A: np.ndarray, B: np.ndarray, K: Submodule) -> int | None:
    """First generator where two maps into F/K disagree, or None."""
    diff = (A - B) % K.q
    for i, row in enumerate(diff):
        if not K.contains(row):
            return i
    return None


# ---------------------------------------------------------------------------
# S-modules

@dataclass(frozen=True, eq=False)
class SModule:
    """A left (or right) S-module that is finite over R.

    ``r_action[i]`` is the matrix of ``m -> e_i . m`` and ``t_matrix`` the
    matrix of the t-action, both acting on row vectors of generators.
    """

    base: SkewData
    relations: Submodule
    r_action: tuple[np.ndarray, ...]
    t_matrix: np.ndarray
    side: str = "left"
    name: str = "M"
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def gens(self) -> int:
        return self.relations.ambient

    @property
    def q(self) -> int:
        return self.base.q

    def act(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        return np.tensordot(a, np.array(self.r_action), axes=1) % self.q

    def log_order(self) -> int:
        return self.gens * self.base.base.n - self.relations.log_order()

    def divisors(self) -> list[int]:
        F = Submodule.full(self.base.base.p, self.base.base.n, self.gens)
        return quotient_divisors(F, self.relations)

    def to_dict(self) -> dict:
        return {"ring_instance": self.name, "dim": self.gens, "side": self.side,
                "relations": self.relations.to_list(),
                "r_action_matrices": [m.tolist() for m in self.r_action],
                "t_matrix": self.t_matrix.tolist()}


def make_smodule(S: SkewData, relations, r_action, t_matrix, side: str = "left",
                 name: str = "M", check_separated: bool = True) -> SModule:
    R = S.base
    q = R.q
    t_matrix = np.asarray(t_matrix, dtype=np.int64) % q
    g = t_matrix.shape[0]
    if not isinstance(relations, Submodule):
        relations = Submodule.span(relations, R.p, R.n, g)
    r_action = tuple(np.asarray(a, dtype=np.int64) % q for a in r_action)
    if len(r_action) != R.rank:
        raise ModuleError(f"need {R.rank} action matrices, got {len(r_action)}")
    M = SModule(S, relations, r_action, t_matrix, side, name)
    K = relations
    for i, A in enumerate(r_action + (t_matrix,)):
        if not well_defined(A, K, K):
            raise ModuleError(f"action {'t' if i == R.rank else R.labels[i]} does not preserve the relations")
    ident = np.eye(g, dtype=np.int64)
    if equal_mod(M.act(R.one), ident, K) is not None:
        raise ModuleError("1 does not act as the identity")
    for i in range(R.rank):
        for j in range(R.rank):
            eij = R.mul(R.basis(i), R.basis(j))
            # left: e_i.(e_j.m) = (e_i e_j).m ; right: (m.e_i).e_j = m.(e_i e_j)
            comp = r_action[j] @ r_action[i] if side == "left" else r_action[i] @ r_action[j]
            if equal_mod(comp % q, M.act(eij), K) is not None:
                raise ModuleError(f"not a ring action at ({R.labels[i]}, {R.labels[j]})", (i, j))
    T = t_matrix
    for i in range(R.rank):
        a = R.basis(i)
        if side == "left":
            # t(a m) = sigma(a) t(m) + delta(a) m
            lhs = r_action[i] @ T
            rhs = T @ M.act(S.sigma(a)) + M.act(S.delta(a))
        else:
            # (m a) t = (m t) sigma'(a) + m delta'(a)
            lhs = r_action[i] @ T
            rhs = T @ M.act(S.sigma_prime(a)) + M.act(S.delta_prime(a))
        bad = equal_mod(lhs % q, rhs % q, K)
        if bad is not None:
            raise ModuleError(f"skew relation fails for a = {R.labels[i]}, generator {bad}", (i, bad))
    if check_separated:
        stable = t_adic_intersection(M)
        if stable != K:
            w = next(r for r in stable.basis if not K.contains(r))
            raise ModuleError("t-adic intersection is nonzero", w.tolist())
    return M


def t_adic_intersection(M: SModule) -> Submodule:
    """Preimage of the stable image of t^k (it stabilizes since M is finite)."""
    K = M.relations
    cur = Submodule.full(K.p, K.n, M.gens)
    while True:
        nxt = map_image(cur.basis @ M.t_matrix % M.q, K) if not cur.is_zero() else K
        if nxt == cur:
            return cur
        cur = nxt


# battery constructors --------------------------------------------------------

def delta_module(S: SkewData, side: str = "left") -> SModule:
    """S/St (left: t acts by delta) or S/tS (right: t acts by delta')."""
    R = S.base
    if side == "left":
        acts = [R.left_matrix(R.basis(i)) for i in range(R.rank)]
        return make_smodule(S, [], acts, S.delta.matrix, "left", "M_delta")
    acts = [R.right_matrix(R.basis(i)) for i in range(R.rank)]
    return make_smodule(S, [], acts, S.delta_prime.matrix, "right", "M_delta_r")


def radical_quotient(S: SkewData, k: int, side: str = "left") -> SModule:
    """R/Jac^k with t acting through delta (left) or delta' (right)."""
    R = S.base
    J = jac_power(R, k)
    if side == "left":
        acts = [R.left_matrix(R.basis(i)) for i in range(R.rank)]
        return make_smodule(S, J, acts, S.delta.matrix, "left", f"R/Jac^{k}")
    acts = [R.right_matrix(R.basis(i)) for i in range(R.rank)]
    return make_smodule(S, J, acts, S.delta_prime.matrix, "right", f"R/Jac^{k}_r")


def cyclic_module(S: SkewData, orders: list[int], t_matrix=None, side: str = "left",
                  name: str | None = None) -> SModule:
    """Z/o_1 + ... + Z/o_r over R = Z/p^n (sigma = id, delta = 0)."""
    R = S.base
    if R.rank != 1:
        raise ModuleError("cyclic_module needs R = Z/p^n")
    g = len(orders)
    rel = [np.eye(g, dtype=np.int64)[i] * (o % R.q) for i, o in enumerate(orders)]
    t = np.zeros((g, g), dtype=np.int64) if t_matrix is None else np.asarray(t_matrix)
    label = name or "+".join(f"Z/{o}" if o % R.q else "R" for o in orders)
    return make_smodule(S, rel, [np.eye(g, dtype=np.int64)], t, side, label)


def free_module(S: SkewData, rank: int, t_matrix, side: str = "left", name: str | None = None) -> SModule:
    return cyclic_module(S, [0] * rank, t_matrix, side, name or f"R^{rank}")


# ---------------------------------------------------------------------------
# induced modules and the kappa / mu maps

@dataclass
class InducedModule:
    """S (x)_R M (or S (x)_R ^sigma M) truncated to T coordinates (m_0, ..., m_{T-1}).

    ``r_action[i]`` gives e_i acting on coordinates: a t^i = sum_n t^n M'_{i-n,n}(a)
    moves coordinate i into coordinates n <= i; in the twisted identification
    each coefficient additionally passes through sigma^-1.  Coordinates at or
    above ``exact_below`` may be affected by the truncated tail.
    """

    source: SModule
    t_precision: int
    twist: bool
    relations: Submodule
    r_action: list[np.ndarray]
    t_matrix: np.ndarray
    exact_below: int


def induce(M: SModule, T: int, twist: bool = False) -> InducedModule:
    if T < 1:
        raise ModuleError("T must be >= 1")
    S, R = M.base, M.base.base
    g, q = M.gens, M.q
    m = S.nilpotence_bound
    acts = []
    for i in range(R.rank):
        a = R.basis(i)
        A = np.zeros((g * T, g * T), dtype=np.int64)
        for src in range(T):
            for n in range(max(0, src - m + 1), src + 1):
                c = S.monomial(src - n, n, "right")(a)
                if twist:
                    c = S.sigma_inv(c)
                A[src * g:(src + 1) * g, n * g:(n + 1) * g] += M.act(c)
        acts.append(A % q)
    shift = np.zeros((g * T, g * T), dtype=np.int64)
    for i in range(T - 1):
        shift[i * g:(i + 1) * g, (i + 1) * g:(i + 2) * g] = np.eye(g, dtype=np.int64)
    return InducedModule(M, T, twist, block_relations(M.relations, T), acts, shift,
                         S.exact_below(T, "right"))


@dataclass
class ChainMapPair:
    kappa: np.ndarray
    mu: np.ndarray
    chirality: str
    t_precision: int
    K_source: Submodule
    K_middle: Submodule
    K_target: Submodule


def boundary_maps(M: SModule, T: int, chirality: str | None = None,
                  pre_twist: np.ndarray | None = None) -> ChainMapPair:
    """kappa: M^T -> M^(T+1), (m_i) -> (m_{i-1} - t m_i); mu: (m_i) -> sum t^i m_i.

    The same coordinate formulas serve both chiralities; for a right module
    the t-matrix is the right action of t.  ``pre_twist`` (a g x g matrix) is
    applied blockwise before kappa, as in the untwisted sequence.
    """
    chirality = chirality or M.side
    if chirality != M.side:
        raise ModuleError(f"{chirality} chirality needs a {chirality} module")
    if T < 1:
        raise ModuleError("T must be >= 1")
    g, q, t = M.gens, M.q, M.t_matrix
    kappa = np.zeros((g * T, g * (T + 1)), dtype=np.int64)
    for i in range(T):
        kappa[i * g:(i + 1) * g, (i + 1) * g:(i + 2) * g] += np.eye(g, dtype=np.int64)
        kappa[i * g:(i + 1) * g, i * g:(i + 1) * g] -= t
    if pre_twist is not None:
        blocks = np.kron(np.eye(T, dtype=np.int64), pre_twist % q)
        kappa = blocks @ kappa
    mu = np.zeros((g * (T + 1), g), dtype=np.int64)
    power = np.eye(g, dtype=np.int64)
    for i in range(T + 1):
        mu[i * g:(i + 1) * g] = power
        power = power @ t % q
    K = M.relations
    return ChainMapPair(kappa % q, mu % q, chirality, T, block_relations(K, T), block_relations(K, T + 1), K)


@dataclass
class ExactnessReport:
    t_precision: int
    chirality: str
    kappa_injective: bool
    mu_surjective: bool
    image_equals_kernel: bool
    composition_zero: bool
    dims: dict = field(default_factory=dict)
    witness: list | None = None

    @property
    def exact(self) -> bool:
        return (self.kappa_injective and self.mu_surjective and self.image_equals_kernel
                and self.composition_zero)

    def to_dict(self) -> dict:
        return {"T": self.t_precision, "chirality": self.chirality, "dims": self.dims,
                "exact": self.exact, "witness": self.witness}


def check_pair(pair: ChainMapPair) -> ExactnessReport:
    Ks, Km, Kt = pair.K_source, pair.K_middle, pair.K_target
    ker_k = map_kernel(pair.kappa, Ks, Km)
    im_k = map_image(pair.kappa, Km)
    ker_mu = map_kernel(pair.mu, Km, Kt)
    im_mu = map_image(pair.mu, Kt)
    full_t = Submodule.full(Kt.p, Kt.n, Kt.ambient)
    comp = pair.kappa @ pair.mu % Kt.q
    witness = None
    if ker_k != Ks:
        witness = next(r for r in ker_k.basis if not Ks.contains(r)).tolist()
    elif im_k != ker_mu:
        witness = next((r for r in ker_mu.basis if not im_k.contains(r)), None)
        witness = witness.tolist() if witness is not None else None
    dims = {"source": Ks.ambient * Ks.n - Ks.log_order(),
            "image_kappa": im_k.log_order() - Km.log_order(),
            "kernel_mu": ker_mu.log_order() - Km.log_order(),
            "target": Kt.ambient * Kt.n - Kt.log_order()}
    return ExactnessReport(pair.t_precision, pair.chirality, ker_k == Ks, im_mu == full_t,
                           im_k == ker_mu, equal_mod(comp, np.zeros_like(comp), Kt) is None,
                           dims, witness)


def verify_exactness(M: SModule, T: int) -> ExactnessReport:
    return check_pair(boundary_maps(M, T))


def kappa_direct(M: SModule, i: int, a, m) -> np.ndarray:
    """kappa(t^i a (x) m) = t^i a t (x) m - t^i a (x) t m, expanded with at = t sigma'(a) + delta'(a).

    Returned in the plain coordinates of S (x) M with T = i + 2 slots.
    """
    S = M.base
    g = M.gens
    a = np.asarray(a, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    out = np.zeros((i + 2) * g, dtype=np.int64)
    out[(i + 1) * g:(i + 2) * g] += m @ M.act(S.sigma_prime(a))
    out[i * g:(i + 1) * g] += m @ M.act(S.delta_prime(a))
    out[i * g:(i + 1) * g] -= m @ M.t_matrix @ M.act(a)
    return out % M.q


def twist_coherence(M: SModule, max_slot: int = 2) -> tuple[bool, object]:
    """kappa(x a (x) m) = kappa(x (x) sigma^-1(a) m) for x = t^i and all basis a, m."""
    S, R = M.base, M.base.base
    g = M.gens
    for i in range(max_slot + 1):
        pair = boundary_maps(M, i + 1)
        for j in range(R.rank):
            a = R.basis(j)
            for k in range(g):
                m = np.eye(g, dtype=np.int64)[k]
                coords = np.zeros((i + 1) * g, dtype=np.int64)
                coords[i * g:(i + 1) * g] = m @ M.act(S.sigma_inv(a))
                via_matrix = coords @ pair.kappa % M.q
                direct = kappa_direct(M, i, a, m)
                diff = (via_matrix - direct) % M.q
                if not pair.K_middle.contains(diff):
                    return False, {"slot": i, "a": R.labels[j], "m": k}
    return True, None


# ---------------------------------------------------------------------------
# G_0 witness

@dataclass
class G0Certificate:
    gamma: SkewSeries
    conjugation_ok: bool
    gamma_action: np.ndarray
    r_linear: bool
    invertible: bool
    exactness: ExactnessReport

    @property
    def valid(self) -> bool:
        return self.conjugation_ok and self.r_linear and self.invertible and self.exactness.exact


def series_action(M: SModule, x: SkewSeries) -> np.ndarray:
    """Matrix of m -> x.m for a left-form series x = sum a_i t^i."""
    if x.form != "left":
        raise SkewError("series_action expects left form")
    g, q = M.gens, M.q
    out = np.zeros((g, g), dtype=np.int64)
    power = np.eye(g, dtype=np.int64)
    for a in x.coeffs:
        out = (out + power @ M.act(a)) % q
        power = power @ M.t_matrix % q
    if not all(M.relations.contains(r) for r in power):
        raise SkewError("t does not act nilpotently within the series precision")
    return out


def g0_witness(M: SModule, gamma: SkewSeries, T: int = 3) -> G0Certificate:
    S, R = M.base, M.base.base
    if not R.is_unit(gamma.coeffs[0]):
        raise ModuleError("gamma is not a unit in S (constant term not a unit of R)")
    conj_ok = True
    for i in range(R.rank):
        a = R.basis(i)
        lhs = skew_mul(gamma, constant(S, a, gamma.t_precision))
        rhs = skew_mul(constant(S, S.sigma(a), gamma.t_precision), gamma)
        if not lhs.agrees(rhs):
            raise ModuleError(f"gamma a gamma^-1 != sigma(a) at a = {R.labels[i]}", i)
    G = series_action(M, gamma)
    K = M.relations
    r_linear = all(equal_mod(M.act(S.sigma_inv(R.basis(i))) @ G % M.q, G @ M.act(R.basis(i)) % M.q, K) is None
                   for i in range(R.rank))
    # gamma acts bijectively on the finite module F/K
    img = map_image(G, K)
    invertible = img == Submodule.full(K.p, K.n, K.ambient) and map_kernel(G, K, K) == K
    # untwisted sequence: S (x) M --(1 (x) gamma^-1 then kappa)--> S (x) M --mu--> M
    Ginv = _inverse_on(G, K)
    report = check_pair(boundary_maps(M, T, pre_twist=Ginv))
    return G0Certificate(gamma, conj_ok, G, r_linear, invertible, report)


def _inverse_on(G: np.ndarray, K: Submodule) -> np.ndarray:
    from .ringcore import solve
    g = G.shape[0]
    stacked = np.vstack([G, K.basis]) if not K.is_zero() else G
    rows = []
    for i in range(g):
        x = solve(stacked, np.eye(g, dtype=np.int64)[i], K.p, K.n)
        if x is None:
            raise ModuleError("gamma does not act invertibly")
        rows.append(x[:g])
    return np.array(rows, dtype=np.int64)
