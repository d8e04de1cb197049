"""The twisted right S-module structure on Hom_R(M, R).

A dual element f: M -> R is stored as a (gens x rank) matrix F with
f(m) = m @ F.  All action laws then become matrix identities.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .ringcore import RingMap, Submodule, jac_power, kernel
from .skewalg import SkewData, SkewError, SkewSeries, skew_mul, to_form
from .smodules import SModule


@dataclass(frozen=True, eq=False)
class DualElement:
    source: SModule
    matrix: np.ndarray

    @property
    def q(self) -> int:
        return self.source.q

    def __call__(self, m) -> np.ndarray:
        return np.asarray(m, dtype=np.int64) @ self.matrix % self.q

    def __add__(self, other: "DualElement") -> "DualElement":
        return DualElement(self.source, (self.matrix + other.matrix) % self.q)

    def __sub__(self, other: "DualElement") -> "DualElement":
        return DualElement(self.source, (self.matrix - other.matrix) % self.q)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DualElement) and other.source is self.source
                and np.array_equal(self.matrix % self.q, other.matrix % self.q))

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def is_zero(self) -> bool:
        return not (self.matrix % self.q).any()

    def to_dict(self) -> dict:
        return {"source": self.source.name, "matrix": self.matrix.tolist()}


def dual_element(M: SModule, matrix) -> DualElement:
    """Validate R-linearity f(b.m) = b.f(m) and compatibility with the relations."""
    R = M.base.base
    F = np.asarray(matrix, dtype=np.int64) % M.q
    if F.shape != (M.gens, R.rank):
        raise SkewError(f"dual element must be {M.gens} x {R.rank}")
    if (M.relations.basis @ F % M.q).any():
        raise SkewError("map does not vanish on the relations")
    for i in range(R.rank):
        lhs = M.r_action[i] @ F % M.q
        rhs = F @ _mult_matrix(M, R.basis(i)) % M.q
        if not np.array_equal(lhs, rhs):
            raise SkewError(f"map is not R-linear at b = {R.labels[i]}", i)
    return DualElement(M, F)


def _mult_matrix(M: SModule, b) -> np.ndarray:
    # left modules: f(b m) = b f(m); right modules: f(m b) = f(m) b
    R = M.base.base
    return R.left_matrix(b) if M.side == "left" else R.right_matrix(b)


def dual_basis(M: SModule) -> list[DualElement]:
    """A Z/q-spanning set of Hom_R(M, R), from the kernel of the linearity conditions."""
    R = M.base.base
    g, r, q = M.gens, R.rank, M.q
    size = g * r
    blocks = []
    for idx in range(size):
        F = np.zeros(size, dtype=np.int64)
        F[idx] = 1
        F = F.reshape(g, r)
        parts = [(M.relations.basis @ F).ravel()] if not M.relations.is_zero() else []
        for i in range(r):
            parts.append((M.r_action[i] @ F - F @ _mult_matrix(M, R.basis(i))).ravel())
        blocks.append(np.concatenate(parts) % q)
    ker = kernel(np.array(blocks), R.p, R.n)
    return [DualElement(M, row.reshape(g, r) % q) for row in ker.basis]


def augmentation(M: SModule) -> DualElement:
    """m -> aug(m) N with N the sum of all group elements, on a module whose underlying module is R.

    The bare augmentation h^i -> 1 is not R-linear into R; multiplying by the
    norm element N is the R-linear map with the same kernel.
    """
    R = M.base.base
    norm = np.ones(R.rank, dtype=np.int64)
    return dual_element(M, R.right_matrix(norm)[:M.gens])


def identity_dual(M: SModule) -> DualElement:
    return dual_element(M, np.eye(M.gens, M.base.base.rank, dtype=np.int64))


# ---------------------------------------------------------------------------
# actions

def act_coeff(f: DualElement, a) -> DualElement:
    """f^a(m) = f(m) sigma^-1(a)."""
    R = f.source.base.base
    b = f.source.base.sigma_inv(a)
    return DualElement(f.source, f.matrix @ R.right_matrix(b) % f.q)


def act_t(f: DualElement) -> DualElement:
    """f^t(m) = sigma^-1(f(tm) - delta(f(m)))."""
    M, S = f.source, f.source.base
    inner = (M.t_matrix @ f.matrix - f.matrix @ S.delta.matrix) % f.q
    return DualElement(M, inner @ S.sigma_inv.matrix % f.q)


def b_words(i: int, k: int) -> list[str]:
    """Word expansion of B_{i,k} over Y, Z and z (z standing for Z')."""
    if i < 0 or i > k:
        return []
    if i == 0:
        return [""]
    conj = "Z" * (k - 1) + "Y" + "z" * (k - 1)
    if i == k:
        return [conj + w for w in b_words(k - 1, k - 1)]
    return b_words(i, k - 1) + [conj + w for w in b_words(i - 1, k - 1)]


def b_operator(S: SkewData, i: int, k: int) -> RingMap:
    """B_{i,k}(delta, sigma, sigma^-1), memoized per (i, k)."""
    if not 0 <= i <= k:
        raise SkewError(f"B_{{{i},{k}}} needs 0 <= i <= k")
    memo = S.cache.setdefault("B", {})
    if (i, k) in memo:
        return memo[(i, k)]
    dim = S.base.rank
    if i == 0:
        out = RingMap.identity(dim, S.q)
    else:
        conj = S.sigma_power(k - 1) @ S.delta @ S.sigma_power(-(k - 1))
        out = conj @ b_operator(S, i - 1, k - 1)
        if i < k:
            out = b_operator(S, i, k - 1) + out
    memo[(i, k)] = out
    return out


def b_apply(S: SkewData, i: int, k: int, a) -> np.ndarray:
    return b_operator(S, i, k)(a)


def act_t_power(f: DualElement, k: int) -> DualElement:
    """f^{t^k} by the closed formula sigma^-k(sum_i (-1)^i B_{i,k}(f(t^{k-i} m)))."""
    M, S = f.source, f.source.base
    q = f.q
    total = np.zeros_like(f.matrix)
    tpow = [np.eye(M.gens, dtype=np.int64)]
    for _ in range(k):
        tpow.append(tpow[-1] @ M.t_matrix % q)
    for i in range(k + 1):
        term = tpow[k - i] @ f.matrix @ b_operator(S, i, k).matrix
        total = total + (-1) ** i * term
    return DualElement(M, total % q @ S.sigma_power(-k).matrix % q)


def act_t_iterated(f: DualElement, k: int) -> DualElement:
    for _ in range(k):
        f = act_t(f)
    return f


@dataclass
class ConvergenceWitness:
    j: int
    k_j: int
    window: int
    stable_dims: list[int]


def _dual_lattice(M: SModule) -> Submodule:
    basis = dual_basis(M)
    R = M.base.base
    size = M.gens * R.rank
    rows = [f.matrix.ravel() for f in basis]
    return Submodule.span(rows, R.p, R.n, size) if rows else Submodule.zero(R.p, R.n, size)


def convergence_witness(M: SModule, j: int) -> ConvergenceWitness:
    """Least k_j with f^{t^k}(M) inside Jac^j for every dual f and every k >= k_j.

    The images D_k = {f^{t^k}} form a decreasing chain of finite groups, so the
    property is monotone in k and the search terminates at the stable image.
    """
    if j < 0:
        raise SkewError("j must be >= 0")
    if ("convergence", j) in M.cache:
        return M.cache[("convergence", j)]
    R = M.base.base
    g, r = M.gens, R.rank
    J = jac_power(R, j)
    D = _dual_lattice(M)
    window = M.base.sigma_order
    logs = []
    k = 0
    while True:
        logs.append(D.log_order())
        if all(J.contains(row) for F in D.basis for row in F.reshape(g, r)):
            break
        nxt = [act_t(DualElement(M, F.reshape(g, r))).matrix.ravel() for F in D.basis]
        nD = Submodule.span(nxt, R.p, R.n, g * r)
        if nD == D:
            raise SkewError(f"f^(t^k) never lands in Jac^{j}", k)
        D, k = nD, k + 1
    M.cache[("convergence", j)] = ConvergenceWitness(j, k, window, logs)
    return M.cache[("convergence", j)]


@dataclass
class SeriesAction:
    value: DualElement
    exact: bool
    threshold: int


def act_series(f: DualElement, x: SkewSeries) -> SeriesAction:
    """f^x = sum_i (f^{t^i})^{a_i} for x = sum t^i a_i in right form.

    Exact when the precision reaches the threshold past which f^{t^i} = 0.
    """
    x = to_form(x, "right")
    M = f.source
    threshold = convergence_witness(M, M.base.base.nilpotency_index).k_j
    total = DualElement(M, np.zeros_like(f.matrix))
    ft = f
    for i, a in enumerate(x.coeffs):
        if a.any():
            total = total + act_coeff(ft, a)
        ft = act_t(ft)
    return SeriesAction(total, x.t_precision >= threshold, threshold)


def exchange_law(f: DualElement) -> int | None:
    """(f^{sigma(a)})^t + f^{delta(a)} = (f^t)^a on every basis a; first failure or None."""
    S = f.source.base
    R = S.base
    for i in range(R.rank):
        a = R.basis(i)
        lhs = act_t(act_coeff(f, S.sigma(a))) + act_coeff(f, S.delta(a))
        if lhs != act_coeff(act_t(f), a):
            return i
    return None


def composition_law(f: DualElement, x: SkewSeries, y: SkewSeries) -> tuple[bool, bool]:
    """((f^x)^y == f^{xy}, both sides exact)."""
    xy = skew_mul(to_form(x, "right"), to_form(y, "right"))
    lhs = act_series(act_series(f, x).value, y)
    rhs = act_series(f, xy)
    first = act_series(f, x)
    exact = first.exact and lhs.exact and rhs.exact
    return lhs.value == rhs.value, exact


def all_words_graded(k: int) -> bool:
    return all(w.count("Y") == i for i in range(k + 1) for w in b_words(i, k))
