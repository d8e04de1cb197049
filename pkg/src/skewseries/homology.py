"""Ext over R and over S from explicit free resolutions, grades, and the degree-shift checks.

Cohomology is computed on truncations: S is cut to S/t^T S (right form) and,
for p-adic coefficient rings (Z/p^n standing for Z_p), to precision p^n.  A
naive truncated kernel picks up socle elements that do not lift, so kernels
are computed at a deeper lift level and projected down.  Every value is then
recomputed at a larger level and quoted only if the invariants agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ringcore import Submodule, kernel, modular, quotient_divisors, solve
from .skewalg import SkewData, SkewError, series, skew_mul, t_power, validate_skew
from .smodules import ModuleError, SModule, make_smodule, verify_exactness

INFINITE = float("inf")


def is_p_adic(S: SkewData) -> bool:
    """Z/p^n with n > 1 is treated as a truncation of Z_p; everything else is exact."""
    return S.base.kind == "modular" and S.base.n > 1


def at_precision(S: SkewData, n: int) -> SkewData:
    if n == S.base.n:
        return S
    if not is_p_adic(S):
        raise SkewError("only p-adic coefficient rings can change precision")
    memo = S.cache.setdefault("precision", {})
    if n not in memo:
        R = modular(S.base.p, n)
        memo[n] = validate_skew(R, {"matrix": S.sigma.matrix.tolist()}, {"matrix": S.delta.matrix.tolist()})
    return memo[n]


def lift_module(M: SModule, S2: SkewData) -> SModule:
    """The same integer presentation read over S2."""
    if S2 is M.base:
        return M
    rel = M.relations.basis if not M.relations.is_zero() else []
    return make_smodule(S2, rel, M.r_action, M.t_matrix, M.side, M.name)


def next_normal(S: SkewData, T: int) -> int:
    while not S.t_power_is_normal(T):
        T += 1
    return T


def is_commutative_instance(S: SkewData) -> bool:
    ident = np.eye(S.base.rank, dtype=np.int64)
    return (S.base.is_commutative() and np.array_equal(S.sigma.matrix % S.q, ident)
            and S.delta.is_zero())


# ---------------------------------------------------------------------------
# resolutions

@dataclass
class FreeResolution:
    """Free resolution F_k -> ... -> F_0 -> M by right multiplication on row vectors.

    ``differentials[k]`` maps F_{k+1} -> F_k and has shape
    (rank F_{k+1}, rank F_k, 2, rank R): entry = a0 + t a1 in right form.
    Over R only a0 is used.
    """

    over: str
    ranks: list[int]
    differentials: list[np.ndarray]
    module: SModule
    t_lifts: list[np.ndarray] = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.ranks) - 1


def r_basis(M: SModule) -> list[np.ndarray] | None:
    """An R-basis of M if M is visibly R-free, else None."""
    R = M.base.base
    if not M.relations.is_zero():
        return None
    if R.rank == 1:
        return [np.eye(M.gens, dtype=np.int64)[i] for i in range(M.gens)]
    if M.gens % R.rank:
        return None
    s = M.gens // R.rank
    basis = [np.eye(M.gens, dtype=np.int64)[k * R.rank:(k + 1) * R.rank] @ _one_coords(R) for k in range(s)]
    return basis if _coordinate_map(M, basis) is not None else None


def _one_coords(R) -> np.ndarray:
    return np.asarray(R.one, dtype=np.int64)


def _coordinate_map(M: SModule, basis) -> np.ndarray | None:
    """Matrix Phi with (a_k) -> sum a_k b_k; None unless it is bijective."""
    R = M.base.base
    rows = []
    for b in basis:
        for i in range(R.rank):
            rows.append(b @ M.r_action[i] % M.q)
    Phi = np.array(rows, dtype=np.int64)
    if Phi.shape[0] != M.gens:
        return None
    full = Submodule.span(Phi, R.p, R.n, M.gens)
    if full != Submodule.full(R.p, R.n, M.gens):
        return None
    return Phi


def _r_coordinates(M: SModule, basis, v) -> np.ndarray:
    Phi = _coordinate_map(M, basis)
    x = solve(Phi, v, M.base.base.p, M.base.base.n)
    if x is None:
        raise ModuleError("element outside the R-span of the basis")
    return x.reshape(len(basis), M.base.base.rank)


def _entry(R, a0=None, a1=None) -> np.ndarray:
    e = np.zeros((2, R.rank), dtype=np.int64)
    if a0 is not None:
        e[0] = a0
    if a1 is not None:
        e[1] = a1
    return e % R.q


def resolve(M: SModule, over: str) -> FreeResolution:
    """Free resolution of M over R or over S.

    R-free M: over R it is free; over S the kappa/mu sequence gives
    0 -> S^s --(tI - C)--> S^s -> M -> 0 with C the matrix of t in an R-basis.
    p-adic M with relations P: 0 -> R^r --P--> R^g -> M -> 0 over R, and over
    S the mapping cone of the two kappa/mu sequences (a Koszul-type complex).
    """
    S, R = M.base, M.base.base
    if over not in ("R", "S"):
        raise ValueError("over must be 'R' or 'S'")
    basis = r_basis(M)
    if basis is not None:
        s = len(basis)
        C = np.array([_r_coordinates(M, basis, b @ M.t_matrix % M.q) for b in basis])
        if over == "R":
            return FreeResolution("R", [s], [], M, [C])
        D = np.zeros((s, s, 2, R.rank), dtype=np.int64)
        for j in range(s):
            for k in range(s):
                D[j, k] = _entry(R, -C[j, k], R.one if j == k else None)
        res = FreeResolution("S", [s, s], [D % R.q], M)
        T = next_normal(S, 3)
        if not verify_exactness(M, T).exact:
            raise ModuleError("kappa/mu sequence not exact")
        return res
    if not (is_p_adic(S) and is_commutative_instance(S)):
        raise ModuleError(f"{M.name}: only R-free modules or p-adic modules over Z_p[[t]] are supported")
    P = M.relations.basis % M.q
    P = P[np.any(P, axis=1)]
    r, g = P.shape
    T = M.t_matrix
    T1 = _lift_endomorphism(P, T, R.p, R.n)
    if over == "R":
        D = np.zeros((r, g, 2, 1), dtype=np.int64)
        D[:, :, 0, 0] = P
        return FreeResolution("R", [g, r], [D], M, [T, T1])
    one = np.eye(g, dtype=np.int64)
    one_r = np.eye(r, dtype=np.int64)
    D1 = np.zeros((r + g, g, 2, 1), dtype=np.int64)
    D1[:r, :, 0, 0] = P
    D1[r:, :, 0, 0] = -T
    D1[r:, :, 1, 0] = one
    D2 = np.zeros((r, r + g, 2, 1), dtype=np.int64)
    D2[:, :r, 0, 0] = -T1
    D2[:, :r, 1, 0] = one_r
    D2[:, r:, 0, 0] = -P
    res = FreeResolution("S", [g, r + g, r], [D1 % R.q, D2 % R.q], M)
    _check_commutative_resolution(res)
    return res


def _lift_endomorphism(P: np.ndarray, T: np.ndarray, p: int, n: int) -> np.ndarray:
    """T1 with P T = T1 P, so that t lifts to the relation module."""
    target = P @ T
    rows = []
    for row in target:
        x = solve(P, row, p, n)
        if x is None:
            raise ModuleError("t does not preserve the relation module")
        rows.append(x)
    return np.array(rows, dtype=np.int64).reshape(P.shape[0], P.shape[0])


def _poly_product(A: np.ndarray, B: np.ndarray, q: int) -> np.ndarray:
    """Matrix product over the commutative ring R[t] with R = Z/q, entries of degree <= 1."""
    rows, mid, _, _ = A.shape
    cols = B.shape[1]
    out = np.zeros((rows, cols, 3), dtype=np.int64)
    for i in range(2):
        for j in range(2):
            out[:, :, i + j] += np.einsum("rm,mc->rc", A[:, :, i, 0], B[:, :, j, 0])
    return out % q


def _check_commutative_resolution(res: FreeResolution) -> None:
    q = res.module.q
    for k in range(len(res.differentials) - 1):
        prod = _poly_product(res.differentials[k + 1], res.differentials[k], q)
        if prod.any():
            raise ModuleError(f"consecutive differentials {k + 1}, {k} do not compose to zero")


# ---------------------------------------------------------------------------
# Hom complexes on truncations

def _left_mult_S(S: SkewData, D: np.ndarray, T: int) -> np.ndarray:
    """Z/q matrix of y -> D y on columns, S^cols -> S^rows, each S cut to T slots (right form)."""
    R = S.base
    rows, cols = D.shape[:2]
    r = R.rank
    out = np.zeros((cols * T * r, rows * T * r), dtype=np.int64)
    cache = {}
    for c in range(cols):
        for i in range(T):
            for e in range(r):
                src = (c * T + i) * r + e
                y = np.zeros((T, r), dtype=np.int64)
                y[i, e] = 1
                for rr in range(rows):
                    entry = D[rr, c] % R.q
                    if not entry.any():
                        continue
                    key = (entry.tobytes(), i, e)
                    if key not in cache:
                        x = series(S, list(entry), "right", T)
                        prod = skew_mul(x, series(S, y, "right", T))
                        if prod.t_precision < T:
                            raise SkewError(f"t^{T} is not normal; truncated multiplication is not exact")
                        cache[key] = prod.coeffs.ravel()
                    out[src, rr * T * r:(rr + 1) * T * r] += cache[key]
    return out % R.q


def _right_mult_t(S: SkewData, a: int, T: int) -> np.ndarray:
    R = S.base
    r = R.rank
    out = np.zeros((a * T * r, a * T * r), dtype=np.int64)
    tt = t_power(S, 1, T, "right")
    for c in range(a):
        for i in range(T):
            for e in range(r):
                y = np.zeros((T, r), dtype=np.int64)
                y[i, e] = 1
                prod = skew_mul(series(S, y, "right", T), tt)
                blk = np.zeros((T, r), dtype=np.int64)
                blk[:prod.t_precision] = prod.coeffs
                out[(c * T + i) * r + e, c * T * r:(c + 1) * T * r] = blk.ravel()
    return out % R.q


def _left_mult_R(S: SkewData, D: np.ndarray) -> np.ndarray:
    R = S.base
    rows, cols = D.shape[:2]
    r = R.rank
    out = np.zeros((cols * r, rows * r), dtype=np.int64)
    for rr in range(rows):
        for c in range(cols):
            a = D[rr, c, 0] % R.q
            if a.any():
                out[c * r:(c + 1) * r, rr * r:(rr + 1) * r] = R.left_matrix(a)
    return out % R.q


def _project(K: Submodule, a: int, T_big: int, T: int, r: int, p: int, n: int) -> Submodule:
    if K.is_zero():
        return Submodule.zero(p, n, a * T * r)
    B = K.basis.reshape(-1, a, T_big, r)[:, :, :T, :].reshape(-1, a * T * r)
    return Submodule.span(B % p ** n, p, n, a * T * r)


@dataclass
class ExtReport:
    module_id: str
    over: str
    degree: int
    level: tuple[int, int]
    divisors: list[int]
    t_invariants: list[list[int]] | None
    stabilized: bool
    vanishing: bool
    vanishing_stable: bool
    check_level: tuple[int, int] | None = None

    def invariants(self, with_t: bool = True):
        return (tuple(self.divisors), tuple(map(tuple, self.t_invariants or [])) if with_t else ())

    def to_dict(self) -> dict:
        return {"module_id": self.module_id, "over": self.over, "degree": self.degree,
                "level": list(self.level), "check_level": list(self.check_level or ()),
                "p_group_divisors": self.divisors, "t_invariants": self.t_invariants,
                "stabilized": self.stabilized, "vanishing": self.vanishing}


def _normalize(divs: list[int], p: int, n: int, p_adic: bool) -> list[int]:
    # in p-adic mode a summand of full exponent p^n stands for a copy of Z_p, written 0
    if not p_adic:
        return sorted(divs)
    return sorted(0 if d == p ** n else d for d in divs)


def _ranks(res: FreeResolution, j: int) -> tuple[int, int | None, int | None]:
    a = res.ranks[j] if j < len(res.ranks) else 0
    prev = res.ranks[j - 1] if 0 < j <= len(res.ranks) else None
    nxt = res.ranks[j + 1] if j + 1 < len(res.ranks) else None
    return a, prev, nxt


T_QUOTIENTS = 3


def _ext_at(M: SModule, over: str, j: int, T: int, n: int, lift: tuple[int, int],
            resolution: FreeResolution | None = None) -> tuple[list[int], list[list[int]] | None]:
    S0 = M.base
    S = at_precision(S0, n) if is_p_adic(S0) else S0
    Ml = lift_module(M, S)
    res = resolution if resolution is not None else resolve(Ml, over)
    if j >= len(res.ranks):
        return [], ([] if is_commutative_instance(S) else None)
    R = S.base
    p, r = R.p, R.rank
    a, prev, nxt = _ranks(res, j)
    p_adic = is_p_adic(S)
    T_big, n_big = lift
    S_big = at_precision(S0, n_big) if p_adic else S0
    if over == "S":
        width, width_big = T, T_big
        d_out = (_left_mult_S(S_big, res.differentials[j], T_big) if nxt is not None else None)
        d_in = (_left_mult_S(S, res.differentials[j - 1], T) if prev is not None else None)
    else:
        width, width_big = 1, 1
        d_out = _left_mult_R(S_big, res.differentials[j]) if nxt is not None else None
        d_in = _left_mult_R(S, res.differentials[j - 1]) if prev is not None else None
    ambient = a * width * r
    if d_out is None:
        K = Submodule.full(p, n, ambient)
    else:
        Kb = kernel(d_out, p, n_big)
        K = _project(Kb, a, width_big, width, r, p, n)
    I = (Submodule.span(d_in % R.q, p, n, ambient) if d_in is not None
         else Submodule.zero(p, n, ambient))
    divs = _normalize(quotient_divisors(K, I), p, n, p_adic)
    tinv = None
    if is_commutative_instance(S):
        if over == "S":
            tm = _right_mult_t(S, a, T)
        else:
            lifts = res.t_lifts
            tm = (np.zeros((a, a), dtype=np.int64) if j >= len(lifts)
                  else lifts[j].reshape(a, a).T % R.q)
        tinv = []
        power = np.eye(ambient, dtype=np.int64)
        for _ in range(T_QUOTIENTS):
            power = power @ tm % R.q
            sub = Submodule.span(K.basis @ power % R.q, p, n, ambient) + I if not K.is_zero() else I
            tinv.append(_normalize(quotient_divisors(K, sub), p, n, p_adic))
    return divs, tinv


def default_levels(S: SkewData, T: int | None = None, n: int | None = None):
    T = next_normal(S, T or 6)
    n = n or S.base.n
    p_adic = is_p_adic(S)
    check = (next_normal(S, T + 2), n + 1 if p_adic else n)
    return (T, n), check


def _lift_level(S: SkewData, T: int, n: int) -> tuple[int, int]:
    return next_normal(S, 2 * T), (2 * n if is_p_adic(S) else n)


def ext(M: SModule, over: str, j: int, T: int | None = None, n: int | None = None,
        resolution_builder=None) -> ExtReport:
    """Ext^j(M, R) or Ext^j(M, S) with a stabilization recomputation."""
    if j < 0:
        raise ValueError("degree must be >= 0")
    S = M.base
    level, check = default_levels(S, T, n)
    results = []
    for (Tl, nl) in (level, check):
        res = None
        if resolution_builder is not None:
            Sl = at_precision(S, nl) if is_p_adic(S) else S
            res = resolution_builder(lift_module(M, Sl))
        results.append(_ext_at(M, over, j, Tl, nl, _lift_level(S, Tl, nl), res))
    (d0, t0), (d1, t1) = results
    stabilized = d0 == d1 and t0 == t1
    return ExtReport(M.name, over, j, level, d0, t0, stabilized, not d0, (not d0) == (not d1), check)


@dataclass
class GradeReport:
    module_id: str
    over: str
    grade: float
    reports: list[ExtReport]

    def to_dict(self) -> dict:
        g = self.grade if self.grade != INFINITE else "inf"
        return {"module_id": self.module_id, "over": self.over, "grade": g,
                "ext": [r.to_dict() for r in self.reports]}


def resolution_length(M: SModule, over: str) -> int:
    return len(resolve(M, over).ranks)


def grade(M: SModule, over: str, T: int | None = None, n: int | None = None,
          resolution_builder=None, length: int | None = None) -> GradeReport:
    if length is None:
        length = resolution_length(M, over)
    reports = []
    for j in range(length):
        rep = ext(M, over, j, T, n, resolution_builder)
        reports.append(rep)
        if not rep.vanishing_stable:
            raise SkewError(f"Ext^{j} over {over} of {M.name} does not stabilize")
        if not rep.vanishing:
            return GradeReport(M.name, over, j, reports)
    return GradeReport(M.name, over, INFINITE, reports)


@dataclass
class ShiftReport:
    module_id: str
    hom_vanishes: bool
    invariant_matches: dict
    all_stabilized: bool
    j_R: float
    j_S: float
    membership_equivalent: bool
    with_t: bool
    reports_R: list[ExtReport]
    reports_S: list[ExtReport]

    @property
    def ok(self) -> bool:
        return (self.hom_vanishes and all(self.invariant_matches.values()) and self.all_stabilized
                and self.j_S == self.j_R + 1 and self.membership_equivalent)

    def to_dict(self) -> dict:
        fmt = lambda g: g if g != INFINITE else "inf"
        return {"module_id": self.module_id, "hom_vanishes": self.hom_vanishes,
                "matches": {str(k): v for k, v in self.invariant_matches.items()},
                "stabilized": self.all_stabilized, "j_R": fmt(self.j_R), "j_S": fmt(self.j_S),
                "membership_equivalent": self.membership_equivalent, "full_invariants": self.with_t,
                "ext_R": [r.to_dict() for r in self.reports_R],
                "ext_S": [r.to_dict() for r in self.reports_S], "ok": self.ok}


def _first_nonzero(reports: list[ExtReport]) -> float:
    return next((r.degree for r in reports if not r.vanishing), INFINITE)


def verify_dimension_shift(M: SModule, T: int | None = None, n: int | None = None) -> ShiftReport:
    """Hom_S(M,S) = 0, Ext^j_S(M,S) ~ Ext^{j-1}_R(M,R) on invariants, and j_S = j_R + 1."""
    len_S = resolution_length(M, "S")
    len_R = resolution_length(M, "R")
    top = max(len_S, len_R + 1)
    rep_S = [ext(M, "S", j, T, n) for j in range(top)]
    rep_R = [ext(M, "R", j, T, n) for j in range(top - 1)]
    with_t = is_commutative_instance(M.base)
    matches = {}
    for j in range(1, top):
        matches[j] = rep_S[j].invariants(with_t) == rep_R[j - 1].invariants(with_t)
    stab = all(r.stabilized for r in rep_S + rep_R)
    jS, jR = _first_nonzero(rep_S), _first_nonzero(rep_R)
    membership = True
    for j in range(top):
        lhs = all(r.vanishing for r in rep_R[:j])
        rhs = all(r.vanishing for r in rep_S[:j + 1])
        membership &= lhs == rhs
    return ShiftReport(M.name, rep_S[0].vanishing and rep_S[0].stabilized, matches, stab, jR, jS,
                       membership, with_t, rep_R, rep_S)


@dataclass
class BaseChangeReport:
    module_id: str
    j_R: float
    j_S: float

    @property
    def ok(self) -> bool:
        return self.j_R == self.j_S

    def to_dict(self) -> dict:
        fmt = lambda g: g if g != INFINITE else "inf"
        return {"module_id": self.module_id, "j_R": fmt(self.j_R), "j_S": fmt(self.j_S), "ok": self.ok}


def _base_change_resolution(N: SModule) -> FreeResolution:
    """S (x)_R N: the R-resolution of N with every differential read over S."""
    res = resolve(N, "R")
    return FreeResolution("S", res.ranks, res.differentials, N, [])


def verify_basechange_grade(N: SModule, T: int | None = None, n: int | None = None) -> BaseChangeReport:
    """j_R(N) = j_S(S (x)_R N).  Only vanishing is compared: S (x) N need not be finite over R."""
    length = len(resolve(N, "R").ranks)
    gR = grade(N, "R", T, n).grade
    gS = grade(N, "S", T, n, resolution_builder=_base_change_resolution, length=length).grade
    return BaseChangeReport(N.name, gR, gS)
