"""The Delta_k / I_k filtration of R, the J_k filtration of S and their graded rings."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ringcore import CoeffRing, RingError, Submodule, ideal_product, solve
from .skewalg import (SkewData, SkewError, SkewSeries, conjugated_deltas,
                      series, skew_mul, working_precision)


class FiltrationError(AssertionError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def _products(R: CoeffRing, A: Submodule, B: Submodule) -> Submodule:
    # additive span of {a*b}; for plain spans this is not an ideal product
    return ideal_product(R, A, B)


def monomial_images(S: SkewData, kmax: int) -> list[Submodule]:
    """W_k = span of M(R) over all monomials M with exactly k letters Y.

    Every such monomial is sigma^e composed with delta_{j1}...delta_{jk}
    (delta_j = sigma^j delta sigma^-j, j mod the order of sigma), and W_k is
    sigma-stable, so W_k = sum_j delta_j(W_{k-1}).
    """
    memo = S.cache.setdefault("W", [])
    R = S.base
    if not memo:
        memo.append(Submodule.full(R.p, R.n, R.rank))
    deltas = conjugated_deltas(S)
    while len(memo) <= kmax:
        V = memo[-1]
        rows = [V.basis @ d.matrix % R.q for d in deltas] if not V.is_zero() else []
        memo.append(Submodule.span(np.vstack(rows) if rows else [], R.p, R.n, R.rank))
    return memo[:kmax + 1]


def delta_level(S: SkewData, k: int) -> Submodule:
    """Delta_k: additive span of products M_1(R)...M_r(R) with Y-counts summing to k."""
    if k < 0:
        raise RingError("k must be nonnegative")
    memo = S.cache.setdefault("Delta", [])
    R = S.base
    if not memo:
        memo.append(Submodule.span([R.one], R.p, R.n, R.rank))
    W = monomial_images(S, k)
    while len(memo) <= k:
        j = len(memo)
        total = Submodule.zero(R.p, R.n, R.rank)
        for m in range(1, j + 1):
            total = total + _products(R, W[m], memo[j - m])
        memo.append(total)
    return memo[k]


def left_span(R: CoeffRing, A: Submodule) -> Submodule:
    return _products(R, Submodule.full(R.p, R.n, R.rank), A)


def right_span(R: CoeffRing, A: Submodule) -> Submodule:
    return _products(R, A, Submodule.full(R.p, R.n, R.rank))


@dataclass
class FiltrationLevel:
    k: int
    ideal: Submodule
    delta_span: Submodule
    flags: dict = field(default_factory=dict)
    truncation_note: str | None = None

    def to_dict(self) -> dict:
        return {"k": self.k, "howell_basis": self.ideal.to_list(),
                "dims": self.ideal.log_order(), "flags": dict(self.flags),
                "truncation": self.truncation_note}


def i_level(S: SkewData, k: int) -> FiltrationLevel:
    """I_k = R Delta_k, checked to be descending, sigma-stable, delta-shifting and two-sided."""
    R = S.base
    full = Submodule.full(R.p, R.n, R.rank)
    if k <= 0:
        return FiltrationLevel(k, full, full, {"descending": True, "sigma_stable": True,
                                               "delta_shifts": True, "two_sided": True})
    memo = S.cache.setdefault("I", {})
    if k in memo:
        return memo[k]
    D = delta_level(S, k)
    I = left_span(R, D)
    nxt = left_span(R, delta_level(S, k + 1))
    prev = full if k == 1 else left_span(R, delta_level(S, k - 1))
    flags = {
        "descending": I <= prev,
        "sigma_stable": Submodule.span(I.basis @ S.sigma.matrix % R.q, R.p, R.n, R.rank) == I,
        "delta_shifts": all(nxt.contains(S.delta(v)) for v in I.basis),
        "two_sided": right_span(R, D) == I,
    }
    for name, ok in flags.items():
        if not ok:
            raise FiltrationError(f"I_{k} fails {name}", I.to_list())
    note = None
    if R.kind == "truncated-poly" and I.is_zero():
        note = f"zero because of the truncation {R.generator}^{R.modulus} = 0"
    level = FiltrationLevel(k, I, D, flags, note)
    memo[k] = level
    return level


def filtration_length(S: SkewData) -> int:
    """Least k with I_k = 0 (the ring is finite, so this exists when delta is sigma-nilpotent)."""
    k = 0
    while not i_level(S, k).ideal.is_zero():
        k += 1
        if k > S.base.rank * S.base.n + 1:
            raise FiltrationError("I_k does not reach zero")
    return k


def ideal_table(S: SkewData, kmax: int) -> list[FiltrationLevel]:
    return [i_level(S, k) for k in range(kmax + 1)]


# ---------------------------------------------------------------------------
# graded rings

def _section(R: CoeffRing, big: Submodule, small: Submodule) -> np.ndarray:
    """Canonical lifts of a basis of big/small: Howell rows of big reduced mod small."""
    rows = [small.reduce(r) for r in big.basis]
    rows = [r for r in rows if r.any()]
    if not rows:
        return np.zeros((0, R.rank), dtype=np.int64)
    return Submodule.span(rows, R.p, R.n, R.rank).basis


@dataclass
class GradedRing:
    """Components with section bases, structure constants and the induced automorphism.

    ``constants[(i, j)][a, b]`` is the coordinate vector, in component i+j,
    of the product of basis a of component i with basis b of component j.
    """

    sections: list[np.ndarray]
    levels: list[Submodule]
    constants: dict
    sigma_bar: list[np.ndarray]
    delta_bar_zero: bool

    @property
    def dims(self) -> list[int]:
        return [s.shape[0] for s in self.sections]


def _coords(section: np.ndarray, v, p: int, n: int) -> np.ndarray:
    if section.shape[0] == 0:
        if np.asarray(v).any():
            raise FiltrationError("nonzero vector in a zero component")
        return np.zeros(0, dtype=np.int64)
    x = solve(section, v, p, n)
    if x is None:
        raise FiltrationError("vector outside the section span", np.asarray(v).tolist())
    return x


def graded_coeff(S: SkewData, max_k: int) -> GradedRing:
    if max_k < 1:
        raise RingError("max_k must be >= 1")
    R = S.base
    levels = [i_level(S, k).ideal for k in range(max_k + 2)]
    sections = [_section(R, levels[k], levels[k + 1]) for k in range(max_k + 1)]
    constants = {}
    for i in range(max_k + 1):
        for j in range(max_k + 1 - i):
            target = levels[i + j + 1]
            table = np.zeros((sections[i].shape[0], sections[j].shape[0], sections[i + j].shape[0]), dtype=np.int64)
            for a, u in enumerate(sections[i]):
                for b, v in enumerate(sections[j]):
                    w = R.mul(u, v)
                    if not levels[i + j].contains(w):
                        raise FiltrationError(f"I_{i} I_{j} not inside I_{i + j}")
                    table[a, b] = _coords(sections[i + j], target.reduce(w), R.p, R.n)
            constants[(i, j)] = table
    sigma_bar = []
    delta_zero = True
    for k in range(max_k + 1):
        nxt = levels[k + 1]
        dim = sections[k].shape[0]
        mat = np.zeros((dim, dim), dtype=np.int64)
        for a, u in enumerate(sections[k]):
            mat[a] = _coords(sections[k], nxt.reduce(S.sigma(u)), R.p, R.n)
        sigma_bar.append(mat)
        delta_zero &= all(nxt.contains(S.delta(u)) for u in levels[k].basis)
    return GradedRing(sections, levels, constants, sigma_bar, delta_zero)


@dataclass
class SeriesFiltrationLevel:
    k: int
    t_precision: int
    slots: list[Submodule]

    def contains(self, x: SkewSeries) -> bool:
        if x.form != "left":
            raise SkewError("J_k membership is tested on left form")
        T = min(self.t_precision, x.t_precision)
        return all(self.slots[i].contains(x.coeffs[i]) for i in range(T))

    def random_element(self, S: SkewData, rng: np.random.Generator) -> SkewSeries:
        R = S.base
        coeffs = []
        for I in self.slots:
            if I.is_zero():
                coeffs.append(R.zero())
            else:
                c = rng.integers(0, R.q, I.basis.shape[0])
                coeffs.append(c @ I.basis % R.q)
        return series(S, coeffs, "left", self.t_precision)


def j_level(S: SkewData, k: int, T: int) -> SeriesFiltrationLevel:
    if T < 1:
        raise RingError("T must be >= 1")
    return SeriesFiltrationLevel(k, T, [i_level(S, k - i).ideal for i in range(T)])


def check_j_products(S: SkewData, k: int, l: int, T: int, rng: np.random.Generator,
                     samples: int = 20) -> tuple[bool, object]:
    """Sampled check that J_k J_l lies in J_{k+l} on the exactly known coefficients."""
    Jk, Jl, Jkl = j_level(S, k, T), j_level(S, l, T), j_level(S, k + l, T)
    for _ in range(samples):
        x, y = Jk.random_element(S, rng), Jl.random_element(S, rng)
        z = skew_mul(x, y)
        if not Jkl.contains(z):
            return False, (x.to_dict(), y.to_dict())
    return True, None


def induced_derivation(S: SkewData, gr: GradedRing) -> list[np.ndarray]:
    """Matrices of the degree-one map gr_k -> gr_(k+1) induced by delta."""
    R = S.base
    out = []
    for k in range(len(gr.sections) - 1):
        nxt = gr.levels[k + 2] if k + 2 < len(gr.levels) else Submodule.zero(R.p, R.n, R.rank)
        mat = np.zeros((gr.sections[k].shape[0], gr.sections[k + 1].shape[0]), dtype=np.int64)
        for a, u in enumerate(gr.sections[k]):
            mat[a] = _coords(gr.sections[k + 1], nxt.reduce(S.delta(u)), R.p, R.n)
        out.append(mat)
    return out


@dataclass
class SeriesGraded:
    coeff_graded: GradedRing
    max_k: int
    t_precision: int
    checked_pairs: int
    matches: bool
    derivation_matches: bool
    induced_derivation_zero: bool
    witness: object = None


def _model_product(gr: GradedRing, sig: list, der: list, q: int, ja: int, a: np.ndarray,
                   i: int, jb: int, b: np.ndarray, l: int, top: int) -> dict:
    """(a tbar^i)(b tbar^l) in the skew polynomial model over gr_I R.

    Returns {slot: (component, coords)}; the t-degree i moves past b by
    tbar^i b = sum_n M_{i-n,n}(dbar, sbar)(b) tbar^n.
    """
    memo = {(0, 0): b % q}

    def word_sum(k, m):
        if (k, m) in memo:
            return memo[(k, m)]
        comp = jb + k
        dim = gr.sections[comp].shape[0] if comp <= top else 0
        v = np.zeros(dim, dtype=np.int64)
        if comp <= top:
            if k > 0 and comp - 1 < len(der):
                v = v + word_sum(k - 1, m) @ der[comp - 1]
            if m > 0:
                v = v + word_sum(k, m - 1) @ sig[comp]
        memo[(k, m)] = v % q
        return memo[(k, m)]

    out = {}
    for n in range(i + 1):
        k = i - n
        comp = ja + jb + k
        if comp > top or jb + k > top:
            continue
        c = word_sum(k, n)
        prod = np.einsum("a,b,abk->k", a, c, gr.constants[(ja, jb + k)]) % q if c.size and a.size else \
            np.zeros(gr.sections[comp].shape[0], dtype=np.int64)
        out[n + l] = (comp, prod)
    return out


def graded_series(S: SkewData, max_k: int, T: int) -> SeriesGraded:
    """Structure constants of gr_J S against skew polynomial models over gr_I R.

    Homogeneous basis elements are a t^i with a in the section basis of
    gr_I^j R; all pairs of total degree <= max_k are multiplied in S and the
    symbols compared with (gr_I R)[tbar; sigma-bar] (``matches``) and with
    (gr_I R)[tbar; sigma-bar, delta-bar] where delta-bar is the degree-one
    map induced by delta (``derivation_matches``).
    """
    R = S.base
    q = R.q
    gr = graded_coeff(S, max_k + 1)
    sig = gr.sigma_bar
    der = induced_derivation(S, gr)
    zero_der = [np.zeros_like(d) for d in der]
    W = max(working_precision(S, T, "left"), max_k + 1)
    pieces = []
    for i in range(min(T, max_k + 1)):
        for j in range(max_k + 1 - i):
            for idx in range(gr.sections[j].shape[0]):
                coords = np.zeros(gr.sections[j].shape[0], dtype=np.int64)
                coords[idx] = 1
                pieces.append((i + j, i, j, coords))
    checked = 0
    matches = derivation_matches = True
    witness = None
    for d1, i, ja, ca in pieces:
        for d2, l, jb, cb in pieces:
            d = d1 + d2
            if d > max_k:
                continue
            u = ca @ gr.sections[ja] % q
            v = cb @ gr.sections[jb] % q
            z = skew_mul(series(S, [R.zero()] * i + [u], "left", W),
                         series(S, [R.zero()] * l + [v], "left", W))
            actual = {}
            for s in range(min(T, d + 1)):
                comp = d - s
                actual[s] = _coords(gr.sections[comp], gr.levels[comp + 1].reduce(z.coeffs[s]), R.p, R.n)
            for model, flag in ((zero_der, "zero"), (der, "der")):
                expect = _model_product(gr, sig, model, q, ja, ca, i, jb, cb, l, max_k)
                ok = True
                for s, got in actual.items():
                    want = expect.get(s, (d - s, np.zeros_like(got)))[1]
                    if want.shape != got.shape or not np.array_equal(want % q, got % q):
                        ok = False
                        if flag == "zero" and witness is None:
                            witness = {"left": {"t_exp": i, "coeff": u.tolist()},
                                       "right": {"t_exp": l, "coeff": v.tolist()},
                                       "slot": s, "got": got.tolist(), "want": want.tolist()}
                        break
                if flag == "zero":
                    matches &= ok
                else:
                    derivation_matches &= ok
            checked += 1
    all_zero = all(not d.any() for d in der[:max_k])
    return SeriesGraded(gr, max_k, T, checked, matches, derivation_matches, all_zero, witness)
