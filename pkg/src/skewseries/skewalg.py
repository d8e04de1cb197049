"""Skew data (sigma, delta) and arithmetic in R[[t; sigma, delta]].

A :class:`SkewSeries` of precision ``T`` stands for an element of S whose
coefficients at indices ``>= T`` are unknown.  In left form a tail
``a_j t^j`` (j >= T) can still reach lower degrees through ``t^j b``, so
products and conversions report the degree below which the result is
provably exact.  When the left span of ``t^T, t^(T+1), ...`` is a two-sided
ideal (``t^T`` is *normal*) nothing is lost.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .ringcore import (CoeffRing, RingMap, Submodule, jac_power,
                       jacobson, parse_element)

MAX_SIGMA_ORDER = 10_000


class SkewError(ValueError):
    """Validation failure of (sigma, delta) data, with a witness."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True, eq=False)
class SkewData:
    base: CoeffRing
    sigma: RingMap
    delta: RingMap
    sigma_inv: RingMap
    sigma_order: int
    commuting: bool
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def sigma_prime(self) -> RingMap:
        return self.sigma_inv

    @property
    def delta_prime(self) -> RingMap:
        return -(self.delta @ self.sigma_inv)

    @property
    def q(self) -> int:
        return self.base.q

    def sigma_power(self, e: int) -> RingMap:
        e %= self.sigma_order
        return self.sigma ** e

    def maps(self, side: str) -> tuple[RingMap, RingMap]:
        """(derivation, automorphism) used by the left or right formulas."""
        if side == "left":
            return self.delta, self.sigma
        return self.delta_prime, self.sigma_prime

    def monomial(self, k: int, l: int, side: str = "left") -> RingMap:
        """M_{k,l}(Y, Z) evaluated at the ``side`` pair, memoized per (k, l)."""
        memo = self.cache.setdefault(("M", side), {})
        key = (k, l)
        if key in memo:
            return memo[key]
        dim = self.base.rank
        if k < 0 or l < 0:
            return RingMap.zero(dim, self.q)
        if k == 0 and l == 0:
            out = RingMap.identity(dim, self.q)
        else:
            Y, Z = self.maps(side)
            out = RingMap.zero(dim, self.q)
            if k > 0:
                out = out + (Y @ self.monomial(k - 1, l, side))
            if l > 0:
                out = out + (Z @ self.monomial(k, l - 1, side))
        memo[key] = out
        return out

    @property
    def nilpotence_bound(self) -> int:
        """Least m with every monomial having >= m Y-letters vanishing on R."""
        if "mbound" not in self.cache:
            res = check_sigma_nilpotent(self, self.base.nilpotency_index)
            if not res.nilpotent:
                raise SkewError("delta is not sigma-nilpotent; the skew power series ring is undefined",
                                res.word)
            self.cache["mbound"] = res.m
        return self.cache["mbound"]

    def exact_below(self, T: int, side: str = "left") -> int:
        """Lowest degree an unknown tail from index ``T`` can reach."""
        m = self.nilpotence_bound
        for n in range(max(0, T - m + 1), T):
            for k in range(T - n, m):
                if not self.monomial(k, n, side).is_zero():
                    return n
        return T

    def t_power_is_normal(self, T: int) -> bool:
        return self.exact_below(T, "left") == T and self.exact_below(T, "right") == T


# ---------------------------------------------------------------------------
# construction and validation

def _map_from_generator(R: CoeffRing, gen_image: np.ndarray) -> np.ndarray:
    return np.array([R.power(gen_image, i) for i in range(R.rank)], dtype=np.int64)


def _sigma_matrix(R: CoeffRing, spec) -> np.ndarray:
    if spec in (None, "id", "identity"):
        return np.eye(R.rank, dtype=np.int64)
    if spec == "swap" and R.kind == "product":
        return np.eye(R.rank, dtype=np.int64)[::-1].copy()
    if isinstance(spec, dict) and "matrix" in spec:
        return np.array(spec["matrix"], dtype=np.int64) % R.q
    if isinstance(spec, dict):
        if R.generator is None or set(spec) != {R.generator}:
            raise SkewError(f"sigma must be given on the generator {R.generator!r}")
        return _map_from_generator(R, parse_element(R, spec[R.generator]))
    raise SkewError(f"unreadable sigma descriptor {spec!r}")


def _delta_matrix(R: CoeffRing, sigma: np.ndarray, spec) -> np.ndarray:
    if spec in (None, "zero", 0):
        return np.zeros((R.rank, R.rank), dtype=np.int64)
    if spec == "sigma_minus_id":
        return (sigma - np.eye(R.rank, dtype=np.int64)) % R.q
    if isinstance(spec, dict) and "matrix" in spec:
        return np.array(spec["matrix"], dtype=np.int64) % R.q
    if isinstance(spec, dict):
        if R.generator is None or set(spec) != {R.generator}:
            raise SkewError(f"delta must be given on the generator {R.generator!r}")
        x = R.basis(1)
        dx = parse_element(R, spec[R.generator])
        sx = sigma[1]
        rows = [R.zero()]
        power = R.one
        for i in range(1, R.rank + 1):
            # delta(x^i) = delta(x) x^(i-1) + sigma(x) delta(x^(i-1))
            rows.append((R.mul(dx, power) + R.mul(sx, rows[-1])) % R.q)
            power = R.mul(power, x)
        relation = rows[R.rank]
        if R.kind == "truncated-poly" and relation.any():
            raise SkewError(f"Leibniz extension gives delta({R.generator}^{R.rank}) = "
                            f"{R.format(relation)} != 0", relation)
        if R.kind == "group-algebra" and relation.any():
            raise SkewError(f"Leibniz extension gives delta({R.generator}^{R.rank}) = "
                            f"{R.format(relation)} != delta(1) = 0", relation)
        return np.array(rows[:R.rank], dtype=np.int64)
    raise SkewError(f"unreadable delta descriptor {spec!r}")


def validate_skew(R: CoeffRing, sigma_spec, delta_spec) -> SkewData:
    q = R.q
    S = _sigma_matrix(R, sigma_spec)
    D = _delta_matrix(R, S, delta_spec)
    t = R.table
    # sigma multiplicative and unital
    lhs = np.einsum("ijm,mk->ijk", t, S) % q
    rhs = np.einsum("ia,jb,abk->ijk", S, S, t) % q
    bad = np.argwhere((lhs != rhs).any(axis=-1))
    if bad.size:
        i, j = bad[0].tolist()
        raise SkewError(f"sigma not multiplicative on ({R.labels[i]}, {R.labels[j]})", (i, j))
    if not np.array_equal(R.one @ S % q, R.one):
        raise SkewError("sigma(1) != 1")
    sigma = RingMap(S, q)
    ident = RingMap.identity(R.rank, q)
    power, order = sigma, 1
    while power != ident:
        power = sigma @ power
        order += 1
        if order > MAX_SIGMA_ORDER:
            raise SkewError(f"sigma is not invertible or has order > {MAX_SIGMA_ORDER}")
    sigma_inv = sigma ** (order - 1)
    # left sigma-derivation: delta(ab) = delta(a) b + sigma(a) delta(b)
    lhs = np.einsum("ijm,mk->ijk", t, D) % q
    rhs = (np.einsum("ia,ajk->ijk", D, t) + np.einsum("ia,jb,abk->ijk", S, D, t)) % q
    bad = np.argwhere((lhs != rhs).any(axis=-1))
    if bad.size:
        i, j = bad[0].tolist()
        raise SkewError(f"Leibniz rule fails on ({R.labels[i]}, {R.labels[j]})", (i, j))
    delta = RingMap(D, q)
    J = jacobson(R)
    if Submodule.span(J.basis @ S % q, R.p, R.n, R.rank) != J:
        raise SkewError("sigma does not preserve the Jacobson radical")
    commuting = (sigma @ delta) == (delta @ sigma)
    data = SkewData(R, sigma, delta, sigma_inv, order, commuting)
    # right sigma'-derivation: delta'(ab) = delta'(a) sigma'(b) + a delta'(b)
    Dp, Sp = data.delta_prime.matrix, sigma_inv.matrix
    lhs = np.einsum("ijm,mk->ijk", t, Dp) % q
    rhs = (np.einsum("ia,jb,abk->ijk", Dp, Sp, t) + np.einsum("jb,ibk->ijk", Dp, t)) % q
    bad = np.argwhere((lhs != rhs).any(axis=-1))
    if bad.size:
        i, j = bad[0].tolist()
        raise SkewError(f"right rule for delta' fails on ({R.labels[i]}, {R.labels[j]})", (i, j))
    return data


def commutation_witness(S: SkewData) -> int | None:
    """Index of a basis element where sigma(delta(a)) != delta(sigma(a))."""
    diff = ((S.sigma @ S.delta) - (S.delta @ S.sigma)).matrix
    rows = np.flatnonzero(diff.any(axis=1))
    return int(rows[0]) if rows.size else None


# ---------------------------------------------------------------------------
# monomial operators

def apply_monomial(S: SkewData, k: int, l: int, a, side: str = "left") -> np.ndarray:
    return S.monomial(k, l, side)(a)


def monomial_words(k: int, l: int) -> list[str]:
    """All words with k letters Y and l letters Z, expanded without memoization."""
    if k < 0 or l < 0:
        return []
    if k == 0 and l == 0:
        return [""]
    return ["Y" + w for w in monomial_words(k - 1, l)] + ["Z" + w for w in monomial_words(k, l - 1)]


def evaluate_word(S: SkewData, word: str, a) -> np.ndarray:
    """Apply a word over {Y, Z, z} (z = sigma^-1); the leftmost letter acts last."""
    letters = {"Y": S.delta, "Z": S.sigma, "z": S.sigma_inv}
    v = np.asarray(a, dtype=np.int64)
    for ch in reversed(word):
        v = letters[ch](v)
    return v


# ---------------------------------------------------------------------------
# sigma-nilpotence

@dataclass
class NilpotenceResult:
    nilpotent: bool
    target: int
    m: int | None
    lattice_logs: list[int]
    cycle_start: int | None = None
    cycle_length: int | None = None
    word: tuple[int, ...] | None = None
    element: list[int] | None = None
    image: list[int] | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def conjugated_deltas(S: SkewData) -> list[RingMap]:
    """delta_j = sigma^j delta sigma^-j for j = 0..d-1."""
    return [S.sigma_power(j) @ S.delta @ S.sigma_power(-j) for j in range(S.sigma_order)]


def check_sigma_nilpotent(S: SkewData, n: int) -> NilpotenceResult:
    """Decide sigma-nilpotence towards Jac^n via the image-lattice of delta_j compositions."""
    if n < 1:
        raise SkewError("target radical power must be >= 1")
    R = S.base
    target = jac_power(R, n)
    deltas = conjugated_deltas(S)
    V = Submodule.full(R.p, R.n, R.rank)
    seen: list[Submodule] = [V]
    while True:
        rows = np.vstack([V.basis @ d.matrix % R.q for d in deltas]) if not V.is_zero() else np.zeros((0, R.rank), dtype=np.int64)
        V = Submodule.span(rows, R.p, R.n, R.rank)
        if V in seen:
            start = seen.index(V)
            break
        seen.append(V)
    logs = [s.log_order() for s in seen]
    inside = [s <= target for s in seen]
    cycle = seen[start:]
    if all(s <= target for s in cycle):
        m = max((k + 1 for k, ok in enumerate(inside) if not ok), default=1)
        return NilpotenceResult(True, n, m, logs)
    # counterexample: a single word of length k inside the cycle escaping Jac^n
    k = next(i for i in range(start, len(seen)) if not inside[i])
    for word in itertools.product(range(len(deltas)), repeat=k):
        for i in range(R.rank):
            v = R.basis(i)
            for j in reversed(word):
                v = deltas[j](v)
            if not target.contains(v):
                return NilpotenceResult(False, n, None, logs, start, len(seen) - start,
                                        word, R.basis(i).tolist(), v.tolist())
    raise AssertionError("lattice escapes Jac^n but no single word does")


# ---------------------------------------------------------------------------
# series

@dataclass(frozen=True, eq=False)
class SkewSeries:
    ring: SkewData
    coeffs: np.ndarray
    form: str = "left"

    @property
    def t_precision(self) -> int:
        return self.coeffs.shape[0]

    def __post_init__(self):
        if self.form not in ("left", "right"):
            raise SkewError(f"unknown form {self.form!r}")

    def __eq__(self, other) -> bool:
        return (isinstance(other, SkewSeries) and self.form == other.form
                and self.coeffs.shape == other.coeffs.shape
                and bool(np.array_equal(self.coeffs, other.coeffs)))

    def __hash__(self):
        return hash((self.form, self.coeffs.tobytes()))

    def __add__(self, other: "SkewSeries") -> "SkewSeries":
        _compatible(self, other)
        T = min(self.t_precision, other.t_precision)
        return SkewSeries(self.ring, (self.coeffs[:T] + other.coeffs[:T]) % self.ring.q, self.form)

    def __neg__(self) -> "SkewSeries":
        return SkewSeries(self.ring, (-self.coeffs) % self.ring.q, self.form)

    def __sub__(self, other: "SkewSeries") -> "SkewSeries":
        return self + (-other)

    def __mul__(self, other: "SkewSeries") -> "SkewSeries":
        return skew_mul(self, other)

    def scale(self, c: int) -> "SkewSeries":
        return SkewSeries(self.ring, self.coeffs * c % self.ring.q, self.form)

    def truncate(self, T: int) -> "SkewSeries":
        if T > self.t_precision:
            raise SkewError(f"cannot raise precision from {self.t_precision} to {T}")
        return SkewSeries(self.ring, self.coeffs[:T].copy(), self.form)

    def agrees(self, other: "SkewSeries") -> bool:
        """Equal on every coefficient both operands know."""
        T = min(self.t_precision, other.t_precision)
        return self.form == other.form and bool(np.array_equal(self.coeffs[:T], other.coeffs[:T]))

    def to_dict(self) -> dict:
        return {"form": self.form, "t_precision": self.t_precision, "coeffs": self.coeffs.tolist()}

    def __repr__(self) -> str:
        R = self.ring.base
        terms = []
        for i, a in enumerate(self.coeffs):
            if a.any():
                c = R.format(a)
                tp = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
                if not tp:
                    terms.append(f"({c})")
                elif self.form == "left":
                    terms.append(f"({c}){tp}")
                else:
                    terms.append(f"{tp}({c})")
        body = " + ".join(terms) or "0"
        return f"{body} + O(t^{self.t_precision}) [{self.form}]"


def _compatible(x: SkewSeries, y: SkewSeries) -> None:
    if x.ring is not y.ring:
        raise SkewError("series over different skew data")
    if x.form != y.form:
        raise SkewError("series in different coefficient forms")


def series(S: SkewData, coeffs, form: str = "left", T: int | None = None) -> SkewSeries:
    R = S.base
    rows = [np.asarray(c, dtype=np.int64) % R.q for c in coeffs]
    if T is None:
        T = len(rows)
    arr = np.zeros((T, R.rank), dtype=np.int64)
    for i, r in enumerate(rows[:T]):
        arr[i] = r
    return SkewSeries(S, arr, form)


def constant(S: SkewData, a, T: int, form: str = "left") -> SkewSeries:
    return series(S, [a], form, T)


def t_power(S: SkewData, k: int, T: int, form: str = "left") -> SkewSeries:
    coeffs = [S.base.zero() for _ in range(k)] + [S.base.one]
    return series(S, coeffs, form, T)


def random_series(S: SkewData, T: int, rng: np.random.Generator, form: str = "left") -> SkewSeries:
    return SkewSeries(S, rng.integers(0, S.q, (T, S.base.rank)).astype(np.int64), form)


def skew_mul(x: SkewSeries, y: SkewSeries) -> SkewSeries:
    """Product of two series in the same form, moving t^i past coefficients via the M_{k,l} monomials."""
    _compatible(x, y)
    S, R = x.ring, x.ring.base
    q = R.q
    m = S.nilpotence_bound
    if x.form == "left":
        T = min(y.t_precision, S.exact_below(x.t_precision, "left"))
        out = np.zeros((T, R.rank), dtype=np.int64)
        # c_m += a_j * M_{j-n,n}(b_{m-n})
        for j in range(x.t_precision):
            a = x.coeffs[j]
            if not a.any():
                continue
            La = R.left_matrix(a)
            for n in range(max(0, j - m + 1), min(j, T - 1) + 1):
                M = S.monomial(j - n, n, "left")
                if M.is_zero():
                    continue
                out[n:] += y.coeffs[:T - n] @ M.matrix % q @ La
                out %= q
        return SkewSeries(S, out % q, "left")
    T = min(x.t_precision, S.exact_below(y.t_precision, "right"))
    out = np.zeros((T, R.rank), dtype=np.int64)
    # c_m += M'_{k-n,n}(a_{m-n}) * b_k
    for k in range(y.t_precision):
        b = y.coeffs[k]
        if not b.any():
            continue
        Rb = R.right_matrix(b)
        for n in range(max(0, k - m + 1), min(k, T - 1) + 1):
            M = S.monomial(k - n, n, "right")
            if M.is_zero():
                continue
            out[n:] += x.coeffs[:T - n] @ M.matrix % q @ Rb
            out %= q
    return SkewSeries(S, out % q, "right")


def convert_form(x: SkewSeries) -> SkewSeries:
    """Rewrite sum t^i b_i as sum a_i t^i and back, expanding t^i b through the M_{k,l} monomials."""
    S, R = x.ring, x.ring.base
    q = R.q
    m = S.nilpotence_bound
    side = "left" if x.form == "right" else "right"
    T = S.exact_below(x.t_precision, side)
    out = np.zeros((T, R.rank), dtype=np.int64)
    for j in range(T):
        for i in range(j, min(x.t_precision, j + m)):
            M = S.monomial(i - j, j, side)
            if not M.is_zero():
                out[j] = (out[j] + M(x.coeffs[i])) % q
    return SkewSeries(S, out, "left" if x.form == "right" else "right")


def to_form(x: SkewSeries, form: str) -> SkewSeries:
    return x if x.form == form else convert_form(x)


def sigma_hat(S: SkewData, x: SkewSeries) -> SkewSeries:
    """sum t^i a_i -> sum t^i sigma(a_i); needs sigma and delta to commute."""
    if not S.commuting:
        w = commutation_witness(S)
        raise SkewError(f"sigma and delta do not commute at {S.base.labels[w]}", w)
    if x.form != "right":
        raise SkewError("sigma_hat expects right form")
    return SkewSeries(S, S.sigma(x.coeffs) if x.coeffs.size else x.coeffs.copy(), "right")


@dataclass
class IdentityReport:
    n: int
    equal: bool
    lhs: SkewSeries
    rhs: SkewSeries


def delta_power_identity(S: SkewData, a, n: int, T: int | None = None) -> IdentityReport:
    """Compare delta^n(a) with sum_i binom(n,i) (-1)^i t^(n-i) sigma^i(a) t^i."""
    if not S.commuting:
        raise SkewError("the binomial identity needs commuting sigma and delta",
                        commutation_witness(S))
    if T is None:
        T = n + 1
        while not S.t_power_is_normal(T):
            T += 1
    if T < n + 1:
        raise SkewError(f"t-precision {T} too small for n = {n}")
    a = np.asarray(a, dtype=np.int64)
    lhs = constant(S, (S.delta ** n)(a), T)
    rhs = series(S, [], "left", T)
    for i in range(n + 1):
        term = skew_mul(skew_mul(t_power(S, n - i, T), constant(S, (S.sigma ** i)(a), T)),
                        t_power(S, i, T))
        rhs = rhs + term.scale(comb(n, i) * (-1) ** i)
    return IdentityReport(n, lhs.agrees(rhs) and rhs.t_precision >= 1, lhs, rhs)


def working_precision(S: SkewData, T: int, side: str = "left") -> int:
    """Least W >= T such that a zero tail beyond W cannot disturb degrees < T."""
    W = T
    while S.exact_below(W, side) < T:
        W += 1
    return W
