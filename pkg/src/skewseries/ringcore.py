"""Exact coefficient rings over Z/p^n and the Howell-form linear algebra behind them.

Elements, maps and submodules are all stored as integer numpy arrays with
entries reduced into ``[0, p**n)``.  Linear maps act on row vectors
(``v -> v @ A``), so the rows of a map's matrix are the images of the basis
vectors and the image of a map is the row span of its matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

DEFAULT_ENUMERATION_BOUND = 3 ** 10


class RingError(ValueError):
    """Raised when a ring descriptor or ring data fails validation."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p ** 0.5) + 1))


def valuation(x: int, p: int, n: int) -> int:
    """p-adic valuation of a residue mod p^n (``n`` for zero)."""
    x %= p ** n
    if x == 0:
        return n
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def as_matrix(rows, ncols: int) -> np.ndarray:
    a = np.array(rows, dtype=np.int64)
    if a.size == 0:
        return np.zeros((0, ncols), dtype=np.int64)
    return a.reshape(-1, ncols)


# ---------------------------------------------------------------------------
# Howell normal form over Z/p^n

def howell_matrix(rows, p: int, n: int, ncols: int | None = None) -> np.ndarray:
    """Howell normal form of the row span of ``rows`` over Z/p^n.

    Pivots are powers of ``p``, entries above a pivot are reduced into
    ``[0, pivot)`` and zero rows are dropped.  Because Z/p^n is a chain ring,
    a pivot of minimal valuation divides every other entry in its column, and
    re-inserting ``p^(n-v) * pivot_row`` gives the Howell property (the rows
    vanishing on the first k columns span everything in the module that does).
    """
    q = p ** n
    if ncols is None:
        ncols = np.asarray(rows).shape[-1]
    pool = [r for r in (as_matrix(rows, ncols) % q) if r.any()]
    basis: list[np.ndarray] = []
    pivots: list[int] = []
    for col in range(ncols):
        live = [r for r in pool if r[col]]
        if not live:
            continue
        rest = [r for r in pool if not r[col]]
        vals = [valuation(int(r[col]), p, n) for r in live]
        k = int(np.argmin(vals))
        v = vals[k]
        piv = live.pop(k)
        unit = int(piv[col]) // p ** v
        piv = piv * pow(unit, -1, q) % q
        pv = p ** v
        for r in live:
            r = (r - (int(r[col]) // pv) * piv) % q
            if r.any():
                rest.append(r)
        annihilated = (p ** (n - v) * piv) % q
        if annihilated.any():
            rest.append(annihilated)
        basis.append(piv)
        pivots.append(col)
        pool = rest
    # back-substitution: reduce entries above each pivot
    for i in range(len(basis)):
        col = pivots[i]
        pv = int(basis[i][col])
        for j in range(i):
            x = int(basis[j][col])
            if x >= pv:
                basis[j] = (basis[j] - (x // pv) * basis[i]) % q
    if not basis:
        return np.zeros((0, ncols), dtype=np.int64)
    return np.array(basis, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Submodule:
    """A submodule of (Z/p^n)^ambient, stored by its Howell basis."""

    basis: np.ndarray
    p: int
    n: int
    ambient: int

    @classmethod
    def span(cls, rows, p: int, n: int, ambient: int) -> "Submodule":
        return cls(howell_matrix(as_matrix(rows, ambient), p, n, ambient), p, n, ambient)

    @classmethod
    def zero(cls, p: int, n: int, ambient: int) -> "Submodule":
        return cls(np.zeros((0, ambient), dtype=np.int64), p, n, ambient)

    @classmethod
    def full(cls, p: int, n: int, ambient: int) -> "Submodule":
        return cls(np.eye(ambient, dtype=np.int64), p, n, ambient)

    @property
    def q(self) -> int:
        return self.p ** self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Submodule):
            return NotImplemented
        return (self.q == other.q and self.ambient == other.ambient
                and self.basis.shape == other.basis.shape
                and bool(np.array_equal(self.basis, other.basis)))

    def __hash__(self) -> int:
        return hash((self.q, self.ambient, self.basis.tobytes()))

    def __repr__(self) -> str:
        return f"Submodule(Z/{self.q}, ambient={self.ambient}, basis={self.basis.tolist()})"

    def is_zero(self) -> bool:
        return self.basis.shape[0] == 0

    def log_order(self) -> int:
        """log_p of the number of elements."""
        total = 0
        for row in self.basis:
            piv = int(row[np.flatnonzero(row)[0]])
            total += self.n - valuation(piv, self.p, self.n)
        return total

    def reduce(self, v) -> np.ndarray:
        """Remainder of ``v`` against the Howell basis (zero iff member)."""
        q = self.q
        v = np.asarray(v, dtype=np.int64) % q
        for row in self.basis:
            col = int(np.flatnonzero(row)[0])
            pv = int(row[col])
            x = int(v[col])
            if x >= pv:
                v = (v - (x // pv) * row) % q
        return v

    def contains(self, v) -> bool:
        return not self.reduce(v).any()

    def __le__(self, other: "Submodule") -> bool:
        return all(other.contains(r) for r in self.basis)

    def __add__(self, other: "Submodule") -> "Submodule":
        _check_compatible(self, other)
        return Submodule.span(np.vstack([self.basis, other.basis]), self.p, self.n, self.ambient)

    def __and__(self, other: "Submodule") -> "Submodule":
        _check_compatible(self, other)
        if self.is_zero() or other.is_zero():
            return Submodule.zero(self.p, self.n, self.ambient)
        stacked = np.vstack([self.basis, (-other.basis) % self.q])
        coeffs = kernel(stacked, self.p, self.n)
        ra = self.basis.shape[0]
        return Submodule.span(coeffs.basis[:, :ra] @ self.basis % self.q, self.p, self.n, self.ambient)

    def scaled(self, c: int) -> "Submodule":
        return Submodule.span(self.basis * c % self.q, self.p, self.n, self.ambient)

    def to_list(self) -> list[list[int]]:
        return self.basis.tolist()


def _check_compatible(a: Submodule, b: Submodule) -> None:
    if a.q != b.q or a.ambient != b.ambient:
        raise RingError(f"ambient mismatch: Z/{a.q}^{a.ambient} vs Z/{b.q}^{b.ambient}")


def howell_form(rows, p: int, n: int, ambient: int | None = None) -> Submodule:
    if ambient is None:
        ambient = np.asarray(rows).shape[-1]
    return Submodule.span(rows, p, n, ambient)


def image(matrix: np.ndarray, p: int, n: int) -> Submodule:
    return Submodule.span(matrix, p, n, matrix.shape[1])


def kernel(matrix: np.ndarray, p: int, n: int) -> Submodule:
    """Kernel of ``v -> v @ matrix`` as a submodule of the source."""
    q = p ** n
    rows, cols = matrix.shape
    aug = np.hstack([matrix % q, np.eye(rows, dtype=np.int64)])
    h = howell_matrix(aug, p, n, cols + rows)
    ker = h[~h[:, :cols].any(axis=1), cols:] if h.size else np.zeros((0, rows), dtype=np.int64)
    return Submodule.span(ker, p, n, rows)


def quotient_divisors(big: Submodule, small: Submodule) -> list[int]:
    """Elementary divisors (as prime powers, ascending) of ``big / small``.

    Uses the ranks of the layers p^k (big/small) = (p^k big + small) / small.
    """
    if not small <= big:
        raise RingError("quotient_divisors: small is not contained in big")
    p, n = big.p, big.n
    base = small.log_order()
    r = [(big.scaled(p ** k) + small).log_order() - base for k in range(n + 1)]
    divisors: list[int] = []
    for k in range(1, n + 1):
        at_least = r[k - 1] - r[k]
        at_least_next = r[k] - r[k + 1] if k < n else 0
        divisors.extend([p ** k] * (at_least - at_least_next))
    return sorted(divisors)


# ---------------------------------------------------------------------------
# Rings and maps

@dataclass(frozen=True, eq=False)
class RingMap:
    """An additive map between free Z/q-modules acting on row vectors."""

    matrix: np.ndarray
    q: int

    def __call__(self, v) -> np.ndarray:
        return np.asarray(v, dtype=np.int64) @ self.matrix % self.q

    def then(self, other: "RingMap") -> "RingMap":
        """``other ∘ self``: apply self first."""
        return RingMap(self.matrix @ other.matrix % self.q, self.q)

    def __matmul__(self, other: "RingMap") -> "RingMap":
        # self ∘ other
        return RingMap(other.matrix @ self.matrix % self.q, self.q)

    def __add__(self, other: "RingMap") -> "RingMap":
        return RingMap((self.matrix + other.matrix) % self.q, self.q)

    def __sub__(self, other: "RingMap") -> "RingMap":
        return RingMap((self.matrix - other.matrix) % self.q, self.q)

    def __neg__(self) -> "RingMap":
        return RingMap((-self.matrix) % self.q, self.q)

    def scale(self, c: int) -> "RingMap":
        return RingMap(self.matrix * c % self.q, self.q)

    def __pow__(self, k: int) -> "RingMap":
        out = RingMap(np.eye(self.matrix.shape[0], dtype=np.int64), self.q)
        for _ in range(k):
            out = self @ out
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, RingMap) and np.array_equal(self.matrix % self.q, other.matrix % other.q)

    def __hash__(self) -> int:
        return hash(self.matrix.tobytes())

    def is_zero(self) -> bool:
        return not (self.matrix % self.q).any()

    @classmethod
    def identity(cls, dim: int, q: int) -> "RingMap":
        return cls(np.eye(dim, dtype=np.int64), q)

    @classmethod
    def zero(cls, dim: int, q: int) -> "RingMap":
        return cls(np.zeros((dim, dim), dtype=np.int64), q)


@dataclass(frozen=True, eq=False)
class CoeffRing:
    """A finite free (Z/p^n)-algebra given by structure constants.

    ``table[i, j]`` is the coefficient vector of ``e_i * e_j``.
    """

    p: int
    n: int
    labels: tuple[str, ...]
    table: np.ndarray
    one: np.ndarray
    jac_generators: tuple[np.ndarray, ...]
    kind: str
    generator: str | None = None
    modulus: int | None = None
    nilpotency_index: int = field(default=0)
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def q(self) -> int:
        return self.p ** self.n

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def cardinality(self) -> int:
        return self.q ** self.rank

    def element(self, coeffs) -> np.ndarray:
        v = np.asarray(coeffs, dtype=np.int64) % self.q
        if v.shape != (self.rank,):
            raise RingError(f"element needs {self.rank} coefficients, got {v.shape}")
        return v

    def basis(self, i: int) -> np.ndarray:
        e = np.zeros(self.rank, dtype=np.int64)
        e[i] = 1
        return e

    def zero(self) -> np.ndarray:
        return np.zeros(self.rank, dtype=np.int64)

    def mul(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", a, b, self.table) % self.q

    def power(self, a, k: int) -> np.ndarray:
        out = self.one.copy()
        for _ in range(k):
            out = self.mul(out, a)
        return out

    def left_matrix(self, a) -> np.ndarray:
        """Matrix of ``b -> a*b``."""
        return np.einsum("i,ijk->jk", a, self.table) % self.q

    def right_matrix(self, b) -> np.ndarray:
        """Matrix of ``a -> a*b``."""
        return np.einsum("j,ijk->ik", b, self.table) % self.q

    def is_commutative(self) -> bool:
        return bool(np.array_equal(self.table, self.table.transpose(1, 0, 2)))

    def is_unit(self, a) -> bool:
        return _det_mod_p(self.left_matrix(a), self.p) != 0

    def inverse(self, a) -> np.ndarray:
        """Two-sided inverse by solving ``a*x = 1`` over Z/p^n."""
        x = solve(self.left_matrix(a), self.one, self.p, self.n)
        if x is None or not np.array_equal(self.mul(x, a), self.one):
            raise RingError(f"{self.format(a)} is not a unit")
        return x

    def ideal(self, gens: Iterable) -> Submodule:
        """Two-sided ideal generated by ``gens``."""
        rows = []
        for g in gens:
            g = np.asarray(g, dtype=np.int64)
            for i in range(self.rank):
                rows.append(self.right_matrix(self.mul(self.basis(i), g)))
        if not rows:
            return Submodule.zero(self.p, self.n, self.rank)
        return Submodule.span(np.vstack(rows), self.p, self.n, self.rank)

    def format(self, a) -> str:
        terms = []
        for c, lab in zip(np.asarray(a).tolist(), self.labels):
            if c:
                terms.append(lab if c == 1 and lab != "1" else (str(c) if lab == "1" else f"{c}*{lab}"))
        return " + ".join(terms) if terms else "0"

    def elements(self) -> Iterable[np.ndarray]:
        for coeffs in itertools.product(range(self.q), repeat=self.rank):
            yield np.array(coeffs, dtype=np.int64)


def _det_mod_p(m: np.ndarray, p: int) -> int:
    """Determinant mod p via Gaussian elimination over F_p."""
    a = np.array(m, dtype=np.int64) % p
    size = a.shape[0]
    det = 1
    for c in range(size):
        piv = next((r for r in range(c, size) if a[r, c]), None)
        if piv is None:
            return 0
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
            det = -det
        det = det * int(a[c, c]) % p
        inv = pow(int(a[c, c]), -1, p)
        for r in range(c + 1, size):
            if a[r, c]:
                a[r] = (a[r] - a[r, c] * inv * a[c]) % p
    return det % p


def solve(matrix: np.ndarray, target, p: int, n: int) -> np.ndarray | None:
    """Some ``x`` with ``x @ matrix == target`` over Z/p^n, or None."""
    q = p ** n
    rows, cols = matrix.shape
    target = np.asarray(target, dtype=np.int64) % q
    aug = np.hstack([matrix % q, np.eye(rows, dtype=np.int64)])
    h = howell_matrix(aug, p, n, cols + rows)
    v = target.copy()
    x = np.zeros(rows, dtype=np.int64)
    for row in h:
        nz = np.flatnonzero(row[:cols])
        if nz.size == 0:
            break
        col = int(nz[0])
        pv = int(row[col])
        c = int(v[col])
        if c % pv:
            return None
        k = c // pv
        v = (v - k * row[:cols]) % q
        x = (x + k * row[cols:]) % q
    return x if not v.any() else None


def rank_mod_p(matrix: np.ndarray, p: int) -> int:
    """Rank over F_p."""
    if matrix.size == 0:
        return 0
    return howell_matrix(np.asarray(matrix) % p, p, 1, matrix.shape[1]).shape[0]


# ---------------------------------------------------------------------------
# Ring constructors

def _check_prime(p: int, n: int) -> None:
    if not is_prime(p):
        raise RingError(f"{p} is not prime")
    if n < 1:
        raise RingError("p-precision must be at least 1")


def modular(p: int, n: int) -> CoeffRing:
    _check_prime(p, n)
    table = np.ones((1, 1, 1), dtype=np.int64)
    one = np.array([1], dtype=np.int64)
    jac = (np.array([p % p ** n], dtype=np.int64),)
    return _finish(CoeffRing(p, n, ("1",), table, one, jac, "modular"))


def truncated_poly(p: int, n: int, N: int, var: str = "X") -> CoeffRing:
    _check_prime(p, n)
    if N < 1:
        raise RingError("zero rank")
    table = np.zeros((N, N, N), dtype=np.int64)
    for i in range(N):
        for j in range(N - i):
            table[i, j, i + j] = 1
    labels = tuple("1" if i == 0 else (var if i == 1 else f"{var}^{i}") for i in range(N))
    one = np.eye(N, dtype=np.int64)[0]
    jac = [np.eye(N, dtype=np.int64)[1] if N > 1 else np.zeros(N, dtype=np.int64)]
    if n > 1:
        jac.insert(0, one * p)
    return _finish(CoeffRing(p, n, labels, table, one, tuple(jac), "truncated-poly", var, N))


def group_algebra(p: int, n: int, order: int, gen: str = "h") -> CoeffRing:
    """(Z/p^n)[C_order] with basis gen^0..gen^(order-1)."""
    _check_prime(p, n)
    if order < 1:
        raise RingError("zero rank")
    m = order
    while m % p == 0:
        m //= p
    if m != 1:
        raise RingError(f"cyclic group of order {order} is not a {p}-group")
    table = np.zeros((order, order, order), dtype=np.int64)
    for i in range(order):
        for j in range(order):
            table[i, j, (i + j) % order] = 1
    labels = tuple("1" if i == 0 else (gen if i == 1 else f"{gen}^{i}") for i in range(order))
    one = np.eye(order, dtype=np.int64)[0]
    g_minus_1 = (np.eye(order, dtype=np.int64)[1 % order] - one) % p ** n
    jac = [g_minus_1]
    if n > 1:
        jac.insert(0, one * p)
    return _finish(CoeffRing(p, n, labels, table, one, tuple(jac), "group-algebra", gen, order))


def product_ring(p: int, n: int, copies: int) -> CoeffRing:
    """(Z/p^n)^copies with componentwise multiplication."""
    _check_prime(p, n)
    table = np.zeros((copies, copies, copies), dtype=np.int64)
    for i in range(copies):
        table[i, i, i] = 1
    labels = tuple(f"e{i}" for i in range(copies))
    one = np.ones(copies, dtype=np.int64)
    jac = (one * p % p ** n,) if n > 1 else ()
    return _finish(CoeffRing(p, n, labels, table, one, jac, "product"))


def _finish(R: CoeffRing) -> CoeffRing:
    check_associative(R)
    J = R.ideal(R.jac_generators)
    power = Submodule.full(R.p, R.n, R.rank)
    index = 0
    while not power.is_zero():
        power = ideal_product(R, power, J)
        index += 1
        if index > R.n * R.rank:
            raise RingError("Jacobson generators are not nilpotent")
    object.__setattr__(R, "nilpotency_index", index)
    return R


def check_associative(R: CoeffRing) -> None:
    """Exhaustive on basis triples, which certifies associativity by trilinearity."""
    t = R.table
    left = np.einsum("ijm,mkl->ijkl", t, t) % R.q
    right = np.einsum("jkm,iml->ijkl", t, t) % R.q
    bad = np.argwhere((left != right).any(axis=-1))
    if bad.size:
        i, j, k = bad[0].tolist()
        raise RingError(f"associativity fails on ({R.labels[i]}, {R.labels[j]}, {R.labels[k]})")
    o = R.one
    for i in range(R.rank):
        e = R.basis(i)
        if not (np.array_equal(R.mul(o, e), e) and np.array_equal(R.mul(e, o), e)):
            raise RingError(f"unit fails on {R.labels[i]}")


def make_ring(spec: dict) -> CoeffRing:
    kind = spec["kind"]
    p, n = int(spec["p"]), int(spec.get("p_precision", spec.get("n", 1)))
    if kind == "modular":
        return modular(p, n)
    if kind in ("truncated_poly", "truncated-poly"):
        return truncated_poly(p, n, int(spec["N"]), spec.get("var", "X"))
    if kind in ("group_algebra", "group-algebra"):
        group = str(spec.get("group", ""))
        if not group.startswith("cyclic:"):
            raise RingError(f"unsupported group {group!r}")
        return group_algebra(p, n, int(group.split(":")[1]), spec.get("generator", "h"))
    if kind == "product":
        return product_ring(p, n, int(spec.get("copies", 2)))
    raise RingError(f"unknown ring kind {kind!r}")


# ---------------------------------------------------------------------------
# Ideal arithmetic

def ideal_product(R: CoeffRing, A: Submodule, B: Submodule) -> Submodule:
    if A.is_zero() or B.is_zero():
        return Submodule.zero(R.p, R.n, R.rank)
    prods = np.vstack([A.basis @ R.right_matrix(b) % R.q for b in B.basis])
    return Submodule.span(prods, R.p, R.n, R.rank)


def module_arith(op: str, A: Submodule, B: Submodule, R: CoeffRing | None = None) -> Submodule:
    _check_compatible(A, B)
    if op == "sum":
        return A + B
    if op == "intersection":
        return A & B
    if op == "product":
        if R is None or R.rank != A.ambient:
            raise RingError("ideal product needs the ring as ambient")
        return ideal_product(R, A, B)
    raise RingError(f"unknown operation {op!r}")


def jacobson(R: CoeffRing) -> Submodule:
    return R.ideal(R.jac_generators)


def jac_power(R: CoeffRing, k: int) -> Submodule:
    if k < 0:
        raise RingError("k must be nonnegative")
    return _jac_powers(R, k)[k]


def _jac_powers(R: CoeffRing, k: int) -> list[Submodule]:
    powers = R.cache.setdefault("jac_powers", [Submodule.full(R.p, R.n, R.rank)])
    J = jacobson(R)
    while len(powers) <= k:
        powers.append(ideal_product(R, powers[-1], J))
    return powers


def radical_degree(R: CoeffRing, a) -> int:
    """Largest k with a in Jac^k (the nilpotency index for zero)."""
    for k in range(R.nilpotency_index + 1):
        if not jac_power(R, k).contains(a):
            return k - 1
    return R.nilpotency_index


def encode(a) -> list[int]:
    return [int(x) for x in np.asarray(a).tolist()]


def sample_elements(R: CoeffRing, rng: np.random.Generator, count: int) -> list[np.ndarray]:
    return [rng.integers(0, R.q, R.rank).astype(np.int64) for _ in range(count)]


def parse_element(R: CoeffRing, text) -> np.ndarray:
    """Read an element from a coefficient list or a polynomial in the generator.

    ``"h^4 - h"`` or ``"1 + 2*X^3"``; in a group algebra exponents are read
    modulo the group order and negative exponents are allowed.
    """
    if not isinstance(text, str):
        return R.element(text)
    import sympy

    if R.generator is None:
        if R.rank != 1:
            _parse_fail(text)
        return R.element([int(sympy.sympify(text))])
    x = sympy.Symbol(R.generator)
    expr = sympy.expand(sympy.sympify(text.replace("^", "**"), locals={R.generator: x}))
    out = R.zero()
    for term in sympy.Add.make_args(expr):
        coeff, rest = term.as_coeff_Mul()
        if rest == 1:
            e = 0
        elif rest == x:
            e = 1
        elif rest.is_Pow and rest.base == x and rest.exp.is_Integer:
            e = int(rest.exp)
        else:
            _parse_fail(text)
        if not coeff.is_Integer:
            _parse_fail(text)
        if R.kind == "group-algebra":
            e %= R.modulus
        elif e < 0:
            _parse_fail(text)
        if e < R.rank:
            out[e] = (out[e] + int(coeff)) % R.q
    return out


def _parse_fail(text):
    raise RingError(f"cannot read ring element {text!r}")
