"""Independent reference computations used by the tests.

Nothing here imports the package's linear algebra: ranks are plain Gaussian
elimination over F_p, rings are dictionaries of monomials.
"""

from __future__ import annotations

import itertools
from math import comb


def rank_mod_p(rows, p):
    rows = [[int(x) % p for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


class TruncPoly:
    """F_p[X]/(X^N) with sigma(X) = uX and the sigma-derivation delta(X) = X^e."""

    def __init__(self, p, N, u, e):
        self.p, self.N, self.u, self.e = p, N, u, e

    def mul(self, a, b):
        out = [0] * self.N
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b[: self.N - i]):
                    out[i + j] = (out[i + j] + x * y) % self.p
        return out

    def sigma(self, a, power=1):
        return [x * pow(self.u, i * power, self.p) % self.p for i, x in enumerate(a)]

    def delta_monomial(self, j):
        # delta(X^j) = sum_{i<j} sigma(X)^i delta(X) X^(j-1-i) = (sum_i u^i) X^(j-1+e)
        out = [0] * self.N
        if j and j - 1 + self.e < self.N:
            out[j - 1 + self.e] = sum(pow(self.u, i, self.p) for i in range(j)) % self.p
        return out

    def delta(self, a):
        out = [0] * self.N
        for j, x in enumerate(a):
            if x:
                d = self.delta_monomial(j)
                out = [(o + x * y) % self.p for o, y in zip(out, d)]
        return out

    def basis(self):
        return [[int(i == j) for i in range(self.N)] for j in range(self.N)]

    def sigma_order(self):
        return next(k for k in range(1, self.p) if pow(self.u, k, self.p) == 1)


class CyclicGroupAlgebra:
    """F_p[C_H] with sigma(h) = h^c and delta = sigma - id."""

    def __init__(self, p, H, c):
        self.p, self.N, self.c = p, H, c

    def mul(self, a, b):
        out = [0] * self.N
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[(i + j) % self.N] = (out[(i + j) % self.N] + x * y) % self.p
        return out

    def sigma(self, a, power=1):
        out = [0] * self.N
        e = pow(self.c, power, self.N) if power >= 0 else pow(pow(self.c, -1, self.N), -power, self.N)
        for i, x in enumerate(a):
            out[i * e % self.N] = (out[i * e % self.N] + x) % self.p
        return out

    def delta(self, a):
        return [(x - y) % self.p for x, y in zip(self.sigma(a), a)]

    def basis(self):
        return [[int(i == j) for i in range(self.N)] for j in range(self.N)]

    def sigma_order(self):
        return next(k for k in range(1, self.N) if pow(self.c, k, self.N) == 1)


def _words_with_deltas(ring, m):
    """All maps sigma^e0 delta sigma^e1 ... delta sigma^em (exactly m deltas)."""
    d = ring.sigma_order()
    for exps in itertools.product(range(d), repeat=m + 1):
        def apply(a, exps=exps):
            v = ring.sigma(a, exps[-1])
            for e in reversed(exps[:-1]):
                v = ring.sigma(ring.delta(v), e)
            return v
        yield apply


def brute_ideal(ring, k):
    """Rank of I_k = R * Delta_k, by enumerating words and products."""
    if k == 0:
        return ring.N
    images = {}
    for m in range(1, k + 1):
        vecs = []
        for w in _words_with_deltas(ring, m):
            vecs.extend(w(b) for b in ring.basis())
        images[m] = [v for v in vecs if any(v)]
    spans = []
    for r in range(1, k + 1):
        for parts in _compositions(k, r):
            prods = [[int(i == 0) for i in range(ring.N)]]
            for m in parts:
                prods = [ring.mul(x, y) for x in prods for y in images[m]]
                prods = _reduce(prods, ring.p)
            spans.extend(prods)
    gens = [ring.mul(b, v) for b in ring.basis() for v in spans]
    return rank_mod_p(gens, ring.p) if gens else 0


def _compositions(k, r):
    for cuts in itertools.combinations(range(1, k), r - 1):
        bounds = (0,) + cuts + (k,)
        yield [bounds[i + 1] - bounds[i] for i in range(r)]


def _reduce(vecs, p):
    # keep a spanning subset so products stay small
    keep, rank = [], 0
    for v in vecs:
        if rank_mod_p(keep + [v], p) > rank:
            keep.append(v)
            rank += 1
    return keep


class Semidirect:
    """F_p[C_H x| C_G] as dictionaries {(i, j): coeff} meaning h^i gamma^j."""

    def __init__(self, p, H, G, c):
        self.p, self.H, self.G, self.c = p, H, G, c

    def mul(self, x, y):
        out = {}
        for (i, j), a in x.items():
            for (k, l), b in y.items():
                key = ((i + pow(self.c, j, self.H) * k) % self.H, (j + l) % self.G)
                out[key] = (out.get(key, 0) + a * b) % self.p
        return {k: v for k, v in out.items() if v}

    def t_power(self, k):
        out = {}
        for i in range(k + 1):
            key = (0, i % self.G)
            out[key] = (out.get(key, 0) + comb(k, i) * (-1) ** (k - i)) % self.p
        return {k: v for k, v in out.items() if v}

    def from_left_series(self, coeffs):
        """sum_j a_j t^j with a_j in F_p[C_H] given as coefficient lists."""
        out = {}
        for j, a in enumerate(coeffs):
            ca = {(i, 0): int(x) % self.p for i, x in enumerate(a) if int(x) % self.p}
            for key, v in self.mul(ca, self.t_power(j)).items():
                out[key] = (out.get(key, 0) + v) % self.p
        return {k: v for k, v in out.items() if v}
