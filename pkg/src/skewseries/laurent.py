"""Skew Laurent series R((t; sigma)) with delta = 0.

A series stores its valuation v and the coefficients of degrees v, v+1, ...
up to an absolute precision (exclusive); ``exact`` marks finite Laurent
polynomials, whose precision is unbounded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ringcore import Submodule
from .skewalg import SkewData, SkewError, SkewSeries, to_form, validate_skew
from .smodules import ChainMapPair, ModuleError, SModule, _inverse_on, block_relations, check_pair, \
    make_smodule, map_image, map_kernel, t_adic_intersection

BIG = 10 ** 9


def require_skew_laurent(S: SkewData) -> None:
    if not S.delta.is_zero():
        raise SkewError("skew Laurent series need delta = 0")


def without_derivation(S: SkewData) -> SkewData:
    """The same sigma with delta forced to 0."""
    return validate_skew(S.base, {"matrix": S.sigma.matrix.tolist()}, "zero")


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    ring: SkewData
    valuation: int
    coeffs: np.ndarray
    precision: float
    form: str = "left"

    @property
    def exact(self) -> bool:
        return self.precision == float("inf")

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        return laurent_arith("add", self, other)

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.ring, self.valuation, (-self.coeffs) % self.ring.q, self.precision, self.form)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        return laurent_arith("mul", self, other)

    def coefficient(self, k: int) -> np.ndarray:
        if k >= self.precision:
            raise SkewError(f"coefficient {k} lies beyond the precision {self.precision}")
        i = k - self.valuation
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return np.zeros(self.ring.base.rank, dtype=np.int64)

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def agrees(self, other: "LaurentSeries") -> bool:
        """Equal on every degree both operands know."""
        if self.form != other.form:
            return False
        top = min(self.precision, other.precision)
        lo = min(self.valuation, other.valuation)
        hi = max(self.valuation + len(self.coeffs), other.valuation + len(other.coeffs))
        hi = int(min(hi, top))
        return all(np.array_equal(self.coefficient(k), other.coefficient(k)) for k in range(lo, hi))

    def to_dict(self) -> dict:
        prec = "exact" if self.exact else int(self.precision)
        return {"valuation": self.valuation, "coeffs": self.coeffs.tolist(), "form": self.form,
                "precision": prec}

    def __repr__(self) -> str:
        R = self.ring.base
        terms = []
        for i, a in enumerate(self.coeffs):
            if a.any():
                k = self.valuation + i
                tp = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
                c = R.format(a)
                terms.append(f"({c}){tp}" if self.form == "left" else f"{tp}({c})")
        tail = "" if self.exact else f" + O(t^{int(self.precision)})"
        return (" + ".join(terms) or "0") + tail


def laurent(S: SkewData, coeffs, valuation: int = 0, precision=None, form: str = "left") -> LaurentSeries:
    """Series sum_i coeffs[i] t^(valuation + i); precision None means exact."""
    require_skew_laurent(S)
    R = S.base
    arr = np.array([np.asarray(c, dtype=np.int64) % R.q for c in coeffs], dtype=np.int64).reshape(-1, R.rank)
    prec = float("inf") if precision is None else precision
    return _normalize(LaurentSeries(S, valuation, arr, prec, form))


def _normalize(x: LaurentSeries) -> LaurentSeries:
    c = x.coeffs
    if not x.exact:
        c = c[:max(0, int(x.precision) - x.valuation)]
    nz = np.flatnonzero(c.any(axis=1))
    if len(nz) == 0:
        v = int(x.precision) if not x.exact else 0
        return LaurentSeries(x.ring, v, np.zeros((0, x.ring.base.rank), dtype=np.int64), x.precision, x.form)
    lo, hi = nz[0], nz[-1] + 1
    if not x.exact:
        hi = len(c)
    return LaurentSeries(x.ring, x.valuation + int(lo), c[lo:hi].copy(), x.precision, x.form)


def t_power(S: SkewData, k: int, form: str = "left") -> LaurentSeries:
    return laurent(S, [S.base.one], k, None, form)


def invert_t(S: SkewData, form: str = "left") -> LaurentSeries:
    return t_power(S, -1, form)


def to_left(x: LaurentSeries) -> LaurentSeries:
    """sum t^i b_i = sum sigma^i(b_i) t^i."""
    if x.form == "left":
        return x
    S = x.ring
    c = np.array([S.sigma_power(x.valuation + i)(b) for i, b in enumerate(x.coeffs)],
                 dtype=np.int64).reshape(-1, S.base.rank)
    return LaurentSeries(S, x.valuation, c, x.precision, "left")


def to_right(x: LaurentSeries) -> LaurentSeries:
    """sum a_i t^i = sum t^i sigma^-i(a_i)."""
    if x.form == "right":
        return x
    S = x.ring
    c = np.array([S.sigma_power(-(x.valuation + i))(a) for i, a in enumerate(x.coeffs)],
                 dtype=np.int64).reshape(-1, S.base.rank)
    return LaurentSeries(S, x.valuation, c, x.precision, "right")


def laurent_to_form(x: LaurentSeries, form: str) -> LaurentSeries:
    return to_left(x) if form == "left" else to_right(x)


def laurent_arith(op: str, x: LaurentSeries, y: LaurentSeries | None = None) -> LaurentSeries:
    """add | mul | invert_t (x ignored except for its ring)."""
    S = x.ring
    require_skew_laurent(S)
    if op == "invert_t":
        return invert_t(S, x.form)
    if y is None or y.ring is not S:
        raise SkewError("binary operation needs two series over the same skew data")
    form = x.form
    a, b = to_left(x), to_left(y)
    R = S.base
    if op == "add":
        prec = min(a.precision, b.precision)
        lo = min(a.valuation, b.valuation)
        hi = max(a.valuation + len(a.coeffs), b.valuation + len(b.coeffs))
        if prec != float("inf"):
            hi = int(prec)
        out = np.zeros((max(0, hi - lo), R.rank), dtype=np.int64)
        for s in (a, b):
            for i, c in enumerate(s.coeffs):
                k = s.valuation + i - lo
                if 0 <= k < len(out):
                    out[k] += c
        res = _normalize(LaurentSeries(S, lo, out % R.q, prec, "left"))
        return laurent_to_form(res, form)
    if op != "mul":
        raise SkewError(f"unknown operation {op!r}")
    # (a_i t^i)(b_j t^j) = a_i sigma^i(b_j) t^(i+j)
    prec = float("inf")
    if not b.exact:
        prec = min(prec, a.valuation + b.precision) if len(a.coeffs) else prec
    if not a.exact:
        prec = min(prec, b.valuation + a.precision) if len(b.coeffs) else prec
    if not a.exact and not len(b.coeffs):
        prec = min(prec, b.precision + a.valuation)
    if not b.exact and not len(a.coeffs):
        prec = min(prec, a.precision + b.valuation)
    lo = a.valuation + b.valuation
    hi = a.valuation + len(a.coeffs) + b.valuation + len(b.coeffs)
    if prec != float("inf"):
        hi = min(hi, int(prec))
    out = np.zeros((max(0, hi - lo), R.rank), dtype=np.int64)
    for i, ai in enumerate(a.coeffs):
        if not ai.any():
            continue
        La = R.left_matrix(ai)
        sig = S.sigma_power(a.valuation + i).matrix
        for j, bj in enumerate(b.coeffs):
            k = i + j
            if k >= len(out):
                break
            if bj.any():
                out[k] = (out[k] + (bj @ sig % R.q) @ La) % R.q
    res = _normalize(LaurentSeries(S, lo, out, prec, "left"))
    return laurent_to_form(res, form)


def localize(x: SkewSeries) -> LaurentSeries:
    """The embedding S -> S_t."""
    S = x.ring
    require_skew_laurent(S)
    y = to_form(x, "left")
    return laurent(S, list(y.coeffs), 0, y.t_precision, "left")


# ---------------------------------------------------------------------------
# modules over the Laurent ring

@dataclass
class LaurentModuleReport:
    module_id: str
    window: tuple[int, int]
    exact_sequence: bool
    dims: dict
    ext_shift: dict | None

    @property
    def ok(self) -> bool:
        return self.exact_sequence and (self.ext_shift is None or self.ext_shift["ok"])

    def to_dict(self) -> dict:
        return {"module_id": self.module_id, "window": list(self.window),
                "exact_sequence": self.exact_sequence, "dims": self.dims,
                "ext_shift": self.ext_shift, "ok": self.ok}


def _t_inverse(M: SModule) -> np.ndarray:
    K = M.relations
    full = Submodule.full(K.p, K.n, K.ambient)
    if map_image(M.t_matrix, K) != full or map_kernel(M.t_matrix, K, K) != K:
        raise ModuleError(f"{M.name}: t does not act invertibly, so this is not a module over the Laurent ring")
    return _inverse_on(M.t_matrix, K)


def laurent_boundary_maps(M: SModule, W: int) -> ChainMapPair:
    """Untwisted sequence on the window [-W, W): kappa'(m_i) = (t^-1 m_{i-1} - m_i), mu = sum t^i m_i."""
    Tinv = _t_inverse(M)
    g, q = M.gens, M.q
    L = 2 * W
    kappa = np.zeros((g * L, g * (L + 1)), dtype=np.int64)
    for s in range(L):
        kappa[s * g:(s + 1) * g, s * g:(s + 1) * g] -= np.eye(g, dtype=np.int64)
        kappa[s * g:(s + 1) * g, (s + 1) * g:(s + 2) * g] += Tinv
    mu = np.zeros((g * (L + 1), g), dtype=np.int64)
    for s in range(L + 1):
        e = s - W
        base = M.t_matrix if e >= 0 else Tinv
        P = np.eye(g, dtype=np.int64)
        for _ in range(abs(e)):
            P = P @ base % q
        mu[s * g:(s + 1) * g] = P
    K = M.relations
    return ChainMapPair(kappa % q, mu % q, M.side, L, block_relations(K, L), block_relations(K, L + 1), K)


def laurent_module(S: SkewData, relations, r_action, t_matrix, name: str = "M") -> SModule:
    """A module over the Laurent ring: validated skew relation, t invertible (no separation check)."""
    require_skew_laurent(S)
    M = make_smodule(S, relations, r_action, t_matrix, "left", name, check_separated=False)
    _t_inverse(M)
    return M


def laurent_module_checks(M: SModule, W: int = 4, T: int | None = None, n: int | None = None) -> LaurentModuleReport:
    """Exactness of the window-truncated untwisted sequence and, when sigma = id, the Ext shift.

    For sigma = id the module is finite and killed by a power of (p, t - 1)
    exactly when t - 1 acts topologically nilpotently; Ext over the Laurent
    ring is then Ext over R[[u]], u = t - 1, by completing at the support.
    """
    from .homology import is_commutative_instance, verify_dimension_shift

    require_skew_laurent(M.base)
    report = check_pair(laurent_boundary_maps(M, W))
    shift = None
    if is_commutative_instance(M.base):
        u = (M.t_matrix - np.eye(M.gens, dtype=np.int64)) % M.q
        stable = t_adic_intersection(SModule(M.base, M.relations, M.r_action, u, M.side, M.name))
        if stable != M.relations:
            raise ModuleError("t - 1 is not topologically nilpotent; the Ext comparison needs a unipotent t")
        Mu = make_smodule(M.base, M.relations.basis if not M.relations.is_zero() else [],
                          M.r_action, u, "left", M.name)
        rep = verify_dimension_shift(Mu, T, n)
        shift = {"ok": rep.ok, "j_R": rep.j_R, "j_T": rep.j_S,
                 "ext_T": [r.to_dict() for r in rep.reports_S],
                 "ext_R": [r.to_dict() for r in rep.reports_R]}
    return LaurentModuleReport(M.name, (-W, W), report.exact, report.dims, shift)
