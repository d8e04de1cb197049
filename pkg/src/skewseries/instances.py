"""Built-in instances and the finite group-algebra oracle for Iwasawa quotients."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from .ringcore import RingError, is_prime, make_ring
from .skewalg import SkewData, SkewError, SkewSeries, validate_skew

BUILTINS = ("TRIV", "PX", "PXN", "IWA", "ZPT", "SWAP")


@dataclass
class InstanceSpec:
    ring: dict
    sigma: object = "id"
    delta: object = "zero"
    t_precision: int = 4
    seed: int = 1
    name: str | None = None
    iwasawa: dict | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceSpec":
        known = {k: d[k] for k in ("ring", "sigma", "delta", "t_precision", "seed", "name", "iwasawa") if k in d}
        if "ring" not in known:
            raise RingError("instance spec needs a 'ring' entry")
        return cls(**known)

    @classmethod
    def from_json(cls, text: str) -> "InstanceSpec":
        return cls.from_dict(json.loads(text))


@dataclass
class Instance:
    name: str
    spec: InstanceSpec
    skew: SkewData
    oracle: "SemidirectOracle | None" = None
    notes: list[str] = field(default_factory=list)

    @property
    def ring(self):
        return self.skew.base

    @property
    def t_precision(self) -> int:
        return self.spec.t_precision


class SemidirectOracle:
    """(Z/p)[C_{p^a} x| C_{p^b}] with gamma h gamma^-1 = h^c, as dense arrays.

    An element is an array ``x[i, j]`` = coefficient of h^i gamma^j.
    """

    def __init__(self, p: int, h_order: int, gamma_order: int, c: int):
        self.p, self.h_order, self.gamma_order, self.c = p, h_order, gamma_order, c
        self.conj = [pow(c, j, h_order) for j in range(gamma_order)]

    def zero(self) -> np.ndarray:
        return np.zeros((self.h_order, self.gamma_order), dtype=np.int64)

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        # (h^i g^j)(h^k g^l) = h^(i + c^j k) g^(j + l)
        out = self.zero()
        H, G = self.h_order, self.gamma_order
        for i, j in zip(*np.nonzero(x)):
            for k, l in zip(*np.nonzero(y)):
                out[(i + self.conj[j] * k) % H, (j + l) % G] += x[i, j] * y[k, l]
        return out % self.p

    def t_power(self, k: int) -> np.ndarray:
        """(gamma - 1)^k."""
        out = self.zero()
        for i in range(k + 1):
            out[0, i % self.gamma_order] += comb(k, i) * (-1) ** (k - i)
        return out % self.p

    def coefficient(self, a) -> np.ndarray:
        out = self.zero()
        out[:, 0] = np.asarray(a) % self.p
        return out

    def from_series(self, x: SkewSeries) -> np.ndarray:
        """Image of a left- or right-form series under t -> gamma - 1."""
        out = self.zero()
        for j, a in enumerate(x.coeffs):
            if not a.any():
                continue
            if x.form == "left":
                term = self.mul(self.coefficient(a), self.t_power(j))
            else:
                term = self.mul(self.t_power(j), self.coefficient(a))
            out = (out + term) % self.p
        return out


def iwasawa_instance(p: int, h_exp: int, gamma_exp: int, c: int, seed: int = 1) -> Instance:
    """Finite quotient (Z/p)[C_{p^a} x| C_{p^b}] of an Iwasawa algebra, as R[[t; sigma, sigma - id]]."""
    if not is_prime(p) or p == 2:
        raise RingError("iwasawa_instance needs an odd prime")
    H, G = p ** h_exp, p ** gamma_exp
    if pow(c, G, H) != 1 or c % p == 0:
        raise RingError(f"conjugation exponent {c} invalid: {c}^{G} = {pow(c, G, H)} mod {H}, expected 1")
    spec = InstanceSpec(ring={"kind": "group_algebra", "p": p, "p_precision": 1, "group": f"cyclic:{H}"},
                        sigma={"h": f"h^{c}"}, delta="sigma_minus_id", t_precision=G, seed=seed,
                        iwasawa={"p": p, "h_exp": h_exp, "gamma_exp": gamma_exp, "c": c})
    inst = instance_from_spec(spec)
    inst.oracle = SemidirectOracle(p, H, G, c)
    if not inst.skew.t_power_is_normal(G):
        raise SkewError(f"t^{G} does not span a two-sided ideal")
    inst.notes.append(f"t^{G} = gamma^{G} - 1 = 0 in characteristic {p}")
    return inst


def instance_from_spec(spec: InstanceSpec, name: str | None = None) -> Instance:
    R = make_ring(spec.ring)
    skew = validate_skew(R, spec.sigma, spec.delta)
    return Instance(name or spec.name or "custom", spec, skew)


def builtin_instance(name: str, **overrides) -> Instance:
    name = name.upper()
    if name == "TRIV":
        spec = InstanceSpec({"kind": "modular", "p": 3, "p_precision": 1}, "id", "zero", 4)
    elif name in ("PX", "PXN"):
        p, N, u, F = (3, 9, 2, "X^3") if name == "PX" else (5, 12, 2, "X^4")
        u = int(overrides.get("u", u))
        if u % p in (0, 1):
            raise RingError(f"u = {u} must lie in F_{p} minus {{0, 1}}")
        spec = InstanceSpec({"kind": "truncated_poly", "p": p, "p_precision": 1, "N": N},
                            {"X": f"{u}*X"}, {"X": overrides.get("F", F)}, 8)
    elif name == "IWA":
        inst = iwasawa_instance(3, 2, 1, int(overrides.get("c", 4)))
        inst.name = "IWA"
        inst.spec.name = "IWA"
        return inst
    elif name == "ZPT":
        n = int(overrides.get("p_precision", 5))
        spec = InstanceSpec({"kind": "modular", "p": 3, "p_precision": n}, "id", "zero",
                            int(overrides.get("t_precision", 6)))
    elif name == "SWAP":
        spec = InstanceSpec({"kind": "product", "p": 3, "p_precision": 1, "copies": 2},
                            "swap", "sigma_minus_id", 1)
    else:
        raise RingError(f"unknown built-in instance {name!r}; choose from {', '.join(BUILTINS)}")
    spec.name = name
    if "t_precision" in overrides:
        spec.t_precision = int(overrides["t_precision"])
    return instance_from_spec(spec, name)


def load_instance(ref: str, **overrides) -> Instance:
    """A built-in name or a path to a JSON instance document."""
    if ref.upper() in BUILTINS:
        return builtin_instance(ref, **overrides)
    with open(ref) as fh:
        spec = InstanceSpec.from_json(fh.read())
    if spec.iwasawa:
        w = spec.iwasawa
        inst = iwasawa_instance(w["p"], w["h_exp"], w["gamma_exp"], w["c"], spec.seed)
        inst.spec = spec
        return inst
    return instance_from_spec(spec)
