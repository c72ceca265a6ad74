"""Finite measure spaces, discretized L_p vectors and the Mazur map.

For ``p >= 1`` the gauge of a vector is its norm ``(sum w_i |v_i|^p)^(1/p)``.
For ``0 < p < 1`` the space is not normable and the gauge is the p-th power
sum ``sum w_i |v_i|^p`` itself, which is a translation-invariant metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

NORM, DELTA = "norm", "delta_p"


def gauge_convention(p: float) -> str:
    """Which gauge :func:`lp_gauge` uses for exponent ``p``."""
    if p <= 0:
        raise InputError(f"exponent must be positive, got {p}")
    return NORM if p >= 1 else DELTA


@dataclass(frozen=True, eq=False)
class FiniteMeasureSpace:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InputError("weights must be a non-empty 1-d array")
        if not np.all(w > 0):
            raise InputError("atom weights must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int, total: float = 1.0) -> "FiniteMeasureSpace":
        return cls(np.full(n, total / n))

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def is_probability(self, tol: float = 1e-12) -> bool:
        return abs(self.total - 1.0) <= tol

    def __eq__(self, other):
        if not isinstance(other, FiniteMeasureSpace):
            return NotImplemented
        return self is other or (
            self.size == other.size and np.array_equal(self.weights, other.weights)
        )

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class LpVector:
    space: FiniteMeasureSpace
    values: np.ndarray
    p: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.space.size,):
            raise InputError(
                f"vector has shape {v.shape}, space has {self.space.size} atoms"
            )
        if not self.p > 0:
            raise InputError(f"exponent must be positive, got {self.p}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _check(self, other: "LpVector"):
        if self.space != other.space:
            raise InputError("vectors live on different measure spaces")
        if self.p != other.p:
            raise InputError(f"exponent mismatch: p={self.p} vs p={other.p}")

    def __add__(self, other: "LpVector") -> "LpVector":
        self._check(other)
        return LpVector(self.space, self.values + other.values, self.p)

    def __sub__(self, other: "LpVector") -> "LpVector":
        self._check(other)
        return LpVector(self.space, self.values - other.values, self.p)

    def __neg__(self):
        return LpVector(self.space, -self.values, self.p)

    def scale(self, c: float) -> "LpVector":
        return LpVector(self.space, c * self.values, self.p)

    def with_p(self, p: float) -> "LpVector":
        return LpVector(self.space, self.values, p)

    def to_json(self) -> dict:
        return {
            "weights": self.space.weights.tolist(),
            "values": self.values.tolist(),
            "p": self.p,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LpVector":
        try:
            return cls(FiniteMeasureSpace(data["weights"]), data["values"], float(data["p"]))
        except KeyError as exc:
            raise InputError(f"LpVector JSON is missing {exc}") from None


def power_sum(weights: np.ndarray, values: np.ndarray, p: float) -> float:
    """``sum w_i |v_i|^p``; the p-th power of the norm, or the gauge itself for p < 1."""
    return float(np.dot(weights, np.abs(values) ** p))


def lp_gauge(v: LpVector) -> float:
    s = power_sum(v.space.weights, v.values, v.p)
    return s ** (1.0 / v.p) if v.p >= 1 else s


def gauge_report(v: LpVector) -> dict:
    return {"value": lp_gauge(v), "convention": gauge_convention(v.p), "p": v.p}


def inner_product(f: LpVector, g: LpVector) -> float:
    f._check(g)
    if f.p != 2 or g.p != 2:
        raise InputError("inner products are defined for p = 2 vectors only")
    return float(np.dot(f.space.weights, f.values * g.values))


def mazur_values(values: np.ndarray, p_from: float, p_to: float) -> np.ndarray:
    return np.sign(values) * np.abs(values) ** (p_from / p_to)


def mazur_map(v: LpVector, p_from: float, p_to: float) -> LpVector:
    """Send ``v`` to ``|v|^(p_from/p_to) sign(v)`` in L_{p_to}.

    Preserves ``sum w|.|^p`` across exponents, so it maps unit spheres onto
    unit spheres, and commutes with any weight-preserving atom permutation.
    """
    if p_from <= 0 or p_to <= 0:
        raise InputError("Mazur exponents must be positive")
    if p_from == p_to:
        return v.with_p(p_to)
    return LpVector(v.space, mazur_values(v.values, p_from, p_to), p_to)


def _unit_sphere_sample(rng, space, p, k):
    x = rng.standard_normal((k, space.size))
    sums = (space.weights * np.abs(x) ** p).sum(axis=1)
    return x / sums[:, None] ** (1.0 / p)


def mazur_modulus_estimate(
    p_from: float,
    p_to: float,
    sample_count: int,
    seed: int,
    atoms: int = 32,
    mazur=mazur_values,
) -> dict:
    """Empirical modulus of continuity of the Mazur map on the unit sphere.

    Pairs ``(u, v)`` are drawn on the unit sphere of L_{p_from}(uniform
    probability on ``atoms`` atoms); ``v`` is a perturbation of ``u`` at a
    log-uniform scale so input distances cover several decades. Distances
    use :func:`lp_gauge` conventions. Returns the raw pairs sorted by input
    distance and the running-max envelope.
    """
    if sample_count < 1:
        raise InputError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    space = FiniteMeasureSpace.uniform(atoms)
    u = _unit_sphere_sample(rng, space, p_from, sample_count)
    scales = 10.0 ** rng.uniform(-4, 0.5, size=sample_count)
    v = u + scales[:, None] * rng.standard_normal(u.shape)
    v /= ((space.weights * np.abs(v) ** p_from).sum(axis=1) ** (1.0 / p_from))[:, None]

    def dist(a, b, p):
        s = (space.weights * np.abs(a - b) ** p).sum(axis=1)
        return s ** (1.0 / p) if p >= 1 else s

    d_in = dist(u, v, p_from)
    d_out = dist(mazur(u, p_from, p_to), mazur(v, p_from, p_to), p_to)
    order = np.argsort(d_in, kind="stable")
    d_in, d_out = d_in[order], d_out[order]
    return {
        "p_from": p_from,
        "p_to": p_to,
        "atoms": atoms,
        "sample_count": sample_count,
        "seed": seed,
        "input_dist": d_in,
        "output_dist": d_out,
        "envelope": np.maximum.accumulate(d_out),
    }
