"""Conditionally negative definite kernels.

A symmetric kernel ``K`` is CND when ``c^T K c <= 0`` for every coefficient
vector ``c`` summing to zero. :func:`cnd_test` decides this exactly (up to
eigensolver accuracy) by diagonalizing ``K`` restricted to the mean-zero
subspace, and always returns a certifying witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .errors import InputError
from .groups import Ball, GroupElement, GroupSpec
from .measure import power_sum

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Kernel:
    labels: tuple
    matrix: np.ndarray
    distance_type: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        n = len(self.labels)
        if m.shape != (n, n):
            raise InputError(f"kernel matrix shape {m.shape} does not match {n} labels")
        if not np.all(np.isfinite(m)):
            raise InputError("kernel matrix has non-finite entries")
        scale = 1.0 + (np.abs(m).max() if n else 0.0)
        asym = np.abs(m - m.T).max() if n else 0.0
        if asym > SYMMETRY_TOL * scale:
            raise InputError(f"kernel is not symmetric (max asymmetry {asym:.3e})")
        if self.distance_type and n and np.abs(np.diag(m)).max() > SYMMETRY_TOL * scale:
            raise InputError("distance-type kernel has a non-zero diagonal")
        m.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def scale(self) -> float:
        return 1.0 + (float(np.abs(self.matrix).max()) if self.size else 0.0)

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "matrix": self.matrix.tolist()}

    @classmethod
    def from_json(cls, data: dict, distance_type: bool = False) -> "Kernel":
        try:
            matrix = data["matrix"]
        except KeyError:
            raise InputError("kernel JSON needs a 'matrix' field") from None
        labels = data.get("labels") or [str(i) for i in range(len(matrix))]
        return cls(tuple(labels), np.asarray(matrix, dtype=float), distance_type)


@dataclass(frozen=True)
class CndReport:
    verdict: bool
    extremal: float
    witness: np.ndarray = field(repr=False)
    tol: float
    threshold: float
    residual: float

    @property
    def label(self) -> str:
        return "CND" if self.verdict else "not-CND"

    def to_json(self) -> dict:
        return {
            "verdict": self.label,
            "extremal_value": self.extremal,
            "witness": self.witness.tolist(),
            "tolerance": self.tol,
            "threshold": self.threshold,
            "eigensolver_residual": self.residual,
        }


def mean_zero_basis(n: int) -> np.ndarray:
    """Orthonormal basis of {c : sum c = 0} as the columns of an n x (n-1) Helmert matrix."""
    Q = np.zeros((n, max(n - 1, 0)))
    for k in range(1, n):
        Q[:k, k - 1] = 1.0
        Q[k, k - 1] = -k
        Q[:, k - 1] /= math.sqrt(k * (k + 1))
    return Q


def _fix_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def cnd_test(K: Kernel, tol: float = defaults.CND_TOL) -> CndReport:
    """Largest value of ``c^T K c`` over unit mean-zero ``c``, with its maximizer.

    The verdict is CND iff that value is at most ``tol * (1 + max|K|)``.
    """
    n = K.size
    threshold = tol * K.scale
    if n < 2:
        # The mean-zero subspace is trivial; the form is identically zero.
        return CndReport(True, 0.0, np.zeros(n), tol, threshold, 0.0)
    Q = mean_zero_basis(n)
    A = Q.T @ K.matrix @ Q
    A = 0.5 * (A + A.T)
    vals, vecs = np.linalg.eigh(A)
    lam = float(vals[-1])
    y = vecs[:, -1]
    residual = float(np.linalg.norm(A @ y - lam * y))
    c = Q @ y
    c -= c.mean()
    c = _fix_sign(c / np.linalg.norm(c))
    extremal = float(c @ K.matrix @ c)
    return CndReport(extremal <= threshold, extremal, c, tol, threshold, residual)


def min_eigenvalue(matrix: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (matrix + matrix.T))[0])


@dataclass(frozen=True)
class CndFunction:
    """A symmetric real function on (a ball of) a group."""

    spec: GroupSpec
    values: dict

    def __post_init__(self):
        for g, v in self.values.items():
            ginv = g.inverse()
            if ginv in self.values and abs(self.values[ginv] - v) > SYMMETRY_TOL * (1 + abs(v)):
                raise InputError(f"psi({g.label}) != psi of its inverse")
        e = self.spec.identity()
        if e in self.values and self.values[e] < -SYMMETRY_TOL:
            raise InputError("psi(e) must be >= 0")

    def __call__(self, g: GroupElement) -> float:
        try:
            return self.values[g]
        except KeyError:
            raise InputError(f"psi is not defined at {g.label}") from None

    @classmethod
    def from_ball(cls, ball: Ball, fn) -> "CndFunction":
        return cls(ball.spec, {g: float(fn(g)) for g in ball})


def function_to_kernel(psi: CndFunction, ball: Ball) -> Kernel:
    """``K(g, h) = psi(g h^-1)`` over the elements of ``ball``."""
    elems = ball.elements
    inverses = [h.inverse() for h in elems]
    n = len(elems)
    M = np.empty((n, n))
    for i, g in enumerate(elems):
        for j in range(i, n):
            M[i, j] = M[j, i] = psi(g * inverses[j])
    return Kernel(tuple(ball.labels), M)


def power_transform(K: Kernel, alpha: float, allow_identity: bool = False) -> Kernel:
    """Entrywise ``K^alpha`` for ``0 < alpha < 1`` on a nonnegative kernel."""
    if allow_identity and alpha == 1:
        return K
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    if K.size and K.matrix.min() < 0:
        raise InputError("power transform needs an entrywise nonnegative kernel")
    return Kernel(K.labels, K.matrix**alpha, K.distance_type)


def exp_kernel_test(K: Kernel, t_grid, tol: float = defaults.CND_TOL) -> list[dict]:
    """For each t: ``1 - exp(-tK)`` must be CND and ``exp(-tK)`` PSD."""
    rows = []
    for t in t_grid:
        if t <= 0:
            raise InputError(f"t must be positive, got {t}")
        E = np.exp(-t * K.matrix)
        rep = cnd_test(Kernel(K.labels, 1.0 - E), tol)
        lam_min = min_eigenvalue(E)
        psd_floor = -tol * (1.0 + float(np.abs(E).max()))
        rows.append(
            {
                "t": float(t),
                "one_minus_exp": rep,
                "exp_min_eigenvalue": lam_min,
                "psd_floor": psd_floor,
                "psd": lam_min >= psd_floor,
                "passed": rep.verdict and lam_min >= psd_floor,
            }
        )
    return rows


def frullani_constant(alpha: float) -> float:
    """``c_alpha = alpha / Gamma(1 - alpha)``, normalizing the Frullani integral to x^alpha."""
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha / math.gamma(1.0 - alpha)


@dataclass(frozen=True)
class QuadConfig:
    eps: float = defaults.FRULLANI_EPS
    horizon: float = defaults.FRULLANI_HORIZON
    nodes: int = defaults.FRULLANI_NODES


def frullani_integral(x: float, alpha: float, quad: QuadConfig = QuadConfig()) -> float:
    """``int_0^inf (1 - e^{-tx}) t^{-alpha-1} dt`` by quadrature plus end corrections.

    The bulk ``[eps, T]`` with ``T = horizon / x`` is integrated by composite
    Simpson in ``u = log t``, where the integrand ``(1 - e^{-tx}) t^{-alpha}``
    is smooth. The head uses ``1 - e^{-tx} ~ tx - (tx)^2/2`` on ``[0, eps]``,
    the tail drops ``e^{-tx}`` on ``[T, inf)``.
    """
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    if not x > 0:
        raise InputError(f"x must be positive, got {x}")
    eps, T = quad.eps, quad.horizon / x
    if not eps < T:
        raise InputError("quadrature cut points need eps < horizon / x")
    m = quad.nodes + (quad.nodes % 2 == 0)  # Simpson needs an odd node count
    u = np.linspace(math.log(eps), math.log(T), m)
    t = np.exp(u)
    f = -np.expm1(-t * x) * t ** (-alpha)
    h = u[1] - u[0]
    bulk = h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())
    head = x * eps ** (1 - alpha) / (1 - alpha) - x * x * eps ** (2 - alpha) / (2 * (2 - alpha))
    tail = T ** (-alpha) / alpha
    return float(bulk + head + tail)


def frullani_power(x: float, alpha: float, quad: QuadConfig = QuadConfig()) -> float:
    """``x^alpha`` recovered as ``c_alpha`` times the Frullani-type integral."""
    return frullani_constant(alpha) * frullani_integral(x, alpha, quad)


def random_cnd_kernel(n: int, dim: int, seed: int) -> Kernel:
    """Squared Euclidean distances of ``n`` seeded standard-normal points in R^dim."""
    if n < 1 or dim < 1:
        raise InputError("n and dim must be >= 1")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, dim))
    D = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=-1)
    return Kernel(tuple(str(i) for i in range(n)), D, distance_type=True)


def lp_distance_kernel(points: np.ndarray, weights: np.ndarray, p: float) -> Kernel:
    """``K(x, y) = sum_i w_i |x_i - y_i|^p``, the p-th power distance in L_p(w).

    For p >= 1 this is ``||x - y||_p^p``; for p < 1 it is the gauge itself.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            M[i, j] = M[j, i] = power_sum(weights, points[i] - points[j], p)
    return Kernel(tuple(str(i) for i in range(n)), M, distance_type=True)
