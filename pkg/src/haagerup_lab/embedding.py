"""Euclidean realizations of CND kernels and escape profiles of CND functions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .errors import InputError, PropertyViolation
from .groups import ball as make_ball
from .kernels import CndFunction, Kernel, cnd_test


class CndRejection(PropertyViolation):
    """Raised by :func:`gns_embed` when the kernel fails the CND test."""


class EmbeddingInconsistency(PropertyViolation):
    """The centered Gram matrix has an eigenvalue below the allowed floor."""


@dataclass(frozen=True)
class HilbertEmbedding:
    labels: tuple
    coordinates: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    residual: float

    @property
    def dimension(self) -> int:
        return self.coordinates.shape[1]

    def squared_distances(self) -> np.ndarray:
        X = self.coordinates
        sq = (X**2).sum(axis=1)
        return np.maximum(sq[:, None] + sq[None, :] - 2 * X @ X.T, 0.0)

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "coordinates": self.coordinates.tolist(),
            "residual": self.residual,
            "dimension": self.dimension,
        }


def gns_embed(K: Kernel, tol: float = defaults.CND_TOL) -> HilbertEmbedding:
    """Points ``x_g`` with ``||x_g - x_h||^2 = K(g, h)``.

    Classical scaling: diagonalize ``G = -P K P / 2`` with ``P`` the centering
    projector and keep the eigenvalues above ``tol * (1 + max|K|)``.
    """
    if K.size and (K.matrix.min() < 0 or np.abs(np.diag(K.matrix)).max() > tol * K.scale):
        raise InputError("embedding needs a nonnegative kernel with zero diagonal")
    report = cnd_test(K, tol)
    if not report.verdict:
        raise CndRejection(
            f"kernel is not CND: extremal value {report.extremal:.6g}", witness=report
        )
    n = K.size
    cutoff = tol * K.scale
    P = np.eye(n) - 1.0 / n
    G = -0.5 * P @ K.matrix @ P
    vals, vecs = np.linalg.eigh(0.5 * (G + G.T))
    if n and vals[0] < -cutoff:
        raise EmbeddingInconsistency(
            f"Gram eigenvalue {vals[0]:.3e} below -{cutoff:.3e}", witness=vecs[:, 0]
        )
    order = np.argsort(vals, kind="stable")[::-1]
    vals, vecs = vals[order], vecs[:, order]
    keep = vals > cutoff
    vals, vecs = vals[keep], vecs[:, keep]
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            vecs[:, j] = -col
    X = vecs * np.sqrt(vals)
    emb = HilbertEmbedding(K.labels, X, vals, 0.0)
    residual = float(np.abs(emb.squared_distances() - K.matrix).max()) if n else 0.0
    return HilbertEmbedding(K.labels, X, vals, residual)


def escape_profile(psi: CndFunction, radii) -> list[tuple[int, float]]:
    """Minimum of ``psi`` over each sphere S(e, r)."""
    radii = sorted(set(int(r) for r in radii))
    if not radii:
        return []
    b = make_ball(psi.spec, radii[-1])
    rows = []
    for r in radii:
        sphere = b.sphere(r)
        if not sphere:
            raise InputError(f"sphere of radius {r} is empty in {psi.spec}")
        rows.append((r, min(psi(g) for g in sphere)))
    return rows


def is_escaping(profile) -> bool:
    """Finite-window proxy for ``psi -> infinity``: strictly increasing minima."""
    vals = [v for _, v in profile]
    return all(b > a for a, b in zip(vals, vals[1:]))

