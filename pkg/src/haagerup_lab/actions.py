"""Affine isometric actions ``Psi(g)v = pi(g)v + gamma(g)`` on finite L_p spaces.

Linear parts are weight-preserving signed permutations of atoms, so they are
isometries of every L_p(mu) at once. Cocycles are stored on a ball of the
group; checks only use products that stay inside the stored domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import defaults
from .errors import InputError, ResourceError
from .groups import Ball, GroupElement, GroupSpec, ball as make_ball
from .kernels import CndFunction, CndReport, cnd_test, function_to_kernel
from .measure import FiniteMeasureSpace, gauge_convention, power_sum


@dataclass(frozen=True, eq=False)
class SignedPermutation:
    """Atom ``i`` is sent to atom ``perm[i]`` and multiplied by ``signs[i]``."""

    perm: np.ndarray
    signs: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(np.arange(n), np.ones(n))

    @classmethod
    def unsigned(cls, perm) -> "SignedPermutation":
        perm = np.asarray(perm, dtype=np.int64)
        return cls(perm, np.ones(perm.size))

    def apply(self, values: np.ndarray) -> np.ndarray:
        out = np.empty_like(values, dtype=float)
        out[self.perm] = self.signs * values
        return out

    def compose(self, other: "SignedPermutation") -> "SignedPermutation":
        """``self o other``: apply ``other`` first."""
        return SignedPermutation(self.perm[other.perm], other.signs * self.signs[other.perm])

    def inverse(self) -> "SignedPermutation":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return SignedPermutation(inv, self.signs[inv])

    def __eq__(self, other):
        return np.array_equal(self.perm, other.perm) and np.array_equal(self.signs, other.signs)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LinearRep:
    spec: GroupSpec
    carrier: FiniteMeasureSpace
    assignment: dict

    def __getitem__(self, g: GroupElement) -> SignedPermutation:
        try:
            return self.assignment[g]
        except KeyError:
            raise InputError(f"representation is not assigned at {g.label}") from None

    def apply(self, g: GroupElement, values: np.ndarray) -> np.ndarray:
        return self[g].apply(values)

    def covers(self, b: Ball) -> None:
        for g in b:
            if g not in self.assignment:
                raise InputError(f"representation is not assigned at {g.label}")


@dataclass(frozen=True, eq=False)
class AffineAction:
    rep: LinearRep
    cocycle: dict
    p: float

    @property
    def spec(self) -> GroupSpec:
        return self.rep.spec

    @property
    def weights(self) -> np.ndarray:
        return self.rep.carrier.weights

    def gamma(self, g: GroupElement) -> np.ndarray:
        try:
            return self.cocycle[g]
        except KeyError:
            raise InputError(f"cocycle is not defined at {g.label}") from None

    def act(self, g: GroupElement, v: np.ndarray) -> np.ndarray:
        return self.rep.apply(g, v) + self.gamma(g)

    def gauge(self, values: np.ndarray) -> float:
        return _gauge(self.weights, values, self.p)

    def delta(self, g: GroupElement) -> float:
        """``sum w |gamma(g)|^p``: the p-th power of the norm, or the gauge when p < 1."""
        return power_sum(self.weights, self.gamma(g), self.p)


def _gauge(weights, values, p):
    s = power_sum(weights, values, p)
    return s ** (1.0 / p) if p >= 1 else s


def verify_isometry(
    rep: LinearRep,
    p: float,
    b: Ball,
    tol: float = defaults.ISOMETRY_TOL,
    seed: int = defaults.DEFAULT_SEED,
    n_vectors: int = 4,
) -> dict:
    """Check gauge preservation on seeded random vectors and the homomorphism law.

    Gauge deviations are measured relative to ``1 + gauge(v)``.
    """
    rep.covers(b)
    w = rep.carrier.weights
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((n_vectors, rep.carrier.size))
    worst, worst_g, worst_k = 0.0, None, None
    for g in b:
        op = rep[g]
        if op.perm.size != w.size or not np.array_equal(np.sort(op.perm), np.arange(w.size)):
            return _fail_isometry(p, seed, tol, g, None, "not a permutation of the carrier")
        for k, v in enumerate(vecs):
            a, c = _gauge(w, v, p), _gauge(w, op.apply(v), p)
            dev = abs(c - a) / (1.0 + a)
            if dev > worst:
                worst, worst_g, worst_k = dev, g, k
    hom_failure = None
    for g in b:
        for h in b:
            gh = g * h
            if gh in b and not rep[g].compose(rep[h]) == rep[gh]:
                hom_failure = (g.label, h.label)
                break
        if hom_failure:
            break
    passed = worst <= tol and hom_failure is None
    return {
        "check": "isometry",
        "passed": passed,
        "p": p,
        "seed": seed,
        "tol": tol,
        "max_deviation": worst,
        "worst_element": worst_g.label if worst_g is not None and worst > tol else None,
        "worst_vector": vecs[worst_k].tolist() if worst_k is not None and worst > tol else None,
        "homomorphism_failure": hom_failure,
    }


def _fail_isometry(p, seed, tol, g, k, reason):
    return {
        "check": "isometry",
        "passed": False,
        "p": p,
        "seed": seed,
        "tol": tol,
        "max_deviation": float("inf"),
        "worst_element": g.label,
        "worst_vector": k,
        "homomorphism_failure": None,
        "reason": reason,
    }


def verify_cocycle(action: AffineAction, b: Ball, tol: float = defaults.COCYCLE_TOL) -> dict:
    """Max over admissible pairs of ``gauge(gamma(gh) - pi(g)gamma(h) - gamma(g))``.

    A pair (g, h) is admissible when g, h and gh all lie in ``b``.
    """
    for g in b:
        action.gamma(g)
    action.rep.covers(b)
    worst, arg, pairs = 0.0, None, 0
    for g in b:
        gamma_g = action.gamma(g)
        op = action.rep[g]
        for h in b:
            gh = g * h
            if gh not in b:
                continue
            pairs += 1
            err = action.gauge(action.gamma(gh) - op.apply(action.gamma(h)) - gamma_g)
            if arg is None or err > worst:
                worst, arg = err, (g.label, h.label)
    return {
        "check": "cocycle",
        "passed": worst <= tol,
        "tol": tol,
        "max_defect": worst,
        "argmax": arg,
        "pairs": pairs,
        "convention": gauge_convention(action.p),
    }


@dataclass(frozen=True)
class PropernessProfile:
    radii: tuple
    minima: tuple
    convention: str

    def strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.minima, self.minima[1:]))

    def rows(self):
        return list(zip(self.radii, self.minima))


def profile_from_values(spec: GroupSpec, values, max_radius: int, convention: str) -> PropernessProfile:
    """Per-sphere minima for radii 1..max_radius of a function given on a ball."""
    b = make_ball(spec, max_radius)
    radii, minima = [], []
    for r in range(1, max_radius + 1):
        sphere = b.sphere(r)
        if not sphere:
            break
        radii.append(r)
        minima.append(min(values(g) for g in sphere))
    return PropernessProfile(tuple(radii), tuple(minima), convention)


def properness_profile(action: AffineAction, max_radius: int) -> PropernessProfile:
    """Minimum cocycle gauge over each sphere of radius 1..max_radius.

    Strictly increasing minima on this finite window stand in for the limit
    ``||gamma(g)|| -> infinity``; they do not prove it.
    """
    return profile_from_values(
        action.spec,
        lambda g: action.gauge(action.gamma(g)),
        max_radius,
        gauge_convention(action.p),
    )


def cnd_function_report(psi: CndFunction, b: Ball, tol: float = defaults.CND_TOL) -> CndReport:
    return cnd_test(function_to_kernel(psi, b), tol)


def haagerup_function(
    action: AffineAction, b: Ball, tol: float = defaults.CND_TOL
) -> tuple[CndFunction, CndReport]:
    """``psi(g) = ||gamma(g)||_p^p`` (the gauge itself for p < 1), with its CND test on ``b``.

    The kernel ``psi(g h^-1)`` reaches into the ball of radius ``2 * b.radius``,
    so the cocycle must be stored there.
    """
    if not 0 < action.p < 2:
        raise InputError(f"p must lie in (0, 2) for a CND cocycle function, got {action.p}")
    big = make_ball(b.spec, 2 * b.radius)
    psi = CndFunction(b.spec, {g: action.delta(g) for g in big})
    return psi, cnd_function_report(psi, b, tol)


# Fixtures


def identity_rep(spec: GroupSpec, carrier: FiniteMeasureSpace, b: Ball) -> LinearRep:
    op = SignedPermutation.identity(carrier.size)
    return LinearRep(spec, carrier, {g: op for g in b})


def cyclic_shift_rep(b: Ball, m: int, weights=None) -> LinearRep:
    """Z acting on m atoms by ``i -> i + k mod m``; uniform weights unless given."""
    spec = b.spec
    if len(spec.factors) != 1 or str(spec) != "Z":
        raise InputError("cyclic shift fixture needs the group Z")
    carrier = FiniteMeasureSpace(weights) if weights is not None else FiniteMeasureSpace.uniform(m)
    idx = np.arange(m)
    return LinearRep(
        spec, carrier, {g: SignedPermutation.unsigned((idx + g.parts[0][0]) % m) for g in b}
    )


def coboundary(rep: LinearRep, w: np.ndarray, b: Ball, p: float) -> AffineAction:
    """``gamma(g) = pi(g)w - w``."""
    w = np.asarray(w, dtype=float)
    return AffineAction(rep, {g: rep.apply(g, w) - w for g in b}, p)


def trivial_action(rep: LinearRep, b: Ball, p: float) -> AffineAction:
    zero = np.zeros(rep.carrier.size)
    return AffineAction(rep, {g: zero for g in b}, p)


def _complete_partial(n: int, partial: dict) -> np.ndarray:
    """Extend an injective partial map on range(n) to a permutation, pairing leftovers in order."""
    perm = np.full(n, -1, dtype=np.int64)
    for i, j in partial.items():
        perm[i] = j
    free_src = [i for i in range(n) if perm[i] < 0]
    used = set(partial.values())
    free_dst = [j for j in range(n) if j not in used]
    perm[free_src] = free_dst
    return perm


def tree_cocycle(rank: int, p: float, radius: int, cap: int = defaults.BALL_CAP) -> AffineAction:
    """The edge cocycle of the free group acting on its Cayley tree.

    Atoms are pairs (vertex x, positive generator s), standing for the oriented
    edge x -> x s, with x in the ball of radius ``radius``; all weights are 1.
    Left multiplication by each generator is a partial injection of that ball,
    completed to a permutation; since the group is free these permutations
    define a genuine action, which agrees with left translation wherever the
    translate stays in the ball. ``gamma(g)`` is the signed chain of edges
    along the geodesic from e to g, so ``||gamma(g)||_p^p = |g|``.
    """
    spec = GroupSpec.parse(f"F{rank}")
    V = make_ball(spec, radius, cap)
    n = len(V)
    if n * rank > cap:
        raise ResourceError(f"tree carrier of {n * rank} atoms exceeds the cap of {cap}")
    gens = [spec.make((i,)) for i in range(1, rank + 1)]
    vertex_perm = []
    for s in gens:
        partial = {}
        for i, x in enumerate(V):
            y = s * x
            if y in V:
                partial[i] = V.position(y)
        vertex_perm.append(_complete_partial(n, partial))

    def atom_op(vp: np.ndarray) -> SignedPermutation:
        perm = (vp[:, None] * rank + np.arange(rank)[None, :]).ravel()
        return SignedPermutation.unsigned(perm)

    letter_ops = {}
    for j, vp in enumerate(vertex_perm):
        op = atom_op(vp)
        letter_ops[j + 1] = op
        letter_ops[-(j + 1)] = op.inverse()
    ident = SignedPermutation.identity(n * rank)

    assignment, cocycle = {}, {}
    for g in V:
        word = g.parts[0]
        op = ident
        for letter in word:
            op = op.compose(letter_ops[letter])
        assignment[g] = op
        vec = np.zeros(n * rank)
        prefix = spec.identity()
        for letter in word:
            step = spec.make((letter,))
            nxt = prefix * step
            if letter > 0:
                vec[V.position(prefix) * rank + letter - 1] += 1.0
            else:
                vec[V.position(nxt) * rank + (-letter) - 1] -= 1.0
            prefix = nxt
        cocycle[g] = vec
    rep = LinearRep(spec, FiniteMeasureSpace(np.ones(n * rank)), assignment)
    return AffineAction(rep, cocycle, p)


# JSON bundle


def action_to_json(action: AffineAction) -> dict:
    elements = list(action.rep.assignment)
    return {
        "group": str(action.spec),
        "p": action.p,
        "weights": action.weights.tolist(),
        "elements": [g.label for g in elements],
        "perms": [action.rep[g].perm.tolist() for g in elements],
        "signs": [action.rep[g].signs.astype(int).tolist() for g in elements],
        "cocycle": [action.gamma(g).tolist() for g in elements],
    }


def action_from_json(data: dict) -> AffineAction:
    try:
        spec = GroupSpec.parse(data["group"])
        carrier = FiniteMeasureSpace(data["weights"])
        elements = [spec.element(s) for s in data["elements"]]
        perms, cocycle = data["perms"], data["cocycle"]
        signs = data.get("signs") or [[1] * carrier.size for _ in elements]
        p = float(data["p"])
    except KeyError as exc:
        raise InputError(f"action JSON is missing {exc}") from None
    if not len(elements) == len(perms) == len(cocycle) == len(signs):
        raise InputError("action JSON arrays have mismatched lengths")
    assignment, gamma = {}, {}
    for g, pm, sg, cv in zip(elements, perms, signs, cocycle):
        if len(pm) != carrier.size or len(cv) != carrier.size:
            raise InputError(f"entry for {g.label} does not match the carrier size")
        assignment[g] = SignedPermutation(np.asarray(pm, dtype=np.int64), np.asarray(sg, dtype=float))
        gamma[g] = np.asarray(cv, dtype=float)
    return AffineAction(LinearRep(spec, carrier, assignment), gamma, p)


def domain_ball(action: AffineAction) -> Ball:
    """Largest ball around e contained in the action's stored domain."""
    r = 0
    while True:
        b = make_ball(action.spec, r + 1)
        if any(g not in action.cocycle or g not in action.rep.assignment for g in b):
            return make_ball(action.spec, r)
        if len(b) == len(make_ball(action.spec, r)):
            return b
        r += 1
