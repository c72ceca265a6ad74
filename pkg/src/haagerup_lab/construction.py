"""Proper affine actions of Z^d on L_p built from Bernoulli shifts.

The probability space is {0,1}^(Z^d) with fair coin-flip product measure and
Z^d acting by translation. ``A_n`` is the majority event on the box
``[0, n)^d`` (n odd, so the box has an odd number of bits and ``mu(A_n) = 1/2``).
Translating the box by g keeps ``o`` overlap bits and swaps ``f = N - o`` fresh
bits, which gives the exact formula

    mu(A_n g  symdiff  A_n) = sum_k P(O = k) * 2 q_k (1 - q_k),

where O ~ Bin(o, 1/2) counts ones on the overlap and q_k is the chance that
Bin(f, 1/2) reaches the majority threshold ``h - k``. Everything here is an
exact rational until gauges are formed.

Each block vector ``v_n = 1_{A_n} - 1/2`` is pushed to L_p by the Mazur map,
``w_n = |v_n|^(2/p) sign(v_n)``, and the block term of the cocycle is the
coboundary ``rho(g) w_n - w_n``. On the symmetric difference it has absolute
value ``2 (1/2)^(2/p)``, so its p-th power sum is ``2^(p-2) mu(A_n g symdiff A_n)``.
Small blocks are also materialized on a torus {0,1}^((Z/L)^d) so these closed
forms can be checked against explicit vectors.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import stats

from . import defaults
from .actions import (
    AffineAction,
    LinearRep,
    SignedPermutation,
    cnd_function_report,
    haagerup_function,
    profile_from_values,
    verify_cocycle,
    verify_isometry,
)
from .errors import InputError, LabError, ResourceError
from .groups import ABELIAN, GroupElement, GroupSpec, ball as make_ball
from .kernels import CndFunction
from .measure import FiniteMeasureSpace, mazur_values


def shift_group(spec: GroupSpec) -> int:
    """Dimension d if ``spec`` is Z^d, else an input error."""
    if len(spec.factors) != 1 or spec.factors[0].kind != ABELIAN:
        raise InputError(f"the shift construction needs Z or Z^d, got {spec}")
    return spec.factors[0].param


def _check_n(n: int):
    if n < 1 or n % 2 == 0:
        raise InputError(f"window length must be a positive odd integer, got {n}")


def _shift_vector(g) -> tuple:
    if isinstance(g, GroupElement):
        shift_group(g.spec)
        return g.parts[0]
    if isinstance(g, int):
        return (g,)
    return tuple(g)


def overlap(n: int, shift: tuple) -> int:
    """Number of lattice points shared by the box [0,n)^d and its translate."""
    o = 1
    for s in shift:
        o *= max(0, n - abs(s))
    return o


def binomial_upper_tails(f: int) -> list[int]:
    """``T[j] = #{subsets of f bits with at least j ones}`` for j = 0..f+1.

    Binomial counts come from the recurrence C(f, j+1) = C(f, j) (f - j) / (j + 1).
    """
    row = [1] * (f + 1)
    for j in range(f):
        row[j + 1] = row[j] * (f - j) // (j + 1)
    tails = [0] * (f + 2)
    for j in range(f, -1, -1):
        tails[j] = tails[j + 1] + row[j]
    return tails


@lru_cache(maxsize=4096)
def discrepancy_from_overlap(bits: int, o: int) -> Fraction:
    """Exact P(majority over o + f bits differs from majority over o + f' bits), f = f' = bits - o."""
    f = bits - o
    if f == 0:
        return Fraction(0)
    h = (bits + 1) // 2
    tails = binomial_upper_tails(f)
    full = 1 << f
    lo, hi = max(0, h - f), min(o, h - 1)
    total = 0
    if lo <= hi:
        c = math.comb(o, lo)
        for k in range(lo, hi + 1):
            t = tails[h - k]
            total += c * t * (full - t)
            c = c * (o - k) // (k + 1)
    return Fraction(2 * total, 1 << (o + 2 * f))


def majority_discrepancy(n: int, g, dim: int | None = None) -> Fraction:
    """Exact ``mu(A_n g  symdiff  A_n)`` for a shift g of Z^d."""
    _check_n(n)
    shift = _shift_vector(g)
    if dim is not None and len(shift) != dim:
        raise InputError(f"shift {shift} is not in Z^{dim}")
    d = len(shift)
    return discrepancy_from_overlap(n**d, overlap(n, shift))


def majority_measure(n: int, dim: int = 1) -> Fraction:
    """Exact ``mu(A_n)`` from the binomial tail of n^d fair bits."""
    _check_n(n)
    bits = n**dim
    h = (bits + 1) // 2
    count = sum(math.comb(bits, j) for j in range(h, bits + 1))
    return Fraction(count, 1 << bits)


def discrepancy_estimate(bits: int, o: int) -> float:
    """Floating-point version of :func:`discrepancy_from_overlap` for fast screening.

    Only overlap counts within 40 standard deviations of o/2 are summed.
    """
    f = bits - o
    if f == 0:
        return 0.0
    h = (bits + 1) // 2
    lo, hi = max(0, h - f), min(o, h - 1)
    spread = 40 * math.sqrt(o + 1) + 2
    lo, hi = max(lo, int(o / 2 - spread)), min(hi, int(o / 2 + spread) + 1)
    if lo > hi:
        return 0.0
    k = np.arange(lo, hi + 1)
    q = stats.binom.sf(h - k - 1, f, 0.5)
    return float(np.sum(stats.binom.pmf(k, o, 0.5) * 2 * q * (1 - q)))


# Blocks

EXACT_ESCAPE_MAX_BITS = 4096


def saturation_gauge(p: float) -> float:
    """Block p-th power sum at disjoint windows: ``2^(p-2) * 1/2``."""
    return 2.0 ** (p - 2) / 2


def block_gauge(p: float, disc) -> float:
    """``sum w |rho(g) w_n - w_n|^p = 2^(p-2) mu(A_n g symdiff A_n)``."""
    return 2.0 ** (p - 2) * float(disc)


@dataclass(frozen=True)
class BlockData:
    n: int
    p: float
    dim: int
    discrepancy: dict = field(repr=False)  # GroupElement -> Fraction
    near_invariance: float  # max block gauge over B(e, k) for the block's target k
    k: int
    escape_radius: int
    delta: float
    escape_exact: bool = True

    @property
    def v_values(self) -> tuple:
        """Values of v_n (each taken on a set of measure 1/2)."""
        return (Fraction(1, 2), Fraction(-1, 2))

    @property
    def w_values(self) -> tuple:
        a = 0.5 ** (2.0 / self.p)
        return (a, -a)

    def gauge(self, g: GroupElement) -> float:
        return block_gauge(self.p, self.discrepancy[g])

    def table_json(self) -> dict:
        return {g.label: f"{d.numerator}/{d.denominator}" for g, d in self.discrepancy.items()}


def build_block(n: int, p: float, dim: int = 1, table_radius: int = 0, k: int = 0) -> BlockData:
    """Exact discrepancy table on B(e, table_radius) plus near-invariance and escape data."""
    _check_n(n)
    if p <= 0:
        raise InputError("p must be positive")
    spec = GroupSpec.parse("Z" if dim == 1 else f"Z^{dim}")
    table = {g: majority_discrepancy(n, g) for g in make_ball(spec, max(table_radius, k))}
    near = max(
        (block_gauge(p, majority_discrepancy(n, g)) for g in make_ball(spec, k)), default=0.0
    )
    delta = saturation_gauge(p) / 2
    S, exact = escape_radius(n, p, dim, delta)
    return BlockData(n, p, dim, table, near, k, S, delta, exact)


def _sphere_overlaps(n: int, r: int, dim: int):
    """Distinct overlaps of the box with its translates by shifts of l1 length r."""

    def comps(total, parts):
        if parts == 1:
            yield (total,)
            return
        for a in range(total + 1):
            for rest in comps(total - a, parts - 1):
                yield (a,) + rest

    return {overlap(n, c) for c in comps(r, dim)}


def _sphere_low(n, p, dim, r, exact):
    bits = n**dim
    overlaps = _sphere_overlaps(n, r, dim)
    if exact:
        return block_gauge(p, min(discrepancy_from_overlap(bits, o) for o in overlaps))
    # screening: the balanced shift (largest overlap) is the least displaced
    return 2.0 ** (p - 2) * discrepancy_estimate(bits, max(overlaps))


def escape_radius(n: int, p: float, dim: int, delta: float) -> tuple[int, bool]:
    """Smallest S with block gauge >= delta on every shift of length > S.

    Shifts longer than ``dim * (n - 1)`` make the windows disjoint and sit at
    saturation. The scan runs in floating point; for windows of at most
    ``EXACT_ESCAPE_MAX_BITS`` bits the boundary radius and its successor are
    confirmed exactly (with an exact rescan on disagreement). The flag says
    whether the result is exact.
    """
    disjoint_from = dim * (n - 1) + 1

    def scan(exact):
        for r in range(disjoint_from, 0, -1):
            if _sphere_low(n, p, dim, r, exact) < delta:
                return r
        return 0

    S = scan(exact=False)
    if n**dim > EXACT_ESCAPE_MAX_BITS:
        return S, False
    fails = S == 0 or _sphere_low(n, p, dim, S, True) < delta
    holds = S + 1 > disjoint_from or _sphere_low(n, p, dim, S + 1, True) >= delta
    return (S if fails and holds else scan(exact=True)), True


def _max_gauge_on_ball(n, p, dim, k, exact=True):
    if k == 0:
        return 0.0
    bits = n**dim
    overlaps = set().union(*(_sphere_overlaps(n, r, dim) for r in range(1, k + 1)))
    if exact:
        return block_gauge(p, max(discrepancy_from_overlap(bits, o) for o in overlaps))
    return 2.0 ** (p - 2) * max(discrepancy_estimate(bits, o) for o in overlaps)


def select_block_schedule(
    eps,
    p: float,
    max_blocks: int | None = None,
    dim: int = 1,
    table_radius: int = 0,
    max_n: int = defaults.SCHEDULE_MAX_N,
    max_bits: int = defaults.SCHEDULE_MAX_BITS,
) -> list[BlockData]:
    """For block k = 1, 2, ..., the smallest odd n whose gauge over B(e, k) is <= eps_k.

    Candidates are screened in floating point and the chosen n (and its odd
    predecessor) are confirmed exactly. The search for block k+1 starts at
    block k's n: any smaller n already violates the weaker constraint of block k.
    """
    eps = [float(e) for e in eps]
    if not eps or any(e <= 0 for e in eps):
        raise InputError("eps targets must be positive")
    if any(b > a for a, b in zip(eps, eps[1:])):
        raise InputError("eps targets must be non-increasing")
    if max_blocks is not None:
        eps = eps[:max_blocks]
    blocks = []
    n = 1
    for k, target in enumerate(eps, start=1):
        best = None
        while n <= max_n and n**dim <= max_bits:
            est = _max_gauge_on_ball(n, p, dim, k, exact=False)
            best = est if best is None else min(best, est)
            if est <= target * (1 + 1e-9):
                # confirm exactly; walk forward if screening was optimistic
                while n <= max_n and n**dim <= max_bits and _max_gauge_on_ball(n, p, dim, k) > target:
                    n += 2
                while n > 1 and _max_gauge_on_ball(n - 2, p, dim, k) <= target:
                    n -= 2
                break
            n += 2
        if n > max_n or n**dim > max_bits:
            raise ResourceError(
                f"no odd n <= {max_n} with at most {max_bits} window bits meets "
                f"eps={target} on B(e,{k}); best bound {best:.6g}"
            )
        blocks.append(build_block(n, p, dim, table_radius, k))
    return blocks


def mixing_decay(n: int, shifts, dim: int = 1) -> dict:
    """Exact ``<v_n, v_n . g> = 1/4 - mu(A_n g symdiff A_n) / 2`` per shift."""
    return {
        _shift_vector(g): Fraction(1, 4) - majority_discrepancy(n, g, dim) / 2 for g in shifts
    }


# Materialized blocks on a torus


@dataclass(frozen=True, eq=False)
class MaterializedBlock:
    """{0,1}^((Z/L)^d) with uniform measure; Z^d shifts coordinates cyclically.

    For shifts with every |g_i| <= L - n the box never wraps onto itself, so
    discrepancies agree with the infinite shift.
    """

    n: int
    dim: int
    L: int
    indicator: np.ndarray = field(repr=False)

    @property
    def bits(self) -> int:
        return self.L**self.dim

    @property
    def space(self) -> FiniteMeasureSpace:
        return FiniteMeasureSpace.uniform(1 << self.bits)

    def _coords(self):
        return list(np.ndindex(*(self.L,) * self.dim))

    def _bit(self, c) -> int:
        return sum(ci * self.L**i for i, ci in enumerate(c))

    def shift_perm(self, shift) -> np.ndarray:
        """Permutation of configurations: omega -> T_g omega, (T_g omega)_c = omega_(c-g)."""
        configs = np.arange(1 << self.bits, dtype=np.int64)
        image = np.zeros_like(configs)
        for c in self._coords():
            src = tuple((ci - si) % self.L for ci, si in zip(c, shift))
            image |= ((configs >> self._bit(src)) & 1) << self._bit(c)
        return image

    def v(self) -> np.ndarray:
        return self.indicator - 0.5

    def w(self, p: float) -> np.ndarray:
        return mazur_values(self.v(), 2.0, p)


def materialize_block(n: int, dim: int, L: int, max_bits: int = defaults.MATERIALIZE_MAX_BITS) -> MaterializedBlock:
    _check_n(n)
    if L < n:
        raise InputError("torus must be at least as long as the window")
    bits = L**dim
    if bits > max_bits:
        raise ResourceError(f"materializing {bits} bits exceeds the cap of {max_bits}")
    configs = np.arange(1 << bits, dtype=np.int64)
    ones = np.zeros_like(configs)
    for c in np.ndindex(*(n,) * dim):
        ones += (configs >> sum(ci * L**i for i, ci in enumerate(c))) & 1
    indicator = (ones >= (n**dim + 1) // 2).astype(float)
    return MaterializedBlock(n, dim, L, indicator)


def materialized_discrepancy(block: MaterializedBlock, shift) -> Fraction:
    moved = np.empty_like(block.indicator)
    moved[block.shift_perm(shift)] = block.indicator  # indicator of T_g A_n
    return Fraction(int(np.count_nonzero(moved != block.indicator)), 1 << block.bits)


def materialized_inner(block: MaterializedBlock, shift) -> Fraction:
    perm = block.shift_perm(shift)
    moved = np.empty_like(block.indicator)
    moved[perm] = block.indicator
    agree = int(np.count_nonzero(moved == block.indicator))
    total = 1 << block.bits
    return Fraction(agree - (total - agree), 4 * total)


# Assembly


@dataclass(frozen=True, eq=False)
class TruncatedCocycle:
    spec: GroupSpec
    p: float
    radius: int
    blocks: list
    delta_values: dict = field(repr=False)  # g -> sum_k 2^(p-2) mu_k(g) on B(e, 2 radius)
    materialized: AffineAction | None
    materialized_ns: list
    materialized_gauges: dict = field(repr=False)  # n -> {g: p-th power sum from vectors}

    def delta(self, g: GroupElement) -> float:
        return self.delta_values[g]

    def gauge(self, g: GroupElement) -> float:
        d = self.delta_values[g]
        return d ** (1.0 / self.p) if self.p >= 1 else d

    def bridge_error(self) -> float:
        """Max |closed form - materialized| block gauge over the materialized blocks."""
        err = 0.0
        for blk in self.blocks:
            mat = self.materialized_gauges.get(blk.n)
            if mat is None:
                continue
            for g, val in mat.items():
                err = max(err, abs(val - blk.gauge(g)))
        return err


def assemble_cocycle(
    blocks,
    p: float,
    radius: int,
    materialize_max_n: int = defaults.MATERIALIZE_MAX_WINDOW,
    max_bits: int = defaults.MATERIALIZE_MAX_BITS,
) -> TruncatedCocycle:
    """Truncated p-direct sum of the block coboundaries over B(e, 2 radius).

    The p-direct sum of L_p spaces is L_p of their disjoint union, so the
    materialized cocycle lives on the concatenation of the block carriers.
    """
    if not blocks:
        raise InputError("empty block schedule")
    dim = blocks[0].dim
    spec = GroupSpec.parse("Z" if dim == 1 else f"Z^{dim}")
    big = make_ball(spec, 2 * radius)
    tables = []
    for blk in blocks:
        missing = [g for g in big if g not in blk.discrepancy]
        table = dict(blk.discrepancy)
        for g in missing:
            table[g] = majority_discrepancy(blk.n, g)
        tables.append(dataclasses.replace(blk, p=p, discrepancy=table))
    delta_values = {g: sum(block_gauge(p, t.discrepancy[g]) for t in tables) for g in big}

    mats, ns = [], []
    for blk in tables:
        L = blk.n + 2 * radius
        if blk.n <= materialize_max_n and L**dim <= max_bits:
            mats.append(materialize_block(blk.n, dim, L, max_bits))
            ns.append(blk.n)
    action, gauges = None, {}
    if mats:
        weights = np.concatenate([m.space.weights for m in mats])
        offsets = np.cumsum([0] + [m.space.size for m in mats])
        ws = [m.w(p) for m in mats]
        assignment, cocycle = {}, {}
        for g in big:
            perm = np.concatenate([m.shift_perm(g.parts[0]) + off for m, off in zip(mats, offsets)])
            op = SignedPermutation.unsigned(perm)
            assignment[g] = op
            parts = [op.apply(np.concatenate(ws))[a:b] for a, b in zip(offsets, offsets[1:])]
            cocycle[g] = np.concatenate([part - w for part, w in zip(parts, ws)])
            for m, part, w in zip(mats, parts, ws):
                gauges.setdefault(m.n, {})[g] = float(
                    np.dot(m.space.weights, np.abs(part - w) ** p)
                )
        rep = LinearRep(spec, FiniteMeasureSpace(weights), assignment)
        action = AffineAction(rep, cocycle, p)
    return TruncatedCocycle(spec, p, radius, tables, delta_values, action, ns, gauges)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except LabError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


def construct_and_certify(
    group: str | GroupSpec,
    p: float,
    radius: int,
    eps=(0.1, 0.05, 0.02),
    schedule=None,
    cnd_tol: float = defaults.CND_TOL,
    cocycle_tol: float = defaults.COCYCLE_TOL,
    isometry_tol: float = defaults.ISOMETRY_TOL,
    bridge_tol: float = 1e-10,
    seed: int = defaults.DEFAULT_SEED,
) -> dict:
    """Run schedule -> assembly -> isometry -> cocycle -> properness -> CND and report.

    ``schedule`` (a list of odd window lengths) bypasses the eps-driven selection.
    """
    spec = GroupSpec.parse(group) if isinstance(group, str) else group
    dim = _stage("input", shift_group, spec)
    if not 0 < p < 2:
        raise InputError(f"p must lie in (0, 2), got {p}")
    if radius < 1:
        raise InputError("radius must be >= 1")
    warning = None if 1 < p < 2 else "p outside (1, 2): only the cocycle-function direction applies"

    if schedule is None:
        blocks = _stage("schedule", select_block_schedule, eps, p, dim=dim, table_radius=2 * radius)
    else:
        blocks = [_stage("schedule", build_block, n, p, dim, 2 * radius, 0) for n in schedule]
    tc = _stage("assemble", assemble_cocycle, blocks, p, radius)
    b = make_ball(spec, radius)
    checks = []

    halves = {blk.n: majority_measure(blk.n, dim) for blk in tc.blocks}
    checks.append(
        {
            "check": "measure_half",
            "passed": all(v == Fraction(1, 2) for v in halves.values()),
            "values": {str(n): f"{v.numerator}/{v.denominator}" for n, v in halves.items()},
        }
    )
    if tc.materialized is not None:
        checks.append(
            {
                "check": "gauge_bridge",
                "passed": tc.bridge_error() <= bridge_tol,
                "max_error": tc.bridge_error(),
                "tol": bridge_tol,
                "blocks": tc.materialized_ns,
            }
        )
        checks.append(_stage("isometry", verify_isometry, tc.materialized.rep, p, b, isometry_tol, seed))
        checks.append(_stage("cocycle", verify_cocycle, tc.materialized, b, cocycle_tol))
    else:
        checks.append({"check": "materialized", "passed": True, "skipped": "no block fits the materialization cap"})

    profile = profile_from_values(spec, tc.gauge, radius, "norm" if p >= 1 else "delta_p")
    prop = {
        "check": "properness",
        "passed": profile.strictly_increasing(),
        "radii": list(profile.radii),
        "min_gauge": list(profile.minima),
        "convention": profile.convention,
    }
    if not prop["passed"]:
        prop["diagnostic"] = "flat or decreasing sphere minima: " + ", ".join(
            f"r={r}:{v:.6g}" for r, v in profile.rows()
        )
    checks.append(prop)

    psi = CndFunction(spec, dict(tc.delta_values))
    rep = _stage("haagerup", cnd_function_report, psi, b, cnd_tol)
    checks.append({"check": "haagerup_cnd", "passed": rep.verdict, **rep.to_json()})
    if tc.materialized is not None and len(tc.materialized_ns) == len(tc.blocks):
        _, mrep = _stage("haagerup", haagerup_function, tc.materialized, b, cnd_tol)
        checks.append({"check": "haagerup_cnd_materialized", "passed": mrep.verdict, **mrep.to_json()})

    return {
        "group": str(spec),
        "p": p,
        "radius": radius,
        "eps": list(eps) if schedule is None else None,
        "warning": warning,
        "schedule": [
            {
                "n": blk.n,
                "k": blk.k,
                "near_invariance": blk.near_invariance,
                "escape_radius": blk.escape_radius,
                "escape_exact": blk.escape_exact,
                "delta": blk.delta,
                "discrepancies": blk.table_json(),
            }
            for blk in tc.blocks
        ],
        "psi": {g.label: v for g, v in tc.delta_values.items()},
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
