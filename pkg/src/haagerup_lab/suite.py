"""The acceptance battery, runnable from the CLI as ``haagerup-lab suite``.

Each criterion returns a JSON-ready dict with a ``passed`` flag and the
numbers behind it. Timings are collected by :func:`run_suite` but kept out of
the report body so that identical configurations give identical bytes.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy import integrate

from . import defaults
from .actions import haagerup_function, tree_cocycle, verify_cocycle
from .construction import (
    construct_and_certify,
    majority_discrepancy,
    materialize_block,
    materialized_discrepancy,
    materialized_inner,
    mixing_decay,
)
from .embedding import gns_embed
from .groups import GroupSpec, ball
from .kernels import (
    CndFunction,
    Kernel,
    cnd_test,
    exp_kernel_test,
    frullani_constant,
    frullani_power,
    function_to_kernel,
    lp_distance_kernel,
    power_transform,
    random_cnd_kernel,
)
from .measure import mazur_values

TOL = defaults.CND_TOL


def _line_kernel(points, p):
    x = np.asarray(points, dtype=float)
    return Kernel(tuple(str(v) for v in points), np.abs(x[:, None] - x[None, :]) ** p)


def random_lp_points(seed: int):
    """A seeded finite point set in L_p(mu): <= 30 points over <= 8 atoms."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 31))
    atoms = int(rng.integers(1, 9))
    weights = rng.uniform(0.1, 1.0, atoms)
    return rng.standard_normal((n, atoms)) * rng.uniform(0.5, 3.0), weights


def criterion_lp_kernels_cnd(seed=0):
    worst = -math.inf
    ok = True
    for p in (0.5, 1.0, 1.5, 2.0):
        for s in range(20):
            pts, w = random_lp_points(seed + s)
            K = lp_distance_kernel(pts, w, p)
            rep = cnd_test(K, TOL)
            ok &= rep.verdict and rep.extremal <= TOL * K.scale
            worst = max(worst, rep.extremal / K.scale)
    return {"passed": bool(ok), "max_relative_extremal": worst, "tol": TOL}


def criterion_negative_control():
    rows = {}
    ok = True
    for p in (2.5, 3.0):
        K = _line_kernel([0, 1, 2, 3], p)
        rep = cnd_test(K, TOL)
        c = np.array([1.0, -1.0, -1.0, 1.0])
        form = float(c @ K.matrix @ c)
        rows[str(p)] = {"extremal": rep.extremal, "witness": rep.witness.tolist(), "form_1_-1_-1_1": form}
        ok &= (not rep.verdict) and rep.extremal > 0 and form > 0
    ok &= rows["3.0"]["form_1_-1_-1_1"] == 20.0
    return {"passed": bool(ok), "cases": rows}


def criterion_schoenberg(seed=0):
    ok = True
    worst_power, worst_psd = -math.inf, math.inf
    for s in range(20):
        K = random_cnd_kernel(12 + s % 9, 1 + s % 4, seed + s)
        for a in np.round(np.arange(0.1, 1.0, 0.1), 1):
            rep = cnd_test(power_transform(K, float(a)), TOL)
            ok &= rep.verdict
            worst_power = max(worst_power, rep.extremal * rep.tol / rep.threshold)
        for row in exp_kernel_test(K, (0.1, 1.0, 10.0), TOL):
            ok &= row["passed"]
            worst_psd = min(worst_psd, row["exp_min_eigenvalue"])
    return {
        "passed": bool(ok),
        "max_relative_extremal": worst_power,
        "min_exp_eigenvalue": worst_psd,
        "tol": TOL,
    }


def frullani_constant_oracle(alpha: float) -> float:
    """``1 / int_0^inf (1 - e^-t) t^(-alpha-1) dt`` by adaptive quadrature."""
    f = lambda t: -math.expm1(-t) * t ** (-alpha - 1)
    head, _ = integrate.quad(f, 0, 1, limit=200)
    tail, _ = integrate.quad(f, 1, np.inf, limit=200)
    return 1.0 / (head + tail)


def criterion_frullani():
    worst = 0.0
    for x in (0.1, 1.0, 4.0, 10.0):
        for a in (0.25, 0.5, 0.75):
            worst = max(worst, abs(frullani_power(x, a) - x**a) / x**a)
    oracle = frullani_constant_oracle(0.5)
    c_err = abs(frullani_constant(0.5) - oracle)
    ok = worst <= defaults.FRULLANI_RTOL and c_err <= 1e-7 and abs(oracle - 0.2820948) < 1e-7
    return {"passed": bool(ok), "max_relative_error": worst, "c_half": frullani_constant(0.5), "c_half_oracle": oracle}


def criterion_mazur(seed=0, mazur=mazur_values):
    rng = np.random.default_rng(seed)
    ps = (0.5, 1.0, 1.5, 2.0, 3.0)
    transfer, roundtrip, equivariant = 0.0, 0.0, True
    for i in range(1000):
        a, b = ps[i % 5], ps[(i // 5) % 5]
        n = int(rng.integers(1, 33))
        w = rng.uniform(0.1, 1.0, n)
        v = rng.standard_normal(n)
        out = mazur(v, a, b)
        lhs, rhs = np.dot(w, np.abs(out) ** b), np.dot(w, np.abs(v) ** a)
        transfer = max(transfer, float(abs(lhs - rhs)))
        roundtrip = max(roundtrip, float(np.abs(mazur(out, b, a) - v).max()))
        perm = rng.permutation(n)
        equivariant &= np.array_equal(mazur(v[perm], a, b), out[perm])
    ok = transfer <= 1e-12 and roundtrip <= 1e-10 and equivariant
    return {"passed": bool(ok), "max_transfer_error": transfer, "max_roundtrip_error": roundtrip, "equivariant": bool(equivariant)}


def criterion_gns(seed=0):
    residuals = {}
    for s in range(5):
        residuals[f"random_{s}"] = gns_embed(random_cnd_kernel(25, 4, seed + s)).residual
    for text, r in (("Z", 4), ("Z^2", 4), ("F2", 4)):
        b = ball(GroupSpec.parse(text), r)
        big = ball(b.spec, 2 * r)
        psi = CndFunction.from_ball(big, lambda g: g.word_length())
        residuals[text] = gns_embed(function_to_kernel(psi, b)).residual
    worst = max(residuals.values())
    return {"passed": bool(worst <= 1e-8), "residuals": residuals, "max_residual": worst}


def criterion_tree():
    spec = GroupSpec.parse("F2")
    b4 = ball(spec, 4)
    exact, defect = True, 0.0
    for p in (0.5, 1.0, 1.5, 2.0, 3.0):
        act = tree_cocycle(2, p, 4)
        exact &= all(act.delta(g) == g.word_length() for g in b4)
        defect = max(defect, verify_cocycle(act, b4)["max_defect"])
    verdicts = {}
    for p in (1.0, 1.5):
        _, rep = haagerup_function(tree_cocycle(2, p, 4), ball(spec, 2))
        verdicts[str(p)] = rep.label
    ok = exact and defect <= 1e-12 and all(v == "CND" for v in verdicts.values())
    return {"passed": bool(ok), "norm_law_exact": bool(exact), "max_cocycle_defect": defect, "verdicts": verdicts}


def criterion_construction(seed=0):
    rep = construct_and_certify("Z", 1.5, 4, seed=seed)
    return {
        "passed": rep["passed"],
        "schedule": [b["n"] for b in rep["schedule"]],
        "checks": {c["check"]: c["passed"] for c in rep["checks"]},
    }


def criterion_mixing():
    ok = True
    for n in (1, 3, 5, 7, 9):
        shifts = list(range(0, n + 2))
        decay = mixing_decay(n, shifts)
        block = materialize_block(n, 1, n + n + 1)
        for s in shifts:
            ok &= decay[(s,)] == materialized_inner(block, (s,))
            ok &= majority_discrepancy(n, s) == materialized_discrepancy(block, (s,))
        ok &= decay[(n,)] == 0
    # direct L2 distance on the materialized n=9 block at a disjoint shift
    block = materialize_block(9, 1, 19)
    v = block.v()
    moved = np.empty_like(v)
    moved[block.shift_perm((9,))] = v
    weights = block.space.weights
    dist = math.sqrt(float(np.dot(weights, (v - moved) ** 2)))
    norm_v = math.sqrt(float(np.dot(weights, v**2)))
    ok &= abs(dist - 1 / math.sqrt(2)) <= 1e-12 and abs(dist - math.sqrt(2) * norm_v) <= 1e-12
    return {"passed": bool(ok), "disjoint_distance": dist, "norm_v": norm_v}


CRITERIA = [
    ("lp_kernels_cnd", criterion_lp_kernels_cnd),
    ("negative_control", criterion_negative_control),
    ("schoenberg_closure", criterion_schoenberg),
    ("frullani", criterion_frullani),
    ("mazur_transfer", criterion_mazur),
    ("gns_round_trip", criterion_gns),
    ("tree_fixture", criterion_tree),
    ("construction_pipeline", criterion_construction),
    ("mixing_decay", criterion_mixing),
]

SEEDED = {"lp_kernels_cnd", "schoenberg_closure", "mazur_transfer", "gns_round_trip", "construction_pipeline"}


def _sign_flipped_mazur(values, p_from, p_to):
    return np.sign(values) * np.abs(values) ** (-p_from / p_to)


MUTATIONS = {"mazur-sign-flip": ("mazur_transfer", {"mazur": _sign_flipped_mazur})}


def run_battery(seed: int = defaults.DEFAULT_SEED, mutation: str | None = None):
    """Run criteria 1-9; returns (results, timings)."""
    extra = {}
    if mutation is not None:
        target, kwargs = MUTATIONS[mutation]
        extra[target] = kwargs
    results, timings = {}, {}
    for name, fn in CRITERIA:
        kwargs = dict(extra.get(name, {}))
        if name in SEEDED:
            kwargs["seed"] = seed
        t0 = time.perf_counter()
        results[name] = fn(**kwargs)
        timings[name] = time.perf_counter() - t0
    return results, timings


def run_suite(seed: int = defaults.DEFAULT_SEED, mutation: str | None = None, check_determinism: bool = True):
    """Battery plus the determinism criterion (a second identical run, compared byte for byte)."""
    from .io import dumps

    results, timings = run_battery(seed, mutation)
    if check_determinism:
        t0 = time.perf_counter()
        again, _ = run_battery(seed, mutation)
        same = dumps(again) == dumps(results)
        results["determinism"] = {"passed": same}
        timings["determinism"] = time.perf_counter() - t0
    report = {
        "config": {"seed": seed, "mutation": mutation, "defaults": defaults.DEFAULTS},
        "criteria": results,
        "passed": all(r["passed"] for r in results.values()),
    }
    return report, timings
