"""Small worked examples with known answers, one per public operation."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from haagerup_lab.actions import (
    coboundary,
    cyclic_shift_rep,
    haagerup_function,
    identity_rep,
    properness_profile,
    tree_cocycle,
    trivial_action,
    verify_isometry,
)
from haagerup_lab.cli import run
from haagerup_lab.construction import (
    assemble_cocycle,
    build_block,
    construct_and_certify,
    majority_discrepancy,
    materialize_block,
    select_block_schedule,
)
from haagerup_lab.embedding import escape_profile, gns_embed
from haagerup_lab.groups import GroupSpec, ball, inverse, multiply, word_length
from haagerup_lab.kernels import (
    CndFunction,
    Kernel,
    cnd_test,
    exp_kernel_test,
    frullani_constant,
    frullani_power,
    function_to_kernel,
    power_transform,
    random_cnd_kernel,
)
from haagerup_lab.measure import (
    FiniteMeasureSpace,
    LpVector,
    inner_product,
    lp_gauge,
    mazur_map,
    mazur_modulus_estimate,
    mazur_values,
)
from haagerup_lab.suite import run_suite

F2 = GroupSpec.parse("F2")
Z = GroupSpec.parse("Z")
Z2 = GroupSpec.parse("Z^2")


def line(xs, p):
    x = np.asarray(xs, dtype=float)
    return Kernel(tuple(map(str, xs)), np.abs(x[:, None] - x[None]) ** p)


# groups


def test_multiply_examples():
    g = F2.element("ab")
    assert multiply(F2.identity(), g) == g
    assert multiply(F2.element("a"), F2.element("A")).is_identity()
    assert multiply(Z2.element("(1,2)"), Z2.element("(3,-1)")) == Z2.element("(4,1)")


def test_inverse_examples():
    assert inverse(F2.identity()).is_identity()
    assert inverse(F2.element("ab")).label == "BA"
    C5 = GroupSpec.parse("C5")
    assert inverse(C5.element("2")) == C5.element("3")


def test_word_length_examples():
    assert word_length(F2.identity()) == 0
    assert word_length(Z2.element("(2,-3)")) == 5
    assert word_length(F2.element("abA")) == 3


def test_ball_examples():
    for n in range(6):
        assert len(ball(Z, n)) == 2 * n + 1
    assert set(ball(F2, 1).labels) == {"1", "a", "A", "b", "B"}


# measure


def test_gauge_examples():
    half = FiniteMeasureSpace.uniform(2)
    assert lp_gauge(LpVector(half, np.zeros(2), 1.5)) == 0
    v = LpVector(half, np.array([0.5, -0.5]), 2.0)  # 1_A - 1/2 with mu(A) = 1/2
    assert lp_gauge(v) == 0.5
    assert lp_gauge(LpVector(FiniteMeasureSpace(np.array([1.0])), np.array([3.0]), 0.5)) == pytest.approx(math.sqrt(3), rel=1e-15)


def test_inner_product_examples():
    space = FiniteMeasureSpace(np.array([0.2, 0.3, 0.5]))
    v = LpVector(space, np.array([1.0, -2.0, 0.5]), 2.0)
    assert inner_product(v, v) == pytest.approx(lp_gauge(v) ** 2, rel=1e-15)
    f = LpVector(space, np.array([1.0, 0.0, 0.0]), 2.0)
    g = LpVector(space, np.array([0.0, 4.0, -1.0]), 2.0)
    assert inner_product(f, g) == 0


def test_mazur_examples(rng):
    v = np.array([0.5, -0.5, 0.5])
    assert np.array_equal(mazur_values(v, 1.5, 1.5), v)
    for p in (0.5, 1.0, 1.5, 3.0):
        assert np.allclose(mazur_values(v, 2.0, p), np.sign(v) * 0.5 ** (2 / p), rtol=1e-15)
    space = FiniteMeasureSpace.uniform(16)
    u = LpVector(space, rng.standard_normal(16), 2.0)
    u = u.scale(1 / lp_gauge(u))
    w = mazur_map(u, 2.0, 1.5)
    assert lp_gauge(w) ** 1.5 == pytest.approx(1.0, rel=1e-14)


def test_modulus_examples():
    same = mazur_modulus_estimate(1.5, 1.5, 200, seed=0)
    assert np.allclose(same["output_dist"], same["input_dist"], atol=1e-12)
    table = mazur_modulus_estimate(2.0, 1.0, 1000, seed=0, atoms=32)
    bound = 3 * table["input_dist"] ** min(1.0, 1.0 / 2.0)
    assert np.all(table["output_dist"] <= bound)
    x = np.array([[1.0, -1.0]])
    assert np.all(mazur_values(x, 2.0, 1.0) - mazur_values(x, 2.0, 1.0) == 0)


# kernels


def test_cnd_examples():
    zero = Kernel(tuple("abc"), np.zeros((3, 3)))
    rep = cnd_test(zero)
    assert rep.verdict and rep.extremal == 0
    K2 = line([0, 1, 2], 2)
    assert cnd_test(K2).verdict
    c = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    assert c @ K2.matrix @ c == pytest.approx(-1.0, rel=1e-15)
    K3 = line([0, 1, 2, 3], 3)
    rep = cnd_test(K3)
    assert not rep.verdict and rep.extremal == pytest.approx(5.0)
    assert np.array([1, -1, -1, 1]) @ K3.matrix @ np.array([1, -1, -1, 1]) == 20


def test_function_to_kernel_examples():
    b2 = ball(Z, 2)
    zero = function_to_kernel(CndFunction.from_ball(ball(Z, 4), lambda g: 0.0), b2)
    assert not zero.matrix.any()
    K = function_to_kernel(CndFunction.from_ball(ball(Z, 4), lambda g: g.word_length()), b2)
    pts = [g.parts[0][0] for g in b2]
    assert np.array_equal(K.matrix, np.abs(np.subtract.outer(pts, pts)))
    KF = function_to_kernel(CndFunction.from_ball(ball(F2, 4), lambda g: g.word_length()), ball(F2, 2))
    assert cnd_test(KF).verdict


def test_power_examples():
    out = power_transform(line([0, 1, 2], 2), 0.5)
    assert np.allclose(out.matrix, line([0, 1, 2], 1).matrix, atol=1e-15)
    assert cnd_test(out).verdict
    out = power_transform(line(range(6), 2), 0.75)
    assert np.allclose(out.matrix, line(range(6), 1.5).matrix, rtol=1e-14)
    assert cnd_test(out).verdict


def test_exp_examples():
    K = line([0, 1, 2], 2)
    (row,) = exp_kernel_test(K, [1.0])
    assert row["one_minus_exp"].verdict
    assert row["exp_min_eigenvalue"] >= 0
    (tiny,) = exp_kernel_test(K, [1e-12])
    assert np.abs(tiny["one_minus_exp"].extremal) < 1e-10


def test_frullani_examples():
    for a in (0.1, 0.5, 0.9):
        assert abs(frullani_power(1.0, a) - 1.0) <= 1e-6
    assert abs(frullani_power(4.0, 0.5) - 2.0) <= 2e-6
    assert frullani_constant(0.5) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-15)


def test_random_kernel_examples():
    assert random_cnd_kernel(1, 1, 0).matrix.tolist() == [[0.0]]
    for seed in range(10):
        assert cnd_test(random_cnd_kernel(2, 1, seed)).verdict
    K = random_cnd_kernel(50, 3, 7)
    assert cnd_test(K).extremal <= 1e-9 * K.scale


# embedding


def test_gns_examples():
    emb = gns_embed(Kernel(tuple("abc"), np.zeros((3, 3))))
    assert emb.dimension == 0 and emb.residual == 0
    b = ball(Z, 2)
    K = function_to_kernel(CndFunction.from_ball(ball(Z, 4), lambda g: g.word_length()), b)
    assert gns_embed(K).residual <= 1e-8
    emb = gns_embed(line([0, 1, 2], 2))
    assert emb.dimension == 1
    assert np.allclose(emb.squared_distances(), [[0, 1, 4], [1, 0, 1], [4, 1, 0]], atol=1e-12)


def test_escape_examples():
    big = ball(F2, 4)
    assert [v for _, v in escape_profile(CndFunction.from_ball(big, lambda g: 0.0), range(4))] == [0.0] * 4
    act = tree_cocycle(2, 1.5, 4)
    psi = CndFunction.from_ball(big, act.delta)
    assert escape_profile(psi, range(1, 5)) == [(r, float(r)) for r in range(1, 5)]


# actions


def test_isometry_examples():
    b = ball(Z, 3)
    for p in (0.5, 1.0, 2.0, 3.0):
        assert verify_isometry(identity_rep(Z, FiniteMeasureSpace.uniform(4), b), p, b)["passed"]
        assert verify_isometry(cyclic_shift_rep(b, 4), p, b)["passed"]
    bad = verify_isometry(cyclic_shift_rep(b, 4, weights=np.array([1.0, 1.0, 1.0, 5.0])), 1.0, b)
    assert not bad["passed"] and bad["worst_element"]


def test_cocycle_examples(rng):
    from haagerup_lab.actions import verify_cocycle

    b = ball(Z, 4)
    rep = cyclic_shift_rep(b, 6)
    assert verify_cocycle(trivial_action(rep, b, 1.5), b)["max_defect"] == 0
    assert verify_cocycle(coboundary(rep, rng.standard_normal(6), b, 1.5), b)["max_defect"] <= 1e-12
    tree = tree_cocycle(2, 1.5, 3)
    assert verify_cocycle(tree, ball(F2, 3))["max_defect"] <= 1e-12
    assert not tree.gamma(F2.identity()).any()
    assert tree.delta(F2.element("a")) == 1
    g, h = F2.element("ab"), F2.element("a")
    lhs = tree.gamma(g * h)
    rhs = tree.rep.apply(g, tree.gamma(h)) + tree.gamma(g)
    assert np.array_equal(lhs, rhs)


def test_profile_examples():
    b = ball(F2, 3)
    rep = identity_rep(F2, FiniteMeasureSpace.uniform(2), b)
    assert properness_profile(trivial_action(rep, b, 1.0), 3).minima == (0.0, 0.0, 0.0)
    prof = properness_profile(tree_cocycle(2, 2.0, 4), 4)
    assert np.allclose(prof.minima, np.sqrt([1, 2, 3, 4]), rtol=1e-15)


def test_haagerup_function_examples():
    b = ball(F2, 2)
    rep = identity_rep(F2, FiniteMeasureSpace.uniform(2), ball(F2, 4))
    psi, verdict = haagerup_function(trivial_action(rep, ball(F2, 4), 1.5), b)
    assert verdict.verdict and all(v == 0 for v in psi.values.values())
    psi, verdict = haagerup_function(tree_cocycle(2, 1.5, 4), b)
    assert verdict.verdict
    assert all(psi(g) == g.word_length() for g in ball(F2, 4))


# construction


def test_discrepancy_examples():
    assert majority_discrepancy(5, 0) == 0
    assert majority_discrepancy(1, 1) == Fraction(1, 2)
    assert majority_discrepancy(3, 3) == Fraction(1, 2)


def test_block_vector_examples():
    block = materialize_block(5, 1, 9)
    w = block.space.weights
    v = block.v()
    assert math.sqrt(np.dot(w, v**2)) == 0.5
    assert np.dot(w, v) == 0
    w2 = block.w(2.0)
    # the torus of length 9 faithfully models shifts with |s| <= 9 - 5
    for s in range(-4, 5):
        moved = np.empty_like(w2)
        moved[block.shift_perm((s,))] = w2
        assert np.dot(w, (moved - w2) ** 2) == pytest.approx(float(majority_discrepancy(5, s)), abs=1e-15)


def test_schedule_examples():
    # p = 2, k = 1, eps = 0.05: the shift-1 discrepancy is comb(n-1, (n-1)/2) / 2^n
    expect = next(n for n in range(1, 999, 2) if math.comb(n - 1, (n - 1) // 2) / 2**n <= 0.05)
    (blk,) = select_block_schedule((0.05,), 2.0)
    assert blk.n == expect
    blocks = select_block_schedule((0.1, 0.05, 0.02), 1.5)
    radii = [b.escape_radius for b in blocks]
    assert radii == sorted(radii)


def test_assembly_examples():
    blocks = [build_block(n, 1.5, table_radius=6) for n in (3, 5, 7)]
    tc = assemble_cocycle(blocks, 1.5, 3)
    assert tc.materialized_ns == [3, 5, 7]
    assert tc.bridge_error() <= 1e-10
    assert tc.delta(Z.identity()) == 0
    assert not tc.materialized.gamma(Z.identity()).any()


def test_pipeline_examples():
    rep = construct_and_certify("Z", 1.0, 4)
    cnd = next(c for c in rep["checks"] if c["check"] == "haagerup_cnd")
    assert cnd["verdict"] == "CND" and cnd["tolerance"] == 1e-9
    rep = construct_and_certify("Z^2", 1.2, 2, eps=(0.2, 0.1))
    cnd = next(c for c in rep["checks"] if c["check"] == "haagerup_cnd")
    assert cnd["verdict"] == "CND"


# cli


def test_cli_examples(tmp_path):
    zero = tmp_path / "zero.json"
    zero.write_text(json.dumps({"matrix": [[0, 0], [0, 0]]}))
    assert run(["cnd-test", "--kernel", str(zero)]) == 0
    cube = tmp_path / "cube.json"
    cube.write_text(json.dumps(line([0, 1, 2, 3], 3).to_json()))
    out = tmp_path / "r.json"
    assert run(["cnd-test", "--kernel", str(cube), "--out", str(out)]) == 1
    assert np.allclose(json.loads(out.read_text())["report"]["witness"], [0.5, -0.5, -0.5, 0.5])


def test_suite_report_echoes_config():
    report, _ = run_suite(seed=3, check_determinism=False)
    assert report["config"]["seed"] == 3
    assert report["config"]["defaults"]["cnd_tol"] == 1e-9
    assert report["passed"]
