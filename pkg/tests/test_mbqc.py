import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from tscomplex.core import DimensionError, StateVector, apply_local_operators, ghz_state, inner_product
from tscomplex.mbqc import (
    MeasurementStep,
    cluster2d_state,
    dense_outcome_distribution,
    dense_project,
    fidelity_monotonicity_check,
    measure_on_tree,
    pattern_from_json,
    project_tree,
    run_pattern,
    simulate_pattern,
    strip,
    x_basis,
    xy_basis,
    z_basis,
)
from tscomplex.subgroup import PauliString
from tscomplex.tree import (
    TreeError,
    build_ghz,
    build_mps_tree,
    cluster_1d_tensors,
    evaluate,
    parse_tree,
    random_tree,
    subtree_vector,
    tree_size,
)

from conftest import random_state


def random_basis(rng):
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return q[:, 0], q[:, 1]


def test_step_validation():
    with pytest.raises(ValueError):
        MeasurementStep(1, (np.array([1, 0]), np.array([1, 0])))
    with pytest.raises(ValueError):
        MeasurementStep(1, z_basis(), outcome=2)
    s = MeasurementStep(2, x_basis())
    assert s.with_outcome(1).outcome == 1 and s.outcome == "sample"


def test_ghz_z_outcome0():
    out, norm = measure_on_tree(build_ghz(3), MeasurementStep(1, z_basis(), 0))
    v = evaluate(out, 3).normalize()
    assert v.allclose(StateVector.basis("000"))
    assert norm == pytest.approx(1.0)


def test_ghz_x_outcome0():
    t = build_ghz(3)
    step = MeasurementStep(1, x_basis(), 0)
    out, _ = measure_on_tree(t, step)
    dense = dense_project(evaluate(t, 3), step, 0)
    assert np.allclose(evaluate(out, 3).amplitudes, dense.amplitudes)
    scalar, rest = strip(out, {1: x_basis()[0]})
    qs, vec = subtree_vector(rest)
    assert qs == (2, 3)
    assert np.allclose(scalar * vec, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_qubit_absent():
    with pytest.raises(TreeError):
        project_tree(parse_tree("[q1 1 0]"), 2, [1, 0])


def test_measure_needs_fixed_outcome():
    with pytest.raises(ValueError):
        measure_on_tree(build_ghz(2), MeasurementStep(1, z_basis()))


def test_random_trees_match_dense_projection():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        t = random_tree(range(1, n + 1), rng)
        q = int(rng.integers(1, n + 1))
        o = int(rng.integers(0, 2))
        step = MeasurementStep(q, random_basis(rng), o)
        out, norm = measure_on_tree(t, step)
        dense = dense_project(evaluate(t, n), step, o)
        got = np.zeros(1 << n) if out is None else evaluate(out, n).amplitudes
        scale = max(1.0, np.abs(dense.amplitudes).max())
        assert np.abs(got - dense.amplitudes).max() <= 1e-10 * scale
        assert norm == pytest.approx(np.sqrt(dense.norm_squared()), rel=1e-9, abs=1e-12)
        assert out is None or tree_size(out) <= tree_size(t)


@settings(max_examples=30)
@given(st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_branch_weights_complete(n, seed):
    rng = np.random.default_rng(seed)
    t = random_tree(range(1, n + 1), rng)
    v = evaluate(t, n)
    if v.norm_squared() < 1e-12:
        return
    step = MeasurementStep(int(rng.integers(1, n + 1)), random_basis(rng))
    total = sum(measure_on_tree(t, step.with_outcome(o))[1] ** 2 for o in (0, 1))
    assert total == pytest.approx(v.norm_squared(), rel=1e-9)


def test_zero_branches_are_pruned():
    t = parse_tree("(+ (x [q1 1 0] [q2 1 0]) (x [q1 0 1] [q2 0 1]))")
    out, _ = measure_on_tree(t, MeasurementStep(1, z_basis(), 1))
    assert tree_size(out) == 2
    assert measure_on_tree(parse_tree("(x [q1 1 0] [q2 1 0])"), MeasurementStep(1, z_basis(), 1))[0] is None


def test_ghz_all_z():
    n = 5
    steps = [MeasurementStep(q, z_basis()) for q in range(1, n + 1)]
    hist = run_pattern(build_ghz(n), steps, 4000, rng=1)
    assert set(hist) == {"0" * n, "1" * n}
    assert abs(hist["0" * n] / 4000 - 0.5) < 0.03


def test_cluster_x_chi_square():
    n = 8
    t = build_mps_tree(cluster_1d_tensors(n))
    steps = [MeasurementStep(q, x_basis()) for q in range(1, n + 1)]
    exact = dense_outcome_distribution(evaluate(t, n), steps)
    runs = 10_000
    hist = run_pattern(t, steps, runs, rng=2024)
    keys = sorted(exact)
    assert set(hist) <= set(keys)
    obs = np.array([hist.get(k, 0) for k in keys])
    exp = np.array([exact[k] for k in keys]) * runs
    assert chisquare(obs, exp).pvalue > 0.05


def test_few_outcome_total_variation():
    rng = np.random.default_rng(11)
    n = 6
    t = random_tree(range(1, n + 1), rng)
    steps = [MeasurementStep(q, random_basis(rng)) for q in (2, 4, 5)]
    exact = dense_outcome_distribution(evaluate(t, n), steps)
    runs = 10_000
    hist = run_pattern(t, steps, runs, rng=5)
    tv = 0.5 * sum(abs(hist.get(k, 0) / runs - exact.get(k, 0)) for k in set(exact) | set(hist))
    assert tv < 0.02


def test_replay_is_deterministic():
    rng = np.random.default_rng(0)
    t = random_tree(range(1, 7), rng)
    steps, rule = pattern_from_json(
        [{"qubit": 1, "basis": "X"}, {"qubit": 3, "basis": {"xy": 0.4}, "sign_from": [0]}, {"qubit": 6}]
    )
    a = simulate_pattern(t, steps, rng=42, feedforward=rule)
    b = simulate_pattern(t, steps, rng=42, feedforward=rule)
    assert a.to_json() == b.to_json()
    assert json.dumps(a.to_json())


def test_feedforward_adapts_angle():
    t = build_ghz(3)
    steps, rule = pattern_from_json(
        [{"qubit": 1, "basis": "Z", "outcome": 1}, {"qubit": 2, "basis": {"xy": 0.7}, "sign_from": [0]}]
    )
    tr = simulate_pattern(t, steps, rng=0, feedforward=rule)
    assert tr.outcomes[0] == 1
    assert np.allclose(tr.entries[1].step.basis[0], xy_basis(-0.7)[0])
    with pytest.raises(ValueError):
        pattern_from_json([{"qubit": 1, "basis": "Z", "sign_from": []}, {"qubit": 2, "basis": "Z", "sign_from": [0]}])


def test_repeated_qubit_rejected():
    with pytest.raises(ValueError):
        simulate_pattern(build_ghz(2), [MeasurementStep(1, z_basis()), MeasurementStep(1, x_basis())])


def test_trace_probabilities_and_norms():
    t = build_ghz(4)
    tr = simulate_pattern(t, [MeasurementStep(q, x_basis()) for q in range(1, 5)], rng=3)
    for e in tr.entries:
        assert 0 <= e.branch_norm2 <= 1 + 1e-12
    assert tr.entries[0].probability == pytest.approx(0.5)
    assert np.prod([e.probability for e in tr.entries]) == pytest.approx(tr.entries[-1].branch_norm2)


def test_postselection():
    steps = [MeasurementStep(1, z_basis(), 0), MeasurementStep(2, x_basis(), 1)]
    tr = simulate_pattern(build_ghz(3), steps, postselect=True)
    assert tr.outcomes == (0, 1)
    assert all(e.probability is None for e in tr.entries)
    dense = dense_project(dense_project(evaluate(build_ghz(3), 3), steps[0], 0), steps[1], 1)
    assert np.allclose(evaluate(tr.tree, 3).amplitudes, dense.amplitudes)
    with pytest.raises(ValueError):
        simulate_pattern(build_ghz(3), [MeasurementStep(1, z_basis())], postselect=True)


def test_strip_all_measured():
    t = build_ghz(2)
    for q in (1, 2):
        t, _ = measure_on_tree(t, MeasurementStep(q, z_basis(), 0))
    scalar, rest = strip(t, {1: np.array([1, 0]), 2: np.array([1, 0])})
    assert rest is None and scalar == pytest.approx(1)


def test_monotonicity_identical_states(rng):
    a = random_state(4, rng)
    rep = fidelity_monotonicity_check(a, a, MeasurementStep(2, random_basis(rng)))
    assert rep.holds and all(x == pytest.approx(1) for x in rep.branch_overlaps)
    assert sum(rep.weights_a) == pytest.approx(1)


def test_monotonicity_rotated_ghz():
    a = ghz_state(4)
    theta = np.arccos(0.99)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    b = apply_local_operators(a, [rot, np.eye(2), np.eye(2), np.eye(2)])
    assert abs(inner_product(a, b)) == pytest.approx(0.99)
    for q in range(1, 5):
        for basis in (z_basis(), x_basis(), xy_basis(0.3)):
            rep = fidelity_monotonicity_check(a, b, MeasurementStep(q, basis))
            assert rep.holds
            assert max(x for x in rep.branch_overlaps if x is not None) >= 0.99 - 1e-10


def test_monotonicity_random(rng):
    for _ in range(200):
        a, b = random_state(6, rng), random_state(6, rng)
        rep = fidelity_monotonicity_check(a, b, MeasurementStep(int(rng.integers(1, 7)), random_basis(rng)))
        assert rep.holds


def test_monotonicity_excludes_degenerate_branch():
    a = StateVector.basis("00")
    b = StateVector(2, np.array([0, 1, 1, 0]) / np.sqrt(2))
    rep = fidelity_monotonicity_check(a, b, MeasurementStep(1, z_basis()))
    assert rep.excluded == (1,) and rep.holds
    with pytest.raises(DimensionError):
        fidelity_monotonicity_check(a, ghz_state(3), MeasurementStep(1, z_basis()))


def test_cluster2d_small():
    assert np.allclose(cluster2d_state(1, 2).amplitudes, np.array([1, 1, 1, -1]) / 2)
    with pytest.raises(DimensionError):
        cluster2d_state(5, 5)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_cluster_row_matches_mps_tree(n):
    tree = evaluate(build_mps_tree(cluster_1d_tensors(n)), n).normalize()
    assert np.allclose(cluster2d_state(1, n).amplitudes, tree.amplitudes, atol=1e-12)


def test_cluster2d_stabilizers():
    rows, cols = 2, 3
    s = cluster2d_state(rows, cols)
    n = rows * cols
    for r in range(rows):
        for c in range(cols):
            letters = ["I"] * n
            letters[r * cols + c] = "X"
            for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    letters[rr * cols + cc] = "Z"
            assert PauliString("".join(letters)).apply(s).allclose(s)
