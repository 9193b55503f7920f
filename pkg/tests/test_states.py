import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tscomplex.core import Bipartition, DimensionError, coefficient_matrix
from tscomplex.states import (
    BalancedFunction,
    ConstantFunction,
    arrangement,
    determinant_coefficients,
    dj_state,
    immanant,
    immanant_state,
    multiplicative_order,
    permanent_coefficients,
    permanent_ryser,
    permanent_state_tree,
    permutation_sign,
    postselect_register2,
    pz_state,
    random_balanced_function,
    register2_marginal,
    shor_state,
)
from tscomplex.tree import evaluate, tree_size


def brute_permanent(a):
    k = a.shape[0]
    return sum(np.prod([a[i, p[i]] for i in range(k)]) for p in itertools.permutations(range(k)))


def test_permanent_examples():
    assert permanent_ryser(np.ones((2, 2))) == 2
    assert permanent_ryser(np.eye(3)) == 1
    assert permanent_ryser(np.ones((4, 4))) == pytest.approx(24)
    with pytest.raises(DimensionError):
        permanent_ryser(np.ones((2, 3)))


@pytest.mark.parametrize("m", range(1, 8))
def test_ryser_matches_brute_force(m):
    rng = np.random.default_rng(m)
    for _ in range(100 if m <= 6 else 10):
        a = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        bf = brute_permanent(a)
        assert abs(permanent_ryser(a) - bf) <= 1e-10 * max(1.0, abs(bf))


def test_ryser_chunking():
    # more subsets than one chunk
    a = np.ones((15, 15)) / 2
    assert permanent_ryser(a) == pytest.approx(math.factorial(15) / 2**15, rel=1e-9)


def test_permutation_sign():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((1, 2, 0)) == 1


def test_immanant_specializations():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert immanant(a, permanent_coefficients(5)) == pytest.approx(permanent_ryser(a))
    assert immanant(a, determinant_coefficients(5)) == pytest.approx(np.linalg.det(a))
    assert immanant([[3.0]], {(0,): 2j}) == 6j
    with pytest.raises(KeyError):
        immanant(a, {})


def test_arrangement_row_major():
    # x = 0100 : M = [[0, 1], [0, 0]]
    assert arrangement(0b0100, 2).tolist() == [[0, 1], [0, 0]]


def test_permanent_state_m2():
    s = immanant_state(2, "permanent")
    assert s.amplitude("1111") / s.amplitude("0110") == pytest.approx(2)
    assert s.amplitude("0100") == 0
    d = immanant_state(2, "determinant")
    assert d.amplitude("1111") == 0


def test_zero_row_gives_zero_amplitude():
    p, d = immanant_state(3, "permanent"), immanant_state(3, "determinant")
    for x in range(1 << 9):
        if (arrangement(x, 3).sum(axis=1) == 0).any():
            assert p.amplitudes[x] == 0 and d.amplitudes[x] == 0


def test_immanant_state_limit():
    with pytest.raises(DimensionError):
        immanant_state(4)


@pytest.mark.parametrize("m", [2, 3])
def test_permanent_tree(m):
    t = permanent_state_tree(m)
    n = m * m
    assert tree_size(t) <= n**1.5 * 2**m
    v = evaluate(t, n)
    assert np.allclose(v.normalize().amplitudes, immanant_state(m).amplitudes, atol=1e-12)


def test_permanent_tree_m4():
    t = permanent_state_tree(4)
    assert tree_size(t) == 4**3 * 2**3 <= 16**1.5 * 2**4
    v = evaluate(t, 16).amplitudes
    rng = np.random.default_rng(0)
    for x in rng.integers(0, 1 << 16, size=50):
        assert v[x] == pytest.approx(permanent_ryser(arrangement(int(x), 4)))


def test_balanced_function():
    rng = np.random.default_rng(0)
    f = random_balanced_function(6, rng)
    assert f.truth_table().sum() == 32
    assert f == random_balanced_function(6, np.random.default_rng(0))
    with pytest.raises(ValueError):
        BalancedFunction(2, [0])


def test_balanced_function_uniform_n2():
    rng = np.random.default_rng(1)
    counts: dict = {}
    for _ in range(100_000):
        key = tuple(random_balanced_function(2, rng).ones)
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == math.comb(4, 2)
    assert all(abs(c / 100_000 - 1 / 6) < 0.01 for c in counts.values())


def test_dj_states():
    s = dj_state(ConstantFunction(5, 0))
    assert np.allclose(s.amplitudes, 2**-2.5)
    f = random_balanced_function(6, np.random.default_rng(2))
    assert dj_state(f).amplitudes.sum() * 2**3 == pytest.approx(0)


@settings(max_examples=20)
@given(st.integers(1, 6).map(lambda h: 2 * h), st.integers(0, 2**31 - 1))
def test_dj_coefficient_matrix_is_balanced_pm1(n, seed):
    rng = np.random.default_rng(seed)
    f = random_balanced_function(n, rng)
    ys = rng.choice(np.arange(1, n + 1), size=n // 2, replace=False)
    p = Bipartition.from_qubits(n, ys)
    m = coefficient_matrix(dj_state(f), p).entries * 2 ** (n / 2)
    assert np.allclose(np.abs(m), 1) and m.real.sum() == pytest.approx(0)
    # entries are (-1)^f(y, z) with y, z scattered back into place
    table = f.truth_table().astype(int)
    y_list, z_list = p.y_qubits, p.z_qubits
    for r in range(m.shape[0]):
        for c in range(m.shape[1]):
            x = 0
            for k, q in enumerate(y_list):
                x |= ((r >> (len(y_list) - 1 - k)) & 1) << (n - q)
            for k, q in enumerate(z_list):
                x |= ((c >> (len(z_list) - 1 - k)) & 1) << (n - q)
            assert m[r, c].real == pytest.approx((-1) ** table[x])


def test_pz_examples():
    assert np.allclose(pz_state(3, 1).amplitudes, 8**-0.5)
    assert np.flatnonzero(pz_state(4, 8).amplitudes).tolist() == [0, 8]
    assert np.flatnonzero(pz_state(4, 3).amplitudes).tolist() == [0, 3, 6, 9, 12, 15]
    with pytest.raises(ValueError):
        pz_state(3, 8)


@given(st.integers(1, 10), st.data())
def test_pz_support_count(n, data):
    p = data.draw(st.integers(1, (1 << n) - 1))
    s = pz_state(n, p)
    nz = s.amplitudes[np.abs(s.amplitudes) > 0]
    assert nz.size == ((1 << n) - 1) // p + 1
    assert np.allclose(nz, nz[0]) and s.norm_squared() == pytest.approx(1)


def test_multiplicative_order():
    assert multiplicative_order(2, 15) == 4
    assert multiplicative_order(7, 15) == 4
    assert multiplicative_order(1, 9) == 1
    with pytest.raises(ValueError):
        multiplicative_order(3, 15)


def test_shor_examples():
    s = shor_state(4, 1, 15)
    assert np.allclose(register2_marginal(s, 4), np.eye(16)[1])
    assert np.allclose(postselect_register2(s, 4).amplitudes, 0.25)
    s = shor_state(4, 2, 15)
    post = postselect_register2(s, 4)
    assert np.flatnonzero(np.abs(post.amplitudes) > 0).tolist() == [0, 4, 8, 12]
    assert post.allclose(pz_state(4, multiplicative_order(2, 15)))
    marg = register2_marginal(s, 4)
    assert np.flatnonzero(marg > 0).tolist() == sorted({pow(2, r, 15) for r in range(4)})
    assert np.allclose(marg[marg > 0], 0.25)
    with pytest.raises(ValueError):
        shor_state(4, 5, 15)
    with pytest.raises(ValueError):
        postselect_register2(s, 4, outcome=3)


@pytest.mark.parametrize("s_,N", [(2, 15), (7, 15), (2, 9), (4, 11), (3, 16)])
def test_shor_postselection_is_pz(s_, N):
    n = max(4, math.ceil(math.log2(N)))
    post = postselect_register2(shor_state(n, s_, N), n)
    assert post.allclose(pz_state(n, multiplicative_order(s_, N)))
