"""Families of states with large tree size.

* immanant states ``sum_x Imm(M(x)) |x>`` where ``M(x)`` arranges an
  ``m^2``-bit string row by row (``M(x)[i, j] = x[m*i + j]``, zero based);
* Deutsch-Jozsa states ``sum_x (-1)^f(x) |x>``;
* ``|pZ>``, the uniform superposition over multiples of ``p``, and the
  Shor state whose first register collapses to it.

Basis strings follow the package convention: qubit 1 is the most
significant bit of the index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .core import DimensionError, StateVector
from .tree import Leaf, Prod, Sum, TreeNode

MAX_RYSER = 20
MAX_IMMANANT = 7
CHUNK_SUBSETS = 1 << 14


# ------------------------------------------------------------------ permanents


def _square(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def permanent_ryser(m) -> complex:
    """Permanent via Ryser's inclusion-exclusion over column subsets."""
    a = _square(m)
    k = a.shape[0]
    if k == 0:
        return 1.0 + 0j
    if k > MAX_RYSER:
        raise DimensionError(f"Ryser permanent limited to m <= {MAX_RYSER}, got {k}")
    total = 0j
    bits = np.arange(k)
    for start in range(1, 1 << k, CHUNK_SUBSETS):
        subsets = np.arange(start, min(start + CHUNK_SUBSETS, 1 << k))
        sel = ((subsets[:, None] >> bits) & 1).astype(np.float64)  # (chunk, k)
        row_sums = a @ sel.T  # (k, chunk)
        signs = np.where((k - np.bitwise_count(subsets).astype(np.int64)) % 2, -1.0, 1.0)
        total += complex(np.dot(signs, row_sums.prod(axis=0)))
    return total


def permutation_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def permanent_coefficients(m: int) -> dict[tuple[int, ...], complex]:
    return {p: 1.0 for p in permutations(range(m))}


def determinant_coefficients(m: int) -> dict[tuple[int, ...], complex]:
    return {p: float(permutation_sign(p)) for p in permutations(range(m))}


def immanant(m, coeffs: dict[tuple[int, ...], complex]) -> complex:
    """``sum_sigma c_sigma prod_i M[i, sigma(i)]`` by brute force over ``S_m``."""
    a = _square(m)
    k = a.shape[0]
    if k > MAX_IMMANANT:
        raise DimensionError(f"brute-force immanant limited to m <= {MAX_IMMANANT}, got {k}")
    total = 0j
    rows = np.arange(k)
    for perm in permutations(range(k)):
        if perm not in coeffs:
            raise KeyError(f"missing immanant coefficient for permutation {perm}")
        total += coeffs[perm] * a[rows, list(perm)].prod()
    return total


def arrangement(x: int, m: int) -> np.ndarray:
    """``M(x)`` for the basis index ``x`` of an ``m^2``-qubit register."""
    n = m * m
    bits = (x >> (n - 1 - np.arange(n))) & 1
    return bits.reshape(m, m)


def immanant_state(m: int, coeffs: dict | str = "permanent") -> StateVector:
    """Normalized ``sum_x Imm(M(x)) |x>`` on ``m^2`` qubits."""
    if m not in (1, 2, 3):
        raise DimensionError(f"dense immanant states need m <= 3, got {m}")
    if coeffs == "permanent":
        coeffs = permanent_coefficients(m)
    elif coeffs == "determinant":
        coeffs = determinant_coefficients(m)
    n = m * m
    amps = np.array([immanant(arrangement(x, m), coeffs) for x in range(1 << n)])
    return StateVector(n, amps).normalize()


def permanent_state_tree(m: int) -> TreeNode:
    """Tree for the unnormalized permanent state, one product branch per Ryser subset.

    For a column subset ``S`` row ``i`` contributes
    ``sum_{x_i} (sum_{j in S} x_ij) |x_i> = sum_{j in S} |1>_j (|0> + |1>)^(rest)``;
    the sign ``(-1)^(m - |S|)`` is folded into the first factor of every
    term of row 0.  Size ``m^3 2^(m-1)``.
    """
    if not 2 <= m <= 4:
        raise DimensionError(f"permanent_state_tree supports 2 <= m <= 4, got {m}")
    branches = []
    for mask in range(1, 1 << m):
        cols = [j for j in range(m) if mask >> j & 1]
        sign = -1 if (m - len(cols)) % 2 else 1
        rows = []
        for i in range(m):
            terms = []
            for j in cols:
                factors = []
                for k in range(m):
                    a0, a1 = (0, 1) if k == j else (1, 1)
                    if i == 0 and k == 0:
                        a0, a1 = sign * a0, sign * a1
                    factors.append(Leaf(m * i + k + 1, a0, a1))
                terms.append(Prod(tuple(factors)))
            rows.append(terms[0] if len(terms) == 1 else Sum(tuple(terms)))
        branches.append(Prod(tuple(rows)))
    return Sum(tuple(branches))


# ------------------------------------------------------------- Deutsch-Jozsa


@dataclass(frozen=True, eq=False)
class BalancedFunction:
    """``f: {0,1}^n -> {0,1}`` given by the sorted basis indices mapped to 1."""

    n: int
    ones: np.ndarray

    def __post_init__(self):
        ones = np.unique(np.asarray(self.ones, dtype=np.int64))
        if ones.size != 1 << (self.n - 1) or ones.size and (ones[0] < 0 or ones[-1] >= 1 << self.n):
            raise ValueError(f"a balanced function on {self.n} bits maps exactly {1 << (self.n - 1)} inputs to 1")
        ones.setflags(write=False)
        object.__setattr__(self, "ones", ones)

    def truth_table(self) -> np.ndarray:
        t = np.zeros(1 << self.n, dtype=np.uint8)
        t[self.ones] = 1
        return t

    def __eq__(self, other):
        return isinstance(other, BalancedFunction) and self.n == other.n and np.array_equal(self.ones, other.ones)


@dataclass(frozen=True)
class ConstantFunction:
    n: int
    value: int = 0

    def truth_table(self) -> np.ndarray:
        return np.full(1 << self.n, self.value & 1, dtype=np.uint8)


def random_balanced_function(n: int, rng: np.random.Generator) -> BalancedFunction:
    if not 1 <= n <= 20:
        raise ValueError(f"balanced functions supported for 1 <= n <= 20, got {n}")
    return BalancedFunction(n, rng.permutation(1 << n)[: 1 << (n - 1)])


def dj_state(f: BalancedFunction | ConstantFunction) -> StateVector:
    if f.n > 20:
        raise DimensionError(f"dense states limited to n <= 20, got {f.n}")
    signs = 1.0 - 2.0 * f.truth_table()
    return StateVector(f.n, signs * 2.0 ** (-f.n / 2), normalized=True)


# -------------------------------------------------------------------- Shor


def pz_state(n: int, p: int) -> StateVector:
    """Uniform superposition over ``0, p, 2p, ...`` below ``2^n``."""
    if not 1 <= n <= 20:
        raise DimensionError(f"n must lie in 1..20, got {n}")
    if not 1 <= p < 1 << n:
        raise ValueError(f"p must satisfy 1 <= p < 2^n, got p={p}")
    count = (((1 << n) - 1) // p) + 1
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[np.arange(count) * p] = 1 / math.sqrt(count)
    return StateVector(n, amps, normalized=True)


def multiplicative_order(s: int, modulus: int) -> int:
    if math.gcd(s, modulus) != 1:
        raise ValueError(f"gcd({s}, {modulus}) != 1")
    if modulus == 1:
        return 1
    k, v = 1, s % modulus
    while v != 1:
        v = v * s % modulus
        k += 1
    return k


def shor_state(n: int, s: int, modulus: int) -> StateVector:
    """``2^(-n/2) sum_r |r>|s^r mod N>`` on two ``n``-qubit registers."""
    if math.gcd(s, modulus) != 1:
        raise ValueError(f"gcd({s}, {modulus}) != 1")
    if not 2 <= modulus <= 1 << n:
        raise ValueError(f"N={modulus} does not fit an {n}-qubit register")
    if 2 * n > 20:
        raise DimensionError(f"dense Shor state limited to 2n <= 20, got {2 * n}")
    r = np.arange(1 << n)
    values = np.array([pow(s, int(k), modulus) for k in r])
    amps = np.zeros(1 << (2 * n), dtype=np.complex128)
    amps[(r << n) | values] = 2.0 ** (-n / 2)
    return StateVector(2 * n, amps, normalized=True)


def register2_marginal(state: StateVector, n: int) -> np.ndarray:
    """Outcome probabilities of measuring the second ``n``-qubit register."""
    probs = np.abs(state.amplitudes.reshape(1 << (state.n_qubits - n), 1 << n)) ** 2
    return probs.sum(axis=0)


def postselect_register2(state: StateVector, n: int, outcome: int = 1) -> StateVector:
    """First-register state after reading ``outcome`` on the second register."""
    block = state.amplitudes.reshape(1 << (state.n_qubits - n), 1 << n)[:, outcome]
    if not np.any(block):
        raise ValueError(f"outcome {outcome} has probability zero")
    return StateVector(state.n_qubits - n, block).normalize()
