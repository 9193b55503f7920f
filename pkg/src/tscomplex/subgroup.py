"""Subgroup states, their stabilizer generators and entanglement witnesses.

A binary matrix ``A`` (``n/2 x n``) defines the subgroup ``S = ker A`` of
``GF(2)^n`` and the state ``|S>``, the uniform superposition over ``S``.
Column ``j`` of ``A`` acts on qubit ``j + 1``.

Pauli strings only ever contain I, X and Z, so applying one to a dense
vector is a bit flip (X part) followed by a sign (Z part); no matrices are
built except for the small dense PSD check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DimensionError, StateVector, inner_product
from .gf2 import BitMatrix, gf2_kernel_basis, gf2_rank, independent_rows

MAX_SUBGROUP_QUBITS = 20
MAX_PSD_QUBITS = 10
STABILIZE_TOL = 1e-10


@dataclass(frozen=True)
class SubgroupSpec:
    A: BitMatrix

    def __post_init__(self):
        if self.A.cols % 2:
            raise DimensionError(f"subgroup matrices need an even number of columns, got {self.A.cols}")
        if 2 * self.A.rows != self.A.cols:
            raise DimensionError(f"expected an n/2 x n matrix, got {self.A.rows}x{self.A.cols}")

    @property
    def n(self) -> int:
        return self.A.cols

    @classmethod
    def load(cls, path: str | Path) -> SubgroupSpec:
        return cls(BitMatrix.load(path))


def _kernel_indices(a: BitMatrix) -> np.ndarray:
    """Basis indices (qubit 1 = most significant bit) of every ``x`` with ``A x = 0``."""
    n = a.cols
    idx = np.zeros(1, dtype=np.int64)
    for v in gf2_kernel_basis(a):
        b = sum(1 << (n - 1 - j) for j in np.flatnonzero(v))
        idx = np.concatenate([idx, idx ^ b])
    return idx


def subgroup_state(spec: SubgroupSpec) -> StateVector:
    n = spec.n
    if n > MAX_SUBGROUP_QUBITS:
        raise DimensionError(f"dense subgroup states are limited to n <= {MAX_SUBGROUP_QUBITS}, got {n}")
    idx = _kernel_indices(spec.A)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[idx] = 1 / math.sqrt(idx.size)
    return StateVector(n, amps, normalized=True)


def subgroup_size(spec: SubgroupSpec) -> int:
    return 1 << (spec.n - gf2_rank(spec.A))


# ------------------------------------------------------------------ Jacobsthal


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, math.isqrt(q) + 1))


def quadratic_character(a: int, q: int) -> int:
    """1 if ``a`` is a nonzero square mod ``q``, else 0 (so ``chi(0) = 0``)."""
    if not is_prime(q):
        raise ValueError(f"q={q} is not prime")
    if not 0 <= a < q:
        raise ValueError(f"a={a} outside 0..{q - 1}")
    if a == 0:
        return 0
    # Euler's criterion; q = 2 has 1 as its only nonzero element
    return int(q == 2 or pow(a, (q - 1) // 2, q) == 1)


def jacobsthal_subgroup(q: int) -> SubgroupSpec:
    """``A = (I | Q)`` with ``Q[i, j] = chi((i - j) mod q)``, for ``n = 2q`` qubits."""
    if not is_prime(q) or q % 8 != 3:
        raise ValueError(f"the Jacobsthal construction needs q prime with q = 3 mod 8, got q={q}")
    chi = np.array([quadratic_character(a, q) for a in range(q)], dtype=np.uint8)
    i, j = np.indices((q, q))
    return SubgroupSpec(BitMatrix.from_array(np.hstack([np.eye(q, dtype=np.uint8), chi[(i - j) % q]])))


# ---------------------------------------------------------------- Pauli strings


@dataclass(frozen=True)
class PauliString:
    """Tensor product of I, X and Z with an overall sign; ``letters[0]`` acts on qubit 1."""

    letters: str
    sign: int = 1

    def __post_init__(self):
        if set(self.letters) - set("IXZ"):
            raise ValueError(f"Pauli letters must be I, X or Z, got {self.letters!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.letters

    @classmethod
    def parse(cls, text: str) -> PauliString:
        text = text.strip()
        sign = 1
        if text[:1] in "+-" and text:
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        return cls(text, sign)

    def _mask(self, letter: str) -> int:
        n = self.n
        return sum(1 << (n - 1 - k) for k, ch in enumerate(self.letters) if ch == letter)

    @property
    def x_mask(self) -> int:
        return self._mask("X")

    @property
    def z_mask(self) -> int:
        return self._mask("Z")

    def commutes(self, other: PauliString) -> bool:
        if other.n != self.n:
            raise DimensionError("Pauli strings of different lengths")
        clash = (self.x_mask & other.z_mask).bit_count() + (self.z_mask & other.x_mask).bit_count()
        return clash % 2 == 0

    def apply(self, s: StateVector) -> StateVector:
        if s.n_qubits != self.n:
            raise DimensionError(f"{self.n}-qubit Pauli string on a {s.n_qubits}-qubit state")
        idx = np.arange(1 << self.n)
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & self.z_mask) & 1)
        out = np.empty_like(s.amplitudes)
        out[idx ^ self.x_mask] = self.sign * signs * s.amplitudes
        return StateVector(self.n, out)

    def expectation(self, s: StateVector) -> float:
        """``<s|P|s>`` for a normalized ``s`` (real since P is Hermitian)."""
        return inner_product(s, self.apply(s)).real

    def to_matrix(self) -> np.ndarray:
        m = np.array([[self.sign]], dtype=np.complex128)
        mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Z": np.diag([1, -1])}
        for ch in self.letters:
            m = np.kron(m, mats[ch])
        return m


def derive_generators(spec: SubgroupSpec | BitMatrix) -> list[PauliString]:
    """Z strings from the first independent rows of ``A``, X strings from a kernel basis."""
    a = spec.A if isinstance(spec, SubgroupSpec) else spec
    arr = a.to_array()
    gens = [PauliString("".join("Z" if b else "I" for b in arr[i])) for i in independent_rows(a)]
    gens += [PauliString("".join("X" if b else "I" for b in v)) for v in gf2_kernel_basis(a)]
    return gens


def check_stabilizes(gens, s: StateVector, tol: float = STABILIZE_TOL) -> bool:
    for g in gens:
        if g.n != s.n_qubits:
            raise DimensionError(f"{g.n}-qubit generator on a {s.n_qubits}-qubit state")
        if not np.allclose(g.apply(s).amplitudes, s.amplitudes, rtol=0.0, atol=tol):
            return False
    return True


# -------------------------------------------------------------------- witnesses


def witness_exact(s: StateVector, target: StateVector) -> float:
    """``<s|W|s>`` with ``W = 1/2 - |target><target|`` (both states normalized)."""
    if s.n_qubits != target.n_qubits:
        raise DimensionError(f"{s.n_qubits}- vs {target.n_qubits}-qubit states")
    return 0.5 - abs(inner_product(target, s)) ** 2


def _require_normalized(s: StateVector) -> None:
    if abs(s.norm_squared() - 1.0) > 1e-10:
        raise ValueError(f"witness needs a normalized state, got norm^2 {s.norm_squared():.6g}")


def _check_gens(gens, s: StateVector) -> None:
    if len(gens) != s.n_qubits:
        raise DimensionError(f"need {s.n_qubits} generators, got {len(gens)}")


def witness_stabilizer(gens, s: StateVector) -> float:
    """``<s|W'|s>`` with ``W' = (n - 1) - sum_i g_i``."""
    _check_gens(gens, s)
    _require_normalized(s)
    return (s.n_qubits - 1) - sum(g.expectation(s) for g in gens)


def detection_threshold(n: int) -> float:
    """Overlap squared above which ``W'`` is guaranteed negative."""
    if n < 1:
        raise ValueError("n must be positive")
    return 1 - 1 / (2 * n)


def required_shots(n: int, alpha: float) -> int:
    """Shots per generator so that ``n * dg <= 1 - alpha`` when ``dg = 1/sqrt(shots)``.

    ``1/sqrt(shots)`` bounds the standard error of a +-1 mean whatever its value.
    """
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    return math.ceil((n / (1 - alpha)) ** 2 - 1e-9)


@dataclass(frozen=True)
class WitnessReading:
    value: float
    means: tuple[float, ...] = field(repr=False)
    shots: int
    std_error: float

    def to_json(self) -> dict:
        return {"value": self.value, "means": list(self.means), "shots": self.shots, "std_error": self.std_error}


def sample_witness(gens, s: StateVector, shots_per_generator: int, rng) -> WitnessReading:
    """Estimate ``<W'>`` from ideal projective measurements of each generator."""
    if shots_per_generator < 1:
        raise ValueError("shots_per_generator must be at least 1")
    _check_gens(gens, s)
    _require_normalized(s)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    streams = rng.spawn(len(gens))
    means = []
    for g, gen_rng in zip(gens, streams):
        p_plus = min(1.0, max(0.0, (1 + g.expectation(s)) / 2))
        k = gen_rng.binomial(shots_per_generator, p_plus)
        means.append(2 * k / shots_per_generator - 1)
    m = np.array(means)
    n = s.n_qubits
    err = n * float(np.sqrt((1 - m**2) / shots_per_generator).max())
    return WitnessReading(float((n - 1) - m.sum()), tuple(means), shots_per_generator, err)


def psd_gap_check(gens, target: StateVector) -> float:
    """Smallest eigenvalue of ``W' - 2W`` by dense diagonalization."""
    n = target.n_qubits
    if n > MAX_PSD_QUBITS:
        raise DimensionError(f"dense PSD check limited to n <= {MAX_PSD_QUBITS}, got {n}")
    _check_gens(gens, target)
    dim = 1 << n
    w_prime = (n - 1) * np.eye(dim) - sum(g.to_matrix() for g in gens)
    t = target.amplitudes / np.sqrt(target.norm_squared())
    w = 0.5 * np.eye(dim) - np.outer(t, t.conj())
    return float(np.linalg.eigvalsh(w_prime - 2 * w).min())
