"""Dense statevectors, equal bipartitions and rank over the complex numbers.

Bit convention used everywhere in the package: qubits are numbered 1..n and
qubit 1 is the most significant bit of the basis index, so the index ``x``
reads as the bit string ``x_1 x_2 ... x_n``.  Bipartition masks and GF(2)
column masks are indexed the other way round: bit ``i - 1`` of a mask refers
to qubit ``i`` (equivalently column ``i - 1`` of a binary matrix acting on
the qubits).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_RANK_TOL = 1e-9
NORM_TOL = 1e-12
MAX_DENSE_QUBITS = 24


class DimensionError(ValueError):
    """Raised when qubit counts or matrix shapes do not line up."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Computational-basis amplitudes of an ``n_qubits`` pure state.

    Normalization is tracked, not enforced: ``normalized=True`` is a promise
    checked at construction, while unnormalized vectors are perfectly legal.
    """

    n_qubits: int
    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        if self.n_qubits < 0 or self.n_qubits > MAX_DENSE_QUBITS:
            raise DimensionError(f"n_qubits={self.n_qubits} outside 0..{MAX_DENSE_QUBITS}")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 1 << self.n_qubits:
            raise DimensionError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.shape[0]}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.normalized and abs(self.norm_squared() - 1.0) > NORM_TOL:
            raise ValueError(f"state flagged normalized but has norm^2 {self.norm_squared()!r}")

    @classmethod
    def basis(cls, bits: str) -> StateVector:
        """The basis state ``|bits>``, e.g. ``StateVector.basis("010")``."""
        n = len(bits)
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(n, amps, normalized=True)

    @classmethod
    def from_dict(cls, n: int, terms: dict[str, complex]) -> StateVector:
        amps = np.zeros(1 << n, dtype=np.complex128)
        for bits, c in terms.items():
            if len(bits) != n:
                raise DimensionError(f"basis label {bits!r} is not {n} bits long")
            amps[int(bits, 2)] += c
        return cls(n, amps)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalize(self) -> StateVector:
        nrm = np.sqrt(self.norm_squared())
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.n_qubits, self.amplitudes / nrm, normalized=True)

    def amplitude(self, bits: str) -> complex:
        return complex(self.amplitudes[int(bits, 2)])

    def allclose(self, other: StateVector, atol: float = 1e-10) -> bool:
        return self.n_qubits == other.n_qubits and np.allclose(
            self.amplitudes, other.amplitudes, rtol=0.0, atol=atol
        )

    # --- JSON file format: {"n_qubits": n, "amplitudes": [[re, im], ...]} ---

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "amplitudes": [[float(c.real), float(c.imag)] for c in self.amplitudes],
        }

    @classmethod
    def from_json(cls, data: dict) -> StateVector:
        try:
            n = int(data["n_qubits"])
            pairs = data["amplitudes"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed state JSON: {exc}") from None
        amps = np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
        return cls(n, amps)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path: str | Path) -> StateVector:
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Bipartition:
    """Split of qubits ``1..n`` into a Y side (``y_mask``) and a Z side.

    Bit ``i - 1`` of ``y_mask`` set means qubit ``i`` is on the Y side.
    """

    n: int
    y_mask: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a bipartition needs at least one qubit")
        if not 0 <= self.y_mask < (1 << self.n):
            raise ValueError(f"y_mask {self.y_mask:#x} out of range for n={self.n}")

    @classmethod
    def from_qubits(cls, n: int, y_qubits) -> Bipartition:
        mask = 0
        for q in y_qubits:
            if not 1 <= q <= n:
                raise ValueError(f"qubit {q} not in 1..{n}")
            mask |= 1 << (q - 1)
        return cls(n, mask)

    @property
    def z_mask(self) -> int:
        return ((1 << self.n) - 1) ^ self.y_mask

    @property
    def y_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in range(1, self.n + 1) if self.y_mask >> (q - 1) & 1)

    @property
    def z_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in range(1, self.n + 1) if not self.y_mask >> (q - 1) & 1)

    @property
    def is_equal(self) -> bool:
        return self.n % 2 == 0 and self.y_mask.bit_count() == self.n // 2

    def swapped(self) -> Bipartition:
        return Bipartition(self.n, self.z_mask)


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    rows: int
    cols: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.complex128).reshape(self.rows, self.cols)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def of(cls, array) -> ComplexMatrix:
        arr = np.asarray(array, dtype=np.complex128)
        if arr.ndim != 2:
            raise DimensionError("ComplexMatrix needs a 2-D array")
        return cls(arr.shape[0], arr.shape[1], arr)

    def to_array(self) -> np.ndarray:
        return self.entries.copy()


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"inner product of {a.n_qubits}- and {b.n_qubits}-qubit states")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>| / (|a| |b|)``."""
    return abs(inner_product(a, b)) / np.sqrt(a.norm_squared() * b.norm_squared())


def _axes(p: Bipartition) -> tuple[list[int], list[int]]:
    # tensor axis k holds qubit k + 1 because qubit 1 is the leading (most significant) axis
    return [q - 1 for q in p.y_qubits], [q - 1 for q in p.z_qubits]


def coefficient_matrix(s: StateVector, p: Bipartition) -> ComplexMatrix:
    """Amplitudes rearranged as a ``2^|Y| x 2^|Z|`` matrix.

    Row index ``y`` and column index ``z`` are bit strings over the Y and Z
    qubits in ascending qubit order, so ``M[y, z]`` is the amplitude of the
    basis string obtained by scattering ``y`` and ``z`` back into place.
    Unequal bipartitions are allowed; the Raz estimators only ever pass equal ones.
    """
    if s.n_qubits != p.n:
        raise DimensionError(f"state has {s.n_qubits} qubits, bipartition {p.n}")
    ys, zs = _axes(p)
    tensor = s.amplitudes.reshape((2,) * s.n_qubits)
    m = np.transpose(tensor, ys + zs).reshape(1 << len(ys), 1 << len(zs))
    return ComplexMatrix.of(m)


def state_from_coefficient_matrix(m: ComplexMatrix | np.ndarray, p: Bipartition) -> StateVector:
    """Inverse of :func:`coefficient_matrix`."""
    arr = m.entries if isinstance(m, ComplexMatrix) else np.asarray(m, dtype=np.complex128)
    ys, zs = _axes(p)
    if arr.shape != (1 << len(ys), 1 << len(zs)):
        raise DimensionError(f"matrix shape {arr.shape} does not fit the bipartition")
    tensor = arr.reshape((2,) * p.n)
    inv = np.argsort(ys + zs)
    return StateVector(p.n, np.transpose(tensor, inv).reshape(-1))


def complex_rank(m: ComplexMatrix | np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Rank by Gaussian elimination with partial pivoting.

    A pivot counts when its magnitude exceeds ``tol`` times the largest entry
    magnitude of the input.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.array(m.entries if isinstance(m, ComplexMatrix) else m, dtype=np.complex128)
    if a.size == 0:
        return 0
    scale = np.abs(a).max()
    if scale == 0.0:
        return 0
    cutoff = tol * scale
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        col = np.abs(a[rank:, c])
        piv = int(np.argmax(col))
        if col[piv] <= cutoff:
            continue
        piv += rank
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        below = a[rank + 1 :, c] / a[rank, c]
        a[rank + 1 :, c:] -= np.outer(below, a[rank, c:])
        rank += 1
    return rank


def schmidt_rank(s: StateVector, p: Bipartition, tol: float = DEFAULT_RANK_TOL) -> int:
    return complex_rank(coefficient_matrix(s, p), tol)


def random_equal_bipartition(n: int, rng: np.random.Generator) -> Bipartition:
    """Uniform ``(n/2, n/2)`` bipartition by a partial Fisher-Yates shuffle."""
    if n < 2 or n % 2:
        raise ValueError(f"equal bipartitions need an even n >= 2, got {n}")
    idx = list(range(n))
    mask = 0
    for i in range(n // 2):
        j = int(rng.integers(i, n))
        idx[i], idx[j] = idx[j], idx[i]
        mask |= 1 << idx[i]
    return Bipartition(n, mask)


def apply_local_operators(s: StateVector, ops) -> StateVector:
    """``(A_1 x ... x A_n) |s>`` for a sequence of 2x2 matrices, ``ops[i]`` on qubit ``i + 1``."""
    if len(ops) != s.n_qubits:
        raise DimensionError(f"need {s.n_qubits} local operators, got {len(ops)}")
    t = s.amplitudes.reshape((2,) * s.n_qubits)
    for k, op in enumerate(ops):
        t = np.moveaxis(np.tensordot(np.asarray(op, dtype=np.complex128), t, axes=([1], [k])), 0, k)
    return StateVector(s.n_qubits, t.reshape(-1))


def product_state(vectors) -> StateVector:
    amps = np.ones(1, dtype=np.complex128)
    for v in vectors:
        amps = np.kron(amps, np.asarray(v, dtype=np.complex128))
    return StateVector(len(vectors), amps)


def ghz_state(n: int) -> StateVector:
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return StateVector(n, amps, normalized=True)


def dicke_state(n: int, k: int) -> StateVector:
    """Normalized uniform superposition of all weight-``k`` strings."""
    idx = np.arange(1 << n)
    amps = (np.bitwise_count(idx) == k).astype(np.complex128)
    return StateVector(n, amps).normalize()


def w_state(n: int) -> StateVector:
    return dicke_state(n, 1)
