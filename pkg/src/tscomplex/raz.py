"""Monte Carlo estimators around the rank criterion for large tree size.

Every estimator draws uniform equal bipartitions (with replacement) and
counts how often a rank condition holds.  Samples are processed in chunks
of :data:`CHUNK` draws; chunk ``k`` owns the ``k``-th child of
``SeedSequence(seed)``, so a report depends only on ``(seed, samples)`` and
never on the number of worker threads (``TSCOMPLEX_THREADS``).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import Bipartition, DimensionError, StateVector, schmidt_rank
from .gf2 import pack_bits, gf2_rank_batch
from .subgroup import SubgroupSpec

CHUNK = 256
Z95 = 1.959963984540054
MAX_STATE_QUBITS = 20
MAX_BALANCED_DIM = 256


@dataclass(frozen=True)
class EstimateReport:
    samples: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    threshold_log2: float
    seed: int
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def wilson_interval(successes: int, samples: int, z: float = Z95) -> tuple[float, float]:
    if samples < 1:
        raise ValueError("need at least one sample")
    p = successes / samples
    denom = 1 + z * z / samples
    centre = (p + z * z / (2 * samples)) / denom
    half = z * math.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples)) / denom
    # clamp so that the interval always contains p_hat despite rounding
    return min(p, max(0.0, centre - half)), max(p, min(1.0, centre + half))


def raz_threshold_log2(n: int) -> float:
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and at least 2, got {n}")
    return (n - n ** 0.125) / 2


def mu_n(n: int) -> float:
    """``2^(-(n/2)^(1/8) / 2)``, the overlap scale in the approximate-size bound."""
    return 2.0 ** (-((n / 2) ** 0.125) / 2)


def _workers() -> int:
    env = os.environ.get("TSCOMPLEX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"TSCOMPLEX_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _run_chunks(samples: int, seed: int, count_chunk) -> int:
    """Sum ``count_chunk(size, rng)`` over fixed-size chunks with per-chunk streams."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    sizes = [CHUNK] * (samples // CHUNK) + ([samples % CHUNK] if samples % CHUNK else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(size, np.random.default_rng(ss)) for size, ss in zip(sizes, children)]
    workers = min(_workers(), len(jobs))
    if workers == 1:
        return sum(count_chunk(size, rng) for size, rng in jobs)
    with ThreadPoolExecutor(workers) as pool:
        return sum(pool.map(lambda job: count_chunk(*job), jobs))


def _report(successes: int, samples: int, n: int, seed: int, **meta) -> EstimateReport:
    lo, hi = wilson_interval(successes, samples)
    meta.setdefault("n", n)
    return EstimateReport(
        samples, successes, successes / samples, lo, hi, raz_threshold_log2(n), seed, meta
    )


def sample_bipartition_masks(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``(count, n)`` booleans; row ``k`` marks the Y side of a uniform equal bipartition.

    Column ``j`` is qubit ``j + 1``.  Both the subgroup and the statevector
    estimators draw through this function, so equal seeds give equal
    bipartition streams.
    """
    if n < 2 or n % 2:
        raise ValueError(f"equal bipartitions need an even n >= 2, got {n}")
    order = np.argsort(rng.random((count, n)), axis=1)
    masks = np.zeros((count, n), dtype=bool)
    np.put_along_axis(masks, order[:, : n // 2], True, axis=1)
    return masks


def mask_to_bipartition(mask: np.ndarray) -> Bipartition:
    return Bipartition(mask.size, sum(1 << j for j in np.flatnonzero(mask)))


# ---------------------------------------------------------------- subgroup path


def subgroup_invertible(a_bits: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Whether ``A_y`` and ``A_z`` are both invertible, for each bipartition row of ``masks``."""
    half = a_bits.shape[0]
    count = masks.shape[0]
    cols = np.nonzero(masks)[1].reshape(count, half)
    rest = np.nonzero(~masks)[1].reshape(count, half)
    ok = np.ones(count, dtype=bool)
    for sel in (cols, rest):
        # (count, half rows, half cols) submatrices, packed row-wise
        sub = a_bits[:, sel].transpose(1, 0, 2)
        ok &= gf2_rank_batch(pack_bits(sub), half) == half
    return ok


def estimate_subgroup_invertibility(spec: SubgroupSpec, samples: int, seed: int = 0) -> EstimateReport:
    a = spec.A.to_array()
    n = spec.n

    def count(size, rng):
        return int(subgroup_invertible(a, sample_bipartition_masks(n, size, rng)).sum())

    return _report(_run_chunks(samples, seed, count), samples, n, seed, mode="subgroup", mu_n=mu_n(n))


# ------------------------------------------------------------------- state path


def estimate_state_schmidt(
    s: StateVector, samples: int, tol: float = 1e-9, seed: int = 0
) -> EstimateReport:
    n = s.n_qubits
    if n > MAX_STATE_QUBITS:
        raise DimensionError(f"statevector estimator limited to n <= {MAX_STATE_QUBITS}, got {n}")
    thr = raz_threshold_log2(n)

    def count(size, rng):
        hits = 0
        for mask in sample_bipartition_masks(n, size, rng):
            r = schmidt_rank(s, mask_to_bipartition(mask), tol)
            hits += r > 0 and math.log2(r) > thr
        return hits

    return _report(_run_chunks(samples, seed, count), samples, n, seed, mode="state", mu_n=mu_n(n))


# --------------------------------------------------------------- balanced +-1


def sample_balanced_pm1(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform ``dim x dim`` matrix with equally many +1 and -1 entries."""
    if dim < 1 or (dim * dim) % 2:
        raise ValueError(f"a balanced matrix needs an even number of entries, got {dim}x{dim}")
    half = dim * dim // 2
    v = np.concatenate([np.ones(half, dtype=np.int64), -np.ones(half, dtype=np.int64)])
    return rng.permutation(v).reshape(dim, dim)


def exact_rank(m) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination on Python integers."""
    a = np.array(m, dtype=object)
    if a.ndim != 2:
        raise ValueError("exact_rank needs a 2-D integer matrix")
    a = a.copy()
    rows, cols = a.shape
    prev = 1
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = [i for i in range(r, rows) if a[i, c] != 0]
        if not nz:
            continue
        p = nz[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        piv = a[r, c]
        below = a[r + 1 :, c : c + 1]
        # exact division: Bareiss guarantees divisibility by the previous pivot
        a[r + 1 :, c:] = (piv * a[r + 1 :, c:] - below * a[r, c:]) // prev
        prev = piv
        r += 1
    return r


def _full_rank_modp(m: np.ndarray, p: int = 2_147_483_629) -> bool:
    """Full rank modulo a prime; full rank mod p implies full rank over the rationals."""
    a = np.array(m, dtype=np.int64) % p
    dim = a.shape[0]
    for c in range(dim):
        nz = np.flatnonzero(a[c:, c])
        if nz.size == 0:
            return False
        k = c + nz[0]
        if k != c:
            a[[c, k]] = a[[k, c]]
        inv = pow(int(a[c, c]), p - 2, p)
        a[c] = a[c] * inv % p
        f = a[c + 1 :, c].copy()
        # products stay below 2^62 since both factors are below p < 2^31
        a[c + 1 :] = (a[c + 1 :] - np.outer(f, a[c]) % p) % p
    return True


def is_full_rank_exact(m: np.ndarray) -> bool:
    if _full_rank_modp(m):
        return True
    return exact_rank(m) == m.shape[0]


def estimate_balanced_fullrank(n: int, samples: int, seed: int = 0) -> EstimateReport:
    """Probability that a random balanced ``2^(n/2)``-square +-1 matrix is nonsingular."""
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and at least 2, got {n}")
    dim = 1 << (n // 2)
    if dim > MAX_BALANCED_DIM:
        raise DimensionError(f"exact rank limited to dimension {MAX_BALANCED_DIM}, got {dim} (n={n})")

    def count(size, rng):
        return sum(is_full_rank_exact(sample_balanced_pm1(dim, rng)) for _ in range(size))

    return _report(_run_chunks(samples, seed, count), samples, n, seed, mode="balanced", dim=dim)


def fc_lower_bound(pr_e2: float, q: float) -> float:
    """``(Pr(E2) - q) / (1 - q)`` clamped at zero."""
    if not 0 <= q < 1:
        raise ValueError("q must lie in [0, 1)")
    return max(0.0, (pr_e2 - q) / (1 - q))


def exhaustive_subgroup_invertibility(spec: SubgroupSpec) -> float:
    """Exact fraction over all equal bipartitions (small n only)."""
    from itertools import combinations

    n = spec.n
    if n > 24:
        raise DimensionError("exhaustive enumeration limited to n <= 24")
    combos = list(combinations(range(n), n // 2))
    masks = np.zeros((len(combos), n), dtype=bool)
    for k, c in enumerate(combos):
        masks[k, list(c)] = True
    return float(subgroup_invertible(spec.A.to_array(), masks).mean())

