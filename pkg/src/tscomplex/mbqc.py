"""Single-qubit measurements on tree-represented states.

Measuring qubit ``i`` in a basis ``{eta, eta_perp}`` and keeping outcome 0
replaces every leaf ``|l>`` on qubit ``i`` by ``<eta|l> |eta>`` (outcome 1
uses ``eta_perp``).  The replacement is linear in each leaf, hence exactly
the projector ``|eta><eta|`` on qubit ``i`` applied to the whole tree.
Leaves that become zero are pruned together with the product gates that
contain them, so the tree never grows.  The measured qubit stays in the
tree as a collapsed leaf; :func:`strip` removes it.

The leaf update costs one inner product per leaf.  Outcome probabilities
are taken from dense evaluation of the two branches, which limits Born
sampling to desk-scale ``n``; post-selection mode skips that step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DimensionError, StateVector, apply_local_operators, inner_product
from .tree import Leaf, Prod, Sum, TreeError, TreeNode, evaluate

ORTHO_TOL = 1e-12
MONOTONE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MeasurementStep:
    qubit: int
    basis: tuple[np.ndarray, np.ndarray]
    outcome: int | str = "sample"

    def __post_init__(self):
        eta, perp = (np.asarray(v, dtype=np.complex128).reshape(2) for v in self.basis)
        gram = np.array([[np.vdot(eta, eta), np.vdot(eta, perp)], [np.vdot(perp, eta), np.vdot(perp, perp)]])
        if np.abs(gram - np.eye(2)).max() > ORTHO_TOL:
            raise ValueError("measurement basis vectors must be orthonormal")
        if self.outcome not in (0, 1, "sample"):
            raise ValueError(f"outcome must be 0, 1 or 'sample', got {self.outcome!r}")
        object.__setattr__(self, "basis", (eta, perp))

    def vector(self, outcome: int) -> np.ndarray:
        return self.basis[outcome]

    def with_outcome(self, outcome) -> MeasurementStep:
        return MeasurementStep(self.qubit, self.basis, outcome)


def z_basis() -> tuple[np.ndarray, np.ndarray]:
    return np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)


def x_basis() -> tuple[np.ndarray, np.ndarray]:
    return xy_basis(0.0)


def xy_basis(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """``(|0> +- e^{i theta} |1>) / sqrt 2``."""
    ph = np.exp(1j * theta)
    return np.array([1, ph]) / np.sqrt(2), np.array([1, -ph]) / np.sqrt(2)


# ---------------------------------------------------------------- leaf update


def project_tree(t: TreeNode, qubit: int, eta) -> TreeNode | None:
    """Tree of ``(|eta><eta| on qubit) |t>``, or ``None`` if that vector is zero."""
    if qubit not in t.qubits:
        raise TreeError(f"qubit {qubit} does not appear in the tree")
    eta = np.asarray(eta, dtype=np.complex128)
    memo: dict[int, TreeNode | None] = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if qubit not in node.qubits:
            out = node
        elif isinstance(node, Leaf):
            c = np.vdot(eta, node.vector)
            out = None if c == 0 else Leaf(qubit, c * eta[0], c * eta[1])
        elif isinstance(node, Prod):
            kids = [go(ch) for ch in node.children]
            out = None if any(k is None for k in kids) else Prod(tuple(kids))
        else:
            kids = [k for k in (go(ch) for ch in node.children) if k is not None]
            out = None if not kids else kids[0] if len(kids) == 1 else Sum(tuple(kids))
        memo[key] = out
        return out

    return go(t)


def tree_norm(t: TreeNode | None, n: int) -> float:
    if t is None:
        return 0.0
    return float(np.sqrt(evaluate(t, n).norm_squared()))


def measure_on_tree(t: TreeNode, step: MeasurementStep) -> tuple[TreeNode | None, float]:
    """Apply the outcome of ``step`` (which must be 0 or 1) and return the branch and its norm."""
    if step.outcome not in (0, 1):
        raise ValueError("measure_on_tree needs a fixed outcome; use simulate_pattern to sample")
    out = project_tree(t, step.qubit, step.vector(step.outcome))
    return out, tree_norm(out, max(t.qubits))


def dense_project(s: StateVector, step: MeasurementStep, outcome: int) -> StateVector:
    v = step.vector(outcome)
    ops = [np.eye(2)] * s.n_qubits
    ops = list(ops)
    ops[step.qubit - 1] = np.outer(v, v.conj())
    return apply_local_operators(s, ops)


def _scale(t: TreeNode, c: complex) -> TreeNode:
    if c == 1:
        return t
    if isinstance(t, Leaf):
        return Leaf(t.qubit, c * t.a0, c * t.a1)
    if isinstance(t, Prod):
        return Prod((_scale(t.children[0], c),) + t.children[1:])
    return Sum(tuple(_scale(ch, c) for ch in t.children))


def strip(t: TreeNode, measured: dict[int, np.ndarray]) -> tuple[complex, TreeNode | None]:
    """Factor out collapsed qubits: ``t = (scalar) * (x_q |eta_q>) (x) rest``.

    ``measured`` maps each collapsed qubit to its kept basis vector.  Returns
    ``(scalar, rest)``; ``rest`` is ``None`` when every qubit was measured,
    and the scalar then carries the whole amplitude.  Leaves on a measured
    qubit must be multiples of its vector.
    """

    def go(node) -> tuple[complex, TreeNode | None]:
        if not node.qubits & measured.keys():
            return 1.0, node
        if isinstance(node, Leaf):
            eta = np.asarray(measured[node.qubit], dtype=np.complex128)
            c = complex(np.vdot(eta, node.vector))
            if np.abs(node.vector - c * eta).max() > 1e-12 * max(1.0, abs(c)):
                raise TreeError(f"leaf on qubit {node.qubit} is not collapsed onto its measured vector")
            return c, None
        parts = [go(ch) for ch in node.children]
        if isinstance(node, Prod):
            scalar = complex(np.prod([p[0] for p in parts]))
            kids = [p[1] for p in parts if p[1] is not None]
            if not kids:
                return scalar, None
            rest = kids[0] if len(kids) == 1 else Prod(tuple(kids))
            return scalar, rest
        if parts[0][1] is None:
            return complex(sum(p[0] for p in parts)), None
        kids = [_scale(p[1], p[0]) for p in parts if p[0] != 0]
        if not kids:
            return 0j, None
        return 1.0, kids[0] if len(kids) == 1 else Sum(tuple(kids))

    return go(t)


# ----------------------------------------------------------------- patterns


@dataclass
class TraceEntry:
    step: MeasurementStep
    outcome: int
    probability: float | None  # conditional Born probability; None when post-selected
    branch_norm2: float | None  # squared norm of the kept branch relative to the input


@dataclass
class SimTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    tree: TreeNode | None = None

    @property
    def outcomes(self) -> tuple[int, ...]:
        return tuple(e.outcome for e in self.entries)

    def to_json(self) -> dict:
        return {
            "outcomes": list(self.outcomes),
            "steps": [
                {
                    "qubit": e.step.qubit,
                    "outcome": e.outcome,
                    "probability": e.probability,
                    "branch_norm2": e.branch_norm2,
                }
                for e in self.entries
            ],
        }


Feedforward = Callable[[int, tuple[int, ...], MeasurementStep], MeasurementStep]


def _check_steps(steps) -> None:
    seen = set()
    for st in steps:
        if st.qubit in seen:
            raise ValueError(f"qubit {st.qubit} is measured twice")
        seen.add(st.qubit)


class _Branches:
    """Memo of branch trees and Born weights keyed by outcome history."""

    def __init__(self, t: TreeNode, steps, feedforward: Feedforward | None):
        self.n = max(t.qubits)
        self.steps = steps
        self.feedforward = feedforward
        norm2 = evaluate(t, self.n).norm_squared()
        if norm2 == 0:
            raise ValueError("tree evaluates to the zero vector")
        self.cache: dict[tuple[int, ...], tuple[TreeNode | None, float]] = {(): (t, norm2)}
        self.splits: dict[tuple[int, ...], tuple[MeasurementStep, list]] = {}

    def step_for(self, hist: tuple[int, ...]) -> MeasurementStep:
        st = self.steps[len(hist)]
        return self.feedforward(len(hist), hist, st) if self.feedforward else st

    def split(self, hist: tuple[int, ...]):
        if hist not in self.splits:
            tree, _ = self.cache[hist]
            st = self.step_for(hist)
            outs = []
            for o in (0, 1):
                child = project_tree(tree, st.qubit, st.vector(o))
                w = 0.0 if child is None else evaluate(child, self.n).norm_squared()
                self.cache[hist + (o,)] = (child, w)
                outs.append(w)
            self.splits[hist] = (st, outs)
        return self.splits[hist]


def _run_once(br: _Branches, rng, postselect: bool) -> SimTrace:
    trace = SimTrace()
    hist: tuple[int, ...] = ()
    norm0 = br.cache[()][1]
    for _ in range(len(br.steps)):
        if postselect:
            st = br.step_for(hist)
            if st.outcome not in (0, 1):
                raise ValueError("post-selection needs a fixed outcome on every step")
            o = st.outcome
            tree, _ = br.cache[hist]
            child = None if tree is None else project_tree(tree, st.qubit, st.vector(o))
            hist = hist + (o,)
            br.cache[hist] = (child, float("nan"))
            trace.entries.append(TraceEntry(st, o, None, None))
            if child is None:
                break
            continue
        st, (w0, w1) = br.split(hist)
        total = w0 + w1
        if total == 0:
            raise ValueError("measurement branch with zero norm reached")
        if st.outcome in (0, 1):
            o = st.outcome
        else:
            o = int(rng.random() >= w0 / total)
        w = (w0, w1)[o]
        hist = hist + (o,)
        trace.entries.append(TraceEntry(st, o, w / total, w / norm0))
        if w == 0:
            break
    trace.tree = br.cache[hist][0]
    return trace


def simulate_pattern(
    t: TreeNode,
    steps,
    rng: np.random.Generator | int | None = None,
    feedforward: Feedforward | None = None,
    postselect: bool = False,
) -> SimTrace:
    """Measure ``steps`` in order on the tree ``t``.

    ``feedforward(k, outcomes_so_far, step_k)`` may return a replacement for
    step ``k``.  With ``postselect=True`` every step must carry a fixed
    outcome and no Born weights are computed.
    """
    steps = list(steps)
    _check_steps(steps)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return _run_once(_Branches(t, steps, feedforward), rng, postselect)


def run_pattern(
    t: TreeNode, steps, runs: int, rng: np.random.Generator | int | None = None, feedforward=None
) -> dict[str, int]:
    """Histogram of outcome strings over ``runs`` independent Born-sampled runs."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    steps = list(steps)
    _check_steps(steps)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    br = _Branches(t, steps, feedforward)
    hist: dict[str, int] = {}
    for _ in range(runs):
        key = "".join(str(o) for o in _run_once(br, rng, False).outcomes)
        hist[key] = hist.get(key, 0) + 1
    return dict(sorted(hist.items()))


def dense_outcome_distribution(s: StateVector, steps) -> dict[str, float]:
    """Exact joint outcome probabilities of non-adaptive steps, by dense projection."""
    out: dict[str, float] = {}
    norm0 = s.norm_squared()

    def go(state, k, prefix):
        w = state.norm_squared()
        if w == 0:
            return
        if k == len(steps):
            out[prefix] = w / norm0
            return
        for o in (0, 1):
            go(dense_project(state, steps[k], o), k + 1, prefix + str(o))

    go(s, 0, "")
    return dict(sorted(out.items()))


# ------------------------------------------------------ fidelity monotonicity


@dataclass(frozen=True)
class MonotonicityReport:
    overlap: float
    branch_overlaps: tuple[float | None, float | None]
    weights_a: tuple[float, float]
    weights_b: tuple[float, float]
    excluded: tuple[int, ...]
    holds: bool


def fidelity_monotonicity_check(a: StateVector, b: StateVector, step: MeasurementStep) -> MonotonicityReport:
    """Check ``max_o |<a_o|b_o>| >= |<a|b>|`` over the two normalized post-measurement branches."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"{a.n_qubits}- vs {b.n_qubits}-qubit states")
    for s in (a, b):
        if abs(s.norm_squared() - 1) > 1e-10:
            raise ValueError("fidelity_monotonicity_check needs normalized states")
    if not 1 <= step.qubit <= a.n_qubits:
        raise DimensionError(f"qubit {step.qubit} outside 1..{a.n_qubits}")
    base = abs(inner_product(a, b))
    overlaps: list[float | None] = []
    wa, wb, excluded = [], [], []
    for o in (0, 1):
        pa, pb = dense_project(a, step, o), dense_project(b, step, o)
        na, nb = pa.norm_squared(), pb.norm_squared()
        wa.append(na)
        wb.append(nb)
        if na < 1e-24 or nb < 1e-24:
            overlaps.append(None)
            excluded.append(o)
            continue
        overlaps.append(abs(inner_product(pa, pb)) / np.sqrt(na * nb))
    best = max((x for x in overlaps if x is not None), default=0.0)
    holds = best >= base - MONOTONE_TOL
    return MonotonicityReport(base, tuple(overlaps), tuple(wa), tuple(wb), tuple(excluded), holds)


# ------------------------------------------------------------ 2D cluster


def cluster2d_state(rows: int, cols: int) -> StateVector:
    """``|+>`` on a ``rows x cols`` grid (row-major qubits) with CZ on every grid edge."""
    n = rows * cols
    if rows < 1 or cols < 1 or n > 20:
        raise DimensionError(f"cluster grid must have 1..20 sites, got {rows}x{cols}")
    idx = np.arange(1 << n)

    def bit(site):
        return (idx >> (n - 1 - site)) & 1

    parity = np.zeros(1 << n, dtype=np.int64)
    for r in range(rows):
        for c in range(cols):
            s = r * cols + c
            if c + 1 < cols:
                parity += bit(s) & bit(s + 1)
            if r + 1 < rows:
                parity += bit(s) & bit(s + cols)
    amps = (1 - 2 * (parity & 1)) * 2.0 ** (-n / 2)
    return StateVector(n, amps, normalized=True)


# --------------------------------------------------------------- JSON patterns


def pattern_from_json(data) -> tuple[list[MeasurementStep], Feedforward | None]:
    """Steps from ``[{"qubit": 1, "basis": "X" | "Z" | {"xy": theta}, "outcome": 0|1|"sample",
    "sign_from": [k, ...]}, ...]`` (or ``{"steps": [...]}``).

    ``sign_from`` adapts an XY angle to ``(-1)^(sum of those earlier outcomes) * theta``.
    """
    items = data["steps"] if isinstance(data, dict) else data
    steps, adapt = [], {}
    for k, item in enumerate(items):
        basis = item.get("basis", "Z")
        theta = None
        if basis == "Z":
            vecs = z_basis()
        elif basis == "X":
            vecs, theta = x_basis(), 0.0
        elif isinstance(basis, dict) and "xy" in basis:
            theta = float(basis["xy"])
            vecs = xy_basis(theta)
        else:
            raise ValueError(f"step {k}: unknown basis {basis!r}")
        steps.append(MeasurementStep(int(item["qubit"]), vecs, item.get("outcome", "sample")))
        deps = item.get("sign_from") or []
        if deps:
            if theta is None:
                raise ValueError(f"step {k}: sign_from needs an XY basis")
            if any(not 0 <= d < k for d in deps):
                raise ValueError(f"step {k}: sign_from may only name earlier steps")
            adapt[k] = (theta, list(deps))
    if not adapt:
        return steps, None

    def rule(k, hist, st):
        if k not in adapt:
            return st
        theta, deps = adapt[k]
        sign = -1 if sum(hist[d] for d in deps) % 2 else 1
        return MeasurementStep(st.qubit, xy_basis(sign * theta), st.outcome)

    return steps, rule
