"""Tree sizes of two-, three- and four-qubit states.

Three-qubit states are classified into their SLOCC class from local ranks
and the 3-tangle; the class fixes the tree size.  Minimal trees themselves
are only ever *exhibited* numerically by :func:`fit_tree`; a failed fit
says nothing about non-existence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .core import (
    DEFAULT_RANK_TOL,
    Bipartition,
    StateVector,
    inner_product,
    schmidt_rank,
    w_state,
)
from .tree import Leaf, Prod, Sum, TreeNode, parse_tree, tree_size

TANGLE_TOL = 1e-10
FIT_SUCCESS = 1e-8
WERNER_P_W = 0.6955427


class Slocc3Class(enum.Enum):
    P = "P"
    B12_3 = "B12|3"
    B13_2 = "B13|2"
    B23_1 = "B23|1"
    W = "W"
    GHZ = "GHZ"

    @property
    def is_biseparable(self) -> bool:
        return self.value.startswith("B")


_TS3 = {"P": 3, "B": 5, "GHZ": 6, "W": 8}


def three_tangle(s: StateVector) -> float:
    """``4 |Det c|`` of the normalized state, Det being Cayley's hyperdeterminant."""
    if s.n_qubits != 3:
        raise ValueError("the 3-tangle is defined for three qubits")
    c = s.normalize().amplitudes
    c000, c001, c010, c011, c100, c101, c110, c111 = c
    d1 = c000**2 * c111**2 + c001**2 * c110**2 + c010**2 * c101**2 + c100**2 * c011**2
    d2 = (
        c000 * c111 * c011 * c100
        + c000 * c111 * c101 * c010
        + c000 * c111 * c110 * c001
        + c011 * c100 * c101 * c010
        + c011 * c100 * c110 * c001
        + c101 * c010 * c110 * c001
    )
    d3 = c000 * c110 * c101 * c011 + c111 * c001 * c010 * c100
    return float(4 * abs(d1 - 2 * d2 + 4 * d3))


def local_ranks(s: StateVector, tol: float = DEFAULT_RANK_TOL) -> tuple[int, ...]:
    """Rank of each single-qubit reduced state (Schmidt rank of qubit i vs the rest)."""
    return tuple(schmidt_rank(s, Bipartition.from_qubits(s.n_qubits, [q]), tol) for q in range(1, s.n_qubits + 1))


def slocc_classify3(s: StateVector, tol: float = TANGLE_TOL, rank_tol: float = DEFAULT_RANK_TOL) -> Slocc3Class:
    if s.n_qubits != 3:
        raise ValueError(f"expected a three-qubit state, got {s.n_qubits} qubits")
    if s.norm_squared() == 0:
        raise ValueError("the zero vector has no SLOCC class")
    ranks = local_ranks(s.normalize(), rank_tol)
    ones = [q for q, r in enumerate(ranks, 1) if r == 1]
    if len(ones) == 3:
        return Slocc3Class.P
    if len(ones) == 1:
        return {1: Slocc3Class.B23_1, 2: Slocc3Class.B13_2, 3: Slocc3Class.B12_3}[ones[0]]
    if len(ones) == 2:
        # two factorizable qubits force the third; only reachable through rank_tol noise
        return Slocc3Class.P
    return Slocc3Class.GHZ if three_tangle(s) > tol else Slocc3Class.W


def ts_from_class3(c: Slocc3Class) -> int:
    return _TS3["B" if c.is_biseparable else c.value]


def ts_two_qubit(s: StateVector, tol: float = DEFAULT_RANK_TOL) -> int:
    """4 if entangled, 2 if separable."""
    if s.n_qubits != 2:
        raise ValueError("expected a two-qubit state")
    return 4 if schmidt_rank(s, Bipartition(2, 1), tol) == 2 else 2


@dataclass(frozen=True)
class EpsilonWitness:
    ts: int
    state: StateVector = field(repr=False)
    t: float
    overlap: float


def ts_epsilon_w3(eps: float) -> EpsilonWitness:
    """``TS_eps(W) = 6`` together with a GHZ-class state inside the eps ball.

    The witness is ``((|0> + t|1>)^3 - |000>) / t = W + t(...) + t^2 |111>``,
    a sum of two product states and hence GHZ class for every ``t != 0``.
    Its squared overlap with normalized W is ``3 / (3 + 3t^2 + t^4)``; ``t``
    is taken just inside the largest value keeping that above ``1 - eps``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    rhs = 3 * eps / (1 - eps)
    t = np.sqrt((-3 + np.sqrt(9 + 4 * rhs)) / 2) * 0.999
    vec = np.zeros(8, dtype=np.complex128)
    vec[[1, 2, 4]] = 1
    vec[[3, 5, 6]] = t
    vec[7] = t * t
    g = StateVector(3, vec).normalize()
    overlap = abs(inner_product(w_state(3), g)) ** 2
    return EpsilonWitness(ts_from_class3(slocc_classify3(g)), g, float(t), overlap)


def build_psi4() -> StateVector:
    """The four-qubit state of maximal tree size 16."""
    a = 1 / (2 * np.sqrt(3))
    b = -1 / np.sqrt(3)
    terms = {"0110": a, "0101": a, "1001": a, "1010": a, "0011": b, "1100": b}
    return StateVector.from_dict(4, terms).normalize()


def werner_ts(p: float) -> int:
    """Tree size of ``p |GHZ><GHZ| + (1-p) 1/8`` from its SLOCC class.

    Above ``3/7`` the value 6 comes from the GHZ-plus-product decomposition;
    the W/GHZ class boundary ``WERNER_P_W`` does not change it.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p <= 1 / 5:
        return 3
    if p <= 3 / 7:
        return 5
    return 6


# ------------------------------------------------------------ standard shapes

GHZ3_SHAPE = "(+ (x [q1 1 0] [q2 1 0] [q3 1 0]) (x [q1 0 1] [q2 0 1] [q3 0 1]))"
# |0>(|01> + |10>) + |1>|00>
W3_SHAPE = "(+ (x [q1 1 0] (+ (x [q2 1 0] [q3 0 1]) (x [q2 0 1] [q3 1 0]))) (x [q1 0 1] [q2 1 0] [q3 1 0]))"
_PAIR = "(+ (x [q{a} 1 0] [q{b} 1 0]) (x [q{a} 0 1] [q{b} 0 1]))"
# |phi_12>|phi_34> + |phi'_13>|phi'_24>
PSI4_SHAPE = (
    f"(+ (x {_PAIR.format(a=1, b=2)} {_PAIR.format(a=3, b=4)})"
    f" (x {_PAIR.format(a=1, b=3)} {_PAIR.format(a=2, b=4)}))"
)
# |0>|GHZ> + |1>|GHZ'> on qubits 2..4, 14 leaves
GHZ_BRANCHES4_SHAPE = (
    "(+ (x [q1 1 0] (+ (x [q2 1 0] [q3 1 0] [q4 1 0]) (x [q2 0 1] [q3 0 1] [q4 0 1])))"
    " (x [q1 0 1] (+ (x [q2 1 0] [q3 1 0] [q4 1 0]) (x [q2 0 1] [q3 0 1] [q4 0 1]))))"
)


def shape(name: str) -> TreeNode:
    table = {"ghz3": GHZ3_SHAPE, "w3": W3_SHAPE, "psi4": PSI4_SHAPE, "ghz-branches4": GHZ_BRANCHES4_SHAPE}
    return parse_tree(table[name])


# ------------------------------------------------------------------ fitting


class _Compiled:
    """A tree topology evaluated for arbitrary leaf amplitude arrays."""

    def __init__(self, t: TreeNode, n: int):
        self.n = n
        self.leaf_qubits: list[int] = []
        self.root = self._compile(t)

    def _compile(self, node):
        if isinstance(node, Leaf):
            self.leaf_qubits.append(node.qubit)
            return ("L", len(self.leaf_qubits) - 1, node.qubit)
        kids = tuple(self._compile(c) for c in node.children)
        return ("S" if isinstance(node, Sum) else "P", kids, tuple(sorted(node.qubits)))

    def _eval(self, node, params):
        tag = node[0]
        if tag == "L":
            return (node[2],), params[node[1]]
        if tag == "S":
            parts = [self._eval(c, params) for c in node[1]]
            return parts[0][0], sum(arr for _, arr in parts[1:]) + parts[0][1]
        order: list[int] = []
        arr = np.ones((), dtype=np.complex128)
        for c in node[1]:
            qs, sub = self._eval(c, params)
            order.extend(qs)
            arr = np.multiply.outer(arr, sub)
        return node[2], np.transpose(arr, np.argsort(order))

    def __call__(self, params: np.ndarray) -> np.ndarray:
        return self._eval(self.root, params)[1].reshape(-1)

    def to_tree(self, params: np.ndarray) -> TreeNode:
        def build(node):
            if node[0] == "L":
                a0, a1 = params[node[1]]
                if a0 == 0 and a1 == 0:
                    a0 = 1e-300
                return Leaf(node[2], a0, a1)
            kids = tuple(build(c) for c in node[1])
            return Sum(kids) if node[0] == "S" else Prod(kids)

        return build(self.root)


def _residual(target: np.ndarray, psi: np.ndarray) -> float:
    den = np.vdot(target, target).real * np.vdot(psi, psi).real
    if den == 0:
        return 1.0
    return max(0.0, 1.0 - abs(np.vdot(target, psi)) ** 2 / den)


@dataclass
class FitResult:
    tree: TreeNode
    residual: float
    size: int
    restarts_used: int
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def success(self) -> bool:
        return self.residual < FIT_SUCCESS


def fit_tree(
    target: StateVector,
    shape: TreeNode,
    restarts: int = 64,
    iterations: int = 500,
    rng: np.random.Generator | int | None = None,
    stop_at: float = FIT_SUCCESS,
    method: str = "lsq",
) -> FitResult:
    """Fit the leaf amplitudes of a fixed topology to ``target``.

    The figure of merit is ``1 - |<target|tree>|^2 / (|target|^2 |tree|^2)``.
    The tree is affine in every single leaf, which gives exact derivatives
    for free.  ``method="lsq"`` runs a trust-region least-squares solve of
    ``tree - target = 0`` (the tree's scale and phase are free, so a zero
    residual exists iff the topology can represent the target);
    ``method="als"`` instead sweeps the leaves, solving each leaf exactly as
    a 3-dimensional generalized Rayleigh quotient.  Block updates alone can
    crawl for W-type targets whose topology also contains degenerate
    approximants.

    Restarts draw independent complex Gaussian initial leaves and stop early
    once ``stop_at`` is reached.  ``history[k]`` is the best residual after
    restart ``k + 1``.
    """
    if method not in ("lsq", "als"):
        raise ValueError(f"unknown fit method {method!r}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    n = target.n_qubits
    if shape.qubits != frozenset(range(1, n + 1)):
        raise ValueError(f"shape does not act on qubits 1..{n}")
    comp = _Compiled(shape, n)
    tgt = target.amplitudes / np.sqrt(target.norm_squared())
    n_leaves = len(comp.leaf_qubits)
    streams = rng.spawn(restarts)
    best_params, best_res = None, np.inf
    history: list[float] = []
    used = 0
    for r in range(restarts):
        used = r + 1
        g = streams[r]
        params = g.normal(size=(n_leaves, 2)) + 1j * g.normal(size=(n_leaves, 2))
        if method == "lsq":
            params = _lsq_fit(comp, params, tgt, iterations)
        else:
            _als_fit(comp, params, tgt, iterations, stop_at)
        res = _residual(tgt, comp(params))
        if res < best_res:
            best_res, best_params = res, params.copy()
        history.append(best_res)
        if best_res < stop_at:
            break
    tree = comp.to_tree(best_params)
    return FitResult(tree, float(best_res), tree_size(tree), used, history)


def _leaf_columns(comp: _Compiled, params: np.ndarray, leaf: int, base=None):
    """``tree = b0 * a0 + b1 * a1 + c`` as a function of one leaf ``(a0, a1)``."""
    saved = params[leaf].copy()
    params[leaf] = (0, 0)
    c = comp(params)
    params[leaf] = (1, 0)
    b0 = comp(params) - c
    params[leaf] = (0, 1)
    b1 = comp(params) - c
    params[leaf] = saved
    return b0, b1, c


def _lsq_fit(comp: _Compiled, params: np.ndarray, tgt: np.ndarray, max_nfev: int) -> np.ndarray:
    from scipy.optimize import least_squares

    n_leaves = params.shape[0]
    half = 2 * n_leaves

    def unpack(x):
        return (x[:half] + 1j * x[half:]).reshape(n_leaves, 2)

    def fun(x):
        d = comp(unpack(x)) - tgt
        return np.concatenate([d.real, d.imag])

    def jac(x):
        p = unpack(x)
        jm = np.empty((2 * tgt.size, 2 * half))
        for leaf in range(n_leaves):
            for k, b in enumerate(_leaf_columns(comp, p, leaf)[:2]):
                col = 2 * leaf + k
                jm[:, col] = np.concatenate([b.real, b.imag])
                jm[:, half + col] = np.concatenate([-b.imag, b.real])
        return jm

    x0 = np.concatenate([params.real.reshape(-1), params.imag.reshape(-1)])
    sol = least_squares(fun, x0, jac=jac, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    return unpack(sol.x)


def _als_fit(comp: _Compiled, params: np.ndarray, tgt: np.ndarray, sweeps: int, stop_at: float) -> None:
    res = _residual(tgt, comp(params))
    for _ in range(sweeps):
        prev = res
        for leaf in range(params.shape[0]):
            b0, b1, c = _leaf_columns(comp, params, leaf)
            m = np.stack([b0, b1, c], axis=1)
            x = np.linalg.lstsq(m.conj().T @ m, m.conj().T @ tgt, rcond=1e-13)[0]
            if not np.all(np.isfinite(x)) or abs(x[2]) < 1e-12 * np.abs(x).max():
                continue
            new = x[:2] / x[2]
            if np.any(new != 0):
                params[leaf] = new
        res = _residual(tgt, comp(params))
        if res < stop_at or prev - res < 1e-15 * max(prev, 1e-300):
            break


# ---------------------------------------------------------------- topologies


def _key(node, relabel=None) -> str:
    if isinstance(node, Leaf):
        return f"q{relabel[node.qubit] if relabel else node.qubit}"
    op = "+" if isinstance(node, Sum) else "x"
    return "(" + op + " " + " ".join(sorted(_key(c, relabel) for c in node.children)) + ")"


def canonical_shape(t: TreeNode) -> str:
    """Shape key ignoring amplitudes, child order and qubit labels.

    Gates are compared as written: callers that want flattened shapes must
    flatten first (the enumerator only produces flattened shapes).
    """
    qs = sorted(t.qubits)
    return min(_key(t, dict(zip(qs, p))) for p in permutations(qs))


def _set_partitions(items: list[int]):
    if len(items) == 1:
        yield [items]
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1 :]


def enumerate_topologies(n: int, max_size: int) -> list[TreeNode]:
    """All reduced tree shapes on ``n <= 4`` qubits with at most ``max_size`` leaves.

    Shapes are taken with nested gates of the same kind flattened (the
    binarization of a flattened gate is unique up to the order of its
    children) and with every one-qubit subtree collapsed to a single leaf,
    since any one-qubit combination is again a leaf.  Duplicates are removed
    up to qubit relabeling.  Leaves carry placeholder amplitudes ``(1, 0)``.
    """
    if not 1 <= n <= 4:
        raise ValueError("topology enumeration supports 1 <= n <= 4")
    if not 1 <= max_size <= 16:
        raise ValueError("topology enumeration supports max_size <= 16")

    memo: dict = {}

    def nonprod(qs: tuple[int, ...], budget: int) -> list[tuple[int, TreeNode]]:
        if len(qs) == 1:
            return [(1, Leaf(qs[0], 1, 0))] if budget >= 1 else []
        return sums(qs, budget)

    def prods(qs: tuple[int, ...], budget: int) -> list[tuple[int, TreeNode]]:
        key = ("P", qs, budget)
        if key in memo:
            return memo[key]
        out: dict[str, tuple[int, TreeNode]] = {}
        for part in _set_partitions(list(qs)):
            if len(part) < 2 or sum(len(b) for b in part) > budget:
                continue
            options = [nonprod(tuple(b), budget) for b in part]

            def rec(k, used, chosen):
                if k == len(part):
                    node = Prod(tuple(chosen))
                    out.setdefault(_key(node), (used, node))
                    return
                floor = sum(len(b) for b in part[k + 1 :])
                for size, node in options[k]:
                    if used + size + floor <= budget:
                        rec(k + 1, used + size, chosen + [node])

            rec(0, 0, [])
        memo[key] = list(out.values())
        return memo[key]

    def sums(qs: tuple[int, ...], budget: int) -> list[tuple[int, TreeNode]]:
        key = ("S", qs, budget)
        if key in memo:
            return memo[key]
        base = sorted(prods(qs, budget - len(qs)), key=lambda sn: _key(sn[1]))
        out: dict[str, tuple[int, TreeNode]] = {}

        def rec(start, used, chosen):
            if len(chosen) >= 2:
                node = Sum(tuple(chosen))
                out.setdefault(_key(node), (used, node))
            for k in range(start, len(base)):
                size, node = base[k]
                if used + size <= budget:
                    rec(k, used + size, chosen + [node])

        rec(0, 0, [])
        memo[key] = list(out.values())
        return memo[key]

    qs = tuple(range(1, n + 1))
    if n == 1:
        found = [(1, Leaf(1, 1, 0))]
    else:
        found = prods(qs, max_size) + sums(qs, max_size)
    canon: dict[str, tuple[int, TreeNode]] = {}
    for size, node in found:
        canon.setdefault(canonical_shape(node), (size, node))
    return [node for _, node in sorted(canon.values(), key=lambda sn: (sn[0], _key(sn[1])))]


def minimal_fitted_size(
    target: StateVector, max_size: int, restarts: int = 8, iterations: int = 300, rng=None
) -> FitResult | None:
    """Smallest enumerated topology that fits ``target``; ``None`` if none does."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    for topo in enumerate_topologies(target.n_qubits, max_size):
        res = fit_tree(target, topo, restarts=restarts, iterations=iterations, rng=rng)
        if res.success:
            return res
    return None
