"""Rooted trees of ``+`` and tensor-product gates with single-qubit leaves.

A :class:`Leaf` ``[q3 a0 a1]`` is the unnormalized vector ``a0|0> + a1|1>``
on qubit 3.  :class:`Sum` children must all act on the same qubit set and
:class:`Prod` children on pairwise disjoint sets, which keeps every tree
multilinear.  The size of a tree is its leaf count.

Text form (whitespace-insensitive)::

    tree    := leaf | "(" op tree tree+ ")"
    op      := "+" | "x"
    leaf    := "[q" INT complex complex "]"
    complex := FLOAT | "(" FLOAT "," FLOAT ")"

Gates may have any number (>= 2) of children.  Whenever an analysis needs a
binary tree, an n-ary gate is read as its left-associated binarization,
which does not change the leaf count.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, Union

import numpy as np

from .core import Bipartition, DimensionError, StateVector, state_from_coefficient_matrix


class TreeError(ValueError):
    """Well-formedness violation."""


class TreeSyntaxError(TreeError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


def _fmt_qubits(qs) -> str:
    return "{" + ",".join(str(q) for q in sorted(qs)) + "}"


@dataclass(frozen=True)
class Leaf:
    qubit: int
    a0: complex
    a1: complex

    def __post_init__(self):
        if self.qubit < 1:
            raise TreeError(f"leaf qubit index must be >= 1, got {self.qubit}")
        object.__setattr__(self, "a0", complex(self.a0))
        object.__setattr__(self, "a1", complex(self.a1))
        if self.a0 == 0 and self.a1 == 0:
            raise TreeError(f"leaf on qubit {self.qubit} has both amplitudes zero")

    @cached_property
    def qubits(self) -> frozenset[int]:
        return frozenset((self.qubit,))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=np.complex128)


@dataclass(frozen=True)
class Sum:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise TreeError("'+' gate needs at least two children")
        first = self.children[0].qubits
        for k, ch in enumerate(self.children[1:], 1):
            if ch.qubits != first:
                raise TreeError(
                    f"'+' gate children act on different qubit sets: child 0 on "
                    f"{_fmt_qubits(first)}, child {k} on {_fmt_qubits(ch.qubits)}"
                )

    @cached_property
    def qubits(self) -> frozenset[int]:
        return self.children[0].qubits


@dataclass(frozen=True)
class Prod:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise TreeError("'x' gate needs at least two children")
        seen: set[int] = set()
        for k, ch in enumerate(self.children):
            clash = seen & ch.qubits
            if clash:
                raise TreeError(
                    f"'x' gate child {k} repeats qubit(s) {_fmt_qubits(clash)} already covered by a sibling"
                )
            seen |= ch.qubits

    @cached_property
    def qubits(self) -> frozenset[int]:
        return frozenset().union(*(ch.qubits for ch in self.children))


TreeNode = Union[Leaf, Sum, Prod]


# ---------------------------------------------------------------- text I/O

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?inf|nan)
      | (?P<q>q\d+)
      | (?P<sym>[()\[\],+x])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = len(text) - len(text[pos:].lstrip()) if text[pos:].strip() else pos
            raise TreeSyntaxError(f"unexpected character {text[bad:bad + 1]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] or "end of input"
            raise TreeSyntaxError(f"expected {want!r}, got {got!r}", tok[2])
        self.i += 1
        return tok

    def tree(self):
        kind, val, pos = self.peek()
        if val == "[":
            return self.leaf()
        if val == "(":
            self.take()
            op = self.take("sym")
            if op[1] not in "+x":
                raise TreeSyntaxError(f"expected gate '+' or 'x', got {op[1]!r}", op[2])
            children = [self.tree()]
            while self.peek()[1] != ")":
                if self.peek()[0] == "eof":
                    raise TreeSyntaxError("unterminated gate", pos)
                children.append(self.tree())
            self.take(value=")")
            if len(children) < 2:
                raise TreeSyntaxError(f"'{op[1]}' gate needs at least two children", pos)
            try:
                return Sum(tuple(children)) if op[1] == "+" else Prod(tuple(children))
            except TreeError as exc:
                raise TreeSyntaxError(str(exc), pos) from None
        raise TreeSyntaxError(f"expected '(' or '[', got {val or 'end of input'!r}", pos)

    def number(self) -> float:
        return float(self.take("num")[1])

    def complex(self) -> complex:
        if self.peek()[1] == "(":
            self.take()
            re_ = self.number()
            self.take(value=",")
            im = self.number()
            self.take(value=")")
            return complex(re_, im)
        return complex(self.number())

    def leaf(self) -> Leaf:
        pos = self.take(value="[")[2]
        q = self.take("q")
        a0 = self.complex()
        a1 = self.complex()
        self.take(value="]")
        try:
            return Leaf(int(q[1][1:]), a0, a1)
        except TreeError as exc:
            raise TreeSyntaxError(str(exc), pos) from None


def parse_tree(text: str) -> TreeNode:
    p = _Parser(text)
    t = p.tree()
    p.take("eof")
    return t


def _fmt_real(x: float) -> str:
    if x == 0:
        return "0"
    if np.isfinite(x) and x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_complex(c: complex) -> str:
    if c.imag == 0:
        return _fmt_real(c.real)
    return f"({_fmt_real(c.real)},{_fmt_real(c.imag)})"


def serialize_tree(t: TreeNode) -> str:
    if isinstance(t, Leaf):
        return f"[q{t.qubit} {_fmt_complex(t.a0)} {_fmt_complex(t.a1)}]"
    op = "+" if isinstance(t, Sum) else "x"
    return "(" + op + " " + " ".join(serialize_tree(c) for c in t.children) + ")"


# ------------------------------------------------------------ basic queries


def tree_size(t: TreeNode) -> int:
    memo: dict[int, int] = {}

    def go(node) -> int:
        key = id(node)
        if key not in memo:
            memo[key] = 1 if isinstance(node, Leaf) else sum(go(c) for c in node.children)
        return memo[key]

    return go(t)


def count_gates(t: TreeNode, kind=Prod) -> int:
    """Number of binary gates of ``kind`` after binarization."""
    if isinstance(t, Leaf):
        return 0
    own = len(t.children) - 1 if isinstance(t, kind) else 0
    return own + sum(count_gates(c, kind) for c in t.children)


def leaves(t: TreeNode):
    if isinstance(t, Leaf):
        yield t
    else:
        for c in t.children:
            yield from leaves(c)


def map_leaves(t: TreeNode, fn: Callable[[Leaf], TreeNode]) -> TreeNode:
    """Rebuild ``t`` with every leaf replaced by ``fn(leaf)``; shared subtrees stay shared."""
    memo: dict[int, TreeNode] = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Leaf):
            out = fn(node)
        else:
            kids = tuple(go(c) for c in node.children)
            out = type(node)(kids)
        memo[key] = out
        return out

    return go(t)


def binarize(t: TreeNode) -> TreeNode:
    """Left-associated binary form; leaf count is unchanged."""
    if isinstance(t, Leaf):
        return t
    kids = [binarize(c) for c in t.children]
    acc = kids[0]
    for c in kids[1:]:
        acc = type(t)((acc, c))
    return acc


# --------------------------------------------------------------- evaluation


def _tensor(t: TreeNode, memo: dict) -> tuple[tuple[int, ...], np.ndarray]:
    """Dense tensor of a subtree with one axis per qubit, qubits ascending."""
    key = id(t)
    if key in memo:
        return memo[key]
    if isinstance(t, Leaf):
        out = ((t.qubit,), t.vector)
    elif isinstance(t, Sum):
        parts = [_tensor(c, memo) for c in t.children]
        total = parts[0][1].copy()
        for _, arr in parts[1:]:
            total += arr
        out = (parts[0][0], total)
    else:
        order: list[int] = []
        arr = np.ones((), dtype=np.complex128)
        for c in t.children:
            qs, sub = _tensor(c, memo)
            order.extend(qs)
            arr = np.multiply.outer(arr, sub)
        perm = np.argsort(order)
        out = (tuple(sorted(order)), np.transpose(arr, perm))
    memo[key] = out
    return out


def subtree_vector(t: TreeNode) -> tuple[tuple[int, ...], np.ndarray]:
    """Flat amplitude vector of ``t`` over its own qubits (ascending, first = MSB)."""
    qs, arr = _tensor(t, {})
    return qs, arr.reshape(-1)


def evaluate(t: TreeNode, n: int | None = None) -> StateVector:
    """Dense (generally unnormalized) statevector of a tree over qubits ``1..n``."""
    if n is None:
        n = max(t.qubits)
    if t.qubits != frozenset(range(1, n + 1)):
        raise TreeError(f"tree covers qubits {_fmt_qubits(t.qubits)}, expected 1..{n}")
    _, vec = subtree_vector(t)
    return StateVector(n, vec)


def expansion_tree(s: StateVector, tol: float = 0.0) -> TreeNode:
    """The literal computational-basis expansion: one product branch per nonzero amplitude."""
    n = s.n_qubits
    terms = []
    for x in np.flatnonzero(np.abs(s.amplitudes) > tol):
        bits = format(int(x), f"0{n}b")
        c = complex(s.amplitudes[x])
        lvs = [Leaf(q, 1 - int(b), int(b)) for q, b in enumerate(bits, 1)]
        first = lvs[0]
        lvs[0] = Leaf(1, first.a0 * c, first.a1 * c)
        terms.append(lvs[0] if n == 1 else Prod(tuple(lvs)))
    if not terms:
        raise TreeError("the zero vector has no tree")
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


# ----------------------------------------------------------------- builders


def _product(vectors: dict[int, tuple[complex, complex]]) -> TreeNode:
    lvs = [Leaf(q, *v) for q, v in sorted(vectors.items())]
    return lvs[0] if len(lvs) == 1 else Prod(tuple(lvs))


def build_ghz(n: int) -> TreeNode:
    """``|0...0> + |1...1>`` with exactly ``2n`` leaves."""
    if n < 1:
        raise ValueError("GHZ needs n >= 1")
    zeros = _product({q: (1, 0) for q in range(1, n + 1)})
    ones = _product({q: (0, 1) for q in range(1, n + 1)})
    return Sum((zeros, ones))


def build_dicke(n: int, k: int) -> TreeNode:
    """Tree proportional to the weight-``k`` Dicke state, from the Fourier sum.

    For ``k' = max(k, n - k)`` the sum over ``j < k'`` of
    ``(|0> + w^j |1>)^n`` with ``w = exp(2 pi i / k')`` equals ``k'`` times the
    sum of Dicke states whose weight is a multiple of ``k'``; the unwanted
    weight-0 (and, when ``k' = n/2``, weight-n) terms are subtracted.  For
    ``k < n/2`` the roles of ``|0>`` and ``|1>`` are swapped.  The result
    evaluates to ``k' |D_{n,k}>``.
    """
    if not 1 <= k <= n - 1:
        raise ValueError(f"Dicke weight k={k} must satisfy 1 <= k <= n-1 (n={n})")
    flip = 2 * k < n
    kk = n - k if flip else k

    def leafvec(a0, a1):
        return (a1, a0) if flip else (a0, a1)

    terms = []
    for j in range(kk):
        w = np.exp(2j * np.pi * j / kk)
        terms.append(_product({q: leafvec(1, w) for q in range(1, n + 1)}))
    corr = {q: leafvec(1, 0) for q in range(1, n + 1)}
    corr[1] = leafvec(-kk, 0)
    terms.append(_product(corr))
    if 2 * kk == n:
        corr = {q: leafvec(0, 1) for q in range(1, n + 1)}
        corr[1] = leafvec(0, -kk)
        terms.append(_product(corr))
    return Sum(tuple(terms))


def build_mps_tree(tensors, n: int | None = None) -> TreeNode:
    """Tree for ``sum_x Tr(A^(1)_{x_1} ... A^(n)_{x_n}) |x>`` by recursive halving.

    ``tensors[i] = (A0, A1)`` holds the two ``chi x chi`` matrices of qubit
    ``i + 1``.  Each half-chain matrix entry becomes a subtree; the entry
    ``(a, b)`` of a chain is ``sum_s left(a, s) x right(s, b)``.  Identically
    zero entries are dropped, so the size never exceeds the ``2 chi``-per-level
    recursion bound.  Subtrees are shared between parents (the result is
    immutable, so sharing is safe).
    """
    mats = [(np.asarray(a0, dtype=np.complex128), np.asarray(a1, dtype=np.complex128)) for a0, a1 in tensors]
    if n is None:
        n = len(mats)
    if len(mats) != n or n < 1 or n & (n - 1):
        raise DimensionError(f"need a power-of-two number of sites, got {len(mats)} tensors for n={n}")
    chi = mats[0][0].shape[0]
    for i, (a0, a1) in enumerate(mats, 1):
        if a0.shape != (chi, chi) or a1.shape != (chi, chi):
            raise DimensionError(f"site {i}: expected two {chi}x{chi} matrices, got {a0.shape} and {a1.shape}")

    memo: dict[tuple[int, int, int, int], TreeNode | None] = {}

    def entry(lo: int, hi: int, a: int, b: int) -> TreeNode | None:
        key = (lo, hi, a, b)
        if key in memo:
            return memo[key]
        if hi - lo == 1:
            a0, a1 = mats[lo][0][a, b], mats[lo][1][a, b]
            out = None if a0 == 0 and a1 == 0 else Leaf(lo + 1, a0, a1)
        else:
            mid = (lo + hi) // 2
            terms = []
            for s in range(chi):
                left, right = entry(lo, mid, a, s), entry(mid, hi, s, b)
                if left is not None and right is not None:
                    terms.append(Prod((left, right)))
            out = None if not terms else terms[0] if len(terms) == 1 else Sum(tuple(terms))
        memo[key] = out
        return out

    diag = [t for a in range(chi) if (t := entry(0, n, a, a)) is not None]
    if not diag:
        raise TreeError("the MPS contracts to the zero vector")
    return diag[0] if len(diag) == 1 else Sum(tuple(diag))


def cluster_1d_tensors(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Bond-dimension-2 tensors of the open 1D cluster state (unnormalized, amplitudes +-1).

    The bond carries the previous bit; the trace boundary is closed by
    pinning the incoming bond of site 1 and the outgoing bond of site n to 0.
    """
    if n < 2:
        raise ValueError("a cluster chain needs n >= 2")
    tensors = []
    for i in range(n):
        pair = []
        for x in (0, 1):
            m = np.zeros((2, 2))
            for a in (0, 1):
                if i == 0 and a == 1:
                    continue
                b = 0 if i == n - 1 else x
                m[a, b] = (-1) ** (a * x)
            pair.append(m)
        tensors.append(tuple(pair))
    return tensors


# ------------------------------------------------------------ local maps


def apply_ilo(t: TreeNode, ops) -> TreeNode:
    """Apply an invertible 2x2 operator to every leaf; ``ops`` maps qubit -> matrix.

    ``ops`` may be a dict keyed by qubit or a sequence indexed by ``qubit - 1``.
    """
    table = dict(ops) if isinstance(ops, dict) else {q: op for q, op in enumerate(ops, 1)}
    mats = {}
    for q, op in table.items():
        m = np.asarray(op, dtype=np.complex128)
        if m.shape != (2, 2):
            raise DimensionError(f"operator for qubit {q} is not 2x2")
        if abs(np.linalg.det(m)) == 0:
            raise ValueError(f"operator for qubit {q} is singular")
        mats[q] = m
    missing = t.qubits - mats.keys()
    if missing:
        raise ValueError(f"no operator given for qubit(s) {_fmt_qubits(missing)}")

    def fn(leaf: Leaf) -> Leaf:
        v = mats[leaf.qubit] @ leaf.vector
        return Leaf(leaf.qubit, v[0], v[1])

    return map_leaves(t, fn)


# ------------------------------------------------- separating-gate analysis


@dataclass(frozen=True)
class SeparationReport:
    all_separating: bool
    strictly_separating_count: int
    prod_gates: int
    offending_gate_path: tuple[int, ...] | None = None
    offending_split: tuple[tuple[int, ...], tuple[int, ...]] | None = field(default=None, repr=False)


def _side(qs: frozenset[int], y: frozenset[int]) -> str | None:
    if qs <= y:
        return "Y"
    if not (qs & y):
        return "Z"
    return None


def separating_analysis(t: TreeNode, p: Bipartition) -> SeparationReport:
    """Check every binary product gate for a child lying entirely on one side.

    ``offending_gate_path`` is the child-index path from the root to the
    n-ary product gate holding the first non-separating binary gate.
    """
    y = frozenset(p.y_qubits)
    strict = 0
    total = 0
    offending = None
    split = None
    stack = [(t, ())]
    while stack:
        node, path = stack.pop()
        if isinstance(node, Leaf):
            continue
        if isinstance(node, Prod):
            prefix: frozenset[int] = node.children[0].qubits
            for c in node.children[1:]:
                total += 1
                s1, s2 = _side(prefix, y), _side(c.qubits, y)
                if s1 is None and s2 is None:
                    if offending is None:
                        offending = path
                        split = (tuple(sorted(prefix)), tuple(sorted(c.qubits)))
                elif s1 is not None and s2 is not None and s1 != s2:
                    strict += 1
                prefix = prefix | c.qubits
        for k in range(len(node.children) - 1, -1, -1):
            stack.append((node.children[k], path + (k,)))
    return SeparationReport(offending is None, strict, total, offending, split)


def _prod_of(factors: list[TreeNode]) -> TreeNode | None:
    if not factors:
        return None
    return factors[0] if len(factors) == 1 else Prod(tuple(factors))


def schmidt_like_rewrite(t: TreeNode, p: Bipartition) -> list[tuple[TreeNode | None, TreeNode | None]]:
    """Rewrite an all-separating tree as ``sum_i Y_i x Z_i``.

    Product gates with one single-sided child are distributed over the
    other child's terms, pushing sums up to the root.  A ``None`` factor
    stands for the scalar 1 (that side has no qubits).  Raises
    :class:`TreeError` naming the first non-separating gate.
    """
    y = frozenset(p.y_qubits)
    if not t.qubits <= frozenset(range(1, p.n + 1)):
        raise TreeError("tree mentions qubits outside the bipartition")

    def decomp(node, path) -> list[tuple[list, list]]:
        side = _side(node.qubits, y)
        if side == "Y":
            return [([node], [])]
        if side == "Z":
            return [([], [node])]
        if isinstance(node, Sum):
            out = []
            for k, c in enumerate(node.children):
                out.extend(decomp(c, path + (k,)))
            return out
        acc = decomp(node.children[0], path + (0,))
        prefix = node.children[0].qubits
        for k, c in enumerate(node.children[1:], 1):
            s_pre, s_c = _side(prefix, y), _side(c.qubits, y)
            if s_c is not None:
                acc = [(ys + [c], zs) if s_c == "Y" else (ys, zs + [c]) for ys, zs in acc]
            elif s_pre is not None:
                (pys, pzs), = acc
                acc = [(pys + ys, zs) if s_pre == "Y" else (ys, pzs + zs) for ys, zs in decomp(c, path + (k,))]
            else:
                raise TreeError(
                    f"product gate at path {path} is not separating: its binary gate joins qubits "
                    f"{_fmt_qubits(prefix)} and {_fmt_qubits(c.qubits)}, both straddling Y|Z"
                )
            prefix = prefix | c.qubits
        return acc

    return [(_prod_of(ys), _prod_of(zs)) for ys, zs in decomp(t, ())]


def evaluate_pairs(pairs, p: Bipartition) -> StateVector:
    """Dense state of ``sum_i Y_i x Z_i`` over the bipartition's qubits."""
    ny, nz = len(p.y_qubits), len(p.z_qubits)
    m = np.zeros((1 << ny, 1 << nz), dtype=np.complex128)
    for ytree, ztree in pairs:
        yv = np.ones(1, dtype=np.complex128) if ytree is None else _side_vector(ytree, p.y_qubits)
        zv = np.ones(1, dtype=np.complex128) if ztree is None else _side_vector(ztree, p.z_qubits)
        m += np.outer(yv, zv)
    return state_from_coefficient_matrix(m, p)


def _side_vector(t: TreeNode, side: tuple[int, ...]) -> np.ndarray:
    if t.qubits != frozenset(side):
        raise TreeError(f"factor covers {_fmt_qubits(t.qubits)}, expected {_fmt_qubits(side)}")
    return subtree_vector(t)[1]


# ---------------------------------------------------------- random trees


def _random_leaf(q: int, rng: np.random.Generator) -> Leaf:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return Leaf(q, v[0], v[1])


def _random_split(qs: list[int], rng: np.random.Generator) -> list[list[int]]:
    k = int(rng.integers(2, min(3, len(qs)) + 1))
    perm = list(rng.permutation(qs))
    cuts = sorted(rng.choice(np.arange(1, len(qs)), size=k - 1, replace=False))
    blocks, prev = [], 0
    for c in list(cuts) + [len(qs)]:
        blocks.append(sorted(int(q) for q in perm[prev:c]))
        prev = c
    return blocks


def random_tree(qubits, rng: np.random.Generator, depth: int = 4, p_sum: float = 0.4) -> TreeNode:
    """Random well-formed tree over ``qubits`` with complex Gaussian leaves."""
    qs = sorted(qubits)
    if len(qs) == 1:
        if depth > 0 and rng.random() < 0.15:
            return Sum((_random_leaf(qs[0], rng), _random_leaf(qs[0], rng)))
        return _random_leaf(qs[0], rng)
    if depth > 0 and rng.random() < p_sum:
        k = int(rng.integers(2, 4))
        return Sum(tuple(random_tree(qs, rng, depth - 1, p_sum) for _ in range(k)))
    return Prod(tuple(random_tree(b, rng, depth - 1, p_sum) for b in _random_split(qs, rng)))


def random_separating_tree(p: Bipartition, rng: np.random.Generator, depth: int = 4) -> TreeNode:
    """Random tree over ``1..n`` whose product gates are all separating for ``p``."""
    y = set(p.y_qubits)

    def mixed(qs: list[int], d: int) -> TreeNode:
        ys = [q for q in qs if q in y]
        zs = [q for q in qs if q not in y]
        if not ys or not zs:
            return random_tree(qs, rng, max(d, 0))
        r = rng.random()
        if d > 0 and r < 0.35:
            return Sum(tuple(mixed(qs, d - 1) for _ in range(int(rng.integers(2, 4)))))
        if r < 0.7 and len(qs) > 2:
            # peel a single-sided block off and recurse on the rest
            pool = ys if (len(ys) > 1 and rng.random() < 0.5) or len(zs) == 1 else zs
            if len(pool) > 1:
                size = int(rng.integers(1, len(pool)))
                block = sorted(int(q) for q in rng.choice(pool, size=size, replace=False))
                rest = [q for q in qs if q not in block]
                kids = [random_tree(block, rng, d - 1), mixed(rest, d - 1)]
                if rng.random() < 0.5:
                    kids.reverse()
                return Prod(tuple(kids))
        kids = [random_tree(ys, rng, d - 1), random_tree(zs, rng, d - 1)]
        if rng.random() < 0.5:
            kids.reverse()
        return Prod(tuple(kids))

    return mixed(list(range(1, p.n + 1)), depth)


def all_bipartitions(n: int, size: int | None = None):
    """Every bipartition of ``1..n`` with ``|Y| = size`` (default ``n // 2``)."""
    size = n // 2 if size is None else size
    for ys in combinations(range(1, n + 1), size):
        yield Bipartition.from_qubits(n, ys)
