"""Bit-packed matrices over GF(2).

Rows are stored as little-endian 64-bit words: column ``j`` lives in word
``j // 64`` at bit ``j % 64``.  Bits past ``cols`` are kept zero.

Rank uses a batched XOR elimination (:func:`gf2_rank_batch`) so the Monte
Carlo estimators can test thousands of column submatrices per numpy call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

WORD = 64


def _nwords(cols: int) -> int:
    return max(1, -(-cols // WORD))


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a ``(..., cols)`` 0/1 array into ``(..., nwords)`` uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    cols = bits.shape[-1]
    nw = _nwords(cols)
    pad = nw * WORD - cols
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(bits.shape[:-1] + (nw,))


def unpack_bits(words: np.ndarray, cols: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    as_bytes = words.view(np.uint8).reshape(words.shape[:-1] + (words.shape[-1] * 8,))
    return np.unpackbits(as_bytes, axis=-1, bitorder="little")[..., :cols]


@dataclass(frozen=True, eq=False)
class BitMatrix:
    rows: int
    cols: int
    row_words: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.row_words, dtype=np.uint64).reshape(self.rows, _nwords(self.cols))
        tail = self.cols % WORD
        if tail and self.rows:
            last = w[:, -1]
            if np.any(last >> np.uint64(tail)):
                raise ValueError("bits set beyond the last column")
        w.setflags(write=False)
        object.__setattr__(self, "row_words", w)

    @classmethod
    def from_array(cls, bits) -> BitMatrix:
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("BitMatrix needs a 2-D 0/1 array")
        if np.any(arr > 1):
            raise ValueError("entries must be 0 or 1")
        return cls(arr.shape[0], arr.shape[1], pack_bits(arr))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols, np.zeros((rows, _nwords(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, k: int) -> BitMatrix:
        return cls.from_array(np.eye(k, dtype=np.uint8))

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> BitMatrix:
        return cls.from_array(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))

    def to_array(self) -> np.ndarray:
        return unpack_bits(self.row_words, self.cols).copy()

    def __eq__(self, other):
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.row_words, other.row_words)
        )

    def __getitem__(self, ij) -> int:
        i, j = ij
        return int(self.row_words[i, j // WORD] >> np.uint64(j % WORD) & np.uint64(1))

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_array(self.to_array().T)

    def hstack(self, other: BitMatrix) -> BitMatrix:
        return BitMatrix.from_array(np.hstack([self.to_array(), other.to_array()]))

    def matvec(self, v) -> np.ndarray:
        """``A v mod 2`` for a 0/1 vector of length ``cols``."""
        v = np.asarray(v, dtype=np.int64)
        return (self.to_array().astype(np.int64) @ v) % 2

    def row_mask(self, i: int) -> int:
        """Row ``i`` as a Python int with bit ``j`` = column ``j``."""
        return sum(int(w) << (WORD * k) for k, w in enumerate(self.row_words[i]))

    # --- text format: one row per line of '0'/'1', column 0 first ---

    def to_text(self) -> str:
        return "".join("".join(str(b) for b in row) + "\n" for row in self.to_array())

    @classmethod
    def from_text(cls, text: str) -> BitMatrix:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty matrix text")
        width = len(lines[0])
        for k, ln in enumerate(lines, 1):
            if len(ln) != width or set(ln) - {"0", "1"}:
                raise ValueError(f"line {k}: expected {width} characters of 0/1, got {ln!r}")
        return cls.from_array([[int(ch) for ch in ln] for ln in lines])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> BitMatrix:
        return cls.from_text(Path(path).read_text())


def gf2_rank_batch(words: np.ndarray, cols: int) -> np.ndarray:
    """Ranks of a stack of packed matrices, shape ``(batch, rows, nwords)``.

    Works on a copy.  Every batch member is eliminated in lock step, one
    column at a time, with its own pivot row.
    """
    w = np.array(words, dtype=np.uint64, copy=True)
    if w.ndim != 3:
        raise ValueError("expected a (batch, rows, nwords) array")
    batch, rows, _ = w.shape
    rank = np.zeros(batch, dtype=np.int64)
    if rows == 0 or batch == 0:
        return rank
    row_ids = np.arange(rows)
    bidx = np.arange(batch)
    one = np.uint64(1)
    for c in range(cols):
        active = rank < rows
        if not active.any():
            break
        wi, sh = divmod(c, WORD)
        colbits = ((w[:, :, wi] >> np.uint64(sh)) & one).astype(bool)
        eligible = colbits & (row_ids[None, :] >= rank[:, None])
        has = eligible.any(axis=1) & active
        if not has.any():
            continue
        b = bidx[has]
        piv = eligible[b].argmax(axis=1)
        tgt = rank[b]
        swap_rows = w[b, piv].copy()
        w[b, piv] = w[b, tgt]
        w[b, tgt] = swap_rows
        colbits[b, piv] = colbits[b, tgt]
        colbits[b, tgt] = True
        clear = colbits[b].copy()
        clear[np.arange(b.size), tgt] = False
        w[b] ^= np.where(clear[:, :, None], swap_rows[:, None, :], np.uint64(0))
        rank[b] += 1
    return rank


def gf2_rank(m: BitMatrix) -> int:
    return int(gf2_rank_batch(m.row_words[None], m.cols)[0])


def gf2_is_invertible(m: BitMatrix) -> bool:
    if m.rows != m.cols:
        raise ValueError(f"invertibility needs a square matrix, got {m.rows}x{m.cols}")
    return gf2_rank(m) == m.rows


def gf2_rref(m: BitMatrix) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form as a 0/1 array plus the pivot columns."""
    a = m.to_array().astype(np.uint8)
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        if r == m.rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        hit = np.flatnonzero(a[:, c])
        hit = hit[hit != r]
        a[hit] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def gf2_kernel_basis(m: BitMatrix) -> list[np.ndarray]:
    """Basis of ``{v : m v = 0 mod 2}``, one vector per free column."""
    red, pivots = gf2_rref(m)
    pivot_set = set(pivots)
    basis = []
    for f in range(m.cols):
        if f in pivot_set:
            continue
        v = np.zeros(m.cols, dtype=np.uint8)
        v[f] = 1
        for row, pc in zip(red, pivots):
            if row[f]:
                v[pc] = 1
        basis.append(v)
    return basis


def gf2_columns(m: BitMatrix, mask: int) -> BitMatrix:
    """Columns selected by ``mask`` (bit ``j`` = column ``j``), in ascending order."""
    if mask < 0 or mask >> m.cols:
        raise ValueError(f"mask {mask:#x} selects columns outside 0..{m.cols - 1}")
    sel = [j for j in range(m.cols) if mask >> j & 1]
    return BitMatrix.from_array(m.to_array()[:, sel].reshape(m.rows, len(sel)))


def independent_rows(m: BitMatrix) -> list[int]:
    """Indices of the first rows (in order) that are linearly independent."""
    chosen: list[int] = []
    basis: dict[int, int] = {}
    for i in range(m.rows):
        v = m.row_mask(i)
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                chosen.append(i)
                break
            v ^= basis[top]
    return chosen
