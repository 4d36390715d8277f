"""Vectorised free-group positions for many independent walkers at once.

A :class:`StackBatch` holds one reduced word per row as a growable int8
stack. Applying a column of letters pushes or cancels in O(1) per row, so a
Monte Carlo step costs a handful of numpy operations regardless of the
number of walkers. Letter 0 is a no-op, which lets multi-letter steps be
applied column by column from a zero-padded table.
"""
from __future__ import annotations

import numpy as np

from .groups import FreeGroup, ReducedWord


class StackBatch:
    def __init__(self, size: int, rank: int, capacity: int = 64):
        self.rank = rank
        self.buf = np.zeros((size, max(capacity, 8)), dtype=np.int8)
        self.length = np.zeros(size, dtype=np.int64)
        self._rows = np.arange(size)

    @classmethod
    def from_words(cls, words, rank: int) -> "StackBatch":
        words = [tuple(w) for w in words]
        cap = max([len(w) for w in words] + [8]) * 2
        out = cls(len(words), rank, cap)
        for i, w in enumerate(words):
            out.buf[i, : len(w)] = w
            out.length[i] = len(w)
        return out

    def __len__(self):
        return len(self.length)

    def copy(self) -> "StackBatch":
        out = StackBatch.__new__(StackBatch)
        out.rank = self.rank
        out.buf = self.buf.copy()
        out.length = self.length.copy()
        out._rows = self._rows
        return out

    def take(self, idx) -> "StackBatch":
        """Rows ``idx`` (with repetition) as a new batch."""
        out = StackBatch.__new__(StackBatch)
        out.rank = self.rank
        width = max(int(self.length.max(initial=0)) + 8, 8)
        out.buf = self.buf[idx, :width].copy()
        out.length = self.length[idx].copy()
        out._rows = np.arange(len(out.length))
        return out

    def _ensure(self, extra: int):
        need = int(self.length.max(initial=0)) + extra
        if need > self.buf.shape[1]:
            new = np.zeros((self.buf.shape[0], max(need, 2 * self.buf.shape[1])), dtype=np.int8)
            new[:, : self.buf.shape[1]] = self.buf
            self.buf = new

    def top(self, rows=None) -> np.ndarray:
        """Last letter of each row (0 for the identity)."""
        rows = self._rows if rows is None else rows
        L = self.length[rows]
        has = L > 0
        out = np.zeros(len(rows), dtype=np.int8)
        out[has] = self.buf[rows[has], L[has] - 1]
        return out

    def apply(self, letters: np.ndarray, rows=None):
        """Right-multiply row ``rows[i]`` (default: row ``i``) by the letter ``letters[i]``."""
        rows = self._rows if rows is None else rows
        self._ensure(1)
        letters = letters.astype(np.int8, copy=False)
        t = self.top(rows)
        L = self.length[rows]
        nz = letters != 0
        cancel = nz & (L > 0) & (t == -letters)
        push = nz & ~cancel
        self.length[rows[cancel]] -= 1
        self.buf[rows[push], L[push]] = letters[push]
        self.length[rows[push]] += 1
        return cancel

    def apply_words(self, table: np.ndarray, idx: np.ndarray, rows=None):
        """Right-multiply each row by the zero-padded word ``table[idx[i]]``."""
        for c in range(table.shape[1]):
            self.apply(table[idx, c], rows)

    def letters_at(self, pos: int) -> np.ndarray:
        """Letter at position ``pos`` of each row (0 where the row is shorter)."""
        out = np.zeros(len(self.length), dtype=np.int8)
        ok = self.length > pos
        out[ok] = self.buf[self._rows[ok], pos]
        return out

    def prefixes(self, depth: int) -> np.ndarray:
        if depth > self.buf.shape[1]:
            self._ensure(depth - int(self.length.max(initial=0)))
        return self.buf[:, :depth].copy()

    def word(self, i: int) -> ReducedWord:
        return ReducedWord(tuple(int(x) for x in self.buf[i, : self.length[i]]), FreeGroup(self.rank))


def pad_words(words, width: int = None) -> np.ndarray:
    """Stack words into a zero-padded int8 table."""
    words = [tuple(w) for w in words]
    width = max([len(w) for w in words] + [1]) if width is None else width
    out = np.zeros((len(words), width), dtype=np.int8)
    for i, w in enumerate(words):
        out[i, : len(w)] = w
    return out


def common_prefix_lengths(rows: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Common-prefix length of every row of ``rows`` with the 1-d ``ref``."""
    width = min(rows.shape[1], ref.shape[0])
    eq = rows[:, :width] == ref[None, :width]
    out = np.where(eq.all(axis=1), width, np.argmin(eq, axis=1))
    return out.astype(np.int64)
