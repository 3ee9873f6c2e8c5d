"""Vocabulary construction and windowed co-occurrence counting.

The corpus is one flat token stream. Pairs are counted over a fixed window
with unit weight per pair, and each unordered pair occurrence increments both
``#(i, j)`` and ``#(j, i)``; only the upper triangle ``i <= j`` is stored.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from sspmi.errors import DomainError

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 10_000_000


@dataclass
class Vocabulary:
    """Dense word index ordered by descending count, ties broken lexicographically."""

    words: list[str]
    counts: np.ndarray
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if not self.index:
            self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words) or len(self.counts) != len(self.words):
            raise DomainError("vocabulary words, counts and index disagree")

    @property
    def n(self) -> int:
        return len(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def get(self, word: str, default: int = -1) -> int:
        return self.index.get(word, default)


@dataclass
class CooccurrenceCounts:
    """Symmetric co-occurrence counts stored as the upper triangle.

    ``rows[k] <= cols[k]`` and ``counts[k] = #(rows[k], cols[k]) = #(cols[k], rows[k])``.
    Diagonal entries already hold the doubled count, so the total over the full
    matrix is ``N = 2 * sum(off-diagonal) + sum(diagonal)``.
    """

    rows: np.ndarray
    cols: np.ndarray
    counts: np.ndarray
    n: int
    window: int
    vocab: Vocabulary | None = None

    @property
    def total(self) -> float:
        diag = self.rows == self.cols
        return float(2 * self.counts[~diag].sum() + self.counts[diag].sum())

    @property
    def nnz(self) -> int:
        return len(self.counts)

    def to_csr(self) -> sp.csr_matrix:
        """Full symmetric matrix in CSR form."""
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.counts, self.counts[off]])
        m = sp.csr_matrix((v, (r, c)), shape=(self.n, self.n))
        m.sort_indices()
        return m

    def marginals(self) -> np.ndarray:
        """Row sums ``#(i) = sum_j #(i, j)`` of the full symmetric matrix."""
        off = self.rows != self.cols
        out = np.bincount(self.rows, weights=self.counts, minlength=self.n)
        out += np.bincount(self.cols[off], weights=self.counts[off], minlength=self.n)
        return out

    def get(self, i: int, j: int) -> float:
        i, j = min(i, j), max(i, j)
        # entries are sorted by (row, col)
        keys = self.rows.astype(np.int64) * self.n + self.cols
        pos = np.searchsorted(keys, i * self.n + j)
        if pos < len(keys) and keys[pos] == i * self.n + j:
            return self.counts[pos].item()
        return 0


def read_tokens(path: str | Path, lowercase: bool = True) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    if lowercase:
        text = text.lower()
    return text.split()


def build_vocab(tokens: Iterable[str], min_count: int) -> Vocabulary:
    """Keep words seen at least ``min_count`` times.

    Raises
    ------
    DomainError
        If ``min_count`` is not positive or no word survives the filter.
    """
    if min_count < 1:
        raise DomainError(f"min_count must be positive, got {min_count}")
    freq = Counter(tokens)
    kept = sorted(((w, c) for w, c in freq.items() if c >= min_count), key=lambda wc: (-wc[1], wc[0]))
    if not kept:
        raise DomainError(f"empty vocabulary: no word occurs {min_count} or more times")
    words = [w for w, _ in kept]
    logger.info("vocabulary: %d of %d distinct words kept (min_count=%d)", len(words), len(freq), min_count)
    return Vocabulary(words, np.array([c for _, c in kept], dtype=np.int64))


def encode(tokens: Sequence[str], vocab: Vocabulary) -> np.ndarray:
    """Map tokens to indices; out-of-vocabulary tokens become -1 but keep their position."""
    get = vocab.index.get
    return np.fromiter((get(t, -1) for t in tokens), dtype=np.int64, count=len(tokens))


def _count_chunk(ids: np.ndarray, stop: int, n: int, window: int, dynamic: bool):
    """Pair keys and weights for left positions ``t < stop`` of ``ids``."""
    keys, weights = [], []
    for o in range(1, window + 1):
        left = ids[: min(stop, len(ids) - o)]
        right = ids[o : o + len(left)]
        ok = (left >= 0) & (right >= 0)
        a, b = left[ok], right[ok]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        k, c = np.unique(lo * n + hi, return_counts=True)
        w = c.astype(np.float64) if dynamic else c
        if dynamic:
            w = w * ((window - o + 1) / window)
        keys.append(k)
        weights.append(w)
    return keys, weights


def _merge(keys: list[np.ndarray], weights: list[np.ndarray]):
    if not keys:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    k = np.concatenate(keys)
    w = np.concatenate(weights)
    uk, inv = np.unique(k, return_inverse=True)
    summed = np.bincount(inv, weights=w, minlength=len(uk))
    if np.issubdtype(w.dtype, np.integer):
        # exact: float64 holds integers up to 2**53
        summed = summed.astype(np.int64)
    return uk, summed


def count_cooccurrences(
    tokens: Sequence[str] | np.ndarray,
    vocab: Vocabulary,
    window: int,
    dynamic_window: bool = False,
    chunk_size: int = DEFAULT_CHUNK,
) -> CooccurrenceCounts:
    """Count symmetric co-occurrences within ``window`` tokens.

    Every position ``t`` and offset ``1 <= o <= window`` where both tokens are
    in the vocabulary adds one to ``#(i, j)`` and one to ``#(j, i)``.
    ``tokens`` may be raw strings or an already encoded index array.

    ``dynamic_window`` weights offset ``o`` by ``(window - o + 1) / window``,
    the expected weight of word2vec's shrinking window. Off by default.
    """
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    ids = tokens if isinstance(tokens, np.ndarray) else encode(tokens, vocab)
    n = vocab.n
    keys, weights = [], []
    for start in range(0, max(len(ids), 1), chunk_size):
        piece = ids[start : start + chunk_size + window]
        k, w = _count_chunk(piece, chunk_size, n, window, dynamic_window)
        ck, cw = _merge(k, w)
        keys.append(ck)
        weights.append(cw)
    uk, summed = _merge(keys, weights)
    rows, cols = uk // n, uk % n
    diag = rows == cols
    summed[diag] *= 2
    return CooccurrenceCounts(rows.astype(np.int64), cols.astype(np.int64), summed, n, window, vocab)


def naive_count(tokens: Sequence[str], vocab: Vocabulary, window: int) -> dict[tuple[int, int], int]:
    """Reference O(T * L) counter returning the full (both orderings) count map."""
    out: dict[tuple[int, int], int] = {}
    for t in range(len(tokens)):
        i = vocab.get(tokens[t])
        if i < 0:
            continue
        for o in range(1, window + 1):
            if t + o >= len(tokens):
                break
            j = vocab.get(tokens[t + o])
            if j < 0:
                continue
            out[(i, j)] = out.get((i, j), 0) + 1
            out[(j, i)] = out.get((j, i), 0) + 1
    return out


def write_vocab(vocab: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for w, c in zip(vocab.words, vocab.counts):
            f.write(f"{w}\t{c}\n")


def read_vocab(path: str | Path) -> Vocabulary:
    words, counts = [], []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            w, c = line.split("\t")
            words.append(w)
            counts.append(int(c))
    return Vocabulary(words, np.array(counts, dtype=np.int64))


def _fmt_count(x) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.9g}"


def write_counts(counts: CooccurrenceCounts, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{counts.n} {_fmt_count(counts.total)} {counts.window}\n")
        for i, j, c in zip(counts.rows.tolist(), counts.cols.tolist(), counts.counts.tolist()):
            f.write(f"{i}\t{j}\t{_fmt_count(c)}\n")


def read_counts(path: str | Path, vocab: Vocabulary | None = None) -> CooccurrenceCounts:
    with open(path, encoding="utf-8") as f:
        n, total, window = f.readline().split()
        body = np.loadtxt(f, delimiter="\t", ndmin=2, dtype=np.float64)
    if body.size == 0:
        body = np.zeros((0, 3))
    vals = body[:, 2]
    if np.all(vals == np.round(vals)):
        vals = vals.astype(np.int64)
    out = CooccurrenceCounts(body[:, 0].astype(np.int64), body[:, 1].astype(np.int64), vals, int(n), int(window), vocab)
    if vocab is not None and vocab.n != out.n:
        raise DomainError(f"counts file has n={out.n} but vocabulary has {vocab.n} words")
    if abs(out.total - float(total)) > 1e-6 * max(1.0, float(total)):
        raise DomainError(f"counts file header N={total} disagrees with body sum {out.total}")
    return out
