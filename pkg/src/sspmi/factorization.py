"""Randomized truncated SVD and the symmetric ``U sqrt(S)`` / ``V sqrt(S)`` embedding split."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from sspmi.errors import DomainError
from sspmi.matrices import SparseScoreMatrix


class Provenance(enum.Enum):
    SVD = "SVD"
    SGNS = "SGNS"
    NonsigmoidSGNS = "NonsigmoidSGNS"
    FILE = "FILE"


@dataclass
class SvdResult:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def d(self) -> int:
        return len(self.S)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.S) @ self.V.T


@dataclass
class EmbeddingSet:
    """Word vectors ``W`` and (optionally) context vectors ``C``, one row per word."""

    W: np.ndarray
    C: np.ndarray | None
    words: list[str]
    provenance: Provenance = Provenance.SVD
    objective_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.W.shape[0] != len(self.words):
            raise DomainError(f"{self.W.shape[0]} word vectors for {len(self.words)} words")
        if self.C is not None and self.C.shape != self.W.shape:
            raise DomainError("word and context matrices differ in shape")
        if not np.all(np.isfinite(self.W)):
            raise DomainError("embedding matrix has non-finite entries")

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def word_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.words)}


def _operator(m) -> sp.csr_matrix | np.ndarray:
    if isinstance(m, SparseScoreMatrix):
        return m.to_csr()
    if sp.issparse(m):
        return m.tocsr()
    return np.asarray(m, dtype=np.float64)


def _orthonormal(y: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(y)
    return q


def truncated_svd(m, d: int, oversample: int = 10, power_iters: int = 4, seed: int = 0) -> SvdResult:
    """Rank-``d`` SVD by randomized range finding with power iterations.

    ``m`` may be a :class:`SparseScoreMatrix`, a scipy sparse matrix or a dense
    array. The operator is only touched through products ``A @ X`` and
    ``A.T @ X``; a sparse input is never densified.

    Parameters
    ----------
    d : int
        Target rank, ``1 <= d <= min(m.shape)``.
    oversample : int
        Extra random probe vectors beyond ``d``.
    power_iters : int
        Subspace iterations with re-orthonormalization after every product.
    seed : int
        Seed of the Gaussian test matrix; equal seeds give bitwise equal output.
    """
    a = _operator(m)
    rows, cols = a.shape
    if d < 1 or d > min(rows, cols):
        raise DomainError(f"rank d={d} outside [1, {min(rows, cols)}]")
    width = min(d + oversample, rows, cols)
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((cols, width))
    q = _orthonormal(a @ omega)
    for _ in range(power_iters):
        z = _orthonormal(a.T @ q)
        q = _orthonormal(a @ z)
    b = np.asarray((a.T @ q).T)
    ub, s, vt = np.linalg.svd(b, full_matrices=False)
    u = q @ ub[:, :d]
    v = vt[:d].T
    # sign convention: largest-magnitude entry of each left vector is positive
    flip = np.sign(u[np.argmax(np.abs(u), axis=0), np.arange(d)])
    flip[flip == 0] = 1.0
    return SvdResult(u * flip, s[:d].copy(), v * flip)


def embeddings_from_svd(svd: SvdResult, words: Sequence[str]) -> EmbeddingSet:
    """``W = U diag(sqrt S)``, ``C = V diag(sqrt S)`` so that ``W C^T = U S V^T``."""
    if svd.d < 1:
        raise DomainError("cannot build embeddings from a rank-0 decomposition")
    root = np.sqrt(svd.S)
    return EmbeddingSet(svd.U * root, svd.V * root, list(words), Provenance.SVD)


def write_embeddings(words: Sequence[str], vectors: np.ndarray, path: str | Path) -> None:
    """word2vec text format: header ``n d`` then ``word v1 ... vd``."""
    n, d = vectors.shape
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{n} {d}\n")
        for w, row in zip(words, vectors):
            f.write(w + " " + " ".join(f"{x:.6g}" for x in row) + "\n")


def read_embeddings(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as f:
        n, d = map(int, f.readline().split())
        words: list[str] = []
        vecs = np.empty((n, d))
        for i, line in enumerate(f):
            parts = line.rstrip("\n").split(" ")
            words.append(parts[0])
            vecs[i] = np.array(parts[1:], dtype=np.float64)
    if len(words) != n:
        raise DomainError(f"embedding file declares {n} rows but holds {len(words)}")
    return words, vecs


def load_embedding_set(word_path: str | Path, context_path: str | Path | None = None) -> EmbeddingSet:
    words, w = read_embeddings(word_path)
    c = None
    if context_path is not None:
        cwords, c = read_embeddings(context_path)
        if cwords != words:
            raise DomainError("word and context files list different words")
    return EmbeddingSet(w, c, words, Provenance.FILE)
