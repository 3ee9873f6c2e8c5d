"""PMI and its shifted / squashed / positive / binarized transforms.

Only observed pairs are stored. An absent cell means ``-inf`` for PMI and
SPMI and exactly ``0`` for the other kinds, so SigmaSPMI is sparse without
any patching. Factorization reads absent cells as 0 for every kind.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from sspmi.corpus import CooccurrenceCounts
from sspmi.errors import DomainError


class Kind(enum.Enum):
    PMI = "PMI"
    SPMI = "SPMI"
    SigmaSPMI = "SigmaSPMI"
    PSPMI = "PSPMI"
    BSPMI = "BSPMI"

    @classmethod
    def parse(cls, name: str) -> "Kind":
        key = name.replace("-", "").replace("_", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise DomainError(f"unknown matrix kind {name!r}")


@dataclass
class SparseScoreMatrix:
    """Symmetric score matrix over observed pairs, upper triangle ``rows <= cols``."""

    kind: Kind
    k: float
    n: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    @property
    def nnz(self) -> int:
        return len(self.values)

    def to_csr(self) -> sp.csr_matrix:
        """Full symmetric matrix with absent cells as 0."""
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.values, self.values[off]]).astype(np.float64)
        m = sp.csr_matrix((v, (r, c)), shape=(self.n, self.n))
        m.sort_indices()
        return m

    def offdiagonal(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        off = self.rows != self.cols
        return self.rows[off], self.cols[off], self.values[off]


def pmi_matrix(counts: CooccurrenceCounts, cds_alpha: float | None = None) -> SparseScoreMatrix:
    """``PMI_ij = log(#(i,j) N / (#(i) #(j)))`` over observed pairs.

    Marginals are the row sums of the symmetric count matrix, so that
    ``p(i) = sum_j p(i, j)``. ``cds_alpha`` raises both marginals to that
    power and renormalizes (context distribution smoothing); symmetric
    application keeps the matrix symmetric.
    """
    total = counts.total
    if total <= 0:
        raise DomainError("cannot build PMI from empty co-occurrence counts (N = 0)")
    marg = counts.marginals()
    if np.any(marg[np.concatenate([counts.rows, counts.cols])] <= 0):
        raise RuntimeError("internal error: observed pair with zero marginal count")
    p = marg / total
    if cds_alpha is not None:
        p = marg**cds_alpha
        p = p / p.sum()
    pij = np.asarray(counts.counts, dtype=np.float64) / total
    values = np.log(pij) - np.log(p[counts.rows]) - np.log(p[counts.cols])
    return SparseScoreMatrix(Kind.PMI, 1.0, counts.n, counts.rows.copy(), counts.cols.copy(), values)


def transform(pmi: SparseScoreMatrix, target: Kind | str, k: float) -> SparseScoreMatrix:
    """Apply the shift ``-log k`` and the transform named by ``target`` cellwise."""
    if isinstance(target, str):
        target = Kind.parse(target)
    if pmi.kind is not Kind.PMI:
        raise DomainError(f"transform expects a PMI matrix, got {pmi.kind.value}")
    if not k > 0:
        raise DomainError(f"shift k must be positive, got {k}")
    if target is Kind.PMI:
        return SparseScoreMatrix(Kind.PMI, 1.0, pmi.n, pmi.rows.copy(), pmi.cols.copy(), pmi.values.copy())
    shifted = pmi.values - math.log(k)
    if target is Kind.SPMI:
        vals = shifted
    elif target is Kind.SigmaSPMI:
        vals = expit(shifted)
    elif target is Kind.PSPMI:
        vals = np.maximum(shifted, 0.0)
    else:
        vals = (shifted > 0).astype(np.float64)
    keep = np.ones(len(vals), dtype=bool) if target in (Kind.SPMI, Kind.SigmaSPMI) else vals != 0
    return SparseScoreMatrix(target, float(k), pmi.n, pmi.rows[keep], pmi.cols[keep], vals[keep])


def build_matrix(counts: CooccurrenceCounts, kind: Kind | str, k: float = 5.0, cds_alpha: float | None = None):
    return transform(pmi_matrix(counts, cds_alpha), kind, k)


def write_matrix(m: SparseScoreMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{m.kind.value} {m.k:g} {m.n} {m.nnz}\n")
        for i, j, v in zip(m.rows.tolist(), m.cols.tolist(), m.values.tolist()):
            f.write(f"{i}\t{j}\t{v:.9g}\n")


def read_matrix(path: str | Path) -> SparseScoreMatrix:
    with open(path, encoding="utf-8") as f:
        kind, k, n, nnz = f.readline().split()
        body = np.loadtxt(f, delimiter="\t", ndmin=2, dtype=np.float64)
    if body.size == 0:
        body = np.zeros((0, 3))
    if len(body) != int(nnz):
        raise DomainError(f"matrix file declares {nnz} entries but holds {len(body)}")
    return SparseScoreMatrix(
        Kind.parse(kind), float(k), int(n), body[:, 0].astype(np.int64), body[:, 1].astype(np.int64), body[:, 2]
    )
