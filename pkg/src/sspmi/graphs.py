"""Random graphs from connection-probability matrices and their network statistics.

Sampling draws one counter-based uniform per vertex pair, so a graph depends
only on the seed and the probabilities, never on iteration order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
import scipy.linalg

from sspmi._random import pair_uniforms
from sspmi.errors import DomainError, FitFailure
from sspmi.matrices import Kind, SparseScoreMatrix

DEFAULT_SPECTRUM_CAP = 15_000


@dataclass
class UndirectedGraph:
    """Simple undirected graph as sorted, duplicate-free neighbor lists (CSR layout)."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n: int, i, j) -> "UndirectedGraph":
        """Build from an edge list; self-loops and duplicates are dropped."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        keep = i != j
        i, j = i[keep], j[keep]
        if len(i) and (min(i.min(), j.min()) < 0 or max(i.max(), j.max()) >= n):
            raise DomainError("edge endpoint outside [0, n)")
        src = np.concatenate([i, j])
        dst = np.concatenate([j, i])
        key = np.unique(src * n + dst)
        src, dst = key // n, key % n
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst.astype(np.int64))

    @classmethod
    def empty(cls, n: int) -> "UndirectedGraph":
        return cls(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints with ``i < j``, sorted."""
        src = np.repeat(np.arange(self.n), self.degrees())
        up = src < self.indices
        return src[up], self.indices[up]

    def adjacency_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        src = np.repeat(np.arange(self.n), self.degrees())
        a[src, self.indices] = 1.0
        return a


# --- sampling ----------------------------------------------------------------------


def sample_graph(probs: SparseScoreMatrix, seed: int) -> UndirectedGraph:
    """Include every stored off-diagonal pair independently with its probability."""
    if probs.kind is not Kind.SigmaSPMI:
        raise DomainError(f"sample_graph expects a SigmaSPMI matrix, got {probs.kind.value}")
    i, j, p = probs.offdiagonal()
    if len(p) and not (np.all(p >= 0) and np.all(p < 1)):
        raise DomainError("connection probabilities must lie in [0, 1)")
    hit = pair_uniforms(seed, i, j) < p
    return UndirectedGraph.from_edges(probs.n, i[hit], j[hit])


def erdos_renyi(n: int, p: float, seed: int) -> UndirectedGraph:
    """G(n, p): a binomial number of edges placed on a uniform random set of pairs."""
    if not 0 <= p <= 1:
        raise DomainError(f"edge probability {p} outside [0, 1]")
    rng = np.random.default_rng(seed)
    pairs = n * (n - 1) // 2
    m = int(rng.binomial(pairs, p))
    if m > pairs // 2:
        # dense regime: draw every pair
        i, j = np.triu_indices(n, 1)
        keep = rng.random(len(i)) < p
        return UndirectedGraph.from_edges(n, i[keep], j[keep])
    chosen = np.zeros(0, dtype=np.int64)
    while len(chosen) < m:
        extra = rng.integers(0, pairs, size=m - len(chosen) + 16)
        chosen = np.unique(np.concatenate([chosen, extra]))
    chosen = rng.permutation(chosen)[:m]
    # row i of the strict upper triangle starts at offset i*n - i*(i+1)/2
    i = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8 * chosen.astype(np.float64))) / 2).astype(np.int64)
    start = i * n - i * (i + 1) // 2
    over = chosen < start
    i[over] -= 1
    start = i * n - i * (i + 1) // 2
    under = chosen >= start + (n - 1 - i)
    i[under] += 1
    start = i * n - i * (i + 1) // 2
    j = chosen - start + i + 1
    return UndirectedGraph.from_edges(n, i, j)


# --- degree and clustering ----------------------------------------------------------


def degree_stats(g: UndirectedGraph) -> tuple[np.ndarray, float, np.ndarray]:
    """Degrees, mean degree ``2m / n`` and the histogram ``hist[k] = #{i : deg(i) = k}``."""
    deg = g.degrees()
    mean = float(deg.mean()) if g.n else 0.0
    return deg, mean, np.bincount(deg, minlength=1)


@numba.njit(cache=True)
def _triangles(n, indptr, indices, rank):
    # orient each edge toward the higher (degree, id) rank; each triangle is
    # found once, from its lowest-ranked vertex
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    for u in range(n):
        c = 0
        for p in range(indptr[u], indptr[u + 1]):
            if rank[indices[p]] > rank[u]:
                c += 1
        out_ptr[u + 1] = out_ptr[u] + c
    out = np.empty(out_ptr[n], dtype=np.int64)
    for u in range(n):
        q = out_ptr[u]
        for p in range(indptr[u], indptr[u + 1]):
            if rank[indices[p]] > rank[u]:
                out[q] = indices[p]
                q += 1
    tri = np.zeros(n, dtype=np.int64)
    for u in range(n):
        for p in range(out_ptr[u], out_ptr[u + 1]):
            v = out[p]
            # sorted-list intersection of out(u) and out(v)
            a, a_end = out_ptr[u], out_ptr[u + 1]
            b, b_end = out_ptr[v], out_ptr[v + 1]
            while a < a_end and b < b_end:
                x, y = out[a], out[b]
                if x == y:
                    tri[u] += 1
                    tri[v] += 1
                    tri[x] += 1
                    a += 1
                    b += 1
                elif x < y:
                    a += 1
                else:
                    b += 1
    return tri


def triangles_per_vertex(g: UndirectedGraph) -> np.ndarray:
    """Number of edges among the neighbors of each vertex (exact)."""
    deg = g.degrees()
    rank = np.empty(g.n, dtype=np.int64)
    rank[np.lexsort((np.arange(g.n), deg))] = np.arange(g.n)
    return _triangles(g.n, g.indptr, g.indices, rank)


def clustering_coefficient(g: UndirectedGraph) -> tuple[float, np.ndarray]:
    """Average local clustering over all ``n`` vertices, with ``C(i) = 0`` when ``deg(i) < 2``."""
    deg = g.degrees().astype(np.float64)
    tri = triangles_per_vertex(g)
    pairs = deg * (deg - 1) / 2
    local = np.divide(tri, pairs, out=np.zeros(g.n), where=pairs > 0)
    return (float(local.mean()) if g.n else 0.0), local


# --- power law ---------------------------------------------------------------------


@dataclass
class PowerLawFit:
    gamma: float
    k_min: int
    ks: float
    n_tail: int


def _tail_fit(tail: np.ndarray, k_min: float) -> tuple[float, float]:
    gamma = 1.0 + len(tail) / np.sum(np.log(tail / (k_min - 0.5)))
    values, last = np.unique(tail, return_index=False, return_counts=True)
    emp = np.cumsum(last) / len(tail)
    model = 1.0 - ((values + 0.5) / (k_min - 0.5)) ** (1.0 - gamma)
    below = np.concatenate([[0.0], emp[:-1]])
    model_below = 1.0 - ((values - 0.5) / (k_min - 0.5)) ** (1.0 - gamma)
    ks = max(np.max(np.abs(emp - model)), np.max(np.abs(below - model_below)))
    return float(gamma), float(ks)


def fit_power_law(degrees, min_tail: int = 50, min_span: float = 10.0) -> PowerLawFit:
    """Discrete power-law fit ``p(k) ~ k^-gamma`` for ``k >= k_min``.

    The exponent uses the continuous-approximation maximum likelihood estimate
    ``1 + n_tail / sum(log(k_i / (k_min - 1/2)))``; ``k_min`` minimizes the
    Kolmogorov-Smirnov distance between the empirical tail and the fitted law.
    Only tails holding ``min_tail`` vertices and spanning ``min_span`` (ratio of
    largest degree to ``k_min``) are considered, which keeps narrow, steep
    tails of light-tailed distributions from passing as power laws.

    Raises
    ------
    DomainError
        Fewer than ``min_tail`` vertices with degree >= 1.
    FitFailure
        All degrees equal, or no admissible ``k_min``.
    """
    k = np.sort(np.asarray(degrees, dtype=np.float64))
    k = k[k >= 1]
    if len(k) < min_tail:
        raise DomainError(f"power-law fit needs at least {min_tail} vertices with degree >= 1, got {len(k)}")
    if k[0] == k[-1]:
        raise FitFailure("all degrees are equal; no power law to fit")
    best: PowerLawFit | None = None
    for k_min in np.unique(k):
        if k[-1] / k_min < min_span:
            break
        start = np.searchsorted(k, k_min)
        tail = k[start:]
        if len(tail) < min_tail:
            break
        gamma, ks = _tail_fit(tail, k_min)
        if best is None or ks < best.ks:
            best = PowerLawFit(gamma, int(k_min), ks, len(tail))
    if best is None:
        raise FitFailure(f"no tail spans a factor {min_span:g} with {min_tail} or more vertices")
    return best


# --- spectrum ----------------------------------------------------------------------


def spectrum(g: UndirectedGraph, max_n: int = DEFAULT_SPECTRUM_CAP) -> np.ndarray:
    """All eigenvalues of the 0/1 adjacency matrix, ascending (dense tridiagonal QL/QR)."""
    if g.n > max_n:
        raise DomainError(
            f"graph has {g.n} vertices, above the dense spectrum cap {max_n}; "
            "raise min_count to shrink the vocabulary or raise the cap"
        )
    if g.n == 0:
        return np.zeros(0)
    return scipy.linalg.eigvalsh(g.adjacency_dense(), driver="ev", overwrite_a=True, check_finite=False)


def semicircle_cdf(x):
    """CDF of the semicircle law on ``[-2, 2]`` (unit variance)."""
    x = np.clip(np.asarray(x, dtype=np.float64), -2.0, 2.0)
    return 0.5 + (x * np.sqrt(4.0 - x * x)) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi


def semicircle_ks(eigenvalues, radius: float | None = None, drop_top: int = 1) -> float:
    """KS distance between the scaled spectral bulk and the semicircle law.

    The ``drop_top`` largest eigenvalues (the Perron outlier) are removed. The
    bulk is mapped onto ``[-2, 2]`` by ``radius``; by default the radius is
    matched to the second moment, ``2 * sqrt(mean(lambda^2))``.
    """
    lam = np.sort(np.asarray(eigenvalues, dtype=np.float64))
    bulk = lam[: len(lam) - drop_top] if drop_top else lam
    if len(bulk) < 2:
        raise DomainError("spectrum too small for a semicircle comparison")
    if radius is None:
        radius = 2.0 * math.sqrt(float(np.mean(bulk**2)))
    if radius <= 0:
        raise DomainError("zero spectral radius; graph has no edges")
    x = 2.0 * bulk / radius
    n = len(x)
    f = semicircle_cdf(x)
    upper = np.arange(1, n + 1) / n
    return float(max(np.max(upper - f), np.max(f - (upper - 1.0 / n))))


# --- summary ---------------------------------------------------------------------------


@dataclass
class NetworkStats:
    n: int
    m: int
    mean_degree: float
    clustering: float
    histogram: np.ndarray = field(repr=False)
    gamma: float | None = None
    k_min: int | None = None
    ks: float | None = None
    fit_error: str | None = None

    @property
    def density(self) -> float:
        """``mean_degree / n``."""
        return self.mean_degree / self.n if self.n else 0.0


def network_stats(g: UndirectedGraph) -> NetworkStats:
    deg, mean, hist = degree_stats(g)
    c, _ = clustering_coefficient(g)
    stats = NetworkStats(g.n, g.m, mean, c, hist)
    try:
        fit = fit_power_law(deg)
        stats.gamma, stats.k_min, stats.ks = fit.gamma, fit.k_min, fit.ks
    except (FitFailure, DomainError) as e:
        stats.fit_error = str(e)
    return stats


def is_complex_network(stats: NetworkStats, ratio_threshold: float = 10.0, ks_threshold: float = 0.1):
    """Strong clustering (``C >= ratio_threshold * k/n``) and an accepted power-law fit.

    Returns ``(verdict, report)``.
    """
    density = stats.density
    clustered = density > 0 and stats.clustering >= ratio_threshold * density
    scale_free = stats.fit_error is None and stats.ks is not None and stats.ks < ks_threshold
    ratio = stats.clustering / density if density > 0 else float("nan")
    report = {
        "clustering": stats.clustering,
        "density": density,
        "clustering_ratio": ratio,
        "clustered": clustered,
        "gamma": stats.gamma,
        "ks": stats.ks,
        "scale_free": scale_free,
        "fit_error": stats.fit_error,
    }
    return bool(clustered and scale_free), report


def mean_ci(values) -> tuple[float, float]:
    """Mean and 95% half-width ``1.96 sd / sqrt(runs)`` (sample sd; 0 for one run)."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(1.96 * v.std(ddof=1) / math.sqrt(len(v)))


# --- files -------------------------------------------------------------------------


def write_graph(g: UndirectedGraph, path: str | Path) -> None:
    i, j = g.edges()
    with open(path, "w", newline="\n") as f:
        f.write(f"{g.n} {g.m}\n")
        for a, b in zip(i.tolist(), j.tolist()):
            f.write(f"{a}\t{b}\n")


def read_graph(path: str | Path) -> UndirectedGraph:
    with open(path) as f:
        n, m = map(int, f.readline().split())
        body = np.loadtxt(f, delimiter="\t", ndmin=2, dtype=np.int64)
    if body.size == 0:
        body = np.zeros((0, 2), dtype=np.int64)
    g = UndirectedGraph.from_edges(n, body[:, 0], body[:, 1])
    if g.m != m:
        raise DomainError(f"graph file declares {m} edges but holds {g.m} distinct edges")
    return g


def write_histogram(hist: np.ndarray, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["k", "count"])
        for k, c in enumerate(hist.tolist()):
            if c:
                w.writerow([k, c])


def write_spectrum(eigs: np.ndarray, path: str | Path) -> None:
    with open(path, "w", newline="\n") as f:
        for x in eigs.tolist():
            f.write(f"{x:.12g}\n")
