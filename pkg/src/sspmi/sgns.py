"""SGD trainers for SGNS and Nonsigmoid SGNS, and the closed-form pointwise optimum.

Both objectives sum, over every positive (center, context) pair inside the
window, a positive term on ``<w_i, c_j>`` plus ``k`` terms on dot products
with contexts drawn from the smoothed unigram distribution:

* SGNS:            ``log s(x) + sum log s(-x_n)`` with ``s`` the logistic sigmoid
* Nonsigmoid SGNS: ``log x + sum log(1 - x_n)`` with ``x`` clamped to ``[eps, 1 - eps]``

Clamped dot products get zero gradient.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numba
import numpy as np

from sspmi.corpus import Vocabulary, encode
from sspmi.errors import DivergenceError, DomainError
from sspmi.factorization import EmbeddingSet, Provenance

logger = logging.getLogger(__name__)

_MIN_LR_FRACTION = 1e-4
DEFAULT_LR = {"sgns": 0.025, "nsgns": 0.005}
STEP_FRACTION = 0.5


@dataclass
class TrainConfig:
    d: int = 300
    k: int = 5
    epochs: int = 5
    learning_rate: float | None = None  # None: DEFAULT_LR of the objective
    lr_schedule: bool = True
    window: int = 2
    subsample_t: float | None = None
    unigram_power: float = 0.75
    clamp_eps: float = 1e-7
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if self.d < 1:
            raise DomainError(f"d must be >= 1, got {self.d}")
        if not 0 < self.clamp_eps < 0.5:
            raise DomainError(f"clamp_eps must lie in (0, 0.5), got {self.clamp_eps}")
        bad_lr = self.learning_rate is not None and not self.learning_rate > 0
        if self.window < 1 or self.epochs < 0 or bad_lr or self.workers < 1:
            raise DomainError("window >= 1, epochs >= 0, learning_rate > 0 and workers >= 1 required")
        if self.subsample_t is not None and self.subsample_t <= 0:
            raise DomainError("subsample_t must be positive when set")


# --- per-target math shared by the kernels and the gradient checks -------------


@numba.njit(cache=True)
def _log_sigmoid(x):
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@numba.njit(cache=True)
def _sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@numba.njit(cache=True)
def term(x, positive, nonsigmoid, eps):
    """Objective contribution and its derivative in the dot product ``x``."""
    if nonsigmoid:
        inside = eps < x < 1.0 - eps
        xc = min(max(x, eps), 1.0 - eps)
        if positive:
            return math.log(xc), (1.0 / xc if inside else 0.0)
        return math.log(1.0 - xc), (-1.0 / (1.0 - xc) if inside else 0.0)
    if positive:
        return _log_sigmoid(x), 1.0 - _sigmoid(x)
    return _log_sigmoid(-x), -_sigmoid(x)


@numba.njit(cache=True)
def pair_objective(w, c_pos, c_negs, nonsigmoid, eps):
    obj, _ = term(np.dot(w, c_pos), True, nonsigmoid, eps)
    for n in range(c_negs.shape[0]):
        o, _ = term(np.dot(w, c_negs[n]), False, nonsigmoid, eps)
        obj += o
    return obj


@numba.njit(cache=True)
def pair_gradient(w, c_pos, c_negs, nonsigmoid, eps):
    """Gradients of :func:`pair_objective` w.r.t. ``w``, ``c_pos`` and each row of ``c_negs``."""
    _, g = term(np.dot(w, c_pos), True, nonsigmoid, eps)
    gw = g * c_pos
    gpos = g * w
    gneg = np.empty_like(c_negs)
    for n in range(c_negs.shape[0]):
        _, g = term(np.dot(w, c_negs[n]), False, nonsigmoid, eps)
        gw = gw + g * c_negs[n]
        gneg[n] = g * w
    return gw, gpos, gneg


# --- randomness ------------------------------------------------------------------


@numba.njit(cache=True)
def _next_uniform(state):
    # splitmix64
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _draw(cdf, state):
    u = _next_uniform(state) * cdf[-1]
    j = np.searchsorted(cdf, u, side="right")
    return min(j, cdf.shape[0] - 1)


@numba.njit(cache=True)
def _draw_many(cdf, count, seed):
    state = np.array([np.uint64(seed)], dtype=np.uint64)
    out = np.empty(count, dtype=np.int64)
    for t in range(count):
        out[t] = _draw(cdf, state)
    return out


def noise_distribution(counts: np.ndarray, power: float = 0.75) -> np.ndarray:
    """``p(i) proportional to #(i) ** power``."""
    p = np.asarray(counts, dtype=np.float64) ** power
    return p / p.sum()


def draw_negatives(p: np.ndarray, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` indices from ``p`` with the trainers' sampler."""
    return _draw_many(np.cumsum(p), count, seed)


# --- training kernels -----------------------------------------------------------


@numba.njit(cache=True)
def _bounded_step(step, x, w, c, eps):
    # first-order change of <w, c> is step * (|w|^2 + |c|^2); keep it within
    # STEP_FRACTION of the distance to the violated side of [eps, 1 - eps]
    room = (1.0 - eps - x) if step > 0 else (x - eps)
    reach = abs(step) * (np.dot(w, w) + np.dot(c, c))
    limit = STEP_FRACTION * room
    if reach > limit:
        return step * (limit / reach)
    return step


@numba.njit(cache=True)
def _train_span(ids, lo, hi, W, C, cdf, k, window, lr0, done0, total, use_schedule, nonsigmoid, eps, state, neu):
    """SGD over center positions ``lo <= t < hi``; returns (objective sum, pairs)."""
    obj_sum = 0.0
    pairs = 0
    d = W.shape[1]
    n_tok = ids.shape[0]
    for t in range(lo, hi):
        center = ids[t]
        if center < 0:
            continue
        if use_schedule:
            frac = 1.0 - (done0 + t - lo) / total
            lr = lr0 * max(frac, _MIN_LR_FRACTION)
        else:
            lr = lr0
        start = max(0, t - window)
        stop = min(n_tok, t + window + 1)
        for s in range(start, stop):
            if s == t or ids[s] < 0:
                continue
            neu[:] = 0.0
            for r in range(k + 1):
                if r == 0:
                    target = ids[s]
                else:
                    target = _draw(cdf, state)
                x = 0.0
                for a in range(d):
                    x += W[center, a] * C[target, a]
                o, g = term(x, r == 0, nonsigmoid, eps)
                obj_sum += o
                if g != 0.0:
                    step = lr * g
                    if nonsigmoid:
                        step = _bounded_step(step, x, W[center], C[target], eps)
                    for a in range(d):
                        neu[a] += step * C[target, a]
                        C[target, a] += step * W[center, a]
            for a in range(d):
                W[center, a] += neu[a]
            pairs += 1
    return obj_sum, pairs


@numba.njit(cache=True, parallel=True)
def _train_parallel(ids, bounds, W, C, cdf, k, window, lr0, done0, total, use_schedule, nonsigmoid, eps, seeds):
    # lock-free shared updates; races between workers are accepted
    nchunk = bounds.shape[0] - 1
    objs = np.zeros(nchunk)
    pairs = np.zeros(nchunk, dtype=np.int64)
    for c in numba.prange(nchunk):
        state = np.array([seeds[c]], dtype=np.uint64)
        neu = np.zeros(W.shape[1])
        o, p = _train_span(
            ids, bounds[c], bounds[c + 1], W, C, cdf, k, window, lr0,
            done0 + bounds[c], total, use_schedule, nonsigmoid, eps, state, neu,
        )
        objs[c] = o
        pairs[c] = p
    return objs.sum(), pairs.sum()


def _subsample(ids: np.ndarray, counts: np.ndarray, t: float, rng: np.random.Generator) -> np.ndarray:
    freq = counts / counts.sum()
    keep_p = np.minimum(1.0, (np.sqrt(freq / t) + 1.0) * t / freq)
    in_vocab = ids >= 0
    u = rng.random(len(ids))
    keep = ~in_vocab | (u < keep_p[np.where(in_vocab, ids, 0)])
    return ids[keep]


def _initial_parameters(n: int, cfg: TrainConfig, nonsigmoid: bool, rng: np.random.Generator):
    if nonsigmoid:
        hi = 1.0 / math.sqrt(cfg.d)
        return rng.uniform(0.0, hi, (n, cfg.d)), rng.uniform(0.0, hi, (n, cfg.d))
    return rng.uniform(-0.5 / cfg.d, 0.5 / cfg.d, (n, cfg.d)), np.zeros((n, cfg.d))


def _worker_count(cfg: TrainConfig) -> int:
    cap = os.environ.get("SSPMI_THREADS")
    workers = cfg.workers if cap is None else min(cfg.workers, max(1, int(cap)))
    return max(1, min(workers, numba.config.NUMBA_NUM_THREADS))


def _train(corpus, vocab: Vocabulary, cfg: TrainConfig, nonsigmoid: bool, progress_path=None, callback=None):
    if vocab.n == 0:
        raise DomainError("empty vocabulary")
    ids_all = corpus if isinstance(corpus, np.ndarray) else encode(corpus, vocab)
    rng = np.random.default_rng(cfg.seed)
    W, C = _initial_parameters(vocab.n, cfg, nonsigmoid, rng)
    cdf = np.cumsum(noise_distribution(vocab.counts, cfg.unigram_power))
    state = np.array([np.uint64(cfg.seed * 2654435761 + 1)], dtype=np.uint64)
    neu = np.zeros(cfg.d)
    workers = _worker_count(cfg)
    lr0 = cfg.learning_rate or DEFAULT_LR["nsgns" if nonsigmoid else "sgns"]
    total = float(max(1, len(ids_all)) * max(1, cfg.epochs))
    done = 0.0
    history: list[float] = []
    for epoch in range(cfg.epochs):
        ids = _subsample(ids_all, vocab.counts, cfg.subsample_t, rng) if cfg.subsample_t else ids_all
        # positions of the subsampled stream stand in for the original ones in the schedule
        scale = len(ids_all) / max(1, len(ids))
        if workers == 1:
            obj, pairs = _train_span(
                ids, 0, len(ids), W, C, cdf, cfg.k, cfg.window, lr0,
                done / scale, total / scale, cfg.lr_schedule, nonsigmoid, cfg.clamp_eps, state, neu,
            )
        else:
            bounds = np.linspace(0, len(ids), workers + 1).astype(np.int64)
            seeds = rng.integers(1, 2**63, size=workers, dtype=np.uint64)
            obj, pairs = _train_parallel(
                ids, bounds, W, C, cdf, cfg.k, cfg.window, lr0,
                done / scale, total / scale, cfg.lr_schedule, nonsigmoid, cfg.clamp_eps, seeds,
            )
        done += len(ids_all)
        bad = int((~np.isfinite(W)).sum() + (~np.isfinite(C)).sum())
        if bad or not math.isfinite(obj):
            raise DivergenceError(
                f"{'Nonsigmoid SGNS' if nonsigmoid else 'SGNS'} diverged in epoch {epoch + 1}: "
                f"{bad} non-finite parameters, objective sum {obj}; lower learning_rate"
            )
        mean = obj / max(1, pairs)
        history.append(mean)
        logger.info("epoch %d: mean objective %.6f over %d pairs", epoch + 1, mean, pairs)
        if callback is not None:
            callback(epoch + 1, W, C)
    if progress_path is not None:
        write_progress(history, progress_path)
    prov = Provenance.NonsigmoidSGNS if nonsigmoid else Provenance.SGNS
    return EmbeddingSet(W, C, list(vocab.words), prov, history)


def train_sgns(corpus: Sequence[str] | np.ndarray, vocab: Vocabulary, cfg: TrainConfig, progress_path=None, callback=None):
    """Train SGNS; ``objective_history`` of the result holds the per-epoch mean objective per pair.

    ``callback(epoch, W, C)`` runs after every epoch with the live parameter arrays.
    """
    return _train(corpus, vocab, cfg, False, progress_path, callback)


def train_nonsigmoid_sgns(corpus, vocab: Vocabulary, cfg: TrainConfig, progress_path=None, callback=None):
    """Train Nonsigmoid SGNS, starting from nonnegative vectors with expected dot 0.25."""
    return _train(corpus, vocab, cfg, True, progress_path, callback)


def nsgns_pointwise_optimum(p_ij: float, p_i: float, p_j: float, k: float) -> float:
    """Maximizer of ``p_ij log x + k p_i p_j log(1 - x)`` over ``0 < x < 1``.

    Equals the squashed shifted PMI ``sigmoid(log(p_ij / (p_i p_j)) - log k)``.
    """
    if min(p_ij, p_i, p_j) <= 0 or k <= 0:
        raise DomainError("probabilities and k must be positive")
    x = math.log(p_ij) - math.log(p_i) - math.log(p_j) - math.log(k)
    return float(_sigmoid(x))


def write_progress(history: Sequence[float], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["epoch", "mean_objective"])
        for e, v in enumerate(history, 1):
            w.writerow([e, f"{v:.9g}"])
