"""Word similarity (Spearman) and analogy (3CosAdd) benchmarks.

Pairs and quads with out-of-vocabulary words are skipped and show up in the
coverage fraction instead. All benchmark words are lower-cased.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from sspmi.errors import DomainError
from sspmi.factorization import EmbeddingSet


@dataclass
class SimilarityDataset:
    name: str
    pairs: list[tuple[str, str, float]]

    def __post_init__(self):
        if len(self.pairs) < 2:
            raise DomainError(f"similarity dataset {self.name!r} needs at least 2 pairs")
        if not all(math.isfinite(s) for _, _, s in self.pairs):
            raise DomainError(f"similarity dataset {self.name!r} has non-finite scores")


@dataclass
class AnalogyDataset:
    name: str
    quads: list[tuple[str, str, str, str]]

    def __post_init__(self):
        if not self.quads:
            raise DomainError(f"analogy dataset {self.name!r} is empty")


def read_similarity(path: str | Path, name: str | None = None) -> SimilarityDataset:
    """``word1<TAB>word2<TAB>score`` lines; ``#`` comment lines are skipped."""
    pairs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            a, b, score = parts[0], parts[1], float(parts[2])
            pairs.append((a.lower(), b.lower(), score))
    return SimilarityDataset(name or Path(path).stem, pairs)


def read_analogy(path: str | Path, name: str | None = None) -> AnalogyDataset:
    """Four space-separated words per line; ``:`` section headers are ignored."""
    quads = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith(":"):
                continue
            a, b, c, d = line.lower().split()
            quads.append((a, b, c, d))
    return AnalogyDataset(name or Path(path).stem, quads)


def spearman(x, y) -> float:
    """Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise DomainError("spearman needs two equal-length sequences of at least 2 values")
    rx = rankdata(x) - (len(x) + 1) / 2
    ry = rankdata(y) - (len(y) + 1) / 2
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0:
        raise DomainError("spearman correlation undefined for a constant sequence")
    return float(np.clip((rx @ ry) / denom, -1.0, 1.0))


def _vectors(emb: EmbeddingSet, use_w_plus_c: bool) -> np.ndarray:
    if emb.W.shape[0] == 0:
        raise DomainError("empty embedding set")
    if use_w_plus_c:
        if emb.C is None:
            raise DomainError("W + C requested but the embedding set has no context vectors")
        return emb.W + emb.C
    return emb.W


def _unit_rows(v: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / np.where(norms > 0, norms, 1.0)


def evaluate_similarity(emb: EmbeddingSet, ds: SimilarityDataset, use_w_plus_c: bool = False) -> tuple[float, float]:
    """Spearman rho between cosine similarities and human scores, and pair coverage."""
    vecs = _unit_rows(_vectors(emb, use_w_plus_c))
    index = emb.word_index()
    model, human = [], []
    for a, b, score in ds.pairs:
        if a in index and b in index:
            model.append(float(vecs[index[a]] @ vecs[index[b]]))
            human.append(score)
    if len(model) < 2:
        raise DomainError(f"{ds.name}: fewer than 2 pairs have both words in the vocabulary")
    return spearman(model, human), len(model) / len(ds.pairs)


def analogy_queries(emb: EmbeddingSet, ds: AnalogyDataset) -> np.ndarray:
    """Index rows ``(a, b, c, d)`` for quads fully inside the vocabulary."""
    index = emb.word_index()
    rows = [[index[w] for w in q] for q in ds.quads if all(w in index for w in q)]
    return np.array(rows, dtype=np.int64).reshape(-1, 4)


def predict_3cosadd(vecs: np.ndarray, queries: np.ndarray, batch: int = 512) -> np.ndarray:
    """``argmax_v cos(v, b - a + c)`` over unit vectors, excluding ``a``, ``b`` and ``c``."""
    unit = _unit_rows(vecs)
    out = np.empty(len(queries), dtype=np.int64)
    for s in range(0, len(queries), batch):
        q = queries[s : s + batch]
        target = unit[q[:, 1]] - unit[q[:, 0]] + unit[q[:, 2]]
        scores = target @ unit.T
        rows = np.arange(len(q))
        for col in range(3):
            scores[rows, q[:, col]] = -np.inf
        out[s : s + batch] = np.argmax(scores, axis=1)
    return out


def evaluate_analogy_3cosadd(emb: EmbeddingSet, ds: AnalogyDataset, use_w_plus_c: bool = False) -> float:
    """Fraction of in-vocabulary quads whose 3CosAdd prediction is ``d``."""
    queries = analogy_queries(emb, ds)
    if len(queries) == 0:
        raise DomainError(f"{ds.name}: no analogy quad has all four words in the vocabulary")
    pred = predict_3cosadd(_vectors(emb, use_w_plus_c), queries[:, :3])
    return float(np.mean(pred == queries[:, 3]))


def evaluate_all(emb: EmbeddingSet, similarity=(), analogy=(), use_w_plus_c: bool = False) -> list[dict]:
    rows = []
    for ds in similarity:
        rho, cov = evaluate_similarity(emb, ds, use_w_plus_c)
        rows.append({"dataset": ds.name, "metric": "spearman", "value": rho, "coverage": cov})
    for ds in analogy:
        acc = evaluate_analogy_3cosadd(emb, ds, use_w_plus_c)
        cov = len(analogy_queries(emb, ds)) / len(ds.quads)
        rows.append({"dataset": ds.name, "metric": "3cosadd_accuracy", "value": acc, "coverage": cov})
    return rows


def write_report(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["dataset", "metric", "value", "coverage"])
        for r in rows:
            w.writerow([r["dataset"], r["metric"], f"{r['value']:.6f}", f"{r['coverage']:.6f}"])
