"""Acceptance criteria, one test per checkable part.

Each part records a PASS/FAIL/SKIP line; the pytest terminal summary prints one
line per criterion. Parts that need the text8 corpus read it from
``$SSPMI_TEXT8`` (default ``data/text8``) and are skipped when it is absent,
unless ``SSPMI_REQUIRE_TEXT8=1`` turns the absence into a failure. Benchmarks
come from ``$SSPMI_WORDSIM`` / ``$SSPMI_ANALOGY`` or ``data/benchmarks`` (see
``scripts/fetch_data.py``).
"""

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from conftest import ACCEPTANCE, ROOT
from oracles import brute_force_argmax, central_difference, random_probability_tuples
from scipy import stats

from sspmi.corpus import build_vocab, count_cooccurrences, encode, read_tokens
from sspmi.evaluation import evaluate_analogy_3cosadd, evaluate_similarity, read_analogy, read_similarity
from sspmi.factorization import embeddings_from_svd, truncated_svd
from sspmi.errors import FitFailure
from sspmi.graphs import (
    erdos_renyi,
    fit_power_law,
    is_complex_network,
    network_stats,
    sample_graph,
    semicircle_ks,
    spectrum,
)
from sspmi.hyperbolic import (
    DiskModel,
    compare_spmi_to_hyperbolic,
    distance_pdf,
    generate_rhg,
    hyperbolic_distance,
    radius_from_graph,
    sample_disk,
)
from sspmi.matrices import Kind, pmi_matrix, transform
from sspmi.sgns import TrainConfig, nsgns_pointwise_optimum, pair_gradient, pair_objective, train_nonsigmoid_sgns, train_sgns

TEXT8 = Path(os.environ.get("SSPMI_TEXT8", ROOT / "data" / "text8"))
WORDSIM = Path(os.environ.get("SSPMI_WORDSIM", ROOT / "data" / "benchmarks" / "wordsim353.tsv"))
ANALOGY = Path(os.environ.get("SSPMI_ANALOGY", ROOT / "data" / "benchmarks" / "questions-words.txt"))
REQUIRE_TEXT8 = os.environ.get("SSPMI_REQUIRE_TEXT8") == "1"


def record(number, part, ok, detail):
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE.setdefault(number, []).append((part, status, detail))
    print(f"criterion {number} [{part}]: {status} {detail}")
    assert ok, f"criterion {number} [{part}] failed: {detail}"


def need_text8(number, part, benchmarks=False):
    missing = [p for p in ([TEXT8] + ([WORDSIM, ANALOGY] if benchmarks else [])) if not p.is_file()]
    if not missing:
        return
    why = "missing " + ", ".join(str(p) for p in missing)
    if REQUIRE_TEXT8:
        record(number, part, False, why)
    ACCEPTANCE.setdefault(number, []).append((part, "SKIP", why))
    pytest.skip(why)


# --- text8 fixtures (built once, only when the corpus exists) -------------------------


@pytest.fixture(scope="module")
def text8_ids():
    tokens = read_tokens(TEXT8)
    vocab = build_vocab(tokens, 5)
    ids = encode(tokens, vocab)
    return tokens, vocab, ids


@pytest.fixture(scope="module")
def text8_pmi(text8_ids):
    _, vocab, ids = text8_ids
    return vocab, pmi_matrix(count_cooccurrences(ids, vocab, 2))


@pytest.fixture(scope="module")
def text8_graphs(text8_pmi):
    vocab, pmi = text8_pmi
    sigma = transform(pmi, Kind.SigmaSPMI, 5)
    graphs = [sample_graph(sigma, seed) for seed in range(10)]
    return graphs, [network_stats(g) for g in graphs]


# --- 1 ------------------------------------------------------------------------------


def test_criterion_1_pointwise_optimum():
    start = time.perf_counter()
    errs = [
        abs(nsgns_pointwise_optimum(*t) - brute_force_argmax(*t))
        for t in random_probability_tuples(1000, seed=2024)
    ]
    elapsed = time.perf_counter() - start
    worst = max(errs)
    record(1, "1e3 tuples", worst <= 1e-6 and elapsed < 60, f"max |err| = {worst:.2e}, {elapsed:.1f}s")


# --- 2 ------------------------------------------------------------------------------


def test_criterion_2_matrix_route(request):
    need_text8(2, "text8 sigma-SPMI+SVD", benchmarks=True)
    start = time.perf_counter()
    vocab, pmi = request.getfixturevalue("text8_pmi")
    ws, ga = read_similarity(WORDSIM), read_analogy(ANALOGY)
    scores = {}
    for kind in (Kind.SigmaSPMI, Kind.BSPMI, Kind.PSPMI, Kind.SPMI):
        m = transform(pmi, kind, 5)
        emb = embeddings_from_svd(truncated_svd(m.to_csr(), 300), vocab.words)
        scores[kind] = evaluate_similarity(emb, ws)[0]
        if kind is Kind.SigmaSPMI:
            analogy = evaluate_analogy_3cosadd(emb, ga)
    elapsed = time.perf_counter() - start
    s = scores[Kind.SigmaSPMI]
    ok = (
        abs(s - 0.657) <= 0.05
        and abs(analogy - 0.294) <= 0.06
        and scores[Kind.SigmaSPMI] > scores[Kind.BSPMI]
        and scores[Kind.PSPMI] > scores[Kind.SPMI]
        and elapsed < 30 * 60
    )
    detail = (
        f"n={vocab.n} WS sigma={s:.3f} B={scores[Kind.BSPMI]:.3f} P={scores[Kind.PSPMI]:.3f} "
        f"S={scores[Kind.SPMI]:.3f} analogy={analogy:.3f} {elapsed / 60:.1f}min"
    )
    record(2, "text8 sigma-SPMI+SVD", ok, detail)


# --- 3 ------------------------------------------------------------------------------


def test_criterion_3_trainer_route(request):
    need_text8(3, "text8 trainers", benchmarks=True)
    _, vocab, ids = request.getfixturevalue("text8_ids")
    ws = read_similarity(WORDSIM)
    cfg = TrainConfig(workers=os.cpu_count() or 1)
    sg = evaluate_similarity(train_sgns(ids, vocab, cfg), ws)[0]
    ns = evaluate_similarity(train_nonsigmoid_sgns(ids, vocab, cfg), ws)[0]
    record(3, "text8 trainers", sg >= 0.60 and ns >= 0.58, f"SGNS WS={sg:.3f}, Nonsigmoid WS={ns:.3f}")


# --- 4 ------------------------------------------------------------------------------


def test_criterion_4_text8_graph_statistics(request):
    need_text8(4, "text8 graphs")
    start = time.perf_counter()
    _, st = request.getfixturevalue("text8_graphs")
    c = float(np.mean([s.clustering for s in st]))
    dens = float(np.mean([s.density for s in st]))
    elapsed = time.perf_counter() - start
    ok = abs(c - 0.1341) <= 0.01 and abs(dens - 0.0014) <= 0.0005 and c / dens > 50 and elapsed < 20 * 60
    record(4, "text8 graphs", ok, f"C={c:.4f} k/n={dens:.5f} ratio={c / dens:.1f} {elapsed / 60:.1f}min")


# --- 5 ------------------------------------------------------------------------------


def _er_fails_power_law(n, density, seed=0):
    g = erdos_renyi(n, density * n / (n - 1), seed)
    try:
        fit = fit_power_law(g.degrees())
    except FitFailure as e:
        return True, f"ER n={n} k/n={density:.4f}: fit failure ({e})"
    return fit.ks >= 0.05, f"ER n={n} k/n={density:.4f}: ks={fit.ks:.3f}"


def test_criterion_5_er_at_text8_density():
    ok, detail = _er_fails_power_law(71290, 0.0014)
    record(5, "ER at text8 graph density", ok, detail)


def test_criterion_5_text8(request):
    need_text8(5, "text8 degree power law")
    _, st = request.getfixturevalue("text8_graphs")
    s = st[0]
    ok_fit = s.fit_error is None and s.ks < 0.1
    ok_er, er_detail = _er_fails_power_law(s.n, s.density)
    fit = f"gamma={s.gamma:.2f} k_min={s.k_min} ks={s.ks:.3f}" if s.fit_error is None else s.fit_error
    record(5, "text8 degree power law", ok_fit and ok_er, f"{fit}; {er_detail}")


# --- 6 ------------------------------------------------------------------------------


def _trace_ok(lam, m):
    return abs(lam.sum()) <= 1e-6 * len(lam) and abs(np.sum(lam**2) - 2 * m) <= 1e-6 * 2 * m


def test_criterion_6_er_semicircle():
    n, p = 1000, 0.05
    g = erdos_renyi(n, p, seed=6)
    lam = spectrum(g)
    ks = semicircle_ks(lam, radius=2 * math.sqrt(n * p * (1 - p)))
    record(6, "ER semicircle", ks < 0.05 and _trace_ok(lam, g.m), f"KS={ks:.4f}, trace identities ok={_trace_ok(lam, g.m)}")


def test_criterion_6_text8_not_semicircle(request):
    need_text8(6, "text8 min_count 100 spectrum")
    tokens, _, _ = request.getfixturevalue("text8_ids")
    vocab = build_vocab(tokens, 100)
    sigma = transform(pmi_matrix(count_cooccurrences(encode(tokens, vocab), vocab, 2)), Kind.SigmaSPMI, 5)
    g = sample_graph(sigma, seed=0)
    lam = spectrum(g)
    ks = semicircle_ks(lam)
    ok = ks >= 0.1 and _trace_ok(lam, g.m)
    record(6, "text8 min_count 100 spectrum", ok, f"n={g.n} KS={ks:.3f}, trace identities ok={_trace_ok(lam, g.m)}")


# --- 7 ------------------------------------------------------------------------------


def test_criterion_7_distance_pdf():
    start = time.perf_counter()
    parts = []
    ok = True
    for i, R in enumerate((5.0, 10.0, 15.0)):
        pdf = distance_pdf(R)
        a, b = sample_disk(100_000, R, 70 + 2 * i), sample_disk(100_000, R, 71 + 2 * i)
        x = hyperbolic_distance(a.r, a.theta, b.r, b.theta)
        ks = stats.kstest(x, pdf.cdf).statistic
        ok &= abs(pdf.mass - 1) <= 1e-3 and ks < 0.01
        parts.append(f"R={R:g} mass={pdf.mass:.5f} KS={ks:.4f}")
    elapsed = time.perf_counter() - start
    record(7, "R in {5,10,15}", ok and elapsed < 120, ", ".join(parts) + f", {elapsed:.0f}s")


# --- 8 ------------------------------------------------------------------------------


def test_criterion_8_rhg_is_complex():
    R = radius_from_graph(5000, 10)
    stats_ = network_stats(generate_rhg(DiskModel(5000, R, 1.0, seed=0)))
    verdict, rep = is_complex_network(stats_)
    record(
        8,
        "RHG n=5000",
        verdict,
        f"R={R:.3f} k={stats_.mean_degree:.1f} C/(k/n)={rep['clustering_ratio']:.1f} gamma={stats_.gamma:.2f} ks={stats_.ks:.3f}",
    )


def test_criterion_8_text8_shift(request):
    need_text8(8, "text8 delta shift")
    vocab, pmi = request.getfixturevalue("text8_pmi")
    _, st = request.getfixturevalue("text8_graphs")
    R = radius_from_graph(vocab.n, float(np.mean([s.mean_degree for s in st])))
    _, _, spmi = transform(pmi, Kind.SPMI, 5).offdiagonal()
    rep = compare_spmi_to_hyperbolic(spmi, R, distance_pdf(R))
    record(8, "text8 delta shift", rep.delta_shift > 0, f"R={R:.3f} delta={rep.delta_shift:.3f}")


# --- 9 ------------------------------------------------------------------------------


def test_criterion_9_randomized_svd():
    ratios = []
    for trial in range(20):
        rng = np.random.default_rng(9000 + trial)
        a = rng.standard_normal((200, 200))
        d = int(rng.integers(5, 100))
        exact = np.sqrt(np.sum(np.linalg.svd(a, compute_uv=False)[d:] ** 2))
        ratios.append(np.linalg.norm(a - truncated_svd(a, d, seed=trial).reconstruct()) / exact)
    worst = max(ratios)
    record(9, "randomized SVD", worst <= 1.05, f"worst error ratio {worst:.4f} over 20 matrices")


def test_criterion_9_gradients():
    rng = np.random.default_rng(99)
    worst = 0.0
    eps = 1e-7
    for nonsigmoid in (False, True):
        for _ in range(100):
            d, k = 10, 5
            if nonsigmoid:
                lo, hi = 0.02, 1 / math.sqrt(d)
                w, cp, cn = rng.uniform(lo, hi, d), rng.uniform(lo, hi, d), rng.uniform(lo, hi, (k, d))
            else:
                w, cp, cn = rng.normal(0, 0.6, d), rng.normal(0, 0.6, d), rng.normal(0, 0.6, (k, d))
            grads = pair_gradient(w, cp, cn, nonsigmoid, eps)
            numeric = (
                central_difference(lambda x: pair_objective(x, cp, cn, nonsigmoid, eps), w),
                central_difference(lambda x: pair_objective(w, x, cn, nonsigmoid, eps), cp),
                central_difference(lambda x: pair_objective(w, cp, x, nonsigmoid, eps), cn),
            )
            for g, f in zip(grads, numeric):
                worst = max(worst, np.linalg.norm(g - f) / np.linalg.norm(f))
    record(9, "gradients", worst <= 1e-4, f"worst relative error {worst:.2e} over 2 x 100 points")
