import math

import numpy as np
import pytest
from oracles import brute_force_argmax, central_difference, random_probability_tuples

from sspmi.corpus import build_vocab, encode
from sspmi.errors import DivergenceError, DomainError
from sspmi.factorization import Provenance
from sspmi.sgns import (
    TrainConfig,
    _initial_parameters,
    draw_negatives,
    noise_distribution,
    nsgns_pointwise_optimum,
    pair_gradient,
    pair_objective,
    train_nonsigmoid_sgns,
    train_sgns,
    write_progress,
)

EPS = 1e-7


def test_optimum_examples():
    assert nsgns_pointwise_optimum(0.01, 0.1, 0.1, 1) == pytest.approx(0.5)
    assert nsgns_pointwise_optimum(0.05, 0.1, 0.1, 5) == pytest.approx(0.5)


@pytest.mark.parametrize("bad", [(0, 0.1, 0.1, 1), (0.1, 0, 0.1, 1), (0.1, 0.1, 0.1, 0)])
def test_optimum_domain(bad):
    with pytest.raises(DomainError):
        nsgns_pointwise_optimum(*bad)


def test_optimum_matches_brute_force():
    for p_ij, p_i, p_j, k in random_probability_tuples(200, seed=11):
        got = nsgns_pointwise_optimum(p_ij, p_i, p_j, k)
        assert got == pytest.approx(brute_force_argmax(p_ij, p_i, p_j, k), abs=1e-6)


def _points(rng, nonsigmoid, d=8, k=5):
    if nonsigmoid:
        # keep every dot well inside (0, 1)
        scale = 1.0 / math.sqrt(d)
        return rng.uniform(0.05, scale, d), rng.uniform(0.05, scale, d), rng.uniform(0.05, scale, (k, d))
    return rng.normal(0, 0.7, d), rng.normal(0, 0.7, d), rng.normal(0, 0.7, (k, d))


def _rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12)


@pytest.mark.parametrize("nonsigmoid", [False, True])
def test_gradient_matches_finite_differences(nonsigmoid):
    rng = np.random.default_rng(5 + nonsigmoid)
    for _ in range(100):
        w, cp, cn = _points(rng, nonsigmoid)
        gw, gp, gn = pair_gradient(w, cp, cn, nonsigmoid, EPS)
        fw = central_difference(lambda x: pair_objective(x, cp, cn, nonsigmoid, EPS), w)
        fp = central_difference(lambda x: pair_objective(w, x, cn, nonsigmoid, EPS), cp)
        fn = central_difference(lambda x: pair_objective(w, cp, x, nonsigmoid, EPS), cn)
        assert _rel_err(gw, fw) < 1e-4
        assert _rel_err(gp, fp) < 1e-4
        assert _rel_err(gn, fn) < 1e-4


def test_clamped_dot_has_zero_gradient():
    w = np.full(4, 1.0)
    c = np.full(4, 1.0)  # dot 4 > 1 - eps
    gw, gp, gn = pair_gradient(w, c, c[None, :] * 0.01, True, EPS)
    np.testing.assert_array_equal(gp, 0.0)
    assert np.isfinite(pair_objective(w, c, c[None, :], True, EPS))


def test_noise_distribution_draws():
    counts = np.array([1000, 400, 250, 90, 60, 30, 10, 5, 2, 1])
    p = noise_distribution(counts, 0.75)
    np.testing.assert_allclose(p, counts**0.75 / np.sum(counts**0.75))
    n = 1_000_000
    freq = np.bincount(draw_negatives(p, n, seed=99), minlength=len(p))
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(freq - n * p) <= 3 * sigma)


def ab_corpus(repeats=10_000):
    toks = ["a", "b"] * repeats
    vocab = build_vocab(toks, 1)
    return encode(toks, vocab), vocab


@pytest.mark.parametrize("seed", [1, 3, 5])
def test_sgns_dot_increases_on_ab_corpus(seed):
    # window 1, k 1, noise power 1: the optimum dot is PMI(a, b) = log 2 > 0 from a start at 0.
    # A small step keeps the climb spread over all epochs.
    ids, vocab = ab_corpus()
    a, b = vocab.index["a"], vocab.index["b"]
    dots = []
    cfg = TrainConfig(d=4, k=1, epochs=5, window=1, unigram_power=1.0, learning_rate=2e-4, seed=seed)
    train_sgns(ids, vocab, cfg, callback=lambda e, W, C: dots.append(W[a] @ C[b]))
    assert len(dots) == 5
    assert dots[0] > 0
    assert np.all(np.diff(dots) > 0)


def test_sgns_settles_at_shifted_pmi():
    ids, vocab = ab_corpus()
    emb = train_sgns(ids, vocab, TrainConfig(d=4, k=1, epochs=5, window=1, unigram_power=1.0, seed=1))
    a, b = vocab.index["a"], vocab.index["b"]
    assert emb.W[a] @ emb.C[b] == pytest.approx(math.log(2), abs=0.05)


def test_nonsigmoid_single_pair_reaches_optimum():
    # window 1 on "a b a b ...": p(a,b) = 1/2, p(a) = p(b) = 1/2; noise with power 1 matches p
    ids, vocab = ab_corpus()
    cfg = TrainConfig(d=4, k=1, epochs=10, window=1, unigram_power=1.0, seed=3)
    emb = train_nonsigmoid_sgns(ids, vocab, cfg)
    a, b = vocab.index["a"], vocab.index["b"]
    target = nsgns_pointwise_optimum(0.5, 0.5, 0.5, 1)
    assert target == pytest.approx(2 / 3)
    assert emb.W[a] @ emb.C[b] == pytest.approx(target, abs=0.05)
    assert emb.W[b] @ emb.C[a] == pytest.approx(target, abs=0.05)


@pytest.mark.parametrize("nonsigmoid", [False, True])
def test_zero_epochs_returns_initialization(nonsigmoid):
    ids, vocab = ab_corpus(10)
    cfg = TrainConfig(d=6, epochs=0, seed=8)
    trainer = train_nonsigmoid_sgns if nonsigmoid else train_sgns
    emb = trainer(ids, vocab, cfg)
    W, C = _initial_parameters(vocab.n, cfg, nonsigmoid, np.random.default_rng(8))
    np.testing.assert_array_equal(emb.W, W)
    np.testing.assert_array_equal(emb.C, C)
    assert emb.objective_history == []


def test_nonsigmoid_initial_dots_feasible(smoke_tokens):
    vocab = build_vocab(smoke_tokens, 5)
    emb = train_nonsigmoid_sgns(smoke_tokens[:100], vocab, TrainConfig(d=300, epochs=0))
    dots = emb.W @ emb.C.T
    assert dots.min() > 0 and dots.max() < 1


@pytest.mark.parametrize("trainer", [train_sgns, train_nonsigmoid_sgns])
def test_objective_improves_on_smoke_corpus(smoke_tokens, trainer, tmp_path):
    vocab = build_vocab(smoke_tokens, 5)
    cfg = TrainConfig(d=50, epochs=4, seed=2)
    emb = trainer(smoke_tokens, vocab, cfg, progress_path=tmp_path / "log.csv")
    hist = emb.objective_history
    assert len(hist) == 4
    assert np.all(np.diff(hist) >= 0)
    lines = (tmp_path / "log.csv").read_text().splitlines()
    assert lines[0] == "epoch,mean_objective"
    assert len(lines) == 5
    assert np.isfinite(emb.W).all() and np.isfinite(emb.C).all()
    if trainer is train_nonsigmoid_sgns:
        assert emb.provenance is Provenance.NonsigmoidSGNS


def test_single_worker_is_reproducible(smoke_tokens):
    vocab = build_vocab(smoke_tokens, 5)
    cfg = TrainConfig(d=20, epochs=1, seed=4)
    e1 = train_sgns(smoke_tokens[:20_000], vocab, cfg)
    e2 = train_sgns(smoke_tokens[:20_000], vocab, cfg)
    assert np.array_equal(e1.W, e2.W) and np.array_equal(e1.C, e2.C)


def test_multi_worker_runs(smoke_tokens):
    vocab = build_vocab(smoke_tokens, 5)
    emb = train_sgns(smoke_tokens, vocab, TrainConfig(d=20, epochs=1, workers=4))
    assert np.isfinite(emb.W).all()
    assert emb.objective_history[0] < 0


def test_divergence_is_reported():
    ids, vocab = ab_corpus(2000)
    with pytest.raises(DivergenceError):
        train_sgns(ids, vocab, TrainConfig(d=4, k=1, window=1, learning_rate=1e300, lr_schedule=False, epochs=3))


@pytest.mark.parametrize(
    "kw", [{"k": 0}, {"d": 0}, {"clamp_eps": 0.5}, {"clamp_eps": 0}, {"learning_rate": 0.0}, {"window": 0}]
)
def test_config_validation(kw):
    with pytest.raises(DomainError):
        TrainConfig(**kw)


def test_progress_file(tmp_path):
    write_progress([-2.5, -2.25], tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text() == "epoch,mean_objective\n1,-2.5\n2,-2.25\n"
