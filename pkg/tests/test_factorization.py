import numpy as np
import pytest
import scipy.sparse as sp

from sspmi.errors import DomainError
from sspmi.factorization import (
    EmbeddingSet,
    Provenance,
    SvdResult,
    embeddings_from_svd,
    load_embedding_set,
    truncated_svd,
    write_embeddings,
)


def exact_error(a, d):
    """Frobenius error of the best rank-d approximation from a dense LAPACK SVD."""
    s = np.linalg.svd(a, compute_uv=False)
    return np.sqrt(np.sum(s[d:] ** 2))


def test_diagonal_rank2():
    res = truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_allclose(res.S, [3.0, 2.0])
    approx = res.reconstruct()
    np.testing.assert_allclose(approx, np.diag([3.0, 2.0, 0.0]), atol=1e-12)
    assert np.linalg.norm(np.diag([3.0, 2.0, 1.0]) - approx) == pytest.approx(1.0)


def test_full_rank_is_exact(rng):
    a = rng.standard_normal((30, 30))
    res = truncated_svd(a, 30)
    np.testing.assert_allclose(res.reconstruct(), a, atol=1e-8)


@pytest.mark.parametrize("trial", range(20))
def test_randomized_within_5pct_of_exact(trial):
    rng = np.random.default_rng(1000 + trial)
    a = rng.standard_normal((200, 200))
    d = int(rng.integers(5, 60))
    res = truncated_svd(a, d, seed=trial)
    err = np.linalg.norm(a - res.reconstruct())
    assert err <= 1.05 * exact_error(a, d)


def test_sparse_input_matches_dense(rng):
    a = sp.random(300, 300, density=0.02, random_state=7, format="csr")
    a = a + a.T
    res_sparse = truncated_svd(a, 10, seed=3)
    res_dense = truncated_svd(a.toarray(), 10, seed=3)
    np.testing.assert_allclose(res_sparse.S, res_dense.S, rtol=1e-10)


def test_symmetric_singular_values_are_abs_eigenvalues(rng):
    x = rng.standard_normal((80, 80))
    a = x + x.T
    ev = np.sort(np.abs(np.linalg.eigvalsh(a)))[::-1]
    res = truncated_svd(a, 80)
    np.testing.assert_allclose(res.S, ev, rtol=1e-8)


def test_low_rank_structure_recovered(rng):
    u = np.linalg.qr(rng.standard_normal((150, 5)))[0]
    v = np.linalg.qr(rng.standard_normal((150, 5)))[0]
    s = np.array([10.0, 7.0, 5.0, 2.0, 1.0])
    a = (u * s) @ v.T
    res = truncated_svd(a, 5)
    np.testing.assert_allclose(res.S, s, rtol=1e-10)
    np.testing.assert_allclose(np.abs(res.U.T @ u), np.eye(5), atol=1e-8)


def test_seed_determinism(rng):
    a = rng.standard_normal((100, 60))
    r1 = truncated_svd(a, 7, seed=42)
    r2 = truncated_svd(a, 7, seed=42)
    for x, y in [(r1.U, r2.U), (r1.S, r2.S), (r1.V, r2.V)]:
        assert np.array_equal(x, y)


def test_orthonormal_factors(rng):
    res = truncated_svd(rng.standard_normal((90, 70)), 12)
    np.testing.assert_allclose(res.U.T @ res.U, np.eye(12), atol=1e-10)
    np.testing.assert_allclose(res.V.T @ res.V, np.eye(12), atol=1e-10)
    assert np.all(np.diff(res.S) <= 0)


@pytest.mark.parametrize("d", [0, 11])
def test_rank_out_of_range(d):
    with pytest.raises(DomainError):
        truncated_svd(np.eye(10), d)


def test_embedding_split():
    svd = SvdResult(np.eye(2), np.array([4.0, 1.0]), np.eye(2))
    emb = embeddings_from_svd(svd, ["a", "b"])
    np.testing.assert_allclose(emb.W, np.diag([2.0, 1.0]))
    np.testing.assert_allclose(emb.C, np.diag([2.0, 1.0]))
    assert emb.provenance is Provenance.SVD


def test_embedding_reconstruction(rng):
    a = rng.standard_normal((40, 40))
    svd = truncated_svd(a, 10)
    emb = embeddings_from_svd(svd, [str(i) for i in range(40)])
    np.testing.assert_allclose(emb.W @ emb.C.T, (svd.U * svd.S) @ svd.V.T, atol=1e-12)


def test_embedding_set_validation():
    with pytest.raises(DomainError):
        EmbeddingSet(np.ones((2, 3)), None, ["a"], Provenance.FILE)
    with pytest.raises(DomainError):
        EmbeddingSet(np.array([[np.nan]]), None, ["a"], Provenance.FILE)
    with pytest.raises(DomainError):
        EmbeddingSet(np.ones((2, 3)), np.ones((2, 2)), ["a", "b"], Provenance.FILE)


def test_embedding_file_round_trip(tmp_path, rng):
    words = ["x", "y", "z"]
    w = rng.standard_normal((3, 4))
    c = rng.standard_normal((3, 4))
    write_embeddings(words, w, tmp_path / "w.vec")
    write_embeddings(words, c, tmp_path / "c.vec")
    assert (tmp_path / "w.vec").read_text().splitlines()[0] == "3 4"
    emb = load_embedding_set(tmp_path / "w.vec", tmp_path / "c.vec")
    assert emb.words == words
    np.testing.assert_allclose(emb.W, w, rtol=1e-5)
    np.testing.assert_allclose(emb.C, c, rtol=1e-5)
