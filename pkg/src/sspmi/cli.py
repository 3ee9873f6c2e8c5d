"""Command-line front end: ``sspmi <subcommand> [flags]``.

Every subcommand writes a JSON manifest next to its main output recording the
arguments, seed, input checksums and a wall-clock timestamp. Exit codes are 0
on success, 1 on a domain error and 2 on I/O or usage errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from sspmi import __version__, config as cfgmod
from sspmi.corpus import (
    build_vocab,
    count_cooccurrences,
    read_counts,
    read_tokens,
    read_vocab,
    write_counts,
    write_vocab,
)
from sspmi.errors import DivergenceError, DomainError
from sspmi.evaluation import evaluate_all, read_analogy, read_similarity, write_report
from sspmi.factorization import (
    embeddings_from_svd,
    load_embedding_set,
    truncated_svd,
    write_embeddings,
)
from sspmi.graphs import (
    UndirectedGraph,
    is_complex_network,
    mean_ci,
    network_stats,
    read_graph,
    sample_graph,
    spectrum,
    semicircle_ks,
    write_graph,
    write_histogram,
    write_spectrum,
)
from sspmi.hyperbolic import (
    DiskModel,
    compare_spmi_to_hyperbolic,
    distance_pdf,
    generate_rhg,
    radius_from_graph,
    write_comparison,
    write_pdf,
)
from sspmi.matrices import Kind, SparseScoreMatrix, build_matrix, pmi_matrix, read_matrix, transform, write_matrix
from sspmi.sgns import TrainConfig, train_nonsigmoid_sgns, train_sgns

logger = logging.getLogger("sspmi")


# --- manifest ---------------------------------------------------------------------


def sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(path: str | Path, command: str, settings: dict, inputs, outputs, seed=None) -> None:
    data = {
        "command": command,
        "version": __version__,
        "settings": {k: _jsonable(v) for k, v in sorted(settings.items())},
        "seed": seed,
        "inputs": {str(p): sha256(p) for p in inputs if p},
        "outputs": [str(p) for p in outputs if p],
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def _jsonable(v):
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _manifest_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


# --- shared helpers -----------------------------------------------------------------


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        d=args.dim,
        k=args.negatives,
        epochs=args.epochs,
        learning_rate=args.lr,
        lr_schedule=not args.no_lr_decay,
        window=args.window,
        subsample_t=args.subsample,
        unigram_power=args.unigram_power,
        clamp_eps=args.clamp_eps,
        seed=args.seed,
        workers=args.workers,
    )


def spmi_values(m: SparseScoreMatrix, k: float | None = None) -> np.ndarray:
    """Off-diagonal SPMI values of a PMI, SPMI or SigmaSPMI matrix."""
    _, _, v = m.offdiagonal()
    v = v.astype(np.float64)
    if m.kind is Kind.PMI:
        if k is None or not k > 0:
            raise DomainError("a PMI matrix needs a positive --k to shift")
        return v - math.log(k)
    if m.kind is Kind.SPMI:
        return v
    if m.kind is Kind.SigmaSPMI:
        with np.errstate(divide="ignore"):
            return np.log(v) - np.log1p(-v)
    raise DomainError(f"cannot recover SPMI values from a {m.kind.value} matrix")


def graph_runs(probs: SparseScoreMatrix, runs: int, seed: int):
    """Sample ``runs`` graphs with seeds ``seed, seed + 1, ...`` and measure each."""
    out = []
    for r in range(runs):
        g = sample_graph(probs, seed + r)
        out.append((g, network_stats(g)))
    return out


def write_graph_stats(stats_list, path: str | Path) -> None:
    """CSV with ``statistic,mean,ci95,runs``; ``ci95`` is the half-width ``1.96 sd / sqrt(runs)``."""
    rows = {
        "n": [s.n for s in stats_list],
        "m": [s.m for s in stats_list],
        "mean_degree": [s.mean_degree for s in stats_list],
        "density": [s.density for s in stats_list],
        "clustering": [s.clustering for s in stats_list],
        "clustering_ratio": [s.clustering / s.density if s.density > 0 else math.nan for s in stats_list],
        "gamma": [s.gamma if s.gamma is not None else math.nan for s in stats_list],
        "ks": [s.ks if s.ks is not None else math.nan for s in stats_list],
        "complex_network": [float(is_complex_network(s)[0]) for s in stats_list],
    }
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["statistic", "mean", "ci95", "runs"])
        for name, vals in rows.items():
            mean, half = mean_ci(vals)
            w.writerow([name, f"{mean:.9g}", f"{half:.9g}", len(vals)])


# --- subcommands ----------------------------------------------------------------------


def cmd_vocab(args):
    vocab = build_vocab(read_tokens(args.corpus), args.min_count)
    write_vocab(vocab, args.out)
    logger.info("vocabulary: %d words", vocab.n)
    return [args.corpus], [args.out], None


def cmd_cooc(args):
    vocab = read_vocab(args.vocab)
    counts = count_cooccurrences(read_tokens(args.corpus), vocab, args.window, args.dynamic_window)
    write_counts(counts, args.out)
    return [args.corpus, args.vocab], [args.out], None


def cmd_matrix(args):
    counts = read_counts(args.cooc)
    write_matrix(build_matrix(counts, args.kind, args.k, args.cds), args.out)
    return [args.cooc], [args.out], None


def cmd_svd(args):
    m = read_matrix(args.matrix)
    words = read_vocab(args.vocab).words
    if len(words) != m.n:
        raise DomainError(f"vocabulary has {len(words)} words, matrix has {m.n} rows")
    emb = embeddings_from_svd(truncated_svd(m.to_csr(), args.dim, args.oversample, args.power_iters, args.seed), words)
    write_embeddings(emb.words, emb.W, args.out)
    if args.context_out:
        write_embeddings(emb.words, emb.C, args.context_out)
    return [args.matrix, args.vocab], [args.out, args.context_out], args.seed


def _cmd_train(args, trainer):
    vocab = read_vocab(args.vocab)
    emb = trainer(read_tokens(args.corpus), vocab, _train_config(args), progress_path=args.log)
    write_embeddings(emb.words, emb.W, args.out)
    if args.context_out:
        write_embeddings(emb.words, emb.C, args.context_out)
    return [args.corpus, args.vocab], [args.out, args.context_out, args.log], args.seed


def cmd_train_sgns(args):
    return _cmd_train(args, train_sgns)


def cmd_train_nsgns(args):
    return _cmd_train(args, train_nonsigmoid_sgns)


def cmd_eval(args):
    if not args.similarity and not args.analogy:
        raise DomainError("give at least one --similarity or --analogy file")
    emb = load_embedding_set(args.embeddings, args.context)
    rows = evaluate_all(
        emb,
        [read_similarity(p) for p in args.similarity],
        [read_analogy(p) for p in args.analogy],
        args.use_w_plus_c,
    )
    write_report(rows, args.out)
    for r in rows:
        print(f"{r['dataset']}\t{r['metric']}\t{r['value']:.4f}\tcoverage {r['coverage']:.3f}")
    inputs = [args.embeddings, args.context, *args.similarity, *args.analogy]
    return inputs, [args.out], None


def cmd_graph_sample(args):
    write_graph(sample_graph(read_matrix(args.matrix), args.seed), args.out)
    return [args.matrix], [args.out], args.seed


def cmd_graph_stats(args):
    if args.graph:
        results = [(g := read_graph(args.graph), network_stats(g))]
        inputs = [args.graph]
    else:
        results = graph_runs(read_matrix(args.matrix), args.runs, args.seed)
        inputs = [args.matrix]
    write_graph_stats([s for _, s in results], args.out)
    if args.histogram_out:
        write_histogram(results[0][1].histogram, args.histogram_out)
    for line in Path(args.out).read_text().splitlines():
        print(line)
    return inputs, [args.out, args.histogram_out], args.seed


def cmd_graph_spectrum(args):
    if args.graph:
        g = read_graph(args.graph)
        inputs = [args.graph]
    else:
        g = sample_graph(read_matrix(args.matrix), args.seed)
        inputs = [args.matrix]
    eigs = spectrum(g, args.max_n)
    write_spectrum(eigs, args.out)
    print(f"semicircle_ks={semicircle_ks(eigs):.6f}")
    return inputs, [args.out], args.seed


def cmd_rhg(args):
    R = args.R if args.R is not None else radius_from_graph(args.n, args.mean_degree)
    g = generate_rhg(DiskModel(args.n, R, args.c, args.seed), args.max_n)
    write_graph(g, args.out)
    verdict, report = is_complex_network(network_stats(g))
    print(f"R={R:.6f} m={g.m} complex_network={verdict} clustering_ratio={report['clustering_ratio']:.3f}")
    return [], [args.out], args.seed


def cmd_distance_pdf(args):
    write_pdf(distance_pdf(args.R, args.grid, args.nodes), args.out)
    return [], [args.out], None


def cmd_compare(args):
    m = read_matrix(args.matrix)
    if args.R is not None:
        R = args.R
    else:
        if args.graph:
            g = read_graph(args.graph)
            mean_degree = 2.0 * g.m / g.n
        elif args.mean_degree is not None:
            mean_degree = args.mean_degree
        else:
            raise DomainError("give --R, --mean-degree or --graph")
        R = radius_from_graph(m.n, mean_degree)
    report = compare_spmi_to_hyperbolic(spmi_values(m, args.k), R, distance_pdf(R, args.grid, args.nodes), args.bins)
    write_comparison(report, args.out)
    print(f"R={R:.6f} delta_shift={report.delta_shift:.6f}")
    return [args.matrix, args.graph], [args.out], None


# --- pipeline -------------------------------------------------------------------------


def run_pipeline(cfg: cfgmod.PipelineConfig) -> list[Path]:
    """vocab -> cooc -> matrix -> svd -> eval -> graph-stats -> compare, all under ``output_dir``."""
    cfg.validate()
    if not Path(cfg.corpus_path).is_file():
        raise FileNotFoundError(f"corpus not found: {cfg.corpus_path}")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    art = {
        "config": out / "config.cfg",
        "vocab": out / "vocab.txt",
        "cooc": out / "cooc.txt",
        "matrix": out / "matrix.txt",
        "sigma_spmi": out / "sigma_spmi.txt",
        "words": out / "words.vec",
        "contexts": out / "contexts.vec",
        "eval": out / "eval.csv",
        "graph_stats": out / "graph_stats.csv",
        "histogram": out / "degree_histogram.csv",
        "pdf": out / "distance_pdf.csv",
        "compare": out / "compare.csv",
    }
    art["config"].write_text(cfgmod.dumps(cfg), encoding="utf-8")

    tokens = read_tokens(cfg.corpus_path)
    vocab = build_vocab(tokens, cfg.min_count)
    write_vocab(vocab, art["vocab"])
    counts = count_cooccurrences(tokens, vocab, cfg.window, cfg.dynamic_window)
    write_counts(counts, art["cooc"])
    logger.info("vocab %d words, %d co-occurring pairs", vocab.n, counts.nnz)

    pmi = pmi_matrix(counts, cfg.cds_alpha)
    kind = Kind.parse(cfg.kind)
    matrix = pmi if kind is Kind.PMI else transform(pmi, kind, cfg.shift_k)
    write_matrix(matrix, art["matrix"])
    sigma = transform(pmi, Kind.SigmaSPMI, cfg.shift_k)
    write_matrix(sigma, art["sigma_spmi"])

    d = min(cfg.dimension, vocab.n)
    svd = truncated_svd(matrix.to_csr(), d, cfg.oversample, cfg.power_iters, cfg.svd_seed)
    emb = embeddings_from_svd(svd, vocab.words)
    write_embeddings(emb.words, emb.W, art["words"])
    write_embeddings(emb.words, emb.C, art["contexts"])

    sims = [read_similarity(p) for p in cfg.paths("similarity")]
    analogies = [read_analogy(p) for p in cfg.paths("analogy")]
    write_report(evaluate_all(emb, sims, analogies, cfg.use_w_plus_c), art["eval"])

    results = graph_runs(sigma, cfg.runs, cfg.seed)
    write_graph_stats([s for _, s in results], art["graph_stats"])
    write_histogram(results[0][1].histogram, art["histogram"])

    mean_degree = float(np.mean([s.mean_degree for _, s in results]))
    R = radius_from_graph(vocab.n, mean_degree)
    pdf = distance_pdf(R, cfg.grid_points, cfg.quadrature_nodes)
    write_pdf(pdf, art["pdf"])
    report = compare_spmi_to_hyperbolic(spmi_values(transform(pmi, Kind.SPMI, cfg.shift_k)), R, pdf, cfg.bins)
    write_comparison(report, art["compare"])
    logger.info("R=%.4f delta_shift=%.4f", R, report.delta_shift)

    inputs = [cfg.corpus_path, *cfg.paths("similarity"), *cfg.paths("analogy")]
    settings = dataclasses.asdict(cfg)
    # outputs are named relative to output_dir so equal configs give equal manifests
    outputs = [p.name for p in art.values()] + ["manifest.json"]
    write_manifest(out / "manifest.json", "pipeline", settings, inputs, outputs, cfg.seed)
    return list(art.values())


def _config_flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def cmd_pipeline(args):
    cfg = cfgmod.load(args.config) if args.config else cfgmod.PipelineConfig()
    for f in dataclasses.fields(cfgmod.PipelineConfig):
        raw = getattr(args, "cfg_" + f.name)
        if raw is not None:
            setattr(cfg, f.name, cfgmod.parse_value(f.name, raw))
    run_pipeline(cfg)
    return None


# --- argument parsing -----------------------------------------------------------------


def _add_train_flags(p):
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--dim", type=int, default=300)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=None, help="initial learning rate (default depends on objective)")
    p.add_argument("--no-lr-decay", action="store_true")
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--subsample", type=float, default=None)
    p.add_argument("--unigram-power", type=float, default=0.75)
    p.add_argument("--clamp-eps", type=float, default=1e-7)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--context-out")
    p.add_argument("--log", help="per-epoch objective CSV")


def _graph_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="SigmaSPMI matrix to sample graphs from")
    src.add_argument("--graph", help="graph file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sspmi", description="Squashed shifted PMI embeddings and graphs.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vocab", help="build the vocabulary")
    p.add_argument("--corpus", required=True)
    p.add_argument("--min-count", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("cooc", help="count symmetric window co-occurrences")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--dynamic-window", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cooc)

    p = sub.add_parser("matrix", help="PMI-family matrix from counts")
    p.add_argument("--cooc", required=True)
    p.add_argument("--kind", default="sigma-spmi", help="pmi, spmi, sigma-spmi, pspmi or bspmi")
    p.add_argument("--k", type=float, default=5.0)
    p.add_argument("--cds", type=float, default=None, help="context distribution smoothing exponent")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("svd", help="truncated SVD embeddings")
    p.add_argument("--matrix", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--dim", type=int, default=300)
    p.add_argument("--oversample", type=int, default=10)
    p.add_argument("--power-iters", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--context-out")
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("train-sgns", help="train SGNS")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train_sgns)
    p = sub.add_parser("train-nsgns", help="train Nonsigmoid SGNS")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train_nsgns)

    p = sub.add_parser("eval", help="similarity and analogy benchmarks")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--context")
    p.add_argument("--similarity", action="append", default=[])
    p.add_argument("--analogy", action="append", default=[])
    p.add_argument("--use-w-plus-c", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("graph-sample", help="sample a graph from a SigmaSPMI matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph_sample)

    p = sub.add_parser("graph-stats", help="clustering, density and power-law fit")
    _graph_source(p)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--histogram-out")
    p.set_defaults(func=cmd_graph_stats)

    p = sub.add_parser("graph-spectrum", help="adjacency eigenvalues")
    _graph_source(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-n", type=int, default=15_000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph_spectrum)

    p = sub.add_parser("rhg", help="random hyperbolic graph")
    p.add_argument("--n", type=int, required=True)
    size = p.add_mutually_exclusive_group(required=True)
    size.add_argument("--R", type=float)
    size.add_argument("--mean-degree", type=float)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-n", type=int, default=20_000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rhg)

    p = sub.add_parser("distance-pdf", help="density of distances in the hyperbolic disk")
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--nodes", type=int, default=400)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distance_pdf)

    p = sub.add_parser("compare", help="SPMI values against R - X")
    p.add_argument("--matrix", required=True, help="PMI, SPMI or SigmaSPMI matrix")
    p.add_argument("--k", type=float, default=None, help="shift for a PMI matrix")
    p.add_argument("--R", type=float)
    p.add_argument("--mean-degree", type=float)
    p.add_argument("--graph", help="take the mean degree from this graph")
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--nodes", type=int, default=400)
    p.add_argument("--bins", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="run everything from a config file")
    p.add_argument("--config")
    for f in dataclasses.fields(cfgmod.PipelineConfig):
        p.add_argument(_config_flag(f.name), dest="cfg_" + f.name, metavar="VALUE")
    p.set_defaults(func=cmd_pipeline)
    return ap


def _set_threads() -> None:
    cap = os.environ.get("SSPMI_THREADS")
    if not cap:
        return
    import numba

    numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        _set_threads()
        result = args.func(args)
        if result is not None:
            inputs, outputs, seed = result
            settings = {k: v for k, v in vars(args).items() if k != "func"}
            write_manifest(_manifest_path(outputs[0]), args.command, settings, inputs, outputs, seed)
    except (DomainError, DivergenceError) as e:
        print(f"sspmi: error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"sspmi: I/O error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
