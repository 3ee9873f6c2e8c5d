"""Random hyperbolic disk model: points, distances, graphs and the distance density.

Points are uniform in a disk of radius ``R`` of the hyperbolic plane with
curvature -1: angles are uniform and radii have density
``sinh(r) / (cosh(R) - 1)``. Two nodes at distance ``x`` are linked with
probability ``sigmoid(c (R - x))``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from sspmi._random import pair_uniforms
from sspmi.errors import DomainError
from sspmi.graphs import UndirectedGraph

DEFAULT_PAIR_CAP = 20_000


@dataclass
class DiskPoints:
    """Polar coordinates of points in the disk, ``0 <= r <= R``, ``0 <= theta < 2 pi``."""

    r: np.ndarray
    theta: np.ndarray

    def __len__(self) -> int:
        return len(self.r)


@dataclass
class DiskModel:
    n: int
    R: float
    c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or not self.R > 0 or not self.c > 0:
            raise DomainError("disk model needs n >= 2, R > 0 and c > 0")


@dataclass
class PdfTable:
    """Density of the distance between two random disk points on a grid over ``[0, 2R]``."""

    R: float
    xs: np.ndarray
    densities: np.ndarray

    @property
    def mass(self) -> float:
        return float(np.trapezoid(self.densities, self.xs))

    def cdf(self, x) -> np.ndarray:
        steps = np.diff(self.xs) * (self.densities[1:] + self.densities[:-1]) / 2
        cum = np.concatenate([[0.0], np.cumsum(steps)])
        return np.interp(x, self.xs, cum / cum[-1])

    def mean(self) -> float:
        return float(np.trapezoid(self.xs * self.densities, self.xs) / self.mass)


def hyperbolic_distance(r1, theta1, r2, theta2):
    """Hyperbolic law of cosines; works elementwise on arrays."""
    r1, r2 = np.asarray(r1, dtype=np.float64), np.asarray(r2, dtype=np.float64)
    dtheta = np.abs(np.asarray(theta1, dtype=np.float64) - np.asarray(theta2, dtype=np.float64))
    gamma = np.pi - np.abs(np.pi - dtheta)
    # cosh(r1 - r2) + sinh r1 sinh r2 (1 - cos gamma), with 1 - cos = 2 sin^2(gamma / 2)
    arg = np.cosh(r1 - r2) + 2.0 * np.sinh(r1) * np.sinh(r2) * np.sin(gamma / 2) ** 2
    return np.arccosh(np.maximum(arg, 1.0))


def radius_from_uniform(u, R: float):
    """Inverse of the radial CDF ``(cosh r - 1) / (cosh R - 1)``."""
    return np.arccosh(1.0 + np.asarray(u, dtype=np.float64) * (math.cosh(R) - 1.0))


def radial_cdf(r, R: float):
    return (np.cosh(r) - 1.0) / (math.cosh(R) - 1.0)


def sample_disk(n: int, R: float, seed: int) -> DiskPoints:
    if not R > 0:
        raise DomainError(f"disk radius must be positive, got {R}")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    theta = rng.random(n) * 2.0 * np.pi
    return DiskPoints(radius_from_uniform(u, R), theta)


def connection_probability(x, R: float, c: float):
    return expit(c * (R - np.asarray(x)))


def generate_rhg(model: DiskModel, max_n: int = DEFAULT_PAIR_CAP, points: DiskPoints | None = None) -> UndirectedGraph:
    """Sample node positions (unless given) and link each pair independently."""
    if model.n > max_n:
        raise DomainError(f"n={model.n} exceeds the pair-loop cap {max_n}")
    pts = points if points is not None else sample_disk(model.n, model.R, model.seed)
    if len(pts) != model.n:
        raise DomainError("point set size differs from model.n")
    src, dst = [], []
    for i in range(model.n - 1):
        j = np.arange(i + 1, model.n)
        x = hyperbolic_distance(pts.r[i], pts.theta[i], pts.r[j], pts.theta[j])
        hit = pair_uniforms(model.seed, np.full(len(j), i), j) < connection_probability(x, model.R, model.c)
        src.append(np.full(int(hit.sum()), i))
        dst.append(j[hit])
    if not src:
        return UndirectedGraph.empty(model.n)
    return UndirectedGraph.from_edges(model.n, np.concatenate(src), np.concatenate(dst))


def radius_from_graph(n: int, mean_degree: float) -> float:
    """``R = 2 ln(8 n / (pi k))``."""
    if n < 1 or not mean_degree > 0 or not 8 * n >= math.pi * mean_degree:
        raise DomainError(f"need n >= 1, k > 0 and 8n >= pi k (n={n}, k={mean_degree})")
    return 2.0 * math.log(8.0 * n / (math.pi * mean_degree))


def _support_integral(x: float, R: float, t: np.ndarray, w: np.ndarray) -> float:
    """Integral of ``1 / sqrt(1 - A^2)`` over ``(r1, r2)`` in ``[0, R]^2``.

    For fixed ``r1`` the integrand lives on ``|r1 - x| < r2 < r1 + x`` and has
    inverse square-root singularities at both ends. The substitution
    ``r2 = lo + (r1 + x - lo)(1 - cos phi) / 2`` cancels them, and the upper
    limit ``phi_max`` truncates the interval at ``R``.
    """
    r1 = 0.5 * R * (t + 1.0)
    w1 = 0.5 * R * w
    lo = np.abs(r1 - x)
    span = r1 + x - lo
    top = np.minimum(r1 + x, R)
    ok = top > lo
    phi_max = np.zeros_like(r1)
    phi_max[ok] = np.arccos(np.clip(1.0 - 2.0 * (top[ok] - lo[ok]) / span[ok], -1.0, 1.0))
    phi = 0.5 * phi_max[:, None] * (t[None, :] + 1.0)
    wphi = 0.5 * phi_max[:, None] * w[None, :]
    r2 = lo[:, None] + span[:, None] * (1.0 - np.cos(phi)) / 2.0
    jac = span[:, None] * np.sin(phi) / 2.0
    # sinh r1 sinh r2 sqrt(1 - A^2) = 2 sqrt(q), q a product of four sinh terms
    d = np.abs(r1[:, None] - r2)
    s = r1[:, None] + r2
    q = np.sinh((x + d) / 2) * np.sinh((x - d) / 2) * np.sinh((s + x) / 2) * np.sinh((s - x) / 2)
    num = np.sinh(r1)[:, None] * np.sinh(r2)
    good = q > 0
    vals = np.zeros_like(q)
    vals[good] = jac[good] * num[good] / (2.0 * np.sqrt(q[good]))
    return float(np.sum(w1[:, None] * wphi * vals))


def distance_pdf(R: float, grid_points: int = 1000, quadrature_nodes: int = 400) -> PdfTable:
    """Density of the distance ``X`` between two independent uniform disk points.

    ``f(x) = sinh(x) / pi * E[1 / (sqrt(1 - A^2) sinh r1 sinh r2)]`` with
    ``A = (cosh r1 cosh r2 - cosh x) / (sinh r1 sinh r2)`` and the expectation
    over the radial density of both points; the integrand vanishes outside
    ``|r1 - r2| < x < r1 + r2``. Gauss-Legendre in both radial directions.

    Raises
    ------
    DomainError
        If the quadrature mass misses ``[0.999, 1.001]``; raise ``quadrature_nodes``.
    """
    if not R > 0:
        raise DomainError(f"disk radius must be positive, got {R}")
    if grid_points < 3:
        raise DomainError("need at least 3 grid points")
    t, w = np.polynomial.legendre.leggauss(quadrature_nodes)
    xs = np.linspace(0.0, 2.0 * R, grid_points)
    norm = math.pi * (math.cosh(R) - 1.0) ** 2
    dens = np.zeros(grid_points)
    for idx in range(1, grid_points - 1):
        x = xs[idx]
        dens[idx] = math.sinh(x) * _support_integral(x, R, t, w) / norm
    table = PdfTable(R, xs, dens)
    if not 0.999 <= table.mass <= 1.001:
        raise DomainError(f"distance pdf mass {table.mass:.6f} outside [0.999, 1.001]; raise quadrature_nodes")
    return table


def write_pdf(table: PdfTable, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(["x", "density"])
        for x, d in zip(table.xs.tolist(), table.densities.tolist()):
            wr.writerow([f"{x:.9g}", f"{d:.9g}"])


@dataclass
class ComparisonReport:
    grid: np.ndarray
    spmi_density: np.ndarray
    hyperbolic_density: np.ndarray
    bin_mass: np.ndarray
    spmi_mean: float
    shifted_distance_mean: float

    @property
    def delta_shift(self) -> float:
        """``mean(SPMI) - E[R - X]``; positive when ``R - X`` sits to the left."""
        return self.spmi_mean - self.shifted_distance_mean


def compare_spmi_to_hyperbolic(spmi_values, R: float, pdf: PdfTable, bins: int = 200) -> ComparisonReport:
    """Histogram of SPMI values next to the density of ``Y = R - X`` on ``[-R, R]``.

    Only finite SPMI values (observed pairs) enter the histogram.
    """
    v = np.asarray(spmi_values, dtype=np.float64)
    v = v[np.isfinite(v)]
    if len(v) == 0:
        raise DomainError("no finite SPMI values to compare")
    if not math.isclose(pdf.R, R, rel_tol=1e-9):
        raise DomainError(f"distance pdf computed for R={pdf.R}, comparison asked for R={R}")
    lo = min(-R, float(v.min()))
    hi = max(R, float(v.max()))
    counts, edges = np.histogram(v, bins=bins, range=(lo, hi))
    mass = counts / counts.sum()
    width = np.diff(edges)
    centers = (edges[:-1] + edges[1:]) / 2
    # f_Y(y) = f_X(R - y), zero outside [-R, R]
    f_y = np.interp(R - centers, pdf.xs, pdf.densities, left=0.0, right=0.0)
    return ComparisonReport(centers, mass / width, f_y, mass, float(v.mean()), R - pdf.mean())


def write_comparison(rep: ComparisonReport, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(["y", "spmi_density", "r_minus_x_density"])
        for y, a, b in zip(rep.grid.tolist(), rep.spmi_density.tolist(), rep.hyperbolic_density.tolist()):
            wr.writerow([f"{y:.9g}", f"{a:.9g}", f"{b:.9g}"])
        f.write(f"delta_shift={rep.delta_shift:.9g}\n")
