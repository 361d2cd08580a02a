"""Monte Carlo runners for the spacing-bias experiments.

All runners draw spectra through :func:`iter_spectra`. Matrix ``i`` of
dimension ``M`` under global seed ``s`` always comes from the Philox
stream keyed by ``(s, M, i)``: first the ``2 M**2`` Ginibre normals, then
two auxiliary uniforms (one picks a random index, one a random point on
the circle). Blocks of matrices are reduced in index order, so the
numbers in a report do not depend on the worker count. Runners that share
``(dim, n, seed)`` see the same matrices; running table 1 and table 2 with
one seed analyses a single data set.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .haar import unitaries_from_ginibre
from .linalg import sample_ginibre, unitary_eigenvalues_batch
from .rng import RandomStream
from .spacings import (
    TWO_PI,
    angles_from_eigenvalues,
    lazy_mean,
    normalized_spacings,
    size_biased_mean,
    wrap_angles,
)
from .stats import StatAccumulator

DEFAULT_DIMS = (14, 22, 32)
DEFAULT_INDICES = (1, 3, 7, 11, "rand")
DEFAULT_SAMPLES = 100_000
BLOCK_SIZE = 500
AUX_DRAWS = 2
IDENTITY_TOL = 1e-9

# (angles (B, M), aux uniforms (B, AUX_DRAWS))
Block = tuple[np.ndarray, np.ndarray]
SpectraSource = Callable[[int, int, int], Iterable[Block]]


@dataclass
class Cell:
    row_label: str
    col_label: str
    mean: float
    std_error: float
    count: int

    @classmethod
    def from_acc(cls, row: str, col, acc: StatAccumulator) -> "Cell":
        return cls(row, str(col), acc.mean, acc.std_error, acc.count)


@dataclass
class ExperimentReport:
    experiment_name: str
    dims: list[int]
    samples_per_cell: int
    seed: int
    cells: list[Cell] = field(default_factory=list)
    wall_time_seconds: float = 0.0

    def cell(self, row: str, col) -> Cell:
        for c in self.cells:
            if c.row_label == row and c.col_label == str(col):
                return c
        raise KeyError((row, str(col)))


# -- spectrum generation --------------------------------------------------


def draw_block(dim: int, start: int, stop: int, seed: int, corrected: bool = True) -> Block:
    """Eigenangles and auxiliary uniforms for matrices ``start .. stop-1``."""
    size = stop - start
    g = np.empty((size, dim, dim), dtype=np.complex128)
    aux = np.empty((size, AUX_DRAWS))
    for i in range(size):
        stream = RandomStream.for_matrix(seed, dim, start + i)
        g[i] = sample_ginibre(dim, stream)
        aux[i] = stream.uniform(AUX_DRAWS)
    u = unitaries_from_ginibre(g, corrected=corrected)
    return angles_from_eigenvalues(unitary_eigenvalues_batch(u)), aux


def _draw_block_args(args) -> Block:
    return draw_block(*args)


def iter_spectra(
    dim: int,
    n: int,
    seed: int,
    *,
    corrected: bool = True,
    workers: int = 1,
    block_size: int = BLOCK_SIZE,
) -> Iterator[Block]:
    """Yield spectra of ``n`` sampled matrices in fixed-size blocks, in order."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    jobs = [
        (dim, start, min(start + block_size, n), seed, corrected)
        for start in range(0, n, block_size)
    ]
    if workers == 1 or len(jobs) == 1:
        for job in jobs:
            yield draw_block(*job)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_draw_block_args, jobs)


def _source(workers: int, corrected: bool = True) -> SpectraSource:
    def source(dim, n, seed):
        return iter_spectra(dim, n, seed, corrected=corrected, workers=workers)

    return source


def random_indices(aux_column: np.ndarray, m: int) -> np.ndarray:
    return np.minimum((aux_column * m).astype(np.intp), m - 1)


def random_points(aux_column: np.ndarray) -> np.ndarray:
    return wrap_angles(-np.pi + TWO_PI * aux_column)


def _check_dims(dims: Sequence[int], minimum: int) -> list[int]:
    dims = [int(d) for d in dims]
    if not dims:
        raise ValueError("dims must be nonempty")
    for d in dims:
        if d < minimum:
            raise ValueError(f"dim must be >= {minimum}, got {d}")
    return dims


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")


# -- runners ---------------------------------------------------------------


def run_table1(
    dims: Sequence[int] = DEFAULT_DIMS,
    indices: Sequence = DEFAULT_INDICES,
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    workers: int = 1,
    source: SpectraSource | None = None,
) -> ExperimentReport:
    """Mean of the fixed-index spacing ``delta_j`` per dimension.

    Indices are 1-based; ``"rand"`` draws a fresh uniform index per matrix.
    """
    t0 = time.perf_counter()
    dims = _check_dims(dims, 1)
    _check_n(n)
    fixed = [int(j) for j in indices if j != "rand"]
    for j in fixed:
        if j < 1 or j > min(dims):
            raise ValueError(f"index {j} out of range 1..{min(dims)}")
    source = source or _source(workers)
    accs = {}
    for dim in dims:
        row_accs = {j: StatAccumulator() for j in indices}
        for angles, aux in source(dim, n, seed):
            s = normalized_spacings(angles)
            for j in indices:
                if j == "rand":
                    picked = s[np.arange(len(s)), random_indices(aux[:, 0], dim)]
                else:
                    picked = s[:, int(j) - 1]
                row_accs[j] = row_accs[j].update(picked)
        accs[dim] = row_accs
    cells = [
        Cell.from_acc(f"delta_{j}", dim, accs[dim][j]) for j in indices for dim in dims
    ]
    return ExperimentReport("table1", dims, n, seed, cells, time.perf_counter() - t0)


def run_table2(
    dims: Sequence[int] = DEFAULT_DIMS,
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    workers: int = 1,
    source: SpectraSource | None = None,
) -> ExperimentReport:
    """Pooled mean of ``delta_1 .. delta_{M-1}`` and mean of the wrap-around gap."""
    t0 = time.perf_counter()
    dims = _check_dims(dims, 2)
    _check_n(n)
    source = source or _source(workers)
    lazy, wrap = {}, {}
    for dim in dims:
        lazy_acc, wrap_acc = StatAccumulator(), StatAccumulator()
        for angles, _ in source(dim, n, seed):
            s = normalized_spacings(angles)
            gap = (dim - 1) * lazy_mean(s) + s[:, -1] - dim
            if np.abs(gap).max() > IDENTITY_TOL:
                raise RuntimeError(
                    f"per-matrix identity (M-1)*lazy + delta_M = M violated by {np.abs(gap).max():.3g}"
                )
            lazy_acc = lazy_acc.update(s[:, :-1])
            wrap_acc = wrap_acc.update(s[:, -1])
        lazy[dim], wrap[dim] = lazy_acc, wrap_acc
    cells = [Cell.from_acc("lazy", d, lazy[d]) for d in dims]
    cells += [Cell.from_acc("wrap", d, wrap[d]) for d in dims]
    return ExperimentReport("table2", dims, n, seed, cells, time.perf_counter() - t0)


def _difference(row: str, col, a: StatAccumulator, b: StatAccumulator) -> Cell:
    se = math.sqrt(a.std_error**2 + b.std_error**2) if min(a.count, b.count) > 1 else math.nan
    return Cell(row, str(col), a.mean - b.mean, se, a.count)


def run_wrap_constant(
    dims: Sequence[int] = DEFAULT_DIMS,
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    workers: int = 1,
    source: SpectraSource | None = None,
) -> ExperimentReport:
    """Two estimates of the size-biased gap constant per dimension.

    Row ``wrap`` averages ``delta_M``; row ``size_biased`` averages the
    per-matrix mean of squared spacings. Both estimate the expected size
    of the gap containing a fixed point. Row ``difference`` is their
    difference with the combined standard error.
    """
    t0 = time.perf_counter()
    dims = _check_dims(dims, 2)
    _check_n(n)
    source = source or _source(workers)
    cells = []
    for dim in dims:
        wrap_acc, sb_acc = StatAccumulator(), StatAccumulator()
        for angles, _ in source(dim, n, seed):
            s = normalized_spacings(angles)
            wrap_acc = wrap_acc.update(s[:, -1])
            sb_acc = sb_acc.update(size_biased_mean(s))
        cells += [
            Cell.from_acc("wrap", dim, wrap_acc),
            Cell.from_acc("size_biased", dim, sb_acc),
            _difference("difference", dim, wrap_acc, sb_acc),
        ]
    return ExperimentReport("wrap-constant", dims, n, seed, cells, time.perf_counter() - t0)


def fit_lazy_constant(dims: Sequence[int], means: Sequence[float], std_errors=None):
    """Least-squares ``c`` in ``mean = 1 - c / M``, with its propagated standard error.

    The intercept is pinned at 1, so one dimension gives ``c = M (1 - mean)``.
    """
    x = 1.0 / np.asarray(dims, dtype=float)
    y = 1.0 - np.asarray(means, dtype=float)
    sxx = float(x @ x)
    c = float(x @ y) / sxx
    if std_errors is None:
        return c, math.nan
    se = np.asarray(std_errors, dtype=float)
    return c, float(math.sqrt(((x / sxx) ** 2) @ (se**2)))


def run_lazy_scan(
    dims: Sequence[int] = (8, 16, 32, 64),
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    workers: int = 1,
    source: SpectraSource | None = None,
) -> ExperimentReport:
    """Lazy mean per dimension and the fitted deficit constant ``c``.

    Rows: ``lazy`` (pooled lazy mean), ``c_implied`` (``M (1 - lazy)``) per
    dimension, and one ``fit_c`` cell with column label ``fit``.
    """
    t0 = time.perf_counter()
    dims = _check_dims(dims, 2)
    _check_n(n)
    source = source or _source(workers)
    cells, means, ses = [], [], []
    for dim in dims:
        acc = StatAccumulator()
        for angles, _ in source(dim, n, seed):
            acc = acc.update(normalized_spacings(angles)[:, :-1])
        cells.append(Cell.from_acc("lazy", dim, acc))
        cells.append(
            Cell("c_implied", str(dim), dim * (1.0 - acc.mean), dim * acc.std_error, acc.count)
        )
        means.append(acc.mean)
        ses.append(acc.std_error)
    c, c_se = fit_lazy_constant(dims, means, ses)
    cells.append(Cell("fit_c", "fit", c, c_se, len(dims)))
    return ExperimentReport("lazy-scan", dims, n, seed, cells, time.perf_counter() - t0)


def run_point_bias_demo(
    dim: int = 22,
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    workers: int = 1,
    source: SpectraSource | None = None,
) -> ExperimentReport:
    """Uniform-index versus uniform-point versus fixed-point (-pi) gap selection."""
    t0 = time.perf_counter()
    (dim,) = _check_dims([dim], 2)
    _check_n(n)
    source = source or _source(workers)
    by_index, by_point, fixed = StatAccumulator(), StatAccumulator(), StatAccumulator()
    for angles, aux in source(dim, n, seed):
        s = normalized_spacings(angles)
        rows = np.arange(len(s))
        by_index = by_index.update(s[rows, random_indices(aux[:, 0], dim)])
        points = random_points(aux[:, 1])
        # row-wise searchsorted(side="right") - 1, wrap gap for points below theta_1
        hit = (angles <= points[:, None]).sum(axis=1) - 1
        hit[hit < 0] = dim - 1
        by_point = by_point.update(s[rows, hit])
        fixed = fixed.update(s[:, -1])
    cells = [
        Cell.from_acc("uniform_index", dim, by_index),
        Cell.from_acc("uniform_point", dim, by_point),
        Cell.from_acc("fixed_point", dim, fixed),
        _difference("point_minus_fixed", dim, by_point, fixed),
    ]
    return ExperimentReport("point-bias", [dim], n, seed, cells, time.perf_counter() - t0)


def histogram_z_scores(counts: np.ndarray) -> np.ndarray:
    """Per-bin z-scores against equal occupation under a binomial null."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    p = 1.0 / counts.size
    sd = math.sqrt(total * p * (1.0 - p))
    if sd == 0.0:
        return np.zeros_like(counts)
    return (counts - total * p) / sd


def angle_histogram(dim: int, n: int, bins: int, seed: int, *, corrected: bool, workers: int = 1):
    counts = np.zeros(bins, dtype=np.int64)
    for angles, _ in iter_spectra(dim, n, seed, corrected=corrected, workers=workers):
        counts += np.histogram(angles, bins=bins, range=(-np.pi, np.pi))[0]
    return counts


def _histogram_cells(prefix: str, counts: np.ndarray, dim: int) -> list[Cell]:
    total = int(counts.sum())
    p0 = 1.0 / counts.size
    se = math.sqrt(p0 * (1.0 - p0) / total)
    width = len(str(counts.size - 1))
    cells = [
        Cell(f"{prefix}:bin={k:0{width}d}", str(dim), c / total, se, int(c))
        for k, c in enumerate(counts)
    ]
    z = histogram_z_scores(counts)
    cells.append(Cell(f"{prefix}:max_abs_z", str(dim), float(np.abs(z).max()), math.nan, total))
    cells.append(Cell(f"{prefix}:min_z_bin", str(dim), float(np.argmin(z)), math.nan, total))
    return cells


def run_naive_qr_demo(
    dim: int = 14,
    n: int = DEFAULT_SAMPLES,
    bins: int = 56,
    seed: int = 0,
    *,
    workers: int = 1,
) -> ExperimentReport:
    """Eigenangle histograms over [-pi, pi) for the corrected and naive samplers.

    Bin cells hold the occupied fraction as ``mean``, the null standard
    error ``sqrt(p0 (1 - p0) / N)`` and the raw count. Summary rows
    ``<sampler>:max_abs_z`` and ``<sampler>:min_z_bin`` (bin index of the
    deepest deficit) follow each histogram. Both samplers reuse the same
    Ginibre draws.
    """
    t0 = time.perf_counter()
    (dim,) = _check_dims([dim], 1)
    _check_n(n)
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    cells = []
    for prefix, corrected in (("haar", True), ("naive", False)):
        counts = angle_histogram(dim, n, bins, seed, corrected=corrected, workers=workers)
        cells += _histogram_cells(prefix, counts, dim)
    return ExperimentReport("naive-qr", [dim], n, seed, cells, time.perf_counter() - t0)


def bin_edges(bins: int) -> np.ndarray:
    return np.linspace(-np.pi, np.pi, bins + 1)


def run_spacing_histogram(
    dim: int = 14,
    n: int = DEFAULT_SAMPLES,
    bins: int = 40,
    seed: int = 0,
    *,
    max_spacing: float = 4.0,
    workers: int = 1,
) -> ExperimentReport:
    """Pooled histogram of all ``M`` normalized spacings on ``[0, max_spacing]``.

    Spacings beyond ``max_spacing`` are counted in the last bin, so counts
    sum to ``dim * n``. ``mean`` holds the density estimate (fraction over
    bin width) and the row label carries the bin's left edge.
    """
    t0 = time.perf_counter()
    (dim,) = _check_dims([dim], 1)
    _check_n(n)
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    counts = np.zeros(bins, dtype=np.int64)
    width = max_spacing / bins
    for angles, _ in iter_spectra(dim, n, seed, workers=workers):
        s = normalized_spacings(angles).ravel()
        k = np.minimum((s / width).astype(np.intp), bins - 1)
        counts += np.bincount(k, minlength=bins)
    total = int(counts.sum())
    cells = []
    for k, c in enumerate(counts):
        p = c / total
        se = math.sqrt(p * (1.0 - p) / total) / width
        cells.append(Cell(f"s={k * width:.4g}", str(dim), p / width, se, int(c)))
    return ExperimentReport("histogram", [dim], n, seed, cells, time.perf_counter() - t0)
