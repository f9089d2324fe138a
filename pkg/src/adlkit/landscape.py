"""Synthetic loss landscapes on a square grid.

A HeightField holds n x n samples of a scalar field over the square
[0, extent]^2; grid spacing is extent / (n - 1). Generators produce fractal
terrain (midpoint displacement), a convex paraboloid control, and a
shuffled-then-smoothed control that destroys long-range structure while
keeping the value distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ArgumentError, BoundaryError, DataError, OutOfBoundsError

__all__ = [
    "HeightField",
    "Minimum",
    "BoxCountResult",
    "generate_fractal_terrain",
    "make_convex_paraboloid",
    "shuffle_and_smooth",
    "eval_loss",
    "numerical_gradient",
    "detect_minima",
    "box_counting_dimension",
    "binarize",
    "level_contour",
    "default_scales",
]


@dataclass(frozen=True)
class HeightField:
    """n x n field samples over [0, extent]^2; values[i, j] sits at
    (x, y) = (i * spacing, j * spacing)."""

    values: np.ndarray
    extent: float = 1.0
    kind: str = "external"
    seed: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ArgumentError(f"field values must be square, got shape {v.shape}")
        if v.shape[0] < 3:
            raise ArgumentError(f"field needs n >= 3, got n={v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise ArgumentError("field values must be finite")
        if not (self.extent > 0):
            raise ArgumentError(f"extent must be positive, got {self.extent}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return self.extent / (self.n - 1)


@dataclass(frozen=True)
class Minimum:
    """A strict local minimum: position in landscape units, its value, and
    the radius of the largest disc that stays below value + 10% of the
    field's range."""

    position: tuple[float, float]
    value: float
    width_estimate: float


@dataclass(frozen=True)
class BoxCountResult:
    dimension: float
    fit_rmse: float
    scales: tuple[int, ...]
    counts: tuple[int, ...]


def generate_fractal_terrain(n: int, roughness: float, seed: int) -> HeightField:
    """Midpoint-displacement (diamond-square) terrain, normalized to [0, 1].

    n must be 2^k + 1. Per-level displacement amplitude is 2^(-roughness *
    level), level 0 at the coarsest subdivision, so smaller roughness
    values decay slower and give rougher fields. Bit-reproducible for a
    given (n, roughness, seed).
    """
    k = (n - 1).bit_length() - 1
    if n < 5 or (1 << k) + 1 != n:
        raise ArgumentError(f"n must be 2^k + 1 with k >= 2, got {n}")
    if not (0.0 < roughness < 1.0):
        raise ArgumentError(f"roughness must lie in (0, 1), got {roughness}")

    rng = np.random.default_rng(seed)
    g = np.zeros((n, n))
    g[0, 0], g[0, -1], g[-1, 0], g[-1, -1] = rng.uniform(-1.0, 1.0, 4)

    step = n - 1
    level = 0
    while step > 1:
        half = step // 2
        amp = 2.0 ** (-roughness * level)

        # diamond step: square centers from their four corners
        tl = g[0:-1:step, 0:-1:step]
        tr = g[0:-1:step, step::step]
        bl = g[step::step, 0:-1:step]
        br = g[step::step, step::step]
        centers = 0.25 * (tl + tr + bl + br)
        g[half::step, half::step] = centers + amp * rng.uniform(-1.0, 1.0, centers.shape)

        # square step: edge midpoints from their in-bounds half-step neighbors
        for rows, cols in (
            (np.arange(half, n, step), np.arange(0, n, step)),
            (np.arange(0, n, step), np.arange(half, n, step)),
        ):
            ii, jj = np.meshgrid(rows, cols, indexing="ij")
            acc = np.zeros(ii.shape)
            cnt = np.zeros(ii.shape)
            for di, dj in ((-half, 0), (half, 0), (0, -half), (0, half)):
                ni = ii + di
                nj = jj + dj
                ok = (ni >= 0) & (ni < n) & (nj >= 0) & (nj < n)
                acc[ok] += g[ni[ok], nj[ok]]
                cnt[ok] += 1
            g[ii, jj] = acc / cnt + amp * rng.uniform(-1.0, 1.0, ii.shape)

        step = half
        level += 1

    lo, hi = g.min(), g.max()
    if hi > lo:
        g = (g - lo) / (hi - lo)
    else:
        g = np.zeros_like(g)
    return HeightField(values=g, extent=1.0, kind="fractal", seed=seed)


def make_convex_paraboloid(n: int, curvature: float = 1.0) -> HeightField:
    """Paraboloid curvature * ((x - c)^2 + (y - c)^2) about the extent
    center, minimum value 0."""
    if n < 3:
        raise ArgumentError(f"n must be >= 3, got {n}")
    if not (curvature > 0):
        raise ArgumentError(f"curvature must be positive, got {curvature}")
    coords = np.linspace(0.0, 1.0, n)
    dx2 = (coords - 0.5) ** 2
    vals = curvature * (dx2[:, None] + dx2[None, :])
    return HeightField(values=vals, extent=1.0, kind="convex", seed=0)


def shuffle_and_smooth(field: HeightField, kernel_sigma: float = 8.0, seed: int = 0) -> HeightField:
    """Destroy spatial structure: permute all cells (seeded), then smooth
    with a truncated Gaussian kernel (sigma in cells, truncation 4 sigma).

    Border mass is folded back by reflection rather than wrapped, which
    keeps constants fixed and conserves the mean to float roundoff.
    """
    if not (kernel_sigma > 0):
        raise ArgumentError(f"kernel_sigma must be positive, got {kernel_sigma}")
    rng = np.random.default_rng(seed)
    flat = rng.permutation(field.values.ravel())
    shuffled = flat.reshape(field.values.shape)
    smooth = ndimage.gaussian_filter(shuffled, sigma=kernel_sigma, mode="reflect", truncate=4.0)
    return HeightField(values=smooth, extent=field.extent, kind="shuffled_smoothed", seed=seed)


def _locate(field: HeightField, pos) -> tuple[float, float]:
    x, y = float(pos[0]), float(pos[1])
    if not (0.0 <= x <= field.extent and 0.0 <= y <= field.extent):
        raise OutOfBoundsError(
            f"position ({x}, {y}) outside [0, {field.extent}]^2"
        )
    return x, y


def eval_loss(field: HeightField, pos) -> float:
    """Bilinear interpolation of the field at pos = (x, y)."""
    x, y = _locate(field, pos)
    h = field.spacing
    n = field.n
    i = min(int(x / h), n - 2)
    j = min(int(y / h), n - 2)
    fx = x / h - i
    fy = y / h - j
    v = field.values
    return float(
        v[i, j] * (1 - fx) * (1 - fy)
        + v[i + 1, j] * fx * (1 - fy)
        + v[i, j + 1] * (1 - fx) * fy
        + v[i + 1, j + 1] * fx * fy
    )


def numerical_gradient(field: HeightField, pos) -> np.ndarray:
    """Central-difference gradient with step = one cell spacing.

    Exact for fields linear in x and y. Positions closer than one cell to
    the boundary raise BoundaryError.
    """
    x, y = _locate(field, pos)
    h = field.spacing
    if not (h <= x <= field.extent - h and h <= y <= field.extent - h):
        raise BoundaryError(
            f"position ({x}, {y}) is within one cell of the boundary; "
            f"the central-difference stencil needs a margin of {h}"
        )
    gx = (eval_loss(field, (x + h, y)) - eval_loss(field, (x - h, y))) / (2 * h)
    gy = (eval_loss(field, (x, y + h)) - eval_loss(field, (x, y - h))) / (2 * h)
    return np.array([gx, gy])


def detect_minima(field: HeightField) -> list[Minimum]:
    """Strict local minima over the 8-neighborhood (interior cells only),
    sorted ascending by value.

    width_estimate is the largest disc radius around the minimum within
    which every grid cell stays below value + 10% of the field's range.
    """
    v = field.values
    n = field.n
    c = v[1:-1, 1:-1]
    strict = np.ones(c.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            strict &= c < v[1 + di : n - 1 + di, 1 + dj : n - 1 + dj]
    ii, jj = np.nonzero(strict)
    ii = ii + 1
    jj = jj + 1

    h = field.spacing
    vrange = float(v.max() - v.min())
    gi, gj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    minima = []
    for i, j in zip(ii.tolist(), jj.tolist()):
        value = float(v[i, j])
        thresh = value + 0.1 * vrange
        dist = h * np.hypot(gi - i, gj - j)
        above = v >= thresh
        if above.any():
            width = float(dist[above].min())
        else:
            width = float(dist.max())
        if width <= 0:
            # threshold equal to the minimum value (flat field); no disc
            continue
        minima.append(Minimum(position=(i * h, j * h), value=value, width_estimate=width))
    minima.sort(key=lambda m: m.value)
    return minima


def default_scales(n: int) -> tuple[int, ...]:
    """Powers of two from 1 up to n // 4 (at least four scales)."""
    scales = []
    s = 1
    while s <= max(8, n // 4):
        scales.append(s)
        s *= 2
    return tuple(scales)


def box_counting_dimension(mask: np.ndarray, scales) -> BoxCountResult:
    """Box-counting dimension of a binary raster.

    Counts occupied s x s boxes anchored at the origin for each scale s
    (partial boxes at the far edges count), then least-squares fits
    log10 N(s) = -D log10 s + c. fit_rmse is in log10 units.
    """
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ArgumentError(f"mask must be 2-D, got ndim={m.ndim}")
    m = m.astype(bool)
    if not m.any():
        raise DataError("mask is empty; box counting is undefined")
    scales = [int(s) for s in scales]
    if len(scales) < 4:
        raise ArgumentError(f"need at least 4 scales, got {len(scales)}")
    if any(s < 1 or s > min(m.shape) for s in scales):
        raise ArgumentError(f"scales must lie in [1, {min(m.shape)}], got {scales}")
    if len(set(scales)) != len(scales):
        raise ArgumentError("scales must be distinct")

    counts = []
    for s in scales:
        nb_i = -(-m.shape[0] // s)
        nb_j = -(-m.shape[1] // s)
        padded = np.zeros((nb_i * s, nb_j * s), dtype=bool)
        padded[: m.shape[0], : m.shape[1]] = m
        boxes = padded.reshape(nb_i, s, nb_j, s).any(axis=(1, 3))
        counts.append(int(boxes.sum()))

    lx = np.log10(np.asarray(scales, dtype=float))
    ly = np.log10(np.asarray(counts, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    rmse = float(np.sqrt(np.mean(resid**2)))
    return BoxCountResult(
        dimension=float(-slope),
        fit_rmse=rmse,
        scales=tuple(scales),
        counts=tuple(counts),
    )


def binarize(field: HeightField, level: float | None = None) -> np.ndarray:
    """Super-level-set mask: cells with value >= level (default: median)."""
    if level is None:
        level = float(np.median(field.values))
    return field.values >= level


def level_contour(field: HeightField, level: float | None = None) -> np.ndarray:
    """Boundary cells of the super-level set: in-set cells with a 4-neighbor
    outside the set."""
    mask = binarize(field, level)
    eroded = ndimage.binary_erosion(
        mask, structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]]), border_value=1
    )
    return mask & ~eroded


