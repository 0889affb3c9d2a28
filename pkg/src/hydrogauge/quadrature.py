"""Quadrature rules: composite Gauss-Legendre panels and composite Simpson."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights mapped to [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss_legendre(boundaries, nodes_per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate an n-point rule over every panel [boundaries[k], boundaries[k+1]]."""
    xs, ws = [], []
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        x, w = gauss_legendre(nodes_per_panel, a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def geometric_boundaries(r_max: float, n_panels: int, first: float) -> np.ndarray:
    """Panel edges 0 = b_0 < b_1 = first < ... < b_P = r_max with a constant width ratio."""
    if n_panels == 1:
        return np.array([0.0, r_max])
    first = min(first, r_max / n_panels)
    # Solve first * (g^P - 1) / (g - 1) = r_max for the ratio g >= 1.
    lo, hi = 1.0, 2.0
    while first * (hi**n_panels - 1.0) / (hi - 1.0) < r_max:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == 1.0 or first * (mid**n_panels - 1.0) / (mid - 1.0) < r_max:
            lo = mid
        else:
            hi = mid
    g = 0.5 * (lo + hi)
    widths = first * g ** np.arange(n_panels)
    edges = np.concatenate([[0.0], np.cumsum(widths)])
    edges[-1] = r_max
    return edges


def simpson_weights(n_intervals: int, h: float) -> np.ndarray:
    """Composite Simpson weights for an even number of equal intervals."""
    if n_intervals < 2 or n_intervals % 2:
        raise ValueError("Simpson needs an even number of intervals >= 2")
    w = np.empty(n_intervals + 1)
    w[0] = w[-1] = 1.0
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def segmented_grid(edges, max_step: float, even: bool = True) -> tuple[np.ndarray, list[slice]]:
    """Uniform sub-grids on each [edges[k], edges[k+1]] with spacing <= max_step.

    Returns the concatenated nodes (shared edges appear once) and one slice per
    segment into that array.
    """
    edges = np.asarray(edges, dtype=float)
    nodes = [edges[:1]]
    slices = []
    start = 0
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(1, int(np.ceil((b - a) / max_step - 1e-9)))
        if even and n % 2:
            n += 1
        seg = np.linspace(a, b, n + 1)
        nodes.append(seg[1:])
        slices.append(slice(start, start + n + 1))
        start += n
    return np.concatenate(nodes), slices


def composite_simpson(values: np.ndarray, grid: np.ndarray, slices: list[slice]) -> complex:
    """Integrate samples on a segmented grid, Simpson within each segment."""
    total = 0.0
    for sl in slices:
        seg = grid[sl]
        n = len(seg) - 1
        h = (seg[-1] - seg[0]) / n
        total = total + simpson_weights(n, h) @ values[sl]
    return total
