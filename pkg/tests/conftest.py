"""Shared brute-force oracles used to derive expected values independently."""

from __future__ import annotations

import numpy as np


def grid_union_volume(corners: np.ndarray, mode: str, cells_per_axis: int) -> float:
    """Union volume of anchored boxes by counting cell centers on a grid.

    Exact whenever every corner coordinate is a multiple of the cell width,
    since then no cell straddles a box face.
    """
    corners = np.atleast_2d(np.asarray(corners, dtype=float))
    k, d = corners.shape
    m = cells_per_axis
    axes = [(np.arange(m) + 0.5) / m] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1).reshape(-1, d)
    hits = 0
    for start in range(0, pts.shape[0], 500_000):
        chunk = pts[start : start + 500_000]
        if mode == "lower":
            member = (chunk[:, None, :] <= corners[None, :, :]).all(axis=2).any(axis=1)
        else:
            member = (chunk[:, None, :] >= corners[None, :, :]).all(axis=2).any(axis=1)
        hits += int(member.sum())
    return hits / pts.shape[0]


def maximal_convex_1d(xs: np.ndarray, sample_points: np.ndarray) -> np.ndarray:
    """Largest convex [0,1] function vanishing on 1-D sample points.

    Piecewise linear: zero between the extreme samples, rising linearly to 1
    at whichever cube endpoints carry no sample.
    """
    xs = np.asarray(xs, dtype=float)
    pts = np.asarray(sample_points, dtype=float).ravel()
    if pts.size == 0:
        return np.ones_like(xs)
    lo, hi = pts.min(), pts.max()
    out = np.zeros_like(xs)
    if lo > 0.0:
        out = np.maximum(out, (lo - xs) / lo)
    if hi < 1.0:
        out = np.maximum(out, (xs - hi) / (1.0 - hi))
    return np.clip(out, 0.0, 1.0)
