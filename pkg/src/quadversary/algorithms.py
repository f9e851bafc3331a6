"""Built-in integrands and cubature algorithms for the harness and tests.

Oracles come with their true integrals where known (step at half-sum: 1/2 by
the x -> 1-x symmetry; coordinate product: 2^-d; coordinate mean: 1/2; mean
of squares: 1/3).  Algorithms implement the adaptive-cubature interface and
derive any randomness from labeled substreams of one seed, so a rerun with
the same seed replays the identical transcript.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, EvalOracle, Point, RandomStream, Transcript
from .monotone import threshold_values

__all__ = [
    "ALGORITHM_IDS",
    "ORACLE_IDS",
    "ConstantHalf",
    "GridScanSampler",
    "UniformRandomSampler",
    "VertexScanSampler",
    "make_algorithm",
    "make_oracle",
    "true_integral",
    "zero_oracle",
]


def threshold_oracle(dim: int) -> EvalOracle:
    return EvalOracle(
        dim=dim,
        fn=lambda x: float(x.sum() >= dim / 2.0),
        class_tag="monotone",
        batch_fn=lambda pts: threshold_values(pts).astype(float),
        name="threshold",
    )


def product_oracle(dim: int) -> EvalOracle:
    return EvalOracle(
        dim=dim,
        fn=lambda x: float(np.prod(x)),
        class_tag="monotone",
        batch_fn=lambda pts: np.prod(pts, axis=1),
        name="product",
    )


def affine_oracle(dim: int) -> EvalOracle:
    # The coordinate mean is linear, hence both monotone and convex.
    return EvalOracle(
        dim=dim,
        fn=lambda x: float(x.mean()),
        class_tag="convex",
        batch_fn=lambda pts: pts.mean(axis=1),
        name="affine",
    )


def square_oracle(dim: int) -> EvalOracle:
    return EvalOracle(
        dim=dim,
        fn=lambda x: float((x * x).mean()),
        class_tag="convex",
        batch_fn=lambda pts: (pts * pts).mean(axis=1),
        name="square",
    )


def zero_oracle(dim: int) -> EvalOracle:
    """The probe integrand for the convex adversary."""
    return EvalOracle(
        dim=dim,
        fn=lambda x: 0.0,
        class_tag="convex",
        batch_fn=lambda pts: np.zeros(pts.shape[0]),
        name="zero",
    )


_ORACLES = {
    "threshold": threshold_oracle,
    "product": product_oracle,
    "affine": affine_oracle,
    "square": square_oracle,
}
ORACLE_IDS = tuple(sorted(_ORACLES))

_TRUE_INTEGRALS = {
    "threshold": lambda d: 0.5,
    "product": lambda d: 2.0 ** (-d),
    "affine": lambda d: 0.5,
    "square": lambda d: 1.0 / 3.0,
}


def make_oracle(oracle_id: str, dim: int) -> EvalOracle:
    if oracle_id not in _ORACLES:
        raise DomainError(f"unknown oracle {oracle_id!r}; choose from {ORACLE_IDS}")
    return _ORACLES[oracle_id](dim)


def true_integral(oracle_id: str, dim: int) -> float | None:
    fn = _TRUE_INTEGRALS.get(oracle_id)
    return None if fn is None else fn(dim)


def _mean_or_half(transcript: Transcript) -> float:
    values = transcript.values()
    return float(np.mean(values)) if values else 0.5


@dataclass(frozen=True)
class ConstantHalf:
    """Zero-query algorithm; outputs the optimal constant 1/2."""

    dim: int

    def next_query(self, transcript: Transcript) -> Point | None:
        return None

    def finalize(self, transcript: Transcript) -> float:
        return 0.5


@dataclass(frozen=True)
class UniformRandomSampler:
    """Samples budget-many seeded uniform points and outputs their mean.

    The j-th query depends only on the seed and j, never on run state, so
    replaying a run reproduces the transcript bitwise.
    """

    dim: int
    budget: int
    stream: RandomStream

    def next_query(self, transcript: Transcript) -> Point | None:
        if transcript.n >= self.budget:
            return None
        gen = self.stream.substream("query", transcript.n).generator()
        return Point.from_array(gen.random(self.dim))

    def finalize(self, transcript: Transcript) -> float:
        return _mean_or_half(transcript)


def _lattice_points(dim: int, budget: int) -> tuple[tuple[float, ...], ...]:
    if budget == 0:
        return ()
    m = max(1, math.ceil(budget ** (1.0 / dim)))
    while m**dim < budget:
        m += 1
    centers = [(i + 0.5) / m for i in range(m)]
    product = itertools.product(centers, repeat=dim)
    return tuple(itertools.islice(product, budget))


@dataclass(frozen=True)
class GridScanSampler:
    """Queries the first budget-many cell centers of a uniform lattice."""

    dim: int
    budget: int

    def next_query(self, transcript: Transcript) -> Point | None:
        points = _lattice_points(self.dim, self.budget)
        if transcript.n >= len(points):
            return None
        return Point(points[transcript.n])

    def finalize(self, transcript: Transcript) -> float:
        return _mean_or_half(transcript)


@dataclass(frozen=True)
class VertexScanSampler:
    """Queries cube vertices in lexicographic order up to the budget."""

    dim: int
    budget: int

    def next_query(self, transcript: Transcript) -> Point | None:
        if transcript.n >= min(self.budget, 2**self.dim):
            return None
        bits = format(transcript.n, f"0{self.dim}b")
        return Point(tuple(float(b) for b in bits))

    def finalize(self, transcript: Transcript) -> float:
        return _mean_or_half(transcript)


ALGORITHM_IDS = ("constant-half", "uniform-random", "grid-scan", "vertex-scan")


def make_algorithm(algorithm_id: str, dim: int, budget: int, stream: RandomStream):
    if algorithm_id == "constant-half":
        return ConstantHalf(dim)
    if algorithm_id == "uniform-random":
        return UniformRandomSampler(dim, budget, stream.substream("uniform-random"))
    if algorithm_id == "grid-scan":
        return GridScanSampler(dim, budget)
    if algorithm_id == "vertex-scan":
        return VertexScanSampler(dim, budget)
    raise DomainError(f"unknown algorithm {algorithm_id!r}; choose from {ALGORITHM_IDS}")
