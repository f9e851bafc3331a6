"""Shared problem setup: points, oracles, transcripts, and algorithm runs.

Integrands are [0, 1]-valued functions on the closed unit cube [0, 1]^d.  An
algorithm may query finitely many function values, each query point possibly
depending on the values seen so far, and must then commit to a single output.
Everything downstream (adversaries, bound calculators, baselines) works with
the transcript of (point, value) records produced by :func:`run_algorithm`.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence, runtime_checkable

import numpy as np

__all__ = [
    "BudgetExceededError",
    "DomainError",
    "EvalOracle",
    "Point",
    "Transcript",
    "AdaptiveCubature",
    "RandomStream",
    "initial_error",
    "run_algorithm",
]

CLASS_TAGS = ("monotone", "convex", "unrestricted")


class DomainError(ValueError):
    """A point, value, or parameter left its allowed domain."""


class BudgetExceededError(RuntimeError):
    """An algorithm attempted a query beyond its information budget."""


@dataclass(frozen=True)
class Point:
    """A location in the closed unit cube [0, 1]^d.

    Coordinates are validated on construction; out-of-range values raise
    :class:`DomainError` rather than being clamped, since silent clamping
    would corrupt the adversary geometry downstream.
    """

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        coords = tuple(float(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if not coords:
            raise DomainError("a point needs at least one coordinate")
        for c in coords:
            if not (0.0 <= c <= 1.0):
                raise DomainError(f"coordinate {c!r} outside [0, 1]")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    @staticmethod
    def from_array(arr: Sequence[float]) -> "Point":
        return Point(tuple(float(c) for c in arr))


@dataclass(frozen=True)
class EvalOracle:
    """Function-value access to one integrand f: [0,1]^d -> [0,1].

    ``fn`` evaluates a single coordinate vector; ``batch_fn``, when given,
    evaluates an (N, d) array in one call and must agree with ``fn``.
    Values outside [0, 1] raise :class:`DomainError`.
    """

    dim: int
    fn: Callable[[np.ndarray], float]
    class_tag: str = "unrestricted"
    batch_fn: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DomainError("oracle dimension must be positive")
        if self.class_tag not in CLASS_TAGS:
            raise DomainError(f"unknown class tag {self.class_tag!r}")

    def evaluate(self, point: Point) -> float:
        if point.dim != self.dim:
            raise DomainError(f"point has dim {point.dim}, oracle expects {self.dim}")
        value = float(self.fn(point.as_array()))
        if not (0.0 <= value <= 1.0):
            raise DomainError(f"oracle value {value!r} outside [0, 1]")
        return value

    def evaluate_array(self, points: np.ndarray) -> np.ndarray:
        """Evaluate many points given as an (N, d) array."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DomainError(f"expected an (N, {self.dim}) array, got shape {pts.shape}")
        if self.batch_fn is not None:
            values = np.asarray(self.batch_fn(pts), dtype=float)
        else:
            values = np.array([float(self.fn(p)) for p in pts])
        if values.shape != (pts.shape[0],):
            raise DomainError("batch evaluation returned a wrong shape")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise DomainError("oracle returned values outside [0, 1]")
        return values


@dataclass(frozen=True)
class Transcript:
    """Ordered record of queries and the values the oracle returned."""

    records: tuple[tuple[Point, float], ...] = ()

    @property
    def n(self) -> int:
        return len(self.records)

    def points(self) -> list[Point]:
        return [p for p, _ in self.records]

    def values(self) -> list[float]:
        return [v for _, v in self.records]

    def points_array(self) -> np.ndarray:
        """Queried points as an (n, d) array; shape (0, 0) when empty."""
        if not self.records:
            return np.zeros((0, 0))
        return np.array([p.coords for p, _ in self.records], dtype=float)

    def with_record(self, point: Point, value: float) -> "Transcript":
        return Transcript(self.records + ((point, float(value)),))

    def to_json_obj(self) -> list[dict]:
        return [{"point": list(p.coords), "value": v} for p, v in self.records]

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @staticmethod
    def from_json(text: str) -> "Transcript":
        records = tuple(
            (Point(tuple(item["point"])), float(item["value"]))
            for item in json.loads(text)
        )
        return Transcript(records)


@runtime_checkable
class AdaptiveCubature(Protocol):
    """Interface every registered cubature algorithm implements.

    ``next_query`` maps the transcript so far to the next sample point, or
    ``None`` to stop querying; it must be deterministic given the algorithm's
    own configuration (including any seed).  ``finalize`` maps the complete
    transcript to the output value.
    """

    dim: int

    def next_query(self, transcript: Transcript) -> Point | None: ...

    def finalize(self, transcript: Transcript) -> float: ...


def run_algorithm(
    alg: AdaptiveCubature, oracle: EvalOracle, budget: int
) -> tuple[Transcript, float]:
    """Drive one algorithm run against one oracle under a query budget.

    Returns the full transcript and the algorithm's output.  Requesting a
    query once ``budget`` records exist raises :class:`BudgetExceededError`
    (an error, not a truncation, so the reported n stays well defined).
    Repeated queries at the same point are allowed and each one counts.
    """
    if budget < 0:
        raise DomainError("budget must be nonnegative")
    if alg.dim != oracle.dim:
        raise DomainError(f"algorithm dim {alg.dim} does not match oracle dim {oracle.dim}")
    transcript = Transcript()
    while True:
        query = alg.next_query(transcript)
        if query is None:
            break
        if transcript.n >= budget:
            raise BudgetExceededError(
                f"algorithm requested query {transcript.n + 1} with budget {budget}"
            )
        if query.dim != oracle.dim:
            raise DomainError(f"query dim {query.dim} does not match oracle dim {oracle.dim}")
        value = oracle.evaluate(query)
        transcript = transcript.with_record(query, value)
    return transcript, float(alg.finalize(transcript))


def initial_error() -> float:
    """Worst-case error of the best zero-query algorithm (the constant 1/2).

    The same value holds for the monotone and the convex class in every
    dimension, which is what makes absolute error the right scale.
    """
    return 0.5


def _label_word(label: int | str) -> int:
    if isinstance(label, str):
        return zlib.crc32(label.encode("utf-8"))
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
        if label < 0:
            raise DomainError("stream labels must be nonnegative")
        return int(label)
    raise DomainError(f"stream label must be int or str, got {type(label).__name__}")


@dataclass(frozen=True)
class RandomStream:
    """Seeded, hierarchical source of random generators.

    Identical seeds yield identical draws, and substreams derived from
    distinct labels are independent by construction (seed-sequence spawning),
    so parallel consumers can each take a labeled substream and the combined
    result stays reproducible for any worker count.
    """

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not (0 <= int(self.seed) < 2**64):
            raise DomainError("seed must be a 64-bit nonnegative integer")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "path", tuple(int(w) for w in self.path))

    def substream(self, *labels: int | str) -> "RandomStream":
        return RandomStream(self.seed, self.path + tuple(_label_word(l) for l in labels))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))


def block_sizes(total: int, block: int) -> list[int]:
    """Split ``total`` into fixed-order blocks of at most ``block`` samples."""
    if total < 0:
        raise DomainError("sample count must be nonnegative")
    if block < 1:
        raise DomainError("block size must be positive")
    full, rest = divmod(total, block)
    return [block] * full + ([rest] if rest else [])


def uniform_blocks(
    stream: RandomStream, total: int, dim: int, block: int = 8192
) -> Iterable[np.ndarray]:
    """Yield uniform sample blocks, one labeled substream per block.

    The block layout depends only on ``total`` and ``block``, never on who
    consumes the blocks, which keeps Monte Carlo estimates identical across
    worker counts.
    """
    for i, size in enumerate(block_sizes(total, block)):
        gen = stream.substream("block", i).generator()
        yield gen.random((size, dim))
