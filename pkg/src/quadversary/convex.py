"""Adversary for convex integrands: maximal fooling function and volume bounds.

Against the zero integrand an algorithm commits to some sample points P.  The
largest convex [0,1]-valued function vanishing on P has, as the region above
its graph, the convex hull of P at height 0 together with the full top face
at height 1; its value at x is found by a small linear program, and its
integral (one minus that hull's volume) yields a statistical error lower
bound for the algorithm.

The closed-form side bounds the hull volume from above: every point of P is a
convex combination of at most d+1 cube vertices, each vertex's share of a low
slice of the hull sits inside a ball cap, and the cap volume is driven below
(10/11)^d by an exponential-moment (Chernoff) argument.  The net effect is a
query-count lower bound that grows like (11/10)^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from . import lp
from .core import DomainError, Point, RandomStream, uniform_blocks
from .monotone import ConvergenceError

__all__ = [
    "CERTIFICATION_LIMIT",
    "ChernoffBound",
    "CoverCheck",
    "HeightThreshold",
    "HullGeometry",
    "MaximalConvexEvaluator",
    "McEstimate",
    "SampleSet",
    "cap_volume_mc",
    "caratheodory_cube_decomposition",
    "chernoff_factor",
    "chernoff_factor_erf",
    "chernoff_factor_min",
    "complexity_lower_bound",
    "default_height_threshold",
    "elekes_ball",
    "elekes_cover_check",
    "empirical_error_lower_bound",
    "find_height_threshold",
    "hull_volume_upper_bound",
    "maximal_convex_integral",
    "maximal_convex_value",
    "vertexize",
]

# Certification threshold for the per-coordinate Chernoff factor.
CERTIFICATION_LIMIT = 10.0 / 11.0


@dataclass(frozen=True)
class SampleSet:
    """Sample points in the unit cube, stored as an (n, d) array."""

    points: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.points, dtype=float)
        if arr.size == 0:
            arr = np.zeros((0, self.dim))
        arr = np.atleast_2d(arr)
        if arr.shape[1] != self.dim:
            raise DomainError(f"points have dim {arr.shape[1]}, expected {self.dim}")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise DomainError("sample points must lie in the unit cube")
        object.__setattr__(self, "points", arr)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @staticmethod
    def empty(dim: int) -> "SampleSet":
        return SampleSet(np.zeros((0, dim)), dim)

    @staticmethod
    def from_points(points: Sequence[Point], dim: int) -> "SampleSet":
        if not points:
            return SampleSet.empty(dim)
        return SampleSet(np.array([p.coords for p in points], dtype=float), dim)


def _query_rhs(queries: np.ndarray) -> np.ndarray:
    """Right-hand sides [1; x; 1-x] for a batch of queries, one column each."""
    n_q, d = queries.shape
    rhs = np.empty((2 * d + 1, n_q))
    rhs[0] = 1.0
    rhs[1 : d + 1] = queries.T
    rhs[d + 1 :] = 1.0 - queries.T
    return rhs


def _membership_program(samples: SampleSet) -> tuple[np.ndarray, np.ndarray]:
    """Constraint matrix and objective of the hull-membership maximization.

    A combination weight vector puts mass on the sample points and the rest
    on the top face; the query point x is reachable at height 1 - sum(w) iff
    sum(w) <= 1,  X^T w <= x,  (1-X)^T w <= 1-x,  w >= 0.  Maximizing sum(w)
    therefore finds the lowest point of the hull above x.
    """
    d = samples.dim
    n = samples.n
    a = np.empty((2 * d + 1, n))
    a[0] = 1.0
    a[1 : d + 1] = samples.points.T
    a[d + 1 :] = 1.0 - samples.points.T
    return a, np.ones(n)


class MaximalConvexEvaluator:
    """Evaluates the largest [0,1]-valued convex function vanishing on P.

    The underlying LP optimum is piecewise linear in the query point, so the
    evaluator caches optimal bases: a cached basis whose basic solution stays
    feasible for a new query certifies that query's optimum without another
    solve (reduced costs do not depend on the right-hand side).  Batches of
    queries then mostly reduce to a few matrix products.
    """

    def __init__(self, samples: SampleSet):
        self.samples = samples
        self._constraints, self._objective = _membership_program(samples)
        self._bases: list[tuple[np.ndarray, np.ndarray]] = []

    def _solve_one(self, rhs: np.ndarray) -> lp.LPSolution:
        program = lp.LinearProgram(self._objective, self._constraints, rhs)
        return lp.solve(program)

    def value(self, x: np.ndarray | Point | Sequence[float]) -> float:
        arr = x.as_array() if isinstance(x, Point) else np.asarray(x, dtype=float)
        return float(self.values(arr[None, :])[0])

    def values(self, queries: np.ndarray) -> np.ndarray:
        """Evaluate an (N, d) batch of query points."""
        pts = np.atleast_2d(np.asarray(queries, dtype=float))
        if pts.shape[1] != self.samples.dim:
            raise DomainError(f"queries have dim {pts.shape[1]}, expected {self.samples.dim}")
        if pts.size and (pts.min() < -1e-12 or pts.max() > 1.0 + 1e-12):
            raise DomainError("query points must lie in the unit cube")
        n_q = pts.shape[0]
        if self.samples.n == 0:
            return np.ones(n_q)  # no mass at height 0: the hull is the top face

        rhs = _query_rhs(pts)
        best = np.empty(n_q)
        unresolved = np.ones(n_q, dtype=bool)

        def apply_basis(binv: np.ndarray, duals: np.ndarray) -> None:
            idx = np.flatnonzero(unresolved)
            if idx.size == 0:
                return
            cols = rhs[:, idx]
            feasible = (binv @ cols).min(axis=0) >= -lp.FEASIBILITY_TOL
            hit = idx[feasible]
            if hit.size:
                best[hit] = duals @ rhs[:, hit]
                unresolved[hit] = False

        for binv, duals in self._bases:
            apply_basis(binv, duals)
        while unresolved.any():
            first = int(np.flatnonzero(unresolved)[0])
            solution = self._solve_one(rhs[:, first])
            entry = (solution.basis_inverse, solution.duals)
            self._bases.append(entry)
            apply_basis(*entry)
            if unresolved[first]:  # the solving basis always covers its own query
                best[first] = solution.value
                unresolved[first] = False
        return np.clip(1.0 - best, 0.0, 1.0)


def maximal_convex_value(
    x: np.ndarray | Point | Sequence[float], samples: SampleSet
) -> float:
    """Single-query LP evaluation (no basis cache); see the evaluator class."""
    arr = x.as_array() if isinstance(x, Point) else np.asarray(x, dtype=float)
    if arr.shape != (samples.dim,):
        raise DomainError(f"query has shape {arr.shape}, expected ({samples.dim},)")
    if arr.min() < -1e-12 or arr.max() > 1.0 + 1e-12:
        raise DomainError("query point must lie in the unit cube")
    if samples.n == 0:
        return 1.0
    constraints, objective = _membership_program(samples)
    rhs = _query_rhs(arr[None, :])[:, 0]
    solution = lp.solve(lp.LinearProgram(objective, constraints, rhs))
    return float(np.clip(1.0 - solution.value, 0.0, 1.0))


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo mean with its standard error."""

    value: float
    std_error: float
    samples: int


def _mc_mean(values: np.ndarray) -> McEstimate:
    m = values.size
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return McEstimate(mean, se, m)


def maximal_convex_integral(
    samples: SampleSet, num_points: int, stream: RandomStream
) -> McEstimate:
    """Monte Carlo integral of the maximal vanishing convex function.

    One minus the returned mean estimates the hull volume.  Points are drawn
    in fixed-order labeled blocks, so the estimate does not depend on how the
    evaluation might be partitioned across workers.
    """
    if num_points < 1:
        raise DomainError("need at least one sample point")
    evaluator = MaximalConvexEvaluator(samples)
    chunks = list(uniform_blocks(stream.substream("hull-integral"), num_points, samples.dim))
    values = evaluator.values(np.concatenate(chunks, axis=0))
    return _mc_mean(values)


def empirical_error_lower_bound(
    samples: SampleSet, num_points: int, stream: RandomStream
) -> McEstimate:
    """Statistical error floor for any algorithm whose probe transcript is P.

    Half the integral estimate: the algorithm cannot distinguish the zero
    function from the maximal vanishing convex function, so it errs by at
    least half their integral difference on one of them.
    """
    est = maximal_convex_integral(samples, num_points, stream)
    return McEstimate(est.value / 2.0, est.std_error / 2.0, est.samples)


def caratheodory_cube_decomposition(
    x: np.ndarray | Point | Sequence[float],
) -> list[tuple[tuple[int, ...], float]]:
    """Write a cube point as a convex combination of at most d+1 vertices.

    Sorted-coordinate staircase: sort coordinates descending (stable, so ties
    break by coordinate index), let the k-th vertex switch on the top k
    coordinates, and take consecutive differences as weights.  Zero weights
    are dropped; the remaining weights are positive and sum to one.
    """
    arr = x.as_array() if isinstance(x, Point) else np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DomainError("expected a single point")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DomainError("point must lie in the unit cube")
    d = arr.size
    order = np.argsort(-arr, kind="stable")
    sorted_vals = arr[order]
    levels = np.concatenate(([1.0], sorted_vals, [0.0]))
    result: list[tuple[tuple[int, ...], float]] = []
    vertex = np.zeros(d, dtype=int)
    for k in range(d + 1):
        if k > 0:
            vertex[order[k - 1]] = 1
        weight = levels[k] - levels[k + 1]
        if weight > 0.0:
            result.append((tuple(int(v) for v in vertex), float(weight)))
    return result


def vertexize(samples: SampleSet) -> SampleSet:
    """Replace each sample by the cube vertices carrying it.

    The union over all samples has at most (d+1) n vertices and its hull
    contains every original sample, so the maximal vanishing convex function
    can only decrease pointwise.  Vertices are deduplicated and ordered
    lexicographically for reproducibility.
    """
    seen: set[tuple[int, ...]] = set()
    for row in samples.points:
        for vertex, _ in caratheodory_cube_decomposition(row):
            seen.add(vertex)
    if not seen:
        return SampleSet.empty(samples.dim)
    rows = sorted(seen)
    return SampleSet(np.array(rows, dtype=float), samples.dim)


def elekes_ball(vertex: np.ndarray | Sequence[float], dim: int) -> tuple[np.ndarray, float]:
    """Covering ball spanned between a cube vertex and the cube center.

    Center is the midpoint of vertex and cube center, radius half their
    distance (sqrt(d)/4), so the vertex itself lies on the boundary.
    """
    v = np.asarray(vertex, dtype=float)
    if v.shape != (dim,):
        raise DomainError(f"vertex has shape {v.shape}, expected ({dim},)")
    if not np.all((v == 0.0) | (v == 1.0)):
        raise DomainError("covering balls are defined for cube vertices only")
    center = (v + 0.5) / 2.0
    return center, math.sqrt(dim) / 4.0


@dataclass(frozen=True)
class CoverCheck:
    """Outcome of sampling hull points against the vertex ball cover."""

    ok: bool
    trials: int
    counterexample: np.ndarray | None = None


def elekes_cover_check(
    samples: SampleSet, trials: int, stream: RandomStream
) -> CoverCheck:
    """Sample convex combinations of P and test the ball-cover inclusion.

    Every point of the hull of a vertex set lies in the ball spanned between
    some vertex and the cube center; a violation (none is expected) is
    returned as a counterexample.
    """
    if samples.n == 0:
        raise DomainError("cover check needs a nonempty vertex set")
    verts = samples.points
    if not np.all((verts == 0.0) | (verts == 1.0)):
        raise DomainError("cover check applies to cube vertex sets")
    k, d = verts.shape
    centers = (verts + 0.5) / 2.0
    radius_sq = d / 16.0
    gen = stream.substream("cover-check").generator()
    done = 0
    while done < trials:
        size = min(4096, trials - done)
        weights = gen.dirichlet(np.ones(k), size=size)
        pts = weights @ verts
        dist_sq = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        inside = (dist_sq <= radius_sq + 1e-12).any(axis=1)
        if not inside.all():
            bad = int(np.flatnonzero(~inside)[0])
            return CoverCheck(False, done + bad + 1, pts[bad])
        done += size
    return CoverCheck(True, trials)


@dataclass(frozen=True)
class HullGeometry:
    """Geometry of a hull slice at height t for the closed-form bound.

    The slice apex projects to the point with every coordinate (1+t)/2; the
    cap containing one vertex's share of the slice is the cube's intersection
    with the ball of center (s, ..., s) and radius sqrt(d) s, where
    s = (1+t)/4 (so twice s is exactly (1+t)/2).
    """

    t: float
    dim: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.t <= 1.0):
            raise DomainError("slice height must be in [0, 1]")
        if self.dim < 1:
            raise DomainError("dimension must be positive")

    @property
    def s(self) -> float:
        return (1.0 + self.t) / 4.0

    @property
    def apex(self) -> np.ndarray:
        top = (1.0 + self.t) / 2.0
        return np.concatenate((np.full(self.dim, top), [self.t]))

    @property
    def cap_center(self) -> np.ndarray:
        return np.full(self.dim, self.s)

    @property
    def cap_radius(self) -> float:
        return math.sqrt(self.dim) * self.s

    def cap_contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return ((pts - self.s) ** 2).sum(axis=1) <= self.dim * self.s * self.s


def cap_volume_mc(
    t: float, dim: int, num_samples: int, stream: RandomStream
) -> McEstimate:
    """Monte Carlo volume of the cap as a probability over uniform draws."""
    if num_samples < 1:
        raise DomainError("need at least one sample")
    geometry = HullGeometry(t, dim)
    hits = np.empty(num_samples)
    done = 0
    for pts in uniform_blocks(stream.substream("cap-volume"), num_samples, dim, block=65536):
        hits[done : done + pts.shape[0]] = geometry.cap_contains(pts).astype(float)
        done += pts.shape[0]
    return _mc_mean(hits)


def chernoff_factor(s: float, alpha: float) -> float:
    """Exponential-moment integral of exp(alpha (2 s x - x^2)) over [0, 1].

    Its d-th power bounds the cap volume at the matching height.  Computed by
    adaptive quadrature to absolute tolerance 1e-10; a reported error above
    that raises :class:`ConvergenceError`.
    """
    if alpha < 0.0:
        raise DomainError("alpha must be nonnegative")
    if alpha == 0.0:
        return 1.0
    value, abserr = quad(
        lambda x: math.exp(alpha * (2.0 * s * x - x * x)),
        0.0,
        1.0,
        epsabs=1e-10,
        epsrel=1e-12,
        limit=200,
    )
    if abserr > 1e-8:
        raise ConvergenceError(
            f"quadrature error {abserr:.2e} too large at s={s}, alpha={alpha}"
        )
    return float(value)


def chernoff_factor_erf(s: float, alpha: float) -> float:
    """Closed form of :func:`chernoff_factor` via the Gaussian error function.

    Completing the square gives exp(alpha s^2) sqrt(pi/alpha) / 2 times
    erf(sqrt(alpha) (1-s)) + erf(sqrt(alpha) s); used as an independent
    cross-check of the quadrature route.
    """
    if alpha < 0.0:
        raise DomainError("alpha must be nonnegative")
    if alpha == 0.0:
        return 1.0
    root = math.sqrt(alpha)
    return (
        math.exp(alpha * s * s)
        * 0.5
        * math.sqrt(math.pi / alpha)
        * (math.erf(root * (1.0 - s)) + math.erf(root * s))
    )


@dataclass(frozen=True)
class ChernoffBound:
    """Minimized exponential-moment factor at one ball-cap scale."""

    s: float
    alpha_star: float
    g_min: float
    certified: bool

    def to_json_obj(self) -> dict:
        return {
            "s": self.s,
            "alpha_star": self.alpha_star,
            "g_min": self.g_min,
            "certified": self.certified,
        }


def _golden_section_min(fn, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section minimum of a unimodal function on [lo, hi].

    Returns the best evaluated point and value, never an interpolation, so
    the reported value is always an actually computed one.
    """
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    inv_phi_sq = inv_phi * inv_phi
    a, b = lo, hi
    h = b - a
    c = a + inv_phi_sq * h
    d = a + inv_phi * h
    yc, yd = fn(c), fn(d)
    best_x, best_y = (c, yc) if yc <= yd else (d, yd)
    while h > tol:
        h *= inv_phi
        if yc < yd:
            b, d, yd = d, c, yc
            c = a + inv_phi_sq * h
            yc = fn(c)
            if yc < best_y:
                best_x, best_y = c, yc
        else:
            a, c, yc = c, d, yd
            d = a + inv_phi * h
            yd = fn(d)
            if yd < best_y:
                best_x, best_y = d, yd
    return best_x, best_y


def chernoff_factor_min(s: float, tol: float = 1e-9) -> ChernoffBound:
    """Minimize the exponential-moment factor over positive rates.

    The factor is convex in the rate (its second derivative is an integral
    of a square), so bracket growth followed by golden section finds the
    global minimum.  For s >= 1/3 the infimum is 1, approached at rate 0.
    """
    if not (0.0 < s <= 0.5):
        raise DomainError("scale s must lie in (0, 1/2]")

    def fn(alpha: float) -> float:
        return chernoff_factor(s, alpha)

    # Grow the bracket on doubled rates until the factor turns upward; the
    # minimum then lies between the point before the last decrease and the
    # first increase.
    before_alpha = 0.0
    prev_alpha, prev_value = 0.0, 1.0  # the factor at rate 0 is exactly 1
    alpha = 1.0
    while True:
        value = fn(alpha)
        if value > prev_value:
            lo, hi = before_alpha, alpha
            break
        before_alpha = prev_alpha
        prev_alpha, prev_value = alpha, value
        alpha *= 2.0
        if alpha > 2.0**40:
            raise ConvergenceError(f"no bracket for the factor minimum at s={s}")
    alpha_star, g_min = _golden_section_min(fn, lo, hi, tol)
    if prev_value < g_min and prev_alpha > 0.0:
        alpha_star, g_min = prev_alpha, prev_value
    if g_min > 1.0:
        # rate 0 gives exactly 1; never report worse than the trivial factor
        alpha_star, g_min = min(alpha_star, tol), 1.0
    return ChernoffBound(s=s, alpha_star=alpha_star, g_min=g_min, certified=g_min < CERTIFICATION_LIMIT)


@dataclass(frozen=True)
class HeightThreshold:
    """Largest certified slice height and the accuracy threshold it induces."""

    t0: float
    eps0: float
    bound_at_t0: ChernoffBound

    def to_json_obj(self) -> dict:
        obj = self.bound_at_t0.to_json_obj()
        obj.update({"t0": self.t0, "eps0": self.eps0})
        return obj


def find_height_threshold(
    grid_step: float = 1e-3, refine_tol: float = 1e-6
) -> HeightThreshold:
    """Find the largest height below which the Chernoff factor certifies.

    Scans heights upward on a dense grid (certification must hold at every
    grid point up to the result), then bisects the first failing interval.
    The accuracy threshold is exactly half the height.  Certification failing
    already at height zero would contradict the closed-form argument and
    raises an error.
    """

    def certified(t: float) -> bool:
        return chernoff_factor_min((1.0 + t) / 4.0).certified

    if not certified(0.0):
        raise ConvergenceError("certification fails at height zero; inconsistent setup")
    steps = int(round(1.0 / grid_step))
    t_ok, t_bad = 0.0, None
    for k in range(1, steps + 1):
        t = k * grid_step
        if certified(t):
            t_ok = t
        else:
            t_bad = t
            break
    if t_bad is None:
        raise ConvergenceError("certification never fails on (0, 1]; inconsistent setup")
    while t_bad - t_ok > refine_tol:
        mid = 0.5 * (t_ok + t_bad)
        if certified(mid):
            t_ok = mid
        else:
            t_bad = mid
    t0 = t_ok
    return HeightThreshold(t0=t0, eps0=t0 / 2.0, bound_at_t0=chernoff_factor_min((1.0 + t0) / 4.0))


@lru_cache(maxsize=1)
def default_height_threshold() -> HeightThreshold:
    """Cached default-parameter height threshold (a few seconds to compute)."""
    return find_height_threshold()


def hull_volume_upper_bound(n: int, dim: int, t0: float) -> float:
    """Closed-form cap on the hull volume for any n-point sample set.

    (1 - t0) + (d+1) n t0 (10/11)^d, clipped to 1; vacuous at small d but
    eventually far below 1 as the dimension grows.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    if dim < 1:
        raise DomainError("dimension must be positive")
    if not (0.0 < t0 < 1.0):
        raise DomainError("t0 must lie in (0, 1)")
    bound = (1.0 - t0) + (dim + 1) * n * t0 * CERTIFICATION_LIMIT**dim
    return min(1.0, bound)


def complexity_lower_bound(eps: float, dim: int, eps0: float) -> int:
    """Minimal query count forced on any algorithm with error <= eps.

    Evaluates ceil((11/10)^d (1 - eps/eps0) / (d+1)) in exact rational
    arithmetic; accuracies at or above the threshold eps0 cost nothing.
    """
    if dim < 1:
        raise DomainError("dimension must be positive")
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    if not (0.0 < eps0 < 0.5):
        raise DomainError("eps0 must lie in (0, 1/2)")
    if eps >= eps0:
        return 0
    bound = (
        (Fraction(11, 10) ** dim)
        * (1 - Fraction(eps) / Fraction(eps0))
        / (dim + 1)
    )
    return max(0, math.ceil(bound))
