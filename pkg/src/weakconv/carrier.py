"""Compact carrier spaces at desk scale.

Two kinds of carrier are supported: a finite metric space given by an
explicit distance matrix, and the unit cube [0, 1]^d with the Euclidean
metric.  Both are compact, which is what the downstream convergence and
tightness machinery relies on.

Points are plain values: an ``int`` index into a finite carrier, or a
tuple of floats for a cube carrier.  Bulk operations accept numpy arrays
(shape ``(n,)`` of indices, or ``(n, d)`` of coordinates) so that test
functions can be evaluated vectorised.

Measurable sets are finite unions of cells.  The cell vocabulary is:
axis-aligned boxes, half-open on each axis except that the outermost
upper face of the cube is closed (so the cells of a grid tile the whole
cube exactly once); subsets of a finite carrier; and closed metric balls,
which are what tightness witnesses return.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import CapacityError, DomainError, UnsupportedError

Point = Union[int, tuple]

MAX_FINITE_POINTS = 64
MAX_CUBE_DIM = 8

# Exhaustive triangle checks are only feasible on small finite carriers.
_TRIPLE_SAMPLES = 10_000


# ---------------------------------------------------------------------------
# carrier spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CompactSpace:
    """A finite metric space or the unit cube with the Euclidean metric."""

    kind: str  # "finite" | "cube"
    dim: int = 0
    labels: tuple = ()
    dist_matrix: np.ndarray | None = field(default=None, repr=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompactSpace):
            return NotImplemented
        if self.kind != other.kind:
            return False
        if self.kind == "cube":
            return self.dim == other.dim
        return (self.labels == other.labels
                and np.array_equal(self.dist_matrix, other.dist_matrix))

    @property
    def n_points(self) -> int:
        if self.kind != "finite":
            raise UnsupportedError("n_points is only defined for finite carriers")
        return len(self.labels)

    def contains(self, point: Point) -> bool:
        if self.kind == "finite":
            return isinstance(point, (int, np.integer)) and 0 <= point < self.n_points
        coords = np.asarray(point, dtype=float)
        if coords.shape != (self.dim,):
            return False
        return bool(np.all(coords >= 0.0) and np.all(coords <= 1.0))

    def distance(self, a: Point, b: Point) -> float:
        if self.kind == "finite":
            return float(self.dist_matrix[int(a), int(b)])
        pa = np.asarray(a, dtype=float)
        pb = np.asarray(b, dtype=float)
        return float(np.linalg.norm(pa - pb))

    def diameter(self) -> float:
        if self.kind == "finite":
            return float(self.dist_matrix.max())
        return math.sqrt(self.dim)

    # -- bulk helpers -------------------------------------------------------

    def points_array(self, points: Sequence[Point]) -> np.ndarray:
        """Stack points into the array layout used by vectorised evaluators."""
        if self.kind == "finite":
            arr = np.asarray(points, dtype=int)
            if arr.ndim != 1:
                raise DomainError("finite-carrier points must be scalar indices")
            return arr
        arr = np.asarray(points, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise DomainError(f"expected points of dimension {self.dim}")
        return arr

    def point_at(self, row) -> Point:
        if self.kind == "finite":
            return int(row)
        return tuple(float(x) for x in np.atleast_1d(row))

    def dist_to(self, pts: np.ndarray, anchor: Point) -> np.ndarray:
        """Distances from each row of ``pts`` to a fixed anchor point."""
        if self.kind == "finite":
            return self.dist_matrix[np.asarray(pts, dtype=int), int(anchor)]
        diff = np.asarray(pts, dtype=float) - np.asarray(anchor, dtype=float)
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def sample_points(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "finite":
            return rng.integers(0, self.n_points, size=n)
        return rng.random((n, self.dim))


def unit_cube(dim: int) -> CompactSpace:
    if not 1 <= dim <= MAX_CUBE_DIM:
        raise CapacityError(f"cube dimension must be in 1..{MAX_CUBE_DIM}, got {dim}")
    return CompactSpace(kind="cube", dim=dim)


def finite_space(labels: Iterable, dist: np.ndarray, validate: bool = True) -> CompactSpace:
    """Build a finite carrier from labels and a distance matrix.

    With ``validate`` (the default) the matrix is checked exhaustively for
    the metric axioms and a violation raises ``DomainError``.  Passing
    ``validate=False`` admits a broken matrix so that
    :func:`metric_axioms_report` can describe what is wrong with it.
    """
    labels = tuple(labels)
    if len(labels) == 0:
        raise DomainError("finite carrier needs at least one point")
    if len(labels) > MAX_FINITE_POINTS:
        raise CapacityError(f"finite carriers are capped at {MAX_FINITE_POINTS} points")
    matrix = np.asarray(dist, dtype=float)
    if matrix.shape != (len(labels), len(labels)):
        raise DomainError("distance matrix shape does not match the label count")
    space = CompactSpace(kind="finite", dim=0, labels=labels, dist_matrix=matrix)
    if validate:
        report = metric_axioms_report(space)
        if not report.ok:
            raise DomainError("not a metric: " + "; ".join(report.violations[:3]))
    return space


def space_from_json(node: dict) -> CompactSpace:
    """Decode a carrier description.

    ``{"kind": "cube", "dim": d}`` or
    ``{"kind": "finite", "labels": [...], "dist": [[...], ...]}``.
    """
    if not isinstance(node, dict) or "kind" not in node:
        raise DomainError("space JSON needs a 'kind' field")
    if node["kind"] == "cube":
        try:
            return unit_cube(int(node["dim"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError("cube space JSON needs an integer 'dim'") from exc
    if node["kind"] == "finite":
        try:
            labels = tuple(node["labels"])
            dist = np.asarray(node["dist"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError("finite space JSON needs 'labels' and 'dist'") from exc
        return finite_space(labels, dist)
    raise DomainError(f"unknown space kind {node['kind']!r}")


# ---------------------------------------------------------------------------
# metric axiom checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricAxiomsReport:
    ok: bool
    checked_pairs: int
    checked_triples: int
    violations: tuple


def metric_axioms_report(space: CompactSpace, samples: int = _TRIPLE_SAMPLES,
                         seed: int = 0) -> MetricAxiomsReport:
    """Check nonnegativity, identity, symmetry and the triangle inequality.

    Finite carriers are checked exhaustively (their point count is capped,
    so all n^3 triples fit comfortably).  Cube carriers are spot-checked on
    ``samples`` seeded random triples; the Euclidean metric is exact, so
    this is a guard against representation bugs rather than a proof.
    """
    violations: list[str] = []
    if space.kind == "finite":
        m = space.dist_matrix
        n = space.n_points
        if np.any(m < 0):
            i, j = np.argwhere(m < 0)[0]
            violations.append(f"negative distance at ({i},{j})")
        if np.any(np.abs(np.diag(m)) > 0):
            i = int(np.argmax(np.abs(np.diag(m)) > 0))
            violations.append(f"nonzero self-distance at point {i}")
        off = m.copy()
        np.fill_diagonal(off, np.inf)
        if np.any(off <= 0):
            i, j = np.argwhere(off <= 0)[0]
            violations.append(f"zero distance between distinct points ({i},{j})")
        asym = np.abs(m - m.T)
        if np.any(asym > 0):
            i, j = np.argwhere(asym > 0)[0]
            violations.append(f"symmetry violated at ({i},{j})")
        # d(i,k) <= d(i,j) + d(j,k) for every triple, fully vectorised
        slack = m[:, None, :] - (m[:, :, None] + m[None, :, :])
        if np.any(slack > 1e-12):
            i, j, k = np.argwhere(slack > 1e-12)[0]
            violations.append(f"triangle violated for ({i},{j},{k})")
        return MetricAxiomsReport(ok=not violations, checked_pairs=n * n,
                                  checked_triples=n ** 3,
                                  violations=tuple(violations))

    rng = np.random.default_rng(seed)
    a = rng.random((samples, space.dim))
    b = rng.random((samples, space.dim))
    c = rng.random((samples, space.dim))
    dab = np.linalg.norm(a - b, axis=1)
    dba = np.linalg.norm(b - a, axis=1)
    dac = np.linalg.norm(a - c, axis=1)
    dcb = np.linalg.norm(c - b, axis=1)
    if np.any(dab < 0):
        violations.append("negative distance on sampled pair")
    if np.any(np.abs(dab - dba) > 0):
        violations.append("symmetry violated on sampled pair")
    if np.any(dab - (dac + dcb) > 1e-12):
        violations.append("triangle violated on sampled triple")
    return MetricAxiomsReport(ok=not violations, checked_pairs=samples,
                              checked_triples=samples,
                              violations=tuple(violations))


# ---------------------------------------------------------------------------
# measurable sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxCell:
    """Axis-aligned box, half-open per axis unless flagged closed above."""

    lo: tuple
    hi: tuple
    closed_hi: tuple

    def contains(self, space: CompactSpace, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        closed = np.asarray(self.closed_hi, dtype=bool)
        above = pts >= lo
        below = np.where(closed, pts <= hi, pts < hi)
        return np.all(above & below, axis=-1)


@dataclass(frozen=True)
class PointCell:
    """Subset of a finite carrier, stored as sorted indices."""

    indices: tuple

    def contains(self, space: CompactSpace, pts: np.ndarray) -> np.ndarray:
        return np.isin(np.asarray(pts, dtype=int), np.asarray(self.indices, dtype=int))


@dataclass(frozen=True)
class BallCell:
    """Closed metric ball; the shape tightness witnesses are made of."""

    center: Point
    radius: float

    def contains(self, space: CompactSpace, pts: np.ndarray) -> np.ndarray:
        # tiny additive slack so that "radius equal to an atom distance"
        # keeps that atom inside despite rounding in the norm
        return space.dist_to(pts, self.center) <= self.radius + 1e-12


Cell = Union[BoxCell, PointCell, BallCell]


@dataclass(frozen=True)
class MeasurableSet:
    """EMPTY, ALL, or a finite union of cells."""

    kind: str  # "empty" | "all" | "cells"
    cells: tuple = ()

    def contains(self, space: CompactSpace, pts: np.ndarray) -> np.ndarray:
        pts = space.points_array(pts) if not isinstance(pts, np.ndarray) else pts
        n = pts.shape[0]
        if self.kind == "empty":
            return np.zeros(n, dtype=bool)
        if self.kind == "all":
            return np.ones(n, dtype=bool)
        mask = np.zeros(n, dtype=bool)
        for cell in self.cells:
            mask |= cell.contains(space, pts)
        return mask

    def complement_contains(self, space: CompactSpace, pts: np.ndarray) -> np.ndarray:
        return ~self.contains(space, pts)


EMPTY_SET = MeasurableSet(kind="empty")
FULL_SET = MeasurableSet(kind="all")


def box_set(lo: Sequence[float], hi: Sequence[float],
            closed_hi: Sequence[bool] | None = None) -> MeasurableSet:
    lo = tuple(float(x) for x in lo)
    hi = tuple(float(x) for x in hi)
    if closed_hi is None:
        closed_hi = tuple(False for _ in lo)
    return MeasurableSet(kind="cells", cells=(BoxCell(lo, hi, tuple(closed_hi)),))


def point_set(indices: Iterable[int]) -> MeasurableSet:
    return MeasurableSet(kind="cells", cells=(PointCell(tuple(sorted(set(int(i) for i in indices)))),))


def ball_set(center: Point, radius: float) -> MeasurableSet:
    return MeasurableSet(kind="cells", cells=(BallCell(center, float(radius)),))


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Finite disjoint cover of the carrier with a representative per cell.

    Grid partitions are stored compactly (cells per axis); explicit
    partitions keep their cell list.  ``cell_index`` is the workhorse: it
    maps points to the cell containing them, which is all the integral
    construction needs on atomic measures.
    """

    space: CompactSpace
    kind: str  # "grid" | "explicit"
    cells_per_axis: int = 0
    explicit_cells: tuple = ()
    explicit_reps: tuple = ()

    @property
    def n_cells(self) -> int:
        if self.kind == "grid":
            return self.cells_per_axis ** self.space.dim
        return len(self.explicit_cells)

    @property
    def side(self) -> float:
        if self.kind != "grid":
            raise UnsupportedError("side is only defined for grid partitions")
        return 1.0 / self.cells_per_axis

    def cell_index(self, pts: np.ndarray) -> np.ndarray:
        """Index of the cell containing each point (every point has one)."""
        if self.kind == "grid":
            m = self.cells_per_axis
            coords = np.asarray(pts, dtype=float)
            axes = np.minimum(np.floor(coords * m).astype(int), m - 1)
            axes = np.maximum(axes, 0)
            return np.ravel_multi_index(tuple(axes[:, k] for k in range(self.space.dim)),
                                        (m,) * self.space.dim)
        out = np.full(np.asarray(pts).shape[0] if np.asarray(pts).ndim else 1, -1, dtype=int)
        arr = pts
        for j, cell in enumerate(self.explicit_cells):
            hit = cell.contains(self.space, arr) & (out < 0)
            out[hit] = j
        if np.any(out < 0):
            raise DomainError("partition does not cover a queried point")
        return out

    def representatives(self) -> np.ndarray:
        """Representative point of each cell, as a bulk array."""
        if self.kind == "grid":
            m = self.cells_per_axis
            d = self.space.dim
            centers_1d = (np.arange(m) + 0.5) / m
            grids = np.meshgrid(*([centers_1d] * d), indexing="ij")
            return np.stack([g.ravel() for g in grids], axis=-1)
        return self.space.points_array(list(self.explicit_reps))

    def reps_of_cells(self, flat: np.ndarray) -> np.ndarray:
        """Representatives of selected cells, without materialising the grid."""
        if self.kind == "grid":
            m = self.cells_per_axis
            axes = np.unravel_index(np.asarray(flat, dtype=int), (m,) * self.space.dim)
            return (np.stack(axes, axis=-1) + 0.5) / m
        reps = self.space.points_array(list(self.explicit_reps))
        return reps[np.asarray(flat, dtype=int)]

    def cell_sets(self) -> list[MeasurableSet]:
        """Materialise the cells as measurable sets (small partitions only)."""
        if self.kind != "grid":
            return [MeasurableSet(kind="cells", cells=(c,)) for c in self.explicit_cells]
        m = self.cells_per_axis
        d = self.space.dim
        if m ** d > 100_000:
            raise CapacityError("refusing to materialise more than 1e5 grid cells")
        side = self.side
        out = []
        for flat in range(m ** d):
            idx = np.unravel_index(flat, (m,) * d)
            lo = tuple(i * side for i in idx)
            hi = tuple((i + 1) * side for i in idx)
            closed = tuple(i == m - 1 for i in idx)
            out.append(box_set(lo, hi, closed))
        return out


def grid_partition(space: CompactSpace, h: float) -> Partition:
    """Uniform grid with cells of side at most ``h`` on the unit cube.

    The number of cells per axis is ceil(1/h); each cell is half-open with
    the outermost upper face closed, so the cells are pairwise disjoint and
    cover the cube exactly.  Representatives are the cell centers.
    """
    if space.kind != "cube":
        raise UnsupportedError("grid partitions are defined on cube carriers only")
    if not (h > 0):
        raise DomainError("mesh size must be positive")
    m = int(math.ceil(1.0 / h - 1e-12))
    m = max(m, 1)
    return Partition(space=space, kind="grid", cells_per_axis=m)


def trivial_partition(space: CompactSpace) -> Partition:
    """One cell per point of a finite carrier (each point represents itself)."""
    if space.kind != "finite":
        raise UnsupportedError("trivial partitions are defined on finite carriers only")
    cells = tuple(PointCell((i,)) for i in range(space.n_points))
    reps = tuple(range(space.n_points))
    return Partition(space=space, kind="explicit", explicit_cells=cells, explicit_reps=reps)
