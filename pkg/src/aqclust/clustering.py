"""Data sets, two-cluster assignments, scatter statistics and Lloyd's baseline.

Data is stored column-oriented: ``values`` is an ``m x n`` matrix whose
columns are the ``n`` data points. All indices in this module are 0-based;
cluster labels are 1 and 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class DegenerateAssignmentError(ValueError):
    """An assignment leaves one of the two clusters empty."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DataSet:
    """Real ``m x n`` data matrix, one point per column.

    Attributes:
        values: feature-by-point matrix.
        centered: True if every feature row has zero mean.
        point_ids: opaque labels, one per point, carried through the pipeline.
    """

    values: np.ndarray
    centered: bool = False
    point_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"values must be a 2-D m x n matrix, got shape {values.shape}")
        m, n = values.shape
        if m < 1 or n < 2:
            raise ValueError(f"need m >= 1 features and n >= 2 points, got m={m}, n={n}")
        bad = ~np.isfinite(values)
        if bad.any():
            col = int(np.flatnonzero(bad.any(axis=0))[0])
            raise ValueError(f"non-finite entry in column {col} (point {col + 1}): {values[:, col]}")
        ids = tuple(str(p) for p in self.point_ids) if self.point_ids else tuple(
            str(i + 1) for i in range(n)
        )
        if len(ids) != n:
            raise ValueError(f"expected {n} point ids, got {len(ids)}")
        if self.centered:
            tol = 1e-9 * n * max(float(np.abs(values).max()), 1e-300)
            if np.abs(values.sum(axis=1)).max() > tol:
                raise ValueError("data flagged centered but feature rows do not sum to zero")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "point_ids", ids)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]] | np.ndarray, **kwargs) -> "DataSet":
        """Build from row-per-point input (the CSV layout)."""
        arr = np.asarray(points, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        return cls(arr.T, **kwargs)


@dataclass(frozen=True)
class ClusterAssignment:
    """Hard assignment of ``n`` points to clusters 1 and 2."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-D vector")
        if not np.isin(labels, (1, 2)).all():
            raise ValueError(f"labels must be 1 or 2, got {np.unique(labels)}")
        labels = labels.astype(np.int64)
        if not ((labels == 1).any() and (labels == 2).any()):
            raise DegenerateAssignmentError("both clusters must be nonempty")
        object.__setattr__(self, "labels", _frozen(labels))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def sizes(self) -> tuple[int, int]:
        n1 = int((self.labels == 1).sum())
        return n1, self.n - n1

    def indicator(self, cluster: int) -> np.ndarray:
        """Binary membership vector z_i of the given cluster."""
        return (self.labels == cluster).astype(np.int64)

    @property
    def spins(self) -> np.ndarray:
        """Bipolar vector ``z_1 - z_2``: +1 for cluster 1, -1 for cluster 2."""
        return self.indicator(1) - self.indicator(2)

    def swapped(self) -> "ClusterAssignment":
        return ClusterAssignment(3 - self.labels)

    def same_partition(self, other: "ClusterAssignment") -> bool:
        return bool(
            np.array_equal(self.labels, other.labels)
            or np.array_equal(self.labels, 3 - other.labels)
        )

    @classmethod
    def from_spins(cls, s: Sequence[int] | np.ndarray) -> "ClusterAssignment":
        s = np.asarray(s)
        return cls(np.where(s > 0, 1, 2))


@dataclass(frozen=True)
class ScatterStats:
    s_w: float
    s_b: float
    s_t: float
    centroids: np.ndarray  # m x 2, column i is the centroid of cluster i+1
    sizes: tuple[int, int]


def _as_dataset(data: DataSet | np.ndarray) -> DataSet:
    return data if isinstance(data, DataSet) else DataSet(np.asarray(data, dtype=float))


def center(data: DataSet | np.ndarray) -> DataSet:
    """Subtract the per-feature mean; order and ids are preserved."""
    data = _as_dataset(data)
    if data.centered:
        return data
    values = data.values - data.values.mean(axis=1, keepdims=True)
    values -= values.mean(axis=1, keepdims=True)
    # rows that were constant leave only rounding noise behind
    noise = np.abs(values).max(axis=1) <= 1e-12 * np.abs(data.values).max(axis=1)
    values[noise] = 0.0
    return DataSet(values, centered=True, point_ids=data.point_ids)


def _check(data: DataSet, a: ClusterAssignment) -> None:
    if a.n != data.n:
        raise ValueError(f"assignment has {a.n} labels for {data.n} points")


def centroids(
    data: DataSet, a: ClusterAssignment
) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Return ``(mu_1, mu_2, n_1, n_2)``."""
    _check(data, a)
    n1, n2 = a.sizes
    X = data.values
    mu1 = X[:, a.labels == 1].mean(axis=1)
    mu2 = X[:, a.labels == 2].mean(axis=1)
    return mu1, mu2, n1, n2


def scatter_stats(data: DataSet, a: ClusterAssignment) -> ScatterStats:
    """Within, between and total scatter of a two-cluster assignment.

    The between-cluster scatter is the ordered double sum over cluster
    pairs, so for two clusters it equals ``2 n_1 n_2 ||mu_1 - mu_2||^2``.
    """
    mu1, mu2, n1, n2 = centroids(data, a)
    X = data.values
    mus = np.stack([mu1, mu2], axis=1)
    resid = X - mus[:, a.labels - 1]
    s_w = float(np.sum(resid**2))
    s_b = float(2 * n1 * n2 * np.sum((mu1 - mu2) ** 2))
    s_t = float(np.sum((X - X.mean(axis=1, keepdims=True)) ** 2))
    return ScatterStats(s_w=s_w, s_b=s_b, s_t=s_t, centroids=_frozen(mus), sizes=(n1, n2))


def anova_residual(data: DataSet, a: ClusterAssignment) -> float:
    """``S_T - S_W - S_B / (2n)``; zero up to rounding for every assignment."""
    st = scatter_stats(data, a)
    return st.s_t - st.s_w - st.s_b / (2 * data.n)


@dataclass(frozen=True)
class LloydResult:
    assignment: ClusterAssignment
    centroids: np.ndarray
    sw_history: tuple[float, ...]
    n_iter: int
    converged: bool
    reseeds: int = 0


def _assign(X: np.ndarray, mus: np.ndarray) -> np.ndarray:
    d = ((X[:, :, None] - mus[:, None, :]) ** 2).sum(axis=0)
    return np.argmin(d, axis=1) + 1


def lloyd_kmeans(
    data: DataSet,
    k: int = 2,
    init: int | np.ndarray = 0,
    max_iter: int = 100,
) -> LloydResult:
    """Lloyd's alternating assignment/update iteration for two clusters.

    Args:
        data: points to cluster.
        k: number of clusters; only 2 is supported.
        init: an integer seed (two distinct data points are drawn as initial
            centroids) or an explicit ``m x 2`` centroid matrix.
        max_iter: iteration cap.

    A cluster emptied by an assignment step has its centroid moved to the
    point farthest from the current centroids before reassigning. The
    within-cluster scatter after each update step is recorded in
    ``sw_history`` and never increases.
    """
    if k != 2:
        raise ValueError("only k = 2 is supported")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    X = data.values
    if isinstance(init, (int, np.integer)):
        rng = np.random.default_rng(int(init))
        uniq = np.unique(X.T, axis=0)
        if len(uniq) < 2:
            raise ValueError("need at least two distinct points to seed two centroids")
        pick = rng.choice(len(uniq), size=2, replace=False)
        mus = uniq[pick].T.copy()
    else:
        mus = np.array(init, dtype=float).reshape(data.m, 2)
        if np.array_equal(mus[:, 0], mus[:, 1]):
            raise ValueError("initial centroids must be distinct")

    labels = None
    history: list[float] = []
    reseeds = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new = _assign(X, mus)
        for c in (1, 2):
            if not (new == c).any():
                dmin = ((X[:, :, None] - mus[:, None, :]) ** 2).sum(axis=0).min(axis=1)
                mus[:, c - 1] = X[:, int(np.argmax(dmin))]
                new = _assign(X, mus)
                reseeds += 1
        if labels is not None and np.array_equal(new, labels):
            converged = True
            break
        labels = new
        mus = np.stack([X[:, labels == c].mean(axis=1) for c in (1, 2)], axis=1)
        history.append(float(((X - mus[:, labels - 1]) ** 2).sum()))

    assert labels is not None
    return LloydResult(
        assignment=ClusterAssignment(labels),
        centroids=_frozen(mus),
        sw_history=tuple(history),
        n_iter=it,
        converged=converged,
        reseeds=reseeds,
    )


def gen_blobs(
    n1: int,
    n2: int,
    centers: Sequence[Sequence[float]] = ((-3.0, 0.0), (1.0, 0.0)),
    spread: float = 0.3,
    seed: int = 0,
) -> DataSet:
    """Two isotropic Gaussian blobs of ``n1`` and ``n2`` points, centered.

    Points of the first blob come first. Output is bitwise reproducible for
    a fixed seed.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("blob sizes must be >= 1")
    if not spread > 0:
        raise ValueError(f"spread must be positive, got {spread}")
    c = np.asarray(centers, dtype=float)
    if c.ndim != 2 or c.shape[0] != 2:
        raise ValueError("centers must be two m-vectors")
    rng = np.random.default_rng(seed)
    m = c.shape[1]
    a = c[0][:, None] + spread * rng.standard_normal((m, n1))
    b = c[1][:, None] + spread * rng.standard_normal((m, n2))
    return center(DataSet(np.hstack([a, b])))


def read_csv(path: str | Path, header: bool = False) -> DataSet:
    """Read one point per line (features as columns) into a DataSet."""
    arr = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2, encoding="utf-8")
    return DataSet.from_points(arr)


def write_csv(data: DataSet, path: str | Path, header: bool = True) -> None:
    lines = []
    if header:
        lines.append(",".join(f"x{j + 1}" for j in range(data.m)))
    for col in data.values.T:
        lines.append(",".join(repr(float(v)) for v in col))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
