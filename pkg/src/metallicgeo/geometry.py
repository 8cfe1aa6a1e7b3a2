"""Charts, tensor fields and pointwise multilinear algebra.

Index conventions used throughout the package:

* a tensor's components are stored in a dense numpy array, one axis per
  slot, with a signature string of 'u' (contravariant) and 'd' (covariant)
  characters aligned with the axes;
* a (1,1) structure tensor J has signature "ud" and J[h, i] is the
  component with upper index h and lower index i, so that J @ v transforms
  a coordinate vector v;
* the metric g has signature "dd" and its inverse "uu".

All pointwise operations here are pure functions of immutable inputs, so
they are safe to evaluate in parallel across sample points. Residual
aggregation elsewhere always reduces in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "GeometryError",
    "SingularMetricError",
    "ChartBoundsError",
    "Chart",
    "TensorField",
    "PointFrame",
    "inverse_metric",
    "contract",
    "raise_index",
    "lower_index",
    "max_abs",
]

DET_TOL = 1e-10


class GeometryError(RuntimeError):
    pass


class SingularMetricError(GeometryError):
    """Metric determinant fell below the nondegeneracy threshold at a point."""

    def __init__(self, point):
        self.point = np.asarray(point, dtype=float)
        super().__init__(f"singular metric (|det g| <= {DET_TOL:g}) at point {self.point.tolist()}")


class ChartBoundsError(GeometryError):
    """A point (or a finite-difference stencil around it) left the chart."""


def max_abs(arr) -> float:
    arr = np.asarray(arr, dtype=float)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


@dataclass(frozen=True)
class Chart:
    """A single coordinate domain of even dimension with a sampling policy.

    bounds is a (dim, 2) array of closed intervals. Sample points are a
    deterministic per-axis grid, seeded pseudo-random interior points and
    optional named points, all kept at least `margin` away from the bounds
    so finite-difference stencils stay inside.
    """

    dimension: int
    bounds: tuple  # ((lo, hi), ...) per coordinate
    grid: int = 3
    n_random: int = 0
    seed: int = 42
    margin: float = 0.05
    named_points: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 2 or self.dimension % 2 != 0:
            raise ValueError("chart dimension must be an even integer >= 2")
        b = np.asarray(self.bounds, dtype=float)
        if b.shape != (self.dimension, 2):
            raise ValueError("bounds must provide one (lo, hi) pair per coordinate")
        if np.any(b[:, 1] <= b[:, 0]):
            raise ValueError("each bound must satisfy lo < hi")
        if self.margin <= 0 or np.any(2 * self.margin >= b[:, 1] - b[:, 0]):
            raise ValueError("margin must be positive and smaller than half of every extent")
        for name, pt in self.named_points.items():
            if not self.contains(pt, margin=self.margin):
                raise ValueError(f"named point {name!r} is not inside the chart margin")
        if self.sample_count() < 8:
            raise ValueError("sample policy must yield at least 8 points")

    @property
    def bounds_array(self) -> np.ndarray:
        return np.asarray(self.bounds, dtype=float)

    def sample_count(self) -> int:
        return self.grid**self.dimension + self.n_random + len(self.named_points)

    def contains(self, point, margin: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        b = self.bounds_array
        return bool(np.all(p >= b[:, 0] + margin) and np.all(p <= b[:, 1] - margin))

    def require_inside(self, point, reach: float = 0.0):
        """Raise ChartBoundsError unless point +- reach stays inside the bounds."""
        if not self.contains(point, margin=reach):
            raise ChartBoundsError(
                f"point {np.asarray(point, dtype=float).tolist()} is within {reach:g} of the chart boundary"
            )

    def validate_scheme_margin(self, step: float):
        # sample points must keep >= 2x the finite-difference step from the bounds
        if self.margin < 2.0 * step:
            raise ValueError(
                f"chart margin {self.margin:g} is smaller than twice the differencing step {step:g}"
            )

    def sample_points(self) -> np.ndarray:
        """Deterministic sample points: grid, then named (sorted), then random."""
        b = self.bounds_array
        lo = b[:, 0] + self.margin
        hi = b[:, 1] - self.margin
        axes = [np.linspace(lo[i], hi[i], self.grid) for i in range(self.dimension)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = [np.stack([m.ravel() for m in mesh], axis=-1)]
        if self.named_points:
            pts.append(np.array([self.named_points[k] for k in sorted(self.named_points)], dtype=float))
        if self.n_random:
            rng = np.random.default_rng(self.seed)
            pts.append(rng.uniform(lo, hi, size=(self.n_random, self.dimension)))
        out = np.concatenate(pts, axis=0)
        # drop exact duplicates (a named point may coincide with a grid node)
        _, keep = np.unique(out.round(decimals=12), axis=0, return_index=True)
        return out[np.sort(keep)]


@dataclass(frozen=True)
class TensorField:
    """A map from chart points to components of fixed valence.

    sig is the axis signature ('u'/'d' per array axis); fn returns the
    component array at a point. Declared symmetries are validated against
    sample points by `validate_on`.
    """

    name: str
    sig: str
    fn: Callable[[np.ndarray], np.ndarray]
    symmetric_pairs: tuple = ()
    antisymmetric_pairs: tuple = ()

    def __call__(self, point) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(point, dtype=float)), dtype=float)

    @property
    def rank_cov(self) -> int:
        return self.sig.count("d")

    @property
    def rank_con(self) -> int:
        return self.sig.count("u")

    def validate_on(self, points, sym_tol: float = 1e-12):
        """Check declared symmetries (and shape) at every given point."""
        for p in points:
            arr = self(p)
            if arr.ndim != len(self.sig):
                raise GeometryError(f"field {self.name!r} returned rank {arr.ndim}, signature is {self.sig!r}")
            for a, b in self.symmetric_pairs:
                if max_abs(arr - np.swapaxes(arr, a, b)) > sym_tol:
                    raise GeometryError(f"field {self.name!r} is not symmetric in axes ({a},{b}) at {p.tolist()}")
            for a, b in self.antisymmetric_pairs:
                if max_abs(arr + np.swapaxes(arr, a, b)) > sym_tol:
                    raise GeometryError(f"field {self.name!r} is not antisymmetric in axes ({a},{b}) at {p.tolist()}")


def inverse_metric(g: np.ndarray, point=None) -> np.ndarray:
    """Invert the metric at a point; product with the input is the identity within 1e-10."""
    g = np.asarray(g, dtype=float)
    if abs(np.linalg.det(g)) <= DET_TOL:
        raise SingularMetricError(point if point is not None else np.full(g.shape[0], np.nan))
    ginv = np.linalg.inv(g)
    if max_abs(g @ ginv - np.eye(g.shape[0])) > 1e-10:
        raise SingularMetricError(point if point is not None else np.full(g.shape[0], np.nan))
    return ginv


def contract(arr: np.ndarray, sig: str, ax1: int, ax2: int, metric: np.ndarray | None = None):
    """Einstein contraction of two slots.

    One slot must be contravariant and the other covariant; alternatively a
    metric (inverse metric for two 'd' slots, metric for two 'u' slots) may
    be supplied to pair like slots. Returns (array, signature).
    """
    arr = np.asarray(arr, dtype=float)
    if ax1 == ax2:
        raise ValueError("cannot contract a slot with itself")
    ax1, ax2 = sorted((ax1, ax2))
    kinds = sig[ax1] + sig[ax2]
    if kinds in ("ud", "du"):
        out = np.trace(arr, axis1=ax1, axis2=ax2)
    elif metric is not None:
        moved = np.moveaxis(arr, (ax1, ax2), (-2, -1))
        out = np.einsum("...ab,ab->...", moved, metric)
    else:
        raise ValueError(f"slot kinds {kinds!r} need a metric to be paired")
    new_sig = "".join(c for i, c in enumerate(sig) if i not in (ax1, ax2))
    return out, new_sig


def lower_index(arr: np.ndarray, sig: str, axis: int, g: np.ndarray):
    """Lower one contravariant slot with the metric."""
    if sig[axis] != "u":
        raise ValueError(f"axis {axis} is not contravariant")
    out = np.moveaxis(np.tensordot(np.asarray(arr, float), g, axes=([axis], [0])), -1, axis)
    return out, sig[:axis] + "d" + sig[axis + 1 :]


def raise_index(arr: np.ndarray, sig: str, axis: int, ginv: np.ndarray):
    """Raise one covariant slot with the inverse metric."""
    if sig[axis] != "d":
        raise ValueError(f"axis {axis} is not covariant")
    out = np.moveaxis(np.tensordot(np.asarray(arr, float), ginv, axes=([axis], [0])), -1, axis)
    return out, sig[:axis] + "u" + sig[axis + 1 :]


class PointFrame:
    """Metric data and cached tensor values at one chart point."""

    def __init__(self, point, g: np.ndarray):
        self.point = np.asarray(point, dtype=float)
        self.g = np.asarray(g, dtype=float)
        self.ginv = inverse_metric(self.g, self.point)
        self.values: dict[str, np.ndarray] = {}

    def value(self, fld: TensorField) -> np.ndarray:
        if fld.name not in self.values:
            self.values[fld.name] = fld(self.point)
        return self.values[fld.name]
