"""Histograms and goodness-of-fit tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from ..errors import ValidationError


@dataclass
class Histogram:
    """Counts on bins ``[edges[i], edges[i+1])``; the last bin also holds its right edge.

    ``outside`` counts values that fell outside ``[edges[0], edges[-1]]``;
    they are not part of ``total``.
    """

    edges: np.ndarray
    counts: np.ndarray
    outside: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "Histogram") -> "Histogram":
        if not np.array_equal(self.edges, other.edges):
            raise ValidationError("cannot merge histograms with different edges")
        return Histogram(self.edges, self.counts + other.counts, self.outside + other.outside)

    def density(self) -> np.ndarray:
        """Heights normalized so that the histogram integrates to one over its bins."""
        total = self.total
        if total == 0:
            return np.zeros(len(self.counts))
        return self.counts / (total * np.diff(self.edges))

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def to_dict(self) -> dict:
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist(), "total": self.total,
                "outside": self.outside}

    @classmethod
    def from_dict(cls, d: dict) -> "Histogram":
        h = cls(np.asarray(d["edges"], dtype=float), np.asarray(d["counts"], dtype=np.int64), int(d.get("outside", 0)))
        if "total" in d and d["total"] != h.total:
            raise ValidationError("histogram total does not match its counts")
        return h


def histogram(values, edges) -> Histogram:
    """Count ``values`` into bins; a value equal to an inner edge goes to the bin on its right."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValidationError("edges must be a strictly increasing sequence of at least two values")
    v = np.asarray(values, dtype=float).ravel()
    idx = np.searchsorted(edges, v, side="right") - 1
    idx[v == edges[-1]] = len(edges) - 2
    ok = (idx >= 0) & (idx < len(edges) - 1)
    counts = np.bincount(idx[ok], minlength=len(edges) - 1).astype(np.int64)
    return Histogram(edges, counts, int((~ok).sum()))


@dataclass
class Chi2Result:
    statistic: float
    dof: int
    pvalue: float
    reject: bool
    cells: int = 0
    n: int = 0

    @property
    def per_sample(self) -> float:
        """``statistic / n``, an estimate of the chi-square divergence that does not grow with ``n``."""
        return self.statistic / self.n if self.n else math.nan

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "dof": self.dof, "pValue": self.pvalue, "reject": self.reject,
                "cells": self.cells, "n": self.n}


def pool_cells(observed, expected, min_expected: float = 5.0):
    """Merge cells with expectation below ``min_expected`` into one pooled cell.

    Cells with zero expectation must be empty; a nonzero count there makes
    the statistic infinite.  A pooled cell that is itself still too small is
    folded into the smallest remaining cell.
    """
    o = np.asarray(observed, dtype=float).ravel()
    e = np.asarray(expected, dtype=float).ravel()
    if np.any(o[e <= 0] > 0):
        return None
    small = (e > 0) & (e < min_expected)
    big = e >= min_expected
    o_out, e_out = list(o[big]), list(e[big])
    po, pe = o[small].sum(), e[small].sum()
    if pe > 0:
        if pe >= min_expected or not e_out:
            o_out.append(po)
            e_out.append(pe)
        else:
            j = int(np.argmin(e_out))
            o_out[j] += po
            e_out[j] += pe
    return np.asarray(o_out), np.asarray(e_out)


def chi2_gof(observed, expected, confidence: float = 0.999, min_expected: float = 5.0, ddof: int = 0) -> Chi2Result:
    """Pearson chi-square test of counts against expected counts (pooling small cells)."""
    observed = np.asarray(observed, dtype=float)
    n = int(observed.sum())
    pooled = pool_cells(observed, expected, min_expected)
    if pooled is None:
        return Chi2Result(math.inf, 0, 0.0, True, 0, n)
    o, e = pooled
    if len(o) < 2:
        raise ValidationError("too few points for a chi-square test: fewer than two usable cells")
    stat = float(np.sum((o - e) ** 2 / e))
    dof = len(o) - 1 - ddof
    p = float(stats.chi2.sf(stat, dof))
    return Chi2Result(stat, dof, p, bool(p < 1.0 - confidence), len(o), n)


def _quadrant_area(a, b):
    # area of {0 <= x <= a, 0 <= y <= b} inside the unit disk, a, b >= 0
    a = np.minimum(a, 1.0)
    b = np.minimum(b, 1.0)
    xs = np.sqrt(np.maximum(1.0 - b * b, 0.0))

    def S(x):
        return 0.5 * (x * np.sqrt(np.maximum(1.0 - x * x, 0.0)) + np.arcsin(np.clip(x, -1.0, 1.0)))

    inside = a * a + b * b <= 1.0
    return np.where(inside, a * b, b * xs + S(a) - S(np.minimum(xs, a)))


def _corner_area(a, b):
    # signed area of the disk between the axes and the corner (a, b)
    return np.sign(a) * np.sign(b) * _quadrant_area(np.abs(a), np.abs(b))


def disk_rect_area(x0, x1, y0, y1):
    """Exact area of ``[x0, x1] x [y0, y1]`` intersected with the unit disk."""
    return _corner_area(x1, y1) - _corner_area(x0, y1) - _corner_area(x1, y0) + _corner_area(x0, y0)


def _grid(region: str, h: float):
    if region == "square":
        k = int(math.ceil(1.0 / h - 1e-9))
        edges = np.arange(k + 1) * h
        lo = np.minimum(edges[:-1], 1.0)
        hi = np.minimum(edges[1:], 1.0)
        w = hi - lo
        areas = np.outer(w, w)
        return edges, edges, areas, 1.0
    if region == "disk":
        k = int(math.ceil(1.0 / h - 1e-9))
        edges = np.arange(-k, k + 1) * h
        X0, Y0 = np.meshgrid(edges[:-1], edges[:-1], indexing="ij")
        X1, Y1 = np.meshgrid(edges[1:], edges[1:], indexing="ij")
        return edges, edges, disk_rect_area(X0, X1, Y0, Y1), math.pi
    raise ValidationError(f"unknown region {region!r}; expected 'square' or 'disk'")


def chi2_uniformity_test(points, bin_side: float = 0.05, confidence: float = 0.999, region: str = "square",
                         min_expected: float = 5.0) -> Chi2Result:
    """Chi-square test that 2-D points are uniform on the unit square or the unit disk.

    Square bins of side ``bin_side`` tile ``[0, 1]^2`` (square) or
    ``[-1, 1]^2`` (disk).  The expected count of a bin is proportional to the
    exact area it shares with the region; bins cut by the circle are pooled
    when their expectation drops below ``min_expected``.  ``reject`` is true
    when the p-value is below ``1 - confidence``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError("points must have shape (n, 2)")
    if len(pts) == 0:
        raise ValidationError("no points")
    if not 0 < bin_side <= 2:
        raise ValidationError("bin_side must be positive")
    xe, ye, areas, total_area = _grid(region, bin_side)
    ix = np.floor((pts[:, 0] - xe[0]) / bin_side).astype(np.int64)
    iy = np.floor((pts[:, 1] - ye[0]) / bin_side).astype(np.int64)
    nx, ny = areas.shape
    # points sitting exactly on the far edge of the region belong to the last bin
    ix[(ix == nx) & np.isclose(pts[:, 0], xe[-1])] = nx - 1
    iy[(iy == ny) & np.isclose(pts[:, 1], ye[-1])] = ny - 1
    ok = (ix >= 0) & (ix < nx) & (iy >= 0) & (iy < ny)
    counts = np.bincount(ix[ok] * ny + iy[ok], minlength=nx * ny).astype(float)
    n = len(pts)
    expected = n * areas.ravel() / total_area
    if not ok.all():
        counts = np.append(counts, (~ok).sum())
        expected = np.append(expected, 0.0)
    return chi2_gof(counts, expected, confidence, min_expected)


@dataclass
class KSResult:
    statistic: float
    pvalue: float
    n: int = 0
    m: int = 0

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "pValue": self.pvalue, "n": self.n, "m": self.m}


def ks_two_sample(a, b) -> KSResult:
    """Two-sample Kolmogorov-Smirnov statistic with the asymptotic Kolmogorov p-value."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValidationError("both samples must be nonempty")
    allv = np.concatenate([a, b])
    d = float(np.max(np.abs(np.searchsorted(a, allv, side="right") / n - np.searchsorted(b, allv, side="right") / m)))
    en = math.sqrt(n * m / (n + m))
    return KSResult(d, float(special.kolmogorov(en * d)), n, m)


@dataclass
class DensityFit:
    """Binned comparison of a sample with a model density."""

    chi2: Chi2Result
    edges: np.ndarray = field(repr=False)
    observed: np.ndarray = field(repr=False)
    expected: np.ndarray = field(repr=False)

    @property
    def discrepancy(self) -> float:
        return self.chi2.per_sample


def merge_tails(observed, expected, min_expected: float = 5.0):
    """Merge cells at both ends into their inward neighbours until each end cell expects ``min_expected``.

    This turns the outermost cells into one-sided cells ``x < a`` and
    ``x >= b``, so a sample that spills slightly beyond a model's support is
    compared with the model's tail mass instead of an empty cell.
    """
    o = [float(v) for v in observed]
    e = [float(v) for v in expected]
    while len(e) > 1 and e[-1] < min_expected:
        ov, ev = o.pop(), e.pop()
        o[-1] += ov
        e[-1] += ev
    while len(e) > 1 and e[0] < min_expected:
        ov, ev = o.pop(0), e.pop(0)
        o[0] += ov
        e[0] += ev
    return np.asarray(o), np.asarray(e)


def density_discrepancy(values, pdf, edges, support=None, min_expected: float = 5.0) -> DensityFit:
    """Pearson chi-square of a histogram of ``values`` against density ``pdf``.

    Values below ``edges[0]`` and above ``edges[-1]`` get one cell each, with
    the model mass outside the edges as expectation; thin cells at either end
    are then merged inward (:func:`merge_tails`).  ``discrepancy`` is
    ``chi2 / n``.
    """
    from .densities import bin_masses, integrate_density

    v = np.asarray(values, dtype=float).ravel()
    edges = np.asarray(edges, dtype=float)
    h = histogram(v, edges)
    mass = bin_masses(pdf, h.edges, support)
    lo_s, hi_s = support if support is not None else (edges[0], edges[-1])
    below = integrate_density(pdf, lo_s, edges[0]) if lo_s < edges[0] else 0.0
    above = max(0.0, 1.0 - mass.sum() - below)
    n = len(v)
    observed = np.concatenate([[np.sum(v < edges[0])], h.counts, [np.sum(v > edges[-1])]]).astype(float)
    expected = n * np.concatenate([[below], mass, [above]])
    o, e = merge_tails(observed, expected, min_expected)
    return DensityFit(chi2_gof(o, e, min_expected=min_expected), h.edges, o, e)
