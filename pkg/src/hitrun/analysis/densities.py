"""Level-density laws for rescaled eigenvalues ``x = N lambda``.

All densities are vectorized, return 0 outside their support, and return 0 at
an endpoint where the formula has an integrable ``1/sqrt`` singularity (the
value there is a limit, not a number, and quadrature never samples it).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, signal

from ..errors import ValidationError


def _support(x, lo, hi, open_left=True):
    x = np.asarray(x, dtype=float)
    inside = (x > lo) & (x <= hi) if open_left else (x >= lo) & (x <= hi)
    return x, inside


def _out(values, x):
    return float(values) if np.ndim(x) == 0 else values


def mp_density(x):
    """Marchenko-Pastur law ``sqrt((4 - x)/x) / (2 pi)`` on ``(0, 4]``."""
    x, inside = _support(x, 0.0, 4.0)
    xs = np.where(inside, x, 1.0)
    return _out(np.where(inside, np.sqrt((4.0 - xs) / xs) / (2.0 * np.pi), 0.0), x)


def ssc_density(x):
    """Shifted semicircle ``sqrt(4 - (x - 1)^2) / (2 pi)`` on ``[-1, 3]``."""
    x, inside = _support(x, -1.0, 3.0, open_left=False)
    r = np.where(inside, 4.0 - (x - 1.0) ** 2, 0.0)
    return _out(np.sqrt(np.maximum(r, 0.0)) / (2.0 * np.pi), x)


def dm_edge(z):
    """Upper support edge ``L(z) = 2/3 (sqrt(z^2 + 6) - z)`` of the hard-wall GUE density."""
    z = np.asarray(z, dtype=float)
    out = (2.0 / 3.0) * (np.sqrt(z * z + 6.0) - z)
    return float(out) if out.ndim == 0 else out


def dm_wall_density(y, z: float = 0.0):
    """GUE level density with a hard wall at the origin.

    ``h_z(y) = sqrt(L - y) / (2 pi sqrt(y)) * (L + 2y + 2z)`` on ``(0, L(z)]``.
    Normalized for every ``z``.
    """
    L = dm_edge(z)
    if not L > 0:
        raise ValidationError(f"support edge L({z}) is not positive")
    y, inside = _support(y, 0.0, L)
    ys = np.where(inside, y, 1.0)
    val = np.sqrt(np.maximum(L - ys, 0.0)) / (2.0 * np.pi * np.sqrt(ys)) * (L + 2.0 * ys + 2.0 * z)
    return _out(np.where(inside, val, 0.0), y)


def ppt_density(x):
    """Conjectured PPT level density ``4/(27 pi) sqrt((3 - x)/x) (3 + 2x)`` on ``(0, 3]``.

    It is ``h_0`` rescaled to unit mean: ``g(x) = h_0(x / c) / c`` with
    ``c = 3 / L(0)``.
    """
    x, inside = _support(x, 0.0, 3.0)
    xs = np.where(inside, x, 1.0)
    val = 4.0 / (27.0 * np.pi) * np.sqrt((3.0 - xs) / xs) * (3.0 + 2.0 * xs)
    return _out(np.where(inside, val, 0.0), x)


LAWS = {
    "mp": (mp_density, (0.0, 4.0)),
    "ssc": (ssc_density, (-1.0, 3.0)),
    "g": (ppt_density, (0.0, 3.0)),
}


def integrate_density(f, a: float, b: float, tol: float = 1e-12) -> float:
    """``int_a^b f`` for ``f`` with possible ``1/sqrt`` singularities at ``a`` and ``b``.

    Each half of the interval is mapped through ``x = a + u^2`` (resp.
    ``x = b - u^2``), which turns square-root endpoint behaviour into a
    smooth integrand, then integrated adaptively.
    """
    if b <= a:
        return 0.0
    m = 0.5 * (a + b)
    h = math.sqrt(m - a)
    opts = dict(epsabs=tol, epsrel=tol, limit=200)
    left, _ = integrate.quad(lambda u: 2.0 * u * float(f(a + u * u)), 0.0, h, **opts)
    right, _ = integrate.quad(lambda u: 2.0 * u * float(f(b - u * u)), 0.0, h, **opts)
    return left + right


def bin_masses(f, edges, support: tuple[float, float] | None = None) -> np.ndarray:
    """Probability mass of density ``f`` in each bin ``[edges[i], edges[i+1])``."""
    edges = np.asarray(edges, dtype=float)
    lo, hi = support if support is not None else (-np.inf, np.inf)
    out = np.zeros(len(edges) - 1)
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        a, b = max(a, lo), min(b, hi)
        if b > a:
            out[i] = integrate_density(f, a, b)
    return out


class FiniteNDensity:
    """Level density ``P_N(x)`` of Hilbert-Schmidt random states at finite ``N``.

    ``backend="monte-carlo"`` builds a histogram estimate from ``samples``
    Ginibre/Wishart spectra.  ``backend="coefficients"`` evaluates the
    polynomial expansion from a user-supplied table ``{m: a_m}``::

        P_N(x) = (1/N) sum_m a_m u^(m-2) (1 - u)^(N^2 - m),   u = x / N

    where the table describes the density of the raw eigenvalue ``u`` on
    ``[0, 1]`` and the ``1/N`` converts it to a density in ``x``.
    """

    def __init__(self, N: int, backend: str = "monte-carlo", *, samples: int = 100_000, seed: int = 0,
                 bin_width: float = 0.02, coefficients: dict | None = None):
        if N < 2:
            raise ValidationError("N must be >= 2")
        self.N = int(N)
        self.backend = backend
        if backend == "coefficients":
            if not coefficients:
                raise ValidationError("the coefficients backend needs a table of a_m")
            self.coefficients = {int(m): float(a) for m, a in coefficients.items()}
        elif backend == "monte-carlo":
            from ..quantum import ginibre_sample, wishart_state

            rng = np.random.default_rng(seed)
            vals = []
            left = samples
            while left > 0:
                n = min(left, max(1, 2**20 // (N * N)))
                vals.append(np.linalg.eigvalsh(wishart_state(ginibre_sample(N, rng, size=n))).ravel() * N)
                left -= n
            vals = np.concatenate(vals)
            nbins = max(1, int(math.ceil(N / bin_width)))
            self.edges = np.linspace(0.0, nbins * bin_width, nbins + 1)
            counts, _ = np.histogram(np.clip(vals, 0.0, None), self.edges)
            self.heights = counts / (len(vals) * bin_width)
            self.values = vals
        else:
            raise ValidationError(f"unknown backend {backend!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.backend == "coefficients":
            N = self.N
            u = x / N
            inside = (u >= 0) & (u <= 1)
            us = np.where(inside, u, 0.0)
            tot = np.zeros_like(us)
            for m, a in self.coefficients.items():
                tot = tot + a * us ** (m - 2) * (1.0 - us) ** (N * N - m)
            val = np.where(inside, tot / N, 0.0)
        else:
            i = np.searchsorted(self.edges, x, side="right") - 1
            i = np.where(x == self.edges[-1], len(self.heights) - 1, i)
            ok = (i >= 0) & (i < len(self.heights))
            val = np.where(ok, self.heights[np.clip(i, 0, len(self.heights) - 1)], 0.0)
        return float(val) if val.ndim == 0 else val


@lru_cache(maxsize=8)
def _cached_mc(N, samples, seed):
    return FiniteNDensity(N, "monte-carlo", samples=samples, seed=seed)


def finite_n_density(x, N: int, backend: str = "monte-carlo", *, samples: int = 100_000, seed: int = 0,
                     coefficients: dict | None = None):
    """Evaluate ``P_N(x)``; see :class:`FiniteNDensity` (Monte Carlo estimates are cached)."""
    if backend == "monte-carlo":
        return _cached_mc(int(N), int(samples), int(seed))(x)
    return FiniteNDensity(N, backend, coefficients=coefficients)(x)


def count_local_maxima(heights, smooth: int = 5, min_prominence: float = 0.0, edges: bool = True) -> int:
    """Number of local maxima of a curve after a moving average over ``smooth`` points.

    The average is taken over the available points near the ends, so it does
    not bend the curve down there.  With ``edges=True`` an end point higher
    than its neighbour counts as a maximum too, as for a density that peaks
    at the edge of its support.  Peaks less prominent than ``min_prominence``
    (in the sense of :func:`scipy.signal.find_peaks`) are ignored.
    """
    h = np.asarray(heights, dtype=float)
    if smooth > 1:
        w = np.ones(smooth)
        h = np.convolve(h, w, mode="same") / np.convolve(np.ones_like(h), w, mode="same")
    if edges:
        floor = h.min() - 1.0
        h = np.concatenate([[floor], h, [floor]])
    peaks, _ = signal.find_peaks(h, prominence=min_prominence if min_prominence > 0 else None)
    return len(peaks)
