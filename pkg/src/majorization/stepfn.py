"""Non-increasing step functions on the half line and their Lorenz curves.

A :class:`StepFunction` is a finite list of ``(value, width)`` pieces laid end
to end from ``t = 0`` with an implicit zero tail.  This is the canonical form
of a decreasing rearrangement and of the spectral scale of a density; all
functionals here (Lorenz curves, convex integrals, L1 distances) are exact
sums over piece breakpoints.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError

MERGE_RTOL = 1e-12
DOMINANCE_TOL = 1e-9


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _merge(values: np.ndarray, widths: np.ndarray, rtol: float):
    """Merge runs of (nearly) equal adjacent values; merged value is the width-weighted mean."""
    out_v: list[float] = []
    out_w: list[float] = []
    for v, w in zip(values, widths):
        if out_v and abs(out_v[-1] - v) <= rtol * max(abs(out_v[-1]), abs(v)):
            tot = out_w[-1] + w
            out_v[-1] = (out_v[-1] * out_w[-1] + v * w) / tot
            out_w[-1] = tot
        else:
            out_v.append(float(v))
            out_w.append(float(w))
    return np.array(out_v), np.array(out_w)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Non-increasing step function ``sum_i values[i] * chi_[c_{i-1}, c_i)``.

    Construction canonicalizes: adjacent equal values (relative ``MERGE_RTOL``)
    are merged and zero-valued pieces are dropped.  Inputs that are not
    non-increasing raise :class:`DomainError`; use :func:`rearrange` to sort.
    """

    values: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        w = np.atleast_1d(np.asarray(self.widths, dtype=float))
        if v.shape != w.shape or v.ndim != 1:
            raise DomainError("values and widths must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise DomainError("values and widths must be finite")
        if np.any(v < 0):
            raise DomainError("step function values must be nonnegative")
        if np.any(w <= 0):
            raise DomainError("widths must be positive")
        keep = v > 0
        v, w = _merge(v[keep], w[keep], MERGE_RTOL)
        if v.size > 1 and np.any(np.diff(v) > 0):
            raise DomainError("pieces must be non-increasing; use rearrange() for unsorted data")
        object.__setattr__(self, "values", _readonly(v))
        object.__setattr__(self, "widths", _readonly(w))

    @classmethod
    def from_pieces(cls, pieces: Iterable[Sequence[float]]) -> "StepFunction":
        pieces = [tuple(p) for p in pieces]
        if not pieces:
            return cls.zero()
        v, w = zip(*pieces)
        return cls(np.array(v, dtype=float), np.array(w, dtype=float))

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.zeros(0), np.zeros(0))

    @classmethod
    def flat(cls, value: float, width: float) -> "StepFunction":
        return cls(np.array([value]), np.array([width]))

    @property
    def pieces(self) -> list[tuple[float, float]]:
        return [(float(v), float(w)) for v, w in zip(self.values, self.widths)]

    @property
    def breakpoints(self) -> np.ndarray:
        """Right ends of the pieces."""
        return np.cumsum(self.widths)

    @property
    def support(self) -> float:
        return float(self.widths.sum())

    @property
    def total(self) -> float:
        return float(np.dot(self.values, self.widths))

    def __len__(self):
        return self.values.size

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        padded = np.append(self.values, 0.0)
        return padded[np.minimum(idx, self.values.size)]

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return np.array_equal(self.values, other.values) and np.array_equal(self.widths, other.widths)

    __hash__ = None

    def isclose(self, other: "StepFunction", atol: float = 1e-12) -> bool:
        """L1-closeness, insensitive to how pieces are split."""
        return l1_distance(self, other) <= atol

    def __repr__(self):
        return f"StepFunction({self.pieces})"

    def to_json(self) -> str:
        return json.dumps([[float(v), float(w)] for v, w in self.pieces])

    @classmethod
    def from_json(cls, text: str) -> "StepFunction":
        return cls.from_pieces(json.loads(text))


@dataclass(frozen=True, eq=False)
class DiscreteMeasureSpace:
    """Finitely many atoms with positive masses, optionally followed by an
    infinite-measure tail on which every function vanishes."""

    masses: np.ndarray
    labels: tuple = None
    infinite_tail: bool = False

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if m.ndim != 1 or np.any(~np.isfinite(m)) or np.any(m <= 0):
            raise DomainError("atom masses must be positive and finite")
        labels = tuple(range(m.size)) if self.labels is None else tuple(self.labels)
        if len(labels) != m.size or len(set(labels)) != m.size:
            raise DomainError("atom labels must be unique, one per atom")
        object.__setattr__(self, "masses", _readonly(m))
        object.__setattr__(self, "labels", labels)

    @classmethod
    def uniform(cls, n: int, mass: float = 1.0, infinite_tail: bool = False):
        return cls(np.full(n, float(mass)), infinite_tail=infinite_tail)

    @property
    def size(self) -> int:
        return self.masses.size

    @property
    def measure(self) -> float:
        return math.inf if self.infinite_tail else float(self.masses.sum())


@dataclass(frozen=True, eq=False)
class WeightedVector:
    """A nonnegative function on a :class:`DiscreteMeasureSpace`."""

    values: np.ndarray
    space: DiscreteMeasureSpace

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.shape != (self.space.size,):
            raise DomainError("one value per atom required")
        if np.any(~np.isfinite(v)):
            raise DomainError("values must be finite")
        if np.any(v < 0):
            raise DomainError("values must be nonnegative")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def masses(self) -> np.ndarray:
        return self.space.masses

    @property
    def integral(self) -> float:
        return float(np.dot(self.values, self.masses))

    @property
    def support_mask(self) -> np.ndarray:
        return self.values > 0

    @property
    def support_measure(self) -> float:
        return float(self.masses[self.support_mask].sum())

    @property
    def cosupport_measure(self) -> float:
        if self.space.infinite_tail:
            return math.inf
        return float(self.masses[~self.support_mask].sum())


def weighted(values, masses=None, infinite_tail: bool = False) -> WeightedVector:
    """Shorthand: ``weighted([0.5, 0.5])`` lives on unit-mass atoms."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if masses is None:
        masses = np.ones(values.size)
    return WeightedVector(values, DiscreteMeasureSpace(masses, infinite_tail=infinite_tail))


def as_weighted(f) -> WeightedVector:
    if isinstance(f, WeightedVector):
        return f
    if isinstance(f, StepFunction):
        return weighted(f.values, f.widths)
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        if np.any(arr[:, 1] <= 0):
            raise DomainError("masses must be positive")
        return weighted(arr[:, 0], arr[:, 1])
    if arr.ndim <= 1:
        return weighted(arr)
    raise DomainError("expected a WeightedVector, a vector, or (value, mass) pairs")


def rearrange(f) -> StepFunction:
    """Decreasing rearrangement of a nonnegative function on a discrete space.

    ``f`` may be a :class:`WeightedVector`, a plain vector (unit masses), or a
    sequence of ``(value, mass)`` pairs.  Ties are broken by original index so
    the result does not depend on sort stability of equal keys.
    """
    if isinstance(f, StepFunction):
        return f
    if not isinstance(f, WeightedVector):
        arr = np.asarray(f, dtype=float)
        if arr.ndim == 2 and arr.shape[1] == 2:
            if np.any(arr[:, 0] < 0):
                raise DomainError("rearrange: negative value")
            if np.any(arr[:, 1] <= 0):
                raise DomainError("rearrange: nonpositive mass")
    f = as_weighted(f)
    order = np.argsort(-f.values, kind="stable")
    return StepFunction(f.values[order], f.masses[order])


def distribution(f: StepFunction) -> StepFunction:
    """Distribution function ``D_f(t) = |{f > t}|`` as a step function of t."""
    if len(f) == 0:
        return StepFunction.zero()
    cum = f.breakpoints
    v = f.values
    gaps = np.append(v[:-1] - v[1:], v[-1])
    # D takes value cum[i] on [v[i+1], v[i]); read from t = 0 upwards
    return StepFunction(cum[::-1], gaps[::-1])


@dataclass(frozen=True, eq=False)
class LorenzCurve:
    """Concave piecewise-linear ``L(t) = int_0^t f(s) ds``, constant after the last knot."""

    t: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        L = np.asarray(self.L, dtype=float)
        if t.ndim != 1 or t.shape != L.shape or t.size == 0:
            raise DomainError("knots must be 1-d and non-empty")
        if t[0] != 0.0 or L[0] != 0.0:
            raise DomainError("a Lorenz curve starts at (0, 0)")
        if np.any(np.diff(t) <= 0):
            raise DomainError("knot abscissae must increase strictly")
        slopes = np.diff(L) / np.diff(t)
        scale = max(1.0, float(np.max(np.abs(slopes)))) if slopes.size else 1.0
        if np.any(slopes < -1e-12 * scale) or np.any(np.diff(slopes) > 1e-9 * scale):
            raise DomainError("Lorenz curve must be concave and non-decreasing")
        object.__setattr__(self, "t", _readonly(t))
        object.__setattr__(self, "L", _readonly(L))

    @property
    def total(self) -> float:
        return float(self.L[-1])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.L) / np.diff(self.t)

    @property
    def knots(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.t, self.L)]

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.t, self.L)

    def __repr__(self):
        return f"LorenzCurve({self.knots})"

    def to_json(self) -> str:
        return json.dumps([[a, b] for a, b in self.knots])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "L"])
        for a, b in self.knots:
            w.writerow([repr(a), repr(b)])
        return buf.getvalue()


def lorenz(f: StepFunction) -> LorenzCurve:
    t = np.concatenate([[0.0], f.breakpoints])
    L = np.concatenate([[0.0], np.cumsum(f.values * f.widths)])
    return LorenzCurve(t, L)


def dominates(F: LorenzCurve, G: LorenzCurve, tol: float = DOMINANCE_TOL) -> bool:
    """``F(t) >= G(t) - tol * scale`` at every knot of either curve.

    Both curves are piecewise linear and constant after their last knot, so
    checking the union of knots is exact.  ``scale`` is the larger plateau.
    """
    ts = np.union1d(F.t, G.t)
    scale = max(F.total, G.total)
    if scale == 0.0:
        return True
    return bool(np.all(F(ts) >= G(ts) - tol * scale))


def convex_integral(f: StepFunction, phi: Callable[[float], float], zero_measure: float = math.inf) -> float:
    """``int phi(f)`` over the underlying measure space.

    ``zero_measure`` is the measure of the set where the function vanishes
    (infinite for the half line).  The caller asserts that ``phi`` is convex;
    with ``phi(0) != 0`` the zero set contributes ``phi(0) * zero_measure``,
    which diverges on an infinite zero set.
    """
    phi0 = float(phi(0.0))
    body = float(sum(float(phi(v)) * w for v, w in zip(f.values, f.widths)))
    if phi0 == 0.0:
        return body
    if math.isinf(zero_measure):
        raise DomainError("phi(0) != 0 on an infinite zero set: integral diverges")
    return body + phi0 * zero_measure


def common_refinement(*fs: StepFunction):
    """Evaluate several step functions on the union of their breakpoints.

    Returns ``(widths, [values_f1, values_f2, ...])`` over cells covering
    ``[0, max support)``.
    """
    edges = np.unique(np.concatenate([[0.0]] + [f.breakpoints for f in fs]))
    if edges.size < 2:
        return np.zeros(0), [np.zeros(0) for _ in fs]
    mids = 0.5 * (edges[:-1] + edges[1:])
    return np.diff(edges), [f(mids) for f in fs]


def integrate_pointwise(f: StepFunction, g: StepFunction, fn: Callable) -> float:
    """``int_0^inf fn(f(t), g(t)) dt``; ``fn`` must vanish at (0, 0)."""
    widths, (a, b) = common_refinement(f, g)
    return float(np.dot(fn(a, b), widths))


def l1_distance(f: StepFunction, g: StepFunction) -> float:
    return integrate_pointwise(f, g, lambda a, b: np.abs(a - b))


def tensor(f: StepFunction, g: StepFunction) -> StepFunction:
    """Scale of a tensor product: all products of values, widths multiplied."""
    if len(f) == 0 or len(g) == 0:
        return StepFunction.zero()
    v = np.outer(f.values, g.values).ravel()
    w = np.outer(f.widths, g.widths).ravel()
    order = np.argsort(-v, kind="stable")
    return StepFunction(v[order], w[order])


def coarse_grain(f: StepFunction, cell: float) -> StepFunction:
    """Average ``f`` over the grid cells ``[k*cell, (k+1)*cell)``.

    This is the conditional expectation onto the grid; it preserves the
    integral and is majorized by ``f``.  Work is proportional to the number of
    pieces, not the number of cells.
    """
    if cell <= 0:
        raise DomainError("cell width must be positive")
    if len(f) == 0:
        return f
    L = lorenz(f)
    eps = 1e-12
    ends = f.breakpoints / cell
    n_cells = int(math.ceil(ends[-1] - eps))
    bounds = {0, n_cells}
    for e in ends:
        r = round(e)
        if abs(e - r) <= eps * max(1.0, e):
            bounds.add(int(r))
        else:
            # a cell containing a breakpoint gets its own average
            bounds.update((int(math.floor(e)), int(math.floor(e)) + 1))
    edges = np.array(sorted(b for b in bounds if b <= n_cells), dtype=float) * cell
    mass = np.diff(L(edges))
    values = np.minimum.accumulate(np.clip(mass / np.diff(edges), 0.0, None))
    keep = values > 0
    return StepFunction(values[keep], np.diff(edges)[keep])


def power_function(p: float) -> Callable:
    """``x -> x**p``; convex on the half line for p >= 1."""
    return lambda x: np.power(x, p)


def hockey_stick(t: float) -> Callable:
    """``x -> (x - t)_+``."""
    return lambda x: np.maximum(np.asarray(x, dtype=float) - t, 0.0)


def xlogx(x):
    """Convex ``x log x`` with the convention ``0 log 0 = 0``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
