"""Majorization on discrete measure spaces and stochastic-map synthesis.

Conventions.  A map ``T`` from ``(X, mu)`` to ``(Y, nu)`` is stored as a
``len(Y) x len(X)`` nonnegative matrix acting on densities,
``T(f)_i = sum_j T_ij f_j``.  It is doubly substochastic (DSS) when

* ``T(1) <= 1``:  every row sum ``sum_j T_ij`` is at most one, and
* it does not increase integrals: ``sum_i nu_i T_ij <= mu_j`` for each source atom.

Doubly stochastic (DS) means both hold with equality.  For unit masses these
are the familiar row/column sum conditions.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    BirkhoffResidual,
    DomainError,
    NotExtendable,
    NotMajorized,
    NotSubmajorized,
    NumericalError,
    PreconditionError,
)
from .stepfn import (
    DOMINANCE_TOL,
    DiscreteMeasureSpace,
    WeightedVector,
    as_weighted,
    dominates,
    lorenz,
    rearrange,
    weighted,
)

CONSTRAINT_ATOL = 1e-12
ACTION_RTOL = 1e-10
MAX_GRID_ATOMS = 4096  # the cell-level DS matrix is dense
MAX_DENOMINATOR = 10**6


@dataclass(frozen=True, eq=False)
class StochasticMap:
    matrix: np.ndarray
    source_masses: np.ndarray
    target_masses: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.matrix, dtype=float)
        mu = np.asarray(self.source_masses, dtype=float)
        nu = np.asarray(self.target_masses, dtype=float)
        if T.shape != (nu.size, mu.size):
            raise DomainError(f"matrix shape {T.shape} does not match masses ({nu.size}, {mu.size})")
        if np.any(T < 0):
            raise DomainError("stochastic maps have nonnegative entries")
        for a in (T, mu, nu):
            a.setflags(write=False)
        object.__setattr__(self, "matrix", T)
        object.__setattr__(self, "source_masses", mu)
        object.__setattr__(self, "target_masses", nu)

    def __call__(self, values) -> np.ndarray:
        return self.matrix @ np.asarray(values, dtype=float)

    def apply(self, f: WeightedVector) -> WeightedVector:
        return WeightedVector(self(f.values), DiscreteMeasureSpace(self.target_masses))

    @property
    def row_sums(self) -> np.ndarray:
        """``T(1)``."""
        return self.matrix.sum(axis=1)

    @property
    def column_masses(self) -> np.ndarray:
        """``sum_i nu_i T_ij``; compare with the source masses."""
        return self.target_masses @ self.matrix

    def dual(self) -> "StochasticMap":
        """The adjoint w.r.t. the two measures: ``int g T(f) dnu = int T*(g) f dmu``."""
        M = (self.matrix * self.target_masses[:, None]).T / self.source_masses[:, None]
        return StochasticMap(M, self.target_masses, self.source_masses)

    def is_dss(self, atol: float = CONSTRAINT_ATOL) -> bool:
        return bool(np.all(self.row_sums <= 1 + atol) and np.all(self.column_masses <= self.source_masses + atol))

    def is_ds(self, atol: float = CONSTRAINT_ATOL) -> bool:
        return bool(
            np.allclose(self.row_sums, 1.0, rtol=0, atol=atol)
            and np.allclose(self.column_masses, self.source_masses, rtol=0, atol=atol)
        )

    def to_dict(self) -> dict:
        return {
            "source_masses": self.source_masses.tolist(),
            "target_masses": self.target_masses.tolist(),
            "matrix": self.matrix.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "StochasticMap":
        return cls(np.array(d["matrix"], dtype=float), d["source_masses"], d["target_masses"])


def check_submajorization(f, g, tol: float = DOMINANCE_TOL) -> bool:
    """``f >_w g``: the Lorenz curve of ``f`` dominates that of ``g``."""
    return dominates(lorenz(rearrange(f)), lorenz(rearrange(g)), tol)


def check_majorization(f, g, tol: float = DOMINANCE_TOL) -> bool:
    """``f > g``: submajorization plus equal integrals (relative ``tol``)."""
    f, g = as_weighted(f), as_weighted(g)
    scale = max(f.integral, g.integral, 1e-300)
    if abs(f.integral - g.integral) > tol * scale:
        return False
    return check_submajorization(f, g, tol)


def hockey_stick_dominates(f, g, tol: float = DOMINANCE_TOL) -> bool:
    """``int (f - t)_+ >= int (g - t)_+`` at every value of either function.

    Both sides are convex and piecewise linear in ``t`` with kinks only at
    function values, so the breakpoints decide the inequality.
    """
    f, g = as_weighted(f), as_weighted(g)
    ts = np.union1d(np.append(f.values, 0.0), np.append(g.values, 0.0))

    def excess(h, t):
        return np.maximum(h.values[None, :] - t[:, None], 0.0) @ h.masses

    scale = max(f.integral, g.integral)
    if scale == 0:
        return True
    return bool(np.all(excess(f, ts) >= excess(g, ts) - tol * scale))


# ---------------------------------------------------------------------------
# T-transform chain

def t_transform_chain(x, y, eps: float = 1e-15):
    """Doubly stochastic ``D`` with ``D @ x = y`` for sorted ``x > y``.

    Hardy-Littlewood-Polya construction: repeatedly pick the last index ``j``
    with ``x_j > y_j`` and the first ``k > j`` with ``x_k < y_k`` and move
    ``min(x_j - y_j, y_k - x_k)`` from ``j`` to ``k`` with a T-transform.
    Each step settles at least one coordinate, so there are at most
    ``n - 1`` steps.  Returns ``(D, steps)`` where ``steps`` lists
    ``(j, k, lam)`` with ``T = lam*I + (1-lam)*swap(j, k)``.
    """
    x = np.array(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if y.size != n:
        raise DomainError("t_transform_chain: length mismatch")
    D = np.eye(n)
    steps = []
    thresh = eps * max(1.0, float(np.abs(x).max(initial=0.0)), float(np.abs(y).max(initial=0.0)))
    settled = np.zeros(n, dtype=bool)
    for _ in range(2 * n + 1):
        diff = x - y
        settled |= np.abs(diff) <= thresh
        pos = np.flatnonzero((diff > 0) & ~settled)
        if pos.size == 0:
            break
        j = pos[-1]
        neg = np.flatnonzero((diff < 0) & ~settled)
        neg = neg[neg > j]
        if neg.size == 0:
            break
        k = neg[0]
        delta = min(diff[j], -diff[k])
        gap = x[j] - x[k]
        lam = 1.0 - delta / gap
        rj, rk = D[j].copy(), D[k].copy()
        D[j] = lam * rj + (1 - lam) * rk
        D[k] = (1 - lam) * rj + lam * rk
        if diff[j] <= -diff[k]:
            x[k] += diff[j]
            x[j] = y[j]
            settled[j] = True
        else:
            x[j] += diff[k]
            x[k] = y[k]
            settled[k] = True
        steps.append((int(j), int(k), float(lam)))
    return D, steps


def _mass_grid(masses: np.ndarray, cap: int = MAX_GRID_ATOMS):
    """Common unit ``delta`` with every mass an integer multiple of it."""
    fracs = []
    for m in masses:
        fr = Fraction(float(m)).limit_denominator(MAX_DENOMINATOR)
        if abs(float(fr) - m) > 1e-12 * m:
            raise DomainError(f"mass {m!r} is not commensurable on a grid with denominator <= {MAX_DENOMINATOR}")
        fracs.append(fr)
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fracs), 1)
    nums = [f.numerator * (den // f.denominator) for f in fracs]
    g = reduce(math.gcd, nums)
    total = sum(n // g for n in nums)
    if total > cap:
        raise DomainError(f"mass grid needs {total} atoms (cap {cap})")
    return float(Fraction(g, den)), np.array([n // g for n in nums], dtype=np.int64)


def _ds_on_cells(x_cells: np.ndarray, y_cells: np.ndarray) -> np.ndarray:
    """DS matrix mapping equal-mass cells ``x`` onto ``y`` (any order)."""
    px = np.argsort(-x_cells, kind="stable")
    py = np.argsort(-y_cells, kind="stable")
    Ds, _ = t_transform_chain(x_cells[px], y_cells[py])
    D = np.empty_like(Ds)
    D[np.ix_(py, px)] = Ds
    return D


def _pad_tails(f: WeightedVector, g: WeightedVector):
    """Equalize the finite parts of two spaces, borrowing from infinite tails."""
    mf, mg = float(f.masses.sum()), float(g.masses.sum())
    ft, gt = f.space.infinite_tail, g.space.infinite_tail
    if ft != gt:
        raise NotExtendable("exactly one space has infinite measure; no DS map exists")
    if not ft:
        if abs(mf - mg) > 1e-12 * max(mf, mg):
            raise NotExtendable(f"total measures differ ({mf} vs {mg}); no DS map exists")
        return f, g, f.space.size, g.space.size
    extra_f, extra_g = max(mg - mf, 0.0), max(mf - mg, 0.0)

    def pad(h, extra):
        if extra <= 1e-12 * max(mf, mg):
            return h
        return weighted(np.append(h.values, 0.0), np.append(h.masses, extra))

    return pad(f, extra_f), pad(g, extra_g), f.space.size, g.space.size


def _ds_between(f: WeightedVector, g: WeightedVector) -> np.ndarray:
    """DS matrix from ``f``'s space to ``g``'s space (equal total mass) with ``T f = g``."""
    delta, kf = _mass_grid(np.concatenate([f.masses, g.masses]))
    kf, kg = kf[: f.space.size], kf[f.space.size:]
    x = np.repeat(f.values, kf)
    y = np.repeat(g.values, kg)
    if x.size != y.size:
        raise NotExtendable("measure spaces have different total mass")
    D = _ds_on_cells(x, y)
    src = np.repeat(np.arange(kf.size), kf)
    tgt = np.repeat(np.arange(kg.size), kg)
    T = np.zeros((kg.size, kf.size))
    np.add.at(T, (tgt[:, None], src[None, :]), D)
    return T / kg[:, None]


def _verify(T: StochasticMap, f: WeightedVector, g: WeightedVector, ds: bool):
    ok = T.is_ds() if ds else T.is_dss()
    if not ok:
        raise NumericalError("synthesized map violates its stochasticity constraints")
    err = float(np.abs(T(f.values) - g.values) @ g.masses)
    if err > ACTION_RTOL * max(1.0, g.integral):
        raise NumericalError(f"synthesized map misses the target by {err:.3e} in L1")


def synthesize_ds(f, g, tol: float = DOMINANCE_TOL) -> StochasticMap:
    """Doubly stochastic ``T`` with ``T(f) = g``, given ``f > g``.

    Atoms are refined to a common mass grid, the T-transform chain runs on
    the sorted cell values, and the result is averaged back onto the atoms.
    Raises :class:`NotMajorized` if ``f`` does not majorize ``g`` and
    :class:`NotExtendable` if the two measure spaces cannot carry a DS map.
    """
    f, g = as_weighted(f), as_weighted(g)
    if not check_majorization(f, g, tol):
        raise NotMajorized("f does not majorize g")
    fp, gp, nf, ng = _pad_tails(f, g)
    T = _ds_between(fp, gp)
    if fp.space.size > nf or gp.space.size > ng:
        # borrowed tail atoms: keep only the finite block; tails map onto tails
        T = T[:ng, :nf]
        S = StochasticMap(T, f.masses, g.masses)
        _verify(S, f, g, ds=False)
        return S
    S = StochasticMap(T, f.masses, g.masses)
    _verify(S, f, g, ds=True)
    return S


def synthesize_dss(f, g, tol: float = DOMINANCE_TOL) -> StochasticMap:
    """Doubly substochastic ``T`` with ``T(f) = g``, given ``f >_w g``.

    First the smallest atoms of ``f`` are switched off (a multiplication
    operator, itself DSS) for as long as what remains still has integral at
    least ``int g``; this keeps ``f' >_w g``.  The remaining excess
    ``int f' - int g`` is routed into a sink atom appended to the target,
    valued no higher than the smallest kept value of ``f`` so the padded
    target is majorized by ``f'``.  After DS synthesis the sink row is
    dropped, and rows outside ``supp g`` and columns outside ``supp f`` are
    zeroed so that ``T(chi_supp f) <= chi_supp g`` and
    ``T*(chi_supp g) <= chi_supp f``.
    """
    f, g = as_weighted(f), as_weighted(g)
    if not check_submajorization(f, g, tol):
        raise NotSubmajorized("f does not submajorize g")
    nf, ng = f.space.size, g.space.size
    if g.integral == 0.0:
        return StochasticMap(np.zeros((ng, nf)), f.masses, g.masses)
    delta, _ = _mass_grid(np.concatenate([f.masses, g.masses]))

    # keep the largest atoms of f until their integral reaches int g
    order = np.argsort(-f.values, kind="stable")
    cum = np.cumsum(f.values[order] * f.masses[order])
    k = min(int(np.searchsorted(cum, g.integral * (1 - 1e-15))), nf - 1)
    keep = np.zeros(nf, dtype=bool)
    keep[order[: k + 1]] = True
    keep &= f.values > 0
    sv = np.where(keep, f.values, 0.0)
    gap = float(sv @ f.masses) - g.integral

    tv, tm = g.values.copy(), g.masses.copy()
    if gap > 1e-15 * f.integral:
        floor = float(sv[keep].min())
        sink = delta * math.ceil(gap / (floor * delta) * (1 + 1e-12))
        tv, tm = np.append(tv, gap / sink), np.append(tm, sink)
    sm = f.masses.copy()
    mf, mt = sm.sum(), tm.sum()
    # equalize total measures with zero-valued filler atoms on the short side
    if mt > mf:
        sv, sm = np.append(sv, 0.0), np.append(sm, mt - mf)
    elif mf > mt:
        tv, tm = np.append(tv, 0.0), np.append(tm, mf - mt)
    T = _ds_between(weighted(sv, sm), weighted(tv, tm))[:ng, :nf]
    T = T * g.support_mask[:, None] * keep[None, :]
    S = StochasticMap(T, f.masses, g.masses)
    _verify(S, f, g, ds=False)
    return S


@dataclass(frozen=True)
class ExtensionResult:
    exists: bool
    lhs: float
    rhs: float
    extension: StochasticMap | None


def ds_extension_exists(T: StochasticMap, support=None, f=None, g=None, *, source_tail: bool = False,
                        target_tail: bool = False, tol: float = 1e-12) -> ExtensionResult:
    """Decide whether a DSS map that preserves integrals on ``support`` has a DS extension.

    The balance condition is ``mu(X \\ Omega) = int_Y (1 - T(chi_Omega)) dnu``,
    both sides possibly infinite (``source_tail`` / ``target_tail`` mark
    infinite zero tails).  When it holds on finite spaces the extension
    ``T~(h) = T(chi_Omega h) + w * int_{X\\Omega} h dmu / mu(X\\Omega)`` with
    ``w = 1 - T(chi_Omega)`` is returned; with infinite tails the extension
    exists but is not a finite matrix and ``extension`` is ``None``.

    ``support`` defaults to ``supp f``; if both ``f`` and ``g`` are given the
    call also checks ``T(f) = g``.
    """
    mu, nu = T.source_masses, T.target_masses
    if support is None:
        if f is None:
            raise PreconditionError("either support or f is required")
        support = as_weighted(f).support_mask
    omega = np.zeros(mu.size, dtype=bool)
    omega[np.asarray(support)] = True
    if not T.is_dss():
        raise PreconditionError("T is not doubly substochastic")
    if not np.allclose(T.column_masses[omega], mu[omega], rtol=0, atol=1e-10):
        raise PreconditionError("T is not integral-preserving on the support")
    if f is not None and g is not None:
        fv, gv = as_weighted(f), as_weighted(g)
        if np.abs(T(fv.values) - gv.values) @ nu > ACTION_RTOL * max(1.0, gv.integral):
            raise PreconditionError("T(f) != g")
    w = 1.0 - T.matrix[:, omega].sum(axis=1)
    lhs = math.inf if source_tail else float(mu[~omega].sum())
    rhs = math.inf if target_tail else float(w @ nu)
    if math.isinf(lhs) or math.isinf(rhs):
        exists = math.isinf(lhs) and math.isinf(rhs) and float(mu[omega].sum()) < math.inf
        return ExtensionResult(exists, lhs, rhs, None)
    exists = abs(lhs - rhs) <= tol * max(1.0, lhs, rhs)
    if not exists:
        return ExtensionResult(False, lhs, rhs, None)
    M = T.matrix.copy()
    M[:, ~omega] = 0.0
    rest = float(mu[~omega].sum())
    if rest > 0:
        M[:, ~omega] = np.outer(w, mu[~omega] / rest)
    ext = StochasticMap(M, mu, nu)
    if not ext.is_ds(atol=1e-10):
        raise NumericalError("constructed extension is not doubly stochastic")
    return ExtensionResult(True, lhs, rhs, ext)


# ---------------------------------------------------------------------------
# Birkhoff decomposition

def birkhoff_decomposition(D, eps: float = 1e-13, residual_tol: float = 1e-9):
    """Split a doubly stochastic matrix into weighted permutations.

    Each step extracts a perfect matching on the positive entries (maximum
    product of entries, via ``linear_sum_assignment`` on ``-log D``) and
    subtracts its bottleneck weight.  Returns ``[(weight, perm)]`` where
    ``perm[i]`` is the column matched to row ``i``.  Raises
    :class:`BirkhoffResidual` if more than ``residual_tol`` of the mass
    (per row) is left over.
    """
    R = np.array(D, dtype=float)
    n = R.shape[0]
    if R.shape != (n, n):
        raise DomainError("birkhoff_decomposition needs a square matrix")
    terms = []
    for _ in range(n * n + 1):
        if R.max(initial=0.0) <= eps:
            break
        with np.errstate(divide="ignore"):
            cost = np.where(R > eps, -np.log(np.where(R > eps, R, 1.0)), 1e6)
        rows, cols = linear_sum_assignment(cost)
        picked = R[rows, cols]
        if np.any(picked <= eps):
            break
        w = float(picked.min())
        R[rows, cols] -= w
        R[R < 0] = 0.0
        terms.append((w, cols.copy()))
    residual = float(R.sum()) / max(n, 1)
    if residual > residual_tol:
        raise BirkhoffResidual(f"Birkhoff extraction left residual mass {residual:.3e}")
    return terms
