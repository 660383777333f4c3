"""Noncommutative majorization for finite factor models.

Densities are either Hermitian PSD matrices (each eigenvector carries trace
weight ``trace_unit``) or bare spectral scales for factors without a matrix
picture (II_1, II_inf truncations).  Every comparison reduces to the
classical calculus on spectral scales.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import classical
from .errors import DomainError, NotMajorized, NotSubmajorized, NumericalError
from .stepfn import (
    DOMINANCE_TOL,
    StepFunction,
    dominates,
    integrate_pointwise,
    l1_distance,
    lorenz,
    weighted,
    xlogx,
)

RANK_CUTOFF = 1e-12
HERMITIAN_ATOL = 1e-10
DEGENERACY_GAP = 1e-10

KINDS = ("I_n", "I_inf", "II_1", "II_inf")


@dataclass(frozen=True)
class FactorModel:
    """Which factor a density lives on, and how its trace is normalized.

    ``trace_unit`` is the trace of the reference finite projection (a minimal
    projection in type I, one matrix dimension in a truncation).
    ``trace_of_identity`` is ``inf`` for the infinite types.
    """

    kind: str
    n: int | None = None
    trace_unit: float = 1.0
    trace_of_identity: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown factor kind {self.kind!r}")
        if not self.trace_unit > 0:
            raise DomainError("trace_unit must be positive")
        if self.kind == "I_n":
            if self.n is None or self.n < 1:
                raise DomainError("type I_n needs n >= 1")
            tid = self.n * self.trace_unit
            if self.trace_of_identity is not None and not math.isclose(self.trace_of_identity, tid):
                raise DomainError("type I_n requires trace_of_identity = n * trace_unit")
            object.__setattr__(self, "trace_of_identity", tid)
        elif self.kind == "II_1":
            tid = 1.0 if self.trace_of_identity is None else float(self.trace_of_identity)
            if not (0 < tid < math.inf):
                raise DomainError("type II_1 has finite positive trace of the identity")
            object.__setattr__(self, "trace_of_identity", tid)
        else:
            object.__setattr__(self, "trace_of_identity", math.inf)

    @classmethod
    def type_i(cls, n: int, trace_unit: float = 1.0):
        return cls("I_n", n=n, trace_unit=trace_unit)

    @classmethod
    def type_i_inf(cls, trace_unit: float = 1.0):
        return cls("I_inf", trace_unit=trace_unit)

    @classmethod
    def type_ii1(cls, trace_of_identity: float = 1.0):
        return cls("II_1", trace_of_identity=trace_of_identity)

    @classmethod
    def type_ii_inf(cls, trace_unit: float = 1.0):
        # the trace on II_inf is fixed only up to scale; trace_unit pins it
        return cls("II_inf", trace_unit=trace_unit)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.trace_of_identity)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "trace_unit": self.trace_unit}
        if self.n is not None:
            d["n"] = self.n
        if self.kind == "II_1":
            d["trace_of_identity"] = self.trace_of_identity
        return d


@dataclass(frozen=True, eq=False)
class Density:
    """A positive trace-class element: a matrix or a spectral scale.

    For matrices, ``trace_unit`` defaults to the factor's unit, except on
    II_1 where a ``d``-dimensional truncation gets ``trace_of_identity / d``
    per dimension.
    """

    matrix: np.ndarray | None = None
    scale: StepFunction | None = None
    factor: FactorModel = None
    trace_unit: float | None = None

    def __post_init__(self):
        if (self.matrix is None) == (self.scale is None):
            raise DomainError("a Density holds exactly one of matrix or scale")
        factor = self.factor
        if self.matrix is not None:
            M = np.asarray(self.matrix, dtype=complex)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise DomainError("density matrix must be square")
            M.setflags(write=False)
            object.__setattr__(self, "matrix", M)
            d = M.shape[0]
            if factor is None:
                factor = FactorModel.type_i(d)
            if factor.kind == "I_n" and factor.n != d:
                raise DomainError(f"matrix dimension {d} does not match type I_{factor.n}")
            unit = self.trace_unit
            if unit is None:
                unit = factor.trace_of_identity / d if factor.kind == "II_1" else factor.trace_unit
            object.__setattr__(self, "trace_unit", float(unit))
        else:
            if factor is None:
                factor = FactorModel.type_ii_inf()
            if self.scale.support > factor.trace_of_identity * (1 + 1e-12):
                raise DomainError("spectral scale support exceeds the trace of the identity")
            object.__setattr__(self, "trace_unit", factor.trace_unit if self.trace_unit is None else float(self.trace_unit))
        object.__setattr__(self, "factor", factor)

    @classmethod
    def from_scale(cls, scale, factor: FactorModel | None = None) -> "Density":
        if not isinstance(scale, StepFunction):
            scale = StepFunction.from_pieces(scale)
        return cls(scale=scale, factor=factor)

    @classmethod
    def diag(cls, values, factor: FactorModel | None = None) -> "Density":
        return cls(matrix=np.diag(np.asarray(values, dtype=complex)), factor=factor)

    @property
    def is_matrix(self) -> bool:
        return self.matrix is not None

    @property
    def dim(self) -> int:
        if not self.is_matrix:
            raise DomainError("scale densities have no matrix dimension")
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        if self.is_matrix:
            return float(np.real(np.trace(self.matrix))) * self.trace_unit
        return self.scale.total


def _check_hermitian(M: np.ndarray):
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if np.abs(M - M.conj().T).max(initial=0.0) > HERMITIAN_ATOL * scale:
        raise DomainError("density matrix is not Hermitian")


def _eigh(rho: Density):
    M = rho.matrix
    _check_hermitian(M)
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    w, V = w[::-1], V[:, ::-1]
    top = max(float(np.abs(w).max(initial=0.0)), 1e-300)
    if w.size and w[-1] < -HERMITIAN_ATOL * max(1.0, top):
        raise DomainError("density matrix is not positive semidefinite")
    return np.clip(w, 0.0, None), V


def spectral_scale(rho, rank_cutoff: float = RANK_CUTOFF) -> StepFunction:
    """Spectral scale: eigenvalues in decreasing order, each of width ``trace_unit``.

    Eigenvalues at or below ``rank_cutoff * max eigenvalue`` count as zero.
    """
    if isinstance(rho, StepFunction):
        return rho
    if not rho.is_matrix:
        return rho.scale
    w, _ = _eigh(rho)
    if w.size == 0 or w[0] <= 0:
        return StepFunction.zero()
    w = w[w > rank_cutoff * w[0]]
    return StepFunction(w, np.full(w.size, rho.trace_unit))


def eigenblocks(rho: Density, gap: float = DEGENERACY_GAP):
    """Eigenspaces of ``rho`` as ``[(value, basis_columns)]``, values decreasing.

    Eigenvalues closer than ``gap`` (relative to the largest) form one block.
    """
    w, V = _eigh(rho)
    tol = gap * max(1.0, float(w[0]) if w.size else 1.0)
    blocks = []
    start = 0
    for i in range(1, w.size + 1):
        if i == w.size or w[i - 1] - w[i] > tol:
            blocks.append((float(w[start:i].mean()), V[:, start:i]))
            start = i
    return blocks


def q_submajorizes(rho, sigma, tol: float = DOMINANCE_TOL) -> bool:
    """``rho >_w sigma``, decided on spectral scales (models may differ)."""
    return dominates(lorenz(spectral_scale(rho)), lorenz(spectral_scale(sigma)), tol)


def q_majorizes(rho, sigma, tol: float = DOMINANCE_TOL) -> bool:
    a, b = spectral_scale(rho), spectral_scale(sigma)
    if abs(a.total - b.total) > tol * max(a.total, b.total, 1e-300):
        return False
    return dominates(lorenz(a), lorenz(b), tol)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """``X -> sum_k K_k X K_k^*``."""

    kraus: tuple = field(default_factory=tuple)

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if ks and len({k.shape for k in ks}) != 1:
            raise DomainError("Kraus operators must share one shape")
        object.__setattr__(self, "kraus", ks)

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        if not self.kraus:
            return np.zeros_like(X)
        return sum(k @ X @ k.conj().T for k in self.kraus)

    def __len__(self):
        return len(self.kraus)

    def heisenberg_unit(self) -> np.ndarray:
        """``sum K^* K`` (the dual applied to 1); ``<= 1`` iff trace non-increasing."""
        return sum(k.conj().T @ k for k in self.kraus)

    def schrodinger_unit(self) -> np.ndarray:
        """``sum K K^*`` (the channel applied to 1); ``<= 1`` iff subunital."""
        return sum(k @ k.conj().T for k in self.kraus)

    def is_dss(self, atol: float = 1e-10) -> bool:
        for M in (self.heisenberg_unit(), self.schrodinger_unit()):
            if np.linalg.eigvalsh(M).max() > 1 + atol:
                return False
        return True

    def to_dict(self) -> dict:
        return {"kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in k] for k in self.kraus]}


def _channel_from_map(T: np.ndarray, src_blocks, tgt_blocks) -> KrausChannel:
    kraus = []
    for i, (_, Q) in enumerate(tgt_blocks):
        for j, (_, P) in enumerate(src_blocks):
            t = T[i, j]
            if t <= 0:
                continue
            if Q.shape[1] == P.shape[1]:
                kraus.append(math.sqrt(t) * (Q @ P.conj().T))
            else:
                c = math.sqrt(t / P.shape[1])
                for a in range(Q.shape[1]):
                    for b in range(P.shape[1]):
                        kraus.append(c * np.outer(Q[:, a], P[:, b].conj()))
    return KrausChannel(tuple(kraus))


def _block_vectors(rho: Density):
    blocks = eigenblocks(rho)
    values = np.array([v if v > RANK_CUTOFF * max(blocks[0][0], 1e-300) else 0.0 for v, _ in blocks])
    masses = np.array([B.shape[1] for _, B in blocks], dtype=float) * rho.trace_unit
    return blocks, weighted(values, masses)


def _synthesize_channel(rho: Density, sigma: Density, unital: bool) -> KrausChannel:
    if not (rho.is_matrix and sigma.is_matrix):
        raise DomainError("channel synthesis needs matrix densities")
    if not math.isclose(rho.trace_unit, sigma.trace_unit, rel_tol=1e-12):
        raise DomainError("channel synthesis needs equal trace units")
    src, f = _block_vectors(rho)
    tgt, g = _block_vectors(sigma)
    T = classical.synthesize_ds(f, g) if unital else classical.synthesize_dss(f, g)
    ch = _channel_from_map(T.matrix, src, tgt)
    if not ch.is_dss():
        raise NumericalError("synthesized channel is not doubly substochastic")
    err = np.abs(np.linalg.eigvalsh(ch(rho.matrix) - sigma.matrix)).sum() * sigma.trace_unit
    if err > 1e-9 * max(1.0, sigma.trace):
        raise NumericalError(f"synthesized channel misses sigma by {err:.3e} in trace norm")
    return ch


def synthesize_dss_channel(rho: Density, sigma: Density, tol: float = DOMINANCE_TOL) -> KrausChannel:
    """Completely positive, subunital, trace-non-increasing channel with ``T(rho) = sigma``.

    Route: pinch onto the eigenspaces of ``rho``, apply the classical DSS
    matrix between eigenvalue blocks, and re-emit on the eigenspaces of
    ``sigma``.  Blocks of equal dimension are connected by a partial
    isometry, so ``rho == sigma`` yields the pinching onto ``rho``'s
    eigenspaces.
    """
    if not q_submajorizes(rho, sigma, tol):
        raise NotSubmajorized("rho does not submajorize sigma")
    return _synthesize_channel(rho, sigma, unital=False)


def synthesize_ds_channel(rho: Density, sigma: Density, tol: float = DOMINANCE_TOL) -> KrausChannel:
    """Unital trace-preserving channel with ``T(rho) = sigma`` for ``rho > sigma`` of equal dimension."""
    if not q_majorizes(rho, sigma, tol):
        raise NotMajorized("rho does not majorize sigma")
    if rho.dim != sigma.dim:
        raise DomainError("a doubly stochastic channel needs equal dimensions")
    return _synthesize_channel(rho, sigma, unital=True)


def trace_norm(rho: Density, sigma: Density) -> float:
    """``||rho - sigma||_1`` for matrix densities on a common model."""
    D = rho.matrix - sigma.matrix
    return float(np.abs(np.linalg.eigvalsh(0.5 * (D + D.conj().T))).sum()) * rho.trace_unit


def orbit_l1_distance(rho, sigma) -> float:
    """``inf_u ||rho - u sigma u*||_1``, which equals the L1 distance of spectral scales."""
    return l1_distance(spectral_scale(rho), spectral_scale(sigma))


def orbit_fidelity(rho, sigma) -> float:
    """``sup_u F(rho, u sigma u*) = int sqrt(scale_rho * scale_sigma)``."""
    return integrate_pointwise(spectral_scale(rho), spectral_scale(sigma), lambda a, b: np.sqrt(a * b))


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T


def uhlmann_fidelity(rho: Density, sigma: Density) -> float:
    """``Tr |rho^{1/2} sigma^{1/2}|`` with the model's trace."""
    X = _psd_sqrt(rho.matrix) @ _psd_sqrt(sigma.matrix)
    return float(np.linalg.svd(X, compute_uv=False).sum()) * rho.trace_unit


def renyi_entropy(rho, alpha: float) -> float:
    """Renyi entropy from the spectral scale.

    ``alpha = 0`` gives the log of the support trace, ``alpha = 1`` the von
    Neumann entropy ``-Tr rho log rho``; ``alpha = inf`` gives ``-log`` of the
    top of the scale.  Requires unit trace.
    """
    if alpha < 0 or math.isnan(alpha):
        raise DomainError("Renyi order must be nonnegative")
    s = spectral_scale(rho)
    if abs(s.total - 1.0) > 1e-9:
        raise DomainError(f"Renyi entropy needs unit trace (got {s.total!r})")
    if alpha == 0:
        return math.log(s.support)
    if alpha == 1:
        return -float(np.dot(xlogx(s.values), s.widths))
    if math.isinf(alpha):
        return -math.log(float(s.values[0]))
    return math.log(float(np.dot(s.values ** alpha, s.widths))) / (1.0 - alpha)
