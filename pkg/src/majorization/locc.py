"""Bipartite pure-state entanglement: Schmidt data, Nielsen, SLOCC, fidelities.

Vectors in ``C^dA (x) C^dB`` are stored row-major, so a state is the same as
its ``dA x dB`` coefficient matrix ``M`` and ``(a (x) b) Psi`` corresponds to
``a @ M @ b.T``.  All decisions go through the Schmidt scale (the spectral
scale of the A-marginal).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from . import classical
from .errors import DomainError, MalformedProtocol, NotConvertible, NumericalError
from .quantum import Density, FactorModel, renyi_entropy
from .stepfn import (
    DOMINANCE_TOL,
    StepFunction,
    common_refinement,
    dominates,
    lorenz,
    weighted,
)

NORM_ATOL = 1e-10
SCHMIDT_CUTOFF = 1e-12
COMPLETENESS_ATOL = 1e-10
PRUNE_PROBABILITY = 1e-14


def _complete_basis(F: np.ndarray, d: int) -> np.ndarray:
    """Extend orthonormal columns ``F`` (d x r) to a unitary."""
    if F.shape[1] == d:
        return F
    if F.shape[1] == 0:
        return np.eye(d, dtype=complex)
    return np.hstack([F, null_space(F.conj().T)])


@dataclass(frozen=True, eq=False)
class BipartitePureState:
    """``Psi = sum_k c_k a_k (x) b_k`` with ``c`` positive and non-increasing.

    ``frame_a`` (dA x r) and ``frame_b`` (dB x r) hold the Schmidt vectors as
    orthonormal columns.
    """

    coefficients: np.ndarray
    frame_a: np.ndarray
    frame_b: np.ndarray
    factor_a: FactorModel = None
    factor_b: FactorModel = None

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        A = np.asarray(self.frame_a, dtype=complex)
        B = np.asarray(self.frame_b, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise DomainError("need at least one Schmidt coefficient")
        if np.any(c <= 0) or np.any(np.diff(c) > 0):
            raise DomainError("Schmidt coefficients must be positive and non-increasing")
        if abs(float(np.dot(c, c)) - 1.0) > NORM_ATOL:
            raise DomainError("Schmidt coefficients must satisfy sum c^2 = 1")
        c = c / math.sqrt(float(np.dot(c, c)))
        r = c.size
        if A.shape[1] != r or B.shape[1] != r:
            raise DomainError("frames need one column per Schmidt coefficient")
        for name, F in (("frame_a", A), ("frame_b", B)):
            if np.abs(F.conj().T @ F - np.eye(r)).max() > NORM_ATOL:
                raise DomainError(f"{name} columns are not orthonormal")
        fa = self.factor_a or FactorModel.type_i(A.shape[0])
        fb = self.factor_b or FactorModel.type_i(B.shape[0])
        for name, f, d in (("factor_a", fa, A.shape[0]), ("factor_b", fb, B.shape[0])):
            if f.kind == "I_n" and f.n != d:
                raise DomainError(f"{name} does not match local dimension {d}")
        for name, val in (("coefficients", c), ("frame_a", A), ("frame_b", B)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "factor_a", fa)
        object.__setattr__(self, "factor_b", fb)

    @classmethod
    def from_vector(cls, vector, d_a: int, d_b: int, **kw) -> "BipartitePureState":
        return schmidt_decompose(vector, d_a, d_b, **kw)

    @classmethod
    def from_schmidt(cls, triples, dims) -> "BipartitePureState":
        """From ``[(c, i, j), ...]``: ``sum c |i>|j>`` in computational bases."""
        d_a, d_b = dims
        triples = sorted(((float(c), int(i), int(j)) for c, i, j in triples), key=lambda t: -t[0])
        ia = [t[1] for t in triples]
        ib = [t[2] for t in triples]
        if len(set(ia)) != len(ia) or len(set(ib)) != len(ib):
            raise DomainError("Schmidt indices must be distinct on each side")
        if min(ia + ib, default=0) < 0 or max(ia, default=0) >= d_a or max(ib, default=0) >= d_b:
            raise DomainError("Schmidt index out of range")
        eye_a, eye_b = np.eye(d_a, dtype=complex), np.eye(d_b, dtype=complex)
        return cls(np.array([t[0] for t in triples]), eye_a[:, ia], eye_b[:, ib])

    @property
    def dims(self) -> tuple[int, int]:
        return self.frame_a.shape[0], self.frame_b.shape[0]

    @property
    def rank(self) -> int:
        return self.coefficients.size

    @property
    def matrix(self) -> np.ndarray:
        return (self.frame_a * self.coefficients) @ self.frame_b.T

    @property
    def vector(self) -> np.ndarray:
        return self.matrix.ravel()

    def marginal_a(self) -> Density:
        p = self.coefficients ** 2 / self.factor_a.trace_unit
        return Density((self.frame_a * p) @ self.frame_a.conj().T, factor=self.factor_a)

    def marginal_b(self) -> Density:
        p = self.coefficients ** 2 / self.factor_b.trace_unit
        return Density((self.frame_b * p) @ self.frame_b.conj().T, factor=self.factor_b)

    def schmidt_scale(self) -> StepFunction:
        u = self.factor_a.trace_unit
        return StepFunction(self.coefficients ** 2 / u, np.full(self.rank, u))

    def schmidt_rank(self) -> float:
        """Trace-weighted Schmidt rank (the trace of the marginal's support)."""
        return self.rank * self.factor_a.trace_unit

    def local(self, a=None, b=None) -> "BipartitePureState":
        """``(a (x) b) Psi`` for unitaries ``a``, ``b``."""
        M = self.matrix
        if a is not None:
            M = np.asarray(a) @ M
        if b is not None:
            M = M @ np.asarray(b).T
        return schmidt_decompose(M.ravel(), *self.dims)


def schmidt_decompose(vector, d_a: int, d_b: int, cutoff: float = SCHMIDT_CUTOFF) -> BipartitePureState:
    """SVD-based Schmidt decomposition of a unit vector in ``C^dA (x) C^dB``.

    Singular values below ``cutoff`` times the largest are dropped.
    """
    v = np.asarray(vector, dtype=complex).ravel()
    if v.size != d_a * d_b:
        raise DomainError(f"vector has length {v.size}, expected {d_a}*{d_b}")
    nrm = float(np.linalg.norm(v))
    if nrm == 0:
        raise DomainError("zero vector has no Schmidt decomposition")
    if abs(nrm - 1.0) > NORM_ATOL:
        raise DomainError(f"vector is not normalized (norm {nrm!r})")
    M = v.reshape(d_a, d_b)
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    keep = s > cutoff * s[0]
    c = s[keep]
    state = BipartitePureState(c, U[:, keep], Vh[keep].T)
    if np.abs(state.matrix - M).max() > 1e-10:
        raise NumericalError("Schmidt reconstruction error above 1e-10")
    return state


def bell_state(d: int = 2) -> BipartitePureState:
    """Maximally entangled ``d^{-1/2} sum_i |ii>``."""
    return BipartitePureState.from_schmidt([(1 / math.sqrt(d), i, i) for i in range(d)], (d, d))


def product_state(d_a: int = 2, d_b: int = 2) -> BipartitePureState:
    return BipartitePureState.from_schmidt([(1.0, 0, 0)], (d_a, d_b))


def powers_pair(lam: float) -> BipartitePureState:
    """``(1+lam)^{-1/2} (|00> + sqrt(lam) |11>)``."""
    if not 0 <= lam <= 1:
        raise DomainError("lambda must lie in [0, 1]")
    if lam == 0:
        return product_state()
    s = 1 / math.sqrt(1 + lam)
    return BipartitePureState.from_schmidt([(s, 0, 0), (s * math.sqrt(lam), 1, 1)], (2, 2))


def locc_convertible(psi: BipartitePureState, phi: BipartitePureState, tol: float = DOMINANCE_TOL) -> bool:
    """Nielsen: ``psi -> phi`` by LOCC iff the marginal of ``psi`` is majorized by that of ``phi``.

    ``tol`` is Lorenz slack, which quantifies the approximate (closure) form.
    """
    p, q = psi.schmidt_scale(), phi.schmidt_scale()
    if abs(p.total - q.total) > tol:
        return False
    return dominates(lorenz(q), lorenz(p), tol)


def slocc_convertible(psi: BipartitePureState, phi: BipartitePureState) -> bool:
    return psi.schmidt_rank() >= phi.schmidt_rank() * (1 - 1e-12)


def slocc_fidelity(psi: BipartitePureState, phi: BipartitePureState) -> float:
    """Squared fidelity ``sup |<Phi, Omega>|^2`` over ``Omega`` reachable from ``psi`` by SLOCC.

    Equals the Lorenz curve of ``phi``'s marginal at ``psi``'s Schmidt rank.
    """
    return min(1.0, float(lorenz(phi.schmidt_scale())(psi.schmidt_rank())))


def optimal_conversion_fidelity(p: StepFunction, q: StepFunction) -> float:
    """``sup { int sqrt(q * w) : w majorizes p }`` for unit-trace scales ``p``, ``q``.

    Greedy water-filling from the tail: repeatedly take the block ending at
    the current cut whose tail-mass ratio ``dp/dq`` is smallest; each block
    contributes ``sqrt(dp * dq)``.  On a common refinement of ``p`` and ``q``
    the optimizer is constant on cells, so the cells act as atoms.
    """
    for name, s in (("source", p), ("target", q)):
        if abs(s.total - 1.0) > 1e-9:
            raise DomainError(f"{name} scale must have unit trace (got {s.total!r})")
    widths, (pv, qv) = common_refinement(p, q)
    if widths.size == 0:
        return 0.0
    mp, mq = pv * widths, qv * widths
    Ep = np.append(np.cumsum(mp[::-1])[::-1], 0.0)
    Eq = np.append(np.cumsum(mq[::-1])[::-1], 0.0)
    cut = widths.size
    F = 0.0
    while cut > 0:
        dp = Ep[:cut] - Ep[cut]
        dq = Eq[:cut] - Eq[cut]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dq > 0, dp / dq, np.inf)
        if not np.isfinite(ratio).any():
            break
        j = int(np.argmin(ratio))
        F += math.sqrt(max(dp[j], 0.0) * max(dq[j], 0.0))
        cut = j
    return min(F, 1.0)


def locc_conversion_fidelity(psi: BipartitePureState, phi: BipartitePureState) -> float:
    """Best fidelity ``|<Phi, Omega>|`` over LOCC-reachable ``Omega``."""
    return optimal_conversion_fidelity(psi.schmidt_scale(), phi.schmidt_scale())


# ---------------------------------------------------------------- protocols

@dataclass
class Round:
    """One local instrument.  ``instruments`` maps a transcript prefix
    (tuple of earlier outcome labels) to ``{label: Kraus}``; the key ``None``
    is a default used for prefixes without an explicit entry."""

    party: str
    instruments: dict = field(default_factory=dict)

    def instrument_for(self, prefix: tuple) -> dict:
        if prefix in self.instruments:
            return self.instruments[prefix]
        if None in self.instruments:
            return self.instruments[None]
        raise MalformedProtocol(f"round of party {self.party} has no instrument for transcript {prefix}")


@dataclass
class LoccProtocol:
    rounds: list
    dims: tuple

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.validate()

    def validate(self, atol: float = COMPLETENESS_ATOL):
        for r, rnd in enumerate(self.rounds):
            if rnd.party not in ("A", "B"):
                raise MalformedProtocol(f"round {r}: party must be 'A' or 'B'")
            d = self.dims[0] if rnd.party == "A" else self.dims[1]
            for prefix, inst in rnd.instruments.items():
                if not inst:
                    raise MalformedProtocol(f"round {r}: empty instrument")
                C = np.zeros((d, d), dtype=complex)
                for label, K in inst.items():
                    K = np.asarray(K, dtype=complex)
                    if K.shape != (d, d):
                        raise MalformedProtocol(
                            f"round {r}, outcome {label!r}: Kraus shape {K.shape} does not act on party {rnd.party} (dim {d})")
                    C += K.conj().T @ K
                res = float(np.abs(C - np.eye(d)).max())
                if res > atol:
                    raise MalformedProtocol(f"round {r}, transcript {prefix}: completeness residual {res:.3e}")

    def completeness_residuals(self) -> list[float]:
        out = []
        for rnd in self.rounds:
            d = self.dims[0] if rnd.party == "A" else self.dims[1]
            for inst in rnd.instruments.values():
                C = sum(np.asarray(K).conj().T @ np.asarray(K) for K in inst.values())
                out.append(float(np.abs(C - np.eye(d)).max()))
        return out


@dataclass
class Branch:
    probability: float
    vector: np.ndarray
    transcript: tuple


@dataclass
class SimulationResult:
    branches: list
    pruned_mass: float = 0.0

    @property
    def total_probability(self) -> float:
        return sum(b.probability for b in self.branches) + self.pruned_mass

    def fidelities(self, target: BipartitePureState) -> list[float]:
        t = target.vector
        return [float(abs(np.vdot(t, b.vector))) for b in self.branches]

    def average_marginal(self, party: str, dims) -> np.ndarray:
        """Probability-weighted reduced density of ``party`` over all branches."""
        d_a, d_b = dims
        out = 0
        for b in self.branches:
            M = b.vector.reshape(d_a, d_b)
            out = out + b.probability * (M.T @ M.conj() if party == "B" else M @ M.conj().T)
        return out


def simulate_protocol(psi: BipartitePureState, protocol: LoccProtocol, max_rounds: int | None = None,
                      prune: float = PRUNE_PROBABILITY) -> SimulationResult:
    """Enumerate every outcome branch with its probability and normalized output."""
    if psi.dims != protocol.dims:
        raise MalformedProtocol(f"protocol dims {protocol.dims} do not match state dims {psi.dims}")
    live = [(1.0, psi.matrix, ())]
    pruned = 0.0
    rounds = protocol.rounds if max_rounds is None else protocol.rounds[:max_rounds]
    for rnd in rounds:
        nxt = []
        for prob, M, tr in live:
            for label, K in rnd.instrument_for(tr).items():
                K = np.asarray(K, dtype=complex)
                out = K @ M if rnd.party == "A" else M @ K.T
                q = float(np.vdot(out, out).real)
                pb = prob * q
                if pb < prune:
                    pruned += pb
                    continue
                nxt.append((pb, out / math.sqrt(q), tr + (label,)))
        live = nxt
    return SimulationResult([Branch(p, M.ravel(), tr) for p, M, tr in live], pruned)


def _pad(v: np.ndarray, n: int) -> np.ndarray:
    return np.concatenate([v, np.zeros(n - v.size)])


def synthesize_nielsen_protocol(psi: BipartitePureState, phi: BipartitePureState,
                                tol: float = DOMINANCE_TOL) -> LoccProtocol:
    """Two-round LOCC protocol taking ``psi`` to ``phi`` exactly.

    With ``p``, ``q`` the squared Schmidt coefficients, a doubly stochastic
    ``D`` with ``D q = p`` is split as ``sum_x w_x P_x``.  Alice measures
    ``k_x = sqrt(w_x) A_phi diag(sqrt q) P_x^T diag(sqrt p)^+ A_psi^*`` and Bob
    undoes the permutation with the unitary ``B_phi Q_x^T B_psi^*``.
    """
    if psi.dims != phi.dims:
        raise DomainError("Nielsen protocol needs equal local dimensions")
    if not locc_convertible(psi, phi, tol):
        raise NotConvertible("source marginal is not majorized by target marginal")
    d_a, d_b = psi.dims
    n = min(d_a, d_b)
    p = _pad(psi.coefficients ** 2, n)
    q = _pad(phi.coefficients ** 2, n)
    D = classical.synthesize_ds(weighted(q), weighted(p), tol).matrix
    terms = classical.birkhoff_decomposition(D)

    A_psi = _complete_basis(psi.frame_a, d_a)
    A_phi = _complete_basis(phi.frame_a, d_a)
    B_psi = _complete_basis(psi.frame_b, d_b)
    B_phi = _complete_basis(phi.frame_b, d_b)
    sq = np.sqrt(q)
    inv_sp = np.zeros(n)
    inv_sp[: psi.rank] = 1.0 / psi.coefficients

    perms = []
    for _, perm in terms:
        P = np.zeros((n, n))
        P[np.arange(n), perm] = 1.0
        perms.append(P)
    # Birkhoff leaves ~1e-13 of mass behind; rescale on the support so that
    # sum k^* k is exactly the identity there
    diag = sum(w * (P @ q) for (w, _), P in zip(terms, perms)) * inv_sp ** 2
    inv_sp[: psi.rank] /= np.sqrt(diag[: psi.rank])

    alice, bob = {}, {}
    for x, ((w, _), P) in enumerate(zip(terms, perms)):
        core = np.zeros((d_a, d_a), dtype=complex)
        core[:n, :n] = math.sqrt(w) * (sq[:, None] * P.T) * inv_sp[None, :]
        alice[f"x{x}"] = A_phi @ core @ A_psi.conj().T
        Q = np.eye(d_b, dtype=complex)
        Q[:n, :n] = P
        bob[(f"x{x}",)] = {"ok": B_phi @ Q.T @ B_psi.conj().T}
    if psi.rank < d_a:
        alice["perp"] = A_psi[:, psi.rank:] @ A_psi[:, psi.rank:].conj().T
        bob[("perp",)] = {"ok": np.eye(d_b, dtype=complex)}

    C = sum(K.conj().T @ K for K in alice.values())
    res = float(np.abs(C - np.eye(d_a)).max())
    if res > COMPLETENESS_ATOL:
        raise NumericalError(f"Alice's instrument has completeness residual {res:.3e}")
    return LoccProtocol([Round("A", {(): alice}), Round("B", bob)], (d_a, d_b))


def identity_protocol(dims) -> LoccProtocol:
    return LoccProtocol([Round("A", {(): {"id": np.eye(dims[0], dtype=complex)}})], dims)


# ---------------------------------------------------------------- monotones

@dataclass
class Monotones:
    renyi: dict
    schmidt_rank: float
    lorenz_knots: list

    def to_dict(self) -> dict:
        return {"renyi": {str(k): v for k, v in self.renyi.items()},
                "schmidt_rank": self.schmidt_rank,
                "lorenz_knots": [list(k) for k in self.lorenz_knots]}


DEFAULT_ALPHAS = (0.0, 0.5, 1.0, 2.0, math.inf)


def monotones(psi: BipartitePureState, alphas=DEFAULT_ALPHAS) -> Monotones:
    """Renyi entanglement entropies, Schmidt rank and Lorenz knots of ``psi``.

    The A-side values are cross-checked against the B-marginal spectrum.
    """
    s = psi.schmidt_scale()
    eb = np.sort(np.linalg.eigvalsh(psi.marginal_b().matrix))[::-1][: psi.rank] * psi.factor_b.trace_unit
    if np.abs(eb - psi.coefficients ** 2).max() > 1e-10:
        raise NumericalError("A and B marginals have different spectra")
    return Monotones({a: renyi_entropy(s, a) for a in alphas}, psi.schmidt_rank(), lorenz(s).knots)


# ---------------------------------------------------------------- purification

def canonical_purification(omega: Density) -> np.ndarray:
    """``Omega_omega = omega^{1/2}`` viewed as a vector of ``C^d (x) C^d``."""
    w, V = np.linalg.eigh(omega.matrix)
    root = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    return root.ravel() * math.sqrt(omega.trace_unit)


@dataclass
class PurificationEstimate:
    distance_sq: float
    trace_distance: float
    product_bound: float

    @property
    def holds(self) -> bool:
        return self.holds_within(1e-10)

    def holds_within(self, atol: float) -> bool:
        return (self.distance_sq <= self.trace_distance + atol
                and self.trace_distance <= self.product_bound + atol)


def purification_estimate(omega: Density, phi: Density) -> PurificationEstimate:
    """``||O_w - O_f||^2 <= ||w - f||_1 <= ||O_w - O_f|| ||O_w + O_f||``."""
    a, b = canonical_purification(omega), canonical_purification(phi)
    D = omega.matrix - phi.matrix
    tn = float(np.abs(np.linalg.eigvalsh(0.5 * (D + D.conj().T))).sum()) * omega.trace_unit
    return PurificationEstimate(float(np.linalg.norm(a - b) ** 2), tn,
                                float(np.linalg.norm(a - b) * np.linalg.norm(a + b)))
