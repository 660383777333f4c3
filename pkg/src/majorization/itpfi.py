"""Finite truncations of infinite tensor products of Powers pairs.

``n`` copies of ``Psi_lambda`` have a marginal with only ``n + 1`` distinct
eigenvalues, so everything here runs on multiplicity-weighted spectral
scales and never builds ``2^n``-dimensional matrices (except for the small
explicit vectors used by the CHSH experiments).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError
from .locc import BipartitePureState, optimal_conversion_fidelity, schmidt_decompose
from .stepfn import DOMINANCE_TOL, StepFunction, coarse_grain, dominates, lorenz, tensor

MAX_COPIES = 30
MAX_EXPLICIT_COPIES = 10


@dataclass(frozen=True)
class PowersModel:
    lam: float
    copies: int = 1

    def __post_init__(self):
        if not 0 <= self.lam <= 1:
            raise DomainError("lambda must lie in [0, 1]")
        if self.copies < 0:
            raise DomainError("number of copies must be nonnegative")

    @property
    def pair_probabilities(self) -> tuple[float, float]:
        return 1 / (1 + self.lam), self.lam / (1 + self.lam)


def powers_marginal_scale(m: PowersModel, cap: int = MAX_COPIES) -> StepFunction:
    """Marginal scale of ``Psi_lambda^{(x) n}``: value ``lam^k/(1+lam)^n`` with width ``C(n, k)``."""
    n = m.copies
    if n > cap:
        raise DomainError(f"{n} copies exceeds the cap of {cap}")
    if m.lam == 0 or n == 0:
        return StepFunction.flat(1.0, 1.0)
    k = np.arange(n + 1)
    values = m.lam ** k / (1 + m.lam) ** n
    widths = np.array([math.comb(n, int(i)) for i in k], dtype=float)
    return StepFunction(values, widths)


def powers_state(m: PowersModel) -> BipartitePureState:
    """Explicit ``Psi_lambda^{(x) n}`` with Alice's qubits grouped first."""
    if m.copies > MAX_EXPLICIT_COPIES:
        raise DomainError(f"explicit Powers states are limited to {MAX_EXPLICIT_COPIES} copies")
    amp = np.sqrt(np.array(m.pair_probabilities))
    diag = np.ones(1)
    for _ in range(m.copies):
        diag = np.kron(diag, amp)
    d = diag.size
    return schmidt_decompose(np.diag(diag).ravel(), d, d)


def distill_target_scale(rho: StepFunction, n: int, tol: float = DOMINANCE_TOL) -> StepFunction:
    """Compress ``rho`` by ``n``: ``rho'(t) = n rho(n t)`` on ``[0, support / n)``.

    Self-checks that ``rho (x) point`` is majorized by ``rho' (x) uniform(n)``.
    """
    if n < 1 or int(n) != n:
        raise DomainError("n must be a positive integer")
    if abs(rho.total - 1.0) > 1e-9:
        raise DomainError("distillation expects a unit-trace scale")
    out = StepFunction(rho.values * n, rho.widths / n)
    lhs = lorenz(tensor(out, StepFunction.flat(1.0 / n, float(n))))
    rhs = lorenz(tensor(rho, StepFunction.flat(1.0, 1.0)))
    if not (dominates(lhs, rhs, tol) and abs(lhs.total - rhs.total) <= tol):
        raise NumericalError("distilled scale failed its majorization self-check")
    return out


CATALYST_MODES = ("fixed", "distilled", "best")


@dataclass
class TrendPoint:
    n: int
    fidelity: float
    fixed: float
    distilled: float | None


def _distilled_catalyst(src: StepFunction, m: int, capacity: float) -> StepFunction | None:
    if m <= 1:
        return None
    omega = coarse_grain(distill_target_scale(src, m), 1.0)
    return omega if omega.support <= capacity * (1 + 1e-12) else None


def trivialization_trend(lam: float, psi: StepFunction, phi: StepFunction, n_list,
                         catalyst: str = "best") -> list[TrendPoint]:
    """LOCC conversion fidelity of ``Omega^{(x) n} (x) Psi`` into a catalysed target.

    ``fixed`` keeps the catalyst: the target is ``Omega^{(x) n} (x) Phi``.
    ``distilled`` lets the catalyst change as well: the target is
    ``Omega' (x) Phi`` where ``Omega'`` is the source compressed by the
    Schmidt rank of ``Phi`` (rounded to whole dimensions, and only when it
    fits in the ``2^n`` catalyst dimensions).  ``best`` reports the larger.
    """
    if catalyst not in CATALYST_MODES:
        raise DomainError(f"catalyst must be one of {CATALYST_MODES}")
    m = int(round(phi.support))
    points = []
    for n in n_list:
        cat = powers_marginal_scale(PowersModel(lam, int(n)))
        src = tensor(cat, psi)
        fixed = optimal_conversion_fidelity(src, tensor(cat, phi))
        distilled = None
        if catalyst != "fixed":
            omega = _distilled_catalyst(src, m, cat.support if lam == 0 else 2.0 ** n)
            if omega is not None:
                distilled = optimal_conversion_fidelity(src, tensor(omega, phi))
        if catalyst == "fixed":
            fid = fixed
        elif catalyst == "distilled":
            fid = distilled if distilled is not None else fixed
        else:
            fid = max(fixed, distilled or 0.0)
        points.append(TrendPoint(int(n), fid, fixed, distilled))
    return points


# ---------------------------------------------------------------- CHSH

def _sign(H: np.ndarray) -> np.ndarray:
    """Hermitian unitary ``sign(H)``; the kernel is sent to ``+1``."""
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    s = np.where(w >= 0, 1.0, -1.0)
    return (V * s) @ V.conj().T


def _abs_trace(H: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(0.5 * (H + H.conj().T))).sum())


def _random_observable(d: int, rng: np.random.Generator) -> np.ndarray:
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return _sign(X + X.conj().T)


@dataclass
class SeesawResult:
    beta: float
    alice: tuple = field(repr=False, default=())
    bob: tuple = field(repr=False, default=())
    restarts: int = 0


def chsh_value(rho: np.ndarray, dims, a1, a2, b1, b2) -> float:
    op = np.kron(a1, b1 + b2) + np.kron(a2, b1 - b2)
    return float(np.real(np.trace(rho @ op)))


def chsh_seesaw(rho, dims=(2, 2), restarts: int = 16, iters: int = 200, seed: int = 0,
                tol: float = 1e-10) -> SeesawResult:
    """Lower bound on the CHSH value of ``rho`` by alternating optimization.

    With Bob fixed, Alice's best observables are ``sign`` of the effective
    operators ``Tr_B[rho (1 (x) (b1 +- b2))]``, and symmetrically for Bob.
    Each restart starts from random Bob observables; the best value wins.
    This is a heuristic, so no global optimality is claimed.
    """
    rho = np.asarray(rho, dtype=complex)
    d_a, d_b = dims
    if rho.shape != (d_a * d_b, d_a * d_b):
        raise DomainError("density matrix does not match the given dimensions")
    R = rho.reshape(d_a, d_b, d_a, d_b)

    def alice_eff(Y):  # Tr_B[rho (1 (x) Y)] acting on A
        return np.einsum("ijkl,lj->ik", R, Y)

    def bob_eff(X):  # Tr_A[rho (X (x) 1)] acting on B
        return np.einsum("ijkl,ki->jl", R, X)

    return _seesaw(alice_eff, bob_eff, d_b, restarts, iters, seed, tol)


def chsh_seesaw_pure(psi: BipartitePureState, restarts: int = 16, iters: int = 200, seed: int = 0,
                     tol: float = 1e-10) -> SeesawResult:
    """Same as :func:`chsh_seesaw` for ``|psi><psi|`` without forming the density matrix."""
    M = psi.matrix

    def alice_eff(Y):
        return M @ Y.T @ M.conj().T

    def bob_eff(X):
        return M.T @ X.T @ M.conj()

    return _seesaw(alice_eff, bob_eff, psi.dims[1], restarts, iters, seed, tol)


def _seesaw(alice_eff, bob_eff, d_b, restarts, iters, seed, tol) -> SeesawResult:
    rng = np.random.default_rng(seed)
    best = SeesawResult(-math.inf, restarts=restarts)
    # the first start uses trivial observables, which already reach the classical value 2
    starts = [(np.eye(d_b, dtype=complex),) * 2]
    starts += [(_random_observable(d_b, rng), _random_observable(d_b, rng)) for _ in range(max(1, restarts))]
    for b1, b2 in starts:
        value = -math.inf
        for _ in range(iters):
            X1, X2 = alice_eff(b1 + b2), alice_eff(b1 - b2)
            a1, a2 = _sign(X1), _sign(X2)
            Y1, Y2 = bob_eff(a1 + a2), bob_eff(a1 - a2)
            b1, b2 = _sign(Y1), _sign(Y2)
            new = _abs_trace(Y1) + _abs_trace(Y2)
            if new - value < tol:
                value = max(value, new)
                break
            value = new
        if value > best.beta:
            best = SeesawResult(value, (a1, a2), (b1, b2), restarts)
    return best


@dataclass
class ExperimentConfig:
    """Inputs of the Powers experiments (``powers`` subcommand and scripts)."""

    lam: float = 0.5
    n_list: list = field(default_factory=lambda: list(range(1, 9)))
    targets: list = field(default_factory=lambda: ["bell"])
    seed: int = 0
    restarts: int = 16
    catalyst: str = "best"

    def __post_init__(self):
        PowersModel(self.lam)
        if self.catalyst not in CATALYST_MODES:
            raise DomainError(f"catalyst must be one of {CATALYST_MODES}")
        if any(int(n) != n or n < 0 or n > MAX_COPIES for n in self.n_list):
            raise DomainError(f"n_list entries must be integers in [0, {MAX_COPIES}]")
