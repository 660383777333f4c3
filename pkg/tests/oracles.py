"""Independent reference computations used by the tests.

None of these call into the package's decision or synthesis code: they
solve the same questions by linear programming, semidefinite programming,
enumeration, or direct linear algebra.
"""
import itertools
import math

import numpy as np
from scipy.optimize import linprog
from scipy.stats import unitary_group


def _min_residual(n_vars, A_ub, b_ub, A_eq, b_eq, X, y):
    """min ||X v - y||_1 subject to the linear constraints on v >= 0."""
    m = y.size
    c = np.concatenate([np.zeros(n_vars), np.ones(m)])
    # X v - y <= s and y - X v <= s
    G = np.block([[X, -np.eye(m)], [-X, -np.eye(m)]])
    h = np.concatenate([y, -y])
    if A_ub is not None:
        G = np.vstack([G, np.hstack([A_ub, np.zeros((A_ub.shape[0], m))])])
        h = np.concatenate([h, b_ub])
    kw = {}
    if A_eq is not None:
        kw = dict(A_eq=np.hstack([A_eq, np.zeros((A_eq.shape[0], m))]), b_eq=b_eq)
    res = linprog(c, A_ub=G, b_ub=h, bounds=(0, None), method="highs", **kw)
    return res.fun if res.status == 0 else np.inf


def ds_feasible(x, y, tol=1e-9):
    """Is there a doubly stochastic D with D x = y?  (LP on the residual.)"""
    x, y = np.asarray(x, float), np.asarray(y, float)
    n = x.size
    A_eq = np.vstack([np.kron(np.eye(n), np.ones(n)), np.kron(np.ones(n), np.eye(n))])
    X = np.kron(np.eye(n), x)  # (D x)_i = sum_j D_ij x_j with D row-major
    return _min_residual(n * n, None, None, A_eq, np.ones(2 * n), X, y) <= tol


def birkhoff_vertex_feasible(x, y, tol=1e-9):
    """Is y a convex combination of permutations of x?  Enumerates all n! vertices."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    perms = list(itertools.permutations(range(x.size)))
    V = np.array([x[list(p)] for p in perms]).T  # columns are permuted copies
    return _min_residual(len(perms), None, None, np.ones((1, len(perms))), [1.0], V, y) <= tol


def lorenz_lp(values, masses, t):
    """sup { int_E f : mu(E) = t } relaxed to fractional sets (a knapsack LP)."""
    values, masses = np.asarray(values, float), np.asarray(masses, float)
    t = min(t, masses.sum())
    res = linprog(-(values * masses), A_eq=[masses], b_eq=[t], bounds=[(0, 1)] * values.size, method="highs")
    return -res.fun


def dss_feasible(f, mu, g, nu, tol=1e-9):
    """Is there T >= 0, T(1) <= 1, nu^T T <= mu, with T f = g?  (LP on the residual.)"""
    f, mu, g, nu = (np.asarray(a, float) for a in (f, mu, g, nu))
    m, n = g.size, f.size
    A_ub = np.vstack([np.kron(np.eye(m), np.ones(n)), np.kron(nu, np.eye(n))])
    b_ub = np.concatenate([np.ones(m), mu])
    return _min_residual(m * n, A_ub, b_ub, None, None, np.kron(np.eye(m), f), g) <= tol


def ky_fan_sdp(rho, k):
    """max Tr(rho P) over 0 <= P <= 1, Tr P = k (the Ky Fan k-norm), by SDP."""
    import cvxpy as cp

    d = rho.shape[0]
    P = cp.Variable((d, d), hermitian=True)
    cons = [P >> 0, np.eye(d) - P >> 0, cp.real(cp.trace(P)) == k]
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(rho @ P))), cons)
    prob.solve(solver="CLARABEL")
    return prob.value


def conversion_fidelity_cvx(p, q):
    """max sum sqrt(q_i w_i) over sorted w majorizing p, by convex programming."""
    import cvxpy as cp

    p = np.sort(np.asarray(p, float))[::-1]
    q = np.sort(np.asarray(q, float))[::-1]
    n = max(p.size, q.size)
    p = np.pad(p, (0, n - p.size)); q = np.pad(q, (0, n - q.size))
    w = cp.Variable(n)
    cons = [w >= 0, cp.sum(w) == 1]
    cons += [w[i] >= w[i + 1] for i in range(n - 1)]
    cons += [cp.sum(w[: k + 1]) >= p[: k + 1].sum() for k in range(n - 1)]
    prob = cp.Problem(cp.Maximize(cp.sum(cp.multiply(np.sqrt(q), cp.sqrt(w)))), cons)
    prob.solve(solver="CLARABEL")
    return prob.value


def rank_truncation_fidelity(M, r):
    """max |<Phi, Omega>|^2 over states Omega of Schmidt rank <= r.

    Eckart-Young: the best rank-r approximation of the coefficient matrix,
    normalized, is optimal.
    """
    U, s, Vh = np.linalg.svd(M)
    Mr = (U[:, :r] * s[:r]) @ Vh[:r]
    Omega = Mr / np.linalg.norm(Mr)
    return abs(np.vdot(M, Omega)) ** 2


def random_state(d_a, d_b, rng, rank=None):
    M = rng.normal(size=(d_a, d_b)) + 1j * rng.normal(size=(d_a, d_b))
    if rank is not None:
        U, s, Vh = np.linalg.svd(M)
        s[rank:] = 0
        M = (U * s) @ Vh[: s.size]
    return (M / np.linalg.norm(M)).ravel()


def random_density(d, rng, rank=None):
    G = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    R = G @ G.conj().T
    return R / np.trace(R).real


def random_unitary(d, rng):
    return unitary_group.rvs(d, random_state=rng)


def random_unitaries(d, n, rng):
    """n Haar unitaries at once: QR of a Ginibre stack with the phase fix of Mezzadri."""
    Z = (rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diagonal(R, axis1=1, axis2=2)
    return Q * (ph / np.abs(ph))[:, None, :]


def t_transform_feasible(x, y, tol=1e-9):
    """Constructive check: run Hardy-Littlewood-Polya T-transforms on sorted x towards y.

    Succeeds iff the partial-sum conditions allow every transfer; returns the
    outcome of checking the final vector against y.
    """
    x = np.sort(np.asarray(x, float))[::-1].copy()
    y = np.sort(np.asarray(y, float))[::-1]
    if abs(x.sum() - y.sum()) > tol:
        return False
    n = x.size
    for _ in range(2 * n):
        d = x - y
        hi = [i for i in range(n) if d[i] > tol]
        if not hi:
            break
        j = hi[-1]
        lo = [k for k in range(j + 1, n) if d[k] < -tol]
        if not lo:
            return False
        k = lo[0]
        t = min(d[j], -d[k])
        x[j] -= t
        x[k] += t
    return bool(np.abs(x - y).max() <= 2 * tol)


def fidelity(rho, sigma):
    """Uhlmann fidelity via matrix square roots computed from eigendecompositions."""
    def sqrtm(A):
        w, V = np.linalg.eigh(A)
        return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T
    return float(np.linalg.svd(sqrtm(rho) @ sqrtm(sigma), compute_uv=False).sum())


def trace_norm(A):
    return float(np.linalg.svd(A, compute_uv=False).sum())


def permutation_l1_min(a, b):
    """min over permutations pi of sum |a_i - b_pi(i)|, by enumeration."""
    return min(float(np.abs(np.asarray(a) - np.asarray(b)[list(p)]).sum())
               for p in itertools.permutations(range(len(a))))


_PAULI = [np.array([[0, 1], [1, 0]], complex), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]], complex)]


def horodecki_chsh(rho):
    """Maximal CHSH value of a two-qubit state: 2 sqrt(m1 + m2) from the correlation matrix."""
    T = np.array([[np.trace(rho @ np.kron(a, b)).real for b in _PAULI] for a in _PAULI])
    m = np.sort(np.linalg.eigvalsh(T.T @ T))[::-1]
    return 2 * math.sqrt(m[0] + m[1])


def chsh_grid(rho, steps=721):
    """Scan Bob's observables cos(t) Z + sin(t) X on a grid; Alice's optimum is the trace norm."""
    ts = np.linspace(0, np.pi, steps)
    R = rho.reshape(2, 2, 2, 2)

    def eff(Y):
        return np.einsum("ijkl,lj->ik", R, Y)

    obs = [np.cos(t) * _PAULI[2] + np.sin(t) * _PAULI[0] for t in ts]
    best = -np.inf
    for b1 in obs:
        for b2 in obs[:: max(1, steps // 181)]:
            v = trace_norm(eff(b1 + b2)) + trace_norm(eff(b1 - b2))
            best = max(best, v)
    return best
