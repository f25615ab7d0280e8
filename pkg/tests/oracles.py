"""Independent reference computations used to produce frozen test values.

Nothing here imports the package's solvers: assembly, eigensolves, Floquet
analysis and ODE integration are redone from scratch with plain numpy and
scipy so that agreement is meaningful.
"""
import numpy as np
import scipy.linalg as la
from scipy.integrate import solve_ivp


def robin_bound_state(t):
    """Bound state energy of -d^2/dx^2 on the half-line with
    sin(pi t) psi'(0) = cos(pi t) psi(0), defined for t in (1/2, 1)."""
    return -1.0 / np.tan(np.pi * t) ** 2


def bloch_bands(v, period=1.0, cells=1, m=256, nk=65):
    """Band ranges of -d^2/dx^2 + v(x) by a Bloch-twisted periodic
    finite-difference cell problem (dense eigensolve per quasi-momentum)."""
    h = period / m
    x = h * np.arange(m)
    lo = np.full(8, np.inf)
    hi = np.full(8, -np.inf)
    for k in np.linspace(0, np.pi, nk):
        A = np.diag(2.0 / h**2 + v(x)).astype(complex)
        A += np.diag(-np.ones(m - 1) / h**2, 1) + np.diag(-np.ones(m - 1) / h**2, -1)
        A[0, -1] = -np.exp(-1j * k) / h**2
        A[-1, 0] = -np.exp(1j * k) / h**2
        w = la.eigvalsh(A)[:8]
        lo = np.minimum(lo, w)
        hi = np.maximum(hi, w)
    return np.column_stack([lo, hi])


def in_bands(E, bands):
    return bool(np.any((bands[:, 0] <= E) & (E <= bands[:, 1])))


def dense_edge_spectrum(v, L, N, dirichlet=True):
    """Dense eigenpairs of -d^2/dx^2 + v on [0, L], Dirichlet at L and
    Dirichlet (or Neumann by a mirrored ghost node) at 0."""
    h = L / N
    if dirichlet:
        x = h * np.arange(1, N)
        A = (np.diag(2.0 / h**2 + v(x)) - np.diag(np.ones(N - 2) / h**2, 1)
             - np.diag(np.ones(N - 2) / h**2, -1))
        w, U = la.eigh(A)
        return x, w, U
    x = h * np.arange(0, N)
    main = 2.0 / h**2 + v(x)
    A = np.diag(main) - np.diag(np.ones(N - 1) / h**2, 1) - np.diag(np.ones(N - 1) / h**2, -1)
    A[0, 1] = -2.0 / h**2  # ghost node psi_{-1} = psi_1
    # symmetrize with the half-weight at the boundary node
    s = np.ones(N)
    s[0] = np.sqrt(0.5)
    A = (A.T * s).T / s  # sqrt(mass) A / sqrt(mass), symmetric
    w, U = la.eigh(A)
    return x, w, U


def dense_flow(potential_t, L, N, E, t_samples=160, window=0.3, near=0.5):
    """Edge spectral flow from dense eigensolves on a fine t-grid.

    Localized eigenvalues near E are followed by sorted pairing between
    consecutive samples; each sign change of (lambda - E) is a crossing,
    downward counted +1.
    """
    h = L / N
    x = h * np.arange(1, N)
    off = -np.ones(N - 2) / h**2
    ts = np.arange(t_samples + 1) / t_samples
    sets = []
    for t in ts:
        A = np.diag(2.0 / h**2 + potential_t(t, x)) + np.diag(off, 1) + np.diag(off, -1)
        w, U = la.eigh(A, subset_by_value=(E - window, E + window))
        mass = np.sum(np.abs(U[x <= near * L]) ** 2, axis=0)
        sets.append(np.sort(w[mass >= 0.9]))
    flow = 0
    crossings = []
    for k in range(t_samples):
        a, b = sets[k], sets[k + 1]
        for lam in a:
            if b.size == 0:
                continue
            mu = b[np.argmin(np.abs(b - lam))]
            if lam > E >= mu:
                flow += 1
                crossings.append(ts[k])
            elif lam <= E < mu:
                flow -= 1
                crossings.append(ts[k])
    return flow, crossings


def dense_junction_flow(vl, vr, chi, L, N, E, t_samples=160, window=0.3):
    """Junction spectral flow on [-L, L] by dense eigensolves."""
    h = L / N
    x = -L + h * np.arange(1, 2 * N)
    off = -np.ones(x.size - 1) / h**2
    ts = np.arange(t_samples + 1) / t_samples
    sets = []
    for t in ts:
        c = chi(x)
        v = vl(t, x) * c + vr(t, x) * (1 - c)
        A = np.diag(2.0 / h**2 + v) + np.diag(off, 1) + np.diag(off, -1)
        w, U = la.eigh(A, subset_by_value=(E - window, E + window))
        mass = np.sum(np.abs(U[np.abs(x) <= L / 2]) ** 2, axis=0)
        sets.append(np.sort(w[mass >= 0.9]))
    flow = 0
    for k in range(t_samples):
        a, b = sets[k], sets[k + 1]
        for lam in a:
            if b.size == 0:
                continue
            mu = b[np.argmin(np.abs(b - lam))]
            if lam > E >= mu:
                flow += 1
            elif lam <= E < mu:
                flow -= 1
    return flow


def shoot_monodromy(v, E, period=1.0):
    """Monodromy of psi'' = (v - E) psi over one period by RK45 at tight tolerance."""
    def rhs(x, y):
        Y = y.reshape(2, 2)
        return np.array([[0.0, 1.0], [v(x) - E, 0.0]]).dot(Y).ravel()
    sol = solve_ivp(rhs, (0.0, period), np.eye(2).ravel(), rtol=1e-12, atol=1e-13)
    return sol.y[:, -1].reshape(2, 2)


def square_well_depth_for(E, half_width):
    """Depth of a square well (zero outside) with an even bound state at E < 0."""
    from scipy.optimize import brentq
    kappa = np.sqrt(-E)

    def f(depth):
        k = np.sqrt(depth + E)
        return k * np.tan(k * half_width) - kappa

    # first branch of tan: k a in (0, pi/2)
    hi = (np.pi / 2 / half_width) ** 2 - E - 1e-9
    return brentq(f, -E + 1e-12, hi)


def dense_line_matrix(values, h):
    """Three-point -d^2/dx^2 + diag(values) with Dirichlet outside the nodes."""
    m = values.size
    off = -np.ones(m - 1) / h**2
    return np.diag(2.0 / h**2 + values) + np.diag(off, 1) + np.diag(off, -1)
