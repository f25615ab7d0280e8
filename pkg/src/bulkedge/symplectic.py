"""Symplectic linear algebra on C^n x C^n.

Planes are stored as frames: 2n x n matrices whose columns span the plane.
The upper block is the value block X and the lower block the derivative
block Y, matching the Cauchy data (psi(0), psi'(0)) of an n-channel ODE.

A Lagrangian plane is encoded equivalently by an n x n unitary

    U = (X + iY)(X - iY)^{-1},

so that Dirichlet maps to -I and Neumann to +I.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.stats import unitary_group

from .errors import NotLagrangianError, NotUnitaryError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "symplectic_J", "omega", "LagrangianFrame", "plane_to_unitary",
    "unitary_to_plane", "robin_plane", "dirichlet_plane", "neumann_plane",
    "intersection_dimension", "plane_distance", "check_no_lagrangian",
    "lagrangian_dimensions", "haar_unitary", "random_lagrangian",
    "check_unitary",
]


def symplectic_J(n):
    """Return the 2n x 2n matrix [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]]).astype(complex)


def omega(z1, z2):
    """Canonical symplectic form, conjugate-linear in the first slot.

    omega(z1, z2) = <x1, y2> - <x2, y1> where z1 = (x1, x2), z2 = (y1, y2).
    """
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    if z1.shape != z2.shape or z1.ndim != 1 or z1.size % 2:
        raise ValueError(f"omega needs two vectors of equal even length, "
                         f"got shapes {z1.shape} and {z2.shape}")
    n = z1.size // 2
    return np.vdot(z1[:n], z2[n:]) - np.vdot(z1[n:], z2[:n])


@dataclass(frozen=True, eq=False)
class LagrangianFrame:
    """A full-rank 2n x n frame spanning a Lagrangian plane of C^{2n}.

    The frame is validated on construction (rank and isotropy) unless
    ``check=False``.  Use :meth:`orthonormalized` to get a frame with
    orthonormal columns; every propagation routine returns one.
    """

    frame: np.ndarray
    check: bool = True
    tol: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        F = np.array(self.frame, dtype=complex)
        if F.ndim != 2 or F.shape[0] != 2 * F.shape[1]:
            raise NotLagrangianError(f"frame must be 2n x n, got {F.shape}")
        F.setflags(write=False)
        object.__setattr__(self, "frame", F)
        if self.check:
            smin = la.svdvals(F)[-1]
            scale = np.linalg.norm(F, 2)
            if smin < self.tol.rank * max(scale, 1.0):
                raise NotLagrangianError(
                    f"frame is rank deficient (sigma_min={smin:.3e})")
            res = self.isotropy_residual()
            if res > self.tol.iso * max(scale**2, 1.0):
                raise NotLagrangianError(
                    f"frame is not isotropic (||F*JF||={res:.3e})")

    @property
    def n(self):
        return self.frame.shape[1]

    @property
    def X(self):
        return self.frame[: self.n]

    @property
    def Y(self):
        return self.frame[self.n:]

    def isotropy_residual(self):
        F = self.frame
        n = self.n
        # F* J F = X*Y - Y*X
        G = F[:n].conj().T @ F[n:] - F[n:].conj().T @ F[:n]
        return np.linalg.norm(G, 2)

    def orthonormalized(self):
        Q, _ = np.linalg.qr(self.frame)
        return LagrangianFrame(Q, check=False, tol=self.tol)

    def projector(self):
        """Orthogonal projector onto the plane."""
        Q, _ = np.linalg.qr(self.frame)
        return Q @ Q.conj().T

    def annihilator_rows(self):
        """n x 2n constraint matrix C = F* J; the plane is Ker C."""
        return np.hstack([-self.Y.conj().T, self.X.conj().T])

    def unitary(self):
        return plane_to_unitary(self)

    def __repr__(self):
        return f"LagrangianFrame(n={self.n})"


def _as_frame(F, tol=DEFAULT_TOLERANCES):
    if isinstance(F, LagrangianFrame):
        return F
    return LagrangianFrame(F, tol=tol)


def check_unitary(U, tol=DEFAULT_TOLERANCES):
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise NotUnitaryError(f"expected a square matrix, got {U.shape}")
    res = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2)
    if res > tol.uni:
        raise NotUnitaryError(f"matrix is not unitary (residual {res:.3e})")
    return U


def plane_to_unitary(F, tol=DEFAULT_TOLERANCES):
    """Unitary (X + iY)(X - iY)^{-1} of a Lagrangian frame.

    The result does not depend on the choice of basis of the plane.

    Raises
    ------
    NotLagrangianError
        If X - iY is numerically singular, which cannot happen for a
        Lagrangian plane.
    """
    F = _as_frame(F, tol)
    Fo = F.orthonormalized()
    X, Y = Fo.X, Fo.Y
    A = X - 1j * Y
    B = X + 1j * Y
    # For orthonormal Lagrangian frames A/sqrt(2) is unitary, so cond(A) ~ 1.
    if np.linalg.cond(A) > 1e8:
        raise NotLagrangianError("X - iY is singular; frame is not Lagrangian")
    U = np.linalg.solve(A.T, B.T).T
    res = np.linalg.norm(U.conj().T @ U - np.eye(F.n), 2)
    if res > tol.uni:
        raise NotLagrangianError(
            f"unitary image fails unitarity ({res:.3e}); frame is not Lagrangian")
    return U


def unitary_to_plane(U, tol=DEFAULT_TOLERANCES):
    """Frame [I + U; i(I - U)] of the plane encoded by U, orthonormalized."""
    U = check_unitary(U, tol)
    n = U.shape[0]
    eye = np.eye(n)
    F = np.vstack([eye + U, 1j * (eye - U)])
    Q, _ = np.linalg.qr(F)
    return LagrangianFrame(Q, tol=tol)


def _hermitian_check(M, name):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if not np.allclose(M, M.conj().T, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ValueError(f"{name} is not hermitian")
    return M


def robin_plane(Theta, Pi, tol=DEFAULT_TOLERANCES):
    """Plane {(Theta x, Pi x)} for commuting hermitian Theta, Pi.

    Theta = 0, Pi = I gives Dirichlet; Theta = I, Pi = 0 gives Neumann.
    """
    Theta = _hermitian_check(Theta, "Theta")
    Pi = _hermitian_check(Pi, "Pi")
    if Theta.shape != Pi.shape:
        raise ValueError("Theta and Pi must have the same shape")
    scale = max(1.0, np.abs(Theta).max(), np.abs(Pi).max())
    if not np.allclose(Theta @ Pi, Pi @ Theta, atol=1e-12 * scale**2):
        raise ValueError("Theta and Pi do not commute")
    n = Theta.shape[0]
    s_theta = la.svdvals(Theta)[-1]
    s_pi = la.svdvals(Pi)[-1]
    if max(s_theta, s_pi) < tol.rank * scale:
        raise ValueError("neither Theta nor Pi is invertible")
    return LagrangianFrame(np.vstack([Theta, Pi]), tol=tol)


def dirichlet_plane(n):
    return LagrangianFrame(np.vstack([np.zeros((n, n)), np.eye(n)]))


def neumann_plane(n):
    return LagrangianFrame(np.vstack([np.eye(n), np.zeros((n, n))]))


def intersection_dimension(F1, F2, tol=None, tolerances=DEFAULT_TOLERANCES,
                           return_both=False):
    """Dimension of the intersection of two Lagrangian planes.

    Computed twice: from the rank of [F1 | F2], and from the number of
    eigenvalues of U2* U1 within ``tol`` of 1.  The two counts must agree.
    """
    F1 = _as_frame(F1, tolerances).orthonormalized()
    F2 = _as_frame(F2, tolerances).orthonormalized()
    if F1.n != F2.n:
        raise ValueError("planes live in different spaces")
    tol = tolerances.intersect if tol is None else tol
    n = F1.n
    # For orthonormal frames, an eigenphase theta of U2*U1 near 0 shows up
    # as a singular value of [F1|F2] close to |theta| / (2 sqrt 2).
    s = la.svdvals(np.hstack([F1.frame, F2.frame]))
    by_rank = int(np.sum(s < tol / (2 * np.sqrt(2))))
    W = plane_to_unitary(F2, tolerances).conj().T @ plane_to_unitary(F1, tolerances)
    phases = np.angle(np.linalg.eigvals(W))
    by_unitary = int(np.sum(np.abs(phases) < tol))
    if return_both:
        return by_rank, by_unitary
    if by_rank != by_unitary:
        raise NotLagrangianError(
            f"intersection dimension is ill-conditioned: rank test gives "
            f"{by_rank}, unitary test gives {by_unitary}")
    return by_rank


def plane_distance(F1, F2):
    """Operator norm of the difference of the orthogonal projectors."""
    P1 = _as_frame(F1).projector()
    P2 = _as_frame(F2).projector()
    return float(np.linalg.norm(P1 - P2, 2))


def lagrangian_dimensions(J):
    """Return (dim Ker(J - i), dim Ker(J + i)) for a skew-adjoint J with J^2 = -1."""
    J = np.asarray(J, dtype=complex)
    w = np.linalg.eigvals(J)
    return int(np.sum(np.abs(w - 1j) < 1e-8)), int(np.sum(np.abs(w + 1j) < 1e-8))


def check_no_lagrangian(dim_plus, dim_minus):
    """True iff Lagrangian planes exist, i.e. the two eigenspaces of J have
    equal dimension."""
    return int(dim_plus) == int(dim_minus)


def haar_unitary(n, rng=None):
    rng = np.random.default_rng(rng)
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_lagrangian(n, rng=None):
    """Lagrangian frame of a Haar-random unitary."""
    return unitary_to_plane(haar_unitary(n, rng))
