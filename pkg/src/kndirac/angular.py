"""Spectral solution of the angular eigenvalue problem.

The first-order angular pair (Y1, Y2) is recast as T Y = xi Y with

    T = [[-a m cos(theta), L-], [-L+, a m cos(theta)]],
    L_pm = d_theta + cot(theta)/2 -+ (a omega sin(theta) + k csc(theta)),

which is symmetric in L^2((0,pi), sin(theta) dtheta)^2.  Regular solutions
behave like theta^{|k - 1/2|} (component 1) and theta^{|k + 1/2|}
(component 2) at the north pole, with the exponents swapped at the south
pole; both exponents are integers for half-integer k.  The matching
discretization is a Galerkin basis built on Jacobi polynomials,

    comp1: s^A c^B P_n^(A,B)(cos theta),  comp2: s^B c^A P_n^(B,A)(cos theta),

with s = sin(theta/2), c = cos(theta/2), A = |k - 1/2|, B = |k + 1/2|.
Because A, B are integers every Galerkin integrand is a polynomial in
cos(theta) and a single Gauss-Legendre rule in cos(theta) (interior nodes,
never touching the poles) evaluates all matrix elements exactly; the
discrete matrix is real symmetric with an identity mass matrix, so the
eigenvalues are exactly real and the eigenvectors exactly orthonormal in the
sin(theta) measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.special import eval_jacobi, gammaln

__all__ = [
    "DiscretizationSpec",
    "AngularEigenpair",
    "AngularBasis",
    "discretize_angular",
    "angular_eigenpairs",
    "eigenfunction_values",
    "xi_continuation",
]


@dataclass(frozen=True)
class DiscretizationSpec:
    """Basis size N per component; scheme is fixed."""

    N: int = 64
    scheme: str = "jacobi-galerkin"

    def __post_init__(self):
        if self.N < 8:
            raise ValueError("N must be at least 8")
        if self.scheme != "jacobi-galerkin":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


@dataclass(frozen=True)
class AngularEigenpair:
    """One angular eigenvalue with its sampled eigenfunction."""

    xi: float
    n: int
    theta: np.ndarray
    Y: np.ndarray  # shape (len(theta), 2)
    N: int
    coeffs: np.ndarray = field(repr=False, default=None)


def _jacobi_norm(n, a, b):
    """L2 norm^2 of P_n^(a,b) under (1-x)^a (1+x)^b dx."""
    n = np.asarray(n, dtype=float)
    return np.exp(
        (a + b + 1) * math.log(2.0)
        - np.log(2 * n + a + b + 1)
        + gammaln(n + a + 1)
        + gammaln(n + b + 1)
        - gammaln(n + a + b + 1)
        - gammaln(n + 1)
    )


class AngularBasis:
    """Jacobi bases for the two components of one (k)-sector."""

    def __init__(self, k, N):
        self.k = k
        self.N = N
        self.A = int(round(abs(k - 0.5)))
        self.B = int(round(abs(k + 0.5)))

    def _phi(self, theta, x, comp):
        a, b = (self.A, self.B) if comp == 0 else (self.B, self.A)
        s = np.sin(theta / 2.0)
        c = np.cos(theta / 2.0)
        pref = s**a * c**b  # vanishing orders of the regular solution
        n = np.arange(self.N)
        # normalized so that <phi_n, phi_m>_{sin th dth} = delta_nm
        norms = np.sqrt(_jacobi_norm(n, a, b) * 2.0 ** (-(a + b)))
        P = np.stack([eval_jacobi(int(m), a, b, x) for m in n], axis=-1)
        return pref[..., None] * P / norms

    def _dphi_dtheta(self, theta, x, comp):
        a, b = (self.A, self.B) if comp == 0 else (self.B, self.A)
        s = np.sin(theta / 2.0)
        c = np.cos(theta / 2.0)
        n = np.arange(self.N)
        norms = np.sqrt(_jacobi_norm(n, a, b) * 2.0 ** (-(a + b)))
        P = np.stack([eval_jacobi(int(m), a, b, x) for m in n], axis=-1)
        dP = np.zeros_like(P)
        for m in range(1, self.N):
            dP[..., m] = 0.5 * (m + a + b + 1) * eval_jacobi(m - 1, a + 1, b + 1, x)
        pref = s**a * c**b
        dpref = (0.5 * a * s ** max(a - 1, 0) * c ** (b + 1) if a > 0 else np.zeros_like(s)) - (
            0.5 * b * s ** (a + 1) * c ** max(b - 1, 0) if b > 0 else np.zeros_like(s)
        )
        # d/dtheta [pref P(cos theta)] ; dx/dtheta = -sin theta
        return dpref[..., None] * P / norms + pref[..., None] * dP * (-np.sin(theta))[..., None] / norms

    def values(self, theta, comp):
        return self._phi(np.asarray(theta, float), np.cos(np.asarray(theta, float)), comp)

    def derivative_values(self, theta, comp):
        th = np.asarray(theta, float)
        return self._dphi_dtheta(th, np.cos(th), comp)


def _galerkin_matrix(mode, spec, params, basis=None):
    k = mode.k
    N = spec.N
    bas = basis or AngularBasis(k, N)
    aw = params.a * mode.omega
    am = params.a * mode.m
    nq = 2 * N + 2 * (bas.A + bas.B) + 16
    x, wq = np.polynomial.legendre.leggauss(nq)
    theta = np.arccos(x)
    st = np.sin(theta)
    ct = x

    F1 = bas._phi(theta, x, 0)
    F2 = bas._phi(theta, x, 1)
    dF2 = bas._dphi_dtheta(theta, x, 1)
    # L- acting on component-2 basis, evaluated at the interior nodes
    w_theta = aw * st + k / st
    Lm_F2 = dF2 + ((0.5 * ct / st) + w_theta)[:, None] * F2

    # <f, g>_{sin th dth} = integral f g dx: plain Gauss-Legendre weights
    A12 = F1.T @ (wq[:, None] * Lm_F2)
    A11 = -am * (F1.T @ ((wq * ct)[:, None] * F1))
    A22 = am * (F2.T @ ((wq * ct)[:, None] * F2))
    A = np.block([[A11, A12], [A12.T, A22]])
    return 0.5 * (A + A.T), bas


def discretize_angular(mode, spec, params):
    """Symmetric 2N x 2N Galerkin matrix whose eigenvalues are the xi_n."""
    A, _ = _galerkin_matrix(mode, spec, params)
    return A


def _branch_indices(xi_sorted):
    # indices n in Z, symmetric around the gap at 0: negative values get
    # -1, -2, ... moving away from zero, positive values 1, 2, ...
    idx = np.empty(len(xi_sorted), dtype=int)
    neg = np.where(xi_sorted < 0)[0]
    pos = np.where(xi_sorted >= 0)[0]
    for rank, i in enumerate(reversed(neg)):
        idx[i] = -(rank + 1)
    for rank, i in enumerate(pos):
        idx[i] = rank + 1
    return idx


def angular_eigenpairs(mode, spec, params, count=8, n_theta=129):
    """The `count` eigenvalues of smallest modulus with sampled eigenfunctions.

    Eigenfunctions are normalized in L^2((0,pi), sin(theta) dtheta) and
    returned on an interior theta grid.  A spectral gap below 1e-10 between
    consecutive returned eigenvalues is reported as a degeneracy error.
    """
    if count > spec.N:
        raise ValueError("count must not exceed the basis size N")
    A, bas = _galerkin_matrix(mode, spec, params)
    vals, vecs = eigh(A)
    sel = np.argsort(np.abs(vals))[:count]
    sel = sel[np.argsort(vals[sel])]
    xi = vals[sel]
    gaps = np.diff(xi)
    if len(gaps) and np.min(np.abs(gaps)) < 1e-10:
        raise ArithmeticError(f"degenerate angular eigenvalues detected: min gap {np.min(np.abs(gaps)):.2e}")
    theta = np.pi * (np.arange(n_theta) + 0.5) / n_theta
    F1 = bas.values(theta, 0)
    F2 = bas.values(theta, 1)
    indices = _branch_indices(xi)
    out = []
    for j, col in enumerate(sel):
        c = vecs[:, col]
        Y = np.stack([F1 @ c[: spec.N], F2 @ c[spec.N :]], axis=-1)
        # deterministic sign: largest-|Y| sample positive
        pivot = np.argmax(np.abs(Y))
        if Y.flat[pivot].real < 0:
            Y = -Y
            c = -c
        out.append(AngularEigenpair(xi=float(xi[j]), n=int(indices[j]), theta=theta,
                                    Y=Y.astype(complex), N=spec.N, coeffs=c.copy()))
    return out


def eigenfunction_values(pair, mode, theta):
    """Evaluate an eigenpair's (Y1, Y2) at arbitrary interior angles."""
    bas = AngularBasis(mode.k, pair.N)
    th = np.asarray(theta, dtype=float)
    F1 = bas.values(th, 0)
    F2 = bas.values(th, 1)
    N = pair.N
    return np.stack([F1 @ pair.coeffs[:N], F2 @ pair.coeffs[N:]], axis=-1)


def eigenfunction_derivatives(pair, mode, theta):
    """d/dtheta of (Y1, Y2) at arbitrary interior angles."""
    bas = AngularBasis(mode.k, pair.N)
    th = np.asarray(theta, dtype=float)
    D1 = bas.derivative_values(th, 0)
    D2 = bas.derivative_values(th, 1)
    N = pair.N
    return np.stack([D1 @ pair.coeffs[:N], D2 @ pair.coeffs[N:]], axis=-1)


def xi_continuation(omegas, mode, spec, params, branch_n=1, count=12):
    """Track xi_{branch_n}(omega) across a frequency sweep by nearest matching.

    Raises if consecutive xi values jump by more than half the local spectral
    gap, which would make the branch assignment ambiguous.
    """
    from .separation import ModeParams

    omegas = np.asarray(omegas, dtype=float)
    track = []
    prev = None
    for om in omegas:
        m = ModeParams(omega=float(om), k=mode.k, m=mode.m, xi=0.0)
        pairs = angular_eigenpairs(m, spec, params, count=count, n_theta=9)
        xs = np.array([p.xi for p in pairs])
        if prev is None:
            ns = np.array([p.n for p in pairs])
            sel = np.where(ns == branch_n)[0]
            if len(sel) == 0:
                raise ValueError(f"branch {branch_n} not within the first {count} eigenvalues")
            val = xs[sel[0]]
        else:
            j = int(np.argmin(np.abs(xs - prev)))
            gap = np.min(np.abs(np.delete(xs, j) - xs[j])) if len(xs) > 1 else np.inf
            if abs(xs[j] - prev) > 0.5 * gap:
                raise ArithmeticError(
                    f"branch tracking ambiguous at omega={om}: step {abs(xs[j]-prev):.3e} "
                    f"exceeds half the local gap {gap:.3e}"
                )
            val = xs[j]
        track.append(val)
        prev = val
    return np.array(track)
