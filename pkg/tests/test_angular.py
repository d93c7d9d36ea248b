import math

import numpy as np
import pytest
from conftest import random_slow_params

from kndirac.angular import (
    AngularBasis,
    DiscretizationSpec,
    angular_eigenpairs,
    discretize_angular,
    eigenfunction_derivatives,
    eigenfunction_values,
    xi_continuation,
)
from kndirac.geometry import SpacetimeParams
from kndirac.separation import ModeParams

PAR = SpacetimeParams(M=1.0, a=0.6, Q=0.3)


def sin_measure_inner(theta_nodes, weights, Ya, Yb):
    return np.sum(weights * (np.conj(Ya[:, 0]) * Yb[:, 0] + np.conj(Ya[:, 1]) * Yb[:, 1]))


def gl_grid(n=400):
    x, w = np.polynomial.legendre.leggauss(n)
    return np.arccos(x), w


def ode_residual(pair, mode, params, theta):
    """Pointwise residual of the first-order angular pair for an eigenpair."""
    Y = eigenfunction_values(pair, mode, theta)
    dY = eigenfunction_derivatives(pair, mode, theta)
    st, ct = np.sin(theta), np.cos(theta)
    w = params.a * mode.omega * st + mode.k / st
    am = params.a * mode.m
    Lp_Y1 = dY[:, 0] + (ct / (2 * st) - w) * Y[:, 0]
    Lm_Y2 = dY[:, 1] + (ct / (2 * st) + w) * Y[:, 1]
    r1 = Lp_Y1 + (pair.xi - am * ct) * Y[:, 1]
    r2 = (pair.xi + am * ct) * Y[:, 0] - Lm_Y2
    return max(np.abs(r1).max(), np.abs(r2).max())


def test_matrix_symmetric_real():
    mode = ModeParams(omega=0.9, k=0.5, m=0.4, xi=0.0)
    A = discretize_angular(mode, DiscretizationSpec(N=24), PAR)
    assert A.shape == (48, 48)
    assert np.isrealobj(A)
    assert np.abs(A - A.T).max() == 0.0


def test_spectrum_symmetric_when_am_zero():
    # am = 0, a*omega = 0: spectrum symmetric about zero (checked against the
    # dense high-N solve, not a baked-in table)
    par = SpacetimeParams(M=1.0, Q=0.3)
    mode = ModeParams(omega=0.0, k=0.5, m=0.0, xi=0.0)
    lo = angular_eigenpairs(mode, DiscretizationSpec(N=64), par, count=10)
    hi = angular_eigenpairs(mode, DiscretizationSpec(N=256), par, count=10)
    xs_lo = np.array([p.xi for p in lo])
    xs_hi = np.array([p.xi for p in hi])
    assert np.abs(xs_lo - xs_hi).max() < 1e-10  # Richardson-free: already converged
    assert np.abs(np.sort(xs_lo) + np.sort(xs_lo)[::-1]).max() < 1e-10


def test_self_convergence_doubling():
    mode = ModeParams(omega=1.1, k=1.5, m=0.5, xi=0.0)
    v128 = [p.xi for p in angular_eigenpairs(mode, DiscretizationSpec(N=128), PAR, count=5)]
    v256 = [p.xi for p in angular_eigenpairs(mode, DiscretizationSpec(N=256), PAR, count=5)]
    assert np.abs(np.array(v128) - np.array(v256)).max() < 1e-8


def test_eigenfunctions_solve_the_ode():
    # method-of-manufactured-solutions in reverse: computed eigenpairs must
    # satisfy the continuous system pointwise
    mode = ModeParams(omega=0.8, k=-1.5, m=0.6, xi=0.0)
    pairs = angular_eigenpairs(mode, DiscretizationSpec(N=64), PAR, count=6)
    theta = np.linspace(0.3, math.pi - 0.3, 41)
    for p in pairs:
        assert ode_residual(p, mode, PAR, theta) < 1e-9


def test_matrix_action_matches_quadrature_oracle():
    # Galerkin entries against an independent fine quadrature of <phi, T psi>
    mode = ModeParams(omega=0.7, k=0.5, m=0.3, xi=0.0)
    N = 12
    A = discretize_angular(mode, DiscretizationSpec(N=N), PAR)
    bas = AngularBasis(mode.k, N)
    x, wq = np.polynomial.legendre.leggauss(1500)
    th = np.arccos(x)
    st, ct = np.sin(th), x
    F1 = bas.values(th, 0)
    F2 = bas.values(th, 1)
    dF2 = bas.derivative_values(th, 1)
    w = PAR.a * mode.omega * st + mode.k / st
    Lm_F2 = dF2 + ((0.5 * ct / st) + w)[:, None] * F2
    A12 = F1.T @ (wq[:, None] * Lm_F2)
    am = PAR.a * mode.m
    A11 = -am * (F1.T @ ((wq * ct)[:, None] * F1))
    assert np.abs(A[:N, N:] - A12).max() < 1e-10
    assert np.abs(A[:N, :N] - A11).max() < 1e-10


def test_eigenvalues_real_and_normalized():
    mode = ModeParams(omega=1.3, k=0.5, m=0.55, xi=0.0)
    pairs = angular_eigenpairs(mode, DiscretizationSpec(N=96), PAR, count=6)
    th, wq = gl_grid()
    for p in pairs:
        assert abs(np.imag(p.xi)) == 0.0  # real by symmetric construction
        Y = eigenfunction_values(p, mode, th)
        norm = sin_measure_inner(th, wq, Y, Y)
        assert abs(norm - 1.0) < 1e-8


def test_orthogonality_gram_matrix():
    mode = ModeParams(omega=1.0, k=1.5, m=0.4, xi=0.0)
    pairs = angular_eigenpairs(mode, DiscretizationSpec(N=96), PAR, count=6)
    th, wq = gl_grid()
    Ys = [eigenfunction_values(p, mode, th) for p in pairs]
    G = np.array([[sin_measure_inner(th, wq, Ya, Yb) for Yb in Ys] for Ya in Ys])
    assert np.abs(G - np.eye(6)).max() < 1e-8


def test_omega_independence_at_zero_spin():
    par = SpacetimeParams(M=1.0, Q=0.3)
    spec = DiscretizationSpec(N=48)
    ref = None
    for om in (0.0, 1.0, 5.0):
        mode = ModeParams(omega=om, k=0.5, m=0.7, xi=0.0)
        xs = np.array([p.xi for p in angular_eigenpairs(mode, spec, par, count=6)])
        if ref is None:
            ref = xs
        assert np.abs(xs - ref).max() < 1e-8


def test_branch_indices_symmetric():
    mode = ModeParams(omega=0.9, k=0.5, m=0.2, xi=0.0)
    pairs = angular_eigenpairs(mode, DiscretizationSpec(N=48), PAR, count=8)
    ns = [p.n for p in pairs]
    assert ns == sorted(ns)
    assert set(ns) == {-4, -3, -2, -1, 1, 2, 3, 4}


def test_nondegenerate_gaps_random_modes():
    rng = np.random.default_rng(43)
    spec = DiscretizationSpec(N=48)
    for _ in range(50):
        par = random_slow_params(rng)
        k = rng.integers(-3, 3) + 0.5
        mode = ModeParams(omega=float(rng.uniform(-1.5, 1.5)), k=float(k),
                          m=float(rng.uniform(0, 1)), xi=0.0)
        xs = np.array([p.xi for p in angular_eigenpairs(mode, spec, par, count=10)])
        assert np.min(np.diff(np.sort(xs))) > 1e-6


def test_continuation_constant_at_zero_spin():
    par = SpacetimeParams(M=1.0, Q=0.3)
    mode = ModeParams(omega=0.0, k=0.5, m=0.3, xi=0.0)
    track = xi_continuation(np.linspace(0.0, 2.0, 9), mode, DiscretizationSpec(N=32), par)
    assert np.ptp(track) < 1e-10


def test_continuation_smooth_and_reversible():
    mode = ModeParams(omega=0.0, k=0.5, m=0.0, xi=0.0)
    spec = DiscretizationSpec(N=48)
    # a*omega sweep over [0, 0.5]: omega in [0, 0.5/a]
    oms = np.linspace(0.0, 0.5 / PAR.a, 21)
    fwd = xi_continuation(oms, mode, spec, PAR, branch_n=1)
    bwd = xi_continuation(oms[::-1], mode, spec, PAR, branch_n=1)
    # reversing the sweep recovers the same branch values
    # (match the backward track at its final point to the forward start)
    assert abs(bwd[-1] - fwd[0]) < 1e-8
    assert np.abs(bwd[::-1] - fwd).max() < 1e-8
    # smoothness proxy: bounded second differences
    d2 = np.diff(fwd, 2) / (oms[1] - oms[0]) ** 2
    assert np.abs(d2).max() < 10.0


def test_spec_validation():
    with pytest.raises(ValueError):
        DiscretizationSpec(N=4)
    with pytest.raises(ValueError):
        DiscretizationSpec(N=32, scheme="collocation")
    mode = ModeParams(omega=0.5, k=0.5, m=0.1, xi=0.0)
    with pytest.raises(ValueError):
        angular_eigenpairs(mode, DiscretizationSpec(N=8), PAR, count=64)
