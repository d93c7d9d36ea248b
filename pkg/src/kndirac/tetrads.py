"""Newman-Penrose and orthonormal tetrads for the Kerr-Newman metric.

A Newman-Penrose (double null) frame {l, n, m, mbar} satisfies
    g(l,n) = 1,  g(m,mbar) = -1,
with every vector null and all other pairings zero.  The orthonormal frame
derived from it is
    u0 = (l+n)/sqrt2, u1 = (m+mbar)/sqrt2, u2 = (m-mbar)/(sqrt2 i),
    u3 = (l-n)/sqrt2,
whose dyad metric is diag(1,-1,-1,-1).

Tetrads carry explicit chart ('BL' or 'EF') and variance ('vectors' or
'forms') tags; operations reject mismatched inputs instead of coercing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import delta_sigma

__all__ = [
    "NullTetrad",
    "OrthonormalTetrad",
    "metric_pairing",
    "np_condition_residual",
    "dyad_metric_residual",
    "gram_schmidt_tetrad",
    "null_from_orthonormal",
    "orthonormal_from_null",
    "class3_rotation",
    "symmetric_bl_tetrad",
    "bl_to_ef_vector",
    "bl_to_ef_form",
    "transform_null_tetrad",
    "ef_null_tetrad",
    "orthonormal_u_ef",
    "orthonormal_bl",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class NullTetrad:
    l: np.ndarray
    n: np.ndarray
    m: np.ndarray
    mbar: np.ndarray
    variance: str = "vectors"
    chart: str = "BL"

    def vectors(self):
        return self.l, self.n, self.m, self.mbar


@dataclass(frozen=True)
class OrthonormalTetrad:
    """Rows u[a] are the four legs u_(0)..u_(3)."""

    u: np.ndarray
    variance: str = "vectors"
    chart: str = "BL"


def _require(tet, variance=None, chart=None):
    if variance is not None and tet.variance != variance:
        raise ValueError(f"expected {variance} tetrad, got {tet.variance}")
    if chart is not None and tet.chart != chart:
        raise ValueError(f"expected chart {chart}, got {tet.chart}")


def metric_pairing(g, x, y):
    """Bilinear pairing g_{mu nu} x^mu y^nu (no complex conjugation)."""
    return x @ g @ y


def np_condition_residual(tet, g):
    """Largest violation of the eight double-null-frame conditions."""
    l, n, m, mbar = tet.vectors()
    vals = [
        metric_pairing(g, l, n) - 1.0,
        metric_pairing(g, m, mbar) + 1.0,
        metric_pairing(g, l, l),
        metric_pairing(g, n, n),
        metric_pairing(g, m, m),
        metric_pairing(g, mbar, mbar),
        metric_pairing(g, l, m),
        metric_pairing(g, l, mbar),
        metric_pairing(g, n, m),
        metric_pairing(g, n, mbar),
    ]
    return max(abs(v) for v in vals)


ETA = np.diag([1.0, -1.0, -1.0, -1.0])


def dyad_metric_residual(tet, g):
    """Largest violation of g(u_a, u_b) = eta_ab."""
    G = np.array([[metric_pairing(g, x, y) for y in tet.u] for x in tet.u])
    return np.abs(G - ETA).max()


def gram_schmidt_tetrad(frame, g):
    """Pseudo-orthonormalize four independent vectors against the metric g.

    The first vector must be timelike; it is normalized to g(u,u) = +1, the
    remaining three to -1.  Orthonormal input is returned unchanged up to
    rounding (idempotence).
    """
    frame = [np.asarray(v, dtype=complex) for v in frame]
    if metric_pairing(g, frame[0], frame[0]).real <= 0:
        raise ValueError("first frame vector must be timelike")
    out = []
    signs = [1.0, -1.0, -1.0, -1.0]
    for i, v in enumerate(frame):
        w = v.copy()
        for j, u in enumerate(out):
            w = w - signs[j] * metric_pairing(g, u, w) * u
        norm2 = metric_pairing(g, w, w)
        if abs(norm2) < 1e-14:
            raise ValueError("frame is degenerate (or null after projection)")
        if (norm2.real > 0) != (signs[i] > 0):
            raise ValueError(f"vector {i} has the wrong causal character")
        out.append(w / np.sqrt(abs(norm2)))
    return OrthonormalTetrad(u=np.array(out), variance="vectors", chart="BL")


def null_from_orthonormal(tet):
    """NP frame from an orthonormal tetrad: l,n from (u0 +- u3), m from u1 + i u2."""
    u0, u1, u2, u3 = tet.u
    l = (u0 + u3) / SQRT2
    n = (u0 - u3) / SQRT2
    m = (u1 + 1j * u2) / SQRT2
    return NullTetrad(l=l, n=n, m=m, mbar=np.conj(m), variance=tet.variance, chart=tet.chart)


def orthonormal_from_null(nt):
    """Inverse of null_from_orthonormal."""
    l, n, m, mbar = nt.vectors()
    u = np.array([
        (l + n) / SQRT2,
        (m + mbar) / SQRT2,
        (m - mbar) / (SQRT2 * 1j),
        (l - n) / SQRT2,
    ])
    return OrthonormalTetrad(u=u, variance=nt.variance, chart=nt.chart)


def class3_rotation(nt, C):
    """NP gauge rotation (l, n, m, mbar) -> (C l, n/C, (C/|C|) m, conj(C)/|C| mbar)."""
    C = complex(C)
    if C == 0:
        raise ValueError("class-3 rotation parameter must be nonzero")
    phase = C / abs(C)
    return NullTetrad(
        l=C * nt.l,
        n=nt.n / C,
        m=phase * nt.m,
        mbar=np.conj(phase) * nt.mbar,
        variance=nt.variance,
        chart=nt.chart,
    )


def symmetric_bl_tetrad(point, params):
    """The symmetric Boyer-Lindquist NP frame (vectors), off the horizons.

    n carries the sign eps(Delta) = +1 outside / -1 between the horizons.
    """
    r, th = point.r, point.theta
    delta, sigma = delta_sigma(r, th, params)
    if abs(delta) < 1e-12 * params.M**2:
        raise ValueError("symmetric BL tetrad is undefined on a horizon")
    eps = 1.0 if delta > 0 else -1.0
    a = params.a
    f = 1.0 / math.sqrt(2.0 * sigma * abs(delta))
    l = f * np.array([r * r + a * a, delta, 0.0, a], dtype=complex)
    n = eps * f * np.array([r * r + a * a, -delta, 0.0, a], dtype=complex)
    m = np.array([1j * a * math.sin(th), 0.0, 1.0, 1j / math.sin(th)], dtype=complex) / math.sqrt(2.0 * sigma)
    return NullTetrad(l=l, n=n, m=m, mbar=np.conj(m), variance="vectors", chart="BL")


def bl_to_ef_vector(v, r, params):
    """Push a BL coordinate-basis vector into the horizon-penetrating chart."""
    delta, _ = delta_sigma(r, 0.0, params)
    out = np.array(v, dtype=complex)
    out[..., 0] = v[..., 0] + ((r * r + params.a**2) / delta - 1.0) * v[..., 1]
    out[..., 3] = v[..., 3] + (params.a / delta) * v[..., 1]
    return out


def bl_to_ef_form(w, r, params):
    """Pull a BL covector into the horizon-penetrating chart."""
    delta, _ = delta_sigma(r, 0.0, params)
    out = np.array(w, dtype=complex)
    out[..., 1] = (
        w[..., 1]
        - ((r * r + params.a**2) / delta - 1.0) * w[..., 0]
        - (params.a / delta) * w[..., 3]
    )
    return out


def transform_null_tetrad(nt, r, params):
    """Chart change BL -> EF of a whole NP frame (vectors or forms)."""
    _require(nt, chart="BL")
    mover = bl_to_ef_vector if nt.variance == "vectors" else bl_to_ef_form
    return NullTetrad(
        l=mover(nt.l, r, params),
        n=mover(nt.n, r, params),
        m=mover(nt.m, r, params),
        mbar=mover(nt.mbar, r, params),
        variance=nt.variance,
        chart="EF",
    )


def ef_null_tetrad(point, params):
    """Horizon-regular NP frame in the penetrating chart: (vectors, forms).

    This is the symmetric BL frame pushed to the new chart and rescaled by the
    class-3 rotation with C = sqrt|Delta| / r_plus, which removes the horizon
    singularity; the components below are the resulting closed forms, finite
    and smooth at r = r_plus.
    """
    r, th = point.r, point.theta
    delta, sigma = delta_sigma(r, th, params)
    a, rp = params.a, params.r_plus
    st = math.sin(th)
    f = 1.0 / (math.sqrt(2.0 * sigma) * rp)
    l = f * np.array([2 * r * r + 2 * a * a - delta, delta, 0.0, 2 * a], dtype=complex)
    n = (rp / math.sqrt(2.0 * sigma)) * np.array([1.0, -1.0, 0.0, 0.0], dtype=complex)
    m = np.array([1j * a * st, 0.0, 1.0, 1j / st], dtype=complex) / math.sqrt(2.0 * sigma)
    vectors = NullTetrad(l=l, n=n, m=m, mbar=np.conj(m), variance="vectors", chart="EF")

    lf = f * np.array([delta, delta - 2 * sigma, 0.0, -a * delta * st * st], dtype=complex)
    nf = (rp / math.sqrt(2.0 * sigma)) * np.array([1.0, 1.0, 0.0, -a * st * st], dtype=complex)
    mf = np.array(
        [1j * a * st, 1j * a * st, -sigma, -1j * (r * r + a * a) * st], dtype=complex
    ) / math.sqrt(2.0 * sigma)
    forms = NullTetrad(l=lf, n=nf, m=mf, mbar=np.conj(mf), variance="forms", chart="EF")
    return vectors, forms


def orthonormal_u_ef(point, params):
    """Orthonormal frame u_(a) (vectors, forms) of the horizon-regular NP frame."""
    r, th = point.r, point.theta
    delta, sigma = delta_sigma(r, th, params)
    a, rp = params.a, params.r_plus
    st = math.sin(th)
    rS = math.sqrt(sigma)
    f = 1.0 / (2.0 * rS * rp)
    uvec = np.array([
        f * np.array([2 * r * r + 2 * a * a - delta + rp * rp, delta - rp * rp, 0.0, 2 * a]),
        np.array([0.0, 0.0, 1.0, 0.0]) / rS,
        np.array([a * st, 0.0, 0.0, 1.0 / st]) / rS,
        f * np.array([2 * r * r + 2 * a * a - delta - rp * rp, delta + rp * rp, 0.0, 2 * a]),
    ], dtype=complex)
    uform = np.array([
        f * np.array([delta + rp**2, delta - 2 * sigma + rp**2, 0.0, -a * st * st * (delta + rp**2)]),
        np.array([0.0, 0.0, -rS, 0.0]),
        np.array([a * st, a * st, 0.0, -(r * r + a * a) * st]) / rS,
        f * np.array([delta - rp**2, delta - 2 * sigma - rp**2, 0.0, -a * st * st * (delta - rp**2)]),
    ], dtype=complex)
    return (
        OrthonormalTetrad(u=uvec, variance="vectors", chart="EF"),
        OrthonormalTetrad(u=uform, variance="forms", chart="EF"),
    )


def orthonormal_bl(point, params):
    """Orthonormal frame of the symmetric BL NP tetrad (vectors)."""
    return orthonormal_from_null(symmetric_bl_tetrad(point, params))
