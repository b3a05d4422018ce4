"""Marchenko-Pastur limits for a discrete population spectral measure.

Everything is driven by the companion transform ``u = underline m``, the
unique solution in the upper half-plane of

    u = -1 / (z - gamma * int t / (1 + t u) dH(t)).

The p x p transform follows from it without cancellation as

    m(z) = -(1/z) * int dH(t) / (1 + t u(z)),

which is algebraically the Marchenko-Pastur fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from numpy.typing import ArrayLike, NDArray

from mnpboot.errors import CapabilityError, DomainError, NumericalError
from mnpboot.spectra import DiscreteMeasure, SpectralFunction

__all__ = [
    "MPModel",
    "ContourSpec",
    "solve_mp_stieltjes",
    "underline_m",
    "mp_density",
    "mp_residual",
    "mp_atom_at_zero",
    "mp_support_identity",
    "mp_support_bound",
    "mp_moments",
    "lss_centering",
    "default_contour",
    "bias_correction_dn",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
_ANCHOR_HEIGHT = 1.0


@dataclass(frozen=True)
class MPModel:
    """Aspect ratio ``gamma`` and population spectral measure ``H``."""

    gamma: float
    H: DiscreteMeasure

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if abs(self.H.total_mass - 1.0) > 1e-9:
            raise DomainError("H must be a probability measure")
        if self.H.points[0] < 0:
            raise DomainError("H must be supported on [0, inf)")


# --------------------------------------------------------------------------
# companion fixed point


def _phi(t, w, gamma, z, u):
    """Fixed-point map and its derivative, vectorised over ``z``/``u``."""
    inv = 1.0 / (1.0 + t * u[:, None])
    S = (w * t * inv).sum(axis=1)
    dS = (w * t * t * inv * inv).sum(axis=1)  # = -dS/du
    D = z - gamma * S
    phi = -1.0 / D
    dphi = gamma * dS / (D * D)
    return phi, dphi


def _iterate(t, w, gamma, z, u, tol, max_iter):
    """Damped fixed-point iteration with Newton acceleration.

    Newton steps are taken when they stay in the upper half-plane and lower
    the residual; otherwise a damped step ``(1-theta) u + theta phi(u)`` is
    used, and ``theta`` halves whenever such a step would raise the residual.
    """
    theta = np.ones(z.shape)
    phi, dphi = _phi(t, w, gamma, z, u)
    res = np.abs(u - phi)
    for _ in range(max_iter):
        # residual is relative once |u| > 1, else double precision cannot reach tol
        act = res >= tol * np.maximum(1.0, np.abs(u))
        if not act.any():
            break
        idx = np.flatnonzero(act)
        ua, za = u[idx], z[idx]
        pa, da, ra = phi[idx], dphi[idx], res[idx]

        un = ua - (ua - pa) / (1.0 - da)
        pn, dn = _phi(t, w, gamma, za, un)
        rn = np.abs(un - pn)
        ok_newton = np.isfinite(rn) & (rn < ra) & (un.imag > -1e-14 * np.abs(un))

        ta = theta[idx]
        uf = (1.0 - ta) * ua + ta * pa
        pf, df = _phi(t, w, gamma, za, uf)
        rf = np.abs(uf - pf)
        ok_fp = ~ok_newton & np.isfinite(rf) & (rf <= ra)
        worse = ~ok_newton & ~ok_fp
        theta[idx[worse]] *= 0.5
        theta[idx[ok_fp]] = np.minimum(1.0, 2.0 * theta[idx[ok_fp]])

        new_u, new_p, new_d, new_r = ua.copy(), pa.copy(), da.copy(), ra.copy()
        new_u[ok_newton], new_p[ok_newton], new_d[ok_newton], new_r[ok_newton] = (
            un[ok_newton], pn[ok_newton], dn[ok_newton], rn[ok_newton])
        new_u[ok_fp], new_p[ok_fp], new_d[ok_fp], new_r[ok_fp] = (
            uf[ok_fp], pf[ok_fp], df[ok_fp], rf[ok_fp])
        u[idx], phi[idx], dphi[idx], res[idx] = new_u, new_p, new_d, new_r
    return u, res


def _solve_companion(H: DiscreteMeasure, gamma: float, z, tol, max_iter):
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    shape = z.shape
    z = z.ravel()
    if np.any(z.imag <= 0):
        raise DomainError("need Im z > 0")
    t, w = H.points, H.weights
    # continuation in Im z: solve well above the spectrum's scale, then walk down
    anchor = _ANCHOR_HEIGHT * max(1.0, (1.0 + math.sqrt(gamma)) ** 2 * float(t.max()))
    ymin = float(z.imag.min())
    levels = max(0, math.ceil(math.log2(anchor / ymin))) if ymin < anchor else 0
    u = None
    for k in range(levels + 1):
        zk = z.real + 1j * np.maximum(z.imag, anchor * 2.0**-k)
        if u is None:
            u = -1.0 / zk
        u, res = _iterate(t, w, gamma, zk, u, tol, max_iter)
    bad = ~(res < tol * np.maximum(1.0, np.abs(u)))
    if bad.any():
        raise NumericalError(
            f"companion equation did not converge at {int(bad.sum())} point(s)",
            float(np.nanmax(res)),
        )
    return u.reshape(shape)


def _scalar_or_array(z_in, out):
    return complex(out.ravel()[0]) if np.ndim(z_in) == 0 else out


def underline_m(model: MPModel, z, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Companion Stieltjes transform (the n x n counterpart)."""
    u = _solve_companion(model.H, model.gamma, z, tol, max_iter)
    return _scalar_or_array(z, u)


def solve_mp_stieltjes(model: MPModel, z, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Stieltjes transform of the Marchenko-Pastur law at ``z`` (``Im z > 0``)."""
    zz = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    u = _solve_companion(model.H, model.gamma, zz, tol, max_iter)
    t, w = model.H.points, model.H.weights
    m = -(w / (1.0 + t * u[..., None])).sum(axis=-1) / zz
    return _scalar_or_array(z, m)


def mp_residual(model: MPModel, z, m):
    """``|m - Phi(m)|`` for the Marchenko-Pastur form of the equation."""
    z = np.asarray(z, dtype=np.complex128)
    m = np.asarray(m, dtype=np.complex128)
    g = model.gamma
    t, w = model.H.points, model.H.weights
    denom = t * (1.0 - g - g * z[..., None] * m[..., None]) - z[..., None]
    return np.abs(m - (w / denom).sum(axis=-1))


def mp_atom_at_zero(model: MPModel) -> float:
    """Mass of the Marchenko-Pastur law at the origin."""
    return float(min(1.0, max(model.H.mass_at(0.0), 1.0 - 1.0 / model.gamma)))


def mp_density(model: MPModel, x: ArrayLike, eps: float = 1e-5, tol: float = DEFAULT_TOL):
    """Density of the absolutely continuous part, ``Im m(x + i eps) / pi``.

    The atom at zero (see :func:`mp_atom_at_zero`) is removed before the
    inversion, so integrating the result plus the atom gives one.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    xs = np.asarray(x, dtype=np.float64)
    z = xs + 1j * eps
    m = np.atleast_1d(solve_mp_stieltjes(model, np.atleast_1d(z), tol=tol))
    atom = mp_atom_at_zero(model)
    zz = np.atleast_1d(z)
    dens = np.clip((m + atom / zz).imag / math.pi, 0.0, None)
    return float(dens[0]) if xs.ndim == 0 else dens.reshape(xs.shape)


def mp_support_identity(c: float) -> tuple[float, float]:
    """Support ``[(1-sqrt c)^2, (1+sqrt c)^2]`` of the Marchenko-Pastur law for Sigma = I."""
    if not c > 0:
        raise DomainError("c must be positive")
    s = math.sqrt(c)
    return (1.0 - s) ** 2, (1.0 + s) ** 2


def mp_support_bound(model: MPModel) -> tuple[float, float]:
    """An interval containing the support of the continuous part."""
    lo_h, hi_h = model.H.support()
    s = math.sqrt(model.gamma)
    lo = (1.0 - s) ** 2 * lo_h if model.gamma < 1 else 0.0
    return lo, (1.0 + s) ** 2 * hi_h


# --------------------------------------------------------------------------
# moments and centering


@lru_cache(maxsize=None)
def _moment_terms(k: int) -> tuple[tuple[tuple[int, ...], int, float], ...]:
    """Terms ``(i_1..i_k), gamma exponent, coefficient`` of the k-th moment.

    beta_k = sum over i_1 + 2 i_2 + ... + k i_k = k of
             gamma^(s-1) k! / (i_1! ... i_k! (k+1-s)!) * prod h_j^(i_j),
    with s = i_1 + ... + i_k (non-crossing partition count).
    """
    terms = []
    for combo in product(*(range(k // j + 1) for j in range(1, k + 1))):
        if sum(j * i for j, i in zip(range(1, k + 1), combo)) != k:
            continue
        s = sum(combo)
        coef = math.factorial(k) / (math.prod(math.factorial(i) for i in combo) * math.factorial(k + 1 - s))
        terms.append((combo, s - 1, coef))
    return tuple(terms)


def _moment_term_values(model: MPModel, k: int) -> list[float]:
    if k == 0:
        return [1.0]
    h = [model.H.moment(j) for j in range(1, k + 1)]
    out = []
    for combo, gexp, coef in _moment_terms(k):
        v = coef * model.gamma**gexp
        for hj, ij in zip(h, combo):
            if ij:
                v *= hj**ij
        out.append(v)
    return out


def mp_moments(model: MPModel, kmax: int) -> list[float]:
    """Moments ``int x^k dmu`` of the Marchenko-Pastur law, ``k = 0..kmax``."""
    return [math.fsum(_moment_term_values(model, k)) for k in range(kmax + 1)]


def lss_centering(model: MPModel, f: SpectralFunction, p: int, max_degree: int = 6) -> float:
    """``p * int f dmu`` for the Marchenko-Pastur law of ``model``.

    All monomial contributions are summed with ``math.fsum`` so that exact
    cancellations (e.g. ``x^2 - 2x + 1`` under ``H = delta_1``) survive.
    """
    if f.degree > max_degree:
        raise CapabilityError(f"polynomial degree {f.degree} exceeds supported {max_degree}")
    parts = []
    for k, c in enumerate(f.coeffs):
        if c != 0.0:
            parts.extend(c * v for v in _moment_term_values(model, k))
    return p * math.fsum(parts)


# --------------------------------------------------------------------------
# contour bias term


@dataclass(frozen=True)
class ContourSpec:
    """Axis-aligned rectangle ``[x_left, x_right] x [-height, height]``."""

    x_left: float
    x_right: float
    height: float = 0.25
    nodes_per_side: int = 512

    def __post_init__(self) -> None:
        if not self.x_right > self.x_left:
            raise DomainError("contour needs x_right > x_left")
        if not self.height > 0:
            raise DomainError("contour height must be positive")
        if self.nodes_per_side < 2:
            raise DomainError("need at least two nodes per side")

    def scaled(self, factor: float) -> "ContourSpec":
        """Rectangle enlarged about its centre by ``factor`` in both directions."""
        mid = 0.5 * (self.x_left + self.x_right)
        half = 0.5 * (self.x_right - self.x_left) * factor
        return ContourSpec(mid - half, mid + half, self.height * factor, self.nodes_per_side)

    def with_nodes(self, nodes: int) -> "ContourSpec":
        return ContourSpec(self.x_left, self.x_right, self.height, nodes)


def default_contour(esd: DiscreteMeasure, gamma: float, margin: float = 0.5,
                    height: float = 0.25, nodes_per_side: int = 512) -> ContourSpec:
    """Rectangle around ``[0, (1+sqrt gamma)^2 max(esd)]`` with ``margin``."""
    lo, hi = mp_support_bound(MPModel(gamma, esd))
    return ContourSpec(min(lo, 0.0) - margin, hi + margin, height, nodes_per_side)


# Im z used for nodes that sit on the real axis (the integrand is real there)
_AXIS_OFFSET = 1e-9


def _upper_path(c: ContourSpec):
    """Nodes and trapezoid weights (times dz) of the upper half, counterclockwise."""
    N = c.nodes_per_side
    s = np.linspace(0.0, 1.0, N)
    tw = np.full(N, 1.0 / (N - 1))
    tw[[0, -1]] *= 0.5
    h = c.height
    right = c.x_right + 1j * (h * s)
    top = (c.x_right - (c.x_right - c.x_left) * s) + 1j * h
    left = c.x_left + 1j * (h * (1.0 - s))
    z = np.concatenate([right, top, left])
    dz = np.concatenate([1j * h * tw, -(c.x_right - c.x_left) * tw + 0j, -1j * h * tw])
    z = z.real + 1j * np.maximum(z.imag, _AXIS_OFFSET)
    return z, dz


def bias_correction_dn(
    esd: DiscreteMeasure,
    gamma: float,
    f: SpectralFunction,
    contour: ContourSpec | None = None,
    tol: float = DEFAULT_TOL,
) -> float:
    """Data-driven mean correction for a linear spectral statistic.

    Evaluates

        -1/(2 pi i) oint f(z) gamma int u^3 t^2 (1+tu)^-3 dG
                    / (1 - gamma int u^2 t^2 (1+tu)^-2 dG)^2 dz

    with ``G = esd`` and ``u`` the companion transform for ``(gamma, G)``.
    The integrand is conjugate-symmetric, so only the upper half of the
    rectangle is integrated (trapezoid rule) and the lower half is its mirror.
    """
    if all(c == 0.0 for c in f.coeffs):
        return 0.0
    model = MPModel(gamma, esd)
    if contour is None:
        contour = default_contour(esd, gamma)
    lo, hi = mp_support_bound(model)
    if not (contour.x_left < lo and contour.x_right > hi):
        raise DomainError(
            f"contour [{contour.x_left:g}, {contour.x_right:g}] does not enclose the support bound [{lo:g}, {hi:g}]")
    z, dz = _upper_path(contour)
    u = _solve_companion(esd, gamma, z, tol, DEFAULT_MAX_ITER)
    t, w = esd.points, esd.weights
    tu = 1.0 + t * u[:, None]
    a = u[:, None] * t / tu  # u t / (1 + t u)
    num = gamma * (w * a**3 / _t_safe(t)).sum(axis=1)
    den = 1.0 - gamma * (w * a * a).sum(axis=1)
    g = f(z) * num / (den * den)
    upper = np.sum(g * dz)
    return float(-upper.imag / math.pi)


def _t_safe(t: NDArray[np.float64]) -> NDArray[np.float64]:
    """``t`` with zeros replaced by ones (``u^3 t^2 / (1+tu)^3 = a^3 / t`` vanishes at t=0 anyway)."""
    return np.where(t == 0.0, 1.0, t)
