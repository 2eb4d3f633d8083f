"""Independent verification oracles.

These deliberately avoid the geometric pipeline they are checking: masses
are estimated by Monte-Carlo classification of density samples, and
derivatives of the dual come from central differences of its value and
gradient.  The exact discrete-transport LP oracle lives in the test tree.
"""

from __future__ import annotations

import numpy as np

from . import domain, dual, laguerre
from .domain import Mesh, SiteSet
from .errors import ValidationError


def mc_masses(
    mesh: Mesh, sites: SiteSet, psi, n: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo cell masses with binomial standard errors.

    Samples ``n`` points from the source density, classifies each by
    power-distance argmin, and scales frequencies by the total mass.
    """
    if n < 1:
        raise ValidationError("mc_masses needs at least one sample")
    pts = domain.sample(mesh, n, seed)
    site_of = laguerre.assign(pts, sites, psi)
    counts = np.bincount(site_of, minlength=len(sites)).astype(float)
    p = counts / n
    mu = mesh.total_mass
    return p * mu, mu * np.sqrt(p * (1.0 - p) / n)


def fd_gradient(mesh: Mesh, sites: SiteSet, psi, h: float = 1e-6) -> np.ndarray:
    """Central differences of the dual value, one coordinate at a time."""
    if h <= 0:
        raise ValidationError("step must be positive")
    psi = np.asarray(psi, dtype=float)
    out = np.empty(len(sites))
    for j in range(len(sites)):
        plus = psi.copy()
        plus[j] += h
        minus = psi.copy()
        minus[j] -= h
        v_plus = dual.value(laguerre.build(mesh, sites, plus), sites, plus)
        v_minus = dual.value(laguerre.build(mesh, sites, minus), sites, minus)
        out[j] = (v_plus - v_minus) / (2.0 * h)
    return out


def fd_hessian(mesh: Mesh, sites: SiteSet, psi, h: float = 1e-5) -> np.ndarray:
    """Central differences of the analytic gradient, column by column."""
    if h <= 0:
        raise ValidationError("step must be positive")
    psi = np.asarray(psi, dtype=float)
    n = len(sites)
    out = np.empty((n, n))
    for j in range(n):
        plus = psi.copy()
        plus[j] += h
        minus = psi.copy()
        minus[j] -= h
        g_plus = dual.gradient(laguerre.build(mesh, sites, plus), sites)
        g_minus = dual.gradient(laguerre.build(mesh, sites, minus), sites)
        out[:, j] = (g_plus - g_minus) / (2.0 * h)
    return out
