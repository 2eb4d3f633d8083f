"""Kantorovich dual functional for quadratic cost in the semi-discrete setting.

With cells ``Lag_j(psi)`` and prescribed masses ``nu_j`` the dual reads

    K(psi) = sum_j [ int_{Lag_j} (|x - y_j|^2 - psi_j) dmu + nu_j psi_j ]
           = cost(psi) + sum_j psi_j (nu_j - mass_j)

K is concave and maximized at the weights whose cells carry exactly the
prescribed masses.  Its gradient is ``nu - mass`` and its Hessian is
supported on cell interfaces: the (i, j) entry is the density line integral
over the shared boundary divided by ``2 |y_i - y_j|``, with diagonal minus
the row sum, so the matrix is negative semidefinite with the constants in
its kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .domain import SiteSet
from .geom import integrate_quadratic
from .laguerre import LaguerreDiagram, interface_weight


def value(diagram: LaguerreDiagram, sites: SiteSet, psi) -> float:
    """Dual objective K at the weights the diagram was built from."""
    psi = np.asarray(psi, dtype=float)
    return transport_cost(diagram, sites) + float(psi @ (sites.masses - diagram.masses))


def transport_cost(diagram: LaguerreDiagram, sites: SiteSet) -> float:
    """Quadratic cost ``sum_j int_{Lag_j} |x - y_j|^2 dmu`` of the diagram."""
    pos = [tuple(p) for p in sites.positions.tolist()]
    total = 0.0
    for frag in diagram.fragments:
        total += integrate_quadratic(frag.polygon, pos[frag.site], *frag.density)
    return total


def gradient(diagram: LaguerreDiagram, sites: SiteSet) -> np.ndarray:
    """Prescribed-minus-actual cell masses; sums to zero for balanced data."""
    return sites.masses - diagram.masses


@dataclass(frozen=True)
class SparseHessian:
    """Symmetric interface-supported Hessian of K.

    ``pairs`` maps each adjacent ``(i, j)`` with ``i < j`` to the positive
    off-diagonal entry; ``diag`` holds the negative row sums.
    """

    n: int
    pairs: dict[tuple[int, int], float]
    diag: np.ndarray

    def as_dense(self) -> np.ndarray:
        h = np.diag(self.diag.copy())
        for (i, j), w in self.pairs.items():
            h[i, j] = w
            h[j, i] = w
        return h

    def row_sums(self) -> np.ndarray:
        # same accumulation order as the constructor, so diag cancels exactly
        off = np.zeros(self.n)
        for (i, j), w in self.pairs.items():
            off[i] += w
            off[j] += w
        return self.diag + off

    def neg_reduced(self, pin: int) -> sparse.csc_matrix:
        """Negated Hessian with the pinned row/column removed (SPD if connected)."""
        keep = np.arange(self.n) != pin
        remap = np.cumsum(keep) - 1
        rows, cols, vals = [], [], []
        for i in range(self.n):
            if i != pin:
                rows.append(remap[i])
                cols.append(remap[i])
                vals.append(-self.diag[i])
        for (i, j), w in self.pairs.items():
            if i != pin and j != pin:
                rows.extend((remap[i], remap[j]))
                cols.extend((remap[j], remap[i]))
                vals.extend((-w, -w))
        m = self.n - 1
        return sparse.csc_matrix((vals, (rows, cols)), shape=(m, m))

    def adjacency_components(self) -> list[list[int]]:
        """Connected components of the positive-weight adjacency graph."""
        rows, cols = [], []
        for (i, j), w in self.pairs.items():
            if w > 0.0:
                rows.extend((i, j))
                cols.extend((j, i))
        g = sparse.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n)
        )
        count, labels = connected_components(g, directed=False)
        return [np.nonzero(labels == c)[0].tolist() for c in range(count)]


def hessian(diagram: LaguerreDiagram, sites: SiteSet) -> SparseHessian:
    """Assemble the interface-supported Hessian from the diagram."""
    n = len(sites)
    off = np.zeros(n)
    pairs: dict[tuple[int, int], float] = {}
    for pair in sorted(diagram.interfaces):
        w = interface_weight(diagram, *pair)
        pairs[pair] = w
        off[pair[0]] += w
        off[pair[1]] += w
    return SparseHessian(n, pairs, -off)
