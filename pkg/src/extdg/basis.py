"""Legendre and scaled-Laguerre basis evaluation.

Two orthogonal families back the solver: Legendre polynomials mapped onto
mesh elements of the finite subdomain, and scaled Laguerre polynomials /
functions on the semi-infinite tail.  All evaluations use iterative
three-term recurrences (indices up to a few hundred are routine), with
derivative recurrences obtained by differentiating the value recurrence.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LegendreBasis",
    "LaguerreBasis",
    "legendre_eval",
    "legendre_all",
    "laguerre_eval",
    "laguerre_all",
    "element_basis_eval",
    "element_basis_all",
    "tail_basis_eval",
    "tail_basis_all",
]


def legendre_all(p, xi):
    """Values and derivatives of L_0..L_p at points ``xi`` in [-1, 1].

    Returns two arrays of shape ``(p+1,) + shape(xi)``.
    """
    xi = np.asarray(xi, dtype=float)
    vals = np.zeros((p + 1,) + xi.shape)
    ders = np.zeros((p + 1,) + xi.shape)
    vals[0] = 1.0
    if p >= 1:
        vals[1] = xi
        ders[1] = 1.0
    for k in range(1, p):
        vals[k + 1] = ((2 * k + 1) * xi * vals[k] - k * vals[k - 1]) / (k + 1)
        ders[k + 1] = ((2 * k + 1) * (vals[k] + xi * ders[k]) - k * ders[k - 1]) / (k + 1)
    return vals, ders


def legendre_eval(l, xi):
    """L_l(xi) and L_l'(xi) for a single degree ``l >= 0``."""
    if l < 0:
        raise ValueError("degree must be non-negative")
    vals, ders = legendre_all(l, xi)
    return vals[l], ders[l]


def laguerre_all(q, beta, x, kind="function"):
    """Values/derivatives of the scaled Laguerre family for indices 0..q.

    ``kind="polynomial"`` evaluates the scaled Laguerre polynomials built
    from the recurrence seeded by 1 and 1 - beta*x; ``kind="function"``
    multiplies them by exp(-beta*x/2).  For large beta*x the exponential
    factor is allowed to flush to zero.

    Returns two arrays of shape ``(q+1,) + shape(x)``.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if kind not in ("polynomial", "function"):
        raise ValueError(f"unknown Laguerre kind {kind!r}")
    x = np.asarray(x, dtype=float)
    vals = np.zeros((q + 1,) + x.shape)
    ders = np.zeros((q + 1,) + x.shape)
    vals[0] = 1.0
    if q >= 1:
        vals[1] = 1.0 - beta * x
        ders[1] = -beta
    for k in range(1, q):
        vals[k + 1] = ((2 * k + 1 - beta * x) * vals[k] - k * vals[k - 1]) / (k + 1)
        ders[k + 1] = ((2 * k + 1 - beta * x) * ders[k] - beta * vals[k] - k * ders[k - 1]) / (k + 1)
    if kind == "function":
        damp = np.exp(-beta * x / 2.0)
        ders = damp * (ders - 0.5 * beta * vals)
        vals = damp * vals
    return vals, ders


def laguerre_eval(k, beta, x, kind="function"):
    """Scaled Laguerre value/derivative at ``x >= 0`` for a single index."""
    if k < 0:
        raise ValueError("index must be non-negative")
    vals, ders = laguerre_all(k, beta, x, kind=kind)
    return vals[k], ders[k]


def element_basis_all(p, z, center, width):
    """All element basis functions sqrt(2l+1) L_l(2(z - center)/width) at ``z``.

    The normalization makes the basis orthogonal with element mass
    ``width`` per mode.  Derivatives carry the chain-rule factor 2/width.
    """
    xi = 2.0 * (np.asarray(z, dtype=float) - center) / width
    vals, ders = legendre_all(p, xi)
    scale = np.sqrt(2 * np.arange(p + 1) + 1.0)
    scale = scale.reshape((p + 1,) + (1,) * (vals.ndim - 1))
    return scale * vals, scale * ders * (2.0 / width)


def element_basis_eval(m, l, z, mesh):
    """Value/derivative of mode ``l`` of element ``m`` (1-based) at ``z``.

    ``mesh`` is anything carrying an ``element_edges`` array (a Space) or
    the edges array itself.
    """
    edges = np.asarray(getattr(mesh, "element_edges", mesh), dtype=float)
    if not 1 <= m <= edges.size - 1:
        raise IndexError(f"element index {m} out of range 1..{edges.size - 1}")
    lo, hi = edges[m - 1], edges[m]
    vals, ders = element_basis_all(l, z, 0.5 * (lo + hi), hi - lo)
    return vals[l], ders[l]


def tail_basis_all(q, beta, z, L):
    """All tail basis functions (scaled Laguerre functions of z - L) at ``z >= L``."""
    z = np.asarray(z, dtype=float)
    if np.any(z < L):
        raise ValueError("tail basis is only defined for z >= L")
    return laguerre_all(q, beta, z - L, kind="function")


def tail_basis_eval(j, z, space):
    """Value/derivative of tail mode ``j`` at ``z >= L`` for a given space."""
    vals, ders = tail_basis_all(j, space.beta, z, space.L)
    return vals[j], ders[j]


@dataclass(frozen=True)
class LegendreBasis:
    """Legendre family up to degree ``p`` on the reference element [-1, 1]."""

    p: int

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("p must be non-negative")

    def eval(self, xi):
        return legendre_all(self.p, xi)


@dataclass(frozen=True)
class LaguerreBasis:
    """Scaled Laguerre family: indices 0..q, scale beta, polynomial or function kind."""

    q: int
    beta: float
    kind: str = "function"

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("q must be non-negative")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.kind not in ("polynomial", "function"):
            raise ValueError(f"unknown Laguerre kind {self.kind!r}")

    def eval(self, x):
        return laguerre_all(self.q, self.beta, x, kind=self.kind)
