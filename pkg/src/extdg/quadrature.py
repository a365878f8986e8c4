"""Quadrature rules and spectral differentiation matrices.

Provides Gauss-Legendre rules on [-1, 1] and scaled Gauss-Laguerre (GL) /
Gauss-Laguerre-Radau (GLR) rules on [0, inf).  Laguerre-type rules come in
two flavours: plain weights (integrate exp(-beta*x) * polynomial exactly)
and modified weights that absorb the exponential, so that

    sum_j w_j * F(x_j)  ==  int_0^inf F(x) dx

exactly whenever F = exp(-beta*x) * p(x) with deg p <= 2M (GLR, M+1 nodes)
or deg p <= 2M+1 (GL).

Nodes are found by Newton iteration on recurrence-evaluated (generalized)
Laguerre / Legendre polynomials from classical initial guesses; no
eigenvalue machinery is involved, which keeps the construction robust for
a couple of hundred nodes.  Modified weights are assembled in log space to
dodge overflow of intermediate polynomial values at the far nodes.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import laguerre_all

__all__ = [
    "QuadRule",
    "DiffMatrix",
    "RootFindError",
    "gauss_legendre_rule",
    "laguerre_rule",
    "diff_matrix",
]

_NEWTON_TOL = 1e-12
_NEWTON_CAP = 200


class RootFindError(RuntimeError):
    """Newton iteration for a quadrature node failed to converge."""


@dataclass(frozen=True)
class QuadRule:
    """Immutable nodes-and-weights bundle.

    family is one of "gauss_legendre", "GL", "GLR".  For the Laguerre
    families `modified` says whether the weights absorb exp(-beta*x).
    """

    nodes: np.ndarray
    weights: np.ndarray
    family: str
    beta: float = 0.0
    modified: bool = False

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n(self):
        return self.nodes.size


@dataclass(frozen=True)
class DiffMatrix:
    """Nodal differentiation matrix on a GL or GLR grid."""

    entries: np.ndarray
    family: str
    basis_kind: str
    beta: float

    def __post_init__(self):
        self.entries.setflags(write=False)

    def apply(self, values):
        return self.entries @ values


def _legendre_pair(n, x):
    """P_n and P_n' at scalar-or-array x via the recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    if n == 0:
        return p0, np.zeros_like(x)
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    # derivative from the standard identity
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=None)
def _gauss_legendre_cached(n):
    # Chebyshev-style initial guesses, Newton polish, then symmetrize.
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_CAP):
        p, dp = _legendre_pair(n, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    else:
        raise RootFindError(f"Gauss-Legendre nodes for n={n} did not converge")
    _, dp = _legendre_pair(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])          # enforce exact symmetry
    if n % 2 == 1:
        x[n // 2] = 0.0
    _, dp = _legendre_pair(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    return x, w


def gauss_legendre_rule(n):
    """n-point Gauss-Legendre rule on [-1, 1], exact for degree 2n-1."""
    if n < 1:
        raise ValueError("Gauss-Legendre rule needs at least one node")
    x, w = _gauss_legendre_cached(n)
    return QuadRule(nodes=x.copy(), weights=w.copy(), family="gauss_legendre")


def _laguerre_scaled(n, alpha, y):
    """Generalized Laguerre L_n^(alpha)(y) as (mantissa, exponent2) pairs.

    The recurrence is renormalized by powers of two on the fly, so the
    result is usable far beyond the overflow range of a direct evaluation.
    Also returns the similarly scaled derivative.
    """
    y = np.asarray(y, dtype=float)
    p0 = np.ones_like(y)
    p1 = 1.0 + alpha - y
    e = np.zeros_like(y)
    if n == 0:
        return p0, np.zeros_like(y), np.zeros_like(y), e
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1 + alpha - y) * p1 - (k + alpha) * p0) / (k + 1)
        big = np.abs(p1) > 1e150
        if np.any(big):
            p0 = np.where(big, p0 * 1e-150, p0)
            p1 = np.where(big, p1 * 1e-150, p1)
            e = np.where(big, e + 150 * np.log(10.0), e)
    # L_n^(a)' = (n L_n^(a) - (n+alpha) L_{n-1}^(a)) / y  (unused at y = 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = (n * p1 - (n + alpha) * p0) / y
    return p1, dp, p0, e


def _genlaguerre_roots(n, alpha):
    """Roots of L_n^(alpha) by Newton from classical stepping guesses."""
    roots = np.zeros(n)
    z = 0.0
    for i in range(n):
        if i == 0:
            z = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * n + 1.8 * alpha)
        elif i == 1:
            z += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * n)
        else:
            ai = i - 1
            z += ((1.0 + 2.55 * ai) / (1.9 * ai)
                  + 1.26 * ai * alpha / (1.0 + 3.5 * ai)) * (z - roots[i - 2]) / (1.0 + 0.3 * alpha)
        for _ in range(_NEWTON_CAP):
            p, dp, _, _ = _laguerre_scaled(n, alpha, z)
            step = p / dp
            z -= step
            if abs(step) < _NEWTON_TOL * max(1.0, abs(z)):
                break
        else:
            raise RootFindError(
                f"Laguerre root {i} of L_{n}^({alpha}) did not converge")
        roots[i] = z
    return roots


@lru_cache(maxsize=None)
def _laguerre_nodes_logweights(family, M):
    """Unit-scale (beta=1) nodes plus log of the e^{+y}-modified weights."""
    if family == "GLR":
        # nodes: 0 plus the zeros of d/dy L_{M+1} (the extrema of L_{M+1})
        y = np.concatenate([[0.0], _genlaguerre_roots(M, 1.0)]) if M else np.array([0.0])
        # standard weight 1 / ((M+1) L_M(y)^2); modified multiplies e^{+y}
        p, _, _, e = _laguerre_scaled(M, 0.0, y) if M else (np.ones(1), 0, 0, np.zeros(1))
        logw = y - math.log(M + 1) - 2.0 * (np.log(np.abs(p)) + e)
    elif family == "GL":
        y = _genlaguerre_roots(M + 1, 0.0)
        # standard weight y / ((M+2)^2 L_{M+2}(y)^2)
        p, _, _, e = _laguerre_scaled(M + 2, 0.0, y)
        logw = y + np.log(y) - 2.0 * math.log(M + 2) - 2.0 * (np.log(np.abs(p)) + e)
    else:
        raise ValueError(f"unknown Laguerre family {family!r}")
    y.setflags(write=False)
    logw.setflags(write=False)
    return y, logw


def laguerre_rule(family, beta, M, modified=True):
    """Scaled GL or GLR rule with M+1 nodes.

    GLR includes the endpoint 0; GL does not.  With ``modified=True`` the
    weights integrate exp(-beta*x)*p(x) sampled as plain function values;
    with ``modified=False`` they integrate p(x) against the weight
    exp(-beta*x).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if M < 0:
        raise ValueError("M must be non-negative")
    y, logw = _laguerre_nodes_logweights(family, M)
    logw = logw - math.log(beta)
    if not modified:
        logw = logw - y
    return QuadRule(nodes=y / beta, weights=np.exp(logw), family=family,
                    beta=beta, modified=modified)


def diff_matrix(family, basis_kind, beta, M):
    """Differentiation matrix for nodal data on a GL or GLR grid.

    ``basis_kind="function"`` differentiates the interpolant built from
    scaled Laguerre functions, ``"polynomial"`` the one built from scaled
    Laguerre polynomials.  Entries are closed forms in the nodal values of
    a single Laguerre polynomial/function, exact for every member of the
    interpolation space.
    """
    if basis_kind not in ("function", "polynomial"):
        raise ValueError(f"unknown basis kind {basis_kind!r}")
    rule = laguerre_rule(family, beta, M, modified=True)
    z = rule.nodes
    n = M + 1
    D = np.zeros((n, n))
    if family == "GLR":
        kind = basis_kind
        vals, _ = laguerre_all(M + 1, beta, z,
                               kind="function" if kind == "function" else "polynomial")
        g = vals[M + 1]
        zi = z[:, None]
        zj = z[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            D = g[:, None] / ((zi - zj) * g[None, :])
        if kind == "function":
            np.fill_diagonal(D, 0.0)
            D[0, 0] = -beta * (M + 1) / 2.0
        else:
            np.fill_diagonal(D, beta / 2.0)
            D[0, 0] = -beta * M / 2.0
    elif family == "GL":
        vals, _ = laguerre_all(M, beta, z,
                               kind="function" if basis_kind == "function" else "polynomial")
        g = vals[M]
        zi = z[:, None]
        zj = z[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            D = g[:, None] * zj / ((zi - zj) * g[None, :] * zi)
        if basis_kind == "function":
            np.fill_diagonal(D, -0.5 / z)
        else:
            np.fill_diagonal(D, (beta * z - 1.0) / (2.0 * z))
    else:
        raise ValueError(f"unknown Laguerre family {family!r}")
    return DiffMatrix(entries=D, family=family, basis_kind=basis_kind, beta=beta)
