"""Assembly of the semi-discrete operators.

The semi-discrete system is  dc/dt = A c + b(c) + h(c) + g(t)  where A
collects the interior-penalty diffusion blocks (plus optional linear
advection and tail damping), b the hyperbolic volume/edge terms, h the
interface flux exchange and g the weak Dirichlet data at z = 0.  All
assembled objects are mass-scaled: the modal bases are orthogonal, so the
mass matrix is diagonal (element width per DG mode, 1/beta per tail mode)
and its inverse is folded in once.

Conventions, fixed here and relied on by the tests:

* jump [v] = v(left) - v(right); average {v} = (v(left) + v(right)) / 2.
* at z = 0 the exterior trace is dropped: [v] = -v(0+), {mu v'} = mu v'(0+),
  and the data terms enter through the Dirichlet vector (Nitsche style).
* z = L is an ordinary interior edge: SIPG couples the element-N trace to
  the tail trace, the Rusanov flux carries the hyperbolic exchange, and the
  penalty uses the width of element N.
* a pure-DG space (no tail) gets the mirrored weak-Dirichlet treatment
  with homogeneous data at its right endpoint, and upwind extrapolation
  f(c-) for the hyperbolic flux there.
"""

import math
from dataclasses import dataclass

import numpy as np

from .basis import element_basis_all, tail_basis_all
from .quadrature import gauss_legendre_rule, laguerre_rule
from .space import Space, State

__all__ = [
    "Operator",
    "DampingProfile",
    "DirichletData",
    "HyperbolicForm",
    "assemble_diffusion",
    "assemble_linear_advection",
    "assemble_damping",
    "assemble_dirichlet_vector",
    "eval_hyperbolic_rhs",
    "damping_profile",
    "mass_inverse",
    "tail_extent",
]


def mass_inverse(space):
    """Diagonal of the inverse mass matrix in dof order."""
    minv = np.empty(space.dofs)
    minv[: space.n_dg] = 1.0 / space.dz
    if space.has_tail:
        minv[space.tail_slice] = space.beta
    return minv


def _as_mu(mu):
    if callable(mu):
        return mu
    val = float(mu)
    return lambda z, t: np.full_like(np.asarray(z, dtype=float), val)


class _EdgeGeometry:
    """Traces of every basis function at the mesh edges, shared by assemblers."""

    def __init__(self, space):
        self.space = space
        p, dz = space.p, space.dz
        # per-element traces at the left/right endpoints (mesh is uniform)
        vals, ders = element_basis_all(p, np.array([0.0, dz]), 0.5 * dz, dz)
        self.vL, self.vR = vals[:, 0].copy(), vals[:, 1].copy()
        self.dL, self.dR = ders[:, 0].copy(), ders[:, 1].copy()
        if space.has_tail:
            j = np.arange(space.q + 1)
            self.tv = np.ones(space.q + 1)
            self.td = -space.beta * (j + 0.5)

    def sides(self, e):
        """Trace data at edge e in 0..N as (dof_slice, values, slopes, jump_sign).

        jump_sign is +1 for the left trace and -1 for the right trace; a
        boundary edge has a single side.
        """
        sp = self.space
        out = []
        if e >= 1:
            out.append((sp.dg_slice(e), self.vR, self.dR, +1.0))
        if e < sp.N:
            out.append((sp.dg_slice(e + 1), self.vL, self.dL, -1.0))
        elif sp.has_tail:
            out.append((sp.tail_slice, self.tv, self.td, -1.0))
        return out


def _tail_rule_and_basis(space, n_nodes, derivative=True):
    rule = laguerre_rule("GLR", space.beta, n_nodes - 1, modified=True)
    vals, ders = tail_basis_all(space.q, space.beta, space.L + rule.nodes, space.L)
    return rule, vals, (ders if derivative else None)


def _volume_points(space, ng):
    rule = gauss_legendre_rule(ng)
    pts = space.centers[:, None] + 0.5 * space.dz * rule.nodes[None, :]
    # evaluate on the reference element, then apply the physical chain rule
    vals, ders = element_basis_all(space.p, rule.nodes, 0.0, 2.0)
    return rule, pts, vals, ders * (2.0 / space.dz)


def assemble_diffusion(space, mu, sigma, t=0.0, ng=None):
    """Mass-scaled SIPG diffusion matrix (the -a(.,.,t) operator).

    Volume terms use per-element Gauss rules (ng defaults to p+2) and the
    q+1 node modified GLR rule on the tail, which is exact for constant mu.
    Edge terms run over all edges including z = 0 (Dirichlet convention)
    and z = L (two-sided interface).
    """
    if sigma < 0:
        raise ValueError("penalty must be non-negative")
    mu_f = _as_mu(mu)
    ng = space.p + 2 if ng is None else int(ng)
    n = space.dofs
    A = np.zeros((n, n))
    rule, pts, phi, dphi = _volume_points(space, ng)
    w = rule.weights
    mu_vals = np.asarray(mu_f(pts.ravel(), t), dtype=float).reshape(pts.shape)
    # -int mu w' v' per element
    blocks = -0.5 * space.dz * np.einsum("ik,mk,jk->mij", dphi * w[None, :], mu_vals, dphi)
    for m in range(space.N):
        sl = space.dg_slice(m + 1)
        A[sl, sl] += blocks[m]
    if space.has_tail:
        trule, tvals, tders = _tail_rule_and_basis(space, space.q + 1)
        mu_t = np.asarray(mu_f(space.L + trule.nodes, t), dtype=float)
        sl = space.tail_slice
        A[sl, sl] += -np.einsum("ik,k,jk->ij", tders, trule.weights * mu_t, tders)
    geo = _EdgeGeometry(space)
    edges = space.element_edges
    for e in range(space.N + 1):
        sides = geo.sides(e)
        mu_e = float(np.asarray(mu_f(np.array([edges[e]]), t))[0])
        avg = 1.0 / len(sides)
        pen = sigma / space.dz  # dz_0 := dz_1 at the left boundary, dz_N at z=L
        for (di, vi, si, ji) in sides:
            for (dj, vj, sj, jj) in sides:
                A[di, dj] += (mu_e * avg * np.outer(ji * vi, sj)
                              + mu_e * avg * np.outer(si, jj * vj)
                              - pen * np.outer(ji * vi, jj * vj))
    return A * mass_inverse(space)[:, None]


def assemble_linear_advection(space, u, ng=None):
    """Mass-scaled matrix form of -b(.,.) for the linear flux f(c) = u c.

    The Rusanov flux with wave speed |u| reduces to pure upwinding; the
    inflow data term at z = 0 lives in the Dirichlet vector, not here.
    """
    u = float(u)
    ng = space.p + 2 if ng is None else int(ng)
    n = space.dofs
    U = np.zeros((n, n))
    if u != 0.0:
        rule, _, phi, dphi = _volume_points(space, ng)
        block = 0.5 * space.dz * u * (dphi * rule.weights[None, :]) @ phi.T
        for m in range(space.N):
            sl = space.dg_slice(m + 1)
            U[sl, sl] += block
        if space.has_tail:
            trule, tvals, tders = _tail_rule_and_basis(space, space.q + 1)
            sl = space.tail_slice
            U[sl, sl] += u * (tders * trule.weights[None, :]) @ tvals.T
    geo = _EdgeGeometry(space)
    for e in range(1, space.N + 1):
        sides = geo.sides(e)
        if len(sides) == 1:
            # pure-DG right endpoint: upwind extrapolation fhat = u c-
            (di, vi, si, ji), = sides
            U[di, di] -= u * np.outer(ji * vi, vi)
            continue
        for (di, vi, si, ji) in sides:
            for (dj, vj, sj, jj) in sides:
                # fhat = u {w} + |u|/2 [w]; contribution is -fhat [v]
                fhat = 0.5 * u * vj + 0.5 * abs(u) * jj * vj
                U[di, dj] -= np.outer(ji * vi, fhat)
    return U * mass_inverse(space)[:, None]


@dataclass(frozen=True)
class DampingProfile:
    """Sigmoid absorbing-layer profile on the tail.

    gamma rises from ~0 at the interface to dgamma far out, crossing
    dgamma/2 exactly at z = L + alpha * L0, with steepness sigma_d.  L0 is
    the tail extent, i.e. the span of the tail's GLR nodes.
    """

    dgamma: float
    alpha: float
    sigma_d: float
    L0: float

    def gamma(self, z, L):
        x = np.asarray(z, dtype=float) - L
        return self.dgamma / (1.0 + np.exp((self.alpha * self.L0 - x) / self.sigma_d))


def tail_extent(space):
    """Distance between the first and last GLR nodes of the tail rule."""
    rule = laguerre_rule("GLR", space.beta, space.q, modified=True)
    return float(rule.nodes[-1] - rule.nodes[0])


def damping_profile(space, dgamma, alpha=0.3, sigma_d=None):
    if dgamma < 0:
        raise ValueError("damping amplitude must be non-negative")
    L0 = tail_extent(space)
    if sigma_d is None:
        sigma_d = L0 / 18.0
    return DampingProfile(dgamma=float(dgamma), alpha=float(alpha),
                          sigma_d=float(sigma_d), L0=L0)


def assemble_damping(space, profile, quad_factor=2):
    """Mass-scaled matrix of -int_tail gamma(z) w v dz on the tail block."""
    n = space.dofs
    G = np.zeros((n, n))
    if profile.dgamma == 0.0 or not space.has_tail:
        return G
    nn = quad_factor * (space.q + 1)
    rule, tvals, _ = _tail_rule_and_basis(space, nn, derivative=False)
    gam = profile.gamma(space.L + rule.nodes, space.L)
    sl = space.tail_slice
    G[sl, sl] = -np.einsum("ik,k,jk->ij", tvals, rule.weights * gam, tvals)
    return G * mass_inverse(space)[:, None]


class DirichletData:
    """Weak Dirichlet data vector at z = 0: t -> mass-scaled load vector.

    Splits into a diffusive part (consistency + penalty terms, paired with
    the implicit operator) and an advective part (the inflow flux f(g0)),
    so IMEX stepping can sample them on the correct tableau.
    """

    def __init__(self, space, mu, sigma, f, g0):
        self.space = space
        self.mu_is_constant = not callable(mu)
        self.mu = _as_mu(mu)
        self.sigma = float(sigma)
        self.f = f
        self.g0 = g0 if g0 is not None else (lambda t: 0.0)
        geo = _EdgeGeometry(space)
        minv = mass_inverse(space)[: space.p + 1]
        self.vec_slope = np.zeros(space.dofs)   # multiplies mu(0,t)*g0
        self.vec_value = np.zeros(space.dofs)   # multiplies sigma/dz*g0 and f(g0)
        self.vec_slope[: space.p + 1] = geo.dL * minv
        self.vec_value[: space.p + 1] = geo.vL * minv

    def _mu0(self, t):
        return float(np.asarray(self.mu(np.array([0.0]), t))[0])

    def coefficients(self, t):
        """(a_slope, a_value) with g(t) = a_slope*vec_slope + a_value*vec_value."""
        g0 = float(self.g0(t))
        a_slope = self._mu0(t) * g0
        a_value = (self.sigma / self.space.dz) * g0 + float(self.f(g0))
        return a_slope, a_value

    def diffusive(self, t):
        g0 = float(self.g0(t))
        if g0 == 0.0:
            return np.zeros(self.space.dofs)
        return (self._mu0(t) * g0 * self.vec_slope
                + (self.sigma / self.space.dz) * g0 * self.vec_value)

    def advective(self, t):
        fg = float(self.f(float(self.g0(t))))
        if fg == 0.0:
            return np.zeros(self.space.dofs)
        return fg * self.vec_value

    def __call__(self, t):
        a_slope, a_value = self.coefficients(t)
        return a_slope * self.vec_slope + a_value * self.vec_value


def assemble_dirichlet_vector(space, mu, sigma, f, g0):
    """Dirichlet load as a callable of time (see DirichletData)."""
    return DirichletData(space, mu, sigma, f, g0)


class HyperbolicForm:
    """Evaluator of the mass-scaled hyperbolic + source right-hand side -b(c).

    Precomputes all basis samples; each evaluation costs a handful of small
    matrix products.  Includes Rusanov edge fluxes (interface included),
    the inflow term f(g0(t)) at z = 0 and, for a pure-DG space, upwind
    extrapolation at the right endpoint.
    """

    def __init__(self, space, f, dfdc, source=None, g0=None, ng=None, tail_quad_factor=2):
        self.space = space
        self.f = f
        self.dfdc = dfdc
        self.source = source
        self.g0 = g0
        ng = space.p + 2 if ng is None else int(ng)
        self.vrule, self.pts, self.phi, self.dphi = _volume_points(space, ng)
        self.wphi = self.phi * self.vrule.weights[None, :]
        self.wdphi = self.dphi * self.vrule.weights[None, :]
        if space.has_tail:
            nn = tail_quad_factor * (space.q + 1)
            self.trule, self.tvals, self.tders = _tail_rule_and_basis(space, nn)
            self.tpts = space.L + self.trule.nodes
        self.geo = _EdgeGeometry(space)
        self.minv = mass_inverse(space)

    def __call__(self, coeffs, t):
        # overflow of a diverging state is caught by the trace check and the
        # stepper's finite check; silence the intermediate warnings
        with np.errstate(over="ignore", invalid="ignore"):
            return self._eval(coeffs, t)

    def _eval(self, coeffs, t):
        sp = self.space
        dg = coeffs[: sp.n_dg].reshape(sp.N, sp.p + 1)
        out = np.zeros(sp.dofs)
        # volume: + int f(c) v'  (+ int s v)
        u_vol = dg @ self.phi                      # (N, ng)
        f_vol = self.f(u_vol)
        rhs_dg = 0.5 * sp.dz * (f_vol @ self.wdphi.T)
        if self.source is not None:
            s_vol = self.source(self.pts.ravel(), t).reshape(self.pts.shape)
            rhs_dg += 0.5 * sp.dz * (s_vol @ self.wphi.T)
        out[: sp.n_dg] = rhs_dg.ravel()
        if sp.has_tail:
            ct = coeffs[sp.tail_slice]
            u_t = ct @ self.tvals
            out[sp.tail_slice] = self.tders @ (self.trule.weights * self.f(u_t))
            if self.source is not None:
                s_t = self.source(self.tpts, t)
                out[sp.tail_slice] += self.tvals @ (self.trule.weights * s_t)
        # edge fluxes at z_{m+1/2}, m = 1..N
        wl = dg @ self.geo.vR                      # left traces, elements 1..N
        wr = dg @ self.geo.vL                      # right traces
        cm = wl                                    # c- at edges 1..N
        if sp.has_tail:
            cp = np.concatenate([wr[1:], [coeffs[sp.tail_slice].sum()]])
        else:
            cp = np.concatenate([wr[1:], [wl[-1]]])   # outflow: upwind extrapolation
        if not (np.all(np.isfinite(cm)) and np.all(np.isfinite(cp))):
            raise FloatingPointError(f"non-finite edge trace at t={t}; solution blew up")
        lam = np.maximum(np.abs(self.dfdc(cm)), np.abs(self.dfdc(cp)))
        fhat = 0.5 * (self.f(cm) + self.f(cp)) + 0.5 * lam * (cm - cp)
        # -fhat [v]: -fhat*vR on the left element, +fhat*vL on the right
        rhs_edge = np.zeros((sp.N, sp.p + 1))
        rhs_edge -= np.outer(fhat, self.geo.vR)
        rhs_edge[1:] += np.outer(fhat[:-1], self.geo.vL)
        out[: sp.n_dg] += rhs_edge.ravel()
        if sp.has_tail:
            out[sp.tail_slice] += fhat[-1] * self.geo.tv
        # inflow at z = 0
        if self.g0 is not None:
            fg = float(self.f(float(self.g0(t))))
            if fg != 0.0:
                out[: sp.p + 1] += fg * self.geo.vL
        return out * self.minv


def eval_hyperbolic_rhs(space, state, f, dfdc, s=None, t=None, g0=None):
    """One-shot evaluation of the hyperbolic/source RHS for a State."""
    form = HyperbolicForm(space, f, dfdc, source=s, g0=g0)
    tt = state.time if t is None else t
    return form(state.coeffs, tt)


class SourceLoad:
    """Mass-scaled load vector t -> int s(z, t) v dz for a prescribed source.

    Uses the same quadrature choices as the nonlinear assembly: p+2 Gauss
    points per element and a doubled modified GLR rule on the tail.
    """

    def __init__(self, space, source, ng=None, tail_quad_factor=2):
        self.space = space
        self.source = source
        ng = space.p + 2 if ng is None else int(ng)
        self.vrule, self.pts, phi, _ = _volume_points(space, ng)
        self.wphi = phi * self.vrule.weights[None, :]
        if space.has_tail:
            nn = tail_quad_factor * (space.q + 1)
            self.trule, self.tvals, _ = _tail_rule_and_basis(space, nn, derivative=False)
            self.tpts = space.L + self.trule.nodes
        self.minv = mass_inverse(space)

    def __call__(self, t):
        sp = self.space
        out = np.zeros(sp.dofs)
        s_vol = self.source(self.pts.ravel(), t).reshape(self.pts.shape)
        out[: sp.n_dg] = (0.5 * sp.dz * (s_vol @ self.wphi.T)).ravel()
        if sp.has_tail:
            out[sp.tail_slice] = self.tvals @ (self.trule.weights * self.source(self.tpts, t))
        return out * self.minv


@dataclass
class Operator:
    """Bundle of assembled pieces consumed by the time integrators."""

    space: Space
    diffusion: np.ndarray
    advection: np.ndarray | None = None
    damping: np.ndarray | None = None
    dirichlet: DirichletData | None = None
    hyperbolic: HyperbolicForm | None = None
    source_load: SourceLoad | None = None

    def linear_matrix(self):
        """Full linear operator (diffusion + advection + damping)."""
        M = self.diffusion.copy()
        if self.advection is not None:
            M += self.advection
        if self.damping is not None:
            M += self.damping
        return M

    def implicit_matrix(self):
        """Stiff part for IMEX stepping (diffusion + damping)."""
        M = self.diffusion.copy()
        if self.damping is not None:
            M += self.damping
        return M

    def forcing(self, t):
        out = np.zeros(self.space.dofs)
        if self.dirichlet is not None:
            out += self.dirichlet(t)
        if self.source_load is not None:
            out += self.source_load(t)
        return out

    @property
    def is_linear(self):
        return self.hyperbolic is None
