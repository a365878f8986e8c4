"""Coupled discretization space, state layout, point evaluation and norms.

The half line is split as [0, L] + [L, inf).  On [0, L] lives a mesh of N
elements carrying modal Legendre bases of degree p; on the tail a single
spectral element spanned by q+1 scaled Laguerre functions with scale beta.
Degrees of freedom are stored element-major (element 1 modes 0..p, element
2 modes 0..p, ..., tail modes 0..q), giving N*(p+1) + q + 1 entries.

A Space built without a tail (``build_dg_space``) describes the
single-domain reference discretization used for error comparisons.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .basis import element_basis_all, tail_basis_all
from .quadrature import gauss_legendre_rule, laguerre_rule

__all__ = [
    "Space",
    "State",
    "NormReport",
    "build_space",
    "build_dg_space",
    "evaluate",
    "interface_traces",
    "discrete_norm",
    "error_norms",
    "norm_points",
    "match_beta",
    "project_dg_block",
    "write_solution_csv",
    "write_coeff_csv",
]


@dataclass(frozen=True)
class Space:
    """Geometry and layout of the coupled (or pure-DG) discretization."""

    L: float
    N: int
    p: int
    q: int | None
    beta: float | None
    element_edges: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.element_edges.setflags(write=False)

    @property
    def has_tail(self):
        return self.q is not None

    @property
    def dz(self):
        return self.L / self.N

    @property
    def centers(self):
        return 0.5 * (self.element_edges[:-1] + self.element_edges[1:])

    @property
    def n_dg(self):
        return self.N * (self.p + 1)

    @property
    def n_tail(self):
        return 0 if self.q is None else self.q + 1

    @property
    def dofs(self):
        return self.n_dg + self.n_tail

    def dg_slice(self, m):
        """Dof slice of element ``m`` (1-based)."""
        if not 1 <= m <= self.N:
            raise IndexError(f"element index {m} out of range 1..{self.N}")
        return slice((m - 1) * (self.p + 1), m * (self.p + 1))

    @property
    def tail_slice(self):
        return slice(self.n_dg, self.dofs)


@dataclass
class State:
    """Flat coefficient vector plus the simulation time it belongs to."""

    coeffs: np.ndarray
    time: float = 0.0

    def copy(self):
        return State(self.coeffs.copy(), self.time)

    def dg_view(self, space):
        return self.coeffs[: space.n_dg].reshape(space.N, space.p + 1)

    def tail_view(self, space):
        return self.coeffs[space.tail_slice]

    def check_finite(self):
        if not np.all(np.isfinite(self.coeffs)):
            bad = int(np.flatnonzero(~np.isfinite(self.coeffs))[0])
            raise FloatingPointError(f"non-finite coefficient at dof {bad} (t={self.time})")


@dataclass(frozen=True)
class NormReport:
    l1: float
    l2: float
    linf: float
    relative: bool
    ng: int

    def by_name(self, name):
        return {"l1": self.l1, "l2": self.l2, "linf": self.linf}[name]

    @property
    def max(self):
        return max(self.l1, self.l2, self.linf)


def build_space(L, N, p, q, beta):
    """Uniform coupled space: N elements of width L/N plus a q+1 mode tail."""
    if L <= 0 or N < 1 or p < 0 or q < 0 or beta is None or beta <= 0:
        raise ValueError("need L>0, N>=1, p>=0, q>=0, beta>0")
    edges = np.linspace(0.0, L, N + 1)
    return Space(L=float(L), N=int(N), p=int(p), q=int(q), beta=float(beta),
                 element_edges=edges)


def build_dg_space(L, N, p):
    """Single-domain DG space on [0, L] with no tail block."""
    if L <= 0 or N < 1 or p < 0:
        raise ValueError("need L>0, N>=1, p>=0")
    edges = np.linspace(0.0, L, N + 1)
    return Space(L=float(L), N=int(N), p=int(p), q=None, beta=None,
                 element_edges=edges)


def zero_state(space, time=0.0):
    return State(np.zeros(space.dofs), time)


def evaluate(state, space, z):
    """Point values of the discrete solution.

    At interior element edges the left limit is returned; beyond L (or
    beyond the last element of a pure-DG space) the tail expansion is used,
    or zero if the space has none.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.zeros(z.shape)
    edges = space.element_edges
    m_idx = np.clip(np.searchsorted(edges, z, side="left") - 1, 0, space.N - 1)
    in_dg = z <= space.L
    dg = state.dg_view(space)
    for m in np.unique(m_idx[in_dg]):
        sel = in_dg & (m_idx == m)
        lo, hi = edges[m], edges[m + 1]
        vals, _ = element_basis_all(space.p, z[sel], 0.5 * (lo + hi), hi - lo)
        out[sel] = dg[m] @ vals
    in_tail = ~in_dg
    if np.any(in_tail):
        if space.has_tail:
            vals, _ = tail_basis_all(space.q, space.beta, z[in_tail], space.L)
            out[in_tail] = state.tail_view(space) @ vals
        # pure-DG space: zero past the last element
    return out if out.size > 1 else float(out[0])


def interface_traces(state, space):
    """(left value, right value, left slope, right slope) at z = L.

    The left pair comes from element N's Legendre expansion; the right pair
    from the Laguerre expansion, whose members all equal 1 at the interface
    and have slope -beta*(j + 1/2) there.
    """
    lo, hi = space.element_edges[-2], space.element_edges[-1]
    vals, ders = element_basis_all(space.p, np.array([space.L]), 0.5 * (lo + hi), hi - lo)
    cN = state.dg_view(space)[space.N - 1]
    left_v = float(cN @ vals[:, 0])
    left_s = float(cN @ ders[:, 0])
    if not space.has_tail:
        return left_v, 0.0, left_s, 0.0
    ct = state.tail_view(space)
    j = np.arange(space.q + 1)
    right_v = float(ct.sum())
    right_s = float(ct @ (-space.beta * (j + 0.5)))
    return left_v, right_v, left_s, right_s


def norm_points(space, ng):
    """Gauss points (N, ng) and reference weights used by the discrete norms."""
    rule = gauss_legendre_rule(ng)
    pts = space.centers[:, None] + 0.5 * space.dz * rule.nodes[None, :]
    return pts, rule.weights


def _norm_from_samples(samples, space, r, ng, weights):
    dz = space.dz
    if r == 2:
        return float(np.sqrt(0.5 * dz * np.sum(samples**2 * weights[None, :])))
    if r == 1:
        return float(0.5 * dz * np.sum(np.abs(samples) * weights[None, :]))
    if r in (np.inf, "inf"):
        return float(np.abs(samples).max())
    raise ValueError(f"unsupported norm order {r!r}")


def _samples_on_grid(obj, space, ng):
    pts, w = norm_points(space, ng)
    if isinstance(obj, State):
        vals = evaluate(obj, space, pts.ravel()).reshape(pts.shape)
    elif callable(obj):
        vals = np.asarray(obj(pts.ravel()), dtype=float).reshape(pts.shape)
    else:
        vals = np.asarray(obj, dtype=float)
        if vals.shape != pts.shape:
            raise ValueError(f"sample array must have shape {pts.shape}")
    return vals, w


def discrete_norm(obj, space, r, ng=None):
    """Discrete L^r norm over [0, L] on per-element Gauss grids.

    ``obj`` may be a State, a callable of z, or a precomputed (N, ng)
    sample array.  The tail never contributes; errors are always measured
    on the finite subdomain.  ``ng`` defaults to p + 2.
    """
    ng = space.p + 2 if ng is None else int(ng)
    if ng < 1:
        raise ValueError("ng must be at least 1")
    vals, w = _samples_on_grid(obj, space, ng)
    return _norm_from_samples(vals, space, r, ng, w)


def error_norms(state, reference, space, ng=None):
    """Absolute and relative L1/L2/Linf errors of ``state`` vs ``reference``.

    ``reference`` is a callable of z, another State (evaluated on its own
    space via a (state, space) tuple), or None for the zero function, in
    which case the relative report is the absolute one.
    """
    ng = space.p + 2 if ng is None else int(ng)
    pts, w = norm_points(space, ng)
    vals = evaluate(state, space, pts.ravel()).reshape(pts.shape)
    if reference is None:
        ref = np.zeros_like(vals)
    elif isinstance(reference, tuple):
        ref_state, ref_space = reference
        ref = evaluate(ref_state, ref_space, pts.ravel()).reshape(pts.shape)
    elif callable(reference):
        ref = np.asarray(reference(pts.ravel()), dtype=float).reshape(pts.shape)
    else:
        raise TypeError("reference must be None, a callable, or a (state, space) pair")
    diff = vals - ref
    abs_rep = NormReport(
        l1=_norm_from_samples(diff, space, 1, ng, w),
        l2=_norm_from_samples(diff, space, 2, ng, w),
        linf=_norm_from_samples(diff, space, np.inf, ng, w),
        relative=False, ng=ng)
    if reference is None:
        rel_rep = NormReport(abs_rep.l1, abs_rep.l2, abs_rep.linf, True, ng)
    else:
        rel_rep = NormReport(
            l1=abs_rep.l1 / _norm_from_samples(ref, space, 1, ng, w),
            l2=abs_rep.l2 / _norm_from_samples(ref, space, 2, ng, w),
            linf=abs_rep.linf / _norm_from_samples(ref, space, np.inf, ng, w),
            relative=True, ng=ng)
    return abs_rep, rel_rep


def match_beta(dz, q):
    """Scale beta making the first GLR node gap equal the mesh spacing.

    The first nonzero GLR node scales as x1(beta) = x1(1)/beta, so the
    matching condition x1(beta) = dz is solved exactly by x1(1)/dz.
    """
    if dz <= 0 or q < 1:
        raise ValueError("need dz > 0 and q >= 1")
    x1 = laguerre_rule("GLR", 1.0, q).nodes[1]
    return float(x1 / dz)


def project_dg_block(space, f, ng=None):
    """Per-element L2 projection coefficients of a callable onto the DG block."""
    ng = max(space.p + 1, 12) if ng is None else int(ng)
    rule = gauss_legendre_rule(ng)
    pts = space.centers[:, None] + 0.5 * space.dz * rule.nodes[None, :]
    fv = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    out = np.zeros((space.N, space.p + 1))
    for m in range(space.N):
        vals, _ = element_basis_all(space.p, pts[m], space.centers[m], space.dz)
        # (1/dz) * int f phi dz  ==  (1/2) * sum w f(phi)
        out[m] = 0.5 * (vals * rule.weights[None, :]) @ fv[m]
    return out


def write_solution_csv(path, state, space, plot_tail=0.0, npoints=1001):
    """Dump samples of the solution on a uniform grid over [0, L + plot_tail]."""
    zs = np.linspace(0.0, space.L + plot_tail, npoints)
    vals = evaluate(state, space, zs)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["z", "c"])
        for z, c in zip(zs, np.atleast_1d(vals)):
            wr.writerow([f"{z:.6e}", f"{c:.6e}"])


def write_coeff_csv(path, state, space):
    """Dump raw coefficients: index, block (dg|lag), element, mode, value."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["index", "block", "element", "mode", "value"])
        i = 0
        for m in range(1, space.N + 1):
            for j in range(space.p + 1):
                wr.writerow([i, "dg", m, j, f"{state.coeffs[i]:.6e}"])
                i += 1
        if space.has_tail:
            for j in range(space.q + 1):
                wr.writerow([i, "lag", "", j, f"{state.coeffs[i]:.6e}"])
                i += 1
