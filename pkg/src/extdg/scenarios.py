"""End-to-end experiment definitions and drivers.

A Scenario bundles everything one run needs: equation and coefficients,
domain and resolution, boundary/initial data, penalty, optional absorbing
layer, time discretization, and (optionally) the matching single-domain
reference configuration.  ``run_scenario`` assembles the operators, picks
Crank-Nicolson for linear problems or the IMEX pair for Burgers, advances
in time, and reports errors in the finite subdomain against the chosen
reference:

* exact manufactured solution, when the scenario is the manufactured test;
* a single-domain DG run on a wider interval with the same spacing
  (``reference_run``), initialized by the same projection;
* the zero function, for absorbing-layer residual-reflection metrics.
"""

import math
import time as _time
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import tail_basis_all
from .quadrature import laguerre_rule
from .space import (State, build_dg_space, build_space, error_norms,
                    match_beta, project_dg_block)
from .operators import (DampingProfile, HyperbolicForm, Operator, SourceLoad,
                        assemble_damping, assemble_diffusion,
                        assemble_dirichlet_vector, assemble_linear_advection,
                        damping_profile)
from .timestepping import TimeLoop, run

__all__ = [
    "Scenario",
    "RunArtifacts",
    "ManufacturedSolution",
    "manufactured_eval",
    "gaussian_datum",
    "wave_train_bc",
    "project_initial",
    "run_scenario",
    "reference_run",
]


class ManufacturedSolution:
    """Exact solution z*exp(-z)*sin^2(z - t) and its forcing for the linear model.

    The source is the residual of the advection-diffusion operator applied
    to the exact solution, in closed form.
    """

    def __init__(self, mu, u):
        self.mu = mu
        self.u = u

    @staticmethod
    def exact(z, t):
        z = np.asarray(z, dtype=float)
        return z * np.exp(-z) * np.sin(z - t) ** 2

    def source(self, z, t):
        z = np.asarray(z, dtype=float)
        g = z * np.exp(-z)
        gp = (1.0 - z) * np.exp(-z)
        gpp = (z - 2.0) * np.exp(-z)
        s2 = np.sin(2.0 * (z - t))
        c2 = np.cos(2.0 * (z - t))
        h = np.sin(z - t) ** 2
        c_t = -g * s2
        c_z = gp * h + g * s2
        c_zz = gpp * h + 2.0 * gp * s2 + 2.0 * g * c2
        return c_t + self.u * c_z - self.mu * c_zz


def manufactured_eval(z, t, mu, u):
    """(exact value, source value) of the manufactured problem at (z, t)."""
    ms = ManufacturedSolution(mu, u)
    return ms.exact(z, t), ms.source(z, t)


def gaussian_datum(z_c, sigma_c):
    """Initial hump exp(-((z - z_c)/sigma_c)^2)."""
    def c0(z):
        return np.exp(-(((np.asarray(z, dtype=float) - z_c) / sigma_c) ** 2))
    return c0


def wave_train_bc(amplitude, k, horizon):
    """Dirichlet forcing g0(t) = A sin(2 pi k t / T)."""
    if amplitude <= 0 or k <= 0 or horizon <= 0:
        raise ValueError("need positive amplitude, wavenumber and horizon")
    omega = 2.0 * math.pi * k / horizon
    return lambda t: amplitude * math.sin(omega * t)


def project_initial(space, c0, tail_quad_factor=2):
    """Block-wise L2 projection of a callable onto the discrete space."""
    coeffs = np.zeros(space.dofs)
    coeffs[: space.n_dg] = project_dg_block(space, c0).ravel()
    if space.has_tail:
        nn = tail_quad_factor * (space.q + 1)
        rule = laguerre_rule("GLR", space.beta, nn - 1, modified=True)
        vals, _ = tail_basis_all(space.q, space.beta, space.L + rule.nodes, space.L)
        coeffs[space.tail_slice] = space.beta * (vals @ (rule.weights * c0(space.L + rule.nodes)))
    return State(coeffs, 0.0)


@dataclass
class Scenario:
    """One experiment: equation, discretization, data, and schedule."""

    equation: str                    # "linear_advdiff" | "burgers"
    L: float
    N: int
    p: int
    q: int
    T: float
    nsteps: int
    mu: float = 1.0
    u: float = 1.0                   # linear flux speed (ignored for burgers)
    beta: float | None = None        # None -> match the first GLR node gap to dz
    sigma: float | None = None       # None -> 200*mu
    bc: dict = field(default_factory=lambda: {"kind": "zero"})
    initial: dict = field(default_factory=lambda: {"kind": "zero"})
    source: str = "none"             # "none" | "manufactured"
    damping: dict | None = None      # {"dgamma": .., "alpha": .., "sigma_d": ..}
    reference: dict | None = None    # {"L_ref": ..}
    ng: int | None = None            # norm quadrature points per element
    snapshots: int = 0               # number of evenly spaced state snapshots

    def __post_init__(self):
        if self.equation not in ("linear_advdiff", "burgers"):
            raise ValueError(f"unknown equation {self.equation!r}")
        if self.initial.get("kind") == "manufactured" and self.source != "manufactured":
            raise ValueError("manufactured initial data requires the manufactured source")
        if self.source == "manufactured" and self.equation != "linear_advdiff":
            raise ValueError("the manufactured test is a linear advection-diffusion problem")
        if self.reference is not None:
            dz = self.L / self.N
            n_ref = self.reference["L_ref"] / dz
            if abs(n_ref - round(n_ref)) > 1e-9:
                raise ValueError("reference length must be a multiple of the grid spacing")

    @property
    def dz(self):
        return self.L / self.N

    @property
    def dt(self):
        return self.T / self.nsteps

    def resolved_beta(self):
        return match_beta(self.dz, self.q) if self.beta is None else self.beta

    def resolved_sigma(self):
        return 200.0 * self.mu if self.sigma is None else self.sigma

    def g0_function(self):
        kind = self.bc.get("kind", "zero")
        if kind == "zero":
            return None
        if kind == "constant":
            val = float(self.bc["value"])
            return lambda t: val
        if kind == "sine":
            return wave_train_bc(self.bc["A"], self.bc["k"], self.bc.get("T", self.T))
        raise ValueError(f"unknown boundary kind {kind!r}")

    def initial_function(self):
        kind = self.initial.get("kind", "zero")
        if kind == "zero":
            return None
        if kind == "gaussian":
            return gaussian_datum(self.initial["zc"], self.initial["sigma_c"])
        if kind == "manufactured":
            ms = ManufacturedSolution(self.mu, self.u)
            return lambda z: ms.exact(z, 0.0)
        raise ValueError(f"unknown initial kind {kind!r}")


@dataclass
class RunArtifacts:
    scenario: Scenario
    space: object
    final: State
    snapshots: list
    abs_errors: object = None
    rel_errors: object = None
    reference: object = None          # RunArtifacts of the reference run, if any
    timings: dict = field(default_factory=dict)
    max_re_linear: float | None = None

    @property
    def tail_dof_share(self):
        if not self.space.has_tail:
            return 0.0
        return self.space.n_tail / self.space.dofs


def _burgers_flux():
    return (lambda c: 0.5 * c * c), (lambda c: np.asarray(c, dtype=float))


def _linear_flux(u):
    return (lambda c: u * np.asarray(c, dtype=float)), \
           (lambda c: np.full_like(np.asarray(c, dtype=float), u))


def _build_operator(scn, space):
    sigma = scn.resolved_sigma()
    g0 = scn.g0_function()
    f, dfdc = _burgers_flux() if scn.equation == "burgers" else _linear_flux(scn.u)
    diff = assemble_diffusion(space, scn.mu, sigma)
    diri = assemble_dirichlet_vector(space, scn.mu, sigma, f, g0) if g0 is not None else None
    damping = None
    if scn.damping is not None and space.has_tail:
        prof = damping_profile(space, scn.damping["dgamma"],
                               alpha=scn.damping.get("alpha", 0.3),
                               sigma_d=scn.damping.get("sigma_d"))
        damping = assemble_damping(space, prof)
    source_load = None
    hyperbolic = None
    advection = None
    if scn.equation == "burgers":
        hyperbolic = HyperbolicForm(space, f, dfdc, g0=g0)
    else:
        advection = assemble_linear_advection(space, scn.u)
        if scn.source == "manufactured":
            ms = ManufacturedSolution(scn.mu, scn.u)
            source_load = SourceLoad(space, ms.source)
    return Operator(space=space, diffusion=diff, advection=advection,
                    damping=damping, dirichlet=diri, hyperbolic=hyperbolic,
                    source_load=source_load)


def _snapshot_observer(nsteps, count, store):
    if count <= 0:
        return None
    every = max(1, nsteps // count)

    def obs(state, istep):
        if istep % every == 0 or istep == nsteps:
            store.append((state.time, state.copy()))
    return obs


def _advance(scn, space, timings):
    t0 = _time.perf_counter()
    op = _build_operator(scn, space)
    timings["assembly"] = _time.perf_counter() - t0
    init_fn = scn.initial_function()
    initial = project_initial(space, init_fn) if init_fn is not None else State(np.zeros(space.dofs))
    scheme = "imex2" if scn.equation == "burgers" else "crank_nicolson"
    loop = TimeLoop(dt=scn.dt, nsteps=scn.nsteps, scheme=scheme)
    snaps = []
    obs = _snapshot_observer(scn.nsteps, scn.snapshots, snaps)
    final = run(loop, op, initial, observers=(obs,) if obs else (), timings=timings)
    return op, final, snaps


def run_scenario(scn):
    """Assemble, advance and post-process one scenario."""
    space = build_space(scn.L, scn.N, scn.p, scn.q, scn.resolved_beta())
    timings = {}
    try:
        op, final, snaps = _advance(scn, space, timings)
    except FloatingPointError as exc:
        op = _build_operator(scn, space)
        mre = float(np.linalg.eigvals(op.linear_matrix()).real.max())
        raise RuntimeError(
            f"scenario blew up ({exc}); max Re(lambda) of the linear part is {mre:.3e}") from exc
    art = RunArtifacts(scenario=scn, space=space, final=final, snapshots=snaps,
                       timings=timings)
    if scn.reference is not None:
        art.reference = reference_run(scn)
        ref = (art.reference.final, art.reference.space)
        art.abs_errors, art.rel_errors = error_norms(final, ref, space, ng=scn.ng)
    elif scn.source == "manufactured":
        ms = ManufacturedSolution(scn.mu, scn.u)
        art.abs_errors, art.rel_errors = error_norms(
            final, lambda z: ms.exact(z, final.time), space, ng=scn.ng)
    elif scn.damping is not None:
        # reflection metric: residual signal in [0, L] vs the zero reference
        art.abs_errors, art.rel_errors = error_norms(final, None, space, ng=scn.ng)
    return art


def reference_run(scn):
    """Single-domain DG run on [0, L_ref] with the same dz, p, penalty and dt.

    The right endpoint gets the weak homogeneous Dirichlet treatment; the
    domain is meant to be wide enough that the signal never reaches it.
    """
    if scn.reference is None:
        raise ValueError("scenario has no reference configuration")
    L_ref = float(scn.reference["L_ref"])
    n_ref = int(round(L_ref / scn.dz))
    ref_scn = replace(scn, L=L_ref, N=n_ref, reference=None, damping=None,
                      snapshots=0)
    space = build_dg_space(L_ref, n_ref, scn.p)
    timings = {}
    try:
        op, final, snaps = _advance(ref_scn, space, timings)
    except FloatingPointError as exc:
        raise RuntimeError(f"reference run blew up: {exc}") from exc
    return RunArtifacts(scenario=ref_scn, space=space, final=final,
                        snapshots=snaps, timings=timings)
