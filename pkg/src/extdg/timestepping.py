"""Time integration of the semi-discrete system dc/dt = M c + b(c) + g(t).

Two schemes: Crank-Nicolson for fully linear operators, and a two-stage,
second-order, L-stable additive (IMEX) Runge-Kutta pair for nonlinear
problems.  The IMEX tableau is

    implicit:  a11 = a22 = gamma,  a21 = 1 - 2*gamma,  b = (1/2, 1/2)
    explicit:  a21~ = 1,           b~ = (1/2, 1/2)

with gamma = 1 - 1/sqrt(2).  Diffusion and damping are implicit; the
hyperbolic terms and the Dirichlet data are explicit, with the data
sampled at the explicit stage times (t_n and t_n + dt).

Dense linear algebra sits behind ``solve_dense`` / ``DenseFactor``
(LU with row pivoting); long Crank-Nicolson loops precompute the one-step
propagator so that each step is a single matrix-vector product.
"""

import time as _time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .space import State

__all__ = [
    "TimeLoop",
    "SingularMatrixError",
    "TimeLoopBlowUp",
    "DenseFactor",
    "solve_dense",
    "crank_nicolson_step",
    "imex2_step",
    "run",
    "IMEX_GAMMA",
]

IMEX_GAMMA = 1.0 - 1.0 / np.sqrt(2.0)
_SOLVE_TOL = 1e-10


class SingularMatrixError(np.linalg.LinAlgError):
    """Factorization met a pivot that is zero to working precision."""


class TimeLoopBlowUp(FloatingPointError):
    """The time loop produced a non-finite state."""


class DenseFactor:
    """LU factorization (row pivoting) of a square matrix, reusable across solves."""

    def __init__(self, M):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("matrix must be square")
        self.shape = M.shape
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            self.lu, self.piv = sla.lu_factor(M, check_finite=False)
        diag = np.abs(np.diag(self.lu))
        scale = max(np.abs(M).max(), 1.0)
        if diag.min() <= np.finfo(float).eps * scale * M.shape[0]:
            raise SingularMatrixError(
                f"matrix singular to working precision (smallest pivot {diag.min():.3e})")
        self._matrix = M

    def solve(self, rhs, refine=True):
        rhs = np.asarray(rhs, dtype=float)
        x = sla.lu_solve((self.lu, self.piv), rhs, check_finite=False)
        if refine:
            res = rhs - self._matrix @ x
            tol = _SOLVE_TOL * (1.0 + np.abs(rhs).max(initial=0.0))
            if np.abs(res).max(initial=0.0) > tol:
                x = x + sla.lu_solve((self.lu, self.piv), res, check_finite=False)
        return x


def solve_dense(M, rhs):
    """Solve M x = rhs by pivoted LU with one step of iterative refinement."""
    return DenseFactor(M).solve(rhs)


def crank_nicolson_step(M_tot, state, dt, g_fn=None, factor=None, refine=True):
    """One Crank-Nicolson step for dc/dt = M_tot c + g(t).

    Solves (I - dt/2 M) c_next = (I + dt/2 M) c + dt/2 (g(t) + g(t+dt)).
    ``factor`` may carry a prebuilt DenseFactor of (I - dt/2 M).
    """
    n = state.coeffs.size
    if factor is None:
        factor = DenseFactor(np.eye(n) - 0.5 * dt * M_tot)
    rhs = state.coeffs + 0.5 * dt * (M_tot @ state.coeffs)
    if g_fn is not None:
        rhs = rhs + 0.5 * dt * (g_fn(state.time) + g_fn(state.time + dt))
    out = State(factor.solve(rhs, refine=refine), state.time + dt)
    out.check_finite()
    return out


def imex2_step(op, state, dt, factor=None, M_impl=None):
    """One step of the additive second-order pair on an Operator bundle.

    Implicit part: diffusion + damping.  Explicit part: hyperbolic RHS
    (plus any explicit advection matrix) and the diffusive Dirichlet data.
    Each stage solves with the same matrix (I - gamma dt M_impl).
    """
    g = IMEX_GAMMA
    M = op.implicit_matrix() if M_impl is None else M_impl
    if factor is None:
        factor = DenseFactor(np.eye(op.space.dofs) - g * dt * M)
    t, c = state.time, state.coeffs

    def explicit(cv, tv):
        out = np.zeros_like(cv)
        if op.hyperbolic is not None:
            out += op.hyperbolic(cv, tv)
        if op.advection is not None:
            out += op.advection @ cv
        if op.dirichlet is not None:
            out += op.dirichlet.diffusive(tv)
        if op.source_load is not None:
            out += op.source_load(tv)
        return out

    u1 = factor.solve(c, refine=False)
    k1_impl = M @ u1
    k1_expl = explicit(u1, t)
    u2 = factor.solve(c + dt * (k1_expl + (1.0 - 2.0 * g) * k1_impl), refine=False)
    k2_impl = M @ u2
    k2_expl = explicit(u2, t + dt)
    cn = c + 0.5 * dt * (k1_impl + k2_impl + k1_expl + k2_expl)
    out = State(cn, t + dt)
    out.check_finite()
    return out


@dataclass
class TimeLoop:
    """Fixed-step loop description."""

    dt: float
    nsteps: int
    scheme: str = "crank_nicolson"
    t0: float = 0.0

    def __post_init__(self):
        if self.dt <= 0 or self.nsteps < 0:
            raise ValueError("need dt > 0 and nsteps >= 0")
        if self.scheme not in ("crank_nicolson", "imex2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


# steps beyond which building the dense one-step propagator pays off
_PROPAGATOR_MIN_STEPS = 500


def _run_cn(loop, op, state, observers, timings=None):
    n = state.coeffs.size
    t_setup = _time.perf_counter()
    M = op.linear_matrix()
    factor = DenseFactor(np.eye(n) - 0.5 * loop.dt * M)
    diri = op.dirichlet
    use_propagator = (loop.nsteps >= _PROPAGATOR_MIN_STEPS
                      and op.source_load is None
                      and (diri is None or diri.mu_is_constant))
    c = state.coeffs.copy()
    t = loop.t0
    if use_propagator:
        S = factor.solve(np.eye(n) + 0.5 * loop.dt * M, refine=False)
        if diri is not None:
            w_slope = factor.solve(diri.vec_slope)
            w_value = factor.solve(diri.vec_value)
        if timings is not None:
            timings["factorization"] = _time.perf_counter() - t_setup
        t_step = _time.perf_counter()
        for k in range(loop.nsteps):
            c = S @ c
            if diri is not None:
                a1, b1 = diri.coefficients(t)
                a2, b2 = diri.coefficients(t + loop.dt)
                c += 0.5 * loop.dt * ((a1 + a2) * w_slope + (b1 + b2) * w_value)
            t = loop.t0 + (k + 1) * loop.dt
            if not np.all(np.isfinite(c)):
                raise TimeLoopBlowUp(f"non-finite state after step {k + 1} (t={t})")
            _observe(observers, State(c, t), k + 1)
        if timings is not None:
            timings["stepping"] = _time.perf_counter() - t_step
    else:
        if timings is not None:
            timings["factorization"] = _time.perf_counter() - t_setup
        t_step = _time.perf_counter()
        st = State(c, t)
        for k in range(loop.nsteps):
            try:
                st = crank_nicolson_step(M, st, loop.dt, g_fn=op.forcing,
                                         factor=factor, refine=False)
            except FloatingPointError as exc:
                raise TimeLoopBlowUp(f"step {k + 1}: {exc}") from exc
            st.time = loop.t0 + (k + 1) * loop.dt
            _observe(observers, st, k + 1)
        if timings is not None:
            timings["stepping"] = _time.perf_counter() - t_step
        c, t = st.coeffs, st.time
    return State(c, t)


def _run_imex(loop, op, state, observers, timings=None):
    n = state.coeffs.size
    t_setup = _time.perf_counter()
    M = op.implicit_matrix()
    factor = DenseFactor(np.eye(n) - IMEX_GAMMA * loop.dt * M)
    if timings is not None:
        timings["factorization"] = _time.perf_counter() - t_setup
    t_step = _time.perf_counter()
    st = State(state.coeffs.copy(), loop.t0)
    for k in range(loop.nsteps):
        try:
            st = imex2_step(op, st, loop.dt, factor=factor, M_impl=M)
        except FloatingPointError as exc:
            raise TimeLoopBlowUp(f"step {k + 1}: {exc}") from exc
        st.time = loop.t0 + (k + 1) * loop.dt
        _observe(observers, st, k + 1)
    if timings is not None:
        timings["stepping"] = _time.perf_counter() - t_step
    return st


def _observe(observers, state, istep):
    for obs in observers:
        obs(state, istep)


def run(loop, op, initial, observers=(), timings=None):
    """Advance ``initial`` through ``loop.nsteps`` steps of the chosen scheme.

    Observers are callables (state, istep); they see the initial state as
    step 0 and every accepted step after that.  Deterministic: identical
    inputs give bit-identical trajectories.  ``timings``, if given a dict,
    receives wall-clock entries for the factorization and stepping phases.
    """
    state = State(initial.coeffs.copy(), loop.t0)
    _observe(observers, state, 0)
    if loop.nsteps == 0:
        return state
    if loop.scheme == "crank_nicolson":
        if not op.is_linear:
            raise ValueError("Crank-Nicolson requires a fully linear operator")
        return _run_cn(loop, op, state, observers, timings)
    return _run_imex(loop, op, state, observers, timings)
