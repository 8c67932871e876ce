"""Implicit Newmark time integration of the reduced system, plus an RK4 oracle.

Each Newmark step enforces the nonlinear balance

    M a + C v + K q + k_cub*(s.q)^3 s = g*sin(nu_f*t)

at the new time level with Newton iterations on the displacement q.  The
Newton matrix is the constant operator A = M/(beta*h^2) + gamma*C/(beta*h) + K
plus the rank-one cubic tangent, so each update is one Sherman-Morrison
correction of a precomputed inverse.  The inner kernels are compiled with
numba and release the GIL, which lets an ensemble of trajectories run on a
thread pool with bit-identical results regardless of the worker count.

``rk4_reference`` integrates the same system in first-order form with the
classical fourth-order Runge-Kutta scheme; it exists purely as an
independent check of the Newmark path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core_model import NumericsConfig
from .rom_assembly import ReducedSystem, external_force, nonlinear_force

# Newton stops early once its update falls at the rounding floor of q.  The
# residual is a difference of internal-force terms that can dwarf the forcing
# scale, so for stiff configurations the absolute residual tolerance sits
# below what float cancellation can deliver; the increment test recognizes
# that the iteration has converged to working precision.
_STEP_FLOOR = 2.2e-14


class NewtonFailureError(RuntimeError):
    """Newton iteration failed to converge within the allowed iterations."""

    def __init__(self, time: float, iterations: int, residuals: np.ndarray):
        self.time = time
        self.iterations = iterations
        self.residuals = residuals
        super().__init__(
            f"Newton did not converge at t={time:.9e} after {iterations} "
            f"iterations (last residual {residuals[-1]:.3e})"
        )


@dataclass(frozen=True)
class State:
    """Instantaneous modal state of the reduced system."""

    t: float
    q: np.ndarray
    v: np.ndarray
    a: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Discrete end-point record of one integrated trajectory.

    ``times`` is uniform with the requested step except possibly the final
    entry, which always lands exactly on the requested end time.  The full
    modal displacement/velocity history is kept only on request.
    """

    times: np.ndarray
    u_end: np.ndarray
    v_end: np.ndarray
    modal_history: np.ndarray | None = None
    modal_velocity: np.ndarray | None = None
    max_newton_iters: int = 0


@njit(cache=True, nogil=True)
def _newton_solve(
    Ainv, Ainv_s, M, C, K, g, nu_f, s, k_cub,
    q_n, v_n, a_n, t_new, h, beta, gamma, tol, max_iter, resid_out,
):
    """One Newmark step from (q_n, v_n, a_n) to time t_new with step h.

    Returns (q, v, a, iterations, converged).  ``resid_out`` records the
    residual norm seen at the start of every Newton iteration.
    """
    n = q_n.shape[0]
    q_pred = q_n + h * v_n + h * h * (0.5 - beta) * a_n
    v_pred = v_n + h * (1.0 - gamma) * a_n
    force = np.sin(nu_f * t_new)
    inv_bh2 = 1.0 / (beta * h * h)

    q = q_n.copy()
    iterations = 0
    converged = False
    floor_hit = False
    for it in range(max_iter + 1):
        acc = (q - q_pred) * inv_bh2
        vel = v_pred + gamma * h * acc
        u_end = 0.0
        for i in range(n):
            u_end += s[i] * q[i]
        cubic = k_cub * u_end * u_end * u_end
        resid = M @ acc + C @ vel + K @ q - g * force + cubic * s
        rnorm = 0.0
        for i in range(n):
            rnorm += resid[i] * resid[i]
        rnorm = np.sqrt(rnorm)
        if it < resid_out.shape[0]:
            resid_out[it] = rnorm
        if rnorm <= tol or floor_hit:
            iterations = it
            converged = True
            break
        if it == max_iter:
            iterations = it
            break
        # Jacobian A + 3*k_cub*u_end^2 s s^T, inverted by Sherman-Morrison.
        cfac = 3.0 * k_cub * u_end * u_end
        y = Ainv @ resid
        s_dot_y = 0.0
        s_dot_As = 0.0
        for i in range(n):
            s_dot_y += s[i] * y[i]
            s_dot_As += s[i] * Ainv_s[i]
        scale = cfac * s_dot_y / (1.0 + cfac * s_dot_As)
        dq = y - scale * Ainv_s
        q = q - dq
        dq_norm = 0.0
        q_norm = 0.0
        for i in range(n):
            dq_norm += dq[i] * dq[i]
            q_norm += q[i] * q[i]
        if np.sqrt(dq_norm) <= _STEP_FLOOR * np.sqrt(q_norm):
            floor_hit = True  # accept after refreshing acc/vel at loop top

    acc = (q - q_pred) * inv_bh2
    vel = v_pred + gamma * h * acc
    return q, vel, acc, iterations, converged


@njit(cache=True, nogil=True)
def _newmark_core(
    M, C, K, g, nu_f, s, k_cub, q0, v0, a0,
    dt, t_final, beta, gamma, tol, max_iter, record_modal, resid_scratch,
):
    """Integrate from 0 to t_final; returns the end-point record.

    The grid is uniform with spacing dt; the final step is shortened so the
    last node lands exactly on t_final.  On Newton failure the index of the
    failing step is returned (or -1 on success).
    """
    n = q0.shape[0]
    n_steps = int(np.ceil(t_final / dt - 1e-12))
    times = np.empty(n_steps + 1)
    u_end = np.empty(n_steps + 1)
    v_end = np.empty(n_steps + 1)
    if record_modal:
        modal_q = np.empty((n_steps + 1, n))
        modal_v = np.empty((n_steps + 1, n))
    else:
        modal_q = np.empty((1, 1))
        modal_v = np.empty((1, 1))

    A = M * (1.0 / (beta * dt * dt)) + C * (gamma / (beta * dt)) + K
    Ainv = np.linalg.inv(A)
    Ainv_s = Ainv @ s

    q = q0.copy()
    v = v0.copy()
    a = a0.copy()
    times[0] = 0.0
    su = 0.0
    sv = 0.0
    for i in range(n):
        su += s[i] * q[i]
        sv += s[i] * v[i]
    u_end[0] = su
    v_end[0] = sv
    if record_modal:
        modal_q[0] = q
        modal_v[0] = v

    max_iters_seen = 0
    for step in range(1, n_steps + 1):
        t_new = step * dt
        h = dt
        if step == n_steps:
            t_new = t_final
            h = t_final - (n_steps - 1) * dt
            if abs(h - dt) > 1e-9 * dt:
                A_last = M * (1.0 / (beta * h * h)) + C * (gamma / (beta * h)) + K
                Ainv = np.linalg.inv(A_last)
                Ainv_s = Ainv @ s
        q, v, a, iters, converged = _newton_solve(
            Ainv, Ainv_s, M, C, K, g, nu_f, s, k_cub,
            q, v, a, t_new, h, beta, gamma, tol, max_iter, resid_scratch,
        )
        if not converged:
            return times, u_end, v_end, modal_q, modal_v, step, max_iters_seen
        if iters > max_iters_seen:
            max_iters_seen = iters
        times[step] = t_new
        su = 0.0
        sv = 0.0
        for i in range(n):
            su += s[i] * q[i]
            sv += s[i] * v[i]
        u_end[step] = su
        v_end[step] = sv
        if record_modal:
            modal_q[step] = q
            modal_v[step] = v
    return times, u_end, v_end, modal_q, modal_v, -1, max_iters_seen


@njit(cache=True, nogil=True)
def _rk4_acceleration(Minv, C, K, g, nu_f, s, k_cub, t, q, v):
    n = q.shape[0]
    u_end = 0.0
    for i in range(n):
        u_end += s[i] * q[i]
    rhs = g * np.sin(nu_f * t) - k_cub * u_end ** 3 * s - C @ v - K @ q
    return Minv @ rhs


@njit(cache=True, nogil=True)
def _rk4_core(M, C, K, g, nu_f, s, k_cub, q0, v0, dt, t_final):
    n = q0.shape[0]
    n_steps = int(np.ceil(t_final / dt - 1e-12))
    times = np.empty(n_steps + 1)
    u_end = np.empty(n_steps + 1)
    v_end = np.empty(n_steps + 1)
    Minv = np.linalg.inv(M)

    q = q0.copy()
    v = v0.copy()
    times[0] = 0.0
    su = 0.0
    sv = 0.0
    for i in range(n):
        su += s[i] * q[i]
        sv += s[i] * v[i]
    u_end[0] = su
    v_end[0] = sv

    for step in range(1, n_steps + 1):
        t0 = (step - 1) * dt
        h = dt
        t1 = step * dt
        if step == n_steps:
            t1 = t_final
            h = t_final - (n_steps - 1) * dt
        k1q = v
        k1v = _rk4_acceleration(Minv, C, K, g, nu_f, s, k_cub, t0, q, v)
        q2 = q + 0.5 * h * k1q
        k2q = v + 0.5 * h * k1v
        k2v = _rk4_acceleration(Minv, C, K, g, nu_f, s, k_cub, t0 + 0.5 * h, q2, k2q)
        q3 = q + 0.5 * h * k2q
        k3q = v + 0.5 * h * k2v
        k3v = _rk4_acceleration(Minv, C, K, g, nu_f, s, k_cub, t0 + 0.5 * h, q3, k3q)
        q4 = q + h * k3q
        k4q = v + h * k3v
        k4v = _rk4_acceleration(Minv, C, K, g, nu_f, s, k_cub, t0 + h, q4, k4q)
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        times[step] = t1
        su = 0.0
        sv = 0.0
        for i in range(n):
            su += s[i] * q[i]
            sv += s[i] * v[i]
        u_end[step] = su
        v_end[step] = sv
    return times, u_end, v_end


def _residual_tolerance(sys: ReducedSystem, num: NumericsConfig) -> float:
    return num.newton_tol_abs + num.newton_tol_rel * float(
        np.linalg.norm(sys.force_shape)
    )


def _require_implicit(num: NumericsConfig) -> None:
    if num.newmark_beta <= 0.0:
        raise ValueError(
            "the displacement-driven Newton formulation requires newmark_beta > 0"
        )


def initial_acceleration(sys: ReducedSystem) -> np.ndarray:
    """Acceleration consistent with the initial state and the ODE at t = 0."""
    rhs = (
        external_force(0.0, sys)
        + nonlinear_force(sys.q0, sys)
        - sys.damping @ sys.v0
        - sys.stiffness @ sys.q0
    )
    return np.linalg.solve(sys.mass, rhs)


def newmark_step(state: State, sys: ReducedSystem, num: NumericsConfig) -> State:
    """Advance one Newmark step of size ``num.dt`` from ``state``."""
    _require_implicit(num)
    h = num.dt
    beta, gamma = num.newmark_beta, num.newmark_gamma
    A = sys.mass / (beta * h * h) + sys.damping * (gamma / (beta * h)) + sys.stiffness
    Ainv = np.linalg.inv(A)
    Ainv_s = Ainv @ sys.end_footprint
    resid_hist = np.zeros(num.newton_max_iter + 1)
    t_new = state.t + h
    q, v, a, iters, converged = _newton_solve(
        Ainv, Ainv_s, sys.mass, sys.damping, sys.stiffness,
        sys.force_shape, sys.force_freq, sys.end_footprint, sys.k_cub,
        np.asarray(state.q, dtype=float),
        np.asarray(state.v, dtype=float),
        np.asarray(state.a, dtype=float),
        t_new, h, beta, gamma,
        _residual_tolerance(sys, num), num.newton_max_iter, resid_hist,
    )
    if not converged:
        raise NewtonFailureError(t_new, iters, resid_hist[: iters + 1].copy())
    return State(t=t_new, q=q, v=v, a=a)


def integrate(
    sys: ReducedSystem,
    num: NumericsConfig,
    t_final: float,
    record_modal: bool = False,
) -> Trajectory:
    """Integrate the reduced system from rest state (q0, v0) up to t_final."""
    _require_implicit(num)
    if t_final <= 0.0:
        raise ValueError(f"t_final must be > 0, got {t_final}")
    a0 = initial_acceleration(sys)
    resid_scratch = np.zeros(num.newton_max_iter + 1)
    times, u_end, v_end, modal_q, modal_v, fail_step, max_iters = _newmark_core(
        sys.mass, sys.damping, sys.stiffness,
        sys.force_shape, sys.force_freq, sys.end_footprint, sys.k_cub,
        sys.q0, sys.v0, a0,
        num.dt, t_final, num.newmark_beta, num.newmark_gamma,
        _residual_tolerance(sys, num), num.newton_max_iter,
        record_modal, resid_scratch,
    )
    if fail_step >= 0:
        raise NewtonFailureError(
            times[fail_step - 1] + num.dt,
            num.newton_max_iter,
            resid_scratch.copy(),
        )
    return Trajectory(
        times=times,
        u_end=u_end,
        v_end=v_end,
        modal_history=modal_q if record_modal else None,
        modal_velocity=modal_v if record_modal else None,
        max_newton_iters=int(max_iters),
    )


def rk4_reference(sys: ReducedSystem, dt: float, t_final: float) -> Trajectory:
    """Classical RK4 integration of the first-order form; verification oracle."""
    if dt <= 0.0 or t_final <= 0.0:
        raise ValueError("dt and t_final must be > 0")
    times, u_end, v_end = _rk4_core(
        sys.mass, sys.damping, sys.stiffness,
        sys.force_shape, sys.force_freq, sys.end_footprint, sys.k_cub,
        sys.q0, sys.v0, dt, t_final,
    )
    return Trajectory(times=times, u_end=u_end, v_end=v_end)
