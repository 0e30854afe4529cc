"""SSP-RK3 time integration built from positivity-limited Euler stages.

Each Runge-Kutta stage is one forward-Euler update of the blended scheme;
the three-stage convex combination (Shu-Osher form) therefore inherits the
admissibility guarantee of the stages whenever dt satisfies the positivity
bound dt <= cfl * min_i m_i / (2 lambda_i) with cfl <= 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .bc import BCSet
from .limiter import (
    ConvexLimiter,
    LimiterReport,
    generalized_bounds,
    minimal_bounds,
    shock_indicator,
    zhang_shu_limit,
)
from .mesh import Mesh
from .physics import GasParams, entropy, internal_energy, is_admissible
from .rhs_high import HighOrderRHS, LDGGradient
from .rhs_low import LowOrderRHS

__all__ = ["Stepper", "advance", "StepDiagnostics"]

log = logging.getLogger("posdg")

MODES = ("none", "elementwise", "convex", "low-only")


class Stepper:
    """Limited forward-Euler stage operator plus the positivity CFL bound.

    mode selects the update: "low-only" (sparse scheme), "none" (unlimited
    high-order with entropy-stable interface dissipation), "elementwise"
    (Zhang-Shu style blend), or "convex" (pairwise FCT limiting, which
    forces the matched low-order interface flux in the high-order scheme).
    zeta > 0 selects the relaxed bounds; zeta = 0 the minimal ones.
    """

    def __init__(self, mesh: Mesh, gas: GasParams, bcs: BCSet,
                 mode: str = "elementwise", zeta: float = 0.1,
                 shock_capture: bool = False, es_viscosity: bool = True,
                 eps0: float = 1e-14):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        self.mesh = mesh
        self.gas = gas
        self.mode = mode
        self.zeta = zeta
        self.shock_capture = shock_capture
        self.eps0 = eps0
        self.low = LowOrderRHS(mesh, gas, bcs, es_viscosity=es_viscosity,
                               eps0=eps0)
        self.grad = LDGGradient(mesh, gas, bcs) if gas.viscous else None
        self.high = None
        self.convex = None
        if mode != "low-only":
            interface = "low_match" if mode == "convex" else "es_lf"
            self.high = HighOrderRHS(mesh, gas, bcs, interface=interface,
                                     low=self.low, eps0=eps0)
        if mode == "convex":
            self.convex = ConvexLimiter(mesh, gas, self.low)

    def prepare(self, u, t):
        """Residuals and wavespeeds of a stage state; dt-independent."""
        sig = self.grad(u, t)[2] if self.grad is not None else None
        RL = lam = None
        if self.mode != "none":
            RL, lam = self.low(u, t, sig, need_wavespeed=True)
        RH = self.high(u, t, sig) if self.high is not None else None
        return {"sig": sig, "RL": RL, "lam": lam, "RH": RH}

    def dt_bound(self, prep):
        """Largest admissibility-preserving Euler step for the prepared state."""
        if prep["lam"] is None:
            # unlimited mode: use the interface/pair wavespeeds of the
            # low-order scheme as a surrogate stability bound
            return None
        return float((self.mesh.mass / (2.0 * prep["lam"])).min())

    def apply(self, u, t, dt, prep):
        """One limited forward-Euler update. Returns (u_new, report)."""
        mesh = self.mesh
        minv = 1.0 / mesh.mass[..., None]
        if self.mode == "none":
            return u + dt * prep["RH"] * minv, None
        uL = u + dt * prep["RL"] * minv
        if self.mode == "low-only":
            return uL, None

        bounds = (generalized_bounds(uL, self.zeta) if self.zeta > 0
                  else minimal_bounds(uL, self.eps0))
        cap = None
        if self.shock_capture:
            cap = shock_indicator(u, mesh.ops, self.gas)
        if self.mode == "elementwise":
            return zhang_shu_limit(uL, prep["RL"], prep["RH"], dt, mesh,
                                   bounds, cap=cap)
        return self.convex(uL, u, dt, prep["sig"], bounds, cap=cap)


@dataclass
class StepDiagnostics:
    """Per-step scalar diagnostics collected by advance()."""

    step: int
    t: float
    dt: float
    min_rho: float
    min_rhoe: float
    totals: np.ndarray          # integrals of the conserved variables
    entropy: float
    limited_fraction: float     # share of elements with l^e < 1

    def as_row(self):
        out = {"step": self.step, "t": self.t, "dt": self.dt,
               "min_rho": self.min_rho, "min_rhoe": self.min_rhoe,
               "entropy": self.entropy,
               "limited_fraction": self.limited_fraction}
        names = (["mass", "mom_x", "mom_y", "energy"]
                 if len(self.totals) == 4 else ["mass", "mom_x", "energy"])
        out.update(zip(names, self.totals))
        return out


def _check_state(u, gas, step, stage, t):
    if not np.isfinite(u).all():
        k, i, _ = np.unravel_index(np.argmin(np.isfinite(u)), u.shape)
        raise FloatingPointError(
            f"non-finite state at step {step} stage {stage} t={t:.6g} "
            f"(element {k}, node {i})")
    ok = is_admissible(u)
    if not np.all(ok):
        k, i = np.unravel_index(np.argmin(ok), ok.shape)
        raise FloatingPointError(
            f"inadmissible state at step {step} stage {stage} t={t:.6g} "
            f"(element {k}, node {i}: rho={u[k, i, 0]:.3e}, "
            f"rhoe={internal_energy(u[k, i]):.3e})")


def ssp_rk3_step(u, t, dt, stepper: Stepper, prep1=None, step=0,
                 check=True):
    """One SSPRK(3,3) step in Shu-Osher form; returns (u_new, last report).

    prep1 may carry the already-prepared first-stage residuals (so advance
    can size dt from them without recomputation).
    """
    if prep1 is None:
        prep1 = stepper.prepare(u, t)
    u1, rep = stepper.apply(u, t, dt, prep1)
    if check:
        _check_state(u1, stepper.gas, step, 1, t)

    p2 = stepper.prepare(u1, t + dt)
    v, _ = stepper.apply(u1, t + dt, dt, p2)
    u2 = 0.75 * u + 0.25 * v
    if check:
        _check_state(u2, stepper.gas, step, 2, t)

    p3 = stepper.prepare(u2, t + 0.5 * dt)
    w, rep3 = stepper.apply(u2, t + 0.5 * dt, dt, p3)
    unew = u / 3.0 + (2.0 / 3.0) * w
    if check:
        _check_state(unew, stepper.gas, step, 3, t)
    return unew, (rep3 if rep3 is not None else rep)


def advance(stepper: Stepper, u0, t0, t_final, cfl,
            callback=None, log_every=200, per_stage_dt=False,
            max_steps=10 ** 7, collect=True):
    """March u0 from t0 to t_final; returns (u, list of StepDiagnostics).

    callback, when given, is invoked after every step as
    callback(step, t, u, diagnostics_row, limiter_report).

    dt is sized once per step from the pre-step state (Eq.-style positivity
    bound times the user CFL); per_stage_dt additionally enforces the bound
    on the inner stage states by shrinking dt and redoing the step.
    """
    if not 0.0 < cfl <= 1.0:
        raise ValueError("cfl must lie in (0, 1]")
    mesh, gas = stepper.mesh, stepper.gas
    u = np.array(u0, dtype=float)
    t = float(t0)
    diags = []
    step = 0

    while t < t_final - 1e-14 * max(1.0, abs(t_final)):
        if step >= max_steps:
            raise RuntimeError(f"exceeded {max_steps} steps at t={t:.6g}")
        prep1 = stepper.prepare(u, t)
        bound = stepper.dt_bound(prep1)
        dt = cfl * bound if bound is not None else cfl * _fallback_dt(stepper, u, t)
        dt = min(dt, t_final - t)

        if per_stage_dt:
            for _ in range(20):
                try:
                    unew, rep = ssp_rk3_step(u, t, dt, stepper, prep1, step)
                except FloatingPointError:
                    dt *= 0.5
                    continue
                break
            else:
                raise RuntimeError(f"step {step}: no admissible dt found")
        else:
            unew, rep = ssp_rk3_step(u, t, dt, stepper, prep1, step)

        u = unew
        t = t + dt
        step += 1

        if collect or callback is not None or step % log_every == 0:
            row = _diagnose(mesh, gas, u, t, dt, step, rep)
            if collect:
                diags.append(row)
            if callback is not None:
                callback(step, t, u, row, rep)
            if step % log_every == 0:
                log.info("step %d  t=%.6g  dt=%.3g  min rho=%.3e  "
                         "min rhoe=%.3e  limited=%.1f%%", step, t, dt,
                         row.min_rho, row.min_rhoe,
                         100 * row.limited_fraction)
    return u, diags


def _fallback_dt(stepper, u, t):
    # "none" mode has no positivity lambda; fall back to the low-order bound
    _, lam = stepper.low(u, t, None, need_wavespeed=True)
    return float((stepper.mesh.mass / (2.0 * lam)).min())


def _diagnose(mesh, gas, u, t, dt, step, rep: LimiterReport | None):
    totals = (mesh.mass[..., None] * u).sum(axis=(0, 1))
    eta = float((mesh.mass * entropy(u, gas)).sum())
    frac = 0.0
    if rep is not None:
        frac = float(np.mean(rep.l_elem < 1.0))
    return StepDiagnostics(
        step=step, t=t, dt=dt,
        min_rho=float(u[..., 0].min()),
        min_rhoe=float(internal_energy(u).min()),
        totals=totals, entropy=eta, limited_fraction=frac)
