"""SSP-RK3 stepping: order, convexity, admissibility, full-run behavior."""

import numpy as np
import pytest

from posdg.bc import BCSet, dirichlet
from posdg.mesh import interval_mesh, rect_mesh
from posdg.physics import (
    GasParams,
    entropy,
    internal_energy,
    is_admissible,
    primitive_to_conserved,
)
from posdg.timestepping import Stepper, advance, ssp_rk3_step

GAS = GasParams(gamma=1.4)


class OdeStepper:
    """u' = a u as a fake stage operator, to isolate the RK combinatorics."""

    def __init__(self, a=1.0):
        self.a = a
        self.gas = GAS

    def prepare(self, u, t):
        return {"du": self.a * u}

    def apply(self, u, t, dt, prep):
        return u + dt * prep["du"], None


def test_rk3_zero_step_is_identity():
    u = np.array([[1.7]])
    out, _ = ssp_rk3_step(u, 0.0, 0.0, OdeStepper(), check=False)
    assert np.allclose(out, u, rtol=1e-15)


def test_rk3_third_order_on_linear_ode():
    errs = []
    for dt in (0.1, 0.05, 0.025):
        u = np.array([[1.0]])
        t = 0.0
        while t < 1.0 - 1e-12:
            u, _ = ssp_rk3_step(u, t, dt, OdeStepper(), check=False)
            t += dt
        errs.append(abs(float(u[0, 0]) - np.e))
    r1 = np.log2(errs[0] / errs[1])
    r2 = np.log2(errs[1] / errs[2])
    assert 2.7 < r1 < 3.3 and 2.7 < r2 < 3.3, (errs, r1, r2)


def test_rk3_single_step_local_error():
    # local truncation error of one step must be O(dt^4)
    errs = []
    for dt in (0.2, 0.1):
        u, _ = ssp_rk3_step(np.array([[1.0]]), 0.0, dt, OdeStepper(),
                            check=False)
        taylor = 1 + dt + dt ** 2 / 2 + dt ** 3 / 6
        assert abs(float(u[0, 0]) - taylor) < 1e-14
        errs.append(abs(float(u[0, 0]) - np.exp(dt)))
    assert 3.7 < np.log2(errs[0] / errs[1]) < 4.3


def _wave_setup(K=12, N=3):
    mesh = interval_mesh(0.0, 2 * np.pi, K, N, periodic=True)
    x = mesh.xy[..., 0]
    prim = np.empty(mesh.xy.shape[:-1] + (3,))
    prim[..., 0] = 2.0 + 0.5 * np.sin(x)
    prim[..., 1] = 0.7
    prim[..., 2] = 1.2
    return mesh, primitive_to_conserved(prim, GAS)


@pytest.mark.parametrize("mode", ["none", "elementwise", "convex", "low-only"])
def test_advance_conserves_on_periodic_mesh(mode):
    mesh, u0 = _wave_setup()
    st = Stepper(mesh, GAS, BCSet({}), mode=mode)
    u, diags = advance(st, u0, 0.0, 0.3, cfl=0.9)
    tot0 = (mesh.mass[..., None] * u0).sum(axis=(0, 1))
    tot1 = (mesh.mass[..., None] * u).sum(axis=(0, 1))
    assert np.abs(tot1 - tot0).max() < 1e-11 * np.abs(tot0).max()
    assert diags[-1].t == 0.3
    assert np.all(is_admissible(u))


def test_advance_entropy_nonincreasing_low_order():
    mesh, u0 = _wave_setup()
    st = Stepper(mesh, GAS, BCSet({}), mode="low-only")
    u, diags = advance(st, u0, 0.0, 0.5, cfl=0.5)
    etas = [float((mesh.mass * entropy(u0, GAS)).sum())]
    etas += [d.entropy for d in diags]
    drops = np.diff(etas)
    assert np.all(drops <= 1e-10 * abs(etas[0]))


def _riemann_setup(K=40, N=2):
    mesh = interval_mesh(0.0, 1.0, K, N)
    x = mesh.xy[..., 0]
    uL = primitive_to_conserved(np.array([1.0, 0.0, 1.0]), GAS)
    uR = primitive_to_conserved(np.array([0.125, 0.0, 0.1]), GAS)
    u0 = np.where(x[..., None] < 0.5, uL, uR)

    def g(xb, t):
        return np.where(xb[:, :1] < 0.5, uL, uR)

    return mesh, u0, BCSet({1: dirichlet(g)})


@pytest.mark.parametrize("mode", ["elementwise", "convex", "low-only"])
def test_advance_sod_shock_stays_admissible(mode):
    mesh, u0, bcs = _riemann_setup()
    st = Stepper(mesh, GAS, bcs, mode=mode, zeta=0.1)
    u, diags = advance(st, u0, 0.0, 0.15, cfl=0.5)
    assert np.all(is_admissible(u))
    assert min(d.min_rho for d in diags) > 0
    assert min(d.min_rhoe for d in diags) > 0


@pytest.mark.parametrize("mode", ["elementwise", "convex"])
def test_limiter_activates_on_strong_jump(mode):
    # near-vacuum Riemann data must engage the blending, and the run must
    # stay admissible throughout
    gas = GasParams(gamma=5.0 / 3.0)
    mesh = interval_mesh(0.0, 1.0, 50, 2)
    x = mesh.xy[..., 0]
    uL = np.array([1.0, 0.0, 0.1])
    uR = np.array([1e-3, 0.0, 1e-10])
    u0 = np.where(x[..., None] < 0.33, uL, uR)

    def g(xb, t):
        return np.where(xb[:, :1] < 0.33, uL, uR)

    st = Stepper(mesh, gas, BCSet({1: dirichlet(g)}), mode=mode, zeta=0.1)
    u, diags = advance(st, u0, 0.0, 0.1, cfl=0.5)
    assert np.all(is_admissible(u))
    assert max(d.limited_fraction for d in diags) > 0
    assert min(d.min_rho for d in diags) > 0


def test_advance_shock_capture_and_per_stage_dt():
    mesh, u0, bcs = _riemann_setup(K=24)
    st = Stepper(mesh, GAS, bcs, mode="elementwise", zeta=0.1,
                 shock_capture=True)
    u, diags = advance(st, u0, 0.0, 0.05, cfl=0.5, per_stage_dt=True)
    assert np.all(is_admissible(u))


def test_advance_hits_final_time_exactly():
    mesh, u0 = _wave_setup(K=6, N=2)
    st = Stepper(mesh, GAS, BCSet({}), mode="low-only")
    _, diags = advance(st, u0, 0.0, 0.0789, cfl=0.9)
    assert diags[-1].t == 0.0789


def test_advance_rejects_bad_cfl():
    mesh, u0 = _wave_setup(K=4, N=2)
    st = Stepper(mesh, GAS, BCSet({}), mode="low-only")
    with pytest.raises(ValueError):
        advance(st, u0, 0.0, 0.1, cfl=1.5)


def test_stepper_rejects_unknown_mode():
    mesh, _ = _wave_setup(K=4, N=2)
    with pytest.raises(ValueError):
        Stepper(mesh, GAS, BCSet({}), mode="中order")


def test_diagnostics_rows():
    mesh, u0 = _wave_setup(K=6, N=2)
    st = Stepper(mesh, GAS, BCSet({}), mode="elementwise")
    _, diags = advance(st, u0, 0.0, 0.05, cfl=0.8)
    row = diags[0].as_row()
    for key in ("step", "t", "dt", "min_rho", "min_rhoe", "entropy",
                "limited_fraction", "mass", "mom_x", "energy"):
        assert key in row
    assert row["min_rho"] > 0


def test_viscous_run_smoke():
    gas = GasParams(gamma=1.4, mu=0.01, Re=1.0, Pr=0.75)
    mesh, u0 = _wave_setup(K=8, N=2)
    st = Stepper(mesh, gas, BCSet({}), mode="elementwise")
    u, diags = advance(st, u0, 0.0, 0.05, cfl=0.5)
    assert np.all(is_admissible(u))
    assert internal_energy(u).min() > 0
