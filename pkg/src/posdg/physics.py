"""Compressible-flow state algebra.

Conserved states are arrays with the variable index last: (rho, m_x, E) in
one dimension and (rho, m_x, m_y, E) in two. All functions broadcast over
arbitrary leading axes.

The entropy pair used throughout is eta(u) = -rho s with s = log(p / rho^gamma),
whose gradient gives the entropy variables

    v = (gamma + 1 - s - rho e_int / (rho e), m / (rho e), -rho / (rho e))

with rho e = E - |m|^2 / (2 rho) the internal energy density. The matching
flux potential is psi_k = (gamma - 1) rho u_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GasParams",
    "primitive_to_conserved",
    "conserved_to_primitive",
    "pressure",
    "internal_energy",
    "is_admissible",
    "entropy",
    "entropy_potential",
    "entropy_vars",
    "entropy_to_conserved",
    "log_mean",
    "euler_flux",
    "ec_prims",
    "ec_fluxes_prims",
    "ec_fluxes",
    "davis_wavespeed",
    "zhang_beta",
    "viscous_sigma",
    "mirror_state",
    "wall_riemann_state",
    "noslip_state",
]


@dataclass(frozen=True)
class GasParams:
    """Ideal-gas and transport parameters.

    ``mu`` is the dynamic viscosity in the nondimensional momentum equation;
    the effective viscosity is ``mu / Re`` so configurations can state either
    a plain viscosity (Re = 1) or a Reynolds number (mu = 1).
    """

    gamma: float = 1.4
    mu: float = 0.0
    Re: float = 1.0
    Pr: float = 0.75

    @property
    def mu_eff(self) -> float:
        return self.mu / self.Re

    @property
    def viscous(self) -> bool:
        return self.mu_eff != 0.0


def _split(u):
    rho = u[..., 0]
    mom = u[..., 1:-1]
    E = u[..., -1]
    return rho, mom, E


def internal_energy(u):
    """rho e = E - |m|^2 / (2 rho)."""
    rho, mom, E = _split(u)
    return E - 0.5 * np.sum(mom * mom, axis=-1) / rho


def pressure(u, gas: GasParams):
    return (gas.gamma - 1.0) * internal_energy(u)


def is_admissible(u, eps: float = 0.0):
    rho = u[..., 0]
    return (rho > eps) & (internal_energy(u) > eps)


def primitive_to_conserved(prim, gas: GasParams):
    """(rho, velocities..., p) -> conserved."""
    prim = np.asarray(prim, dtype=float)
    rho = prim[..., 0]
    vel = prim[..., 1:-1]
    p = prim[..., -1]
    u = np.empty_like(prim)
    u[..., 0] = rho
    u[..., 1:-1] = rho[..., None] * vel
    u[..., -1] = p / (gas.gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=-1)
    return u


def conserved_to_primitive(u, gas: GasParams):
    rho, mom, E = _split(u)
    prim = np.empty_like(u)
    prim[..., 0] = rho
    prim[..., 1:-1] = mom / rho[..., None]
    prim[..., -1] = pressure(u, gas)
    return prim


def entropy(u, gas: GasParams):
    """eta(u) = -rho log(p / rho^gamma)."""
    rho = u[..., 0]
    p = pressure(u, gas)
    return -rho * (np.log(p) - gas.gamma * np.log(rho))


def entropy_potential(u, gas: GasParams):
    """psi_k = (gamma - 1) rho u_k, one column per direction."""
    rho, mom, _ = _split(u)
    return (gas.gamma - 1.0) * mom


def entropy_vars(u, gas: GasParams):
    rho, mom, E = _split(u)
    rhoe = internal_energy(u)
    p = (gas.gamma - 1.0) * rhoe
    s = np.log(p) - gas.gamma * np.log(rho)
    v = np.empty_like(u)
    v[..., 0] = (gas.gamma + 1.0 - s) - E / rhoe
    v[..., 1:-1] = mom / rhoe[..., None]
    v[..., -1] = -rho / rhoe
    return v


def entropy_to_conserved(v, gas: GasParams):
    v = np.asarray(v, dtype=float)
    g = gas.gamma
    vel = v[..., 1:-1]
    vlast = v[..., -1]
    vsq = np.sum(vel * vel, axis=-1)
    s = g - v[..., 0] + 0.5 * vsq / vlast
    rhoe = ((g - 1.0) / (-vlast) ** g) ** (1.0 / (g - 1.0)) * np.exp(-s / (g - 1.0))
    u = np.empty_like(v)
    u[..., 0] = -rhoe * vlast
    u[..., 1:-1] = rhoe[..., None] * vel
    u[..., -1] = rhoe * (1.0 - 0.5 * vsq / vlast)
    return u


def log_mean(a, b):
    """Logarithmic mean (a - b) / log(a / b), series expansion near a = b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    da = a - b
    sa = a + b
    zeta = (da / sa) ** 2
    near = zeta < 1e-4
    # series: L = sa / (2 (1 + zeta/3 + zeta^2/5 + zeta^3/7))
    F = 1.0 + zeta * (1.0 / 3.0 + zeta * (1.0 / 5.0 + zeta / 7.0))
    # dummy values in the series branch keep the log/division warning-free
    log_ratio = np.log(np.where(near, 2.0, a) / np.where(near, 1.0, b))
    exact = da / np.where(near, 1.0, log_ratio)
    return np.where(near, sa / (2.0 * F), exact)


def euler_flux(u, gas: GasParams):
    """Physical inviscid fluxes, one (..., nvar) array per direction."""
    rho, mom, E = _split(u)
    p = pressure(u, gas)
    dim = u.shape[-1] - 2
    out = []
    for k in range(dim):
        uk = mom[..., k] / rho
        f = np.empty_like(u)
        f[..., 0] = mom[..., k]
        for j in range(dim):
            f[..., 1 + j] = mom[..., j] * uk
        f[..., 1 + k] += p
        f[..., -1] = (E + p) * uk
        out.append(f)
    return tuple(out)


def ec_prims(u, gas: GasParams):
    """(rho, vel, beta, vsq) entering the two-point flux, per state.

    Exposed separately so pairwise flux evaluations over many pairs drawn
    from few distinct states (the flux-differencing volume term) can
    compute these once per state and gather.
    """
    u = np.asarray(u, dtype=float)
    rho, mom, _ = _split(u)
    vel = mom / rho[..., None]
    beta = rho / (2.0 * pressure(u, gas))
    vsq = np.sum(vel * vel, axis=-1)
    return rho, vel, beta, vsq


def ec_fluxes_prims(primsL, primsR, gas: GasParams):
    """Two-point fluxes from precomputed ``ec_prims`` tuples."""
    rhoL, velL, betaL, vsqL = primsL
    rhoR, velR, betaR, vsqR = primsR
    g = gas.gamma
    dim = velL.shape[-1]

    rho_ln = log_mean(rhoL, rhoR)
    beta_ln = log_mean(betaL, betaR)
    vel_a = 0.5 * (velL + velR)
    p_a = 0.5 * (rhoL + rhoR) / (2.0 * 0.5 * (betaL + betaR))
    vsq_a = 0.5 * (vsqL + vsqR)
    h_term = 0.5 / ((g - 1.0) * beta_ln) - 0.5 * vsq_a

    bshape = np.broadcast_shapes(rhoL.shape, rhoR.shape) + (dim + 2,)
    out = []
    for k in range(dim):
        f = np.empty(bshape)
        f0 = rho_ln * vel_a[..., k]
        f[..., 0] = f0
        for j in range(dim):
            f[..., 1 + j] = vel_a[..., j] * f0
        f[..., 1 + k] += p_a
        fE = h_term * f0
        for j in range(dim):
            fE = fE + vel_a[..., j] * f[..., 1 + j]
        f[..., -1] = fE
        out.append(f)
    return tuple(out)


def ec_fluxes(uL, uR, gas: GasParams):
    """Entropy-conservative, kinetic-energy-preserving two-point fluxes.

    Built from arithmetic means of velocity and density, the logarithmic
    mean of density and of beta = rho / (2p). Returns one flux array per
    direction; inputs broadcast against each other.
    """
    return ec_fluxes_prims(ec_prims(uL, gas), ec_prims(uR, gas), gas)


def davis_wavespeed(uL, uR, n, gas: GasParams):
    """max(|u_L . n| + c_L, |u_R . n| + c_R) for a unit normal ``n``."""
    out = None
    for u in (uL, uR):
        rho, mom, _ = _split(u)
        p = pressure(u, gas)
        c = np.sqrt(gas.gamma * p / rho)
        un = np.sum(mom * np.asarray(n), axis=-1) / rho
        lam = np.abs(un) + c
        out = lam if out is None else np.maximum(out, lam)
    return out


def wavespeed_cache(u, sigmas, gas: GasParams, es_viscosity: bool = True,
                    eps0: float = 1e-14):
    """Per-state ingredients of the pair wavespeed bound, for gather reuse.

    The graph-viscosity rate is max over the two states of the viscous
    positivity bound (and, when ``es_viscosity``, the acoustic estimate
    |v.n| + c). Everything except the normal projections depends on the
    state alone, so residual assembly computes this once per node and
    gathers slices per pair; :func:`lam_hat_from_cache` finishes the job.
    Assumes unit normals. Returns ("inviscid", vel, cmax) where the bound
    collapses to |v.n| + cmax, or ("viscous", vel, c, rho, rhoe, p, tau, q).
    """
    u = np.asarray(u, dtype=float)
    dim = u.shape[-1] - 2
    rho, mom, _ = _split(u)
    vel = mom / rho[..., None]
    rhoe = internal_energy(u)
    p = (gas.gamma - 1.0) * rhoe
    c = np.sqrt(gas.gamma * p / rho) if es_viscosity else None
    if sigmas is None:
        cb = eps0 + p / np.sqrt(2.0 * rho * rhoe)
        cmax = np.maximum(cb, c) if es_viscosity else cb
        return ("inviscid", vel, cmax)
    tau = np.stack([sigmas[k][..., 1:-1] for k in range(dim)], axis=-2)
    q = np.stack(
        [np.sum(vel * sigmas[k][..., 1:-1], axis=-1) - sigmas[k][..., -1]
         for k in range(dim)], axis=-1)
    return ("viscous", vel, c, rho, rhoe, p, tau, q)


def _beta_side(cache, n, eps0):
    if cache[0] == "inviscid":
        _, vel, cmax = cache
        return np.abs(np.sum(vel * n, axis=-1)) + cmax
    _, vel, c, rho, rhoe, p, tau, q = cache
    un = np.sum(vel * n, axis=-1)
    tau_n = np.einsum("...kj,...k->...j", tau,
                      np.broadcast_to(n, vel.shape))
    qn = np.sum(q * n, axis=-1)
    visc = tau_n - p[..., None] * n
    root = np.sqrt(rho ** 2 * qn ** 2
                   + 2.0 * rho * rhoe * np.sum(visc * visc, axis=-1))
    beta = eps0 + np.abs(un) + (root + rho * np.abs(qn)) / (2.0 * rho * rhoe)
    return beta if c is None else np.maximum(beta, np.abs(un) + c)


def lam_hat_from_cache(cacheL, cacheR, n, eps0: float = 1e-14):
    """max of the per-side wavespeed bounds for a unit normal ``n``."""
    return np.maximum(_beta_side(cacheL, n, eps0), _beta_side(cacheR, n, eps0))


def gather_cache(cache, idx):
    """Slice every array of a wavespeed cache along the node axis."""
    return (cache[0],) + tuple(
        None if a is None else a[idx] for a in cache[1:])


def zhang_beta(u, sigma, n, gas: GasParams, eps0: float = 1e-14):
    """Maximum wavespeed bound for first-order viscous bar states.

    ``sigma`` is the tuple of viscous fluxes per direction (may be None for
    inviscid states), ``n`` a direction vector (not necessarily unit). The
    bound guarantees positivity of intermediate states of the viscous
    Riemann problem.
    """
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    dim = u.shape[-1] - 2
    rho, mom, _ = _split(u)
    vel = mom / rho[..., None]
    rhoe = internal_energy(u)
    p = (gas.gamma - 1.0) * rhoe
    un = np.sum(vel * n, axis=-1)

    if sigma is None:
        tau_n = np.zeros(u.shape[:-1] + (dim,))
        q = np.zeros(u.shape[:-1] + (dim,))
    else:
        # tau rows from the momentum components of sigma_k; heat flux from
        # the energy component: q_k = u . tau_k - sigma_k[energy]
        tau = np.stack([sigma[k][..., 1:-1] for k in range(dim)], axis=-2)
        tau_n = np.einsum("...kj,...k->...j", tau, np.broadcast_to(n, u.shape[:-1] + (dim,)))
        q = np.stack(
            [np.sum(vel * sigma[k][..., 1:-1], axis=-1) - sigma[k][..., -1]
             for k in range(dim)], axis=-1)
    qn = np.sum(q * n, axis=-1)
    visc = tau_n - p[..., None] * n
    # denominators use rho^2 e = rho * (rho e) with e the specific energy
    root = np.sqrt(rho ** 2 * qn ** 2 + 2.0 * rho * rhoe * np.sum(visc * visc, axis=-1))
    return eps0 + np.abs(un) + (root + rho * np.abs(qn)) / (2.0 * rho * rhoe)


def viscous_sigma(v, thetas, gas: GasParams):
    """Viscous fluxes sigma_k = K_k(v) theta from entropy variables and
    their gradients, evaluated matrix-free.

    ``thetas`` is a tuple of (..., nvar) gradient arrays, one per direction.
    Stokes hypothesis (bulk viscosity zero) and Fourier heat conduction with
    kappa = gamma mu_eff / Pr in terms of specific internal energy.
    """
    v = np.asarray(v, dtype=float)
    dim = v.shape[-1] - 2
    mu = gas.mu_eff
    kap = gas.gamma * mu / gas.Pr
    vlast = v[..., -1]
    vl2 = vlast * vlast

    if dim == 1:
        th = thetas[0]
        u1 = -v[..., 1] / vlast
        u_x = (v[..., 1] * th[..., -1] - vlast * th[..., 1]) / vl2
        e_x = th[..., -1] / vl2
        s = np.zeros_like(v)
        s[..., 1] = (4.0 / 3.0) * mu * u_x
        s[..., 2] = (4.0 / 3.0) * mu * u1 * u_x + kap * e_x
        return (s,)

    thx, thy = thetas
    u1 = -v[..., 1] / vlast
    u2 = -v[..., 2] / vlast
    u_x = (v[..., 1] * thx[..., -1] - vlast * thx[..., 1]) / vl2
    u_y = (v[..., 1] * thy[..., -1] - vlast * thy[..., 1]) / vl2
    v_x = (v[..., 2] * thx[..., -1] - vlast * thx[..., 2]) / vl2
    v_y = (v[..., 2] * thy[..., -1] - vlast * thy[..., 2]) / vl2
    e_x = thx[..., -1] / vl2
    e_y = thy[..., -1] / vl2
    tau_xx = mu * ((4.0 / 3.0) * u_x - (2.0 / 3.0) * v_y)
    tau_yy = mu * ((4.0 / 3.0) * v_y - (2.0 / 3.0) * u_x)
    tau_xy = mu * (u_y + v_x)
    sx = np.zeros_like(v)
    sx[..., 1] = tau_xx
    sx[..., 2] = tau_xy
    sx[..., 3] = u1 * tau_xx + u2 * tau_xy + kap * e_x
    sy = np.zeros_like(v)
    sy[..., 1] = tau_xy
    sy[..., 2] = tau_yy
    sy[..., 3] = u1 * tau_xy + u2 * tau_yy + kap * e_y
    return (sx, sy)


# ---------------------------------------------------------------------------
# exterior states for weakly imposed boundary conditions
# ---------------------------------------------------------------------------

def mirror_state(u, n):
    """Reflect the normal velocity: u+ = u - 2 (m . n) n."""
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    mom = u[..., 1:-1]
    mn = np.sum(mom * n, axis=-1, keepdims=True)
    out = u.copy()
    out[..., 1:-1] = mom - 2.0 * mn * n
    return out


def wall_riemann_state(u, n, gas: GasParams, pfloor: float = 1e-14):
    """Exterior state enforcing u.n = 0 through the exact wall pressure.

    The star pressure of the half-Riemann problem against a wall: a shock
    relation when the flow runs into the wall (u.n > 0), an isentropic
    rarefaction otherwise. The exterior state mirrors the velocity and
    carries the star pressure so the numerical flux sees p* at the wall.
    """
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    g = gas.gamma
    rho = u[..., 0]
    p = np.maximum(pressure(u, gas), pfloor)
    un = np.sum(u[..., 1:-1] * n, axis=-1) / rho
    c = np.sqrt(g * p / rho)

    A = 2.0 / ((g + 1.0) * rho)
    B = (g - 1.0) / (g + 1.0) * p
    disc = (2.0 * A * p + un ** 2) ** 2 - 4.0 * A * (A * p ** 2 - un ** 2 * B)
    p_shock = ((2.0 * A * p + un ** 2) + np.sqrt(np.maximum(disc, 0.0))) / (2.0 * A)
    base = np.maximum(1.0 + (g - 1.0) * un / (2.0 * c), pfloor)
    p_rare = p * base ** (2.0 * g / (g - 1.0))
    pstar = np.where(un > 0.0, p_shock, p_rare)

    out = mirror_state(u, n)
    # replace the pressure, keeping density and tangential momentum; the
    # floor scales with the kinetic energy so the reconstructed internal
    # energy survives the E = rhoe + kin roundoff at near-vacuum states
    mom = out[..., 1:-1]
    kin = 0.5 * np.sum(mom * mom, axis=-1) / rho
    rhoe_new = np.maximum(pstar / (g - 1.0), pfloor + 1e-13 * kin)
    out[..., -1] = rhoe_new + kin
    return out


def noslip_state(u):
    """Adiabatic no-slip exterior state: full velocity reversal."""
    u = np.asarray(u, dtype=float)
    out = u.copy()
    out[..., 1:-1] = -out[..., 1:-1]
    return out
