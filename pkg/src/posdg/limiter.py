"""Positivity-preserving blending of low- and high-order updates.

Given the low-order update u^L (admissible by construction) and the
increment P toward the high-order update, the largest feasible fraction

    l in [0, 1]:  rho(u^L + l P) >= rho_min  and  rhoe(u^L + l P) >= rhoe_min

reduces to a linear solve for the density and a quadratic solve for the
internal energy, since rho * rhoe is quadratic along the segment.  Two
assembly modes are provided: elementwise blending with a single l per
element (Zhang-Shu style) and pairwise convex (FCT style) limiting of the
antidiffusive flux differences, which localizes l to node pairs.  A modal
shock indicator can cap the blending parameter to force low-order behavior
near discontinuities independent of positivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh
from .physics import GasParams, internal_energy, pressure
from .rhs_low import LowOrderRHS

__all__ = [
    "Bounds",
    "LimiterReport",
    "generalized_bounds",
    "minimal_bounds",
    "solve_l",
    "zhang_shu_limit",
    "ConvexLimiter",
    "shock_indicator",
]


@dataclass(frozen=True)
class Bounds:
    """Per-node lower bounds on density and internal energy."""

    rho_min: np.ndarray
    rhoe_min: np.ndarray


def generalized_bounds(uL: np.ndarray, zeta: float) -> Bounds:
    """Relaxed bounds rho_min = zeta rho(u^L), rhoe_min = zeta rhoe(u^L)."""
    if not 0.0 < zeta <= 1.0:
        raise ValueError("zeta must lie in (0, 1]")
    return Bounds(zeta * uL[..., 0], zeta * internal_energy(uL))


def minimal_bounds(uL: np.ndarray, eps0: float = 1e-14) -> Bounds:
    """Bare positivity: both bounds equal the small constant eps0."""
    full = np.full(uL.shape[:-1], eps0)
    return Bounds(full, full)


def solve_l(uL: np.ndarray, P: np.ndarray, bounds: Bounds) -> np.ndarray:
    """Largest l in [0,1] keeping uL + l P inside the bounded admissible set.

    Vectorized over leading axes. uL must satisfy the bounds itself; the
    constant coefficient of the energy quadratic is clamped at zero to guard
    the roundoff case where it computes marginally negative.
    """
    rhoL, EL = uL[..., 0], uL[..., -1]
    mL = uL[..., 1:-1]
    rhoP, EP = P[..., 0], P[..., -1]
    mP = P[..., 1:-1]
    rho_min = np.broadcast_to(bounds.rho_min, rhoL.shape)
    rhoe_min = np.broadcast_to(bounds.rhoe_min, rhoL.shape)

    # density constraint is linear in l
    with np.errstate(divide="ignore", invalid="ignore"):
        l_rho = np.where(rhoL + rhoP >= rho_min, 1.0,
                         (rho_min - rhoL) / np.where(rhoP == 0.0, 1.0, rhoP))
    l_rho = np.clip(l_rho, 0.0, 1.0)

    # rho * (rhoe - rhoe_min) >= 0 is quadratic:  a l^2 + b l + c >= 0
    a = EP * rhoP - 0.5 * np.sum(mP * mP, axis=-1)
    b = (EL * rhoP + EP * rhoL - np.sum(mL * mP, axis=-1)
         - rhoe_min * rhoP)
    c = EL * rhoL - 0.5 * np.sum(mL * mL, axis=-1) - rhoe_min * rhoL
    c = np.maximum(c, 0.0)

    scale = np.maximum(np.abs(a) + np.abs(b) + np.abs(c), 1e-300)
    linear = np.abs(a) <= 1e-12 * scale

    with np.errstate(divide="ignore", invalid="ignore"):
        l_lin = np.where(b < 0.0, -c / np.where(b == 0.0, 1.0, b), np.inf)

        disc = b * b - 4.0 * a * c
        sq = np.sqrt(np.maximum(disc, 0.0))
        q = -0.5 * (b + np.copysign(sq, b))
        r1 = np.where(a != 0.0, q / np.where(a == 0.0, 1.0, a), np.inf)
        r2 = np.where(q != 0.0, c / np.where(q == 0.0, 1.0, q), np.inf)

    def first_nonneg(r):
        r = np.where(r >= -1e-12, np.maximum(r, 0.0), np.inf)
        return np.where(np.isnan(r), np.inf, r)

    l_quad = np.minimum(first_nonneg(r1), first_nonneg(r2))
    # an upward parabola with no real crossing never blocks; a roundoff-level
    # discriminant is a tangency, where the dip below the bound is within
    # arithmetic noise and the (well-conditioned) density constraint governs
    tangent = disc <= 1e-13 * (b * b + np.abs(4.0 * a * c))
    l_quad = np.where((a > 0.0) & tangent, np.inf, l_quad)
    l_e = np.where(linear, l_lin, l_quad)

    return np.minimum(l_rho, np.clip(l_e, 0.0, 1.0))


@dataclass(frozen=True)
class LimiterReport:
    """Diagnostics from one limited update."""

    l_elem: np.ndarray               # per-element blending parameter
    shock_xi: np.ndarray | None      # per-element shock blend, if active
    l_pairs_min: np.ndarray | None   # per-element min pairwise l (convex mode)
    min_rho: float
    min_rhoe: float


def _report(u, l_elem, shock_xi=None, l_pairs_min=None):
    return LimiterReport(
        l_elem=l_elem, shock_xi=shock_xi, l_pairs_min=l_pairs_min,
        min_rho=float(u[..., 0].min()),
        min_rhoe=float(internal_energy(u).min()))


def zhang_shu_limit(uLnew, rL, rH, dt, mesh: Mesh, bounds: Bounds,
                    cap=None):
    """Elementwise blend u = u^L + l^e (dt/m)(r^H - r^L).

    l^e is the minimum over the element's nodes of the per-node feasible
    fraction, optionally capped by a per-element array (shock indicator).
    Returns (limited field, report).
    """
    P = (dt / mesh.mass[..., None]) * (rH - rL)
    l_elem = solve_l(uLnew, P, bounds).min(axis=1)
    if cap is not None:
        l_elem = np.minimum(l_elem, cap)
    u = uLnew + l_elem[:, None, None] * P
    return u, _report(u, l_elem, shock_xi=cap)


class ConvexLimiter:
    """Pairwise limiting of the antidiffusive part of the high-order update.

    Requires the high-order scheme to run with the matched low-order
    interface flux, so the two residuals differ only through the volume
    pair fluxes

        F^H_ij = -sum_k (Q_k - Q_k^T)_ij [f_kS(u_i,u_j) - (s_ki + s_kj)/2]
        F^L_ij = low-order pair contribution,

    both antisymmetric. Each node's update is a convex combination of
    substates u^L_i + (dt n_i / m_i) l_ij (F^H_ij - F^L_ij) with n_i the
    node's pair-plus-interface cardinality, so the symmetrized pairwise

        l_ij = min(feasible fraction at i, feasible fraction at j)

    keeps every substate, hence the update, inside the bounds while
    preserving conservation exactly.
    """

    def __init__(self, mesh: Mesh, gas: GasParams, low: LowOrderRHS):
        from .physics import ec_fluxes  # local import to keep module load light

        self.mesh = mesh
        self.gas = gas
        self.low = low
        self._ec_fluxes = ec_fluxes
        self._class_elems = low._class_elems

        Np = mesh.ops.n_nodes
        face_count = np.bincount(mesh.ops.face_vol, minlength=Np)

        self._pi = []
        self._pj = []
        self._s_entries = []    # (dim, npairs) high-order skew entries
        self._low_slot = []     # indices of low-order pairs inside the union
        self._card = []         # per-node cardinality |I(i)| + |B(i)|
        for gc in mesh.classes:
            skews = [Q - Q.T for Q in gc.Qx]
            mask = np.zeros_like(skews[0], dtype=bool)
            for S in skews:
                mask |= np.abs(S) > 1e-14
            mask[gc.pair_i, gc.pair_j] = True
            iu, ju = np.nonzero(np.triu(mask, k=1))
            self._pi.append(iu)
            self._pj.append(ju)
            self._s_entries.append(np.stack([S[iu, ju] for S in skews]))
            lookup = {(i, j): p for p, (i, j) in enumerate(zip(iu, ju))}
            self._low_slot.append(np.array(
                [lookup[(i, j)] for i, j in zip(gc.pair_i, gc.pair_j)],
                dtype=int))
            deg = np.bincount(iu, minlength=Np) + np.bincount(ju, minlength=Np)
            self._card.append(deg + face_count)

    def __call__(self, uLnew, u, dt, sigmas, bounds: Bounds, cap=None):
        mesh = self.mesh
        dim = mesh.dim
        du = np.zeros_like(uLnew)
        l_min = np.ones(mesh.n_elements)
        lowP = self.low.pair_fluxes(u, sigmas)

        for c, elems in enumerate(self._class_elems):
            if len(elems) == 0 or len(self._pi[c]) == 0:
                continue
            pi, pj = self._pi[c], self._pj[c]
            uc = u[elems]
            ui, uj = uc[:, pi], uc[:, pj]
            fS = self._ec_fluxes(ui, uj, self.gas)
            dF = np.zeros_like(ui)
            for d in range(dim):
                fd = fS[d]
                if sigmas is not None:
                    sd = sigmas[d][elems]
                    fd = fd - 0.5 * (sd[:, pi] + sd[:, pj])
                dF -= self._s_entries[c][d][None, :, None] * fd
            if lowP[c] is not None:
                dF[:, self._low_slot[c]] -= lowP[c]

            uLc = uLnew[elems]
            mass = mesh.mass[elems]
            bc_ = Bounds(np.asarray(bounds.rho_min)[elems],
                         np.asarray(bounds.rhoe_min)[elems])
            card = self._card[c]
            fac_i = (dt * card[pi] / mass[:, pi])[..., None]
            fac_j = (dt * card[pj] / mass[:, pj])[..., None]
            li = solve_l(uLc[:, pi], fac_i * dF,
                         Bounds(bc_.rho_min[:, pi], bc_.rhoe_min[:, pi]))
            lj = solve_l(uLc[:, pj], -fac_j * dF,
                         Bounds(bc_.rho_min[:, pj], bc_.rhoe_min[:, pj]))
            l = np.minimum(li, lj)
            if cap is not None:
                l = np.minimum(l, cap[elems, None])
            l_min[elems] = l.min(axis=1)

            ldF = (dt * l)[..., None] * dF
            npair = len(pi)
            scatter = np.zeros((mesh.ops.n_nodes, npair))
            scatter[pi, np.arange(npair)] = 1.0
            scatter[pj, np.arange(npair)] -= 1.0
            du[elems] = (np.einsum("ip,kpv->kiv", scatter, ldF)
                         / mass[..., None])

        unew = uLnew + du
        return unew, _report(unew, l_min, shock_xi=cap, l_pairs_min=l_min)


def shock_indicator(u, ops, gas: GasParams):
    """Per-element blending value xi in [0,1] from modal energy of rho p.

    The top-mode energy fraction feeds a logistic ramp; xi = 1 means no
    forced low-order blending, xi = 0.5 is the strongest response.
    """
    q = u[..., 0] * pressure(u, gas)
    modal = q @ ops.modal_proj.T
    deg = ops.mode_degree
    N = ops.degree
    m2 = modal * modal
    tot = m2.sum(axis=1)
    top = m2[:, deg == N].sum(axis=1)
    low_tot = m2[:, deg <= N - 1].sum(axis=1)
    sub = m2[:, deg == N - 1].sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        E = np.maximum(np.where(tot > 0, top / tot, 0.0),
                       np.where(low_tot > 0, sub / low_tot, 0.0))

    T = 0.5 * 10.0 ** (-1.8 * (N + 1) ** 0.25)
    s = np.log(9999.0)
    alpha = 1.0 / (1.0 + np.exp(-s / T * (E - T)))
    alpha = np.where(alpha < 1e-3, 0.0, np.minimum(alpha, 0.5))
    return 1.0 - alpha
