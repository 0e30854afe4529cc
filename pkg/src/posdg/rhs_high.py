"""High-order entropy-stable flux-differencing residual.

The volume term contracts the skew part of the physical operators with the
matrix of pairwise entropy-conservative fluxes,

    R_i = - sum_k sum_j (Q_k - Q_k^T)_ij [ f_kS(u_i, u_j) - (s_ki + s_kj)/2 ]
          - surface terms,

surface terms being either an entropy-stable local Lax-Friedrichs flux
built on the same two-point flux (default), or, for convex limiting, the
low-order interface flux shared bitwise with the low-order scheme.

Viscous terms follow the LDG construction: nodal gradients of the entropy
variables with central interface averages, the symmetric viscous fluxes
sigma = K(v) grad v evaluated matrix-free, and a central flux for the
divergence. :class:`LDGGradient` produces (v, theta, sigma); the resulting
sigma feeds both this residual and the low-order one.
"""

from __future__ import annotations

import numpy as np

from .bc import BCSet
from .mesh import Mesh
from .physics import (
    GasParams,
    davis_wavespeed,
    ec_fluxes,
    ec_fluxes_prims,
    ec_prims,
    entropy_vars,
    viscous_sigma,
)
from .rhs_low import LowOrderRHS, interface_flux_low

__all__ = ["HighOrderRHS", "LDGGradient"]


class LDGGradient:
    """Entropy-variable gradients and viscous fluxes.

    Theta_k = M^{-1} [ (Q_k - Q_k^T)/2 v + (1/2) E^T B_k v_ext ], the weak
    gradient with central interface averages; exterior v from the boundary
    conditions. Returns (v, thetas, sigmas) at all volume nodes.
    """

    def __init__(self, mesh: Mesh, gas: GasParams, bcs: BCSet):
        self.mesh = mesh
        self.gas = gas
        self.bcs = bcs
        self._class_elems = [np.nonzero(mesh.class_id == c)[0]
                             for c in range(len(mesh.classes))]
        self._skews = [tuple(0.5 * (Q - Q.T) for Q in gc.Qx)
                       for gc in mesh.classes]
        self._ET = mesh.ops.E.T

    def __call__(self, u, t):
        mesh = self.mesh
        K, Np, nvar = u.shape
        dim = mesh.dim
        v = entropy_vars(u, self.gas)

        fvol = mesh.ops.face_vol
        nf = mesh.n_face_nodes
        tags = mesh.ftag.reshape(-1)
        vf = v[:, fvol, :].reshape(K * nf, nvar)
        vP = mesh.gather_exterior(vf)
        bdry = tags > 0
        if np.any(bdry):
            uf = u[:, fvol, :].reshape(K * nf, nvar)
            nrm = mesh.fnormal.reshape(K * nf, dim)
            xyf = mesh.fxy.reshape(K * nf, dim)
            uPb = self.bcs.exterior_state(uf[bdry], xyf[bdry], nrm[bdry],
                                          tags[bdry], t, self.gas)
            vP[bdry] = entropy_vars(uPb, self.gas)
        vP = vP.reshape(K, nf, nvar)

        thetas = []
        for d in range(dim):
            th = np.zeros_like(u)
            for c, elems in enumerate(self._class_elems):
                if len(elems) == 0:
                    continue
                th[elems] = np.einsum("ij,kjv->kiv", self._skews[c][d], v[elems])
            face = 0.5 * (mesh.fwsJ * mesh.fnormal[..., d])[..., None] * vP
            th += np.einsum("is,ksv->kiv", self._ET, face)
            th /= mesh.mass[..., None]
            thetas.append(th)
        sigmas = viscous_sigma(v, tuple(thetas), self.gas)
        return v, tuple(thetas), sigmas


class HighOrderRHS:
    def __init__(self, mesh: Mesh, gas: GasParams, bcs: BCSet,
                 interface: str = "es_lf", low: LowOrderRHS | None = None,
                 lf_dissipation: bool = True, eps0: float = 1e-14):
        if interface not in ("es_lf", "low_match"):
            raise ValueError(f"unknown interface mode {interface!r}")
        if interface == "low_match" and low is None:
            raise ValueError("matched-interface mode needs the low-order scheme")
        self.mesh = mesh
        self.gas = gas
        self.bcs = bcs
        self.interface = interface
        self.low = low if low is not None else LowOrderRHS(mesh, gas, bcs, eps0=eps0)
        self.lf_dissipation = lf_dissipation
        bcs.validate(mesh.ftag)

        self._class_elems = [np.nonzero(mesh.class_id == c)[0]
                             for c in range(len(mesh.classes))]
        self._skews2 = [tuple(Q - Q.T for Q in gc.Qx) for gc in mesh.classes]
        self._ET = mesh.ops.E.T

        # the two-point fluxes are symmetric and the operators skew, so one
        # evaluation per unordered pair on the union sparsity of the skew
        # parts suffices; on tensor-product elements that sparsity is the
        # small fraction of pairs sharing a coordinate line
        self._pairs = []
        Np = mesh.ops.n_nodes
        iu, ju = np.triu_indices(Np, k=1)
        for S2s in self._skews2:
            nz = np.zeros(iu.shape, dtype=bool)
            for S2 in S2s:
                nz |= S2[iu, ju] != 0.0
            ii, jj = iu[nz], ju[nz]
            cols = np.arange(len(ii))
            gather = []
            for S2 in S2s:
                G = np.zeros((Np, len(ii)))
                G[ii, cols] = S2[ii, jj]
                G[jj, cols] = -S2[ii, jj]
                gather.append(G)
            self._pairs.append((ii, jj, tuple(gather)))

    def __call__(self, u, t, sigmas=None):
        mesh = self.mesh
        gas = self.gas
        K, Np, nvar = u.shape
        dim = mesh.dim
        R = np.zeros_like(u)

        for c, elems in enumerate(self._class_elems):
            if len(elems) == 0:
                continue
            gc = mesh.classes[c]
            uc = u[elems]
            ii, jj, gather = self._pairs[c]
            prims = ec_prims(uc, gas)
            F = ec_fluxes_prims(tuple(a[:, ii] for a in prims),
                                tuple(a[:, jj] for a in prims), gas)
            acc = np.zeros_like(uc)
            for d in range(dim):
                acc += np.einsum("ip,kpv->kiv", gather[d], F[d])
                if sigmas is not None:
                    sd = sigmas[d][elems]
                    # (Q - Q^T) o F^sigma 1 with F^sigma_ij = (s_i + s_j)/2;
                    # the row sum of the skew part is -ebe
                    acc -= 0.5 * np.einsum("ij,kjv->kiv", self._skews2[c][d],
                                           sd)
                    acc += 0.5 * gc.ebe[d][None, :, None] * sd
            R[elems] -= acc

        # surface contributions, one flat pass over all face slots
        uf, uP, sigf, sigP, nrm = self.low.face_states(u, t, sigmas)
        wsj = mesh.fwsJ.reshape(-1)
        if self.interface == "low_match":
            Rs, _ = interface_flux_low(uf, uP, sigf, sigP, nrm, wsj, gas,
                                       self.low.es_viscosity, self.low.eps0)
        else:
            fS = ec_fluxes(uf, uP, gas)
            flux_n = np.zeros_like(uf)
            for d in range(dim):
                fd = fS[d]
                if sigf is not None:
                    fd = fd - 0.5 * (sigf[d] + sigP[d])
                flux_n += nrm[..., d, None] * fd
            Rs = -wsj[..., None] * flux_n
            if self.lf_dissipation:
                lam = davis_wavespeed(uf, uP, nrm, gas)
                n1 = np.abs(nrm).sum(axis=-1)
                Rs += (0.5 * wsj * n1 * lam)[..., None] * (uP - uf)
        nf = mesh.n_face_nodes
        R += np.einsum("is,ksv->kiv", self._ET, Rs.reshape(K, nf, nvar))
        return R
