"""Uniform affine meshes with face-node connectivity.

Meshes store node coordinates per element, a per-element geometry class
(uniform meshes have one class, split-quad triangle meshes two), and flat
face-node arrays used by the residual evaluations:

* ``fpartner``: for every face node, the flat index (element * Nfp + slot)
  of the coinciding face node of the neighbor, or -1 on the boundary;
* ``ftag``: integer boundary tag (0 for interior nodes) assigned by a
  user-supplied classifier;
* ``fnormal`` / ``fwsJ``: physical unit outward normal and surface
  quadrature weight (reference face weight times surface Jacobian).

Connectivity is built by hashing physical face-node coordinates, with
coordinates wrapped for periodic directions, so all element types share one
code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sbp import RefOps, build_ops

__all__ = ["GeoClass", "Mesh", "interval_mesh", "rect_mesh"]


@dataclass(frozen=True)
class GeoClass:
    """Physical operators shared by all elements with the same affine map."""

    G: np.ndarray            # (dim, dim) cofactor matrix J * A^{-T}
    J: float
    Qx: tuple                # physical high-order operators, one per direction
    QLx: tuple               # physical low-order operators
    mass: np.ndarray         # (Np,) J * w
    wsJ: np.ndarray          # (Nfp,) physical face weights
    normals: np.ndarray      # (Nfp, dim) physical unit outward normals
    ebe: tuple               # (Np,) diag of E^T B_k E per physical direction
    pair_i: np.ndarray       # low-order skew sparsity, i < j
    pair_j: np.ndarray
    pair_n: np.ndarray       # (npairs, dim) n_ij = (QL_k - QL_k^T)_ij / 2


def _make_geo_class(ops: RefOps, A: np.ndarray) -> GeoClass:
    dim = ops.dim
    A = np.atleast_2d(A)
    J = float(np.linalg.det(A))
    if J <= 0:
        raise ValueError("element map must be orientation preserving")
    G = J * np.linalg.inv(A).T

    Qx, QLx, ebe = [], [], []
    for m in range(dim):
        Qm = sum(G[m, k] * ops.Q[k] for k in range(dim))
        QLm = sum(G[m, k] * ops.QL[k] for k in range(dim))
        Qx.append(Qm)
        QLx.append(QLm)
        Bm = sum(G[m, k] * ops.Bdiag[k] for k in range(dim))
        # E^T B E is diagonal (each face node owns one volume node), so the
        # volume-length vector E^T B_m suffices
        ebe.append(ops.E.T @ Bm)

    # face scaling: reference w^f nhat mapped through G gives wsJ * unit n
    Bphys = np.stack([sum(G[m, k] * ops.Bdiag[k] for k in range(dim))
                      for m in range(dim)], axis=-1)      # (Nfp, dim)
    wsJ = np.linalg.norm(Bphys, axis=1)
    normals = Bphys / wsJ[:, None]

    # low-order pair list from the physical skew parts
    skews = [0.5 * (Q - Q.T) for Q in QLx]
    mask = np.zeros_like(skews[0], dtype=bool)
    for S in skews:
        mask |= np.abs(S) > 1e-14
    iu, ju = np.nonzero(np.triu(mask, k=1))
    pair_n = np.stack([S[iu, ju] for S in skews], axis=-1)
    return GeoClass(
        G=G, J=J, Qx=tuple(Qx), QLx=tuple(QLx),
        mass=J * ops.weights, wsJ=wsJ, normals=normals,
        ebe=tuple(ebe),
        pair_i=iu, pair_j=ju, pair_n=pair_n,
    )


@dataclass
class Mesh:
    elem: str
    N: int
    ops: RefOps
    xy: np.ndarray            # (K, Np, dim)
    class_id: np.ndarray      # (K,)
    classes: list
    fpartner: np.ndarray      # (K, Nfp) flat partner index or -1
    ftag: np.ndarray          # (K, Nfp)
    extent: tuple             # bounding box, ((ax, bx), ...) per dimension

    # arrays derived in __post_init__
    mass: np.ndarray = field(init=False)      # (K, Np)
    fxy: np.ndarray = field(init=False)       # (K, Nfp, dim)
    fnormal: np.ndarray = field(init=False)   # (K, Nfp, dim)
    fwsJ: np.ndarray = field(init=False)      # (K, Nfp)

    def __post_init__(self):
        K = self.n_elements
        self.mass = np.stack([self.classes[c].mass for c in self.class_id])
        self.fxy = self.xy[:, self.ops.face_vol, :]
        self.fnormal = np.stack([self.classes[c].normals for c in self.class_id])
        self.fwsJ = np.stack([self.classes[c].wsJ for c in self.class_id])

    @property
    def n_elements(self) -> int:
        return len(self.xy)

    @property
    def n_face_nodes(self) -> int:
        return self.ops.E.shape[0]

    @property
    def dim(self) -> int:
        return self.ops.dim

    @property
    def total_mass(self):
        return self.mass.sum()

    def interior_mask(self):
        return self.fpartner.reshape(-1) >= 0

    def gather_exterior(self, uf_flat: np.ndarray) -> np.ndarray:
        """Partner values for interior face nodes (boundary slots get the
        node's own value; callers overwrite those from the BC set)."""
        part = self.fpartner.reshape(-1)
        idx = np.where(part >= 0, part, np.arange(len(part)))
        return uf_flat[idx]


def _connect(face_xy, face_cent, face_normal, extent, periodic, classify):
    """Match face nodes of conforming neighbor faces.

    A slot pairs with the slot at the same coordinate whose face occupies
    the same segment (equal centroid) with the opposite normal. The normal
    disambiguates element-corner nodes, which appear in two face slots of
    the same element; the centroid disambiguates mesh-vertex nodes, where
    several faces of surrounding elements meet. All are (K, Nfp, dim);
    returns (fpartner, ftag) with flat indices into K * Nfp.
    """
    from scipy.spatial import cKDTree

    K, Nfp, dim = face_xy.shape
    pts = face_xy.reshape(-1, dim).copy()
    cent = face_cent.reshape(-1, dim).copy()
    nrm = face_normal.reshape(-1, dim)
    span = np.array([hi - lo for lo, hi in extent])
    lo = np.array([e[0] for e in extent])
    for d in range(dim):
        if periodic[d]:
            # wrap so nodes and centroids at the upper boundary land on the
            # lower one; only entities exactly on the seam move
            for arr in (pts, cent):
                arr[:, d] = lo[d] + np.mod(arr[:, d] - lo[d], span[d])
                seam = np.abs(arr[:, d] - (lo[d] + span[d])) < 1e-9 * span[d]
                arr[seam, d] = lo[d]

    tol = 1e-7 * span.max()
    key_minus = np.hstack([pts, cent, -tol * nrm])
    key_plus = np.hstack([pts, cent, tol * nrm])
    dist, idx = cKDTree(key_minus).query(key_plus, k=1, distance_upper_bound=0.5 * tol)
    fpartner = np.where(np.isfinite(dist), idx, -1).astype(np.int64)
    matched = fpartner >= 0
    if np.any(matched):
        back = fpartner[fpartner[matched]]
        if not np.all(back == np.nonzero(matched)[0]):
            raise RuntimeError("face matching is not symmetric; mesh broken")

    ftag = np.zeros(K * Nfp, dtype=np.int64)
    bdry = fpartner < 0
    if np.any(bdry):
        coords = face_xy.reshape(-1, dim)[bdry]
        if classify is None:
            ftag[bdry] = 1
        else:
            tags = np.asarray(classify(coords), dtype=np.int64)
            if np.any(tags <= 0):
                raise ValueError("boundary classifier must return positive tags")
            ftag[bdry] = tags
    return fpartner.reshape(K, Nfp), ftag.reshape(K, Nfp)


def _build_connectivity(ops, xy, classes, class_id, extent, periodic, classify):
    face_xy = xy[:, ops.face_vol, :]
    cent = np.empty_like(face_xy)
    for f in range(ops.n_faces):
        rows = ops.face_index[f]
        cent[:, rows, :] = face_xy[:, rows, :].mean(axis=1, keepdims=True)
    fnormal = np.stack([classes[c].normals for c in class_id])
    return _connect(face_xy, cent, fnormal, extent, periodic, classify)


def interval_mesh(a: float, b: float, K: int, N: int,
                  periodic: bool = False, classify=None) -> Mesh:
    ops = build_ops("line", N)
    h = (b - a) / K
    left = a + h * np.arange(K)
    xy = left[:, None] + (ops.nodes[:, 0][None, :] + 1) * (h / 2)
    xy = xy[:, :, None]
    geo = _make_geo_class(ops, np.array([[h / 2]]))
    class_id = np.zeros(K, dtype=np.int64)
    fpartner, ftag = _build_connectivity(ops, xy, [geo], class_id,
                                         ((a, b),), (periodic,), classify)
    return Mesh(elem="line", N=N, ops=ops, xy=xy, class_id=class_id,
                classes=[geo], fpartner=fpartner, ftag=ftag, extent=((a, b),))


def rect_mesh(elem: str, box, Kx: int, Ky: int, N: int,
              periodic=(False, False), classify=None) -> Mesh:
    """Uniform mesh of the rectangle ``box`` = (ax, bx, ay, by).

    ``elem`` is "quad" or "tri"; triangles split each cell along the
    anti-diagonal into a lower-left and an upper-right element.
    """
    ax, bx, ay, by = box
    hx, hy = (bx - ax) / Kx, (by - ay) / Ky
    ex = np.arange(Kx)
    ey = np.arange(Ky)
    x0 = ax + hx * np.tile(ex, Ky)
    y0 = ay + hy * np.repeat(ey, Kx)

    if elem == "quad":
        ops = build_ops("quad", N)
        r = ops.nodes[:, 0]
        s = ops.nodes[:, 1]
        X = x0[:, None] + (r[None, :] + 1) * (hx / 2)
        Y = y0[:, None] + (s[None, :] + 1) * (hy / 2)
        xy = np.stack([X, Y], axis=-1)
        classes = [_make_geo_class(ops, np.diag([hx / 2, hy / 2]))]
        class_id = np.zeros(Kx * Ky, dtype=np.int64)
    elif elem == "tri":
        ops = build_ops("tri", N)
        r = ops.nodes[:, 0]
        s = ops.nodes[:, 1]
        # lower-left triangle: (x0,y0)-(x1,y0)-(x0,y1)
        Xl = x0[:, None] + (r[None, :] + 1) * (hx / 2)
        Yl = y0[:, None] + (s[None, :] + 1) * (hy / 2)
        # upper-right triangle: (x1,y1)-(x0,y1)-(x1,y0), rotated affine map
        Xu = (x0 + hx)[:, None] - (r[None, :] + 1) * (hx / 2)
        Yu = (y0 + hy)[:, None] - (s[None, :] + 1) * (hy / 2)
        xy = np.concatenate([np.stack([Xl, Yl], axis=-1),
                             np.stack([Xu, Yu], axis=-1)])
        classes = [_make_geo_class(ops, np.diag([hx / 2, hy / 2])),
                   _make_geo_class(ops, -np.diag([hx / 2, hy / 2]))]
        class_id = np.concatenate([np.zeros(Kx * Ky, dtype=np.int64),
                                   np.ones(Kx * Ky, dtype=np.int64)])
    else:
        raise ValueError(f"unknown 2d element type {elem!r}")

    fpartner, ftag = _build_connectivity(ops, xy, classes, class_id,
                                         ((ax, bx), (ay, by)), periodic, classify)
    return Mesh(elem=elem, N=N, ops=ops, xy=xy, class_id=class_id,
                classes=classes, fpartner=fpartner, ftag=ftag,
                extent=((ax, bx), (ay, by)))
