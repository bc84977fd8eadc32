"""Sparse assembly of the bilinear forms and load vectors.

Integration uses tensor Gauss rules with degree+2 points per axis, which is
exact for every form on affine cells up to the degrees this package uses.
Divergence/pressure pairings are assembled on the reference cell where they
are exact on any bilinear cell (the Piola divergence scales with the inverse
Jacobian determinant, which cancels the volume element).
"""

import numpy as np
import scipy.sparse as sp

from .elements import tensor_gauss
from .errors import InvalidMaterial
from .mesh import bilinear_jacobians, bilinear_map
from .time_galerkin import gauss_nodes


def _quad_order(*spaces):
    return max(s.degree for s in spaces) + 2


def _geometry(mesh, n1d):
    pts, wts = tensor_gauss(n1d)
    cell_ids = np.arange(mesh.n_cells)
    jac, det = bilinear_jacobians(mesh, cell_ids, pts)
    phys = bilinear_map(mesh, cell_ids, pts)
    return pts, wts, jac, det, phys


def _to_csr(local, rows_map, cols_map, shape, row_signs=None, col_signs=None):
    """Scatter (n_cells, n_a, n_b) local blocks into a csr matrix."""
    if row_signs is not None:
        local = local * row_signs[:, :, None]
    if col_signs is not None:
        local = local * col_signs[:, None, :]
    n_cells, n_a, n_b = local.shape
    rows = np.repeat(rows_map, n_b, axis=1).ravel()
    cols = np.tile(cols_map, (1, n_a)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=shape).tocsr()


def assemble_pressure_mass(W):
    """<p, w> over the broken pressure space; block diagonal per cell."""
    pts, wts, _, det, _ = _geometry(W.mesh, _quad_order(W))
    vals = W.ref.tabulate(pts)  # (nq, nloc)
    local = np.einsum("q,cq,qm,qn->cmn", wts, det, vals, vals)
    n = W.n_dofs
    return _to_csr(local, W.cell_dofs, W.cell_dofs, (n, n))


def _check_spd_2x2(K):
    K = np.asarray(K, dtype=float)
    if K.shape != (2, 2) or abs(K[0, 1] - K[1, 0]) > 1e-14 * (1 + abs(K[0, 1])):
        raise InvalidMaterial("permeability must be a symmetric 2x2 tensor")
    if np.linalg.eigvalsh(K).min() <= 0:
        raise InvalidMaterial("permeability tensor must be positive definite")
    return K


def _flux_physical_values(V, pts, jac, det):
    vhat, _ = V.ref.tabulate(pts)
    vals = np.einsum("cqij,qaj->cqai", jac, vhat) / det[..., None, None]
    return vals


def assemble_flux_mass(V, K):
    """<K^-1 q, v> over the RT space."""
    K = _check_spd_2x2(K)
    K_inv = np.linalg.inv(K)
    pts, wts, jac, det, _ = _geometry(V.mesh, _quad_order(V))
    vals = _flux_physical_values(V, pts, jac, det)
    kv = np.einsum("ij,cqaj->cqai", K_inv, vals)
    local = np.einsum("q,cq,cqai,cqbi->cab", wts, det, kv, vals)
    n = V.n_dofs
    return _to_csr(local, V.cell_dofs, V.cell_dofs, (n, n), V.cell_signs, V.cell_signs)


def assemble_div(V, W):
    """<div v, w>: rows in the pressure space, columns in the flux space."""
    pts, wts, _, _, _ = _geometry(W.mesh, _quad_order(V, W))
    _, divs = V.ref.tabulate(pts)  # reference divergence
    wvals = W.ref.tabulate(pts)
    # int div(v) w dx = int divhat(vhat) what dxhat on any bilinear cell
    local = np.einsum("q,qm,qa->ma", wts, wvals, divs)
    local = np.broadcast_to(local, (V.mesh.n_cells,) + local.shape)
    return _to_csr(local, W.cell_dofs, V.cell_dofs, (W.n_dofs, V.n_dofs),
                   col_signs=V.cell_signs)


def _displacement_gradients(H, pts, jac):
    _, gref = H.ref.tabulate(pts)  # (nq, nn, 2) reference gradients
    inv = np.linalg.inv(jac)
    # (grad N)_i = sum_j invJ[j, i] dNhat_j
    return np.einsum("cqji,qnj->cqni", inv, gref)


def assemble_elasticity(H, mu, lam):
    """2 mu <eps(u), eps(z)> + lam <div u, div z> on the vector space."""
    if mu <= 0:
        raise InvalidMaterial("shear modulus must be positive")
    pts, wts, jac, det, _ = _geometry(H.mesh, _quad_order(H))
    G = _displacement_gradients(H, pts, jac)
    w = wts[None, :] * det
    nn = H.ref.n_nodes
    local = np.zeros((H.mesh.n_cells, 2 * nn, 2 * nn))
    dot = np.einsum("cqid,cqjd->cqij", G, G)
    for ca in range(2):
        for cb in range(2):
            term = mu * np.einsum("cqi,cqj->cqij", G[..., cb], G[..., ca])
            if ca == cb:
                term = term + mu * dot
            term = term + lam * np.einsum("cqi,cqj->cqij", G[..., ca], G[..., cb])
            local[:, ca::2, cb::2] = np.einsum("cq,cqij->cij", w, term)
    n = H.n_dofs
    return _to_csr(local, H.cell_dofs, H.cell_dofs, (n, n))


def assemble_coupling(W, H, b):
    """b <p, div z>: rows in the displacement space, columns in pressure."""
    pts, wts, jac, det, _ = _geometry(H.mesh, _quad_order(W, H))
    G = _displacement_gradients(H, pts, jac)
    pvals = W.ref.tabulate(pts)
    w = wts[None, :] * det
    nn = H.ref.n_nodes
    local = np.zeros((H.mesh.n_cells, 2 * nn, W.ref.n_nodes))
    for comp in range(2):
        local[:, comp::2, :] = b * np.einsum("cq,cqi,qm->cim", w, G[..., comp], pvals)
    return _to_csr(local, H.cell_dofs, W.cell_dofs, (H.n_dofs, W.n_dofs))


def assemble_vector_mass(H):
    """<u, z> on the vector displacement space (used for L2 norms)."""
    pts, wts, jac, det, _ = _geometry(H.mesh, _quad_order(H))
    vals, _ = H.ref.tabulate(pts)
    w = wts[None, :] * det
    scalar = np.einsum("cq,qi,qj->cij", w, vals, vals)
    nn = H.ref.n_nodes
    local = np.zeros((H.mesh.n_cells, 2 * nn, 2 * nn))
    local[:, 0::2, 0::2] = scalar
    local[:, 1::2, 1::2] = scalar
    n = H.n_dofs
    return _to_csr(local, H.cell_dofs, H.cell_dofs, (n, n))


# -- load vectors ----------------------------------------------------------------


def assemble_flow_source(W, fn, t):
    """<f(., t), w> against the pressure test space."""
    rhs = np.zeros(W.n_dofs)
    if fn is None:
        return rhs
    pts, wts, _, det, phys = _geometry(W.mesh, _quad_order(W) + 1)
    vals = W.ref.tabulate(pts)
    f = np.broadcast_to(fn(phys[..., 0], phys[..., 1], t), det.shape)
    local = np.einsum("q,cq,cq,qm->cm", wts, det, f, vals)
    np.add.at(rhs, W.cell_dofs, local)
    return rhs


def assemble_body_force(H, fn, t):
    """<f_u(., t), z> against the displacement test space."""
    rhs = np.zeros(H.n_dofs)
    if fn is None:
        return rhs
    pts, wts, jac, det, phys = _geometry(H.mesh, _quad_order(H) + 1)
    vals, _ = H.ref.tabulate(pts)
    fx, fy = fn(phys[..., 0], phys[..., 1], t)
    w = wts[None, :] * det
    lx = np.einsum("cq,cq,qn->cn", w, np.broadcast_to(fx, det.shape), vals)
    ly = np.einsum("cq,cq,qn->cn", w, np.broadcast_to(fy, det.shape), vals)
    np.add.at(rhs, H.cell_dofs[:, 0::2], lx)
    np.add.at(rhs, H.cell_dofs[:, 1::2], ly)
    return rhs


_EDGE_REF_POINTS = (
    lambda t: np.column_stack([t, np.zeros_like(t)]),
    lambda t: np.column_stack([np.ones_like(t), t]),
    lambda t: np.column_stack([1.0 - t, np.ones_like(t)]),
    lambda t: np.column_stack([np.zeros_like(t), 1.0 - t]),
)


def assemble_traction(H, facet_ids, fn, t):
    """Boundary load int_F traction . z ds on the given facets.

    fn(x, y, t) returns the traction vector components (tx, ty).
    """
    mesh = H.mesh
    rhs = np.zeros(H.n_dofs)
    tq, wq = gauss_nodes(H.degree + 2)
    for fid in facet_ids:
        cell = mesh.facet_cells[fid, 0]
        edge = int(np.nonzero(mesh.cell_facets[cell] == fid)[0][0])
        # boundary facets are owned by one cell, so the canonical facet
        # direction equals the cell's counterclockwise edge parameter
        ref_pts = _EDGE_REF_POINTS[edge](tq)
        a, b = mesh.facets[fid]
        pts = mesh.vertices[a] + np.outer(tq, mesh.vertices[b] - mesh.vertices[a])
        length = mesh.facet_length(fid)
        gx, gy = fn(pts[:, 0], pts[:, 1], t)
        vals, _ = H.ref.tabulate(ref_pts)
        lx = length * np.einsum("q,q,qn->n", wq, np.broadcast_to(gx, tq.shape), vals)
        ly = length * np.einsum("q,q,qn->n", wq, np.broadcast_to(gy, tq.shape), vals)
        np.add.at(rhs, H.cell_dofs[cell, 0::2], lx)
        np.add.at(rhs, H.cell_dofs[cell, 1::2], ly)
    return rhs


def assemble_loads(spaces, scenario, t):
    """Flow and mechanics load vectors at time t for a scenario.

    The scenario provides `source(x, y, t)`, `body_force(x, y, t)` (either
    may be None) and `tractions`, a mapping from boundary tag to a traction
    function. The open-flow pressure datum is zero, so the natural boundary
    term of the Darcy equation vanishes and contributes nothing here.
    """
    flow = assemble_flow_source(spaces.pressure, getattr(scenario, "source", None), t)
    mech = assemble_body_force(spaces.displacement, getattr(scenario, "body_force", None), t)
    for tag, fn in (getattr(scenario, "tractions", None) or {}).items():
        fids = spaces.mesh.facets_with_tag(tag)
        mech += assemble_traction(spaces.displacement, fids, fn, t)
    return flow, mech


# -- field evaluation --------------------------------------------------------------


def eval_pressure(W, coeffs, ref_points):
    """Pressure values at reference points in every cell: (n_cells, n_pts)."""
    vals = W.ref.tabulate(ref_points)
    return np.einsum("qm,cm->cq", vals, coeffs[W.cell_dofs])


def eval_displacement(H, coeffs, ref_points):
    """Displacement vectors at reference points: (n_cells, n_pts, 2)."""
    vals, _ = H.ref.tabulate(ref_points)
    out = np.empty((H.mesh.n_cells, len(ref_points), 2))
    out[..., 0] = np.einsum("qn,cn->cq", vals, coeffs[H.cell_dofs[:, 0::2]])
    out[..., 1] = np.einsum("qn,cn->cq", vals, coeffs[H.cell_dofs[:, 1::2]])
    return out


def eval_flux(V, coeffs, ref_points):
    """Flux vectors at reference points: (n_cells, n_pts, 2)."""
    pts = np.asarray(ref_points, dtype=float)
    jac, det = bilinear_jacobians(V.mesh, np.arange(V.mesh.n_cells), pts)
    vals = _flux_physical_values(V, pts, jac, det)
    signed = coeffs[V.cell_dofs] * V.cell_signs
    return np.einsum("cqai,ca->cqi", vals, signed)


def eval_divergence(V, coeffs, ref_points):
    """Physical divergence of an RT field at reference points: (n_cells, n_pts)."""
    pts = np.asarray(ref_points, dtype=float)
    _, det = bilinear_jacobians(V.mesh, np.arange(V.mesh.n_cells), pts)
    _, divs = V.ref.tabulate(pts)
    signed = coeffs[V.cell_dofs] * V.cell_signs
    return np.einsum("qa,ca->cq", divs, signed) / det


def l2_error_pressure(W, coeffs, fn, t):
    pts, wts = tensor_gauss(W.degree + 3)
    _, det = bilinear_jacobians(W.mesh, np.arange(W.mesh.n_cells), pts)
    phys = bilinear_map(W.mesh, np.arange(W.mesh.n_cells), pts)
    diff = eval_pressure(W, coeffs, pts) - np.broadcast_to(
        fn(phys[..., 0], phys[..., 1], t), det.shape
    )
    return float(np.sqrt(np.einsum("q,cq,cq->", wts, det, diff**2)))


def l2_error_flux(V, coeffs, fn, t):
    pts, wts = tensor_gauss(V.degree + 3)
    _, det = bilinear_jacobians(V.mesh, np.arange(V.mesh.n_cells), pts)
    phys = bilinear_map(V.mesh, np.arange(V.mesh.n_cells), pts)
    qx, qy = fn(phys[..., 0], phys[..., 1], t)
    exact = np.stack(
        [np.broadcast_to(qx, det.shape), np.broadcast_to(qy, det.shape)], axis=-1
    )
    diff = eval_flux(V, coeffs, pts) - exact
    return float(np.sqrt(np.einsum("q,cq,cqd->", wts, det, diff**2)))


def l2_error_displacement(H, coeffs, fn, t):
    pts, wts = tensor_gauss(H.degree + 3)
    _, det = bilinear_jacobians(H.mesh, np.arange(H.mesh.n_cells), pts)
    phys = bilinear_map(H.mesh, np.arange(H.mesh.n_cells), pts)
    ux, uy = fn(phys[..., 0], phys[..., 1], t)
    exact = np.stack(
        [np.broadcast_to(ux, det.shape), np.broadcast_to(uy, det.shape)], axis=-1
    )
    diff = eval_displacement(H, coeffs, pts) - exact
    return float(np.sqrt(np.einsum("q,cq,cqd->", wts, det, diff**2)))
