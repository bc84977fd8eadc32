"""Degree-of-freedom maps for the three finite element spaces.

Pressure dofs are cell-local. Flux dofs live on facets (shared, with
orientation signs) plus cell interiors. Displacement dofs are vector
Lagrange nodes shared through mesh entities (vertices, facets, cells), so
no floating-point coordinate matching is ever needed.
"""

import numpy as np

from .elements import BrokenLagrange, RTElement, ScalarLagrange, shifted_legendre
from .errors import InvalidBoundarySpec
from .mesh import bilinear_map
from .time_galerkin import gauss_nodes

PRESSURE = "pressure"
FLUX = "flux"
DISPLACEMENT = "displacement"


class DofMap:
    """Cell-to-global dof table for one space.

    Attributes
    ----------
    kind : "pressure" | "flux" | "displacement"
    degree : polynomial degree (per-axis)
    n_dofs : total dof count
    cell_dofs : (n_cells, n_local) int array
    cell_signs : (n_cells, n_local) float array (+-1; all ones except flux)
    constrained : sorted int array of essential dofs
    free : complement of `constrained`
    """

    def __init__(self, kind, degree, mesh, ref, n_dofs, cell_dofs, cell_signs, constrained):
        self.kind = kind
        self.degree = degree
        self.mesh = mesh
        self.ref = ref
        self.n_dofs = n_dofs
        self.cell_dofs = cell_dofs
        self.cell_signs = cell_signs
        self.constrained = np.asarray(sorted(set(int(d) for d in constrained)), dtype=np.int64)
        mask = np.ones(n_dofs, dtype=bool)
        mask[self.constrained] = False
        self.free = np.nonzero(mask)[0]

    @property
    def n_local(self):
        return self.cell_dofs.shape[1]


def check_tags(mesh, tags):
    known = set(mesh.boundary_tags.values())
    unknown = set(tags) - known
    if unknown:
        raise InvalidBoundarySpec(f"unknown boundary tags {sorted(unknown)}; mesh has {sorted(known)}")


def build_pressure_space(mesh, s):
    """Discontinuous Q_s space; dofs are nodal at per-cell tensor Gauss points."""
    ref = BrokenLagrange(s)
    npc = ref.n_nodes
    cells = np.arange(mesh.n_cells * npc, dtype=np.int64).reshape(mesh.n_cells, npc)
    signs = np.ones_like(cells, dtype=float)
    return DofMap(PRESSURE, s, mesh, ref, mesh.n_cells * npc, cells, signs, [])


def build_flux_space(mesh, s, essential=()):
    """RT_s space with facet dofs shared across cells.

    Facet dofs on facets tagged with one of `essential` are constrained
    (zero normal flux unless other values are supplied at solve time).
    """
    essential = set(essential)
    check_tags(mesh, essential)
    ref = RTElement(s)
    ne = ref.n_edge_dofs
    n_facet_dofs = mesh.n_facets * ne
    n_dofs = n_facet_dofs + mesh.n_cells * ref.n_interior
    cell_dofs = np.empty((mesh.n_cells, ref.n_dofs), dtype=np.int64)
    cell_signs = np.ones((mesh.n_cells, ref.n_dofs))
    mu = np.arange(ne)
    for c in range(mesh.n_cells):
        for e in range(4):
            fid = mesh.cell_facets[c, e]
            cols = slice(e * ne, (e + 1) * ne)
            cell_dofs[c, cols] = fid * ne + mu
            if not mesh.cell_facet_is_first[c, e]:
                # opposite outward normal and reversed edge direction
                cell_signs[c, cols] = (-1.0) ** (mu + 1)
        cell_dofs[c, 4 * ne :] = n_facet_dofs + c * ref.n_interior + np.arange(ref.n_interior)
    constrained = []
    for tag in essential:
        for fid in mesh.facets_with_tag(tag):
            constrained.extend(fid * ne + mu)
    return DofMap(FLUX, s, mesh, ref, n_dofs, cell_dofs, cell_signs, constrained)


def _scalar_node_layout(mesh, degree):
    """Global scalar Lagrange node ids per cell plus node coordinates."""
    d = degree
    n_edge_nodes = d - 1
    n_cell_nodes = (d - 1) ** 2 if d > 1 else 0
    n_nodes = mesh.n_vertices + mesh.n_facets * n_edge_nodes + mesh.n_cells * n_cell_nodes
    coords = np.zeros((n_nodes, 2))
    coords[: mesh.n_vertices] = mesh.vertices
    for fid in range(mesh.n_facets):
        a, b = mesh.facets[fid]
        for k in range(1, d):
            node = mesh.n_vertices + fid * n_edge_nodes + (k - 1)
            coords[node] = mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) * (k / d)
    ref = ScalarLagrange(d)
    cell_nodes = np.empty((mesh.n_cells, ref.n_nodes), dtype=np.int64)
    interior_ij = [
        (i, j) for j in range(1, d) for i in range(1, d)
    ]  # matches local index order below
    corner_local = {(0, 0): 0, (d, 0): 1, (d, d): 2, (0, d): 3}
    for c in range(mesh.n_cells):
        quad = mesh.cells[c]
        for ln, (i, j) in enumerate(ref.node_ij):
            if (i in (0, d)) and (j in (0, d)):
                cell_nodes[c, ln] = quad[corner_local[(i, j)]]
            elif i in (0, d) or j in (0, d):
                if j == 0:
                    e, t_loc = 0, i
                elif i == d:
                    e, t_loc = 1, j
                elif j == d:
                    e, t_loc = 2, d - i
                else:
                    e, t_loc = 3, d - j
                fid = mesh.cell_facets[c, e]
                k = t_loc if mesh.cell_facet_is_first[c, e] else d - t_loc
                cell_nodes[c, ln] = mesh.n_vertices + fid * n_edge_nodes + (k - 1)
            else:
                li = interior_ij.index((i, j))
                cell_nodes[c, ln] = (
                    mesh.n_vertices + mesh.n_facets * n_edge_nodes + c * n_cell_nodes + li
                )
    if n_cell_nodes:
        base = mesh.n_vertices + mesh.n_facets * n_edge_nodes
        pts = np.array([(i / d, j / d) for (i, j) in interior_ij])
        phys = bilinear_map(mesh, np.arange(mesh.n_cells), pts)
        for c in range(mesh.n_cells):
            coords[base + c * n_cell_nodes : base + (c + 1) * n_cell_nodes] = phys[c]
    return ref, cell_nodes, coords, n_edge_nodes


def _facet_scalar_nodes(mesh, fid, degree, n_edge_nodes):
    a, b = mesh.facets[fid]
    nodes = [int(a), int(b)]
    nodes += [mesh.n_vertices + fid * n_edge_nodes + k for k in range(degree - 1)]
    return nodes


_COMPONENTS = {"x": (0,), "y": (1,), "xy": (0, 1), "both": (0, 1)}


def build_displacement_space(mesh, degree, dirichlet=None):
    """Continuous vector Q_degree space.

    `dirichlet` maps boundary tags to "x", "y" or "xy", fixing those
    displacement components to zero on the tagged facets (other values may
    be supplied at solve time).
    """
    dirichlet = dict(dirichlet or {})
    check_tags(mesh, dirichlet)
    ref, cell_nodes, coords, n_edge_nodes = _scalar_node_layout(mesh, degree)
    n_scalar = len(coords)
    cell_dofs = np.empty((mesh.n_cells, 2 * ref.n_nodes), dtype=np.int64)
    cell_dofs[:, 0::2] = 2 * cell_nodes
    cell_dofs[:, 1::2] = 2 * cell_nodes + 1
    constrained = set()
    for tag, comps in dirichlet.items():
        if comps not in _COMPONENTS:
            raise InvalidBoundarySpec(f"displacement constraint {comps!r} for tag {tag!r}")
        for fid in mesh.facets_with_tag(tag):
            for node in _facet_scalar_nodes(mesh, fid, degree, n_edge_nodes):
                for comp in _COMPONENTS[comps]:
                    constrained.add(2 * node + comp)
    dof_map = DofMap(
        DISPLACEMENT,
        degree,
        mesh,
        ref,
        2 * n_scalar,
        cell_dofs,
        np.ones_like(cell_dofs, dtype=float),
        constrained,
    )
    dof_map.node_coords = coords
    return dof_map


class FeSpaces:
    """The mixed pressure/flux/displacement triple used by the solvers."""

    def __init__(self, pressure, flux, displacement):
        self.pressure = pressure
        self.flux = flux
        self.displacement = displacement
        self.mesh = pressure.mesh

    @classmethod
    def build(cls, mesh, s, essential_flux=(), dirichlet=None):
        return cls(
            build_pressure_space(mesh, s),
            build_flux_space(mesh, s, essential_flux),
            build_displacement_space(mesh, s + 1, dirichlet),
        )


# -- interpolation -------------------------------------------------------------


def interpolate_pressure(space, fn, t=0.0):
    """Nodal interpolation: evaluate fn(x, y, t) at the per-cell Gauss nodes."""
    pts = bilinear_map(space.mesh, np.arange(space.mesh.n_cells), space.ref.nodes)
    coeffs = np.zeros(space.n_dofs)
    vals = fn(pts[..., 0], pts[..., 1], t)
    coeffs[space.cell_dofs] = np.broadcast_to(vals, pts.shape[:2])
    return coeffs


def interpolate_displacement(space, fn, t=0.0):
    """Nodal interpolation of a vector field given as fn(x, y, t) -> (2,) parts."""
    coords = space.node_coords
    ux, uy = fn(coords[:, 0], coords[:, 1], t)
    coeffs = np.zeros(space.n_dofs)
    coeffs[0::2] = np.broadcast_to(ux, (len(coords),))
    coeffs[1::2] = np.broadcast_to(uy, (len(coords),))
    return coeffs


def facet_flux_moments(space, fids, fn, t=0.0):
    """Canonical Legendre moments of fn . n on the given facets.

    Returns an array of shape (len(fids), s+1) whose row f holds the dof
    values of the facet's RT dofs for the field fn(x, y, t) -> (qx, qy).
    """
    mesh = space.mesh
    s = space.degree
    tq, wq = gauss_nodes(s + 3)
    out = np.zeros((len(fids), s + 1))
    leg = np.column_stack([shifted_legendre(mu, tq) for mu in range(s + 1)])
    for row, fid in enumerate(fids):
        a, b = mesh.facets[fid]
        pts = mesh.vertices[a] + np.outer(tq, mesh.vertices[b] - mesh.vertices[a])
        qx, qy = fn(pts[:, 0], pts[:, 1], t)
        normal = mesh.facet_normal(fid)
        qn = qx * normal[0] + qy * normal[1]
        # the Piola transform preserves arc-length flux moments, so the
        # reference dof equals |F| times the unit-parameter moment
        out[row] = mesh.facet_length(fid) * (leg.T @ (wq * qn))
    return out


def interpolate_flux(space, fn, t=0.0):
    """Moment interpolation onto RT_s (facet moments plus interior moments)."""
    from .mesh import bilinear_jacobians

    mesh = space.mesh
    s = space.degree
    ne = space.ref.n_edge_dofs
    coeffs = np.zeros(space.n_dofs)
    all_facets = np.arange(mesh.n_facets)
    moments = facet_flux_moments(space, all_facets, fn, t)
    coeffs[: mesh.n_facets * ne] = moments.ravel()
    if space.ref.n_interior:
        from .elements import tensor_gauss

        qp, qw = tensor_gauss(s + 3)
        jac, det = bilinear_jacobians(mesh, np.arange(mesh.n_cells), qp)
        phys = bilinear_map(mesh, np.arange(mesh.n_cells), qp)
        qx, qy = fn(phys[..., 0], phys[..., 1], t)
        q_phys = np.stack([np.broadcast_to(qx, phys.shape[:2]),
                           np.broadcast_to(qy, phys.shape[:2])], axis=-1)
        inv = np.linalg.inv(jac)
        pulled = det[..., None] * np.einsum("cqij,cqj->cqi", inv, q_phys)
        weights = space.ref.interior_moment_weights(qp)  # (nq, n_int, 2)
        vals = np.einsum("q,qkd,cqd->ck", qw, weights, pulled)
        base = mesh.n_facets * ne
        n_int = space.ref.n_interior
        for c in range(mesh.n_cells):
            coeffs[base + c * n_int : base + (c + 1) * n_int] = vals[c]
    return coeffs
