"""Conforming quadrilateral meshes with tagged boundary facets.

Cells are stored counterclockwise. Every facet carries a canonical
orientation: its vertex pair is listed in the traversal direction of the
first owning cell (lowest cell index), and the canonical normal is the
outward normal of that cell. Degree-of-freedom builders rely on this to
orient shared Raviart-Thomas facet dofs and edge nodes deterministically.
"""

import io

import numpy as np

from .errors import InvalidGeometry

# local edge k joins local vertices k and (k+1) % 4
_EDGE_VERTICES = ((0, 1), (1, 2), (2, 3), (3, 0))


class Mesh:
    """Immutable quadrilateral mesh.

    Attributes
    ----------
    vertices : (n_vertices, 2) float array
    cells : (n_cells, 4) int array, counterclockwise vertex indices
    facets : (n_facets, 2) int array, canonical vertex order
    facet_cells : (n_facets, 2) int array, owning cells (-1 if boundary)
    cell_facets : (n_cells, 4) int array, facet id per local edge
    cell_facet_is_first : (n_cells, 4) bool array, True when the cell's
        traversal direction and outward normal define the facet orientation
    boundary_tags : dict facet id -> tag string
    """

    def __init__(self, vertices, cells, tag_fn=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.cells = np.asarray(cells, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise InvalidGeometry("vertices must be an (n, 2) array")
        if self.cells.ndim != 2 or self.cells.shape[1] != 4:
            raise InvalidGeometry("cells must be an (n, 4) array")
        self._build_facets()
        self._check_jacobians()
        self.boundary_tags = {}
        if tag_fn is not None:
            for f in self.boundary_facets:
                tag = tag_fn(self.facet_midpoint(f))
                if not tag:
                    raise InvalidGeometry("boundary facet left untagged")
                self.boundary_tags[f] = tag

    # -- construction helpers -------------------------------------------------

    def _build_facets(self):
        lookup = {}
        facets = []
        facet_cells = []
        n_cells = len(self.cells)
        self.cell_facets = np.empty((n_cells, 4), dtype=np.int64)
        self.cell_facet_is_first = np.zeros((n_cells, 4), dtype=bool)
        for c, quad in enumerate(self.cells):
            for e, (la, lb) in enumerate(_EDGE_VERTICES):
                a, b = int(quad[la]), int(quad[lb])
                key = (a, b) if a < b else (b, a)
                if key not in lookup:
                    fid = len(facets)
                    lookup[key] = fid
                    facets.append((a, b))
                    facet_cells.append([c, -1])
                    self.cell_facet_is_first[c, e] = True
                else:
                    fid = lookup[key]
                    if facet_cells[fid][1] != -1:
                        raise InvalidGeometry(f"facet {key} shared by >2 cells")
                    if facets[fid] != (b, a):
                        raise InvalidGeometry(
                            f"cells around facet {key} have inconsistent orientation"
                        )
                    facet_cells[fid][1] = c
                self.cell_facets[c, e] = fid
        self.facets = np.asarray(facets, dtype=np.int64)
        self.facet_cells = np.asarray(facet_cells, dtype=np.int64)
        self.boundary_facets = np.nonzero(self.facet_cells[:, 1] == -1)[0]

    def _check_jacobians(self):
        from .time_galerkin import gauss_nodes

        gx, _ = gauss_nodes(3)
        xs, ys = np.meshgrid(gx, gx, indexing="ij")
        pts = np.column_stack([xs.ravel(), ys.ravel()])
        det = bilinear_jacobians(self, np.arange(len(self.cells)), pts)[1]
        if np.any(det <= 0.0):
            raise InvalidGeometry("cell with non-positive Jacobian determinant")

    # -- queries ---------------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_facets(self):
        return len(self.facets)

    def facet_midpoint(self, fid):
        a, b = self.facets[fid]
        return 0.5 * (self.vertices[a] + self.vertices[b])

    def facet_vector(self, fid):
        """Vector from the first to the second canonical facet vertex."""
        a, b = self.facets[fid]
        return self.vertices[b] - self.vertices[a]

    def facet_length(self, fid):
        return float(np.linalg.norm(self.facet_vector(fid)))

    def facet_normal(self, fid):
        """Canonical unit normal (outward from the first owning cell)."""
        t = self.facet_vector(fid)
        n = np.array([t[1], -t[0]])
        return n / np.linalg.norm(n)

    def cell_areas(self):
        """Shoelace area per cell (exact for straight-edge quadrilaterals)."""
        x = self.vertices[self.cells, 0]
        y = self.vertices[self.cells, 1]
        return 0.5 * np.abs(
            np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)
        )

    def facets_with_tag(self, tag):
        return np.array(
            sorted(f for f, t in self.boundary_tags.items() if t == tag), dtype=np.int64
        )

    def tags(self):
        return sorted(set(self.boundary_tags.values()))

    def export_text(self):
        """Plain-text dump for debugging; not a stability contract."""
        buf = io.StringIO()
        buf.write(f"cells={self.n_cells} vertices={self.n_vertices}\n")
        for v in self.vertices:
            buf.write(f"v {float(v[0])!r} {float(v[1])!r}\n")
        for c in self.cells:
            buf.write(f"c {c[0]} {c[1]} {c[2]} {c[3]}\n")
        return buf.getvalue()


def bilinear_map(mesh, cell_ids, ref_points):
    """Physical coordinates of reference points; shape (n_cells, n_pts, 2)."""
    ref_points = np.asarray(ref_points, dtype=float)
    x, y = ref_points[:, 0], ref_points[:, 1]
    shapes = np.column_stack([(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y])
    corners = mesh.vertices[mesh.cells[cell_ids]]  # (nc, 4, 2)
    return np.einsum("qk,ckd->cqd", shapes, corners)


def bilinear_jacobians(mesh, cell_ids, ref_points):
    """Jacobian matrices and determinants at reference points.

    Returns (jac, det) with jac of shape (n_cells, n_pts, 2, 2) where
    jac[..., i, j] = d x_i / d xhat_j.
    """
    ref_points = np.asarray(ref_points, dtype=float)
    x, y = ref_points[:, 0], ref_points[:, 1]
    dshapes = np.empty((len(ref_points), 4, 2))
    dshapes[:, 0, 0] = -(1 - y)
    dshapes[:, 1, 0] = 1 - y
    dshapes[:, 2, 0] = y
    dshapes[:, 3, 0] = -y
    dshapes[:, 0, 1] = -(1 - x)
    dshapes[:, 1, 1] = -x
    dshapes[:, 2, 1] = x
    dshapes[:, 3, 1] = 1 - x
    corners = mesh.vertices[mesh.cells[cell_ids]]
    jac = np.einsum("qkj,ckd->cqdj", dshapes, corners)
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    return jac, det


def build_rectangle_mesh(extent, subdivisions, tag="boundary", side_tags=False):
    """Structured tensor mesh of the rectangle (x0, x1) x (y0, y1).

    With side_tags=True, boundary facets are tagged bottom/right/top/left
    instead of the single default tag.
    """
    x0, x1, y0, y1 = (float(v) for v in extent)
    nx, ny = int(subdivisions[0]), int(subdivisions[1])
    if nx < 1 or ny < 1:
        raise InvalidGeometry("subdivision counts must be >= 1 per axis")
    if not (x1 > x0 and y1 > y0):
        raise InvalidGeometry("rectangle extent is degenerate")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])
    vid = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    cells = []
    for j in range(ny):
        for i in range(nx):
            cells.append([vid[i, j], vid[i + 1, j], vid[i + 1, j + 1], vid[i, j + 1]])
    eps = 1e-12 * max(x1 - x0, y1 - y0)

    def tag_fn(mid):
        if not side_tags:
            return tag
        if abs(mid[1] - y0) < eps:
            return "bottom"
        if abs(mid[0] - x1) < eps:
            return "right"
        if abs(mid[1] - y1) < eps:
            return "top"
        return "left"

    return Mesh(vertices, np.asarray(cells), tag_fn)


def lshape_boundary_tag(midpoint):
    """Boundary tag assignment for the L-shaped benchmark domain.

    The domain is the unit square minus its upper-right quarter. The
    remaining top edge is the open-flow/traction boundary; the two edges of
    the removed quarter are traction-free and undrained; the remaining
    outer edges carry symmetry conditions (normal displacement fixed,
    undrained). Kept in one function so the assignment can be swapped
    wholesale.
    """
    x, y = midpoint
    eps = 1e-12
    if abs(y - 1.0) < eps:
        return "top"
    if abs(x) < eps:
        return "left"
    if abs(y) < eps:
        return "bottom"
    if abs(x - 1.0) < eps:
        return "right"
    if abs(x - 0.5) < eps or abs(y - 0.5) < eps:
        return "reentrant"
    raise InvalidGeometry(f"facet midpoint {midpoint} not on the L-shape boundary")


def build_lshape_mesh(level):
    """Uniform mesh of the L-shaped domain at refinement level m >= 1.

    Mesh size is h = 2**-(m+1); the three retained 0.5 x 0.5 blocks are the
    lower-left, lower-right and upper-left quarters of the unit square.
    """
    m = int(level)
    if m < 1:
        raise InvalidGeometry(f"refinement level must be >= 1, got {level}")
    n = 2 ** (m + 1)  # subdivisions across the unit square
    xs = np.linspace(0.0, 1.0, n + 1)
    vid = -np.ones((n + 1, n + 1), dtype=np.int64)
    vertices = []
    cells = []

    def vertex(i, j):
        if vid[i, j] < 0:
            vid[i, j] = len(vertices)
            vertices.append([xs[i], xs[j]])
        return vid[i, j]

    for j in range(n):
        for i in range(n):
            cx = 0.5 * (xs[i] + xs[i + 1])
            cy = 0.5 * (xs[j] + xs[j + 1])
            if cx > 0.5 and cy > 0.5:
                continue  # removed upper-right quarter
            cells.append(
                [vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)]
            )
    return Mesh(np.asarray(vertices), np.asarray(cells), lshape_boundary_tag)


def refine_uniform(mesh):
    """Split each cell into four children; tags inherited from parent facets."""
    vertices = list(map(tuple, mesh.vertices))
    edge_mid = {}
    for fid, (a, b) in enumerate(mesh.facets):
        edge_mid[fid] = len(vertices)
        vertices.append(tuple(0.5 * (mesh.vertices[a] + mesh.vertices[b])))
    cells = []
    for c, quad in enumerate(mesh.cells):
        center = len(vertices)
        vertices.append(tuple(mesh.vertices[quad].mean(axis=0)))
        m = [edge_mid[mesh.cell_facets[c, e]] for e in range(4)]
        v = [int(x) for x in quad]
        cells.append([v[0], m[0], center, m[3]])
        cells.append([m[0], v[1], m[1], center])
        cells.append([center, m[1], v[2], m[2]])
        cells.append([m[3], center, m[2], v[3]])
    # child boundary facets are halves of parent boundary facets
    tag_by_pair = {}
    for fid, tag in mesh.boundary_tags.items():
        a, b = (int(x) for x in mesh.facets[fid])
        mid = edge_mid[fid]
        tag_by_pair[frozenset((a, mid))] = tag
        tag_by_pair[frozenset((mid, b))] = tag
    refined = Mesh(np.asarray(vertices, dtype=float), np.asarray(cells))
    for f in refined.boundary_facets:
        a, b = (int(x) for x in refined.facets[f])
        refined.boundary_tags[f] = tag_by_pair[frozenset((a, b))]
    return refined
