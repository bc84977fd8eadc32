"""Reference elements on the unit square [0, 1]^2.

Three families:

* ScalarLagrange(d): continuous tensor-product polynomials of degree d per
  axis, equispaced nodes (vertices, edge nodes, interior nodes);
* BrokenLagrange(s): discontinuous tensor-product polynomials of degree s,
  nodal at the tensor Gauss points of the cell;
* RTElement(s): Raviart-Thomas space Q_{s+1,s} x Q_{s,s+1}, dofs are
  normal-flux moments against shifted Legendre polynomials on the four
  edges (counterclockwise parametrization, outward normal) plus interior
  moments.
"""

import numpy as np
from numpy.polynomial import legendre as npleg

from .time_galerkin import gauss_nodes

# counterclockwise edge parametrizations x(t), t in [0,1], and outward normals
_EDGE_PARAM = (
    lambda t: np.column_stack([t, np.zeros_like(t)]),
    lambda t: np.column_stack([np.ones_like(t), t]),
    lambda t: np.column_stack([1.0 - t, np.ones_like(t)]),
    lambda t: np.column_stack([np.zeros_like(t), 1.0 - t]),
)
_EDGE_NORMAL = (
    np.array([0.0, -1.0]),
    np.array([1.0, 0.0]),
    np.array([0.0, 1.0]),
    np.array([-1.0, 0.0]),
)


def tensor_gauss(n):
    """Tensor Gauss rule on the unit square: (points (n*n, 2), weights)."""
    x, w = gauss_nodes(n)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    ww = np.outer(w, w)
    return np.column_stack([xx.ravel(), yy.ravel()]), ww.ravel()


def shifted_legendre(k, t):
    """Legendre polynomial of degree k mapped to [0, 1]."""
    c = np.zeros(k + 1)
    c[k] = 1.0
    return npleg.legval(2.0 * np.asarray(t) - 1.0, c)


def _lagrange_1d(nodes, t):
    t = np.asarray(t, dtype=float)
    n = len(nodes)
    vals = np.ones((t.size, n))
    ders = np.zeros((t.size, n))
    for j in range(n):
        for m in range(n):
            if m != j:
                vals[:, j] *= (t - nodes[m]) / (nodes[j] - nodes[m])
        den = np.prod([nodes[j] - nodes[m] for m in range(n) if m != j])
        for k in range(n):
            if k == j:
                continue
            term = np.ones(t.size)
            for m in range(n):
                if m != j and m != k:
                    term *= t - nodes[m]
            ders[:, j] += term / den
    return vals, ders


class ScalarLagrange:
    """Continuous Q_d element with equispaced tensor nodes.

    Local node (i, j) has index j*(d+1) + i and sits at (i/d, j/d).
    """

    def __init__(self, degree):
        self.degree = int(degree)
        d = self.degree
        self.nodes_1d = np.linspace(0.0, 1.0, d + 1)
        ii, jj = np.meshgrid(np.arange(d + 1), np.arange(d + 1), indexing="xy")
        self.node_ij = np.column_stack([ii.ravel(), jj.ravel()])  # index j*(d+1)+i
        self.nodes = self.node_ij / d if d > 0 else np.zeros((1, 2))
        self.n_nodes = (d + 1) ** 2

    def tabulate(self, points):
        """Values (npts, n_nodes) and reference gradients (npts, n_nodes, 2)."""
        points = np.asarray(points, dtype=float)
        vx, dx = _lagrange_1d(self.nodes_1d, points[:, 0])
        vy, dy = _lagrange_1d(self.nodes_1d, points[:, 1])
        i = self.node_ij[:, 0]
        j = self.node_ij[:, 1]
        vals = vx[:, i] * vy[:, j]
        grads = np.stack([dx[:, i] * vy[:, j], vx[:, i] * dy[:, j]], axis=-1)
        return vals, grads


class BrokenLagrange:
    """Discontinuous Q_s element, nodal at the tensor Gauss points."""

    def __init__(self, degree):
        self.degree = int(degree)
        s = self.degree
        gx, _ = gauss_nodes(s + 1)
        self.nodes_1d = gx
        ii, jj = np.meshgrid(np.arange(s + 1), np.arange(s + 1), indexing="xy")
        self.node_ij = np.column_stack([ii.ravel(), jj.ravel()])
        self.nodes = np.column_stack([gx[self.node_ij[:, 0]], gx[self.node_ij[:, 1]]])
        self.n_nodes = (s + 1) ** 2

    def tabulate(self, points):
        points = np.asarray(points, dtype=float)
        vx, _ = _lagrange_1d(self.nodes_1d, points[:, 0])
        vy, _ = _lagrange_1d(self.nodes_1d, points[:, 1])
        return vx[:, self.node_ij[:, 0]] * vy[:, self.node_ij[:, 1]]


class RTElement:
    """Raviart-Thomas element of index s on the reference square.

    Dof order: edge 0..3 with s+1 Legendre moments each (counterclockwise
    edge parameter, outward normal), then interior x-moments, then interior
    y-moments.
    """

    def __init__(self, degree):
        self.degree = s = int(degree)
        self.n_edge_dofs = s + 1
        self.n_interior = 2 * s * (s + 1)
        self.n_dofs = 2 * (s + 1) * (s + 2)
        self._span = self._build_span(s)
        vand = self._moment_matrix()
        self._coeffs = np.linalg.inv(vand)  # column a = span coefficients of dual fn a

    @staticmethod
    def _build_span(s):
        """Tensor Legendre span of Q_{s+1,s} x Q_{s,s+1} as (comp, a, b) tuples."""
        span = []
        for a in range(s + 2):
            for b in range(s + 1):
                span.append((0, a, b))
        for a in range(s + 1):
            for b in range(s + 2):
                span.append((1, a, b))
        return span

    def _span_values(self, points):
        """Component values of span functions: (npts, n_span, 2)."""
        points = np.asarray(points, dtype=float)
        out = np.zeros((len(points), len(self._span), 2))
        for k, (comp, a, b) in enumerate(self._span):
            out[:, k, comp] = shifted_legendre(a, points[:, 0]) * shifted_legendre(
                b, points[:, 1]
            )
        return out

    def _span_divs(self, points):
        points = np.asarray(points, dtype=float)
        out = np.zeros((len(points), len(self._span)))
        for k, (comp, a, b) in enumerate(self._span):
            if comp == 0:
                da = npleg.legder(np.eye(a + 1)[a])
                out[:, k] = 2.0 * npleg.legval(
                    2.0 * points[:, 0] - 1.0, da
                ) * shifted_legendre(b, points[:, 1])
            else:
                db = npleg.legder(np.eye(b + 1)[b])
                out[:, k] = shifted_legendre(a, points[:, 0]) * 2.0 * npleg.legval(
                    2.0 * points[:, 1] - 1.0, db
                )
        return out

    def _moment_matrix(self):
        s = self.degree
        n = len(self._span)
        vand = np.zeros((self.n_dofs, n))
        t, wt = gauss_nodes(s + 2)
        row = 0
        for e in range(4):
            pts = _EDGE_PARAM[e](t)
            vals = self._span_values(pts) @ _EDGE_NORMAL[e]  # (npts, n_span)
            for mu in range(s + 1):
                vand[row] = np.einsum("q,q,qk->k", wt, shifted_legendre(mu, t), vals)
                row += 1
        if s > 0:
            qp, qw = tensor_gauss(s + 2)
            vals = self._span_values(qp)
            for a in range(s):
                for b in range(s + 1):
                    mom = shifted_legendre(a, qp[:, 0]) * shifted_legendre(b, qp[:, 1])
                    vand[row] = np.einsum("q,q,qk->k", qw, mom, vals[:, :, 0])
                    row += 1
            for a in range(s + 1):
                for b in range(s):
                    mom = shifted_legendre(a, qp[:, 0]) * shifted_legendre(b, qp[:, 1])
                    vand[row] = np.einsum("q,q,qk->k", qw, mom, vals[:, :, 1])
                    row += 1
        assert row == self.n_dofs
        return vand

    def tabulate(self, points):
        """Reference values (npts, n_dofs, 2) and divergences (npts, n_dofs)."""
        sv = self._span_values(points)
        sd = self._span_divs(points)
        vals = np.einsum("qkc,ka->qac", sv, self._coeffs)
        divs = np.einsum("qk,ka->qa", sd, self._coeffs)
        return vals, divs

    def interior_moment_weights(self, points):
        """Interior dof integrands m(x) per interior dof: (npts, n_interior, 2).

        Dotting a pulled-back field with these and integrating over the
        reference cell yields its interior dof values.
        """
        s = self.degree
        out = np.zeros((len(points), self.n_interior, 2))
        idx = 0
        for a in range(s):
            for b in range(s + 1):
                out[:, idx, 0] = shifted_legendre(a, points[:, 0]) * shifted_legendre(
                    b, points[:, 1]
                )
                idx += 1
        for a in range(s + 1):
            for b in range(s):
                out[:, idx, 1] = shifted_legendre(a, points[:, 0]) * shifted_legendre(
                    b, points[:, 1]
                )
                idx += 1
        return out
