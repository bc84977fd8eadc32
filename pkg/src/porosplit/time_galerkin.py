"""Time-slab Lagrange bases and tableau coefficients.

Two families of variational time discretizations are supported on the
reference slab [0, 1]:

* continuous ("cgp"), degree r >= 1: nodes {0} plus the r Gauss points,
  trial functions continuous across slabs, test rows i = 1..r;
* discontinuous ("dg"), degree r >= 0: nodes are the r+1 Gauss points,
  all r+1 rows are test rows, upwind jump coupling to the previous slab.

The tableau stores, for the Lagrange basis phi_j over the slab nodes,

    alpha[i, j]      = integral of phi_j' * phi_i   (step-size independent)
    beta_ref[i]      = Gauss weight of node i (scales linearly with tau)
    gamma[i]         = phi_i(0)                     (discontinuous only)
    alpha_tilde[i,j] = alpha[i, j] + gamma[i]*gamma[j]
    end_values[j]    = phi_j(1)
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidOrder

CONTINUOUS = "cgp"
DISCONTINUOUS = "dg"


def gauss_nodes(count):
    """Gauss-Legendre nodes and weights on [0, 1].

    Exact for polynomials of degree <= 2*count - 1; the weights sum to one.
    """
    if count < 1:
        raise InvalidOrder(f"Gauss rule needs at least one point, got {count}")
    x, w = np.polynomial.legendre.leggauss(count)
    return 0.5 * (x + 1.0), 0.5 * w


def _lagrange_values(nodes, points):
    """Values phi_j(points) of the Lagrange basis over `nodes`; shape (npts, nnodes)."""
    nodes = np.asarray(nodes, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    n = len(nodes)
    vals = np.ones((len(points), n))
    for j in range(n):
        for m in range(n):
            if m != j:
                vals[:, j] *= (points - nodes[m]) / (nodes[j] - nodes[m])
    return vals


def _lagrange_derivatives(nodes, points):
    """Derivatives phi_j'(points); shape (npts, nnodes)."""
    nodes = np.asarray(nodes, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    n = len(nodes)
    out = np.zeros((len(points), n))
    for j in range(n):
        den = np.prod([nodes[j] - nodes[m] for m in range(n) if m != j])
        for k in range(n):
            if k == j:
                continue
            term = np.ones(len(points))
            for m in range(n):
                if m != j and m != k:
                    term *= points - nodes[m]
            out[:, j] += term / den
    return out


@dataclass(frozen=True)
class TimeSlabBasis:
    """Lagrange nodes and tableau coefficients for one scheme/order."""

    scheme: str
    degree: int
    nodes: np.ndarray          # reference nodes in [0, 1]
    alpha: np.ndarray          # (r+1, r+1), rows = test index, cols = trial index
    beta_ref: np.ndarray       # per test row, multiply by tau for beta_ii
    end_values: np.ndarray     # phi_j(1)
    gamma: np.ndarray | None = None        # phi_i(0), discontinuous only
    alpha_tilde: np.ndarray | None = None  # alpha + outer(gamma, gamma)
    test_rows: np.ndarray = field(default=None, repr=False)

    @property
    def unknown_nodes(self):
        """Indices of the slab coefficients that are solved for."""
        return self.test_rows

    def values_at(self, s):
        """phi_j(s) for scalar or array s on the reference slab."""
        return _lagrange_values(self.nodes, s)

    def evaluate(self, coeffs, s):
        """Evaluate sum_j coeffs[j] phi_j(s); coeffs stacked along axis 0."""
        vals = _lagrange_values(self.nodes, s)
        return np.tensordot(vals, np.asarray(coeffs), axes=(1, 0))


def _tableau(nodes, beta_ref, scheme, degree, test_rows):
    # 2(r+1)-point quadrature integrates phi_j' phi_i (degree 2r-1) exactly.
    qx, qw = gauss_nodes(len(nodes) + 1)
    vals = _lagrange_values(nodes, qx)
    ders = _lagrange_derivatives(nodes, qx)
    alpha = np.einsum("q,qj,qi->ij", qw, ders, vals)
    end_values = _lagrange_values(nodes, np.array([1.0]))[0]
    kwargs = dict(
        scheme=scheme,
        degree=degree,
        nodes=nodes,
        alpha=alpha,
        beta_ref=beta_ref,
        end_values=end_values,
        test_rows=test_rows,
    )
    if scheme == DISCONTINUOUS:
        gamma = _lagrange_values(nodes, np.array([0.0]))[0]
        kwargs["gamma"] = gamma
        kwargs["alpha_tilde"] = alpha + np.outer(gamma, gamma)
    return TimeSlabBasis(**kwargs)


def build_cgp_basis(r):
    """Continuous scheme of degree r >= 1: nodes {0} + Gauss-r, test rows 1..r."""
    if r < 1:
        raise InvalidOrder(f"continuous scheme requires degree >= 1, got {r}")
    gx, gw = gauss_nodes(r)
    nodes = np.concatenate(([0.0], gx))
    beta_ref = gw.copy()
    return _tableau(nodes, beta_ref, CONTINUOUS, r, np.arange(1, r + 1))


def build_dg_basis(r):
    """Discontinuous scheme of degree r >= 0: nodes = Gauss-(r+1), all rows tested."""
    if r < 0:
        raise InvalidOrder(f"discontinuous scheme requires degree >= 0, got {r}")
    nodes, weights = gauss_nodes(r + 1)
    return _tableau(nodes, weights, DISCONTINUOUS, r, np.arange(0, r + 1))


def build_basis(scheme, r):
    """Dispatch on scheme string ('cgp' or 'dg')."""
    if scheme == CONTINUOUS:
        return build_cgp_basis(r)
    if scheme == DISCONTINUOUS:
        return build_dg_basis(r)
    raise InvalidOrder(f"unknown time scheme {scheme!r}")
