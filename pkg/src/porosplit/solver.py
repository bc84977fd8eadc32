"""Per-slab solvers: stabilized sequential iteration and monolithic oracle.

Each time slab carries one coefficient block per time node and field. The
flow half step solves pressure and flux at all unknown time nodes of the
slab as one saddle block system (the tableau couples the nodes through the
time-derivative matrix); the mechanics half step decouples across time
nodes. The monolithic solver assembles the same slab equations over all
three fields without the stabilization term and serves as the reference
fixed point for the iteration.

All linear solves use a sparse direct factorization, built once per
discretization and reused across slabs and iterations; the configured
flow/mechanics solver tolerances are applied as residual checks on each
solve.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import (
    assemble_coupling,
    assemble_div,
    assemble_elasticity,
    assemble_flow_source,
    assemble_flux_mass,
    assemble_body_force,
    assemble_pressure_mass,
    assemble_traction,
    assemble_vector_mass,
)
from .errors import Divergence, InsufficientData, InvalidInput, SingularSystem
from .mesh import build_lshape_mesh, build_rectangle_mesh
from .spaces import FeSpaces
from .time_galerkin import CONTINUOUS, DISCONTINUOUS, build_basis

log = logging.getLogger("porosplit")

SPLIT = "split"
MONOLITHIC = "monolithic"


@dataclass
class SlabState:
    """Coefficient blocks (one row per time node) for one slab."""

    index: int
    basis: object
    pressure: np.ndarray       # (r+1, n_p)
    flux: np.ndarray           # (r+1, n_v)
    displacement: np.ndarray   # (r+1, n_u)

    def end_values(self):
        """Field coefficients at the right slab endpoint (left limit for dg)."""
        e = self.basis.end_values
        return e @ self.pressure, e @ self.flux, e @ self.displacement


@dataclass
class IterationReport:
    """Convergence record of the sequential iteration on one slab."""

    slab: int
    iterations: int = 0
    pressure_increments: list = field(default_factory=list)
    flux_increments: list = field(default_factory=list)
    displacement_increments: list = field(default_factory=list)
    weighted_pressure_increments: list = field(default_factory=list)
    termination: str = "converged"


@dataclass
class RunResult:
    """States, reports and end-of-slab snapshots for a whole simulation."""

    mode: str
    tuning: float
    times: np.ndarray
    states: list
    reports: list
    pressure_snapshots: np.ndarray      # (n_slabs, n_p), values at t_n
    flux_snapshots: np.ndarray
    displacement_snapshots: np.ndarray

    @property
    def total_iterations(self):
        return sum(r.iterations for r in self.reports)

    @property
    def max_slab_iterations(self):
        return max((r.iterations for r in self.reports), default=0)


def _factorize(matrix, what):
    try:
        lu = spla.splu(matrix.tocsc())
    except RuntimeError as exc:
        raise SingularSystem(f"{what} factorization failed: {exc}") from exc
    pivots = np.abs(lu.U.diagonal())
    if not np.all(np.isfinite(pivots)) or pivots.min() <= 1e-12 * pivots.max():
        raise SingularSystem(f"{what} system is singular to working precision")
    return lu


class _CheckedSolve:
    """Direct solve wrapping a residual check against a configured tolerance."""

    def __init__(self, matrix, tol, what):
        self.matrix = matrix.tocsr()
        self.lu = _factorize(matrix, what)
        self.tol = tol
        self.what = what

    def __call__(self, rhs):
        x = self.lu.solve(rhs)
        resid = np.linalg.norm(self.matrix @ x - rhs)
        if resid > self.tol * max(1.0, np.linalg.norm(rhs)):
            log.warning("%s solve residual %.3e exceeds tolerance %.1e", self.what, resid, self.tol)
        return x


class Discretization:
    """Assembled operators and factorizations for one scenario.

    `source`, `body_force` and per-tag `tractions` are callables of
    (x, y, t); `flux_bc` / `disp_bc` map a time to the values of the
    constrained dofs (defaults: homogeneous).
    """

    def __init__(self, mesh, basis, spaces, material, tau, *, source=None,
                 body_force=None, tractions=None, flux_bc=None, disp_bc=None,
                 tol_flow=1e-12, tol_mechanics=1e-12):
        self.mesh = mesh
        self.basis = basis
        self.spaces = spaces
        self.material = material
        self.tau = float(tau)
        self.source = source
        self.body_force = body_force
        self.tractions = dict(tractions or {})
        self._flux_bc = flux_bc
        self._disp_bc = disp_bc
        self.tol_flow = tol_flow
        self.tol_mechanics = tol_mechanics

        W, V, H = spaces.pressure, spaces.flux, spaces.displacement
        self.Mp = assemble_pressure_mass(W)
        self.MK = assemble_flux_mass(V, material.permeability)
        self.D = assemble_div(V, W)
        self.A = assemble_elasticity(H, material.shear_modulus, material.lame_lambda)
        self.C = assemble_coupling(W, H, material.biot_coefficient)

        vf, vc = V.free, V.constrained
        uf, uc = H.free, H.constrained
        self.MK_ff = self.MK[np.ix_(vf, vf)].tocsr()
        self.MK_fc = self.MK[np.ix_(vf, vc)].tocsr()
        self.D_f = self.D[:, vf].tocsr()
        self.D_c = self.D[:, vc].tocsr()
        self.A_ff = self.A[np.ix_(uf, uf)].tocsr()
        self.A_fc = self.A[np.ix_(uf, uc)].tocsr()
        self.C_f = self.C[uf, :].tocsr()
        self.C_c = self.C[uc, :].tocsr()

        self._mech = _CheckedSolve(self.A_ff, tol_mechanics, "mechanics")
        self._flow = {}
        self._mono = None

        # tableau views used by the slab systems
        b = basis
        self.unknown = np.asarray(b.unknown_nodes)
        self.n_t = len(self.unknown)
        if b.scheme == DISCONTINUOUS:
            self.alpha_p = b.alpha_tilde            # pressure storage rows
            self.alpha_u = b.alpha_tilde            # displacement coupling rows
        else:
            self.alpha_p = b.alpha
            self.alpha_u = b.alpha
        self.test_rows = np.asarray(b.test_rows)
        self.beta = self.tau * np.asarray(b.beta_ref)

    # -- constraint values and loads -------------------------------------------

    def flux_bc_values(self, t):
        if self._flux_bc is None:
            return np.zeros(len(self.spaces.flux.constrained))
        return self._flux_bc(t)

    def disp_bc_values(self, t):
        if self._disp_bc is None:
            return np.zeros(len(self.spaces.displacement.constrained))
        return self._disp_bc(t)

    def loads_at(self, t):
        flow = assemble_flow_source(self.spaces.pressure, self.source, t)
        mech = assemble_body_force(self.spaces.displacement, self.body_force, t)
        for tag, fn in self.tractions.items():
            fids = self.mesh.facets_with_tag(tag)
            mech += assemble_traction(self.spaces.displacement, fids, fn, t)
        return flow, mech

    def node_times(self, t_start):
        return t_start + self.tau * self.basis.nodes[self.unknown]

    def flow_solver(self, tuning):
        key = float(tuning)
        if key not in self._flow:
            m_inv = 1.0 / self.material.biot_modulus
            a_uu = self.alpha_p[np.ix_(self.test_rows, self.unknown)]
            app = sp.kron((m_inv + key) * a_uu, self.Mp)
            apq = sp.kron(sp.diags(self.beta), self.D_f)
            aqp = sp.kron(sp.eye(self.n_t), -self.D_f.T)
            aqq = sp.kron(sp.eye(self.n_t), self.MK_ff)
            matrix = sp.bmat([[app, apq], [aqp, aqq]], format="csc")
            self._flow[key] = _CheckedSolve(matrix, self.tol_flow, "flow")
        return self._flow[key]

    def monolithic_solver(self):
        if self._mono is None:
            m_inv = 1.0 / self.material.biot_modulus
            a_pp = self.alpha_p[np.ix_(self.test_rows, self.unknown)]
            a_pu = self.alpha_u[np.ix_(self.test_rows, self.unknown)]
            eye = sp.eye(self.n_t)
            matrix = sp.bmat(
                [
                    [
                        sp.kron(m_inv * a_pp, self.Mp),
                        sp.kron(sp.diags(self.beta), self.D_f),
                        sp.kron(a_pu, self.C_f.T),
                    ],
                    [sp.kron(eye, -self.D_f.T), sp.kron(eye, self.MK_ff), None],
                    [sp.kron(eye, -self.C_f), None, sp.kron(eye, self.A_ff)],
                ],
                format="csc",
            )
            self._mono = _CheckedSolve(matrix, max(self.tol_flow, self.tol_mechanics), "monolithic")
        return self._mono


@dataclass
class SlabInputs:
    """Everything a slab solve needs from the past and the data functions."""

    index: int
    t_start: float
    prev_pressure: np.ndarray       # end values of the previous slab (or initial data)
    prev_flux: np.ndarray
    prev_displacement: np.ndarray
    flow_loads: np.ndarray          # (n_t, n_p) source integrals at unknown node times
    mech_loads: np.ndarray          # (n_t, n_u)
    flux_bc: np.ndarray             # (n_t, n constrained flux dofs)
    disp_bc: np.ndarray             # (n_t, n constrained displacement dofs)


def make_slab_inputs(disc, index, t_start, prev):
    times = disc.node_times(t_start)
    flow_loads = np.empty((disc.n_t, disc.spaces.pressure.n_dofs))
    mech_loads = np.empty((disc.n_t, disc.spaces.displacement.n_dofs))
    flux_bc = np.empty((disc.n_t, len(disc.spaces.flux.constrained)))
    disp_bc = np.empty((disc.n_t, len(disc.spaces.displacement.constrained)))
    for a, t in enumerate(times):
        flow_loads[a], mech_loads[a] = disc.loads_at(t)
        flux_bc[a] = disc.flux_bc_values(t)
        disp_bc[a] = disc.disp_bc_values(t)
    p0, q0, u0 = prev
    return SlabInputs(index, t_start, p0, q0, u0, flow_loads, mech_loads, flux_bc, disp_bc)


def _node_blocks(disc, inputs):
    """Initial full-node coefficient blocks for a slab."""
    r1 = len(disc.basis.nodes)
    P = np.tile(inputs.prev_pressure, (r1, 1))
    Q = np.tile(inputs.prev_flux, (r1, 1))
    U = np.tile(inputs.prev_displacement, (r1, 1))
    vc = disc.spaces.flux.constrained
    uc = disc.spaces.displacement.constrained
    for a, row in enumerate(disc.unknown):
        Q[row, vc] = inputs.flux_bc[a]
        U[row, uc] = inputs.disp_bc[a]
    return P, Q, U


def _known_flow_rhs(disc, inputs):
    """Iteration-independent part of the flow right-hand side, stacked."""
    m_inv = 1.0 / disc.material.biot_modulus
    n_p = disc.spaces.pressure.n_dofs
    rhs_p = np.empty((disc.n_t, n_p))
    rhs_q = np.empty((disc.n_t, disc.MK_ff.shape[0]))
    for a, i in enumerate(disc.test_rows):
        rhs_p[a] = disc.beta[a] * inputs.flow_loads[a]
        rhs_p[a] -= disc.beta[a] * (disc.D_c @ inputs.flux_bc[a])
        rhs_q[a] = -(disc.MK_fc @ inputs.flux_bc[a])
        if disc.basis.scheme == DISCONTINUOUS:
            gamma = disc.basis.gamma[i]
            rhs_p[a] += gamma * (
                m_inv * (disc.Mp @ inputs.prev_pressure) + disc.C.T @ inputs.prev_displacement
            )
    return rhs_p, rhs_q


def flow_half_step(disc, tuning, inputs, pressure_iterate, displacement_iterate):
    """Solve the stabilized flow block system for all unknown time nodes.

    `pressure_iterate` and `displacement_iterate` are the previous sweep's
    full-node coefficient blocks. Returns updated (pressure, flux) blocks.
    """
    m_inv = 1.0 / disc.material.biot_modulus
    rhs_p, rhs_q = _known_flow_rhs(disc, inputs)
    mp_pk = (disc.Mp @ pressure_iterate.T).T          # (r+1, n_p)
    cu_k = (disc.C.T @ displacement_iterate.T).T      # (r+1, n_p)
    for a, i in enumerate(disc.test_rows):
        rhs_p[a] += tuning * np.einsum("j,jk->k", disc.alpha_p[i], mp_pk)
        rhs_p[a] -= np.einsum("j,jk->k", disc.alpha_u[i], cu_k)
        if disc.basis.scheme == CONTINUOUS:
            # node 0 is fixed by continuity; move its storage term across
            rhs_p[a] -= (m_inv + tuning) * disc.alpha_p[i, 0] * (
                disc.Mp @ inputs.prev_pressure
            )
    sol = disc.flow_solver(tuning)(np.concatenate([rhs_p.ravel(), rhs_q.ravel()]))
    n_p = disc.spaces.pressure.n_dofs
    n_qf = disc.MK_ff.shape[0]
    P_new = pressure_iterate.copy()
    P_rows = sol[: disc.n_t * n_p].reshape(disc.n_t, n_p)
    Q_rows = sol[disc.n_t * n_p :].reshape(disc.n_t, n_qf)
    Q_new = np.tile(inputs.prev_flux, (len(disc.basis.nodes), 1))
    vf, vc = disc.spaces.flux.free, disc.spaces.flux.constrained
    for a, row in enumerate(disc.unknown):
        P_new[row] = P_rows[a]
        Q_new[row, vf] = Q_rows[a]
        Q_new[row, vc] = inputs.flux_bc[a]
    if disc.basis.scheme == CONTINUOUS:
        P_new[0] = inputs.prev_pressure
        Q_new[0] = inputs.prev_flux
    return P_new, Q_new


def mechanics_half_step(disc, inputs, pressure_block):
    """Solve the elasticity system per time node for the given pressures."""
    U_new = np.tile(inputs.prev_displacement, (len(disc.basis.nodes), 1))
    uf, uc = disc.spaces.displacement.free, disc.spaces.displacement.constrained
    for a, row in enumerate(disc.unknown):
        rhs = disc.C_f @ pressure_block[row] + inputs.mech_loads[a][uf]
        rhs -= disc.A_fc @ inputs.disp_bc[a]
        U_new[row, uf] = disc._mech(rhs)
        U_new[row, uc] = inputs.disp_bc[a]
    if disc.basis.scheme == CONTINUOUS:
        U_new[0] = inputs.prev_displacement
    return U_new


def _stacked_norm(new, old):
    return float(np.linalg.norm((new - old).ravel()))


def fixed_stress_slab(disc, tuning, inputs, tol_fixed=1e-8, max_iters=500):
    """Iterate flow and mechanics half steps on one slab until the stacked
    coefficient increments of all three fields drop below tol_fixed.

    The initial iterate is the constant-in-time extension of the previous
    slab's end state. At least two sweeps are always performed so the
    reported count certifies a repeated fixed point.
    """
    report = IterationReport(slab=inputs.index)
    P, Q, U = _node_blocks(disc, inputs)
    for k in range(1, max_iters + 1):
        P_new, Q_new = flow_half_step(disc, tuning, inputs, P, U)
        U_new = mechanics_half_step(disc, inputs, P_new)
        dp = _stacked_norm(P_new, P)
        dq = _stacked_norm(Q_new, Q)
        du = _stacked_norm(U_new, U)
        dw = _weighted_pressure_increment(disc, P_new - P)
        report.pressure_increments.append(dp)
        report.flux_increments.append(dq)
        report.displacement_increments.append(du)
        report.weighted_pressure_increments.append(dw)
        report.iterations = k
        P, Q, U = P_new, Q_new, U_new
        if k >= 2 and max(dp, dq, du) < tol_fixed:
            report.termination = "converged"
            state = SlabState(inputs.index, disc.basis, P, Q, U)
            return state, report
    report.termination = "max_iters"
    raise Divergence(
        f"slab {inputs.index} did not converge within {max_iters} iterations",
        slab_index=inputs.index,
        report=report,
    )


def _weighted_pressure_increment(disc, dP):
    """Mass norm of the tableau-weighted pressure increments, stacked over rows."""
    total = 0.0
    with np.errstate(over="ignore"):  # diverging sweeps overflow before the cap
        for i in disc.test_rows:
            w = np.einsum("j,jk->k", disc.alpha_p[i], dP)
            total += float(w @ (disc.Mp @ w))
    return np.sqrt(total)


def monolithic_slab(disc, inputs):
    """Solve the coupled three-field slab system without splitting."""
    m_inv = 1.0 / disc.material.biot_modulus
    rhs_p, rhs_q = _known_flow_rhs(disc, inputs)
    cc_bc = (disc.C_c.T @ inputs.disp_bc.T).T  # (n_t, n_p)
    for a, i in enumerate(disc.test_rows):
        rhs_p[a] -= np.einsum("j,jk->k", disc.alpha_u[i, disc.unknown], cc_bc)
        if disc.basis.scheme == CONTINUOUS:
            rhs_p[a] -= m_inv * disc.alpha_p[i, 0] * (disc.Mp @ inputs.prev_pressure)
            rhs_p[a] -= disc.alpha_u[i, 0] * (disc.C.T @ inputs.prev_displacement)
    uf = disc.spaces.displacement.free
    rhs_u = np.empty((disc.n_t, len(uf)))
    for a in range(disc.n_t):
        rhs_u[a] = inputs.mech_loads[a][uf] - disc.A_fc @ inputs.disp_bc[a]
    sol = disc.monolithic_solver()(
        np.concatenate([rhs_p.ravel(), rhs_q.ravel(), rhs_u.ravel()])
    )
    n_p = disc.spaces.pressure.n_dofs
    n_qf = disc.MK_ff.shape[0]
    n_uf = len(uf)
    r1 = len(disc.basis.nodes)
    P = np.tile(inputs.prev_pressure, (r1, 1))
    Q = np.tile(inputs.prev_flux, (r1, 1))
    U = np.tile(inputs.prev_displacement, (r1, 1))
    off_q = disc.n_t * n_p
    off_u = off_q + disc.n_t * n_qf
    vf, vc = disc.spaces.flux.free, disc.spaces.flux.constrained
    uc = disc.spaces.displacement.constrained
    for a, row in enumerate(disc.unknown):
        P[row] = sol[a * n_p : (a + 1) * n_p]
        Q[row, vf] = sol[off_q + a * n_qf : off_q + (a + 1) * n_qf]
        Q[row, vc] = inputs.flux_bc[a]
        U[row, uf] = sol[off_u + a * n_uf : off_u + (a + 1) * n_uf]
        U[row, uc] = inputs.disp_bc[a]
    return SlabState(inputs.index, disc.basis, P, Q, U)


# -- marching ---------------------------------------------------------------------


def build_discretization(config):
    """Mesh, spaces and assembled operators for a scenario."""
    if config.mesh_kind == "lshape":
        mesh = build_lshape_mesh(config.mesh_level)
    else:
        mesh = build_rectangle_mesh(config.extent, config.subdivisions)
    essential = {tag for tag, bc in config.boundaries.items() if bc.flow == "noflow"}
    dirichlet = {tag: bc.fix for tag, bc in config.boundaries.items() if bc.fix}
    missing = set(mesh.boundary_tags.values()) - set(config.boundaries)
    if missing:
        raise InvalidInput(f"no boundary condition for tags {sorted(missing)}")
    spaces = FeSpaces.build(mesh, config.space_degree, essential, dirichlet)
    basis = build_basis(config.scheme, config.time_degree)

    source = None
    if config.fluid_source:
        const = float(config.fluid_source)
        source = lambda x, y, t: np.full_like(np.asarray(x, dtype=float), const)
    body = None
    gx, gy = (float(g) for g in config.gravity)
    if gx or gy:
        rho = config.material.bulk_density
        body = lambda x, y, t: (
            np.full_like(np.asarray(x, dtype=float), rho * gx),
            np.full_like(np.asarray(x, dtype=float), rho * gy),
        )
    tractions = {}
    for tag, bc in config.boundaries.items():
        if bc.traction is not None:
            h = bc.traction
            tractions[tag] = (
                lambda x, y, t, _h=h: (np.zeros_like(np.asarray(x, dtype=float)),
                                       np.full_like(np.asarray(x, dtype=float), _h(t)))
            )
    return Discretization(
        mesh,
        basis,
        spaces,
        config.material,
        config.tau,
        source=source,
        body_force=body,
        tractions=tractions,
        tol_flow=config.tol_flow,
        tol_mechanics=config.tol_mechanics,
    )


def march(disc, n_slabs, mode=SPLIT, tuning=None, tol_fixed=1e-8, max_iters=500,
          initial=None):
    """March `n_slabs` slabs; returns a RunResult.

    `initial` optionally supplies (p0, q0, u0) full coefficient vectors;
    the default is homogeneous initial data.
    """
    n_p = disc.spaces.pressure.n_dofs
    n_v = disc.spaces.flux.n_dofs
    n_u = disc.spaces.displacement.n_dofs
    prev = initial if initial is not None else (np.zeros(n_p), np.zeros(n_v), np.zeros(n_u))
    states, reports = [], []
    p_snap = np.empty((n_slabs, n_p))
    q_snap = np.empty((n_slabs, n_v))
    u_snap = np.empty((n_slabs, n_u))
    times = disc.tau * np.arange(1, n_slabs + 1)
    for n in range(1, n_slabs + 1):
        inputs = make_slab_inputs(disc, n, (n - 1) * disc.tau, prev)
        if mode == SPLIT:
            try:
                state, report = fixed_stress_slab(disc, tuning, inputs, tol_fixed, max_iters)
            except Divergence as exc:
                exc.completed_reports = reports + [exc.report]
                raise
        elif mode == MONOLITHIC:
            state = monolithic_slab(disc, inputs)
            report = IterationReport(slab=n, iterations=1, termination="converged")
        else:
            raise InvalidInput(f"mode must be split|monolithic, got {mode!r}")
        states.append(state)
        reports.append(report)
        prev = state.end_values()
        p_snap[n - 1], q_snap[n - 1], u_snap[n - 1] = prev
    return RunResult(mode, tuning if tuning is not None else float("nan"),
                     times, states, reports, p_snap, q_snap, u_snap)


def run_simulation(config, mode=SPLIT):
    """Full scenario run: build the discretization and march every slab."""
    disc = build_discretization(config)
    return march(
        disc,
        config.n_slabs,
        mode=mode,
        tuning=config.tuning_value(),
        tol_fixed=config.tol_fixed,
        max_iters=config.max_fixed_iters,
    )


# -- diagnostics --------------------------------------------------------------------


def contraction_estimate(report):
    """Successive pressure-increment ratios and their geometric mean.

    Ratios with a vanishing denominator are dropped. Needs at least three
    iterations; the summary mean skips the first ratio (startup transient).
    """
    if report.iterations < 3:
        raise InsufficientData(
            f"contraction estimate needs >= 3 iterations, slab {report.slab} has {report.iterations}"
        )
    inc = np.asarray(report.pressure_increments)
    ratios = []
    for k in range(1, len(inc)):
        if inc[k - 1] > 0.0:
            ratios.append(inc[k] / inc[k - 1])
    ratios = np.asarray(ratios)
    tail = ratios[1:] if len(ratios) > 1 else ratios
    positive = tail[tail > 0]
    gmean = float(np.exp(np.mean(np.log(positive)))) if len(positive) else 0.0
    return ratios, gmean


def error_norms(state_a, state_b, spaces):
    """Difference norms between two slab states.

    Returns stacked-coefficient l2 norms and end-of-slab L2(domain) norms
    per field, plus L2-in-time norms evaluated with the slab's own node
    rule (the tableau weights are the Gauss weights of that rule).
    """
    if state_a.pressure.shape != state_b.pressure.shape:
        raise InvalidInput("slab states have mismatched pressure layouts")
    if state_a.flux.shape != state_b.flux.shape or (
        state_a.displacement.shape != state_b.displacement.shape
    ):
        raise InvalidInput("slab states have mismatched layouts")
    basis = state_a.basis
    Mp = assemble_pressure_mass(spaces.pressure)
    Mq = assemble_flux_mass(spaces.flux, np.eye(2))
    Mu = assemble_vector_mass(spaces.displacement)
    dP = state_a.pressure - state_b.pressure
    dQ = state_a.flux - state_b.flux
    dU = state_a.displacement - state_b.displacement
    e = basis.end_values
    out = {
        "pressure_l2": float(np.linalg.norm(dP.ravel())),
        "flux_l2": float(np.linalg.norm(dQ.ravel())),
        "displacement_l2": float(np.linalg.norm(dU.ravel())),
        "pressure_L2_end": _mass_norm(Mp, e @ dP),
        "flux_L2_end": _mass_norm(Mq, e @ dQ),
        "displacement_L2_end": _mass_norm(Mu, e @ dU),
    }
    tau_w = np.asarray(basis.beta_ref)
    rows = np.asarray(basis.test_rows)
    out["pressure_L2_time"] = np.sqrt(
        sum(w * _mass_norm(Mp, dP[i]) ** 2 for w, i in zip(tau_w, rows))
    )
    out["flux_L2_time"] = np.sqrt(
        sum(w * _mass_norm(Mq, dQ[i]) ** 2 for w, i in zip(tau_w, rows))
    )
    out["displacement_L2_time"] = np.sqrt(
        sum(w * _mass_norm(Mu, dU[i]) ** 2 for w, i in zip(tau_w, rows))
    )
    return out


def _mass_norm(M, v):
    return float(np.sqrt(max(v @ (M @ v), 0.0)))


def relative_field_gaps(state_a, state_b):
    """Relative stacked-l2 gaps per field (a vs b), for oracle comparisons."""
    out = {}
    for name in ("pressure", "flux", "displacement"):
        a = getattr(state_a, name)
        b = getattr(state_b, name)
        denom = np.linalg.norm(b.ravel())
        out[name] = float(np.linalg.norm((a - b).ravel()) / max(denom, 1e-30))
    return out
