"""Shared fixtures-in-spirit for the solver and acceptance tests."""

import numpy as np

from porosplit.assembly import assemble_coupling
from porosplit.biot import BoundaryCondition, MaterialParams, ScenarioConfig


def square_config(b=100.0, scheme="dg", r=0, s=0, tau=0.1, t_end=0.2, nx=2, **kw):
    mat = MaterialParams(
        biot_modulus=100.0,
        biot_coefficient=b,
        shear_modulus=37.037,
        lame_lambda=86.42,
        permeability=0.1 * np.eye(2),
    )
    return ScenarioConfig(
        mesh_kind="rectangle",
        extent=(0.0, 1.0, 0.0, 1.0),
        subdivisions=(nx, nx),
        material=mat,
        t_end=t_end,
        tau=tau,
        scheme=scheme,
        time_degree=r,
        space_degree=s,
        boundaries={"boundary": BoundaryCondition(flow="noflow", fix="xy")},
        **kw,
    )


def max_mass_conservation_residual(disc, cfg, result):
    """Cell-wise balance of storage, coupling and facet fluxes for s=0, dg(0)."""
    mesh = disc.mesh
    areas = mesh.cell_areas()
    m_inv = 1.0 / cfg.material.biot_modulus
    C1 = assemble_coupling(disc.spaces.pressure, disc.spaces.displacement, 1.0)
    b = cfg.material.biot_coefficient
    worst = 0.0
    p_prev = np.zeros(disc.spaces.pressure.n_dofs)
    u_prev = np.zeros(disc.spaces.displacement.n_dofs)
    for n in range(len(result.states)):
        p_n = result.pressure_snapshots[n]
        q_n = result.flux_snapshots[n]
        u_n = result.displacement_snapshots[n]
        div_u_n = C1.T @ u_n      # cell integrals of div(u)
        div_u_prev = C1.T @ u_prev
        for c in range(mesh.n_cells):
            flux = 0.0
            for e in range(4):
                fid = mesh.cell_facets[c, e]
                sign = 1.0 if mesh.cell_facet_is_first[c, e] else -1.0
                flux += sign * q_n[fid]  # zeroth moment = integrated normal flux
            resid = (
                m_inv * (p_n[c] - p_prev[c]) * areas[c]
                + b * (div_u_n[c] - div_u_prev[c])
                + cfg.tau * flux
            )
            worst = max(worst, abs(resid))
        p_prev, u_prev = p_n, u_n
    return worst
