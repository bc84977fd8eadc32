"""Manufactured-solution convergence studies.

A manufactured pressure/displacement pair is pushed through the governing
equations symbolically to obtain the volumetric fluid source, the
mechanics body force, the Darcy flux and all boundary data. Runs use the
monolithic slab solver so the measured error is pure discretization error.

Two study families:

* spatial: trigonometric fields with a time factor inside the trial space
  in time, so the temporal error vanishes and mesh refinement reveals the
  spatial orders (s+1 for pressure and flux, s+2 for displacement);
* temporal: fields polynomial in space inside the trial spaces, time
  factor of higher degree, so step refinement reveals the temporal order.
"""

from dataclasses import dataclass

import numpy as np
import sympy as sym

from .assembly import l2_error_displacement, l2_error_flux, l2_error_pressure
from .mesh import build_rectangle_mesh
from .solver import Discretization, march
from .spaces import (
    FeSpaces,
    facet_flux_moments,
    interpolate_displacement,
    interpolate_flux,
    interpolate_pressure,
)
from .time_galerkin import build_basis

_X, _Y, _T = sym.symbols("x y t")


def _vectorized(expr):
    fn = sym.lambdify((_X, _Y, _T), expr, "numpy")

    def wrapped(x, y, t):
        return np.broadcast_to(fn(x, y, t), np.broadcast(x, y).shape).astype(float)

    return wrapped


@dataclass
class ManufacturedSolution:
    """Symbolic solution plus every derived field as a numpy callable."""

    pressure: object
    displacement: tuple
    material: object

    def __post_init__(self):
        mat = self.material
        K = np.asarray(mat.permeability)
        p = self.pressure
        u1, u2 = self.displacement
        qx = -(K[0, 0] * p.diff(_X) + K[0, 1] * p.diff(_Y))
        qy = -(K[1, 0] * p.diff(_X) + K[1, 1] * p.diff(_Y))
        div_u = u1.diff(_X) + u2.diff(_Y)
        storage = p / mat.biot_modulus + mat.biot_coefficient * div_u
        source = storage.diff(_T) + qx.diff(_X) + qy.diff(_Y)
        mu, lam, b = mat.shear_modulus, mat.lame_lambda, mat.biot_coefficient
        sxx = 2 * mu * u1.diff(_X) + lam * div_u - b * p
        syy = 2 * mu * u2.diff(_Y) + lam * div_u - b * p
        sxy = mu * (u1.diff(_Y) + u2.diff(_X))
        body_x = -(sxx.diff(_X) + sxy.diff(_Y))
        body_y = -(sxy.diff(_X) + syy.diff(_Y))

        self.p_fn = _vectorized(p)
        self._qx = _vectorized(qx)
        self._qy = _vectorized(qy)
        self._u1 = _vectorized(u1)
        self._u2 = _vectorized(u2)
        self.source_fn = _vectorized(source)
        self._bx = _vectorized(body_x)
        self._by = _vectorized(body_y)

    def q_fn(self, x, y, t):
        return self._qx(x, y, t), self._qy(x, y, t)

    def u_fn(self, x, y, t):
        return self._u1(x, y, t), self._u2(x, y, t)

    def body_fn(self, x, y, t):
        return self._bx(x, y, t), self._by(x, y, t)


def trigonometric_solution(material, time_factor):
    """Smooth fields with q . n = 0 and u = 0 on the unit square boundary."""
    g = time_factor
    p = sym.cos(sym.pi * _X) * sym.cos(sym.pi * _Y) * g
    bump = sym.sin(sym.pi * _X) * sym.sin(sym.pi * _Y)
    return ManufacturedSolution(p, (bump * g, sym.Rational(1, 2) * bump * g), material)


def polynomial_solution(material, s, time_factor):
    """Fields inside the discrete spaces: pressure in Q_s, displacement in Q_{s+1}."""
    g = time_factor
    xs = sum(_X**k for k in range(s + 1))
    ys = sum((-_Y) ** k for k in range(s + 1))
    p = (xs * ys + _X**s) * g
    u1 = (_X ** (s + 1) + _Y ** (s + 1)) * g
    u2 = (_X * _Y**s - 2 * _X ** (s + 1)) * g
    return ManufacturedSolution(p, (u1, u2), material)


def simple_material():
    from .biot import MaterialParams

    return MaterialParams(
        biot_modulus=1.0,
        biot_coefficient=1.0,
        shear_modulus=1.0,
        lame_lambda=1.0,
        permeability=np.eye(2),
    )


def build_mms_discretization(solution, nx, s, scheme, time_degree, tau):
    """Unit-square discretization with every boundary datum taken from the
    manufactured fields (essential flux and displacement on all sides)."""
    mesh = build_rectangle_mesh((0.0, 1.0, 0.0, 1.0), (nx, nx))
    spaces = FeSpaces.build(mesh, s, essential_flux={"boundary"}, dirichlet={"boundary": "xy"})
    basis = build_basis(scheme, time_degree)
    V, H = spaces.flux, spaces.displacement
    ne = s + 1
    essential_facets = np.array(
        sorted({int(d) // ne for d in V.constrained}), dtype=np.int64
    )

    def flux_bc(t):
        moments = facet_flux_moments(V, essential_facets, solution.q_fn, t)
        full = np.zeros(V.n_dofs)
        for row, fid in enumerate(essential_facets):
            full[fid * ne : (fid + 1) * ne] = moments[row]
        return full[V.constrained]

    def disp_bc(t):
        return interpolate_displacement(H, solution.u_fn, t)[H.constrained]

    return Discretization(
        mesh,
        basis,
        spaces,
        solution.material,
        tau,
        source=solution.source_fn,
        body_force=solution.body_fn,
        flux_bc=flux_bc,
        disp_bc=disp_bc,
        tol_flow=1e-12,
        tol_mechanics=1e-12,
    )


def initial_state(solution, disc):
    spaces = disc.spaces
    return (
        interpolate_pressure(spaces.pressure, solution.p_fn, 0.0),
        interpolate_flux(spaces.flux, solution.q_fn, 0.0),
        interpolate_displacement(spaces.displacement, solution.u_fn, 0.0),
    )


def end_errors(solution, disc, result, t_end):
    """L2(domain) errors of the end-of-run fields against the exact solution."""
    p_end = result.pressure_snapshots[-1]
    q_end = result.flux_snapshots[-1]
    u_end = result.displacement_snapshots[-1]
    spaces = disc.spaces
    return {
        "pressure": l2_error_pressure(spaces.pressure, p_end, solution.p_fn, t_end),
        "flux": l2_error_flux(spaces.flux, q_end, solution.q_fn, t_end),
        "displacement": l2_error_displacement(
            spaces.displacement, u_end, solution.u_fn, t_end
        ),
    }


def run_case(solution, nx, s, scheme, time_degree, n_slabs, t_end):
    tau = t_end / n_slabs
    disc = build_mms_discretization(solution, nx, s, scheme, time_degree, tau)
    result = march(disc, n_slabs, mode="monolithic", initial=initial_state(solution, disc))
    return end_errors(solution, disc, result, t_end)


def spatial_study(s, mesh_sizes, scheme="cgp", time_degree=1, n_slabs=2, t_end=0.5,
                  material=None):
    """Errors under mesh refinement with an exactly representable time factor."""
    material = material or simple_material()
    solution = trigonometric_solution(material, _T)
    rows = []
    for nx in mesh_sizes:
        errors = run_case(solution, nx, s, scheme, time_degree, n_slabs, t_end)
        rows.append({"level": nx, **errors})
    return rows


def temporal_study(scheme, time_degree, s, slab_counts, t_end=0.5, material=None):
    """Errors under step refinement with a space-exact manufactured solution."""
    material = material or simple_material()
    solution = polynomial_solution(material, s, _T ** (time_degree + 2))
    rows = []
    for n_slabs in slab_counts:
        errors = run_case(solution, 2, s, scheme, time_degree, n_slabs, t_end)
        rows.append({"level": n_slabs, **errors})
    return rows


def exactness_case(scheme, time_degree, s, material=None):
    """Manufactured solution inside the discrete space; errors are solver-level."""
    material = material or simple_material()
    factor = _T**time_degree if time_degree > 0 else sym.Integer(1)
    solution = polynomial_solution(material, s, 1 + factor)
    return run_case(solution, 2, s, scheme, time_degree, n_slabs=2, t_end=0.5)


def observed_orders(rows, key):
    """Successive log2 error reduction rates for a halving refinement sequence."""
    errs = [row[key] for row in rows]
    return [float(np.log2(errs[i] / errs[i + 1])) for i in range(len(errs) - 1)]
