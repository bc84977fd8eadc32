"""Static pseudocolor figures of pressure and displacement magnitude."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import PolyCollection

from .assembly import eval_displacement, eval_pressure
from .elements import tensor_gauss


def cell_pressure_averages(W, coeffs):
    pts, wts = tensor_gauss(W.degree + 1)
    vals = eval_pressure(W, coeffs, pts)
    return vals @ wts  # reference-cell average equals physical average on rectangles


def cell_displacement_magnitude(H, coeffs):
    center = np.array([[0.5, 0.5]])
    vals = eval_displacement(H, coeffs, center)[:, 0, :]
    return np.hypot(vals[:, 0], vals[:, 1])


def plot_fields_svg(spaces, p_coeffs, u_coeffs, t, path):
    """Write a two-panel pseudocolor figure (pressure, |u|) to an SVG file."""
    mesh = spaces.mesh
    polys = [mesh.vertices[c] for c in mesh.cells]
    p_cells = cell_pressure_averages(spaces.pressure, p_coeffs)
    u_cells = cell_displacement_magnitude(spaces.displacement, u_coeffs)
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for ax, values, label in zip(axes, (p_cells, u_cells), ("pressure", "|u|")):
        coll = PolyCollection(polys, array=values, edgecolor="face", cmap="viridis")
        ax.add_collection(coll)
        ax.autoscale_view()
        ax.set_aspect("equal")
        ax.set_title(f"{label} at t={t:g}")
        fig.colorbar(coll, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
