"""Build the benchmark meshes and look at the three discrete spaces.

The flow problem uses a broken tensor-product pressure space paired with a
Raviart-Thomas flux space (shared facet dofs, orientation signs), and the
displacement lives in a continuous vector space one degree higher.
"""

import numpy as np

from porosplit import build_lshape_mesh, build_rectangle_mesh, refine_uniform
from porosplit.spaces import FeSpaces

mesh = build_rectangle_mesh((0, 2, 0, 1), (4, 2))
print(f"rectangle: {mesh.n_cells} cells, {mesh.n_vertices} vertices, "
      f"{mesh.n_facets} facets, areas {np.unique(np.round(mesh.cell_areas(), 12))}")

for m in (1, 2, 3):
    lshape = build_lshape_mesh(m)
    h = 2.0 ** -(m + 1)
    print(f"L-shape level {m}: {lshape.n_cells} cells at h={h}, "
          f"area {lshape.cell_areas().sum():.4f}, tags {lshape.tags()}")

fine = refine_uniform(build_lshape_mesh(1))
print(f"uniform refinement of level 1: {fine.n_cells} cells "
      f"(matches level 2: {build_lshape_mesh(2).n_cells})")

for s in (0, 1):
    spaces = FeSpaces.build(
        build_lshape_mesh(1),
        s,
        essential_flux={"left", "right", "bottom", "reentrant"},
        dirichlet={"left": "x", "right": "x", "bottom": "y"},
    )
    print(f"s={s}: pressure dofs {spaces.pressure.n_dofs}, "
          f"flux dofs {spaces.flux.n_dofs} ({len(spaces.flux.free)} free), "
          f"displacement dofs {spaces.displacement.n_dofs} "
          f"({len(spaces.displacement.free)} free)")

print("\nplain-text export of the 1x1 mesh:")
print(build_rectangle_mesh((0, 1, 0, 1), (1, 1)).export_text())
