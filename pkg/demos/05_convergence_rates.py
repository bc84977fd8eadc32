"""Manufactured-solution rate checks for the space-time discretization.

Spatial orders: s+1 for pressure and flux, s+2 for displacement. Temporal
orders at the slab endpoints: 1 for the lowest discontinuous scheme, 2 for
the lowest continuous one. A manufactured solution lying inside the
discrete spaces is reproduced to solver precision.
"""

from porosplit.mms import (
    exactness_case,
    observed_orders,
    spatial_study,
    temporal_study,
)


def table(rows, label):
    print(f"\n{label}")
    print(f"{'level':>6} {'err p':>10} {'err q':>10} {'err u':>10}")
    for row in rows:
        print(f"{row['level']:6d} {row['pressure']:10.3e} {row['flux']:10.3e} "
              f"{row['displacement']:10.3e}")
    for key in ("pressure", "flux", "displacement"):
        print(f"  {key} orders: {[round(o, 2) for o in observed_orders(rows, key)]}")


exact = exactness_case("cgp", 1, 1)
print("in-space manufactured solution, errors at end of run:")
print("  " + "  ".join(f"{k}={v:.2e}" for k, v in exact.items()))

table(spatial_study(0, [8, 16, 32]), "spatial refinement, s=0 (expect 1/1/2):")
table(spatial_study(1, [4, 8, 16]), "spatial refinement, s=1 (expect 2/2/3):")
table(temporal_study("dg", 0, 1, [4, 8, 16]), "step refinement, dg(0) (expect 1):")
table(temporal_study("cgp", 1, 1, [4, 8, 16]), "step refinement, cgp(1) (expect 2):")
