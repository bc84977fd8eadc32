"""Sweep the tuning multiplier and reproduce the qualitative studies:
minimum cost slightly above the theoretical optimum, strong growth away
from it, and approximate doubling of total iterations when the step halves.
"""

from porosplit import benchmark_scenario
from porosplit.cli import study, sweep_omega

config = benchmark_scenario(level=1, tau=0.01, scheme="dg", time_degree=0, space_degree=0)

print("omega sweep (dg(0), s=0, tau=0.01):")
print(f"{'omega':>6} {'L':>9} {'total':>7} {'max/slab':>9} {'converged':>10}")
for omega, L, total, worst, ok in sweep_omega(config, (0.25, 0.5, 0.75, 1.0, 1.05, 1.25, 1.5, 2, 4)):
    print(f"{omega:6.2f} {L:9.2f} {total:7d} {worst:9d} {str(ok):>10}")
print("(small multipliers sit below the guaranteed-contraction range and diverge)")

print("\ntime-step study (dg(1), s=1):")
for row in study(benchmark_scenario(1, 0.02, "dg", 1, 1), "time-step", (0.02, 0.01)):
    print(f"  tau={row[1]}: total={row[4]}")

print("\nscheme study at s=1:")
for row in study(benchmark_scenario(1, 0.02, "cgp", 1, 1), "time-scheme", ("cgp1", "dg1")):
    print(f"  {row[1]}: total={row[4]}")
