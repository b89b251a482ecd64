"""Do standardized scores spread exceptional researchers evenly across fields?

Nonzero scores of all fields are pooled and flagged when they sit more than
five median absolute deviations from the median.  We compare how unevenly the
flags fall across fields before and after dividing by each field's nonzero mean.
"""

from crossfield.analysis import incidence_range, outlier_incidence
from crossfield.scaling import ScalingFactorKind, standardize
from crossfield.synth import BENCHMARK_SEED, benchmark_specs, generate_population

pop = generate_population(benchmark_specs(), BENCHMARK_SEED)
raw = outlier_incidence(pop)
std = outlier_incidence([standardize(s, ScalingFactorKind.MEAN_NONZERO) for s in pop])

print(f"{'field':<11} {'raw %':>6} {'std %':>6}")
for fid in raw.incidence:
    print(f"{fid:<11} {raw.incidence[fid]:6.1f} {std.incidence[fid]:6.1f}")
print(f"\nrange across fields: raw {incidence_range(raw):.1f} pp, standardized {incidence_range(std):.1f} pp")
