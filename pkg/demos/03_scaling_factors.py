"""Which field statistic makes scores comparable across fields?

The bundled benchmark has 18 synthetic fields whose sizes, nil shares and tail
shapes differ.  Each candidate denominator is applied in turn, all researchers
are pooled, and we check whether every field keeps its fair share of the
global top 5%, 10% and 20%.
"""

from crossfield.synth import BENCHMARK_SEED, benchmark_specs, evaluate_scaling_factors, generate_population

pop = generate_population(benchmark_specs(), BENCHMARK_SEED)
ev = evaluate_scaling_factors(pop)

print(f"{'factor':<15} {'p':>5} {'violations':>10} {'worst dev':>10}  worst field")
for name, f in ev.factors.items():
    for p, t in f.top.items():
        print(f"{name:<15} {p:>5.2f} {t.violations:>10d} {100 * t.max_deviation:>9.1f}%  {t.worst_field}")

print("\nranking at p=0.05 (violations, then CCDF spread):", ev.ranking())

# The medians break down where many researchers score zero.
median_rows = {r.field_id: r for r in ev["median_all"].top[0.05].rows}
for s in sorted(pop, key=lambda s: -s.n_zero / len(s))[:4]:
    r = median_rows[s.field_id]
    print(f"{s.field_id:<8} nil {100 * s.n_zero / len(s):4.1f}%  top-5% share under median_all {100 * r.share:5.1f}%")
