"""Flow checks for the radial quartic and a perturbed quartic."""
from oscitrace.flow import FlowSystem, harmonic_oscillator, min_period, radial_quartic, run_flow_suite
from oscitrace.symbols import HomogeneousSymbol, radial_power

quintic = HomogeneousSymbol.from_records([{"powers": [5, 0], "coeff": 0.1}])
for name, sys_ in [("(x^2+xi^2)^2", radial_quartic()),
                   ("(x^2+xi^2)^2 + 0.1 x^5", FlowSystem.of(radial_power(2, 1), quintic))]:
    print(name)
    for c in run_flow_suite(sys_):
        print(f"  {'ok  ' if c.passed else 'FAIL'} {c.name:<45} {c.value:.3e}  {c.detail}")

rep = min_period(harmonic_oscillator(), 0.5)
print(f"harmonic oscillator: Yorke bound {rep.yorke_bound:.12f}, observed {rep.observed_min_period:.12f}")
