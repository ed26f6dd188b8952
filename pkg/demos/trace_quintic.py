"""Re((x + i xi)^5) with a Fejer test function: leading trace coefficient vs the model integral."""
from oscitrace.distributions import make_test_function
from oscitrace.symbols import re_complex_power
from oscitrace.trace import TraceProblem, lambda0_nonextremum, model_cutoff_term, model_oracle

p = TraceProblem(re_complex_power(5), (5, 1), make_test_function("fejer", 1.0, 0.0))
rep = lambda0_nonextremum(p)
print(f"Lambda_0 = {rep.leading_value:.10f}  (h power {float(rep.h_power):+.2f})")
for name, val in sorted(rep.components.items()):
    print(f"  {name:>14}: {val}")

print(f"{'lambda':>8} {'rho0':>5} {'raw ratio':>12} {'minus cutoff term':>18}")
for lam in (1e3, 1e4, 1e5, 1e6):
    for rho in (0.4, 0.6):
        v = model_oracle(p, lam, rho0=rho).value
        scale = lam ** 0.6
        print(f"{lam:8.0e} {rho:5.2f} {v / scale:12.8f} {(v - model_cutoff_term(p, rho)) / scale:18.10f}")
