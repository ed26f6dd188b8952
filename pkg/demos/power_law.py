"""Gaussian model integral for (k, n) = (5, 2): oracle sweep against the residue prediction."""
import math

from scipy.special import gamma

from oscitrace.amplitudes import gaussian
from oscitrace.quadrature import fit_asymptotic, gaussian_oracle_radial, geometric_grid
from oscitrace.residues import lemma53_leading, pole_structure

dims = (5, 2)
lead = lemma53_leading(dims, gaussian(3))
print(f"predicted: {lead.coefficient.real:.6f} * lam^-{lead.power}")
print(f"closed form 2 pi G(2/5) G(11/10) / (2^(1/5) sqrt(pi)) = "
      f"{2 * math.pi * gamma(0.4) * gamma(1.1) / (2**0.2 * math.sqrt(math.pi)):.6f}")

samples = []
print(f"{'lambda':>10} {'oracle':>14} {'leading term':>14} {'ratio':>8}")
for lam in geometric_grid(3, 6, 0.5):
    v = gaussian_oracle_radial(dims, lam).value
    p = lead.evaluate(lam).real
    samples.append((lam, v))
    print(f"{lam:10.3g} {v:14.8e} {p:14.8e} {v / p:8.5f}")

corr = [(float(x), 0) for x in pole_structure(dims).later_powers(0.85)]
fit = fit_asymptotic(samples, "power-with-corrections", corr)
pure = fit_asymptotic(samples)
print(f"fit with later poles {[round(c[0], 2) for c in corr]}: alpha={fit.exponent:.6f}, C={fit.coefficient:.6f}")
print(f"pure power fit:                alpha={pure.exponent:.6f}, C={pure.coefficient:.6f}")
