"""k = 2, n = 1: value * lam - pi log lam tends to -gamma * pi."""
import math

from oscitrace.amplitudes import gaussian
from oscitrace.quadrature import oscillatory_oracle, richardson
from oscitrace.specfun import euler_gamma

lams = [1e4, 1e5, 1e6, 1e7, 1e8]
vals = []
for lam in lams:
    v = oscillatory_oracle("3d", (2, 1), gaussian(3), lam).value
    vals.append(v * lam - math.pi * math.log(lam))
    print(f"lam={lam:8.0e}  value*lam - pi log lam = {vals[-1]:.12f}")
print(f"Richardson (last three): {richardson([1 / l for l in lams[-3:]], vals[-3:]):.12f}")
print(f"-gamma * pi:             {-euler_gamma().value * math.pi:.12f}")
