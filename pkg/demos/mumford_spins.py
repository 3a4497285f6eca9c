"""Genus-1 Mumford coefficients: spin sums and the pole along a degeneration."""

import numpy as np

from superperiod.hyperelliptic import SPINS, genus1_mumford_coefficient, genus1_pole_order_fit
from superperiod.scenarios import witten_ratio

rng = np.random.default_rng(0)
for _ in range(5):
    tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.5))
    c = [genus1_mumford_coefficient(tau, s) for s in SPINS]
    print(f"tau = {tau:.3f}  sum/max = {abs(sum(c)) / max(map(abs, c)):.1e}")

fit = genus1_pole_order_fit()
print("pole order:", round(fit["k"], 6))

# the leading push-forward coefficient over c1 c2 does not depend on the moduli
for t1, t2 in [(0.1 + 1.3j, -0.2 + 1.6j), (0.3 + 1.1j, 0.05 + 1.9j)]:
    print("ratio:", witten_ratio(t1, t2))
