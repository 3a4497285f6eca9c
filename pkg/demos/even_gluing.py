"""Classical period matrix of two glued tori, expansion vs quadrature."""

import numpy as np

from superperiod.periods import even_period_matrix
from superperiod.scenarios import oracle_table

tau1, tau2 = 0.1 + 1.3j, -0.2 + 1.6j
spm, _ = even_period_matrix(tau1, tau2, N=4)
for i in range(2):
    for j in range(i, 2):
        s = spm.Omega[i][j].component("1")
        print(f"Omega{i + 1}{j + 1}:", np.round(s.coeffs[:4], 6))

# error of the mod q^4 expansion against direct integration; halving q divides it by ~16
q = 1e-3 * np.exp(1j * np.pi / 5)
for row in oracle_table(tau1, tau2, [q, q / 2, q / 4]):
    print(f"|q| = {abs(row['q']):.2e}  error = {row['error']:.3e}  ratio = {row.get('ratio_to_next', float('nan')):.2f}")
