"""Super period matrix near the (+,+) boundary and its canonical pullback."""

from superperiod.periods import canonical_projection_pullback, even_jacobian, super_period_matrix

tau1, tau2 = 0.1 + 1.3j, -0.2 + 1.6j
spm, data = super_period_matrix(tau1, tau2, N=5)

for name, (i, j) in {"Omega11": (0, 0), "Omega12": (0, 1), "Omega22": (1, 1)}.items():
    x = spm.Omega[i][j]
    for mono in ("1", "eta1*eta2"):
        s = x.component(mono)
        print(name, mono, [complex(round(c.real, 6), round(c.imag, 6)) for c in s.coeffs[:5]])

print("symmetric:", spm.is_symmetric(1e-12))
pb = canonical_projection_pullback(spm, even_jacobian(tau1, tau2, 7))
print("f:", pb.f.component("1").coeffs[:4])
print("g1 t^3:", pb.g1.component("1")[3], "g2 t^3:", pb.g2.component("1")[3])
