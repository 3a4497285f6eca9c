import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superperiod.grassmann import (GENERATOR_ORDER, DomainError, GrassmannElement, StructureError,
                                   SuperMatrix, TruncatedSeries, berezinian, det2, gs_inv, gs_mul,
                                   gs_sqrt, pairing, random_element, series)

G = GENERATOR_ORDER


def gen(name, order=3):
    return GrassmannElement.generator(name, G, order)


def const(v, order=3):
    return GrassmannElement.scalar(v, G, order)


def t(order=3):
    return GrassmannElement.from_terms({"1": [0, 1]}, G, order)


def close(a, b, tol=1e-12):
    return (a - b).max_abs() <= tol * max(1.0, b.max_abs() if hasattr(b, "max_abs") else abs(b))


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def test_nilpotent_and_anticommuting():
    e1, e2 = gen("eta1"), gen("eta2")
    assert gs_mul(e1, e1).max_abs() == 0
    assert (e1 * e2).coeff("eta1*eta2", 0) == 1
    assert (e2 * e1).coeff("eta1*eta2", 0) == -1


def test_nilpotent_product_cancels():
    e12 = gen("eta1") * gen("eta2")
    x = (const(1) + t() * e12) * (const(1) - t() * e12)
    assert close(x, const(1), 0)


def test_inverse_examples():
    e12 = gen("eta1") * gen("eta2")
    assert close(gs_inv(const(1)), const(1), 0)
    assert close(gs_inv(const(1) + t() * e12), const(1) - t() * e12, 1e-15)
    s = gs_inv(series([2, 1], order=4))
    np.testing.assert_allclose(s.coeffs, [0.5, -0.25, 0.125, -0.0625, 0.03125], rtol=1e-15)


def test_sqrt_examples():
    assert close(gs_sqrt(const(1)), const(1), 0)
    s = gs_sqrt(series([4, 4], order=4))
    # 2 sqrt(1 + t) = 2 + t - t^2/4 + t^3/8 - ...; squaring is the oracle
    np.testing.assert_allclose(s.coeffs, [2, 1, -1 / 4, 1 / 8, -5 / 64], rtol=1e-15)
    np.testing.assert_allclose((s * s).coeffs, [4, 4, 0, 0, 0], atol=1e-14)
    e12 = gen("eta1") * gen("eta2")
    assert close(gs_sqrt(const(1) + 2 * e12), const(1) + e12, 1e-15)
    assert close(gs_sqrt(const(4), branch=-1), const(-2), 1e-15)


def test_domain_errors():
    with pytest.raises(DomainError):
        gen("eta1").inv()
    with pytest.raises(DomainError):
        series([0, 1], order=3).inv()
    with pytest.raises(DomainError):
        series([0, 1], order=3).sqrt()


def test_structure_errors():
    with pytest.raises(StructureError):
        series([1, 2], var="t") * series([1, 2], var="q")
    with pytest.raises(StructureError):
        GrassmannElement.generator("eta1", ("eta1",), 2) * GrassmannElement.generator("eta1", ("eta1", "eta2"), 2)


def test_truncation_is_hard():
    s = series([1, 1], order=2)
    assert len((s * s * s).coeffs) == 3


def test_det2_and_pairing_examples():
    one, zero = const(1), const(0)
    assert close(det2([[one, zero], [zero, one]]), one, 0)
    rng = np.random.default_rng(3)
    a = [[complex(*rng.standard_normal(2)) for _ in range(2)] for _ in range(2)]
    A = [[const(x) for x in r] for r in a]
    assert close(pairing(A, A), 2 * det2(A), 1e-14)


def test_det2_epsilon_expansion_matches_direct():
    rng = np.random.default_rng(11)
    eps1 = gen("eta1") * gen("eta2")
    eps2 = gen("etat1") * gen("etat2")

    def num():
        return [[const(complex(*rng.standard_normal(2))) for _ in range(2)] for _ in range(2)]

    A, B1, B2 = num(), num(), num()
    M = [[A[i][j] + B1[i][j] * eps1 + B2[i][j] * eps2 for j in range(2)] for i in range(2)]
    formula = det2(A) + pairing(A, B1) * eps1 + pairing(A, B2) * eps2 + pairing(B1, B2) * eps1 * eps2
    assert close(det2(M), formula, 1e-14)


def test_berezinian_identity_block():
    one, zero = const(1), const(0)
    m = SuperMatrix([[one if i == j else zero for j in range(5)] for i in range(5)], 3)
    assert close(berezinian(m), one, 0)


def test_berezinian_rejects_singular_odd_block():
    one, zero = const(1), const(0)
    rows = [[one if i == j else zero for j in range(3)] for i in range(3)]
    rows[2][2] = gen("eta1") * gen("eta2")
    with pytest.raises(DomainError):
        berezinian(SuperMatrix(rows, 2))


def test_supermatrix_parity_checked():
    one = const(1)
    with pytest.raises(StructureError):
        SuperMatrix([[one, one], [one, one]], 1)


def test_berezinian_of_scalar_blocks():
    # Ber(diag(a, d)) = a / d
    a, d = const(3.0), const(2.0)
    z = const(0)
    assert close(berezinian(SuperMatrix([[a, z], [z, d]], 1)), const(1.5), 1e-15)


def _homog(rng, parity):
    return random_element(rng, order=3, parity=parity, scale=0.5)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_associativity(s):
    rng = np.random.default_rng(s)
    a, b, c = (random_element(rng, order=3) for _ in range(3))
    assert close((a * b) * c, a * (b * c), 1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(["even", "odd"]), st.sampled_from(["even", "odd"]))
def test_graded_commutativity(s, pa, pb):
    rng = np.random.default_rng(s)
    a, b = _homog(rng, pa), _homog(rng, pb)
    sign = -1 if pa == pb == "odd" else 1
    assert close(a * b, sign * (b * a), 1e-12)
    assert (a * b).parity in ("zero", "even" if pa == pb else "odd")


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_inverse_and_sqrt_are_two_sided(s):
    rng = np.random.default_rng(s)
    u = random_element(rng, order=4, scale=0.3, body=1.0 + rng.uniform(0.5, 1.5))
    assert close(u * u.inv(), const(1, 4), 1e-12)
    assert close(u.inv() * u, const(1, 4), 1e-12)
    r = u.sqrt()
    assert close(r * r, u, 1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_det2_is_cofactor_expansion(s):
    rng = np.random.default_rng(s)
    m = [[_homog(rng, "even") for _ in range(2)] for _ in range(2)]
    direct = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    assert close(det2(m), direct, 0)
    assert close(pairing(m, m), 2 * det2(m), 1e-12)


def _supermatrix(rng, ne, no):
    n = ne + no
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            same = (i < ne) == (j < ne)
            x = random_element(rng, order=3, parity="even" if same else "odd", scale=0.3)
            row.append(x + 1.0 if i == j else x)
        rows.append(row)
    return SuperMatrix(rows, ne)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([(1, 1), (2, 1), (1, 2), (3, 2)]))
def test_berezinian_multiplicative(s, shape):
    rng = np.random.default_rng(s)
    m1, m2 = _supermatrix(rng, *shape), _supermatrix(rng, *shape)
    lhs = berezinian(m1 @ m2)
    rhs = berezinian(m1) * berezinian(m2)
    assert close(lhs, rhs, 1e-12)


def test_series_view_preserved():
    s = series([1, 2, 3])
    assert isinstance(s * s, TruncatedSeries)
    assert isinstance(s.inv(), TruncatedSeries)
