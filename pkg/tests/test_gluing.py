import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superperiod.elliptic import TWO_PI_I
from superperiod.gluing import (ComponentDifferential, GluingData, glue_residual, module_constraints,
                                perturbed, solve_even_basis, solve_minus_minus_basis, solve_odd_section,
                                solve_super_basis)
from superperiod.grassmann import StructureError

T1, T2 = 0.1 + 1.3j, -0.2 + 1.6j
taus = st.builds(complex, st.floats(-0.5, 0.5), st.floats(0.8, 2.5))


def coeffs(x, mono="1"):
    return x.component(mono).coeffs


def assert_series(x, mono, expected, tol=1e-10):
    """Compare modulo var**len(expected)."""
    c = coeffs(x, mono)[: len(expected)]
    e = np.asarray(expected, dtype=complex)
    assert np.max(np.abs(c - e)) <= tol * max(1.0, np.max(np.abs(e)))


@pytest.fixture(scope="module")
def even():
    return solve_even_basis(T1, T2, 5)


@pytest.fixture(scope="module")
def plus():
    data = GluingData(T1, T2, 6, "plus_plus")
    return data, solve_super_basis(data)


@pytest.fixture(scope="module")
def minus():
    data = GluingData(T1, T2, 5, "minus_minus")
    return data, solve_minus_minus_basis(data)


def test_even_basis_mod_q4(even):
    w1, w2, data = even
    # omega1 = (dx1, -q wp(x2) dx2) with no q^2, q^3 corrections
    assert_series(w1.even[1][0], "1", [1])
    assert_series(w1.even[2][2], "1", [0, -1, 0, 0])
    for i in (1, 2):
        for n, c in w1.even[i].items():
            if (i, n) not in ((1, 0), (2, 2)):
                assert np.max(np.abs(coeffs(c)[:4])) < 1e-12
    assert_series(w2.even[2][0], "1", [1])
    assert_series(w2.even[1][2], "1", [0, -1, 0, 0])


def test_even_basis_unglued_limit(even):
    w1, w2, _ = even
    for w, lead in ((w1, 1), (w2, 2)):
        for i in (1, 2):
            for n, c in w.even[i].items():
                expect = 1 if (i == lead and n == 0) else 0
                assert coeffs(c)[0] == expect


def test_residuals_vanish(even, plus, minus):
    w1, w2, data = even
    assert glue_residual(w1, data) <= 1e-10 and glue_residual(w2, data) <= 1e-10
    for data, ws in (plus, minus):
        for w in ws:
            assert glue_residual(w, data) <= 1e-10


@pytest.mark.parametrize("component,family,n", [(1, "even", 2), (2, "even", 3), (2, "odd", 1), (1, "odd", 2)])
def test_residual_detects_perturbation(plus, component, family, n):
    data, (w1, _) = plus
    bad = perturbed(w1, component, family, n, 1e-3)
    assert glue_residual(bad, data) >= 1e-4


def test_residual_of_zero_differential(plus):
    data, (w1, _) = plus
    zero = {i: {n: c * 0 for n, c in w1.even[i].items()} for i in (1, 2)}
    zodd = {i: {n: c * 0 for n, c in w1.odd[i].items()} for i in (1, 2)}
    z = ComponentDifferential("plus_plus", zero, zodd, w1.U, w1.V)
    assert glue_residual(z, data) == 0


def test_super_basis_mod_t5(plus):
    data, (w1, w2) = plus
    wu1, wu2 = data.ctx1.wp(0.5), data.ctx2.wp(0.5)
    # second component: (t eta1 eta2 + t^2) wp - [t eta1 kappa1 + t^2 eta2 kappa2]
    assert_series(w1.even[2][2], "1", [0, 0, 1, 0, 0])
    assert_series(w1.even[2][2], "eta1*eta2", [0, 1, 0, 0, 0])
    assert_series(w1.odd[2][1], "eta1", [0, -1, 0, 0, 0])
    assert_series(w1.odd[2][2], "eta2", [0, 0, -1, 0, 0])
    # first component: 1 - t^3 eta1 eta2 wp(u2) wp(z1)
    assert_series(w1.even[1][0], "1", [1, 0, 0, 0, 0])
    assert_series(w1.even[1][2], "eta1*eta2", [0, 0, 0, -wu2, 0])
    # omega2 has the same shape with the components exchanged (eta1 eta2 is not reordered)
    assert_series(w2.even[1][2], "1", [0, 0, 1, 0, 0])
    assert_series(w2.even[1][2], "eta1*eta2", [0, 1, 0, 0, 0])
    assert_series(w2.even[2][2], "eta1*eta2", [0, 0, 0, -wu1, 0])
    # nothing else below t^5
    for w, keep in ((w1, {("e", 1, 0), ("e", 2, 2), ("e", 1, 2), ("o", 2, 1), ("o", 2, 2), ("o", 1, 1),
                          ("o", 1, 2)}),):
        for tag, table in (("e", w.even), ("o", w.odd)):
            for i in (1, 2):
                for n, c in table[i].items():
                    if (tag, i, n) not in keep:
                        assert np.max(np.abs(c.data[..., :5])) < 1e-12


def test_super_basis_unglued_limit(plus):
    _, (w1, _) = plus
    for table in (w1.even, w1.odd):
        for i in (1, 2):
            for n, c in table[i].items():
                lead = c.data[..., 0]
                assert np.all(lead == 0) or (table is w1.even and (i, n) == (1, 0))


def test_super_solver_rejects_wrong_mode():
    with pytest.raises(StructureError):
        solve_super_basis(GluingData(T1, T2, 3, "minus_minus"))
    with pytest.raises(StructureError):
        solve_minus_minus_basis(GluingData(T1, T2, 3, "plus_plus"))
    with pytest.raises(StructureError):
        solve_odd_section(GluingData(T1, T2, 3, "minus_minus"))
    with pytest.raises(StructureError):
        GluingData(T1, T2, 3, "ramond")


def test_parity_and_divisibility(plus):
    _, ws = plus
    for w in ws:
        for i in (1, 2):
            for n, c in w.even[i].items():
                assert c.parity in ("even", "zero")
                if n != 0:
                    assert np.all(c.data[..., 0] == 0)
            for n, c in w.odd[i].items():
                assert c.parity in ("odd", "zero")
                assert np.all(c.data[..., 0] == 0)


def _z2(c):
    return c.scale_var(-1).map_generators({"eta1": -1})


def test_z2_equivariance(plus):
    # (t, eta1) -> (-t, -eta1) preserves the node chart only together with theta1 -> -theta1,
    # so component-1 odd coefficients change sign and every other coefficient is invariant
    _, ws = plus
    for w in ws:
        for i in (1, 2):
            for c in w.even[i].values():
                assert np.allclose(_z2(c).data, c.data, atol=1e-12)
            sign = -1 if i == 1 else 1
            for c in w.odd[i].values():
                assert np.allclose(_z2(c).data, sign * c.data, atol=1e-12)


def test_truncation_consistency():
    # solutions at different truncation orders agree where both are defined
    lo, hi = GluingData(T1, T2, 4, "plus_plus"), GluingData(T1, T2, 7, "plus_plus")
    a, b = solve_super_basis(lo), solve_super_basis(hi)
    for wa, wb in zip(a, b):
        for ta, tb in ((wa.even, wb.even), (wa.odd, wb.odd)):
            for i in (1, 2):
                for n, c in ta[i].items():
                    assert np.allclose(c.data, tb[i][n].data[..., :5], atol=1e-12)


def _t_from_q(block, N):
    out = np.zeros((N + 1,) + block.shape[1:], dtype=complex)
    for k in range(block.shape[0]):
        if 2 * k <= N:
            out[2 * k] += (-1) ** k * block[k]
    return out


def _tmul(a, b, N):
    out = np.zeros_like(b)
    for i in range(N + 1):
        out[i:] += a[i] * b[: N + 1 - i]
    return out


@pytest.mark.parametrize("mode", ["plus_plus", "minus_minus"])
def test_even_reduction(mode):
    # eta = 0 bodies lie in the span of the classical basis with q = -t^2
    N = 5
    data = GluingData(T1, T2, N, mode)
    ws = solve_super_basis(data) if mode == "plus_plus" else solve_minus_minus_basis(data)
    c1, c2, _ = solve_even_basis(T1, T2, N)
    P = data.P
    for w in ws:
        a, b = w.V[1].data[0][:, P], w.V[2].data[0][:, P]
        for i in (1, 2):
            pred = _tmul(a, _t_from_q(c1.V[i].data[0], N), N) + _tmul(b, _t_from_q(c2.V[i].data[0], N), N)
            assert np.max(np.abs(pred - w.V[i].data[0])) < 1e-10


def test_odd_section(plus):
    data, _ = plus
    s = solve_odd_section(data, 1)
    e_b1 = data.ctx2.wp(0.5)
    np.testing.assert_allclose(s.inverse_kappa.coeffs, [1, 0, 0, 0, 0, 0, 0])
    # F2 = t^3 kappa2(x2) + O(t^7), only even kappa indices on component 2
    assert set(n for n, c in s.kappa[2].items() if np.any(np.abs(c.coeffs) > 1e-14)) <= {2, 4, 6, 8}
    np.testing.assert_allclose(s.coefficient(2, 2).coeffs, [0, 0, 0, 1, 0, 0, 0], atol=1e-12)
    # F1 = 1/kappa1 + t^4 (wp(beta1)/2) kappa1 + O(t^7)
    c11 = s.coefficient(1, 1).coeffs
    np.testing.assert_allclose(c11[:4], 0, atol=1e-14)
    assert abs(c11[4] - e_b1 / 2) < 1e-10 * abs(e_b1)
    for n in range(2, 8):
        assert np.max(np.abs(s.coefficient(1, n).coeffs[:7])) < 1e-12


def test_odd_section_unglued_limit(plus):
    data, _ = plus
    s = solve_odd_section(data, 2)
    assert s.inverse_kappa.coeffs[0] == 1
    for i in (1, 2):
        for c in s.kappa[i].values():
            assert c.coeffs[0] == 0
    with pytest.raises(ValueError):
        solve_odd_section(data, 3)


def test_minus_minus_module(minus):
    data, (w1, w2) = minus
    for w in (w1, w2):
        r1, r2 = module_constraints(w, data)
        assert r1.max_abs() < 1e-12 and r2.max_abs() < 1e-12
    # normalized first generator: second component polar term eta1/(2 pi i t), 2 pi i t^2 on psi2
    pole = w1.odd[2][0]
    assert pole.low == -1
    assert abs(pole.coeff("eta1", -1) - 1 / TWO_PI_I) < 1e-14
    assert_series(w1.even[2][2], "1", [0, 0, TWO_PI_I])
    assert_series(w1.even[1][1], "1", [1, 0, 0])


@settings(max_examples=5, deadline=None)
@given(taus, taus)
def test_residual_random_moduli(a, b):
    data = GluingData(a, b, 5, "plus_plus")
    for w in solve_super_basis(data):
        assert glue_residual(w, data) <= 1e-10
