import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from superperiod.elliptic import (TWO_PI_I, EllipticContext, LaurentBasis, PoleError, cohomology_constant,
                                  e_i_tau_derivative, eisenstein_E2, h_u_eval, kappa_basis,
                                  period_constant_A, wp_eval, wp_laurent, wp_tau_derivative)
from superperiod.grassmann import DomainError

taus = st.builds(complex, st.floats(-0.5, 0.5), st.floats(0.5, 3.0))
points = st.builds(complex, st.floats(0.05, 0.95), st.floats(0.05, 0.45))


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


@settings(max_examples=25, deadline=None)
@given(taus, points)
def test_wp_and_zeta_match_theta_oracle(tau, x):
    ctx = EllipticContext(tau)
    z = x.real + x.imag * tau
    assert rel(ctx.wp(z), oracles.wp(z, tau)) < 1e-11
    assert rel(ctx.zeta(z), oracles.zeta(z, tau)) < 1e-11


@settings(max_examples=10, deadline=None)
@given(taus)
def test_legendre_relation_from_independent_zeta(tau):
    # eta2 from the quasi-period of the oracle zeta, not from the context
    z = 0.23 + 0.11j
    e1 = oracles.eta1(tau)
    e2 = oracles.zeta(z + tau, tau) - oracles.zeta(z, tau)
    assert abs(tau * e1 - e2 - TWO_PI_I) < 1e-12
    ctx = EllipticContext(tau)
    assert abs(ctx.eta1 - e1) < 1e-12 * abs(e1)
    assert abs(ctx.tau * ctx.eta1 - ctx.eta2 - TWO_PI_I) < 1e-12


@settings(max_examples=10, deadline=None)
@given(taus)
def test_half_period_identities(tau):
    ctx = EllipticContext(tau)
    e = ctx.e
    ref = oracles.half_period_values(tau)
    for a, b in zip(e, ref):
        assert rel(a, b) < 1e-11
    assert abs(sum(e)) < 1e-10
    assert rel(4 * e[0] * e[1] * e[2], ctx.g3) < 1e-12
    assert rel(-4 * (e[0] * e[1] + e[0] * e[2] + e[1] * e[2]), ctx.g2) < 1e-12


@settings(max_examples=10, deadline=None)
@given(taus, points)
def test_h_square_and_parity(tau, x):
    ctx = EllipticContext(tau)
    z = x.real + x.imag * tau
    e1, e2, e3 = ctx.e
    w = ctx.wp(z)
    assert rel(ctx.h(0.5, z) ** 2, (w - e2) * (w - e3) / (w - e1)) < 1e-10
    u = 0.31 + 0.17 * tau
    assert rel(ctx.h(-u, -z), -ctx.h(u, z)) < 1e-12
    assert ctx.h(u, z) == h_u_eval(ctx, u, z)


def test_wp_laurent_normalization_and_ode():
    ctx = EllipticContext(0.1 + 1.2j)
    s = wp_laurent(ctx, 24)
    assert s[-2] == 1 and s[0] == 0 and s[-1] == 0
    assert rel(20 * s[2], ctx.g2) < 1e-12
    assert rel(28 * s[4], ctx.g3) < 1e-12
    assert all(abs(s[p]) == 0 for p in range(-1, 24, 2))
    ds = s.derivative()
    resid = ds * ds - (4 * s * s * s - ctx.g2 * s - ctx.g3)
    # exact through degree max_deg - 4 relative to the z^-6 leading term
    known = [p for p in range(-6, 24 - 8)]
    assert max(abs(resid[p]) for p in known) < 1e-10 * max(abs(ctx.g2), abs(ctx.g3))
    with pytest.raises(ValueError):
        wp_laurent(ctx, 1)


def test_wp_laurent_sums_to_wp():
    ctx = EllipticContext(0.2 + 1.1j)
    s = wp_laurent(ctx, 40)
    z = 0.13 + 0.05j
    assert rel(s(z), ctx.wp(z)) < 1e-12


def test_pole_error_on_lattice():
    ctx = EllipticContext(1.1j)
    with pytest.raises(PoleError):
        wp_eval(ctx, 1 + ctx.tau)


def test_domain_errors():
    with pytest.raises(DomainError):
        EllipticContext(-1j)
    with pytest.raises(DomainError):
        eisenstein_E2(1.0)


def test_eisenstein_limits():
    assert eisenstein_E2(0) == 1
    assert abs(period_constant_A(12j) + math.pi ** 2 / 3) < 1e-12
    ctx = EllipticContext(0.3 + 0.9j)
    assert ctx.A == -ctx.eta1
    assert rel(period_constant_A(ctx.tau), ctx.A) < 1e-15


def test_nodal_limits():
    ctx = EllipticContext(8j)
    assert abs(ctx.e1 - 2 * math.pi ** 2 / 3) < 1e-9
    for z in (0.17 + 0.3j, 0.61 - 0.2j):
        u = cmath.exp(TWO_PI_I * z)
        w0 = (1j * math.pi) ** 2 * (4 * u / (1 - u) ** 2 + 1 / 3)
        assert rel(ctx.wp(z), w0) < 1e-9
        assert rel(ctx.h(0.5, z), 1j * math.pi * 4 * u / (u * u - 1)) < 1e-9


def test_lambda_and_e_gap_leading_coefficient():
    fits, gaps = [], []
    for x in (1e-2, 1e-3):
        ctx = EllipticContext(1j * -math.log(x) / math.pi)
        fits.append(ctx.lam / x)
        gaps.append((ctx.e3 - ctx.e2) / (16 * math.pi ** 2 * x))
    assert abs(fits[-1] - 16) < 0.16
    assert abs(gaps[-1] - 1) < 0.01
    # next order is O(q^(1/2)) relative, so the error shrinks by 10 per decade
    assert abs(fits[1] - 16) < abs(fits[0] - 16) / 5


def test_tau_derivatives_against_finite_differences():
    tau, h = 0.15 + 1.05j, 1e-5
    cp, cm, c = EllipticContext(tau + h), EllipticContext(tau - h), EllipticContext(tau)
    z = 0.37 + 0.21j
    fd = (cp.wp(z) - cm.wp(z)) / (2 * h)
    assert rel(wp_tau_derivative(c, z), fd) < 1e-6
    fd_lam = (cp.lam - cm.lam) / (2 * h)
    assert abs(c.lam_tau - fd_lam) / abs(fd_lam) < 1e-6
    for i in (1, 2, 3):
        fd_e = (cp.e[i - 1] - cm.e[i - 1]) / (2 * h)
        assert rel(e_i_tau_derivative(c, i), fd_e) < 1e-6
    assert abs(sum(c.e_tau)) < 1e-9


def test_kappa_leading_terms_and_identities():
    ctx = EllipticContext(0.2 + 1.3j)
    lb = LaurentBasis(ctx, 0.5, 8, 8)
    wu = ctx.wp(0.5)
    k1, k2, k3 = (kappa_basis(lb, n) for n in (1, 2, 3))
    assert k1[-1] == 1 and rel(k1[1], -wu / 2) < 1e-12 and abs(k1[0]) < 1e-15
    assert k2[-2] == 1 and rel(k2[0], wu / 2) < 1e-12
    # kappa1^2 = wp - wp(u), kappa2 = kappa1 h_u; a shallow pole window keeps products long
    sh = LaurentBasis(ctx, 0.5, 2, 14)
    a1 = sh.kappa(1)
    sq = a1 * a1
    target = sh.wp - wu
    assert max(abs(sq[p] - target[p]) for p in range(-2, 11)) < 1e-10
    prod = a1 * sh.h_u
    assert max(abs(prod[p] - sh.kappa(2)[p]) for p in range(-2, 11)) < 1e-10
    # kappa3 - kappa1 f2 keeps at most a simple pole and is odd
    r = k3 - k1 * lb.f(2)
    assert max(abs(r[p]) for p in range(-8, -1)) < 1e-10
    for n, k in ((1, k1), (2, k2), (3, k3), (4, kappa_basis(lb, 4))):
        assert k[-n] == 1
        assert max((abs(k[p]) for p in range(-n + 1, 0)), default=0.0) < 1e-10
        assert max(abs(k[p]) for p in range(-8, 9) if (p + n) % 2) < 1e-10


def test_f_basis_normalization():
    lb = LaurentBasis(EllipticContext(0.05 + 1.4j), 0.5, 8, 8)
    for n in range(2, 7):
        f = lb.f(n)
        assert f[-n] == 1
        assert max(abs(f[p]) for p in range(-n + 1, 1)) < 1e-12


def test_cohomology_constants():
    assert cohomology_constant(LaurentBasis(EllipticContext(1.2j)), 2) == 0
    # nodal oracle: wp0 = pi^2/sin^2(pi z) - pi^2/3, so wp'' has constant term 2 pi^4/15
    lb0 = LaurentBasis(EllipticContext(12j))
    assert rel(cohomology_constant(lb0, 4), -math.pi ** 4 / 45) < 1e-12
    lb = LaurentBasis(EllipticContext(0.3 + 1.1j))
    assert rel(cohomology_constant(lb, 4), -lb.ctx.g2 / 60) < 1e-12
