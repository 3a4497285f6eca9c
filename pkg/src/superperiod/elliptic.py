"""Weierstrass functions for the lattice Z + Z tau via q-expansions.

Conventions: q = exp(2 pi i tau), zeta(z + 1) = zeta(z) + eta1 and
zeta(z + tau) = zeta(z) + eta2 with tau*eta1 - eta2 = 2 pi i.  The constant
``A = (2 pi i)^2 E2 / 12 = -eta1`` is the alpha-period of wp(z) dz.
Derivatives in tau are taken at fixed z.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .grassmann import DomainError, StructureError, TruncatedSeries

TWO_PI_I = 2j * np.pi


class PoleError(DomainError):
    """Evaluation at a lattice point."""


def _lambert(q: complex, power: int, terms: int) -> complex:
    n = np.arange(1, terms + 1, dtype=float)
    qn = q ** n
    return complex(np.sum(n ** power * qn / (1 - qn)))


def _terms_needed(q: complex, cap: int) -> int:
    aq = abs(q)
    if aq == 0:
        return 1
    need = int(math.ceil(0.5 + 40.0 / -math.log(aq))) + 2
    return max(1, min(cap, need))


def eisenstein_E2(q: complex, terms: int = 64) -> complex:
    if abs(q) >= 1:
        raise DomainError("|q| must be < 1")
    return 1 - 24 * _lambert(q, 1, _terms_needed(q, terms))


def period_constant_A(tau: complex, terms: int = 64) -> complex:
    """A(tau) = (2 pi i)^2 E2(q) / 12."""
    return TWO_PI_I ** 2 * eisenstein_E2(np.exp(TWO_PI_I * tau), terms) / 12


class EllipticContext:
    """Modular data and Weierstrass functions at one tau (immutable)."""

    def __init__(self, tau: complex, q_terms: int = 64):
        tau = complex(tau)
        if tau.imag <= 0:
            raise DomainError("Im tau must be positive")
        self.tau = tau
        self.q = complex(np.exp(TWO_PI_I * tau))
        self.q_terms = int(q_terms)
        self._K = _terms_needed(self.q, self.q_terms)
        K = self._K
        self.E2 = 1 - 24 * _lambert(self.q, 1, K)
        self.E4 = 1 + 240 * _lambert(self.q, 3, K)
        self.E6 = 1 - 504 * _lambert(self.q, 5, K)
        self.g2 = (4 * np.pi ** 4 / 3) * self.E4
        self.g3 = (8 * np.pi ** 6 / 27) * self.E6
        self.eta1 = -TWO_PI_I ** 2 * self.E2 / 12
        self.eta2 = self.tau * self.eta1 - TWO_PI_I
        self.A = -self.eta1
        # tau-derivatives from the Ramanujan system
        self.dE2 = TWO_PI_I * (self.E2 ** 2 - self.E4) / 12
        self.dE4 = TWO_PI_I * (self.E2 * self.E4 - self.E6) / 3
        self.dE6 = TWO_PI_I * (self.E2 * self.E6 - self.E4 ** 2) / 2
        self.dg2 = (4 * np.pi ** 4 / 3) * self.dE4
        self.dg3 = (8 * np.pi ** 6 / 27) * self.dE6
        self.deta1 = -TWO_PI_I ** 2 * self.dE2 / 12
        self.dA = -self.deta1

    def __repr__(self):
        return f"EllipticContext(tau={self.tau})"

    # half periods --------------------------------------------------------------

    @property
    def half_periods(self) -> tuple[complex, complex, complex]:
        return (0.5 + 0j, self.tau / 2, (1 + self.tau) / 2)

    @cached_property
    def e(self) -> tuple[complex, complex, complex]:
        return tuple(self.wp(w) for w in self.half_periods)

    @cached_property
    def e_tau(self) -> tuple[complex, complex, complex]:
        return tuple(self.wp_tau(w) for w in self.half_periods)

    @property
    def e1(self):
        return self.e[0]

    @property
    def e2(self):
        return self.e[1]

    @property
    def e3(self):
        return self.e[2]

    @cached_property
    def lam(self) -> complex:
        e1, e2, e3 = self.e
        return (e3 - e2) / (e1 - e2)

    @cached_property
    def lam_tau(self) -> complex:
        e1, e2, e3 = self.e
        d1, d2, d3 = self.e_tau
        return ((d3 - d2) * (e1 - e2) - (e3 - e2) * (d1 - d2)) / (e1 - e2) ** 2

    # q-series kernels ----------------------------------------------------------

    def _reduce(self, z: complex):
        z = complex(z)
        n = round(z.imag / self.tau.imag)
        z1 = z - n * self.tau
        m = round(z1.real)
        return z1 - m, m, n

    def _parts(self, z0: complex):
        w = np.exp(TWO_PI_I * z0)
        if abs(1 - w) < 1e-300:
            raise PoleError("z is a lattice point")
        n = np.arange(1, self._K + 1, dtype=float)
        qn = self.q ** n
        return w, n, qn, qn * w, qn / w

    def wp(self, z: complex) -> complex:
        z0, _, _ = self._reduce(z)
        w, n, Q, X, Y = self._parts(z0)
        s = 1 / 12 + w / (1 - w) ** 2 + np.sum(X / (1 - X) ** 2 + Y / (1 - Y) ** 2 - 2 * Q / (1 - Q) ** 2)
        return complex(TWO_PI_I ** 2 * s)

    def wp_prime(self, z: complex) -> complex:
        z0, _, _ = self._reduce(z)
        w, n, Q, X, Y = self._parts(z0)
        s = w * (1 + w) / (1 - w) ** 3 + np.sum(X * (1 + X) / (1 - X) ** 3 - Y * (1 + Y) / (1 - Y) ** 3)
        return complex(TWO_PI_I ** 3 * s)

    def zeta(self, z: complex) -> complex:
        z0, m, k = self._reduce(z)
        w, n, Q, X, Y = self._parts(z0)
        s = self.eta1 * z0 + 1j * np.pi * (w + 1) / (w - 1) - TWO_PI_I * np.sum(X / (1 - X) - Y / (1 - Y))
        return complex(s + m * self.eta1 + k * self.eta2)

    def zeta1(self, z: complex) -> complex:
        """(-2 pi i)^-1 (zeta(z) - eta1 z): periodic under 1, shifts by 1 under tau."""
        return (self.zeta(z) - self.eta1 * complex(z)) / (-TWO_PI_I)

    def h(self, u: complex, z: complex) -> complex:
        """h_u(z) = zeta(z) - zeta(z - u) - zeta(u)."""
        return self.zeta(z) - self.zeta(complex(z) - u) - self.zeta(u)

    def wp_tau(self, z: complex) -> complex:
        """d/dtau wp(z, tau) at fixed z."""
        z0, _, k = self._reduce(z)
        w, n, Q, X, Y = self._parts(z0)
        s = np.sum(n * (X * (1 + X) / (1 - X) ** 3 + Y * (1 + Y) / (1 - Y) ** 3
                        - 2 * Q * (1 + Q) / (1 - Q) ** 3))
        val = complex(TWO_PI_I ** 3 * s)
        if k:
            val -= k * self.wp_prime(z0)
        return val

    # Laurent data --------------------------------------------------------------

    def wp_coefficients(self, count: int) -> np.ndarray:
        """c[n] for n < count with wp = z^-2 + sum_{n>=2} c[n] z^(2n-2)."""
        c = np.zeros(max(count, 4), dtype=complex)
        c[2] = self.g2 / 20
        c[3] = self.g3 / 28
        for n in range(4, len(c)):
            c[n] = 3 / ((2 * n + 1) * (n - 3)) * sum(c[m] * c[n - m] for m in range(2, n - 1))
        return c[:count] if count >= 4 else c[:count]

    def wp_coefficients_tau(self, count: int) -> np.ndarray:
        c = self.wp_coefficients(max(count, 4))
        d = np.zeros(len(c), dtype=complex)
        d[2] = self.dg2 / 20
        d[3] = self.dg3 / 28
        for n in range(4, len(c)):
            d[n] = 3 / ((2 * n + 1) * (n - 3)) * sum(
                d[m] * c[n - m] + c[m] * d[n - m] for m in range(2, n - 1))
        return d[:count]

    def wp_taylor(self, u: complex, order: int) -> np.ndarray:
        """Taylor coefficients p_j of wp(u + w) in w, via wp'' = 6 wp^2 - g2/2."""
        p = np.zeros(order + 1, dtype=complex)
        p[0] = self.wp(u)
        if order >= 1:
            p[1] = self.wp_prime(u)
        for j in range(order - 1):
            acc = 6 * sum(p[i] * p[j - i] for i in range(j + 1))
            if j == 0:
                acc -= self.g2 / 2
            p[j + 2] = acc / ((j + 2) * (j + 1))
        return p


def _laurent_from_pairs(power_coeff: dict, low: int, high: int, var: str = "z") -> TruncatedSeries:
    c = np.zeros(high - low + 1, dtype=complex)
    for p, v in power_coeff.items():
        if low <= p <= high:
            c[p - low] = v
    return TruncatedSeries(c, var, low)


class LaurentBasis:
    """Laurent windows around z = 0 (degrees -P .. M) for one spin point u.

    Holds wp and its derivatives, the basis functions f_n, the kappa_n,
    h_u, zeta1 and their tau-derivatives.  Every window is a
    TruncatedSeries in ``z`` with ``low = -P`` and order ``P + M``.
    """

    def __init__(self, ctx: EllipticContext, u: complex = 0.5, P: int = 8, M: int = 8):
        self.ctx = ctx
        self.u = complex(u)
        self.P = int(P)
        self.M = int(M)
        # internal series length: enough headroom for derivatives and products
        self._L = self.M + 2 * self.P + 8
        self._count = self._L // 2 + 4
        self._c = ctx.wp_coefficients(self._count)
        self._dc = ctx.wp_coefficients_tau(self._count)
        self._cache: dict = {}

    # raw Laurent expansions (dict power -> coefficient) -----------------------

    def _wp_deriv_terms(self, k: int, tau_derivative: bool = False) -> dict:
        c = self._dc if tau_derivative else self._c
        out = {}
        if not tau_derivative:
            out[-2 - k] = (-1) ** k * math.factorial(k + 1)
        for n in range(2, len(c)):
            p = 2 * n - 2
            if p - k < 0:
                continue
            out[p - k] = c[n] * math.perm(p, k)
        return out

    def _series(self, terms: dict, low: int | None = None) -> TruncatedSeries:
        lo = min(terms) if low is None else low
        return _laurent_from_pairs(terms, lo, lo + self._L - 1)

    def _window(self, s: TruncatedSeries) -> TruncatedSeries:
        P, M = self.P, self.M
        if s.low < -P:
            if np.any(np.abs(s.coeffs[: -P - s.low]) > 0):
                raise StructureError(f"pole order {-s.low} exceeds window P={P}")
        known_hi = s.low + len(s.coeffs) - 1
        if known_hi < M:
            raise StructureError("internal Laurent depth too small for window")
        out = np.zeros(P + M + 1, dtype=complex)
        for p in range(-P, M + 1):
            i = p - s.low
            if 0 <= i < len(s.coeffs):
                out[p + P] = s.coeffs[i]
        return TruncatedSeries(out, "z", -P)

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    # public windows --------------------------------------------------------------

    def wp_deriv(self, k: int = 0) -> TruncatedSeries:
        return self._memo(("wp", k), lambda: self._window(self._series(self._wp_deriv_terms(k))))

    def wp_tau_deriv(self, k: int = 0) -> TruncatedSeries:
        return self._memo(("wpt", k), lambda: self._window(
            self._series(self._wp_deriv_terms(k, True), low=0)))

    @property
    def wp(self) -> TruncatedSeries:
        return self.wp_deriv(0)

    def phi_const(self, n: int) -> complex:
        """Cohomology constant of f_n: -(constant term of wp^(n-2)) / (n-1)! for even n."""
        if n % 2 or n < 2:
            return 0j
        k = n // 2
        return complex(-self._c[k] / (2 * k - 1)) if k < len(self._c) else 0j

    def phi_const_tau(self, n: int) -> complex:
        if n % 2 or n < 2:
            return 0j
        k = n // 2
        return complex(-self._dc[k] / (2 * k - 1))

    def f(self, n: int) -> TruncatedSeries:
        """f_n = z^-n + O(z): f_2 = wp, f_(2k+1) = -wp^(2k-1)/(2k)!,
        f_(2k) = wp^(2k-2)/(2k-1)! + phi[2k]."""
        if n < 2:
            raise ValueError("f_n is defined for n >= 2")
        if n > self.P:
            raise StructureError(f"f_{n} needs pole order {n} > window P={self.P}")

        def build():
            d = self.wp_deriv(n - 2)
            sign = -1 if n % 2 else 1
            s = d * (sign / math.factorial(n - 1))
            if n % 2 == 0:
                s = s + _const_window(self.phi_const(n), self.P, self.M)
            return s
        return self._memo(("f", n), build)

    def f_tau(self, n: int) -> TruncatedSeries:
        """d/dtau f_n at fixed z."""
        def build():
            d = self.wp_tau_deriv(n - 2)
            sign = -1 if n % 2 else 1
            s = d * (sign / math.factorial(n - 1))
            if n % 2 == 0:
                s = s + _const_window(self.phi_const_tau(n), self.P, self.M)
            return s
        return self._memo(("ft", n), build)

    def _zeta_terms(self) -> dict:
        out = {-1: 1.0}
        for n in range(2, len(self._c)):
            out[2 * n - 1] = -self._c[n] / (2 * n - 1)
        return out

    @property
    def zeta1(self) -> TruncatedSeries:
        def build():
            t = self._zeta_terms()
            t[1] = t.get(1, 0) - self.ctx.eta1
            return self._window(self._series({k: v / (-TWO_PI_I) for k, v in t.items()}))
        return self._memo("zeta1", build)

    @property
    def zeta1_prime(self) -> TruncatedSeries:
        return self._memo("zeta1p", lambda: (self.wp + _const_window(self.ctx.eta1, self.P, self.M))
                          * (1 / TWO_PI_I))

    @property
    def zeta1_tau(self) -> TruncatedSeries:
        def build():
            t = {}
            for n in range(2, len(self._dc)):
                t[2 * n - 1] = -self._dc[n] / (2 * n - 1)
            t[1] = t.get(1, 0) - self.ctx.deta1
            return self._window(self._series({k: v / (-TWO_PI_I) for k, v in t.items()}, low=0))
        return self._memo("zeta1t", build)

    def _h_internal(self) -> TruncatedSeries:
        t = self._zeta_terms()
        p = self.ctx.wp_taylor(self.u, self._L + 2)
        for j in range(self._L):
            t[j + 1] = t.get(j + 1, 0) + (-1) ** j * p[j] / (j + 1)
        return self._series(t, low=-1)

    @property
    def h_u(self) -> TruncatedSeries:
        return self._memo("h", lambda: self._window(self._h_internal()))

    def _kappa1_internal(self) -> TruncatedSeries:
        wp = self._series(self._wp_deriv_terms(0), low=-2)
        e = self.ctx.wp(self.u)
        return (wp - e).sqrt(1)

    def kappa_coefficients(self, n: int) -> dict:
        """Constants c_{n,j} with kappa_n = kappa1 * (f_{n-1} + sum_j c_{n,j} f_j)
        (f_1 := h_u, f_0 := 1) so that kappa_n has polar part exactly z^-n."""
        return self._kappa(n)[1]

    def _f_internal(self, j: int) -> TruncatedSeries:
        if j == 0:
            return self._series({0: 1.0}, low=0)
        if j == 1:
            return self._h_internal()
        d = self._series(self._wp_deriv_terms(j - 2))
        sign = -1 if j % 2 else 1
        s = d * (sign / math.factorial(j - 1))
        if j % 2 == 0:
            s = s + self.phi_const(j)
        return s

    def _kappa(self, n: int):
        key = ("kappa_int", n)
        if key in self._cache:
            return self._cache[key]
        k1 = self._kappa1_internal()
        if n == 1:
            res = (k1, {})
        else:
            inner = self._f_internal(n - 1)
            consts = {}
            for j in range(n - 2, -1, -1):
                prod = k1 * inner
                # remove the pole of order j + 1 using kappa1 * f_j = z^-(j+1) + ...
                c = -prod.coeff("1", -(j + 1))
                if c != 0:
                    consts[j] = c
                    inner = inner + self._f_internal(j) * c
            res = (k1 * inner, consts)
        self._cache[key] = res
        return res

    def kappa(self, n: int) -> TruncatedSeries:
        if n < 1:
            raise ValueError("kappa_n is defined for n >= 1")
        if n > self.P:
            raise StructureError(f"kappa_{n} needs pole order {n} > window P={self.P}")
        return self._memo(("kappa", n), lambda: self._window(self._kappa(n)[0]))

    def kappa_prime(self, n: int) -> TruncatedSeries:
        return self._memo(("kappap", n), lambda: self._window(self._kappa(n)[0].derivative()))


def _const_window(value, P, M) -> TruncatedSeries:
    c = np.zeros(P + M + 1, dtype=complex)
    c[P] = value
    return TruncatedSeries(c, "z", -P)


# functional API ------------------------------------------------------------------

def wp_laurent(ctx: EllipticContext, max_deg: int) -> TruncatedSeries:
    """wp(z) = z^-2 + sum c z^(2k) through degree max_deg."""
    if max_deg < 2:
        raise ValueError("max_deg must be >= 2")
    c = ctx.wp_coefficients(max_deg // 2 + 2)
    terms = {-2: 1.0}
    for n in range(2, len(c)):
        if 2 * n - 2 <= max_deg:
            terms[2 * n - 2] = c[n]
    return _laurent_from_pairs(terms, -2, max_deg)


def wp_eval(ctx: EllipticContext, z) -> complex:
    return ctx.wp(z)


def wp_prime_eval(ctx: EllipticContext, z) -> complex:
    return ctx.wp_prime(z)


def zeta1_eval(ctx: EllipticContext, z) -> complex:
    return ctx.zeta1(z)


def h_u_eval(ctx: EllipticContext, u, z) -> complex:
    return ctx.h(u, z)


def wp_tau_derivative(ctx: EllipticContext, z) -> complex:
    return ctx.wp_tau(z)


def e_i_tau_derivative(ctx: EllipticContext, i: int) -> complex:
    return ctx.e_tau[i - 1]


def kappa_basis(lb: LaurentBasis, n: int) -> TruncatedSeries:
    return lb.kappa(n)


def cohomology_constant(lb: LaurentBasis, n: int) -> complex:
    return lb.phi_const(n)


__all__ = [
    "TWO_PI_I", "PoleError", "EllipticContext", "LaurentBasis", "eisenstein_E2",
    "period_constant_A", "wp_laurent", "wp_eval", "wp_prime_eval", "zeta1_eval", "h_u_eval",
    "wp_tau_derivative", "e_i_tau_derivative", "kappa_basis", "cohomology_constant",
]
