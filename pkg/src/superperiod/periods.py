"""Cohomology classes, period matrices and their boundary expansions.

Conventions: ``P_alpha[i][j]`` is the alpha_i-period of the j-th basis
differential, ``M = P_alpha^-1`` is the transition to the normalized basis and
``Omega = P_beta M``.  Entries are GrassmannElements in ``t`` (``q`` in the
classical case); ``Omega = Omega0 + Omega1 * eta1*eta2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import TWO_PI_I
from .gluing import (GluingData, Ring, solve_even_basis, solve_minus_minus_basis,
                     solve_super_basis)
from .grassmann import (GENERATOR_ORDER, DomainError, GrassmannElement, StructureError,
                        SuperMatrix, TruncatedSeries, berezinian, det2, mat_inv, mat_mul, pairing)


@dataclass
class CohomologyClass:
    """Coefficients of a class on the basis (e1, f1, e2, f2)."""

    e1: GrassmannElement
    f1: GrassmannElement
    e2: GrassmannElement
    f2: GrassmannElement

    def e(self, i: int):
        return self.e1 if i == 1 else self.e2

    def f(self, i: int):
        return self.f1 if i == 1 else self.f2


@dataclass
class SuperPeriodMatrix:
    """Symmetric 2x2 period matrix with its normalization data."""

    Omega: list
    M: list
    P_alpha: list
    A1: object
    A2: object
    tau1: complex
    tau2: complex
    trivialization: str = "omega1^omega2"

    def entry(self, i: int, j: int) -> GrassmannElement:
        return self.Omega[i - 1][j - 1]

    def component(self, monomial: str) -> list:
        return [[x.component(monomial) for x in row] for row in self.Omega]

    @property
    def Omega0(self) -> list:
        return self.component("1")

    @property
    def Omega1(self) -> list:
        return self.component("eta1*eta2")

    def is_symmetric(self, tol: float = 0.0) -> bool:
        return (self.Omega[0][1] - self.Omega[1][0]).max_abs() <= tol

    def im_positive_definite(self, t_value: float) -> bool:
        """Im Omega0 at a real sample of the gluing parameter."""
        m = np.array([[complex(x(t_value)) for x in row] for row in self.Omega0])
        return bool(np.all(np.linalg.eigvalsh(m.imag) > 0))


# -- cohomology --------------------------------------------------------------------


def cohomology_project(diff, data: GluingData) -> CohomologyClass:
    """Class of a solved differential on (e1, f1, e2, f2).

    plus_plus / classical: e_i = delta(z_i) (or dz_i), f_i = wp(z_i) e_i; derivatives
    of wp and all kappa terms are exact and f_(2k) contributes its cohomology
    constant to e_i.  minus_minus: the psi-basis classes, using s_i = eta_i f_i.
    """
    if data.mode == "minus_minus":
        return _project_minus_minus(diff, data)
    ring = data.ring()
    out = {}
    for i in (1, 2):
        even = diff.even[i]
        lb = data.lb(i)
        E = even.get(0, ring.zero())
        for n, c in even.items():
            if n >= 4 and n % 2 == 0:
                phi = data.lifted(i, lb.phi_const(n), lb.phi_const_tau(n))
                E = E + c * phi
        F = even.get(2, ring.zero())
        out[f"e{i}"] = E
        out[f"f{i}"] = F
    return CohomologyClass(**out)


def _project_minus_minus(diff, data):
    ring = data.ring()
    out = {}
    for i in (1, 2):
        ctx = data.ctx(i)
        eta = ring.gen("eta1" if i == 1 else "eta2")
        a1 = diff.even[i].get(1, ring.zero())
        a2 = diff.even[i].get(2, ring.zero())
        al0 = diff.odd[i].get(0, ring.zero())
        al2 = diff.odd[i].get(2, ring.zero())
        ea2 = eta * al2
        # s*alpha2*R has periods (eta alpha2) * (-deta1, -(eta1 + tau deta1))
        e = a1 - ea2 * ctx.deta1
        f = eta * al0 - ea2 * (ctx.eta1 + ctx.tau * ctx.deta1) + a1 * ctx.tau + a2
        out[f"e{i}"] = e
        out[f"f{i}"] = f
    return CohomologyClass(**out)


# -- period matrices ---------------------------------------------------------------


def period_matrix(cls1: CohomologyClass, cls2: CohomologyClass, data: GluingData) -> SuperPeriodMatrix:
    """Normalize by the alpha-periods and return the beta-periods.

    alpha(e_i) = 1, beta(e_i) = tau_i, alpha(f_i) = A_i, beta(f_i) = 2 pi i + tau_i A_i.
    """
    if data.mode == "minus_minus":
        raise StructureError("use minus_minus_period_matrix for the (-,-) sector")
    ring = data.ring()
    classes = (cls1, cls2)
    A = {i: data.lifted(i, data.ctx(i).A, data.ctx(i).dA) for i in (1, 2)}
    tau = {i: data.lifted(i, data.ctx(i).tau, 1.0) for i in (1, 2)}
    Pa = [[classes[j].e(i) + classes[j].f(i) * A[i] for j in range(2)] for i in (1, 2)]
    Pb = [[classes[j].e(i) * tau[i] + classes[j].f(i) * (TWO_PI_I + tau[i] * A[i])
           for j in range(2)] for i in (1, 2)]
    M = _inverse(Pa)
    Omega = mat_mul(Pb, M)
    return SuperPeriodMatrix(Omega, M, Pa, A[1], A[2], data.ctx1.tau, data.ctx2.tau)


def _inverse(m):
    try:
        return mat_inv(m)
    except DomainError as e:
        raise DomainError("alpha-period matrix is degenerate") from e


def super_period_matrix(tau1, tau2, N: int, q_terms: int = 64) -> tuple[SuperPeriodMatrix, GluingData]:
    """Superperiod matrix near the (+,+) boundary, as t-series mod t^(N+1)."""
    data = GluingData(tau1, tau2, N, "plus_plus", q_terms=q_terms)
    w1, w2 = solve_super_basis(data)
    return period_matrix(cohomology_project(w1, data), cohomology_project(w2, data), data), data


def even_period_matrix(tau1, tau2, N: int, q_terms: int = 64, tau_jets: bool = False):
    """Classical period matrix as q-series mod q^(N+1)."""
    w1, w2, data = solve_even_basis(tau1, tau2, N, q_terms, tau_jets)
    return period_matrix(cohomology_project(w1, data), cohomology_project(w2, data), data), data


def minus_minus_period_matrix(data: GluingData) -> SuperPeriodMatrix:
    """Superperiod matrix near the (-,-) boundary (Laurent in t)."""
    if data.mode != "minus_minus":
        raise StructureError("minus_minus_period_matrix needs minus_minus mode")
    w1, w2 = solve_minus_minus_basis(data)
    c1, c2 = cohomology_project(w1, data), cohomology_project(w2, data)
    Pa = [[c1.e(i), c2.e(i)] for i in (1, 2)]
    Pb = [[c1.f(i), c2.f(i)] for i in (1, 2)]
    M = _inverse(Pa)
    Omega = mat_mul(Pb, M)
    return SuperPeriodMatrix(Omega, M, Pa, data.ctx1.A, data.ctx2.A, data.ctx1.tau, data.ctx2.tau)


# -- q-series to t-series -------------------------------------------------------------


def q_to_t(x: TruncatedSeries, var: str = "t") -> TruncatedSeries:
    """Substitute q = -t^2 into a q-series."""
    c = x.coeffs
    out = np.zeros(2 * len(c), dtype=complex)
    for k, v in enumerate(c):
        out[2 * k] = v * (-1) ** (k + x.low)
    # q^N known means t^(2N+1) known too (odd powers vanish)
    return TruncatedSeries(out, var, 2 * x.low)


def even_jacobian(tau1, tau2, N_t: int, q_terms: int = 64):
    """Classical Omega0(t) with q = -t^2 and its derivatives in t, tau1, tau2.

    Returns dict keys 'value', 't', 'tau1', 'tau2' -> 2x2 lists of TruncatedSeries
    (indexed [i][j]).  tau-derivatives come from a dual-number lift of the solve.
    """
    Nq = max(1, (N_t + 1) // 2)
    spm, _ = even_period_matrix(tau1, tau2, Nq, q_terms, tau_jets=True)
    out = {"value": [], "t": [], "tau1": [], "tau2": []}
    for i in range(2):
        rows = {k: [] for k in out}
        for j in range(2):
            x = spm.Omega[i][j]
            val = q_to_t(x.component("1"))
            d1 = q_to_t(x.component("eta1*eta2"))
            d2 = q_to_t(x.component("etat1*etat2"))
            rows["value"].append(val)
            rows["t"].append(val.derivative())
            rows["tau1"].append(d1)
            rows["tau2"].append(d2)
        for k in out:
            out[k].append(rows[k])
    return out


# -- canonical projection pullback ------------------------------------------------------


@dataclass
class Pullback:
    """t' = t + f eta1 eta2, tau_i' = tau_i + g_i eta1 eta2 (f, g as t-series)."""

    f: TruncatedSeries
    g1: TruncatedSeries
    g2: TruncatedSeries
    t: GrassmannElement
    tau1: GrassmannElement
    tau2: GrassmannElement


def canonical_projection_pullback(spm: SuperPeriodMatrix, jac: dict, order: int | None = None) -> Pullback:
    """Solve dOmega0/dt f + dOmega0/dtau1 g1 + dOmega0/dtau2 g2 = Omega1.

    Rows (1,1), (1,2), (2,2).  The (1,2) row determines f after division by its
    leading power of t; the diagonal rows determine g1, g2.  Solved by fixed
    point iteration on Laurent windows with absolute truncation at ``order``;
    each division by a leading power t^k costs k orders, so the returned series
    are reported only up to the exponent where they are still exact.
    """
    Om1 = spm.Omega1
    known = min(x.low + len(x.coeffs) - 1 for row in Om1 for x in row)
    known = min(known, min(s.low + len(s.coeffs) - 1 for k in ("t", "tau1", "tau2")
                           for row in jac[k] for s in row))
    N = known if order is None else min(order, known)
    win = _Window(N)
    rhs = {key: win.put(Om1[key[0]][key[1]]) for key in ((0, 0), (0, 1), (1, 1))}
    J = {key: [win.put(jac[k][key[0]][key[1]]) for k in ("t", "tau1", "tau2")] for key in rhs}
    inv12, k12 = win.inverse(J[(0, 1)][0])
    inv11, k11 = win.inverse(J[(0, 0)][1])
    inv22, k22 = win.inverse(J[(1, 1)][2])
    f = g1 = g2 = win.zero()
    for _ in range(4 * (N - win.LO) + 8):
        prev = (f, g1, g2)
        f = win.mul(rhs[(0, 1)] - win.mul(J[(0, 1)][1], g1) - win.mul(J[(0, 1)][2], g2), inv12)
        g1 = win.mul(rhs[(0, 0)] - win.mul(J[(0, 0)][0], f) - win.mul(J[(0, 0)][2], g2), inv11)
        g2 = win.mul(rhs[(1, 1)] - win.mul(J[(1, 1)][0], f) - win.mul(J[(1, 1)][1], g1), inv22)
        if all(np.array_equal(x, y) for x, y in zip(prev, (f, g1, g2))):
            break
    lost = max(k12, k11, k22, 0)
    exact = N - lost
    fs, g1s, g2s = (win.series(x, exact) for x in (f, g1, g2))
    gens = ("eta1", "eta2")

    def lift(base, corr):
        lo = min(corr.low, 0)
        d = np.zeros((4, exact - lo + 1), dtype=complex)
        for p in range(lo, exact + 1):
            d[0, p - lo] = base(p)
            d[3, p - lo] = _safe(corr, p)
        return GrassmannElement(d, gens, ("t",), (lo,))

    return Pullback(fs, g1s, g2s,
                    lift(lambda p: 1.0 if p == 1 else 0.0, fs),
                    lift(lambda p: spm.tau1 if p == 0 else 0.0, g1s),
                    lift(lambda p: spm.tau2 if p == 0 else 0.0, g2s))


class _Window:
    """Laurent coefficients on exponents LO..N, truncated absolutely at N."""

    LO = -8

    def __init__(self, N: int):
        self.N = N
        self.size = N - self.LO + 1

    def zero(self):
        return np.zeros(self.size, dtype=complex)

    def put(self, s: TruncatedSeries):
        out = self.zero()
        for p in range(max(s.low, self.LO), self.N + 1):
            i = p - s.low
            if i < len(s.coeffs):
                out[p - self.LO] = s.coeffs[i]
        if s.low < self.LO and np.any(s.coeffs[: self.LO - s.low]):
            raise DomainError("pole order exceeds the pullback window")
        return out

    def mul(self, a, b):
        full = np.convolve(a, b)
        # index i + j in full corresponds to exponent 2*LO + i + j
        out = self.zero()
        for p in range(self.LO, self.N + 1):
            k = p - 2 * self.LO
            if 0 <= k < len(full):
                out[p - self.LO] = full[k]
        lo_full = np.nonzero(np.abs(full[: max(0, -self.LO)]) > 0)[0]
        if len(lo_full):
            raise DomainError("pole order exceeds the pullback window")
        return out

    def inverse(self, a):
        """Inverse of a Laurent window and the leading exponent k of a."""
        nz = np.nonzero(np.abs(a) > 0)[0]
        if not len(nz):
            raise DomainError("Jacobian entry vanishes identically")
        k = nz[0] + self.LO
        c = a[nz[0]:]
        n = self.N - self.LO + 1
        inv = np.zeros(n, dtype=complex)
        inv[0] = 1 / c[0]
        for m in range(1, n):
            acc = sum(c[j] * inv[m - j] for j in range(1, min(m, len(c) - 1) + 1))
            inv[m] = -acc / c[0]
        out = self.zero()
        for m in range(n):
            p = m - k
            if self.LO <= p <= self.N:
                out[p - self.LO] = inv[m]
        return out, k

    def series(self, a, upto: int) -> TruncatedSeries:
        nz = np.nonzero(np.abs(a) > 0)[0]
        lo = min(nz[0] + self.LO, 0) if len(nz) else 0
        return TruncatedSeries(a[lo - self.LO: upto - self.LO + 1], "t", lo)


def _safe(s, p):
    i = p - s.low
    if 0 <= i < len(s.coeffs):
        return s.coeffs[i]
    return 0j


# -- h-expansion --------------------------------------------------------------------


def conjugate_sector(spm: SuperPeriodMatrix, var: str = "tt") -> SuperPeriodMatrix:
    """Conjugate-sector copy: X~(tau~) = conj(X(conj tau~)) with eta -> eta~.

    ``spm`` must have been computed at conj(tau~).
    """
    ren = {"eta1": "etat1", "eta2": "etat2"}

    def conv(x):
        if not isinstance(x, GrassmannElement):
            return np.conj(x)
        gens = tuple(ren.get(g, g) for g in x.generators)
        return GrassmannElement(np.conj(x.data), gens, (var,), x.lows)

    mat = lambda m: [[conv(x) for x in row] for row in m]
    return SuperPeriodMatrix(mat(spm.Omega), mat(spm.M), mat(spm.P_alpha), conv(spm.A1),
                             conv(spm.A2), np.conj(spm.tau1), np.conj(spm.tau2))


def embed(x: GrassmannElement, vars_=("t", "tt"), generators=GENERATOR_ORDER,
          orders: tuple[int, int] | None = None) -> GrassmannElement:
    """Embed a univariate element into the bivariate 4-generator algebra."""
    x = x.lift(generators)
    v = x.vars[0]
    axis = vars_.index(v)
    n = x.data.shape[1]
    orders = orders or (n - 1, n - 1)
    shape = (x.data.shape[0], orders[0] + 1, orders[1] + 1)
    d = np.zeros(shape, dtype=complex)
    m = min(n, shape[axis + 1])
    if axis == 0:
        d[:, :m, 0] = x.data[:, :m]
    else:
        d[:, 0, :m] = x.data[:, :m]
    lows = [0, 0]
    lows[axis] = x.lows[0]
    return GrassmannElement(d, generators, vars_, lows)


@dataclass
class HExpansion:
    """Components of h = det(Omega~ - Omega)^-1 det(M) det(M~) in (t, t~)."""

    h: GrassmannElement
    h0: GrassmannElement
    h1: GrassmannElement
    ht1: GrassmannElement
    h11: GrassmannElement
    d: GrassmannElement
    a: GrassmannElement
    at: GrassmannElement
    b: GrassmannElement
    m0: GrassmannElement
    m1: GrassmannElement
    mt0: GrassmannElement
    mt1: GrassmannElement
    formula: dict


def _comp(x: GrassmannElement, monomial: str) -> GrassmannElement:
    """Coefficient of a Grassmann monomial as a generator-free bivariate element."""
    return x.component(monomial)


def h_expansion(spm: SuperPeriodMatrix, spm_t: SuperPeriodMatrix, N: int) -> HExpansion:
    """Direct 4-generator computation plus the component formulas.

    ``spm_t`` is the conjugate-sector matrix (generators etat1, etat2, variable tt).
    """
    orders = (N, N)
    emb = lambda x: embed(x, orders=orders)
    Om = [[emb(x) for x in row] for row in spm.Omega]
    Omt = [[emb(x) for x in row] for row in spm_t.Omega]
    M = [[emb(x) for x in row] for row in spm.M]
    Mt = [[emb(x) for x in row] for row in spm_t.M]
    diff = [[Omt[i][j] - Om[i][j] for j in range(2)] for i in range(2)]
    D = det2(diff)
    if abs(D.data[(0,) * D.data.ndim]) == 0:
        raise DomainError("tau~ collides with tau: det(Omega~ - Omega) has no constant term")
    h = D.inv() * det2(M) * det2(Mt)
    h0, h1 = _comp(h, "1"), _comp(h, "eta1*eta2")
    ht1, h11 = _comp(h, "etat1*etat2"), _comp(h, "eta1*eta2*etat1*etat2")
    # component formulas
    O0 = [[_comp(x, "1") for x in row] for row in Om]
    O1 = [[_comp(x, "eta1*eta2") for x in row] for row in Om]
    Ot0 = [[_comp(x, "1") for x in row] for row in Omt]
    Ot1 = [[_comp(x, "etat1*etat2") for x in row] for row in Omt]
    d0 = [[Ot0[i][j] - O0[i][j] for j in range(2)] for i in range(2)]
    d = det2(d0)
    ta = pairing(d0, Ot1)          # = t~ a
    t_at = -pairing(d0, O1)        # = t a~
    ttb = pairing(Ot1, O1)         # = t t~ b
    M0 = [[_comp(x, "1") for x in row] for row in M]
    M1 = [[_comp(x, "eta1*eta2") for x in row] for row in M]
    Mt0 = [[_comp(x, "1") for x in row] for row in Mt]
    Mt1 = [[_comp(x, "etat1*etat2") for x in row] for row in Mt]
    m0, mt0 = det2(M0), det2(Mt0)
    t3m1, tt3mt1 = pairing(M0, M1), pairing(Mt0, Mt1)
    di = d.inv()
    f_h0 = di * m0 * mt0
    f_h1 = -(di * di * t_at * m0 * mt0) + di * t3m1 * mt0
    f_ht1 = -(di * di * ta * m0 * mt0) + di * tt3mt1 * m0
    f_h11 = ((di * di * ttb + di * di * di * ta * t_at * 2) * m0 * mt0
             - di * di * t_at * m0 * tt3mt1 - di * di * ta * mt0 * t3m1 + di * t3m1 * tt3mt1)
    formula = {"h0": f_h0, "h1": f_h1, "ht1": f_ht1, "h11": f_h11}
    return HExpansion(h, h0, h1, ht1, h11, d, ta, t_at, ttb, m0, t3m1, mt0, tt3mt1, formula)


def h_identity_ratio(hx: HExpansion) -> tuple[complex, complex]:
    """(h0^4 h11/(t t~), -8 pi^2 h0^6) at t = t~ = 0."""
    h0 = hx.h0.data[0, 0, 0]
    h11_tt = hx.h11.data[0, 1, 1]
    return h0 ** 4 * h11_tt, -8 * np.pi ** 2 * h0 ** 6


# -- theta_Lambda Berezinian ---------------------------------------------------------------


def _odd_const(ring: Ring, eta_name: str, value) -> GrassmannElement:
    return ring.gen(eta_name) * value


def closed_form_theta_matrix(data: GluingData, fill=0.0) -> SuperMatrix:
    """The 5x5 matrix of (i, sigma) in the bases (v1, v2, v | phi1, phi2) in closed form
    modulo t^3; ``fill`` is used for the unspecified entries."""
    ring = data.ring()
    one, zero = ring.const(1.0), ring.zero()
    inv_t = ring.const(1.0).shift(-1)
    e1, e2 = ring.gen("eta1"), ring.gen("eta2")
    star_even = ring.const(fill)
    star_odd = (e1 + e2) * fill
    rows = [
        [one, zero, star_even, zero, zero],
        [zero, one, star_even, zero, zero],
        [zero, zero, one, zero, zero],
        [(e1 * (1 / TWO_PI_I)).shift(-1), zero, star_odd, -inv_t, zero],
        [zero, -(e2 * (1 / TWO_PI_I)).shift(-1), star_odd, zero, inv_t],
    ]
    return SuperMatrix(rows, 3)


def solver_theta_matrix(data: GluingData) -> SuperMatrix:
    """Same matrix assembled from the solved (-,-) basis.

    Columns 1, 2: the normalized differentials in the coordinates (coefficient of
    s1 psi1, of s2 psi1, phi0, of s2, of s1); column 3: sigma of the even element
    of C0, whose odd entries cancel the residue parts of p(v); columns 4, 5:
    sigma(s_i/(x_i - u_i)) = -phi1/t and phi2/t.
    """
    if data.mode != "minus_minus":
        raise StructureError("theta_lambda_berezinian needs minus_minus mode")
    ring = data.ring()
    w1, w2 = solve_minus_minus_basis(data)
    c1, c2 = cohomology_project(w1, data), cohomology_project(w2, data)
    M = _inverse([[c1.e(i), c2.e(i)] for i in (1, 2)])
    raw = (w1, w2)

    def coord(fn, k):
        acc = None
        for j in range(2):
            term = fn(raw[j]) * M[j][k]
            acc = term if acc is None else acc + term
        return acc

    zero, one = ring.zero(), ring.const(1.0)
    cols = []
    for k in range(2):
        cols.append([
            coord(lambda w: w.even[1][1], k),
            coord(lambda w: w.even[2][1], k),
            coord(lambda w: ring.zero() if w.phi0 is None else ring.const(w.phi0), k),
            coord(lambda w: w.odd[2][0], k),
            coord(lambda w: w.odd[1][0], k),
        ])
    e1, e2 = ring.gen("eta1"), ring.gen("eta2")
    ctx1, ctx2 = data.ctx1, data.ctx2
    t = ring.power(1)
    r1 = e1 * ctx1.zeta1(data.u1) + e2 * t * ((ctx2.wp(data.u2) - ctx2.eta1) / TWO_PI_I)
    r2 = e2 * ctx2.zeta1(data.u2) - e1 * t * ((ctx1.wp(data.u1) - ctx1.eta1) / TWO_PI_I)
    # p(v) carries -r1 s1/(x1-u1) + r2 s2/(x2-u2); p(phi1) = -t s1/.., p(phi2) = t s2/..
    c_phi1 = (-r1).shift(-1)
    c_phi2 = (-r2).shift(-1)
    cols.append([zero, zero, one, c_phi1, c_phi2])
    inv_t = one.shift(-1)
    cols.append([zero, zero, zero, -inv_t, zero])
    cols.append([zero, zero, zero, zero, inv_t])
    rows = [[cols[c][r] for c in range(5)] for r in range(5)]
    return SuperMatrix(rows, 3)


def theta_lambda_berezinian(data: GluingData, source: str = "solver") -> GrassmannElement:
    """Berezinian of (i, sigma): A + C0 -> B near the (-,-) boundary."""
    if source not in ("solver", "closed_form"):
        raise ValueError(f"unknown theta matrix source {source!r}")
    m = solver_theta_matrix(data) if source == "solver" else closed_form_theta_matrix(data)
    return berezinian(m)


__all__ = [
    "CohomologyClass", "SuperPeriodMatrix", "HExpansion", "Pullback", "cohomology_project",
    "period_matrix", "super_period_matrix", "even_period_matrix", "minus_minus_period_matrix",
    "q_to_t", "even_jacobian", "canonical_projection_pullback", "conjugate_sector", "embed",
    "h_expansion", "h_identity_ratio", "closed_form_theta_matrix", "solver_theta_matrix",
    "theta_lambda_berezinian",
]
