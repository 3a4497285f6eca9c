"""Order-by-order solution of the node gluing relations.

Two elliptic (super)curves are glued at their punctures through the chart
``x1 x2 = -t^2`` (classically ``x1 x2 = q``).  A global differential is a pair of
meromorphic differentials on the punctured components whose polar parts are
dictated by the regular part of the other component.  Every solver here runs the
same fixed-point loop: build both components from the current coefficients,
read off the regular parts, recompute the polar targets, solve the triangular
system for the coefficients.  Each pass gains at least one power of the gluing
parameter.

Per component a differential is ``s * (U(x) + theta * V(x))`` (``dx``-multiple
``V`` only in the classical mode).  ``U`` and ``V`` are stored as Laurent windows
in ``x`` whose coefficients are truncated series in ``t`` (or ``q``) over a
Grassmann algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import TWO_PI_I, EllipticContext, LaurentBasis
from .grassmann import DomainError, GrassmannElement, StructureError, TruncatedSeries

MODES = ("even_classical", "plus_plus", "minus_minus")
SUPER_GENERATORS = ("eta1", "eta2")
JET_GENERATORS = ("eta1", "eta2", "etat1", "etat2")


class ConvergenceError(RuntimeError):
    """Fixed-point iteration did not stabilise."""


# -- rings and Laurent windows ---------------------------------------------------


class Ring:
    """Truncated series in one variable over a fixed Grassmann algebra."""

    def __init__(self, generators, order: int, var: str):
        self.generators = tuple(generators)
        self.order = int(order)
        self.var = var

    def zero(self) -> GrassmannElement:
        return GrassmannElement.zero(self.generators, self.order, (self.var,))

    def const(self, value) -> GrassmannElement:
        if isinstance(value, GrassmannElement):
            return value
        return GrassmannElement.scalar(value, self.generators, self.order, (self.var,))

    def gen(self, name: str) -> GrassmannElement:
        return GrassmannElement.generator(name, self.generators, self.order, (self.var,))

    def power(self, k: int, coeff=1.0) -> GrassmannElement:
        """coeff * var**k inside the truncation window (zero beyond it)."""
        z = self.zero()
        if 0 <= k <= self.order:
            d = z.data.copy()
            d[0, k] = coeff
            return z._like(d)
        if k < 0:
            raise DomainError("negative power in a regular ring")
        return z


class XWindow:
    """Laurent window in x with ring-valued coefficients; data[mask, t, x]."""

    __slots__ = ("ring", "P", "M", "data")

    def __init__(self, ring: Ring, P: int, M: int, data=None):
        self.ring, self.P, self.M = ring, P, M
        shape = (1 << len(ring.generators), ring.order + 1, P + M + 1)
        self.data = np.zeros(shape, dtype=complex) if data is None else data

    def add(self, coeff: GrassmannElement, window) -> None:
        """self += coeff * window, with window a list of (lift, TruncatedSeries)."""
        for lift, s in window:
            c = coeff if lift is None else coeff * lift
            if s.low != -self.P or len(s.coeffs) != self.P + self.M + 1:
                raise StructureError("Laurent window shape mismatch")
            self.data += c.data[:, :, None] * s.coeffs[None, None, :]

    def coeff(self, power: int) -> GrassmannElement:
        i = power + self.P
        if not 0 <= i < self.data.shape[2]:
            raise StructureError(f"x-power {power} outside the window")
        return GrassmannElement(self.data[:, :, i], self.ring.generators, (self.ring.var,))

    def regular(self, n: int) -> GrassmannElement:
        return self.coeff(n)


def _plain(s: TruncatedSeries):
    return [(None, s)]


# -- data ------------------------------------------------------------------------


@dataclass(frozen=True)
class GluingData:
    """Inputs of a gluing problem.

    In ``even_classical`` mode the variable is ``q`` and there are no odd
    generators; otherwise the variable is ``t`` and the generators are
    ``eta1, eta2``.  ``tau_jets=True`` (classical mode only) lifts the solve to
    dual numbers ``tau_i -> tau_i + eps_i`` with ``eps_1 = eta1*eta2`` and
    ``eps_2 = etat1*etat2`` so first tau-derivatives come out exactly.
    """

    tau1: complex
    tau2: complex
    N: int
    mode: str = "plus_plus"
    u1: complex = 0.5
    u2: complex = 0.5
    q_terms: int = 64
    tau_jets: bool = False
    ctx1: EllipticContext = field(init=False, repr=False, compare=False)
    ctx2: EllipticContext = field(init=False, repr=False, compare=False)
    lb1: LaurentBasis = field(init=False, repr=False, compare=False)
    lb2: LaurentBasis = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise StructureError(f"unknown mode {self.mode!r}")
        if int(self.N) < 1:
            raise ValueError("truncation N must be >= 1")
        if self.tau_jets and self.mode != "even_classical":
            raise StructureError("tau jets are only supported in even_classical mode")
        P = M = int(self.N) + 2
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "ctx1", EllipticContext(self.tau1, self.q_terms))
        object.__setattr__(self, "ctx2", EllipticContext(self.tau2, self.q_terms))
        object.__setattr__(self, "lb1", LaurentBasis(self.ctx1, self.u1, P, M))
        object.__setattr__(self, "lb2", LaurentBasis(self.ctx2, self.u2, P, M))

    @property
    def P(self) -> int:
        return self.N + 2

    @property
    def M(self) -> int:
        return self.N + 2

    @property
    def var(self) -> str:
        return "q" if self.mode == "even_classical" else "t"

    @property
    def generators(self) -> tuple[str, ...]:
        if self.mode == "even_classical":
            return JET_GENERATORS if self.tau_jets else ()
        return SUPER_GENERATORS

    def ring(self) -> Ring:
        return Ring(self.generators, self.N, self.var)

    def ctx(self, i: int) -> EllipticContext:
        return self.ctx1 if i == 1 else self.ctx2

    def lb(self, i: int) -> LaurentBasis:
        return self.lb1 if i == 1 else self.lb2

    def eps(self, i: int):
        """Dual-number direction attached to tau_i (None without jets)."""
        if not self.tau_jets:
            return None
        r = self.ring()
        return r.gen("eta1") * r.gen("eta2") if i == 1 else r.gen("etat1") * r.gen("etat2")

    def lifted(self, i: int, value, derivative):
        """value + eps_i * derivative as a ring constant (or plain value)."""
        e = self.eps(i)
        if e is None:
            return value
        return self.ring().const(value) + e * derivative


@dataclass
class ComponentDifferential:
    """A global differential: coefficients per component plus node data.

    ``even[i][n]``: even coefficients (``n = 0`` is the coefficient of dz or
    delta(z); ``n >= 2`` multiplies f_n; in minus_minus mode ``even[i][n]``
    multiplies psi_n).  ``odd[i][n]``: odd coefficients (kappa_n in plus_plus,
    f_n and the constant ``n = 0`` in minus_minus).  ``U``/``V`` are the theta^0
    and theta parts as Laurent windows in x; their regular parts are the node
    series phi_i.
    """

    mode: str
    even: dict
    odd: dict
    U: dict
    V: dict
    phi0: GrassmannElement | None = None
    label: str = ""

    def coefficient(self, component: int, family: str, n: int) -> GrassmannElement:
        table = self.even if family == "even" else self.odd
        return table[component][n]

    def regular_series(self, component: int, part: str = "V", upto: int | None = None):
        """Regular part (node series) as a list of ring elements, x^0 .. x^upto."""
        w = (self.V if part == "V" else self.U)[component]
        upto = w.M if upto is None else upto
        return [w.regular(n) for n in range(upto + 1)]


# -- building components from coefficients -------------------------------------


def _eta(data: GluingData, ring: Ring, i: int):
    return ring.gen("eta1" if i == 1 else "eta2")


def _f_window(data: GluingData, i: int, n: int):
    lb = data.lb(i)
    if data.tau_jets:
        return [(None, lb.f(n)), (data.eps(i), lb.f_tau(n))]
    return _plain(lb.f(n))


def _build_classical(data, ring, i, even):
    V = XWindow(ring, data.P, data.M)
    lead = even.get(0)
    if lead is not None:
        V.add(lead, [(None, _unit_window(data.P, data.M))])
    for n, c in even.items():
        if n >= 2 and _nonzero(c):
            V.add(c, _f_window(data, i, n))
    return None, V


def _nonzero(c) -> bool:
    return bool(np.any(c.data))


def _unit_window(P, M):
    c = np.zeros(P + M + 1, dtype=complex)
    c[P] = 1.0
    return TruncatedSeries(c, "z", -P)


def _build_plus_plus(data, ring, i, even, odd):
    lb = data.lb(i)
    eta = _eta(data, ring, i)
    U = XWindow(ring, data.P, data.M)
    V = XWindow(ring, data.P, data.M)
    one = [(None, _unit_window(data.P, data.M))]
    if 0 in even:
        V.add(even[0], one)
        U.add(eta * even[0], one)
    for n, c in even.items():
        if n >= 2 and _nonzero(c):
            V.add(c, _plain(lb.f(n)))
            U.add(eta * c, _plain(lb.f(n)))
    for n, c in odd.items():
        if not _nonzero(c):
            continue
        U.add(c, _plain(lb.kappa(n)))
        V.add(eta * c, _plain(lb.kappa_prime(n)))
    return U, V


def _build_minus_minus(data, ring, i, even, odd):
    lb = data.lb(i)
    eta = _eta(data, ring, i)
    U = XWindow(ring, data.P, data.M)
    V = XWindow(ring, data.P, data.M)
    one = [(None, _unit_window(data.P, data.M))]
    for n, c in odd.items():
        if n == 0 or not _nonzero(c):
            continue  # the constant alpha_0 is Laurent in t; kept out of the window
        U.add(c, _plain(lb.wp_deriv(n - 2)))
        V.add(eta * c, _plain(lb.wp_tau_deriv(n - 2)))
    for n, c in even.items():
        if not _nonzero(c):
            continue
        if n == 1:
            U.add(-(eta * c), _plain(lb.zeta1))
            V.add(c, one)
        elif n == 2:
            U.add(eta * c, _plain(lb.zeta1_tau))
            V.add(c, _plain(lb.zeta1_prime))
        else:
            U.add(eta * c, _plain(lb.wp_tau_deriv(n - 3)))
            V.add(c, _plain(lb.wp_deriv(n - 2)))
    return U, V


def _build(data, ring, i, even, odd):
    if data.mode == "even_classical":
        return _build_classical(data, ring, i, even)
    if data.mode == "plus_plus":
        return _build_plus_plus(data, ring, i, even, odd)
    return _build_minus_minus(data, ring, i, even, odd)


# -- polar targets -----------------------------------------------------------------


def _targets(data, ring, i, U_other, V_other):
    """Polar coefficients of component i forced by the regular part of the other.

    Returns (Ut, Vt): dicts pole order m -> ring element.
    """
    P = data.P
    Ut, Vt = {}, {}
    if data.mode == "even_classical":
        # F_i[-(n+2)] = -q^(n+1) phi_other[n]
        for n in range(P - 1):
            if n + 1 > ring.order:
                break
            Vt[n + 2] = -(V_other.regular(n).times_var(n + 1))
        return Ut, Vt
    sign_u = 1 if i == 1 else -1
    for n in range(P):
        if 2 * n + 1 <= ring.order and n + 1 <= P:
            Ut[n + 1] = U_other.regular(n).times_var(2 * n + 1) * (sign_u * (-1) ** n)
        if 2 * n + 2 <= ring.order and n + 2 <= P:
            Vt[n + 2] = V_other.regular(n).times_var(2 * n + 2) * ((-1) ** n)
    return Ut, Vt


# -- per-mode coefficient solves -------------------------------------------------


def _solve_classical(data, ring, i, Ut, Vt, lead):
    even = {0: lead} if lead is not None else {}
    for m, v in Vt.items():
        even[m] = v
    return even, {}


def _solve_plus_plus(data, ring, i, Ut, Vt, lead):
    eta = _eta(data, ring, i)
    zero = ring.zero()
    even = {0: lead} if lead is not None else {}
    odd = {}
    for m in range(1, data.P + 1):
        if m >= 2:
            a = Vt.get(m, zero) + (eta * odd.get(m - 1, zero)) * (m - 1)
            even[m] = a
        alpha = Ut.get(m, zero) - eta * even.get(m, zero)
        odd[m] = alpha
    return even, odd


def _solve_minus_minus(data, ring, i, Ut, Vt, a1):
    zero = ring.zero()
    even = {1: a1}
    odd = {}
    for m in range(2, data.P + 1):
        odd[m] = Ut.get(m, zero) * (1.0 / ((-1) ** m * math.factorial(m - 1)))
    even[2] = Vt.get(2, zero) * TWO_PI_I
    for m in range(3, data.P + 1):
        even[m] = Vt.get(m, zero) * (1.0 / ((-1) ** m * math.factorial(m - 1)))
    return even, odd


def _fixed_point(data: GluingData, leads: dict, label: str = "") -> ComponentDifferential:
    """leads: {1: lead1, 2: lead2} (the fixed free coefficients)."""
    ring = data.ring()
    even = {1: {}, 2: {}}
    odd = {1: {}, 2: {}}
    for i in (1, 2):
        if data.mode == "minus_minus":
            even[i] = {1: leads[i]}
        elif leads.get(i) is not None:
            even[i] = {0: leads[i]}
    prev = None
    for _ in range(ring.order + 3):
        UV = {i: _build(data, ring, i, even[i], odd[i]) for i in (1, 2)}
        for i in (1, 2):
            j = 3 - i
            Ut, Vt = _targets(data, ring, i, UV[j][0], UV[j][1])
            if data.mode == "even_classical":
                even[i], odd[i] = _solve_classical(data, ring, i, Ut, Vt, leads.get(i))
            elif data.mode == "plus_plus":
                even[i], odd[i] = _solve_plus_plus(data, ring, i, Ut, Vt, leads.get(i))
            else:
                even[i], odd[i] = _solve_minus_minus(data, ring, i, Ut, Vt, leads[i])
        snap = _snapshot(even, odd)
        if prev is not None and np.array_equal(snap, prev):
            break
        prev = snap
    else:
        raise ConvergenceError("gluing iteration did not stabilise")
    UV = {i: _build(data, ring, i, even[i], odd[i]) for i in (1, 2)}
    diff = ComponentDifferential(data.mode, even, odd, {i: UV[i][0] for i in (1, 2)},
                                 {i: UV[i][1] for i in (1, 2)}, label=label)
    if data.mode == "minus_minus":
        _attach_constants(data, ring, diff)
    return diff


def _snapshot(even, odd):
    parts = []
    for table in (even, odd):
        for i in (1, 2):
            for n in sorted(table[i]):
                parts.append(table[i][n].data.ravel())
    return np.concatenate(parts) if parts else np.zeros(0)


def _attach_constants(data, ring, diff):
    """Solve the residue constraints for the odd constants alpha_0 (Laurent in t).

    U_1[-1] = t * U_2[0] and U_2[-1] = -t * U_1[0]; the constant term of each
    U_j contains alpha_0 of component j plus the constants of the other terms.
    """
    for i in (1, 2):
        j = 3 - i
        res_i = diff.U[i].coeff(-1)
        sign = 1 if i == 1 else -1
        target = (res_i * sign).shift(-1)  # division by t
        other_const = diff.U[j].regular(0)
        diff.odd[j][0] = target - other_const


# -- public solvers ----------------------------------------------------------------


def solve_even_basis(tau1, tau2, N: int, q_terms: int = 64, tau_jets: bool = False):
    """Classical normalized-at-the-node basis (omega1, omega2) as q-series."""
    data = GluingData(tau1, tau2, N, "even_classical", q_terms=q_terms, tau_jets=tau_jets)
    r = data.ring()
    w1 = _fixed_point(data, {1: r.const(1.0), 2: None}, "omega1")
    w2 = _fixed_point(data, {1: None, 2: r.const(1.0)}, "omega2")
    return w1, w2, data


def solve_super_basis(data: GluingData):
    """Basis of global differentials near the (+,+) boundary."""
    if data.mode != "plus_plus":
        raise StructureError("solve_super_basis needs plus_plus mode")
    r = data.ring()
    w1 = _fixed_point(data, {1: r.const(1.0), 2: None}, "omega1")
    w2 = _fixed_point(data, {1: None, 2: r.const(1.0)}, "omega2")
    return w1, w2


def solve_minus_minus_basis(data: GluingData):
    """Generators with (a, b) = (1, 0) and (0, 1) near the (-,-) boundary.

    ``a``/``b`` are the coefficients of s_i psi_1 on each component; the odd
    constants alpha_0 then carry the simple pole in t.
    """
    if data.mode != "minus_minus":
        raise StructureError("solve_minus_minus_basis needs minus_minus mode")
    r = data.ring()
    w1 = _fixed_point(data, {1: r.const(1.0), 2: r.zero()}, "omega1")
    w2 = _fixed_point(data, {1: r.zero(), 2: r.const(1.0)}, "omega2")
    return w1, w2


def module_constraints(diff: ComponentDifferential, data: GluingData):
    """Residuals of t*alpha = -eta2 b/(2 pi i) and t*beta = eta1 a/(2 pi i) at leading order.

    Returns the two differences as Laurent elements; they vanish up to the
    corrections carried by the constant terms of the other basis functions.
    """
    ring = data.ring()
    a, b = diff.even[1][1], diff.even[2][1]
    alpha, beta = diff.odd[1][0], diff.odd[2][0]
    e1, e2 = ring.gen("eta1"), ring.gen("eta2")
    r1 = alpha.shift(1) + e2 * b * (1 / TWO_PI_I)
    r2 = beta.shift(1) - e1 * a * (1 / TWO_PI_I)
    return r1, r2


# -- residual -------------------------------------------------------------------


def glue_residual(diff: ComponentDifferential, data: GluingData) -> float:
    """Largest violated coefficient of the gluing relations.

    Rebuilds both components from the stored coefficients, takes their regular
    parts as the node series and compares every polar coefficient with what the
    relations force.
    """
    ring = data.ring()
    UV = {i: _build(data, ring, i, diff.even[i], diff.odd[i]) for i in (1, 2)}
    worst = 0.0
    for i in (1, 2):
        j = 3 - i
        U, V = UV[i]
        Ut, Vt = _targets(data, ring, i, UV[j][0], UV[j][1])
        for m in range(1, data.P + 1):
            if data.mode != "minus_minus" or m >= 2:
                if U is not None:
                    worst = max(worst, (U.coeff(-m) - Ut.get(m, ring.zero())).max_abs())
            if V is not None:
                worst = max(worst, (V.coeff(-m) - Vt.get(m, ring.zero())).max_abs())
        if data.mode == "minus_minus":
            # residue relation with the Laurent constants included
            sign = 1 if i == 1 else -1
            const_j = UV[j][0].regular(0) + diff.odd[j].get(0, ring.zero())
            lhs = U.coeff(-1)
            rhs = (const_j * sign).shift(1)
            worst = max(worst, _common_diff(lhs, rhs))
    return worst


def _common_diff(a: GrassmannElement, b: GrassmannElement) -> float:
    lo = min(a.low, b.low)
    hi = min(a.low + a.order, b.low + b.order)
    worst = 0.0
    for p in range(lo, hi + 1):
        for m in range(1 << len(a.generators)):
            worst = max(worst, abs(a.coeff(m, p) - b.coeff(m, p)))
    return worst


def perturbed(diff: ComponentDifferential, component: int, family: str, n: int,
              amount: float = 1e-3) -> ComponentDifferential:
    """Copy of diff with one coefficient shifted by amount (body constant term)."""
    even = {i: dict(diff.even[i]) for i in (1, 2)}
    odd = {i: dict(diff.odd[i]) for i in (1, 2)}
    table = even if family == "even" else odd
    c = table[component][n]
    d = c.data.copy()
    if family == "even":
        d[(0,) * d.ndim] += amount
    else:
        # odd coefficients live on odd monomials: bump the first generator's slot
        d[(1,) + (0,) * (d.ndim - 1)] += amount
    table[component][n] = c._like(d)
    return ComponentDifferential(diff.mode, even, odd, diff.U, diff.V, diff.phi0, diff.label)


# -- odd sections ----------------------------------------------------------------


@dataclass
class OddSection:
    """Odd rational function (F1 theta1, F2 theta2) with a simple pole at one spin point.

    ``inverse_kappa``: coefficient of 1/kappa_1 on the pole component;
    ``kappa[i][n]``: coefficient of kappa_n(x_i).
    """

    pole_component: int
    inverse_kappa: TruncatedSeries
    kappa: dict
    F: dict

    def coefficient(self, component: int, n: int) -> TruncatedSeries:
        return self.kappa[component].get(n, _zero_like(self.inverse_kappa))


def _zero_like(s):
    return TruncatedSeries(np.zeros_like(s.coeffs), s.var, s.low)


def solve_odd_section(data: GluingData, pole_component: int = 1) -> OddSection:
    """Odd function with only a simple pole at the spin point of one component.

    Solves F1 = phi1(x1) + (t/x1) phi2(-t^2/x1), F2 = phi2(x2) - (t/x2) phi1(-t^2/x2)
    on the reduced base (no odd moduli).
    """
    if data.mode != "plus_plus":
        raise StructureError("solve_odd_section needs plus_plus mode")
    if pole_component not in (1, 2):
        raise ValueError("pole_component must be 1 or 2")
    ring = Ring((), data.N, "t")
    P, M = data.P, data.M
    inv_k1 = {}
    for i in (1, 2):
        lb = data.lb(i)
        k1 = lb._kappa1_internal()
        inv = k1.inv()
        inv_k1[i] = lb._window(inv)
    coeffs = {1: {}, 2: {}}
    lead = ring.const(1.0)
    prev = None
    for _ in range(ring.order + 3):
        F = {}
        for i in (1, 2):
            w = XWindow(ring, P, M)
            if i == pole_component:
                w.add(lead, _plain(inv_k1[i]))
            for n, c in coeffs[i].items():
                if _nonzero(c):
                    w.add(c, _plain(data.lb(i).kappa(n)))
            F[i] = w
        new = {1: {}, 2: {}}
        for i in (1, 2):
            j = 3 - i
            sign = 1 if i == 1 else -1
            for n in range(P):
                if 2 * n + 1 <= ring.order:
                    new[i][n + 1] = F[j].regular(n).times_var(2 * n + 1) * (sign * (-1) ** n)
        snap = _snapshot(new, {1: {}, 2: {}})
        coeffs = new
        if prev is not None and np.array_equal(snap, prev):
            break
        prev = snap
    else:
        raise ConvergenceError("odd section iteration did not stabilise")
    to_series = lambda g: TruncatedSeries(g.data[0], "t", 0)
    kappa = {i: {n: to_series(c) for n, c in coeffs[i].items() if c.max_abs() > 0} for i in (1, 2)}
    Fw = {}
    for i in (1, 2):
        w = XWindow(ring, P, M)
        if i == pole_component:
            w.add(lead, _plain(inv_k1[i]))
        for n, c in coeffs[i].items():
            if _nonzero(c):
                w.add(c, _plain(data.lb(i).kappa(n)))
        Fw[i] = w
    return OddSection(pole_component, to_series(lead), kappa, Fw)


__all__ = [
    "MODES", "ConvergenceError", "Ring", "XWindow", "GluingData", "ComponentDifferential",
    "OddSection", "solve_even_basis", "solve_super_basis", "solve_odd_section",
    "solve_minus_minus_basis", "module_constraints", "glue_residual", "perturbed",
]
