"""Hyperelliptic picture of genus-2 degenerations and Mumford-form densities.

Branch points of the glued curve come from differentials with double zeros at
the points of order two; densities are evaluated as scalars against explicit
tangent vectors, so SL2 covariance can be checked numerically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import EllipticContext, PoleError
from .gluing import GluingData, solve_even_basis, solve_odd_section
from .grassmann import DomainError, GrassmannElement, TruncatedSeries

SPINS = (1, 2, 3)


# -- configurations ----------------------------------------------------------------


@dataclass
class BranchConfig:
    """Six affine ramification points split 3+3 by an even spin structure."""

    u: tuple
    v: tuple
    provenance: dict = field(default_factory=lambda: {"kind": "direct"})

    def __post_init__(self):
        self.u = tuple(complex(x) for x in self.u)
        self.v = tuple(complex(x) for x in self.v)
        if len(self.u) != 3 or len(self.v) != 3:
            raise ValueError("a genus-2 configuration needs 3 + 3 points")

    @property
    def points(self) -> tuple:
        return self.u + self.v

    def check_distinct(self, tol: float = 0.0) -> None:
        pts = self.points
        names = ["u1", "u2", "u3", "v1", "v2", "v3"]
        for i, j in itertools.combinations(range(6), 2):
            if abs(pts[i] - pts[j]) <= tol:
                raise PoleError(f"coincident branch points {names[i]} and {names[j]}")

    def mobius(self, p, r, s, w) -> "BranchConfig":
        f = lambda x: (p * x + r) / (s * x + w)
        return BranchConfig([f(x) for x in self.u], [f(x) for x in self.v],
                            {"kind": "mobius", "of": self.provenance})


def _odd_f_value(ctx: EllipticContext, n: int, taylor) -> complex:
    """f_n at a point of order two (odd derivatives of wp vanish there)."""
    val = (-1) ** n * taylor[n - 2] / (n - 1)
    if n % 2 == 0:
        k = n // 2
        val += -ctx.wp_coefficients(k + 1)[k] / (2 * k - 1) if k >= 2 else 0.0
    return val


def _component_value(diff, data: GluingData, i: int, point: complex) -> GrassmannElement:
    """Value of the i-th component of a classical differential at a point of order two."""
    ctx = data.ctx(i)
    terms = diff.even[i]
    order = max([n for n in terms] + [2])
    taylor = ctx.wp_taylor(point, order)
    acc = None
    for n, c in terms.items():
        if n == 0:
            term = c
        elif n >= 2:
            term = c * _odd_f_value(ctx, n, taylor)
        else:
            continue
        acc = term if acc is None else acc + term
    return acc


def refined_f(tau1, tau2, N: int = 10, q_terms: int = 64):
    """q-series f(alpha_i, tau1) and f(beta_i, tau2) at the three points of order two.

    f is defined by q f omega1 + omega2 vanishing at the point (component 1), and
    omega1 + q f omega2 vanishing (component 2).
    """
    w1, w2, data = solve_even_basis(tau1, tau2, N, q_terms)
    out = {1: [], 2: []}
    for i in (1, 2):
        for pt in data.ctx(i).half_periods:
            o1 = _component_value(w1, data, i, pt)
            o2 = _component_value(w2, data, i, pt)
            if i == 1:
                num, den = -o2, o1
            else:
                num, den = -o1, o2
            num = num.divide_by_var(1, tol=1e-13)
            out[i].append(_series(num * den.inv()))
    return out


def _series(x: GrassmannElement) -> TruncatedSeries:
    return TruncatedSeries(x.data[0], x.vars[0], x.lows[0])


def glued_branch_points(tau1, tau2, q, refine: bool = False, N: int = 10,
                        q_terms: int = 64) -> BranchConfig:
    """a_i = -1/f(alpha_i, tau1), b_i = -q^2 f(beta_i, tau2), partition (a1,b2,b3)|(b1,a2,a3)."""
    q = complex(q)
    c1, c2 = EllipticContext(tau1, q_terms), EllipticContext(tau2, q_terms)
    if refine:
        f = refined_f(tau1, tau2, N, q_terms)
        fa = [s(q) for s in f[1]]
        fb = [s(q) for s in f[2]]
    else:
        fa, fb = list(c1.e), list(c2.e)
    for k, x in enumerate(fa):
        if x == 0:
            raise DomainError(f"wp(alpha_{k + 1}, tau1) = 0 is excluded")
    a = [-1 / x for x in fa]
    b = [-q * q * x for x in fb]
    prov = {"kind": "glued", "tau1": complex(tau1), "tau2": complex(tau2), "q": q,
            "refine": refine, "a": a, "b": b}
    return BranchConfig((a[0], b[1], b[2]), (b[0], a[1], a[2]), prov)


# -- volume contraction --------------------------------------------------------------


def vol_contraction(points, tangents) -> complex:
    """Contraction of de_1 ... de_n with a generator of wedge^3 sl2, evaluated on
    tangent vectors (rows of ``tangents``, n - 3 of them, each of length n)."""
    e = [complex(x) for x in points]
    n = len(e)
    T = np.asarray(tangents, dtype=complex).reshape(n - 3, n)
    total = 0j
    for a, b, c in itertools.combinations(range(n), 3):
        rest = [k for k in range(n) if k not in (a, b, c)]
        sign = (-1) ** ((a + 1) + (b + 1) + (c + 1))
        lead = (e[a] - e[b]) * (e[b] - e[c]) * (e[c] - e[a])
        total += sign * lead * np.linalg.det(T[:, rest]) if len(rest) > 1 else sign * lead * T[0, rest[0]]
    return complex(total)


def _unit_tangents(n: int) -> np.ndarray:
    """Default tangents: coordinate directions of the last n - 3 points."""
    T = np.zeros((n - 3, n), dtype=complex)
    for k in range(n - 3):
        T[k, 3 + k] = 1.0
    return T


# -- genus 1 ------------------------------------------------------------------------


def genus1_mumford_F(u1, u2, v1, v2) -> complex:
    pts = [u1, u2, v1, v2]
    for i, j in itertools.combinations(range(4), 2):
        if pts[i] == pts[j]:
            raise PoleError("coincident branch points")
    prod = 1.0
    for x in (u1, u2):
        for y in (v1, v2):
            prod *= (x - y) ** 2
    return complex(1 / ((u1 - u2) * (v1 - v2) * prod))


def genus1_points(tau, spin: int, q_terms: int = 64):
    """(u1, u2, v1, v2) and their tau-derivatives for x = 1/wp(z), u1 = 0."""
    if spin not in SPINS:
        raise ValueError("spin must be 1, 2 or 3")
    ctx = EllipticContext(tau, q_terms)
    e, de = ctx.e, ctx.e_tau
    for i, j in itertools.combinations(range(3), 2):
        if e[i] == e[j]:
            raise DomainError("e-values collide")
    x = [1 / v for v in e]
    dx = [-d / v ** 2 for v, d in zip(e, de)]
    others = [k for k in range(3) if k != spin - 1]
    order = [spin - 1] + others
    pts = [0j] + [x[k] for k in order]
    dpts = [0j] + [dx[k] for k in order]
    return pts, dpts


def genus1_mumford_coefficient(tau, spin: int, q_terms: int = 64) -> complex:
    """c with F vol^-1 du1 du2 dv1 dv2 = c dtau (trivialization (dx/y)^-6)."""
    pts, dpts = genus1_points(tau, spin, q_terms)
    a = vol_contraction(pts, [dpts])
    return genus1_mumford_F(*pts) * a


def genus1_mumford_coefficient_dz(tau, spin: int, q_terms: int = 64) -> complex:
    """Same coefficient in the trivialization dz^-6.

    With x = 1/wp and y normalized by y^2 = x prod(x - 1/e_i) one has
    dx/y = -sqrt(-g3) dz, so (dx/y)^-6 = (-g3)^-3 dz^-6.
    """
    ctx = EllipticContext(tau, q_terms)
    if abs(ctx.g3) <= 1e-12 * abs(ctx.g2) ** 1.5:
        raise DomainError("g3 = 0: dx/y and dz are not proportional")
    return genus1_mumford_coefficient(tau, spin, q_terms) * (-ctx.g3) ** -3


def genus1_pole_order_fit(xs=(1e-2, 1e-3, 1e-4), re_tau: float = 0.0, q_terms: int = 64) -> dict:
    """Pole order of F in x = |q^(1/2)| as v2 -> v1 (spin 1, so v1 - v2 = 1/e2 - 1/e3).

    F(x) = x^-k G(x^2) by the symmetry q^(1/2) -> -q^(1/2), so the fit model is
    log|F| = -k log x + a + b x^2; with three samples it is solved exactly.
    """
    rows, rhs, limits = [], [], []
    for x in xs:
        tau = complex(re_tau, -math.log(x) / math.pi)
        pts, _ = genus1_points(tau, 1, q_terms)
        F = genus1_mumford_F(*pts)
        limits.append(complex(F * (pts[2] - pts[3])))
        rows.append([-math.log(x), 1.0, x * x])
        rhs.append(math.log(abs(F)))
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    two_point = (rhs[-2] - rhs[-1]) / (math.log(xs[-1]) - math.log(xs[-2]))
    return {"k": float(sol[0]), "a": float(sol[1]), "b": float(sol[2]), "two_point_k": float(two_point),
            "limits": limits, "xs": list(xs)}


# -- genus 2 ------------------------------------------------------------------------


def elementary_symmetric(x):
    a, b, c = x
    return a + b + c, a * b + a * c + b * c, a * b * c


def Q_polynomial(u, v) -> complex:
    c1u, c2u, c3u = elementary_symmetric(u)
    c1v, c2v, c3v = elementary_symmetric(v)
    return complex(3 * c3u - c2u * c1v + c1u * c2v - 3 * c3v)


@dataclass
class MumfordDensity:
    """Scalar parts of the two genus-2 densities.

    ``restricted`` multiplies vol^-1 du dv / (chi1^chi2 (dx/y ^ x dx/y)^5);
    ``pushforward`` multiplies vol^-1 du dv / (dx/y ^ x dx/y)^5 (up to the
    constant c).  Weights give the SL2 covariance S(M e) = K^w S(e), with
    K = prod(s e_i + w), for tangents pushed forward by M.
    """

    vol: complex
    same_pair_product: complex
    cross_product_sq: complex
    Q: complex
    restricted: complex
    pushforward: complex
    lambda_power: int = 5
    trivialization: str = "(dx/y ^ x dx/y)^5, chi1 ^ chi2"
    weights: dict = field(default_factory=lambda: {"restricted": 6, "pushforward": 5})


def genus2_densities(cfg: BranchConfig, tangents=None) -> MumfordDensity:
    cfg.check_distinct()
    u, v = cfg.u, cfg.v
    pts = cfg.points
    T = _unit_tangents(6) if tangents is None else tangents
    vol = vol_contraction(pts, T)
    same = 1.0 + 0j
    for i, j in itertools.combinations(range(3), 2):
        same *= (u[i] - u[j]) * (v[i] - v[j])
    cross = 1.0 + 0j
    for x in u:
        for y in v:
            cross *= (x - y) ** 2
    Q = Q_polynomial(u, v)
    base = vol / (same * cross)
    return MumfordDensity(vol, same, cross, Q, base, Q * base)


def mobius_tangents(cfg: BranchConfig, tangents, p, r, s, w) -> np.ndarray:
    """Push tangent vectors forward by x -> (p x + r)/(s x + w), pw - rs = 1."""
    d = np.array([1 / (s * x + w) ** 2 for x in cfg.points])
    return np.asarray(tangents, dtype=complex) * d[None, :]


def mobius_factor(cfg: BranchConfig, s, w) -> complex:
    return complex(np.prod([s * x + w for x in cfg.points]))


# -- push-forward near the (+,+) boundary ------------------------------------------------


def pushforward_leading(tau1, tau2, q_terms: int = 64) -> dict:
    """A, B, C of the leading term const * q^-2 A/(BC) of the push-forward."""
    c1, c2 = EllipticContext(tau1, q_terms), EllipticContext(tau2, q_terms)
    e, de = c1.e, c1.e_tau
    p, dp = c2.e, c2.e_tau
    first = 0j
    for k in range(3):
        i, j = [m for m in range(3) if m != k]
        first += (-1) ** ((i + 1) + (j + 1)) * (e[j] - e[i]) * de[k]
    second = 0j
    for k in range(3):
        i, j = [m for m in range(3) if m != k]
        second += (-1) ** (k + 1) * (p[i] * dp[j] - p[j] * dp[i])
    A = 2 * first * second
    B = (e[1] - e[2]) * (p[2] - p[1])
    C = (e[0] - e[1]) ** 2 * (e[0] - e[2]) ** 2 * (p[0] - p[1]) ** 2 * (p[0] - p[2]) ** 2
    if B == 0 or C == 0:
        raise DomainError("e-value collision: B or C vanishes")
    return {"A": A, "B": B, "C": C, "a": A / (B * C), "g3_1": c1.g3}


def branch_point_volume(tau1, tau2, q, N: int = 10, h: float = 1e-5) -> complex:
    """vol^-1 da1 da2 da3 db1 db2 db3 on (d/dtau1, d/dtau2, d/dq) by central differences
    of the refined branch points, in the order (a1, a2, a3, b1, b2, b3)."""

    def pts(t1, t2, qq):
        cfg = glued_branch_points(t1, t2, qq, refine=True, N=N)
        return np.array(cfg.provenance["a"] + cfg.provenance["b"])

    base = (complex(tau1), complex(tau2), complex(q))
    T = []
    for k, step in enumerate((h, h, h * abs(q))):
        plus, minus = list(base), list(base)
        plus[k] += step
        minus[k] -= step
        T.append((pts(*plus) - pts(*minus)) / (2 * step))
    return vol_contraction(pts(*base), np.array(T))


# -- polar term of the measure -----------------------------------------------------------


def measure_polar_term(tau1, taut1, tau2, taut2, spins=(1, 1), spins_t=(1, 1), h0=None,
                       q_terms: int = 64) -> dict:
    """Leading polar coefficient t t~ mu11 at t = t~ = 0, factorized and not.

    The conjugate sector is holomorphic in tau~: c~(tau~) = conj(c(conj tau~)).
    ``h0`` (if given, e.g. from the h-expansion) is used in the unfactorized form.
    """
    d1, d2 = taut1 - tau1, taut2 - tau2
    if d1 == 0 or d2 == 0:
        raise DomainError("conjugate-sector moduli collide with the holomorphic ones")
    c1 = genus1_mumford_coefficient_dz(tau1, spins[0], q_terms)
    c2 = genus1_mumford_coefficient_dz(tau2, spins[1], q_terms)
    ct1 = np.conj(genus1_mumford_coefficient_dz(np.conj(taut1), spins_t[0], q_terms))
    ct2 = np.conj(genus1_mumford_coefficient_dz(np.conj(taut2), spins_t[1], q_terms))
    h1, h2 = 1 / d1, 1 / d2
    factorized = -40 * math.pi ** 2 * h1 ** 6 * h2 ** 6 * (c1 * c2) * (ct1 * ct2)
    h0v = h1 * h2 if h0 is None else h0
    unfactorized = -40 * math.pi ** 2 * h0v ** 6 * (c1 * c2) * (ct1 * ct2)
    return {"factorized": complex(factorized), "unfactorized": complex(unfactorized),
            "c": complex(c1 * c2), "c_conj_sector": complex(ct1 * ct2), "h0": complex(h0v)}


# -- chi basis near the (+,+) boundary -------------------------------------------------------


def _t_expansion(section, i: int, data: GluingData) -> dict:
    """{t-power: z-window} for the i-th component F_i of an odd section."""
    lb = data.lb(i)
    out = {}
    for n, coef in section.kappa[i].items():
        for p, c in enumerate(coef.coeffs):
            if c != 0:
                out[p] = out.get(p, 0) + lb.kappa(n) * c
    if i == section.pole_component:
        out[0] = out.get(0, 0) + _inv_kappa1(lb)
    return out


def _inv_kappa1(lb):
    return lb._window(lb._kappa1_internal().inv())


def chi_basis_limit(tau1, tau2, N: int = 6, branch: int = 1) -> dict:
    """Leading (t^0, t^1) coefficients of chi1 and t chi2 on both components.

    chi1 = (x - a1) s dx/y and t chi2 = t (x - b1) s' dx/y, with
    s = t wp(alpha1)^(1/2) c^(1/2) s1, s' = -t^-2 (-wp(alpha2) wp(alpha3))^(-1/2) c^(1/2) s2
    and dx/y = c omega2, c = q^-1 sqrt(-g3(tau1)).  c^(3/2) carries the phase
    ``phase = -branch * i`` (phase^2 = -1), which is returned separately; the
    windows are the rest.  ``K`` holds the two scalar prefactors of the basis.
    """
    data = GluingData(tau1, tau2, N, "plus_plus")
    ctx1, ctx2 = data.ctx1, data.ctx2
    g3 = ctx1.g3
    if g3 == 0:
        raise DomainError("g3(tau1) = 0: chi basis is singular on this locus")
    e1, e2, e3 = ctx1.e
    eb1 = ctx2.e[0]
    lb1, lb2 = data.lb1, data.lb2
    root = lambda x: np.sqrt(complex(x))
    K1 = root(e1) ** -1 * (-g3) ** 0.75
    K2 = root(-e2 * e3) ** -1 * (-g3) ** 0.75
    s1 = solve_odd_section(data, 1)
    s2 = solve_odd_section(data, 2)
    wp1, wp2 = lb1.wp, lb2.wp
    one = _const_window(lb2, 1.0)
    pre1 = root(e1) * (-g3) ** 0.75
    pre2 = -K2
    # x on each component (leading orders), omega2 components as {t-power: window}
    inv_wp1 = _window_inv(wp1)
    x_minus_a1 = {1: {0: -inv_wp1 + 1 / e1}, 2: {0: _const_window(lb2, 1 / e1), 4: -wp2}}
    x_minus_b1 = {1: {0: -inv_wp1}, 2: {4: -(wp2 - eb1 * one)}}
    omega2 = {1: {2: wp1}, 2: {0: _const_window(lb2, 1.0)}}
    out = {}
    for name, sec, xm, pre, tpow in (("chi1", s1, x_minus_a1, pre1, -2), ("tchi2", s2, x_minus_b1, pre2, -4)):
        comps = {}
        for i in (1, 2):
            F = _t_expansion(sec, i, data)
            prod = _mul_t(_mul_t(xm[i], F), omega2[i])
            comps[i] = {p + tpow: w * pre for p, w in prod.items() if p + tpow <= 1}
        out[name] = comps
    out["phase"] = -branch * 1j
    out["regular"] = all(p >= 0 for name in ("chi1", "tchi2") for i in (1, 2)
                         for p, w in out[name][i].items() if np.max(np.abs(w.coeffs)) > 1e-12)
    out["K"] = (K1, K2)
    out["e"] = (e1, e2, e3)
    out["g3"] = g3
    out["wp"] = (wp1, wp2)
    out["e_b1"] = eb1
    return out


def chi_square_check(tau1, tau2, N: int = 6) -> dict:
    """Compare phase^2 chi^2 with the branch-free right-hand sides at t = 0.

    On component 1, (x - a1)(x - b2)(x - b3)(c omega2)^3 -> -(-g3)^(3/2) (wp - e1)/e1;
    on component 2, t^2 (x - b1)(x - a2)(x - a3)(c omega2)^3 -> (-g3)^(3/2) (wp - e_b1)/(e2 e3).
    Returns the largest relative coefficient mismatch over the known z-range of each.
    """
    r = chi_basis_limit(tau1, tau2, N)
    e1, e2, e3 = r["e"]
    wp1, wp2 = r["wp"]
    s = (-r["g3"]) ** 1.5
    ph2 = r["phase"] ** 2
    checks = {
        "chi1": (r["chi1"][1][0], (wp1 - _const_window_like(wp1, e1)) * (-s / e1)),
        "tchi2": (r["tchi2"][2][0], (wp2 - _const_window_like(wp2, r["e_b1"])) * (s / (e2 * e3))),
    }
    out = {}
    for name, (w, rhs) in checks.items():
        lhs = _window_mul(w, w) * ph2
        c, d = lhs.coeffs, rhs.coeffs
        # trailing zeros of w are truncation, so w^2 is exact only through
        # (last nonzero power of w) + (leading power of w)
        nz = np.nonzero(np.abs(w.coeffs) > 0)[0]
        last = w.low + int(nz[-1]) if len(nz) else w.low
        upto = last + _lead(w) - lhs.low + 1
        scale = max(np.max(np.abs(d[:upto])), 1e-300)
        out[name] = {"residual": float(np.max(np.abs(c[:upto] - d[:upto])) / scale),
                     "coefficients": int(np.count_nonzero(np.abs(d[:upto]) > 0))}
    return out


def _const_window_like(w, value):
    c = np.zeros(len(w.coeffs), dtype=complex)
    c[-w.low] = value
    return TruncatedSeries(c, w.var, w.low)


def _window_inv(w: TruncatedSeries) -> TruncatedSeries:
    """1/w on the same z-window as w (powers past the known range are zero)."""
    c = w.coeffs
    k = int(np.nonzero(np.abs(c) > 0)[0][0])
    inv = TruncatedSeries(c[k:], w.var, w.low + k).inv()
    out = np.zeros(len(c), dtype=complex)
    for m, v in enumerate(inv.coeffs):
        p = inv.low + m - w.low
        if 0 <= p < len(c):
            out[p] = v
    return TruncatedSeries(out, w.var, w.low)


def _lead(w) -> int:
    nz = np.nonzero(np.abs(w.coeffs) > 0)[0]
    return w.low + int(nz[0]) if len(nz) else w.low + len(w.coeffs)


def _const_window(lb, value):
    w = lb.wp * 0
    c = np.array(w.coeffs)
    c[lb.P] = value
    return TruncatedSeries(c, "z", w.low)


def _mul_t(a: dict, b: dict) -> dict:
    out = {}
    for p, x in a.items():
        for r, y in b.items():
            out[p + r] = out.get(p + r, 0) + _window_mul(x, y)
    return out


def _window_mul(x, y):
    """Product of two z-windows kept on the first one's window."""
    low, n = x.low, len(x.coeffs)
    full = np.convolve(x.coeffs, y.coeffs)
    plow = x.low + y.low
    c = np.zeros(n, dtype=complex)
    for k, v in enumerate(full):
        p = plow + k
        if low <= p < low + n:
            c[p - low] = v
    lost = [v for k, v in enumerate(full) if plow + k < low and v != 0]
    if lost and max(abs(v) for v in lost) > 1e-12:
        raise DomainError("pole order exceeds the Laurent window")
    # powers beyond the smaller known range are not exact
    lx, ly = _lead(x), _lead(y)
    known = min(x.low + n - 1 + ly, y.low + len(y.coeffs) - 1 + lx)
    c[max(0, known - low + 1):] = 0
    return TruncatedSeries(c, "z", low)


__all__ = [
    "SPINS", "BranchConfig", "MumfordDensity", "glued_branch_points", "refined_f", "vol_contraction",
    "genus1_mumford_F", "genus1_points", "genus1_mumford_coefficient", "genus1_mumford_coefficient_dz",
    "elementary_symmetric", "Q_polynomial", "genus2_densities", "mobius_tangents", "mobius_factor",
    "pushforward_leading", "branch_point_volume", "measure_polar_term", "chi_basis_limit",
    "chi_square_check", "genus1_pole_order_fit",
]
