"""Period matrices of hyperelliptic curves by direct quadrature.

y is the single-valued branch of sqrt(prod(x - e_i)) on the plane minus the
cuts, built as a product of per-cut factors (x - p) sqrt((x - q)/(x - p)),
each discontinuous exactly on its own segment.  Loop integrals around a cut
reduce to twice a Gauss-Chebyshev integral along it; paths between branch
points use graded Gauss-Legendre panels with a square-root substitution at
branch endpoints.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import EllipticContext
from .grassmann import DomainError
from .hyperelliptic import BranchConfig


class GeometryError(ValueError):
    """Cuts or paths cross, or a path runs into a branch point."""


class BranchTrackingError(ArithmeticError):
    """Computed periods violate the Riemann bilinear relations."""


@dataclass
class CycleBasis:
    """Cuts (pairs of point indices), alpha loops around the first g cuts, and
    beta paths (waypoint lists from an endpoint of cut i to a point of the last cut)."""

    points: tuple
    cuts: list
    alpha: list
    beta: list
    beta_signs: list = field(default_factory=list)
    beta_shift: np.ndarray | None = None
    fixed: bool = False
    note: str = ""

    @property
    def genus(self) -> int:
        return len(self.alpha)


# -- geometry ------------------------------------------------------------------------


def _segments_cross(p1, p2, p3, p4, tol=1e-14) -> bool:
    """Proper intersection of segments p1p2 and p3p4 (shared endpoints ignored)."""
    for a in (p1, p2):
        for b in (p3, p4):
            if abs(a - b) <= tol * max(1.0, abs(a)):
                return False

    def orient(a, b, c):
        return ((b - a).conjugate() * (c - a)).imag

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return d1 * d2 < 0 and d3 * d4 < 0


def _dist_point_segment(x, a, b) -> float:
    d = b - a
    s = ((x - a) * d.conjugate()).real / max(abs(d) ** 2, 1e-300)
    s = min(1.0, max(0.0, s))
    return abs(x - (a + s * d))


def _path_clear(path, cuts_xy, points, margin) -> bool:
    for a, b in zip(path, path[1:]):
        for p, q in cuts_xy:
            if _segments_cross(a, b, p, q):
                return False
        for x in points:
            if abs(x - a) < 1e-15 or abs(x - b) < 1e-15:
                continue
            if _dist_point_segment(x, a, b) < margin:
                return False
    # overlapping a cut is also a crossing for the branch of y
    for a, b in zip(path, path[1:]):
        for p, q in cuts_xy:
            for s in (0.25, 0.5, 0.75):
                if _dist_point_segment(a + s * (b - a), p, q) < 1e-12 * max(1.0, abs(b - a)):
                    return False
    return True


def _candidate_paths(start, end, scale):
    yield [start, end]
    mid = (start + end) / 2
    n = (end - start) / max(abs(end - start), 1e-300) * 1j
    for f in (0.3, -0.3, 0.6, -0.6, 1.0, -1.0, 1.5, -1.5):
        yield [start, mid + f * abs(end - start) * n, end]
    for f in (0.5, -0.5):
        w1 = start + (end - start) * 0.2 + f * scale * n
        w2 = start + (end - start) * 0.8 + f * scale * n
        yield [start, w1, w2, end]


def find_path(start, end, cuts_xy, points, margin=None):
    scale = max(abs(end - start), 1e-300)
    margin = 0.05 * min(scale, _min_sep(points)) if margin is None else margin
    for path in _candidate_paths(start, end, scale):
        if _path_clear(path, cuts_xy, points, margin):
            return path
    raise GeometryError("no clear path between branch points")


def _min_sep(points):
    return min(abs(a - b) for a, b in itertools.combinations(points, 2))


# -- the branch of y -------------------------------------------------------------------


def y_branch(x, points, cuts, skip=None, offsets=None):
    """prod over cuts of (x - p) sqrt((x - q)/(x - p)), optionally skipping one cut.

    ``offsets`` maps a point index to a precomputed x - point, avoiding
    cancellation when x sits next to that branch point.
    """
    offsets = offsets or {}
    out = np.ones_like(np.asarray(x, dtype=complex))
    for k, (i, j) in enumerate(cuts):
        if k == skip:
            continue
        dp = offsets[i] if i in offsets else x - points[i]
        dq = offsets[j] if j in offsets else x - points[j]
        out = out * dp * np.sqrt(dq / dp)
    return out


# -- quadrature ------------------------------------------------------------------------


def _cheb(n):
    theta = (2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n)
    return (1 - np.cos(theta)) / 2, np.full(n, np.pi / n)


def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def loop_integrals(points, cuts, k, n, powers=(0, 1)):
    """Integrals of x^m dx / y around cut k, m in ``powers``.

    On the left side of p -> q the cut factor is i (q - p) sqrt(s(1 - s)), so the
    loop equals 2 * int_0^1 x^m ds / (i sqrt(s(1 - s)) G(x)) with G the other factors.
    Panels are graded toward the ends and toward nearby branch points.
    """
    i, j = cuts[k]
    p, q = points[i], points[j]
    L = abs(q - p)
    others = [x for m, x in enumerate(points) if m not in (i, j)]
    brk = _panels(min(abs(x - p) for x in others) / L / 4, min(abs(x - q) for x in others) / L / 4)
    for x0 in others:
        sp = ((x0 - p) * (q - p).conjugate()).real / L ** 2
        if 0 < sp < 1 and _dist_point_segment(x0, p, q) < 0.5 * L:
            d = _dist_point_segment(x0, p, q) / L
            h = max(d, 1e-14)
            while h < 0.5:
                brk += [sp - h, sp + h]
                h *= 4
    brk = sorted(b for b in set(brk) if 0 <= b <= 1)
    u, wu = _gl(n)
    total = np.zeros(len(powers), dtype=complex)
    for idx, (s0, s1) in enumerate(zip(brk, brk[1:])):
        h = s1 - s0
        # ds / sqrt(s (1 - s)) with the square-root substitution at the ends
        if idx == 0:
            s = s0 + h * u ** 2
            f = 2 * np.sqrt(h) * wu / np.sqrt(1 - s)
        elif idx == len(brk) - 2:
            s = s1 - h * u ** 2
            f = 2 * np.sqrt(h) * wu / np.sqrt(s)
        else:
            s = s0 + h * u
            f = h * wu / np.sqrt(s * (1 - s))
        x = p + s * (q - p)
        f = f / (1j * y_branch(x, points, cuts, skip=k))
        total += np.array([np.sum(f * x ** m) for m in powers])
    return 2 * total


def _panels(length_ratio_start, length_ratio_end):
    """Graded breakpoints on [0, 1] refining geometrically toward both ends."""
    pts = {0.0, 1.0, 0.5}
    for r, side in ((length_ratio_start, 0), (length_ratio_end, 1)):
        h = max(r, 1e-14)
        while h < 0.5:
            pts.add(h if side == 0 else 1 - h)
            h *= 4
    return sorted(pts)


def path_integrals(points, cuts, path, n, start_branch=True, end_branch=True, powers=(0, 1)):
    """2 * int x^m dx / y along a polyline between two branch points."""
    total = np.zeros(len(powers), dtype=complex)
    pts = list(points)
    for idx, (a, b) in enumerate(zip(path, path[1:])):
        sb = start_branch and idx == 0
        eb = end_branch and idx == len(path) - 2
        L = abs(b - a)
        near_a = min([abs(x - a) for x in pts if abs(x - a) > 1e-15 * max(1, L)] + [L]) / L
        near_b = min([abs(x - b) for x in pts if abs(x - b) > 1e-15 * max(1, L)] + [L]) / L
        brk = _panels(near_a / 4, near_b / 4)
        u, wu = _gl(n)
        for k, (s0, s1) in enumerate(zip(brk, brk[1:])):
            h = s1 - s0
            if sb and k == 0:
                s = s0 + h * u ** 2
                rest = 1 - s
                ds = 2 * h * u * wu
            elif eb and k == len(brk) - 2:
                rest = h * u ** 2  # 1 - s, kept exact
                s = s1 - rest
                ds = 2 * h * u * wu
            else:
                s = s0 + h * u
                rest = 1 - s
                ds = h * wu
            x = a + s * (b - a)
            offs = {}
            for m, pt in enumerate(pts):
                if pt == a:
                    offs[m] = s * (b - a)
                elif pt == b:
                    offs[m] = -rest * (b - a)
            y = y_branch(x, points, cuts, offsets=offs)
            f = (b - a) * ds / y
            total += np.array([np.sum(f * x ** m) for m in powers])
    return 2 * total


# -- cycle bases -------------------------------------------------------------------------


def _cuts_xy(points, cuts):
    return [(points[i], points[j]) for i, j in cuts]


def default_cycles(points, cuts=None) -> CycleBasis:
    """Nearest-neighbour cut pairing (non-crossing), alpha around the first g cuts,
    beta from the second endpoint of cut i to the first endpoint of the last cut."""
    pts = tuple(complex(x) for x in points)
    g = len(pts) // 2 - 1
    if cuts is None:
        cuts = _pair_cuts(pts)
    cx = _cuts_xy(pts, cuts)
    for a, b in itertools.combinations(range(len(cx)), 2):
        if _segments_cross(*cx[a], *cx[b]):
            raise GeometryError("cuts cross")
    last = cuts[-1]
    beta = []
    for k in range(g):
        beta.append(find_path(pts[cuts[k][1]], pts[last[0]], cx, pts))
    return CycleBasis(pts, list(cuts), list(range(g)), beta, [1] * g)


def _pair_cuts(pts):
    idx = list(range(len(pts)))
    best = None
    for perm in _pairings(idx):
        cx = [(pts[i], pts[j]) for i, j in perm]
        if any(_segments_cross(*cx[a], *cx[b]) for a, b in itertools.combinations(range(len(cx)), 2)):
            continue
        cost = sum(abs(p - q) for p, q in cx)
        if best is None or cost < best[0]:
            best = (cost, perm)
    if best is None:
        raise GeometryError("no non-crossing cut pairing")
    return best[1]


def _pairings(idx):
    if not idx:
        yield []
        return
    a = idx[0]
    for k in range(1, len(idx)):
        b = idx[k]
        rest = idx[1:k] + idx[k + 1:]
        for tail in _pairings(rest):
            yield [(a, b)] + tail


def glued_cycles(cfg: BranchConfig) -> CycleBasis:
    """Cuts (a2,a3), (b2,b3), (a1,b1); alpha_i around the first two, beta_1 from a3 to
    a1 and beta_2 from b3 to b1, both kept away from the other component."""
    a = cfg.provenance["a"]
    b = cfg.provenance["b"]
    pts = tuple(a) + tuple(b)  # indices: a1 a2 a3 b1 b2 b3
    cuts = [(1, 2), (4, 5), (0, 3)]
    cx = _cuts_xy(pts, cuts)
    bscale = max(abs(x) for x in b)
    # beta_1 must avoid the small disc holding the b's
    disc = [complex(0)] + list(b)
    beta1 = find_path(a[2], a[0], cx, list(pts) + disc, margin=max(10 * bscale, 0.05 * _min_sep(a)))
    beta2 = find_path(b[2], b[0], cx, pts, margin=0.05 * _min_sep(b))
    return CycleBasis(pts, cuts, [0, 1], [beta1, beta2], [1, 1], note="glued")


# -- periods -----------------------------------------------------------------------------


@dataclass
class PeriodResult:
    Omega: np.ndarray
    A: np.ndarray      # A[i, m] = alpha_i period of x^m dx/y
    B: np.ndarray
    quad_order: int
    cycles: CycleBasis
    converged_change: float


def raw_periods(cycles: CycleBasis, n: int):
    pts = cycles.points
    g = cycles.genus
    powers = tuple(range(g))
    A = np.array([loop_integrals(pts, cycles.cuts, k, n, powers) for k in cycles.alpha])
    B = np.array([path_integrals(pts, cycles.cuts, path, n, powers=powers) for path in cycles.beta])
    return A, B


def _normalize(A, B, signs, shift=None):
    """Omega for beta_i -> signs_i beta_i - sum_j shift_ij alpha_j."""
    Bs = B * np.array(signs)[:, None]
    if shift is not None:
        Bs = Bs - np.asarray(shift) @ A
    return Bs @ np.linalg.inv(A)


def riemann_ok(Om, tol=1e-8) -> bool:
    if Om.shape == (1, 1):
        return Om[0, 0].imag > 0
    sym = np.max(np.abs(Om - Om.T)) <= tol * max(1.0, np.max(np.abs(Om)))
    return bool(sym and np.all(np.linalg.eigvalsh((Om.imag + Om.imag.T) / 2) > 0))


def hyperelliptic_periods(cfg_or_points, cycles: CycleBasis | None = None, quad_order: int = 64,
                          tol: float = 1e-12, max_order: int = 1024) -> PeriodResult:
    """alpha-normalized period matrix of dx/y, ..., x^(g-1) dx/y.

    The beta orientations are fixed by the Riemann bilinear relations (symmetric
    Omega with positive-definite imaginary part); quadrature order is doubled until
    Omega changes by less than ``tol`` (relative).
    """
    if isinstance(cfg_or_points, BranchConfig):
        pts = cfg_or_points.points
        if cycles is None:
            cycles = glued_cycles(cfg_or_points) if cfg_or_points.provenance.get("kind") == "glued" \
                else default_cycles(pts)
    else:
        pts = tuple(complex(x) for x in cfg_or_points)
        cycles = default_cycles(pts) if cycles is None else cycles
    n = quad_order
    prev = None
    change = math.inf
    while True:
        A, B = raw_periods(cycles, n)
        try:
            Om = _choose_signs(A, B, cycles)
        except BranchTrackingError:
            # a coarse rule can blur the integer structure of Omega - Omega^T
            if n >= max_order:
                raise
            n *= 2
            continue
        if prev is not None:
            change = np.max(np.abs(Om - prev)) / max(1.0, np.max(np.abs(Om)))
            if change < tol:
                break
        if n >= max_order:
            break
        prev = Om
        n *= 2
    if not riemann_ok(Om, 1e-8):
        raise BranchTrackingError("period matrix violates the Riemann relations")
    return PeriodResult(Om, A, B, n, cycles, change)


def _choose_signs(A, B, cycles):
    """Beta orientations, plus integer alpha shifts that undo beta_i . beta_j != 0.

    Paths that detour around other cuts can pick up intersections with each other;
    Omega - Omega^T is then an integer matrix and beta_i -> beta_i - n alpha_j
    restores a symplectic basis.
    """
    g = cycles.genus
    if cycles.fixed:
        return _normalize(A, B, cycles.beta_signs, cycles.beta_shift)
    for signs in itertools.product((1, -1), repeat=g):
        Om = _normalize(A, B, signs)
        D = Om - Om.T
        R = np.round(D.real)
        if np.max(np.abs(D - R)) > 1e-6:
            continue
        shift = np.triu(R, 1).astype(int)
        Om = _normalize(A, B, signs, shift)
        if riemann_ok(Om, 1e-6):
            cycles.beta_signs = list(signs)
            cycles.beta_shift = shift
            cycles.fixed = True
            return Om
    raise BranchTrackingError("no beta orientation satisfies the Riemann relations")


# -- symplectic changes and alignment ------------------------------------------------------


def sp4_action(Om, S):
    """Omega for the cycle basis (alpha', beta') = S (alpha, beta) in block form.

    With alpha' = D alpha + C beta and beta' = B alpha + A beta (S = [[D, C], [B, A]]),
    Omega' = (A Omega + B)(C Omega + D)^-1.
    """
    S = np.asarray(S)
    g = Om.shape[0]
    D, C = S[:g, :g], S[:g, g:]
    Bm, Am = S[g:, :g], S[g:, g:]
    return (Am @ Om + Bm) @ np.linalg.inv(C @ Om + D)


def periods_in_basis(result: PeriodResult, S):
    """Recompute Omega directly from the raw periods in the transformed cycle basis."""
    g = result.A.shape[0]
    cyc = result.cycles
    Bs = result.B * np.array(cyc.beta_signs)[:, None]
    if cyc.beta_shift is not None:
        Bs = Bs - cyc.beta_shift @ result.A
    raw = np.vstack([result.A, Bs])
    new = np.asarray(S) @ raw
    return new[g:] @ np.linalg.inv(new[:g])


def align_to_reference(Om, ref):
    """Fix the residual Sp(4,Z) freedom invisible to the Riemann relations.

    Tries the sign flips diag(e1, e2, e1, e2) and then the integer shifts
    beta -> beta + N alpha closest to ``ref``; returns (Omega, description).
    """
    best = None
    g = Om.shape[0]
    for signs in itertools.product((1, -1), repeat=g):
        Dm = np.diag(signs)
        X = Dm @ Om @ Dm
        N = np.round((X - ref).real)
        N = np.round((N + N.T) / 2)
        Y = X - N
        err = np.max(np.abs(Y - ref))
        if best is None or err < best[0]:
            best = (err, Y, {"signs": signs, "shift": (-N).astype(int).tolist()})
    return best[1], best[2]


# -- genus 1 -------------------------------------------------------------------------------


def lambda_invert(lam, guess=None, q_terms: int = 64, tol: float = 1e-14, max_iter: int = 60) -> complex:
    """tau with lambda(tau) = lam via Newton, starting from lambda ~ 16 q^(1/2)."""
    tau = complex(np.log(lam / 16) / (1j * np.pi)) if guess is None else complex(guess)
    if tau.imag <= 0:
        tau = complex(tau.real, 0.5)
    for _ in range(max_iter):
        ctx = EllipticContext(tau, q_terms)
        step = (ctx.lam - lam) / ctx.lam_tau
        tau -= step
        if tau.imag <= 0:
            tau = complex(tau.real, 0.05)
        if abs(step) < tol * max(1.0, abs(tau)):
            return tau
    raise DomainError("lambda inversion did not converge")


def cross_ratio(e1, e2, e3, e4):
    """lambda of (e1, e2, e3, e4) when e4 plays the role of infinity."""
    return ((e3 - e2) * (e1 - e4)) / ((e1 - e2) * (e3 - e4))


# -- degeneration probe ------------------------------------------------------------------------


@dataclass
class ProbeReport:
    gaps: list
    omegas: list
    k_increments: list
    k: float
    nearest_integer: int
    relative_deviation: float
    offdiag_drift: float
    monotone_im: bool
    ok: bool
    merge_type: str


def degeneration_log_probe(base: BranchConfig | None = None, merge_type: str = "uu",
                           gaps=(1e-2, 1e-3, 1e-4), quad_order: int = 64) -> ProbeReport:
    """Sweep a pair of branch points together symmetrically and fit
    Omega11 ~ (k / 2 pi i) log(gap).  The merging pair is the first cut."""
    if base is None:
        base = BranchConfig((-1.3 + 0.2j, -0.4 - 0.1j, 0.9 + 0.3j), (1.8 - 0.2j, 2.9 + 0.4j, 4.1 - 0.3j))
    u, v = list(base.u), list(base.v)
    if merge_type == "uu":
        m = (u[0] + u[1]) / 2
    elif merge_type == "uv":
        m = (u[0] + v[0]) / 2
    else:
        raise ValueError("merge_type must be 'uu' or 'uv'")
    direction = 1.0 + 0.0j
    omegas = []
    for gap in gaps:
        p, q = m - direction * gap / 2, m + direction * gap / 2
        if merge_type == "uu":
            pts = (p, q, u[2], v[0], v[1], v[2])
        else:
            pts = (p, u[1], u[2], q, v[1], v[2])
        pair = (0, 1) if merge_type == "uu" else (0, 3)
        rest = [k for k in range(6) if k not in pair]
        cuts = [pair] + _pair_cuts_subset(pts, rest)
        cyc = default_cycles(pts, cuts)
        omegas.append(hyperelliptic_periods(pts, cyc, quad_order).Omega)
    incs = []
    for (g0, O0), (g1, O1) in zip(zip(gaps, omegas), zip(gaps[1:], omegas[1:])):
        incs.append(((O1[0, 0] - O0[0, 0]) * 2j * np.pi / np.log(g1 / g0)).real)
    k = float(np.mean(incs))
    ki = int(round(k))
    dev = abs(k - ki) / max(abs(ki), 1)
    drift = max(max(abs(O[0, 1] - omegas[0][0, 1]), abs(O[1, 1] - omegas[0][1, 1])) for O in omegas)
    ims = [O[0, 0].imag for O in omegas]
    mono = all(b > a for a, b in zip(ims, ims[1:]))
    ok = dev < 0.02 and drift < 1e-3 and mono
    return ProbeReport(list(gaps), omegas, incs, k, ki, dev, float(drift), mono, ok, merge_type)


def _pair_cuts_subset(pts, idx):
    best = None
    for perm in _pairings(list(idx)):
        cx = [(pts[i], pts[j]) for i, j in perm]
        if any(_segments_cross(*cx[a], *cx[b]) for a, b in itertools.combinations(range(len(cx)), 2)):
            continue
        cost = sum(abs(p - q) for p, q in cx)
        if best is None or cost < best[0]:
            best = (cost, perm)
    if best is None:
        raise GeometryError("no non-crossing cut pairing")
    return best[1]


__all__ = [
    "GeometryError", "BranchTrackingError", "CycleBasis", "PeriodResult", "y_branch",
    "loop_integrals", "path_integrals", "default_cycles", "glued_cycles", "raw_periods",
    "hyperelliptic_periods", "riemann_ok", "sp4_action", "periods_in_basis",
    "align_to_reference", "lambda_invert", "cross_ratio", "ProbeReport", "degeneration_log_probe",
]
