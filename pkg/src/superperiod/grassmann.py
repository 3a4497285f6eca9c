"""Truncated power series tensored with a finite Grassmann algebra.

Elements are stored densely: ``data[mask, i0, i1, ...]`` is the coefficient of
the Grassmann monomial encoded by ``mask`` (bit k set means generator k
appears) times ``var0**(low0 + i0) * var1**(low1 + i1) * ...``.

Precision is relative: an element with ``low`` and ``order`` N is known for
exponents ``low .. low + N``.  With ``low = 0`` this is the usual hard
truncation at order N.  Negative ``low`` gives Laurent series with a bounded
principal part.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

GENERATOR_ORDER = ("eta1", "eta2", "etat1", "etat2")
MAX_GENERATORS = 8


class StructureError(ValueError):
    """Operands live in different algebras (generators, variables, orders)."""


class DomainError(ArithmeticError):
    """Operation undefined for this input (e.g. inverse of a nilpotent)."""


Scalar = (int, float, complex, np.number)


@lru_cache(maxsize=None)
def _sign_table(n: int) -> np.ndarray:
    """S[a, b, m] = Koszul sign of e_a * e_b when m = a | b, else 0."""
    size = 1 << n
    table = np.zeros((size, size, size))
    for a in range(size):
        for b in range(size):
            if a & b:
                continue
            swaps = 0
            for j in range(n):
                if b >> j & 1:
                    swaps += bin(a >> (j + 1)).count("1")
            table[a, b, a | b] = -1.0 if swaps % 2 else 1.0
    return table


@lru_cache(maxsize=None)
def _shift_tensor(size: int) -> np.ndarray:
    """T[i, j, l] = 1 if i + j == l, for truncated convolution."""
    t = np.zeros((size, size, size))
    for i in range(size):
        for j in range(size - i):
            t[i, j, i + j] = 1.0
    return t


@lru_cache(maxsize=None)
def _sign_pairs(n: int):
    """Index arrays (a, b, a|b) and signs over the disjoint monomial pairs."""
    t = _sign_table(n)
    a, b, m = np.nonzero(t)
    return a, b, m, t[a, b, m]


def _popcount(m: int) -> int:
    return bin(m).count("1")


def monomial_name(mask: int, generators: Sequence[str]) -> str:
    if mask == 0:
        return "1"
    return "*".join(g for k, g in enumerate(generators) if mask >> k & 1)


def monomial_mask(name: str, generators: Sequence[str]) -> int:
    if name in ("", "1"):
        return 0
    mask = 0
    for g in name.split("*"):
        if g not in generators:
            raise StructureError(f"unknown generator {g!r}")
        k = generators.index(g)
        if mask >> k & 1:
            raise StructureError(f"repeated generator in {name!r}")
        mask |= 1 << k
    return mask


def _check_generators(generators: Sequence[str]) -> tuple[str, ...]:
    gens = tuple(generators)
    if len(gens) > MAX_GENERATORS:
        raise StructureError("at most 8 odd generators are supported")
    if len(set(gens)) != len(gens):
        raise StructureError("duplicate generators")
    known = [g for g in gens if g in GENERATOR_ORDER]
    if known != sorted(known, key=GENERATOR_ORDER.index):
        raise StructureError("generators must follow the global order eta1, eta2, etat1, etat2")
    return gens


class GrassmannElement:
    """Element of (truncated series in even variables) tensor (Grassmann algebra)."""

    __slots__ = ("generators", "vars", "lows", "data")

    def __init__(self, data, generators: Sequence[str] = (), vars: Sequence[str] = ("t",),
                 lows: Sequence[int] | None = None):
        gens = _check_generators(generators)
        vs = tuple(vars)
        arr = np.array(data, dtype=complex)
        if arr.ndim != 1 + len(vs) or arr.shape[0] != 1 << len(gens):
            raise StructureError(
                f"data shape {arr.shape} does not match {len(gens)} generators and {len(vs)} variables")
        self.generators = gens
        self.vars = vs
        self.lows = tuple(int(x) for x in lows) if lows is not None else (0,) * len(vs)
        if len(self.lows) != len(vs):
            raise StructureError("one low exponent per variable is required")
        self.data = arr
        self.data.setflags(write=False)

    # construction -----------------------------------------------------------------

    @classmethod
    def _raw(cls, generators, vars, lows, data) -> "GrassmannElement":
        obj = object.__new__(GrassmannElement)
        obj.generators = generators
        obj.vars = vars
        obj.lows = lows
        data.setflags(write=False)
        obj.data = data
        return obj

    def _like(self, data, lows=None) -> "GrassmannElement":
        return GrassmannElement._raw(self.generators, self.vars,
                                     self.lows if lows is None else tuple(lows), data)

    @classmethod
    def zero(cls, generators=(), order: int | Sequence[int] = 0, vars=("t",), lows=None):
        sizes = _sizes(order, len(vars))
        return cls._raw(_check_generators(generators), tuple(vars),
                        tuple(lows) if lows is not None else (0,) * len(vars),
                        np.zeros((1 << len(generators),) + sizes, dtype=complex))

    @classmethod
    def scalar(cls, value, generators=(), order: int | Sequence[int] = 0, vars=("t",)):
        z = cls.zero(generators, order, vars)
        d = z.data.copy()
        d[(0,) * d.ndim] = value
        return z._like(d)

    @classmethod
    def generator(cls, name: str, generators=GENERATOR_ORDER, order: int | Sequence[int] = 0,
                  vars=("t",)):
        z = cls.zero(generators, order, vars)
        d = z.data.copy()
        d[(monomial_mask(name, z.generators),) + (0,) * len(z.vars)] = 1.0
        return z._like(d)

    @classmethod
    def from_terms(cls, terms: dict, generators=GENERATOR_ORDER, order: int = 0, var: str = "t",
                   low: int = 0):
        """Univariate element from {monomial name: coefficient list}."""
        z = cls.zero(generators, order, (var,), (low,))
        d = z.data.copy()
        for name, coeffs in terms.items():
            c = np.asarray(coeffs, dtype=complex)
            if len(c) > order + 1:
                raise StructureError("more coefficients than the truncation order allows")
            d[monomial_mask(name, z.generators), :len(c)] = c
        return z._like(d)

    # shape ------------------------------------------------------------------------

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.data.shape[1:])

    @property
    def order(self) -> int:
        if len(self.vars) != 1:
            raise StructureError("order is only defined for univariate elements")
        return self.data.shape[1] - 1

    @property
    def low(self) -> int:
        if len(self.vars) != 1:
            raise StructureError("low is only defined for univariate elements")
        return self.lows[0]

    @property
    def parity(self) -> str:
        nz = [m for m in range(self.data.shape[0]) if np.any(self.data[m] != 0)]
        if not nz:
            return "zero"
        pars = {_popcount(m) % 2 for m in nz}
        if len(pars) == 2:
            return "mixed"
        return "odd" if pars.pop() else "even"

    def _structure(self):
        return (self.generators, self.vars, self.data.shape)

    # coercion ---------------------------------------------------------------------

    def lift(self, generators: Sequence[str]) -> "GrassmannElement":
        """Embed into the algebra on a larger generator set (order preserved)."""
        gens = _check_generators(generators)
        if gens == self.generators:
            return self
        pos = []
        for g in self.generators:
            if g not in gens:
                raise StructureError(f"generator {g!r} missing from target algebra")
            pos.append(gens.index(g))
        if pos != sorted(pos):
            raise StructureError("generator order differs between algebras")
        out = np.zeros((1 << len(gens),) + self.data.shape[1:], dtype=complex)
        for m in range(self.data.shape[0]):
            target = 0
            for k, p in enumerate(pos):
                if m >> k & 1:
                    target |= 1 << p
            out[target] = self.data[m]
        return GrassmannElement._raw(gens, self.vars, self.lows, out)

    def _coerce(self, other) -> "GrassmannElement":
        if isinstance(other, GrassmannElement):
            if other.generators != self.generators:
                if not other.generators:
                    other = other.lift(self.generators)
                elif not self.generators:
                    raise _Promote(other.generators)
                else:
                    raise StructureError(
                        f"generator sets differ: {self.generators} vs {other.generators}")
            if other.vars != self.vars or other.data.shape[1:] != self.data.shape[1:]:
                raise StructureError(
                    f"variables/orders differ: {self.vars}{self.orders} vs {other.vars}{other.orders}")
            return other
        if isinstance(other, Scalar):
            d = np.zeros_like(self.data)
            d[(0,) * d.ndim] = other
            return self._like(d, (0,) * len(self.vars))
        return NotImplemented

    # arithmetic -------------------------------------------------------------------

    def _realign(self, lows) -> np.ndarray:
        """Data re-expressed with the (smaller or equal) lows given."""
        d = self.data
        for ax, (old, new) in enumerate(zip(self.lows, lows)):
            k = old - new
            if k < 0:
                raise StructureError("cannot realign to a larger low exponent")
            if k:
                d = np.roll(d, k, axis=ax + 1)
                idx = [slice(None)] * d.ndim
                idx[ax + 1] = slice(0, k)
                d = d.copy()
                d[tuple(idx)] = 0
        return d

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except _Promote as p:
            return self.lift(p.generators) + other
        if other is NotImplemented:
            return NotImplemented
        lows = tuple(min(a, b) for a, b in zip(self.lows, other.lows))
        return self._like(self._realign(lows) + other._realign(lows), lows)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.data)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return self._like(self.data * other)
        try:
            other = self._coerce(other)
        except _Promote as p:
            return self.lift(p.generators) * other
        if other is NotImplemented:
            return NotImplemented
        lows = tuple(a + b for a, b in zip(self.lows, other.lows))
        return self._like(_product(self.data, other.data, len(self.generators)), lows)

    def __rmul__(self, other):
        if isinstance(other, Scalar):
            return self._like(self.data * other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            return self._like(self.data / other)
        return self * _as_element(other, self).inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        if k < 0:
            return self.inv() ** (-k)
        out = self._coerce(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def _split_unit(self):
        """Return (c, n) with self = c * x**low * (1 + n), n without constant term."""
        c = self.data[(0,) * self.data.ndim]
        if c == 0:
            raise DomainError("leading (body constant) coefficient vanishes")
        n = self.data / c
        n = n.copy()
        n[(0,) * n.ndim] = 0
        return c, self._like(n, (0,) * len(self.vars))

    def _nilpotency_bound(self) -> int:
        return sum(self.orders) + len(self.generators) + 1

    def inv(self) -> "GrassmannElement":
        """Multiplicative inverse; needs a nonzero leading body coefficient."""
        c, n = self._split_unit()
        term = n._coerce(1)
        total = term
        for _ in range(self._nilpotency_bound()):
            term = term * (-n)
            if not np.any(term.data):
                break
            total = total + term
        return total._like(total.data / c, tuple(-x for x in self.lows))

    def sqrt(self, branch: int = 1) -> "GrassmannElement":
        """Square root; ``branch`` (+1 or -1) fixes the sign of the leading root."""
        if branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        if any(x % 2 for x in self.lows):
            raise DomainError("odd leading exponent: declare a half-power variable instead")
        c, n = self._split_unit()
        term = n._coerce(1)
        total = term
        coef = 1.0
        for k in range(1, self._nilpotency_bound()):
            coef *= (0.5 - (k - 1)) / k
            term = term * n
            if not np.any(term.data):
                break
            total = total + term * coef
        root = branch * np.sqrt(c)
        return total._like(total.data * root, tuple(x // 2 for x in self.lows))

    # series manipulation ----------------------------------------------------------

    def shift(self, k: int, axis: int = 0) -> "GrassmannElement":
        """Multiply by var**k (exact; only the low exponent changes)."""
        lows = list(self.lows)
        lows[axis] += k
        return self._like(self.data, lows)

    def times_var(self, k: int, axis: int = 0) -> "GrassmannElement":
        """Multiply by var**k (k >= 0) keeping the window fixed (absolute truncation)."""
        if k < 0:
            raise ValueError("use shift for negative powers")
        return self.shift(k, axis).with_low(self.lows[axis], axis)

    def with_low(self, low: int, axis: int = 0) -> "GrassmannElement":
        """Re-express with a smaller low exponent, or a larger one if the dropped
        leading coefficients vanish (tolerance 0)."""
        cur = self.lows[axis]
        if low <= cur:
            lows = list(self.lows)
            lows[axis] = low
            return self._like(self._realign(lows), lows)
        k = low - cur
        idx = [slice(None)] * self.data.ndim
        idx[axis + 1] = slice(0, k)
        if np.any(self.data[tuple(idx)] != 0):
            raise DomainError("cannot raise low exponent: leading coefficients are nonzero")
        d = np.roll(self.data, -k, axis=axis + 1).copy()
        idx[axis + 1] = slice(d.shape[axis + 1] - k, None)
        d[tuple(idx)] = 0
        lows = list(self.lows)
        lows[axis] = low
        return self._like(d, lows)

    def divide_by_var(self, k: int = 1, axis: int = 0, tol: float = 0.0) -> "GrassmannElement":
        """Divide by var**k when the first k coefficients vanish (up to tol); one
        order of precision is lost per power, so the result is padded with 0."""
        idx = [slice(None)] * self.data.ndim
        idx[axis + 1] = slice(0, k)
        lead = np.abs(self.data[tuple(idx)])
        scale = max(np.max(np.abs(self.data)), 1e-300)
        if lead.size and np.max(lead) > tol * scale:
            raise DomainError("series is not divisible by the requested power")
        d = np.roll(self.data, -k, axis=axis + 1).copy()
        idx[axis + 1] = slice(d.shape[axis + 1] - k, None)
        d[tuple(idx)] = 0
        return self._like(d)

    def retruncate(self, order: int, axis: int = 0) -> "GrassmannElement":
        """Explicit change of truncation order (pads with zeros when growing)."""
        size = order + 1
        cur = self.data.shape[axis + 1]
        if size <= cur:
            idx = [slice(None)] * self.data.ndim
            idx[axis + 1] = slice(0, size)
            return self._like(self.data[tuple(idx)].copy())
        pad = [(0, 0)] * self.data.ndim
        pad[axis + 1] = (0, size - cur)
        return self._like(np.pad(self.data, pad))

    def component(self, monomial: str | int = "1") -> "TruncatedSeries | GrassmannElement":
        """Body coefficient series of one Grassmann monomial."""
        mask = monomial if isinstance(monomial, int) else monomial_mask(monomial, self.generators)
        if len(self.vars) == 1:
            return TruncatedSeries(self.data[mask], var=self.vars[0], low=self.lows[0])
        return GrassmannElement(self.data[mask][None], (), self.vars, self.lows)

    def coeff(self, monomial: str | int = "1", *powers: int) -> complex:
        mask = monomial if isinstance(monomial, int) else monomial_mask(monomial, self.generators)
        if not powers:
            powers = self.lows
        idx = []
        for p, lo, s in zip(powers, self.lows, self.data.shape[1:]):
            i = p - lo
            if i < 0:
                return 0j
            if i >= s:
                raise StructureError(f"power {p} beyond the known precision")
            idx.append(i)
        return complex(self.data[(mask,) + tuple(idx)])

    def body(self) -> "GrassmannElement":
        d = np.zeros_like(self.data)
        d[0] = self.data[0]
        return self._like(d)

    def even_part(self) -> "GrassmannElement":
        d = self.data.copy()
        for m in range(d.shape[0]):
            if _popcount(m) % 2:
                d[m] = 0
        return self._like(d)

    def odd_part(self) -> "GrassmannElement":
        return self - self.even_part()

    def map_generators(self, signs: dict) -> "GrassmannElement":
        """Substitute generator g -> signs[g] * g (signs are +1 or -1)."""
        d = self.data.copy()
        for m in range(d.shape[0]):
            s = 1
            for k, g in enumerate(self.generators):
                if m >> k & 1:
                    s *= signs.get(g, 1)
            d[m] *= s
        return self._like(d)

    def scale_var(self, factor, axis: int = 0) -> "GrassmannElement":
        """Substitute var -> factor * var."""
        n = self.data.shape[axis + 1]
        w = factor ** (np.arange(n) + self.lows[axis])
        shape = [1] * self.data.ndim
        shape[axis + 1] = n
        return self._like(self.data * w.reshape(shape))

    def evaluate(self, value, axis: int = 0) -> "GrassmannElement":
        """Sum the series in one variable at a numeric value."""
        n = self.data.shape[axis + 1]
        w = value ** (np.arange(n) + self.lows[axis])
        d = np.tensordot(self.data, w, axes=([axis + 1], [0]))
        vars_ = self.vars[:axis] + self.vars[axis + 1:]
        lows = self.lows[:axis] + self.lows[axis + 1:]
        if not vars_:
            d = d[:, None]
            vars_ = ("_",)
            lows = (0,)
        return GrassmannElement._raw(self.generators, vars_, lows, np.ascontiguousarray(d))

    def terms(self) -> dict:
        """{monomial name: coefficient array} over the nonzero monomials."""
        out = {}
        for m in range(self.data.shape[0]):
            if np.any(self.data[m] != 0):
                out[monomial_name(m, self.generators)] = self.data[m]
        return out

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def allclose(self, other, rtol: float = 1e-10, atol: float = 0.0) -> bool:
        return bool(close_report(self, other, rtol, atol)[0])

    def __repr__(self):
        parts = []
        for name, arr in self.terms().items():
            parts.append(f"{name}: {np.array2string(arr, precision=6)}")
        head = f"GrassmannElement(vars={self.vars}, lows={self.lows}, orders={self.orders}"
        return head + (", " + "; ".join(parts) if parts else "") + ")"


class _Promote(Exception):
    def __init__(self, generators):
        self.generators = generators


def _sizes(order, nvars) -> tuple[int, ...]:
    if isinstance(order, (int, np.integer)):
        return (int(order) + 1,) * nvars
    if len(order) != nvars:
        raise StructureError("one order per variable is required")
    return tuple(int(o) + 1 for o in order)


def _product(a: np.ndarray, b: np.ndarray, ngen: int) -> np.ndarray:
    sign = _sign_table(ngen)
    nv = a.ndim - 1
    if nv == 1:
        ia, ib, im, sg = _sign_pairs(ngen)
        A, B = a[ia], b[ib]
        n = a.shape[1]
        conv = np.zeros((len(ia), n), dtype=complex)
        for i in range(n):
            conv[:, i:] += A[:, i:i + 1] * B[:, :n - i]
        out = np.zeros_like(a)
        np.add.at(out, im, sg[:, None] * conv)
        return out
    inter = []
    for ax in range(nv):
        inter += [2 + ax, 2 + nv + ax]
    k = np.einsum(a, [0, *range(2, 2 + nv)], b, [1, *range(2 + nv, 2 + 2 * nv)], [0, 1, *inter])
    for ax in range(nv):
        t = _shift_tensor(a.shape[ax + 1])
        # contract the ax-th pair (now at positions 2 and 3) into one index appended last
        k = np.einsum(k, [0, 1, 2, 3, *range(4, k.ndim)], t, [2, 3, k.ndim],
                      [0, 1, *range(4, k.ndim), k.ndim])
    return np.einsum("abm,ab...->m...", sign, k)


def _as_element(x, like: GrassmannElement) -> GrassmannElement:
    if isinstance(x, GrassmannElement):
        return x
    return like._coerce(x)


def close_report(a, b, rtol: float = 1e-10, atol: float = 0.0):
    """(ok, max abs diff, scale) for coefficient-wise relative comparison."""
    if not isinstance(a, GrassmannElement):
        a, b = b, a
    b = _as_element(b, a)
    lows = tuple(min(x, y) for x, y in zip(a.lows, b.lows))
    da, db = a._realign(lows), b._realign(lows)
    # compare only over the window both know
    hi = [min(a.lows[i] + a.data.shape[i + 1], b.lows[i] + b.data.shape[i + 1]) - lows[i]
          for i in range(len(lows))]
    idx = (slice(None),) + tuple(slice(0, h) for h in hi)
    diff = float(np.max(np.abs(da[idx] - db[idx]))) if da[idx].size else 0.0
    scale = max(float(np.max(np.abs(da[idx]))), float(np.max(np.abs(db[idx])))) if da[idx].size else 0.0
    return diff <= atol + rtol * scale, diff, scale


class TruncatedSeries(GrassmannElement):
    """Complex power series in one even variable, known up to exponent low + N."""

    __slots__ = ()

    def __init__(self, coeffs: Iterable, var: str = "t", low: int = 0, order: int | None = None):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=complex)
        if order is not None:
            if len(c) > order + 1:
                raise StructureError("more coefficients than order + 1")
            c = np.pad(c, (0, order + 1 - len(c)))
        if c.ndim != 1 or len(c) == 0:
            raise StructureError("coefficients must be a non-empty 1-d sequence")
        super().__init__(c[None, :], (), (var,), (low,))

    @property
    def var(self) -> str:
        return self.vars[0]

    @property
    def coeffs(self) -> np.ndarray:
        return self.data[0]

    def __getitem__(self, power: int) -> complex:
        return self.coeff("1", power)

    def __call__(self, x) -> complex:
        k = np.arange(len(self.coeffs)) + self.low
        return complex(np.sum(self.coeffs * np.power(complex(x), k)))

    def derivative(self) -> "TruncatedSeries":
        k = np.arange(len(self.coeffs)) + self.low
        return TruncatedSeries(self.coeffs * k, self.var, self.low - 1)

    def polar_part(self) -> np.ndarray:
        """Coefficients of exponents low .. -1 (empty if low >= 0)."""
        return self.coeffs[: max(0, -self.low)].copy()

    def regular_part(self, upto: int) -> np.ndarray:
        """Coefficients of exponents 0 .. upto (zeros where below low)."""
        out = np.zeros(upto + 1, dtype=complex)
        for p in range(max(0, self.low), upto + 1):
            i = p - self.low
            if i >= len(self.coeffs):
                raise StructureError(f"power {p} beyond the known precision")
            out[p] = self.coeffs[i]
        return out

    def __repr__(self):
        return f"TruncatedSeries({np.array2string(self.coeffs, precision=6)}, var={self.var!r}, low={self.low})"


def _series_view(x: GrassmannElement) -> GrassmannElement:
    if not x.generators and len(x.vars) == 1 and not isinstance(x, TruncatedSeries):
        return TruncatedSeries(x.data[0], x.vars[0], x.lows[0])
    return x


# keep results of pure-series arithmetic as TruncatedSeries
for _name in ("__add__", "__radd__", "__sub__", "__rsub__", "__mul__", "__rmul__", "__neg__",
              "__truediv__", "__rtruediv__", "__pow__", "inv", "sqrt", "shift", "with_low", "times_var",
              "divide_by_var", "retruncate", "scale_var", "map_generators", "even_part", "body"):
    _base = getattr(GrassmannElement, _name)

    def _wrapped(self, *args, _f=_base, **kw):
        r = _f(self, *args, **kw)
        return _series_view(r) if isinstance(r, GrassmannElement) else r

    _wrapped.__name__ = _name
    _wrapped.__doc__ = _base.__doc__
    setattr(TruncatedSeries, _name, _wrapped)


def series(coeffs, var: str = "t", low: int = 0, order: int | None = None) -> TruncatedSeries:
    return TruncatedSeries(coeffs, var, low, order)


def gs_mul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    return a * b


def gs_inv(a: GrassmannElement) -> GrassmannElement:
    return a.inv()


def gs_sqrt(a: GrassmannElement, branch: int = 1) -> GrassmannElement:
    return a.sqrt(branch)


# 2x2 and square matrices over the even part ---------------------------------------

def det2(m) -> GrassmannElement:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


det2_grassmann = det2


def pairing(a, b) -> GrassmannElement:
    """<A, B> = tr(adj(A) B) = a11 b22 + a22 b11 - a12 b21 - a21 b12."""
    return a[0][0] * b[1][1] + a[1][1] * b[0][0] - a[0][1] * b[1][0] - a[1][0] * b[0][1]


def det(m) -> GrassmannElement:
    """Leibniz determinant of a square matrix with even (commuting) entries."""
    n = len(m)
    if n == 0:
        raise StructureError("empty matrix")
    if n == 1:
        return m[0][0]
    if n == 2:
        return det2(m)
    total = None
    for perm in itertools.permutations(range(n)):
        sgn = _perm_sign(perm)
        term = m[0][perm[0]]
        for i in range(1, n):
            term = term * m[i][perm[i]]
        term = term if sgn > 0 else -term
        total = term if total is None else total + term
    return total


def _perm_sign(perm) -> int:
    perm = list(perm)
    s = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            s = -s
    return s


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    if len(a[0]) != k:
        raise StructureError("matrix shapes do not match")
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for l in range(1, k):
                acc = acc + a[i][l] * b[l][j]
            row.append(acc)
        out.append(row)
    return out


def mat_add(a, b, sign: int = 1):
    return [[x + (y if sign > 0 else -y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_inv(m):
    """Gauss-Jordan inverse over the even part; pivots need invertible bodies."""
    n = len(m)
    a = [list(row) for row in m]
    one = a[0][0]._coerce(1)
    zero = one * 0
    inv = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col].data[(0,) * a[r][col].data.ndim]))
        if a[piv][col].data[(0,) * a[piv][col].data.ndim] == 0:
            raise DomainError("matrix is not invertible (singular body)")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        p = a[col][col].inv()
        a[col] = [x * p for x in a[col]]
        inv[col] = [x * p for x in inv[col]]
        for r in range(n):
            if r != col:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return inv


class SuperMatrix:
    """Block supermatrix [[A, B], [C, D]]: rows/cols even first, then odd."""

    def __init__(self, entries, n_even: int, n_even_cols: int | None = None):
        self.entries = [list(r) for r in entries]
        self.n_even = n_even
        self.n_even_cols = n_even if n_even_cols is None else n_even_cols
        self._check_parities()

    def _check_parities(self):
        for i, row in enumerate(self.entries):
            for j, x in enumerate(row):
                want = "even" if (i < self.n_even) == (j < self.n_even_cols) else "odd"
                p = x.parity
                if p not in ("zero", want):
                    raise StructureError(f"entry ({i},{j}) has parity {p}, expected {want}")

    def blocks(self):
        p, q = self.n_even, self.n_even_cols
        e = self.entries
        a = [r[:q] for r in e[:p]]
        b = [r[q:] for r in e[:p]]
        c = [r[:q] for r in e[p:]]
        d = [r[q:] for r in e[p:]]
        return a, b, c, d

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        return SuperMatrix(mat_mul(self.entries, other.entries), self.n_even, other.n_even_cols)


def berezinian(m: SuperMatrix) -> GrassmannElement:
    """Ber = det(A - B D^-1 C) / det(D)."""
    a, b, c, d = m.blocks()
    if not d:
        return det(a)
    try:
        dinv = mat_inv(d)
    except DomainError as e:
        raise DomainError("odd-odd block is not invertible") from e
    if a:
        schur = mat_add(a, mat_mul(mat_mul(b, dinv), c), -1)
        return det(schur) * det(d).inv()
    return det(d).inv()


def random_element(rng: np.random.Generator, generators=GENERATOR_ORDER, order: int = 4,
                   parity: str = "any", var: str = "t", scale: float = 1.0,
                   body: complex | None = None) -> GrassmannElement:
    n = len(generators)
    data = scale * (rng.standard_normal((1 << n, order + 1))
                    + 1j * rng.standard_normal((1 << n, order + 1)))
    for m in range(1 << n):
        odd = _popcount(m) % 2
        if (parity == "even" and odd) or (parity == "odd" and not odd):
            data[m] = 0
    if body is not None:
        data[0, 0] = body
    return GrassmannElement(data, generators, (var,))


__all__ = [
    "GENERATOR_ORDER", "StructureError", "DomainError", "GrassmannElement", "TruncatedSeries",
    "SuperMatrix", "series", "gs_mul", "gs_inv", "gs_sqrt", "det2", "det2_grassmann", "pairing",
    "det", "mat_mul", "mat_add", "mat_inv", "berezinian", "random_element", "close_report",
    "monomial_name", "monomial_mask",
]
