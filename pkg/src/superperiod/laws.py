"""Randomized algebra-law checks for the Grassmann series engine."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grassmann import GENERATOR_ORDER, SuperMatrix, berezinian, det2, pairing, random_element


@dataclass
class LawTally:
    checks: int = 0
    failures: int = 0
    worst: dict = field(default_factory=dict)

    def record(self, law: str, err: float, tol: float) -> None:
        self.checks += 1
        if not err <= tol:
            self.failures += 1
        self.worst[law] = max(self.worst.get(law, 0.0), err)


def _rel(x, y) -> float:
    return (x - y).max_abs() / max(1.0, y.max_abs())


def _homogeneous(rng, order):
    parity = "even" if rng.integers(2) == 0 else "odd"
    return random_element(rng, order=order, parity=parity, scale=0.5), parity


def _supermatrix(rng, n_even: int, n_odd: int, order: int) -> SuperMatrix:
    n = n_even + n_odd
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            same = (i < n_even) == (j < n_even)
            x = random_element(rng, order=order, parity="even" if same else "odd", scale=0.3)
            if i == j:
                x = x + 1.0
            row.append(x)
        rows.append(row)
    return SuperMatrix(rows, n_even)


def run_laws(rng: np.random.Generator, rounds: int, order: int = 3, tol: float = 1e-12) -> LawTally:
    """Each round runs six checks: associativity, graded commutativity, inverse,
    square root, pairing polarization and Berezinian multiplicativity."""
    tally = LawTally()
    for _ in range(rounds):
        a = random_element(rng, order=order, scale=0.5)
        b = random_element(rng, order=order, scale=0.5)
        c = random_element(rng, order=order, scale=0.5)
        tally.record("associativity", _rel((a * b) * c, a * (b * c)), tol)

        x, px = _homogeneous(rng, order)
        y, py = _homogeneous(rng, order)
        sign = -1 if (px == "odd" and py == "odd") else 1
        tally.record("graded commutativity", _rel(x * y, (y * x) * sign), tol)

        u = random_element(rng, order=order, scale=0.3, body=1.0 + rng.uniform(0.5, 1.5))
        tally.record("inverse", _rel(u * u.inv(), u * 0 + 1), tol)
        tally.record("square root", _rel(u.sqrt() * u.sqrt(), u), tol)

        m = [[random_element(rng, order=order, parity="even", scale=0.5) for _ in range(2)] for _ in range(2)]
        tally.record("pairing polarization", _rel(pairing(m, m), det2(m) * 2), tol)

        m1 = _supermatrix(rng, 2, 1, order)
        m2 = _supermatrix(rng, 2, 1, order)
        lhs = berezinian(m1 @ m2)
        rhs = berezinian(m1) * berezinian(m2)
        tally.record("Berezinian multiplicativity", _rel(lhs, rhs), tol)
    return tally


__all__ = ["LawTally", "run_laws", "GENERATOR_ORDER"]
