"""Sparse multivariate polynomials.

A :class:`Polynomial` maps exponent tuples (one slot per ring variable) to
coefficients. Coefficients may be ints, Fractions, floats or complex numbers;
construction of the case systems uses exact Fractions and converts to floats
only when a system is compiled for numerical work.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, Sequence


class PolyRing:
    """Ordered set of variable names shared by the polynomials built on it."""

    def __init__(self, names: Iterable[str]):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")
        self.index = {n: i for i, n in enumerate(self.names)}
        self._zero_exp = (0,) * len(self.names)

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def var(self, name: str) -> "Polynomial":
        exp = [0] * len(self.names)
        exp[self.index[name]] = 1
        return Polynomial(self, {tuple(exp): 1})

    def vars(self, *names: str) -> list["Polynomial"]:
        return [self.var(n) for n in names]

    def const(self, c) -> "Polynomial":
        return Polynomial(self, {self._zero_exp: c} if c != 0 else {})

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})


class Polynomial:
    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: Mapping[tuple, Number]):
        self.ring = ring
        self.terms = {e: c for e, c in terms.items() if c != 0}

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring is not self.ring and other.ring != self.ring:
                raise ValueError("polynomials live in different rings")
            return other
        if isinstance(other, Number):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return Polynomial(self.ring, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self.ring, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Number):
            return NotImplemented
        if isinstance(other, int):
            other = Fraction(other)
        return self * (1 / other)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        out = self.ring.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, Polynomial) else other
        if other is NotImplemented:
            return False
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    # -- inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def degree(self, variables: Sequence[str] | None = None) -> int:
        """Total degree, optionally counting only the given variables."""
        if not self.terms:
            return -1
        if variables is None:
            return max(sum(e) for e in self.terms)
        idx = [self.ring.index[v] for v in variables]
        return max(sum(e[i] for i in idx) for e in self.terms)

    def variables(self) -> set[str]:
        used = set()
        for e in self.terms:
            used.update(self.ring.names[i] for i, k in enumerate(e) if k)
        return used

    def diff(self, name: str) -> "Polynomial":
        i = self.ring.index[name]
        out: dict = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1 :]
                out[ne] = out.get(ne, 0) + c * k
        return Polynomial(self.ring, out)

    def evaluate(self, values: Mapping[str, Number] | Sequence[Number]):
        """Evaluate at a full assignment (mapping by name or sequence in ring order)."""
        if isinstance(values, Mapping):
            values = [values[n] for n in self.ring.names]
        total = 0
        for e, c in self.terms.items():
            t = c
            for v, k in zip(values, e):
                if k:
                    t = t * v**k
            total = total + t
        return total

    def subs(self, values: Mapping[str, Number]) -> "Polynomial":
        """Substitute numbers for some variables; the ring is unchanged."""
        idx = {self.ring.index[n]: v for n, v in values.items()}
        out: dict = {}
        for e, c in self.terms.items():
            t = c
            ne = list(e)
            for i, v in idx.items():
                if e[i]:
                    t = t * v ** e[i]
                    ne[i] = 0
            ne = tuple(ne)
            out[ne] = out.get(ne, 0) + t
        return Polynomial(self.ring, out)

    def map_coefficients(self, fn) -> "Polynomial":
        return Polynomial(self.ring, {e: fn(c) for e, c in self.terms.items()})

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def to_text(self) -> str:
        """Plain ``coef*var^exp`` sum, used for dumps read by external solvers."""
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            coef = _format_coefficient(c)
            factors = [
                name if k == 1 else f"{name}^{k}" for name, k in zip(self.ring.names, e) if k
            ]
            parts.append("*".join([coef] + factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"Polynomial({self.to_text()})"


def _format_coefficient(c) -> str:
    if isinstance(c, complex):
        return f"({c.real!r}{c.imag:+r}*I)"
    if isinstance(c, Fraction):
        return repr(float(c)) if c.denominator != 1 else str(c.numerator)
    return repr(c)


def determinant(matrix: Sequence[Sequence]):
    """Cofactor expansion along the first row; works for any ring elements."""
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    total = 0
    for j in range(n):
        a = matrix[0][j]
        if isinstance(a, Number) and a == 0:
            continue
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = a * determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total
