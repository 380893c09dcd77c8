"""Exact arithmetic in Q(zeta_2N), the field holding every 2cos(pi/m).

Elements are coefficient vectors in the power basis 1, z, ..., z^(D-1) of a
primitive 2N-th root of unity z, reduced modulo the cyclotomic polynomial.
When N = 1 the field is Q and elements carry a single coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm

import mpmath
from sympy import Poly, cyclotomic_poly, symbols, totient


class FieldError(ValueError):
    pass


class CoxeterMatrixError(ValueError):
    pass


def validate_coxeter_matrix(m) -> list[list[int]]:
    rows = [list(map(int, row)) for row in m]
    r = len(rows)
    if r == 0:
        raise CoxeterMatrixError("empty Coxeter matrix")
    for i, row in enumerate(rows):
        if len(row) != r:
            raise CoxeterMatrixError(f"row {i} has length {len(row)}, expected {r}")
        if row[i] != 1:
            raise CoxeterMatrixError(f"diagonal entry ({i},{i}) is {row[i]}, expected 1")
        for j, mij in enumerate(row):
            if mij != rows[j][i]:
                raise CoxeterMatrixError(f"matrix not symmetric at ({i},{j})")
            if i != j and (mij == 1 or mij < 0):
                raise CoxeterMatrixError(
                    f"off-diagonal entry ({i},{j}) = {mij}; use >= 2 or 0 for infinity"
                )
    return rows


@dataclass(frozen=True)
class FieldSpec:
    """The field Q(zeta) with zeta a primitive 2N-th root of unity."""

    conductor: int
    ambient_degree: int
    modulus: tuple[int, ...]  # Phi_2N, low degree first, monic
    _reduction: tuple = field(default=(), repr=False, compare=False)

    @classmethod
    def from_conductor(cls, n: int) -> FieldSpec:
        if n < 1:
            raise FieldError("conductor must be positive")
        x = symbols("x")
        coeffs = Poly(cyclotomic_poly(2 * n, x), x).all_coeffs()[::-1]
        modulus = tuple(int(c) for c in coeffs)
        deg = int(totient(2 * n))
        assert len(modulus) == deg + 1 and modulus[-1] == 1
        # z^k for k < 2*deg - 1 expressed in the power basis
        red = []
        for k in range(2 * deg - 1):
            if k < deg:
                v = [0] * deg
                v[k] = 1
            else:
                prev = red[k - 1]
                top = prev[-1]
                v = [0] + list(prev[:-1])
                for i in range(deg):
                    v[i] -= top * modulus[i]
            red.append(tuple(v))
        return cls(n, deg, modulus, tuple(red))

    @property
    def is_rational(self) -> bool:
        return self.ambient_degree == 1

    def zero(self) -> FieldElement:
        return FieldElement(self, (Fraction(0),) * self.ambient_degree)

    def one(self) -> FieldElement:
        return self(1)

    def __call__(self, value) -> FieldElement:
        if isinstance(value, FieldElement):
            if value.spec != self:
                raise FieldError("element belongs to a different field")
            return value
        c = [Fraction(0)] * self.ambient_degree
        c[0] = Fraction(value)
        return FieldElement(self, tuple(c))

    def zeta_power(self, k: int) -> FieldElement:
        k %= 2 * self.conductor
        c = [Fraction(0)] * self.ambient_degree
        if self.ambient_degree == 1:
            # z = -1
            c[0] = Fraction(-1 if k % 2 else 1)
            return FieldElement(self, tuple(c))
        # z^N = -1, so reduce to k < N with a sign
        sign = 1
        if k >= self.conductor:
            k -= self.conductor
            sign = -1
        if k < len(self._reduction):
            return FieldElement(self, tuple(Fraction(sign * a) for a in self._reduction[k]))
        e = FieldElement(self, tuple(Fraction(int(i == 1)) for i in range(self.ambient_degree)))
        out = self(sign)
        for _ in range(k):
            out = out * e
        return out

    def two_cos(self, m: int) -> FieldElement:
        """2cos(pi/m) as z^(N/m) + z^(-N/m); needs m | N unless cos is rational."""
        if m == 2:
            return self(0)
        if m == 3:
            return self(1)
        if self.conductor % m:
            raise FieldError(f"2cos(pi/{m}) not in the field of conductor {self.conductor}")
        k = self.conductor // m
        return self.zeta_power(k) + self.zeta_power(-k)

    def from_coeffs(self, coeffs) -> FieldElement:
        c = tuple(Fraction(a) for a in coeffs)
        if len(c) != self.ambient_degree:
            raise FieldError("wrong number of coefficients")
        return FieldElement(self, c)


def build_field(coxeter_matrix) -> FieldSpec:
    rows = validate_coxeter_matrix(coxeter_matrix)
    n = 1
    for i, row in enumerate(rows):
        for j, mij in enumerate(row):
            # cos(pi/2) and cos(pi/3) are rational; 0 is the infinity marker
            if i != j and mij >= 4:
                n = lcm(n, mij)
    return FieldSpec.from_conductor(n)


class FieldElement:
    __slots__ = ("spec", "coeffs", "__weakref__")

    def __init__(self, spec: FieldSpec, coeffs: tuple[Fraction, ...]):
        self.spec = spec
        self.coeffs = coeffs

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.spec is not self.spec and other.spec != self.spec:
                raise FieldError("mismatched fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.spec(other)
        return NotImplemented

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self) -> int:
        if self.spec.ambient_degree == 1 or not any(self.coeffs[1:]):
            return hash(self.coeffs[0])
        return hash(self.coeffs)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return FieldElement(self.spec, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.spec, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return FieldElement(self.spec, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.spec, tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        deg = self.spec.ambient_degree
        if deg == 1:
            return FieldElement(self.spec, (self.coeffs[0] * o.coeffs[0],))
        prod = [Fraction(0)] * (2 * deg - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        prod[i + j] += a * b
        out = prod[:deg]
        red = self.spec._reduction
        for k in range(deg, 2 * deg - 1):
            c = prod[k]
            if c:
                for i, rk in enumerate(red[k]):
                    if rk:
                        out[i] += c * rk
        return FieldElement(self.spec, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise ZeroDivisionError("division by zero in field")
        deg = self.spec.ambient_degree
        if deg == 1:
            return FieldElement(self.spec, (1 / self.coeffs[0],))
        # columns: self * z^k; solve for c with (self * c) = 1
        cols = [(self * self.spec.zeta_power(k)).coeffs for k in range(deg)]
        aug = [[cols[k][i] for k in range(deg)] + [Fraction(int(i == 0))] for i in range(deg)]
        for c in range(deg):
            p = next(i for i in range(c, deg) if aug[i][c])
            aug[c], aug[p] = aug[p], aug[c]
            inv = 1 / aug[c][c]
            aug[c] = [a * inv for a in aug[c]]
            for i in range(deg):
                if i != c and aug[i][c]:
                    f = aug[i][c]
                    aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
        return FieldElement(self.spec, tuple(aug[i][deg] for i in range(deg)))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.spec.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> FieldElement:
        """Image under z -> z^-1."""
        if self.spec.ambient_degree == 1:
            return self
        out = self.spec.zero()
        for k, a in enumerate(self.coeffs):
            if a:
                out = out + self.spec.zeta_power(-k) * a
        return out

    def is_real(self) -> bool:
        return self.conjugate() == self

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise FieldError(f"{self} is not rational")
        return self.coeffs[0]

    def to_complex(self, dps: int = 30) -> mpmath.mpc:
        with mpmath.workdps(dps):
            z = mpmath.expjpi(mpmath.mpf(1) / self.spec.conductor)
            return mpmath.fsum(mpmath.mpf(a.numerator) / a.denominator * z**k
                               for k, a in enumerate(self.coeffs))

    def __float__(self) -> float:
        return float(self.real_value())

    def real_value(self, dps: int = 30) -> mpmath.mpf:
        return mpmath.re(self.to_complex(dps))

    def sign(self) -> int:
        """Sign of a real element, certified by raising precision until clear of zero."""
        if self.is_zero():
            return 0
        if self.is_rational():
            return (self.coeffs[0] > 0) - (self.coeffs[0] < 0)
        if not self.is_real():
            raise FieldError("sign of a non-real element")
        dps = 30
        while True:
            val = self.real_value(dps)
            if abs(val) > mpmath.mpf(10) ** (-(dps - 10)):
                return 1 if val > 0 else -1
            dps *= 2

    def key(self) -> tuple:
        return self.coeffs

    def __repr__(self) -> str:
        if self.is_rational():
            return str(self.coeffs[0])
        terms = []
        for k, a in enumerate(self.coeffs):
            if a:
                terms.append(f"{a}" if k == 0 else f"{a}*z^{k}")
        return "(" + " + ".join(terms) + ")"


def arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    if a.spec != b.spec:
        raise FieldError("mismatched fields")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")

