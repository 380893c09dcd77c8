"""Hecke algebra over Z[v, v^-1] and the Kazhdan-Lusztig basis.

Conventions: T_s^2 = v^-2 T_e + (v^-2 - 1) T_s, Tt_x = v^l(x) T_x, and the
bar involution sends v to v^-1 and T_w to (T_{w^-1})^-1.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .coxeter import Ball, BallTooSmall, ConsistencyError


class LaurentPoly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        if terms is None:
            terms = {}
        elif isinstance(terms, int):
            terms = {0: terms} if terms else {}
        self.terms: dict[int, int] = {k: c for k, c in terms.items() if c}

    @classmethod
    def monomial(cls, exp: int, coeff: int = 1) -> LaurentPoly:
        return cls({exp: coeff})

    @classmethod
    def from_coeffs(cls, coeffs, low: int = 0) -> LaurentPoly:
        return cls({low + i: c for i, c in enumerate(coeffs)})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentPoly(other)
        return isinstance(other, LaurentPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __add__(self, other) -> LaurentPoly:
        if isinstance(other, int):
            other = LaurentPoly(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> LaurentPoly:
        if isinstance(other, int):
            other = LaurentPoly(other)
        return self + (-other)

    def __rsub__(self, other) -> LaurentPoly:
        return (-self) + other

    def __mul__(self, other) -> LaurentPoly:
        if isinstance(other, int):
            return LaurentPoly({k: c * other for k, c in self.terms.items()})
        out: dict[int, int] = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                out[a + b] = out.get(a + b, 0) + c * d
        return LaurentPoly(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> LaurentPoly:
        """Multiply by v^k."""
        return LaurentPoly({e + k: c for e, c in self.terms.items()})

    def bar(self) -> LaurentPoly:
        return LaurentPoly({-e: c for e, c in self.terms.items()})

    def min_exp(self) -> int:
        return min(self.terms)

    def max_exp(self) -> int:
        return max(self.terms)

    def coeff(self, k: int) -> int:
        return self.terms.get(k, 0)

    def coeff_list(self) -> tuple[int, list[int]]:
        """(lowest exponent, dense coefficient list)."""
        if not self.terms:
            return 0, []
        lo, hi = self.min_exp(), self.max_exp()
        return lo, [self.terms.get(k, 0) for k in range(lo, hi + 1)]

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, reverse=True):
            c = self.terms[k]
            if k == 0:
                parts.append(str(c))
            else:
                mono = "v" if k == 1 else f"v^{k}"
                parts.append(mono if c == 1 else ("-" + mono if c == -1 else f"{c}*{mono}"))
        return " + ".join(parts).replace("+ -", "- ")


V = LaurentPoly.monomial(1)
ONE = LaurentPoly(1)


class HeckeElement:
    """Finite Z[v,v^-1]-combination of T_w (basis 'T') or Tt_w (basis 'Tt'), keyed by ball index."""

    __slots__ = ("ball", "coeffs", "basis")

    def __init__(self, ball: Ball, coeffs=None, basis: str = "T"):
        if basis not in ("T", "Tt"):
            raise ValueError("basis must be 'T' or 'Tt'")
        self.ball = ball
        self.basis = basis
        self.coeffs: dict[int, LaurentPoly] = {w: p for w, p in (coeffs or {}).items() if p}

    @classmethod
    def basis_element(cls, ball: Ball, w, basis: str = "T") -> HeckeElement:
        return cls(ball, {ball.idx(w): ONE}, basis)

    def to_T(self) -> HeckeElement:
        if self.basis == "T":
            return self
        return HeckeElement(self.ball, {w: p.shift(self.ball.lengths[w]) for w, p in self.coeffs.items()}, "T")

    def to_Tt(self) -> HeckeElement:
        if self.basis == "Tt":
            return self
        return HeckeElement(self.ball, {w: p.shift(-self.ball.lengths[w]) for w, p in self.coeffs.items()}, "Tt")

    def in_basis(self, basis: str) -> HeckeElement:
        return self.to_T() if basis == "T" else self.to_Tt()

    def __getitem__(self, w) -> LaurentPoly:
        return self.coeffs.get(self.ball.idx(w), LaurentPoly())

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeckeElement):
            return NotImplemented
        return self.ball is other.ball and self.to_T().coeffs == other.to_T().coeffs

    def __add__(self, other: HeckeElement) -> HeckeElement:
        a, b = self.to_T(), other.to_T()
        out = dict(a.coeffs)
        for w, p in b.coeffs.items():
            out[w] = out.get(w, LaurentPoly()) + p
        return HeckeElement(self.ball, out, "T").in_basis(self.basis)

    def __neg__(self) -> HeckeElement:
        return HeckeElement(self.ball, {w: -p for w, p in self.coeffs.items()}, self.basis)

    def __sub__(self, other: HeckeElement) -> HeckeElement:
        return self + (-other)

    def scale(self, p: LaurentPoly) -> HeckeElement:
        return HeckeElement(self.ball, {w: q * p for w, q in self.coeffs.items()}, self.basis)

    def __mul__(self, other):
        if isinstance(other, (LaurentPoly, int)):
            return self.scale(other if isinstance(other, LaurentPoly) else LaurentPoly(other))
        return multiply(self, other)

    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def __repr__(self) -> str:
        name = "T" if self.basis == "T" else "Tt"
        terms = [f"({p})*{name}[{self.ball.word(w)}]" for w, p in sorted(self.coeffs.items())]
        return " + ".join(terms) or "0"


def _right_mul_generator(ball: Ball, coeffs: dict[int, LaurentPoly], s: int) -> dict[int, LaurentPoly]:
    out: dict[int, LaurentPoly] = {}
    vm2 = LaurentPoly.monomial(-2)
    vm2m1 = LaurentPoly({-2: 1, 0: -1})

    def add(w, p):
        out[w] = out.get(w, LaurentPoly()) + p

    for w, p in coeffs.items():
        ws = ball.right[w][s]
        if ws is None:
            raise BallTooSmall(f"{ball.word(w)}*{ball.system.generators[s]} leaves the ball; enlarge it")
        if ball.lengths[ws] > ball.lengths[w]:
            add(ws, p)
        else:
            add(ws, p * vm2)
            add(w, p * vm2m1)
    return {w: p for w, p in out.items() if p}


def multiply(h: HeckeElement, g: HeckeElement) -> HeckeElement:
    if h.ball is not g.ball:
        raise ValueError("elements live over different balls")
    ball = h.ball
    a, b = h.to_T(), g.to_T()
    total: dict[int, LaurentPoly] = {}
    for y, q in b.coeffs.items():
        cur = {w: p * q for w, p in a.coeffs.items()}
        for s in ball.elements[y].word:
            cur = _right_mul_generator(ball, cur, s)
        for w, p in cur.items():
            total[w] = total.get(w, LaurentPoly()) + p
    return HeckeElement(ball, total, "T").in_basis(h.basis)


_lock = threading.Lock()


def _inverse_table(ball: Ball) -> dict[int, dict[int, LaurentPoly]]:
    tab = getattr(ball, "_hecke_inv_T", None)
    if tab is None:
        with _lock:
            tab = getattr(ball, "_hecke_inv_T", None)
            if tab is None:
                tab = {0: {0: ONE}}
                ball._hecke_inv_T = tab
    return tab


def inverse_T_of_inverse(ball: Ball, w: int) -> dict[int, LaurentPoly]:
    """(T_{w^-1})^-1 in the T basis, built along the reduced word of w."""
    tab = _inverse_table(ball)
    if w in tab:
        return tab[w]
    word = ball.elements[w].word
    prefix = ball.find_word(word[:-1])
    s = word[-1]
    prev = inverse_T_of_inverse(ball, prefix)
    # X * T_s^-1 = v^2 X T_s + (v^2 - 1) X
    xs = _right_mul_generator(ball, prev, s)
    out: dict[int, LaurentPoly] = {}
    for u, p in xs.items():
        out[u] = out.get(u, LaurentPoly()) + p.shift(2)
    for u, p in prev.items():
        out[u] = out.get(u, LaurentPoly()) + p * LaurentPoly({2: 1, 0: -1})
    out = {u: p for u, p in out.items() if p}
    with _lock:
        tab[w] = out
    return out


def bar_involution(h: HeckeElement) -> HeckeElement:
    ball = h.ball
    a = h.to_T()
    total: dict[int, LaurentPoly] = {}
    for w, p in a.coeffs.items():
        pb = p.bar()
        for u, q in inverse_T_of_inverse(ball, w).items():
            total[u] = total.get(u, LaurentPoly()) + pb * q
    return HeckeElement(ball, total, "T").in_basis(h.basis)


@dataclass
class KLData:
    x: int
    element: HeckeElement  # C'_x in the Tt basis
    h: dict[int, LaurentPoly]  # y -> h_{y,x}, support {y <= x}

    def P(self, y: int) -> list[int]:
        """Coefficients of P_{y,x}(q), with P(v^-2) = v^(l(y)-l(x)) h_{y,x}(v)."""
        ball = self.element.ball
        hy = self.h.get(y)
        if not hy:
            return []
        p = hy.shift(ball.lengths[y] - ball.lengths[self.x])
        out: dict[int, int] = {}
        for k, c in p.terms.items():
            if k > 0 or k % 2:
                raise ConsistencyError(f"h_{{y,x}} has unexpected exponent pattern: {hy}")
            out[-k // 2] = c
        return [out.get(i, 0) for i in range(max(out) + 1)]


def _cache(ball: Ball) -> dict:
    c = getattr(ball, "_kl_cache", None)
    if c is None:
        with _lock:
            c = getattr(ball, "_kl_cache", None)
            if c is None:
                c = ball._kl_cache = {}
    return c


def kl_basis(ball: Ball, x) -> KLData:
    """C'_x from self-duality, triangularity and h_{y,x} in vZ[v], solved down the Bruhat order."""
    xi = ball.idx(x)
    cache = _cache(ball)
    if xi in cache:
        return cache[xi]
    lower = ball.interval(xi)
    # bar(Tt_y) expanded in the Tt basis
    bar_tt: dict[int, dict[int, LaurentPoly]] = {}
    for y in lower:
        img = bar_involution(HeckeElement(ball, {y: ONE}, "Tt")).to_Tt()
        bar_tt[y] = img.coeffs
        if bar_tt[y].get(y) != ONE:
            raise ConsistencyError("bar involution is not unitriangular")
    h: dict[int, LaurentPoly] = {xi: ONE}
    for z in sorted(lower, key=lambda i: -ball.lengths[i]):
        if z == xi:
            continue
        rhs = LaurentPoly()
        for y, hy in h.items():
            c = bar_tt[y].get(z)
            if c:
                rhs = rhs + hy.bar() * c
        # rhs must equal h_z - bar(h_z) with h_z in vZ[v]
        pos = LaurentPoly({k: c for k, c in rhs.terms.items() if k > 0})
        if rhs != pos - pos.bar():
            raise ConsistencyError(f"self-duality system unsolvable at {ball.word(z)}")
        if pos:
            h[z] = pos
    for y in list(h):
        if not ball.leq(y, xi):
            raise ConsistencyError("KL element supported outside the lower interval")
    elem = HeckeElement(ball, dict(h), "Tt")
    if bar_involution(elem) != elem:
        raise ConsistencyError(f"C'_{ball.word(xi)} is not self-dual")
    data = KLData(xi, elem, h)
    with _lock:
        cache[xi] = data
    return data


def kl_table_json(ball: Ball, x) -> dict:
    d = kl_basis(ball, x)
    rows = {}
    for y in ball.interval(d.x):
        lo, coeffs = d.h.get(y, LaurentPoly()).coeff_list()
        rows[ball.word(y)] = {"low": lo, "coeffs": coeffs, "P": d.P(y)}
    return {"x": ball.word(d.x), "h": rows}
