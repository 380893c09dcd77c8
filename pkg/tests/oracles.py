"""Independent reference implementations used only by the tests."""

from __future__ import annotations

from bmlab.coxeter import mat_identity, mat_key, mat_mul
from bmlab.hecke import LaurentPoly

ONE = LaurentPoly({0: 1})
V = LaurentPoly({1: 1})
VINV_MINUS_V = LaurentPoly({-1: 1, 1: -1})


def subword_products(ball, y: int) -> set[int]:
    """Every element expressible as a subword of the stored reduced word of y."""
    reach = {0}
    for s in ball[y].word:
        reach |= {ball.right[w][s] for w in reach}
    return reach


def subword_leq(ball, x: int, y: int) -> bool:
    return x in subword_products(ball, y)


def reflection_keys(ball) -> set:
    """Conjugates w s w^-1 as matrix keys, built without any rank test."""
    sysm = ball.system
    keys = set()
    for w in ball:
        winv = mat_identity(sysm.field, sysm.rank)
        for s in reversed(w.word):
            winv = mat_mul(winv, sysm.simple_matrices[s])
        for s in range(sysm.rank):
            keys.add(mat_key(mat_mul(mat_mul(w.matrix, sysm.simple_matrices[s]), winv)))
    return keys


def pair_scan_edge_count(ball, x: int) -> int:
    """#{(a, b) in [e, x]^2 : l(a) < l(b), b a^-1 a reflection}."""
    refl = reflection_keys(ball)
    verts = [w for w in range(len(ball)) if subword_leq(ball, w, x)]
    n = 0
    for a in verts:
        ainv = ball[ball.inverse[a]].matrix
        for b in verts:
            if ball.lengths[b] > ball.lengths[a] and mat_key(mat_mul(ball[b].matrix, ainv)) in refl:
                n += 1
    return n


def _left_mul_Cs(ball, s: int, h: dict[int, LaurentPoly]) -> dict[int, LaurentPoly]:
    """(Tt_s + v) * h with Tt_s Tt_w = Tt_sw (sw > w) or Tt_sw + (v^-1 - v) Tt_w (sw < w)."""
    out: dict[int, LaurentPoly] = {}

    def add(w, p):
        out[w] = out.get(w, LaurentPoly()) + p

    for w, p in h.items():
        sw = ball.left[w][s]
        if sw is None:
            raise ValueError("ball too small for the oracle")
        add(sw, p)
        if ball.lengths[sw] < ball.lengths[w]:
            add(w, p * VINV_MINUS_V)
        add(w, p * V)
    return {w: p for w, p in out.items() if p}


def mu_recursion(ball, max_length: int) -> dict[int, dict[int, LaurentPoly]]:
    """C'_x for l(x) <= max_length via C'_s C'_w = C'_sw + sum_{z < w, sz < z} mu(z, w) C'_z."""
    order = sorted(range(len(ball)), key=lambda i: ball.lengths[i])
    C: dict[int, dict[int, LaurentPoly]] = {0: {0: ONE}}
    for x in order:
        lx = ball.lengths[x]
        if lx == 0 or lx > max_length:
            continue
        s = ball[x].word[0]
        w = ball.left[x][s]
        prod = _left_mul_Cs(ball, s, C[w])
        for z, hz in C[w].items():
            if z == w:
                continue
            mu = hz.coeff(1)
            if mu and ball.lengths[ball.left[z][s]] < ball.lengths[z]:
                for u, p in C[z].items():
                    prod[u] = prod.get(u, LaurentPoly()) - p * LaurentPoly({0: mu})
        C[x] = {u: p for u, p in prod.items() if p}
    return C
