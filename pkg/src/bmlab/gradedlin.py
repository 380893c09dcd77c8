"""Graded linear algebra over S = Sym(V), V in degree 2.

A free module sum_j S{-g_j} (or its quotient by a root) is handled one degree at
a time: the degree-d part has a monomial basis, and every K-vector space is
expanded to a Q-vector space through the power basis of the field, so that all
elimination runs over Q.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations_with_replacement
from math import comb

from flint import fmpq, fmpq_mat

from . import linalg
from .coxeter import ConsistencyError, field_rank
from .exactfield import FieldElement, FieldSpec

log = logging.getLogger(__name__)

Mono = tuple[int, ...]
Poly = dict  # Mono -> FieldElement


class NotStableError(ValueError):
    """Subspace family is not closed under multiplication by V."""


class NotInjectiveError(ValueError):
    pass


# -- polynomials ------------------------------------------------------------

@lru_cache(maxsize=None)
def monomials(r: int, n: int, skip: int | None = None) -> tuple[Mono, ...]:
    """Exponent vectors of degree n in r variables (variable `skip` excluded), lex descending."""
    if n < 0:
        return ()
    vars_ = [i for i in range(r) if i != skip]
    out = set()
    for combo in combinations_with_replacement(vars_, n):
        e = [0] * r
        for i in combo:
            e[i] += 1
        out.add(tuple(e))
    return tuple(sorted(out, reverse=True))


def num_monomials(r: int, n: int) -> int:
    if n < 0 or r < 0:
        return 0
    if r == 0:
        return int(n == 0)
    return comb(n + r - 1, r - 1)


def mono_mul(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def poly_add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for m, c in q.items():
        if m in out:
            s = out[m] + c
            if s.is_zero():
                del out[m]
            else:
                out[m] = s
        else:
            out[m] = c
    return out


def poly_scale(p: Poly, c: FieldElement) -> Poly:
    if c.is_zero():
        return {}
    return {m: a * c for m, a in p.items()}


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, a in p.items():
        for m2, b in q.items():
            m = mono_mul(m1, m2)
            c = a * b
            if m in out:
                out[m] = out[m] + c
            else:
                out[m] = c
    return {m: c for m, c in out.items() if not c.is_zero()}


def poly_shift(p: Poly, mono: Mono) -> Poly:
    return {mono_mul(m, mono): c for m, c in p.items()}


def poly_degree(p: Poly) -> int | None:
    """Polynomial degree of a homogeneous polynomial (None for zero)."""
    degs = {sum(m) for m in p}
    if not degs:
        return None
    if len(degs) > 1:
        raise ValueError("polynomial is not homogeneous")
    return degs.pop()


def linear_form(root) -> Poly:
    r = len(root)
    out = {}
    for i, c in enumerate(root):
        if not c.is_zero():
            e = [0] * r
            e[i] = 1
            out[tuple(e)] = c
    return out


def poly_eval(p: Poly, point, spec: FieldSpec) -> FieldElement:
    acc = spec.zero()
    for m, c in p.items():
        term = c
        for x, e in zip(point, m):
            if e:
                term = term * (Fraction(x) ** e)
        acc = acc + term
    return acc


class Annihilator:
    """Quotient S -> S/alpha by eliminating the last variable with nonzero coefficient in alpha."""

    def __init__(self, root):
        self.root = tuple(root)
        self.r = len(self.root)
        nz = [i for i, c in enumerate(self.root) if not c.is_zero()]
        if not nz:
            raise ValueError("zero root")
        self.pivot = nz[-1]
        lead = self.root[self.pivot]
        self.subst: Poly = {}
        for i in nz[:-1]:
            e = [0] * self.r
            e[i] = 1
            self.subst[tuple(e)] = -(self.root[i] / lead)
        self._cache: dict[Mono, Poly] = {}

    @property
    def key(self) -> tuple:
        return tuple(c.coeffs for c in self.root)

    def reduce_mono(self, m: Mono) -> Poly:
        hit = self._cache.get(m)
        if hit is not None:
            return hit
        p = self.pivot
        if m[p] == 0:
            out = {m: self.root[0].spec.one()}
        else:
            lower = list(m)
            lower[p] -= 1
            out = poly_mul(self.reduce_mono(tuple(lower)), self.subst)
        self._cache[m] = out
        return out

    def reduce(self, poly: Poly) -> Poly:
        out: Poly = {}
        for m, c in poly.items():
            out = poly_add(out, poly_scale(self.reduce_mono(m), c))
        return out

    def is_reduced(self, poly: Poly) -> bool:
        return all(m[self.pivot] == 0 for m in poly)


# -- graded multisets and ambient modules --------------------------------------

@dataclass(frozen=True)
class GradedMultiset:
    """Generator degrees of a graded free module sum_i S{-d_i}."""

    degrees: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(sorted(self.degrees)))

    def __len__(self) -> int:
        return len(self.degrees)

    def __iter__(self):
        return iter(self.degrees)

    @property
    def rank(self) -> int:
        return len(self.degrees)

    def mirrored(self, total: int) -> GradedMultiset:
        return GradedMultiset(tuple(total - g for g in self.degrees))

    def rank_poly(self) -> dict[int, int]:
        """Exponent -> multiplicity of sum v^d_i."""
        out: dict[int, int] = {}
        for g in self.degrees:
            out[g] = out.get(g, 0) + 1
        return out


def degree_dim(module, r: int, d: int) -> tuple[int, list[tuple[int, Mono]]]:
    """Dimension of (sum_i S{-g_i})_d and its basis of (generator, monomial) pairs."""
    gens = module.degrees if isinstance(module, GradedMultiset) else tuple(module)
    basis = []
    for j, g in enumerate(gens):
        if (d - g) % 2 == 0 and d >= g:
            basis.extend((j, m) for m in monomials(r, (d - g) // 2))
    return len(basis), basis


class Ambient:
    """sum_j S{-g_j}, optionally modulo alpha, with Q-coordinates in each degree.

    Q-coordinate layout in degree d: basis index * D + power of zeta.
    """

    def __init__(self, spec: FieldSpec, r: int, gens, annihilator: Annihilator | None = None):
        self.spec = spec
        self.r = r
        self.gens = tuple(gens)
        self.ann = annihilator
        self.D = spec.ambient_degree
        self._basis: dict[int, list] = {}
        self._pos: dict[int, dict] = {}
        self._mulvar: dict[tuple[int, int], fmpq_mat] = {}

    def basis(self, d: int) -> list[tuple[int, Mono]]:
        b = self._basis.get(d)
        if b is None:
            skip = self.ann.pivot if self.ann is not None else None
            b = []
            for j, g in enumerate(self.gens):
                if d >= g and (d - g) % 2 == 0:
                    b.extend((j, m) for m in monomials(self.r, (d - g) // 2, skip))
            self._basis[d] = b
            self._pos[d] = {key: k for k, key in enumerate(b)}
        return b

    def pos(self, d: int) -> dict:
        self.basis(d)
        return self._pos[d]

    def dim(self, d: int) -> int:
        return len(self.basis(d))

    def qdim(self, d: int) -> int:
        return self.dim(d) * self.D

    def degrees_upto(self, cap: int) -> list[int]:
        if not self.gens:
            return []
        return [d for d in range(min(self.gens), cap + 1) if self.dim(d)]

    def vector(self, elem, d: int) -> list[Fraction]:
        """Q-coordinates of a module element given as one polynomial per generator."""
        out = [Fraction(0)] * self.qdim(d)
        pos = self.pos(d)
        D = self.D
        for j, p in enumerate(elem):
            if not p:
                continue
            if self.ann is not None:
                p = self.ann.reduce(p)
            for m, c in p.items():
                k = pos.get((j, m))
                if k is None:
                    raise ValueError(f"term {m} of generator {j} not in degree {d}")
                for t, a in enumerate(c.coeffs):
                    out[k * D + t] += a
        return out

    def element(self, vec, d: int) -> list[Poly]:
        """Inverse of vector(): Q-coordinates (fmpq or Fraction) to polynomials."""
        D = self.D
        elem: list[Poly] = [{} for _ in self.gens]
        for k, (j, m) in enumerate(self.basis(d)):
            coeffs = vec[k * D:(k + 1) * D]
            if any(coeffs):
                c = self.spec.from_coeffs([_frac(x) for x in coeffs])
                elem[j][m] = c
        return elem

    def mulvar(self, i: int, d: int) -> fmpq_mat:
        """Multiplication by the i-th simple root, degree d -> d+2, rows = source coordinates."""
        key = (i, d)
        hit = self._mulvar.get(key)
        if hit is not None:
            return hit
        src = self.basis(d)
        tgt_pos = self.pos(d + 2)
        D = self.D
        entries = {}
        e = [0] * self.r
        e[i] = 1
        e = tuple(e)
        for k, (j, m) in enumerate(src):
            prod = mono_mul(m, e)
            if self.ann is not None and prod[self.ann.pivot]:
                red = self.ann.reduce_mono(prod)
            else:
                red = {prod: self.spec.one()}
            for mm, c in red.items():
                kk = tgt_pos[(j, mm)]
                blk = field_block(c)
                for t in range(D):
                    for u in range(D):
                        if blk[t][u]:
                            entries[(k * D + t, kk * D + u)] = blk[t][u]
        mat = linalg.from_sparse(len(src) * D, self.qdim(d + 2), entries)
        self._mulvar[key] = mat
        return mat

    def times_zeta(self, rows: fmpq_mat, power: int) -> fmpq_mat:
        """Multiply every coordinate block by zeta^power."""
        if self.D == 1:
            return rows
        blk = field_block(self.spec.zeta_power(power))
        D = self.D
        n, c = rows.nrows(), rows.ncols()
        flat = rows.entries()
        out = []
        for i in range(n):
            row = flat[i * c:(i + 1) * c]
            new = [fmpq(0)] * c
            for b in range(c // D):
                for t in range(D):
                    v = row[b * D + t]
                    if v:
                        for u in range(D):
                            if blk[t][u]:
                                new[b * D + u] += v * linalg.q(blk[t][u])
            out.extend(new)
        return fmpq_mat(n, c, out)


def _frac(x) -> Fraction:
    if isinstance(x, fmpq):
        return Fraction(int(x.p), int(x.q))
    return Fraction(x)


_block_cache: dict = {}


def field_block(c: FieldElement) -> list[list[Fraction]]:
    """Row t = coordinates of zeta^t * c, so coords(v) @ block = coords(v * c)."""
    key = (c.spec.conductor, c.coeffs)
    hit = _block_cache.get(key)
    if hit is None:
        if c.spec.ambient_degree == 1:
            hit = [[c.coeffs[0]]]
        else:
            hit = [list((c.spec.zeta_power(t) * c).coeffs) for t in range(c.spec.ambient_degree)]
        _block_cache[key] = hit
    return hit


# -- maps ----------------------------------------------------------------------

class PolyMap:
    """Degree-0 map between graded free modules given by homogeneous polynomial entries.

    entries[(i, j)] is the coefficient of target generator i in the image of
    source generator j; with an annihilator the target is taken modulo alpha and
    entries are stored reduced.
    """

    def __init__(self, spec: FieldSpec, r: int, source, target, entries, annihilator=None):
        self.spec = spec
        self.r = r
        self.source = GradedMultiset(tuple(source)) if not isinstance(source, GradedMultiset) else source
        self.target = GradedMultiset(tuple(target)) if not isinstance(target, GradedMultiset) else target
        if list(self.source.degrees) != list(source):
            raise ValueError("source degrees must be sorted")
        if list(self.target.degrees) != list(target):
            raise ValueError("target degrees must be sorted")
        self.ann = annihilator
        clean = {}
        for (i, j), p in entries.items():
            if annihilator is not None:
                p = annihilator.reduce(p)
            p = {m: c for m, c in p.items() if not c.is_zero()}
            if p:
                deg = poly_degree(p)
                if 2 * deg != self.source.degrees[j] - self.target.degrees[i]:
                    raise ValueError(f"entry ({i},{j}) has the wrong degree")
                clean[(i, j)] = p
        self.entries: dict[tuple[int, int], Poly] = clean
        self._mats: dict[int, fmpq_mat] = {}

    @cached_property
    def source_ambient(self) -> Ambient:
        return Ambient(self.spec, self.r, self.source.degrees)

    @cached_property
    def target_ambient(self) -> Ambient:
        return Ambient(self.spec, self.r, self.target.degrees, self.ann)

    def column(self, j: int) -> list[Poly]:
        return [self.entries.get((i, j), {}) for i in range(len(self.target))]

    def matrix(self, d: int) -> fmpq_mat:
        hit = self._mats.get(d)
        if hit is not None:
            return hit
        src = self.source_ambient.basis(d)
        tgt = self.target_ambient
        tpos = tgt.pos(d)
        D = self.spec.ambient_degree
        entries: dict = {}
        by_col: dict[int, list] = {}
        for (i, j), p in self.entries.items():
            by_col.setdefault(j, []).append((i, p))
        for k, (j, m) in enumerate(src):
            for i, p in by_col.get(j, ()):
                if self.ann is not None:
                    img = poly_mul(self.ann.reduce_mono(m), p)
                else:
                    img = poly_shift(p, m)
                for mm, c in img.items():
                    kk = tpos[(i, mm)]
                    blk = field_block(c)
                    for t in range(D):
                        for u in range(D):
                            if blk[t][u]:
                                key = (k * D + t, kk * D + u)
                                entries[key] = entries.get(key, 0) + blk[t][u]
        mat = linalg.from_sparse(len(src) * D, tgt.qdim(d), entries)
        self._mats[d] = mat
        return mat

    def apply(self, elem: list[Poly]) -> list[Poly]:
        out = [{} for _ in self.target]
        for (i, j), p in self.entries.items():
            if elem[j]:
                out[i] = poly_add(out[i], poly_mul(elem[j], p))
        if self.ann is not None:
            out = [self.ann.reduce(p) for p in out]
        return out

    def to_json(self) -> dict:
        return {
            "source": list(self.source.degrees),
            "target": list(self.target.degrees),
            "annihilator": None if self.ann is None else [list(map(str, c.coeffs)) for c in self.ann.root],
            "entries": [
                {"i": i, "j": j, "terms": [[list(m), [str(a) for a in c.coeffs]] for m, c in sorted(p.items())]}
                for (i, j), p in sorted(self.entries.items())
            ],
        }


# -- generators of graded submodules --------------------------------------------

@dataclass
class Generators:
    degrees: GradedMultiset
    vectors: list[tuple[int, list]]  # (degree, Q-coordinates of a K-generator)
    flagged: list[int] = field(default_factory=list)  # generator degrees inside the margin window


def v_times(ambient: Ambient, space: fmpq_mat, d: int) -> fmpq_mat:
    """Q-span of V * space, space sitting in degree d."""
    if space.nrows() == 0:
        return fmpq_mat(0, ambient.qdim(d + 2))
    parts = [space * ambient.mulvar(i, d) for i in range(ambient.r)]
    return linalg.row_basis(linalg.stack(parts, ambient.qdim(d + 2)))


def choose_complement(ambient: Ambient, space: fmpq_mat, sub: fmpq_mat) -> list[list]:
    """K-independent vectors of `space` completing the K-subspace `sub` to `space`."""
    D = ambient.D
    target = space.nrows()
    cur = sub
    picked = []
    rows = linalg.rows_of(space)
    for row in rows:
        if cur.nrows() == target:
            break
        cand = fmpq_mat(1, space.ncols(), row)
        trial = linalg.stack([cur, cand], space.ncols())
        if linalg.rank(trial) == cur.nrows():
            continue
        orbit = [cand] + [ambient.times_zeta(cand, t) for t in range(1, D)]
        cur = linalg.row_basis(linalg.stack([cur] + orbit, space.ncols()))
        picked.append(row)
    if cur.nrows() != target:
        raise ConsistencyError("complement selection failed to exhaust the space")
    return picked


def minimal_generators(ambient: Ambient, image: dict[int, fmpq_mat], cap: int,
                       flag_above: int | None = None) -> Generators:
    """Minimal generator degrees of the submodule with degree-d parts image[d], d <= cap."""
    degrees = []
    vectors = []
    flagged = []
    for d in sorted({k for k in image} | {k + 2 for k in image}):
        if d > cap:
            continue
        space = image.get(d)
        if space is None:
            space = fmpq_mat(0, ambient.qdim(d))
        prev = image.get(d - 2)
        sub = v_times(ambient, prev, d - 2) if prev is not None else fmpq_mat(0, space.ncols())
        if sub.nrows() and (space.nrows() < sub.nrows() or not linalg.contains(space, sub)):
            raise NotStableError(f"V * image in degree {d - 2} escapes image in degree {d}")
        extra = space.nrows() - sub.nrows()
        if extra == 0:
            continue
        if extra % ambient.D:
            raise ConsistencyError("subspace is not stable under the field")
        picked = choose_complement(ambient, space, sub)
        for row in picked:
            degrees.append(d)
            vectors.append((d, row))
            if flag_above is not None and d > flag_above:
                flagged.append(d)
    if flagged:
        log.warning("generators found inside the margin window at degrees %s", flagged)
    return Generators(GradedMultiset(tuple(degrees)), vectors, flagged)


def generated_span(ambient: Ambient, gens: list[tuple[int, list]], cap: int) -> dict[int, fmpq_mat]:
    """Degree-wise Q-bases (d <= cap) of the submodule generated by the given K-vectors."""
    out: dict[int, fmpq_mat] = {}
    by_deg: dict[int, list] = {}
    for d, row in gens:
        by_deg.setdefault(d, []).append(row)
    lo = min(ambient.gens) if ambient.gens else 0
    for d in range(lo, cap + 1):
        n = ambient.qdim(d)
        parts = []
        if d - 2 in out:
            parts.append(v_times(ambient, out[d - 2], d - 2))
        for row in by_deg.get(d, ()):
            cand = fmpq_mat(1, n, [linalg.q(x) for x in row])
            parts.append(cand)
            for t in range(1, ambient.D):
                parts.append(ambient.times_zeta(cand, t))
        space = linalg.row_basis(linalg.stack(parts, n)) if parts else fmpq_mat(0, n)
        if space.nrows():
            out[d] = space
    return out


def truncation(ambient: Ambient, gens: list[tuple[int, list]], k: int, cap: int) -> dict[int, fmpq_mat]:
    """M_{<=k}: the submodule generated by the generators of degree <= k."""
    return generated_span(ambient, [(d, v) for d, v in gens if d <= k], cap)


def free_generators(ambient: Ambient) -> list[tuple[int, list]]:
    """Unit generators of a free ambient module as K-vectors."""
    out = []
    zero_mono = (0,) * ambient.r
    for j, g in enumerate(ambient.gens):
        elem = [{} for _ in ambient.gens]
        elem[j] = {zero_mono: ambient.spec.one()}
        out.append((g, ambient.vector(elem, g)))
    return out


@dataclass
class KernelResult:
    degrees: GradedMultiset
    inclusion: PolyMap  # kernel generators -> source of the map
    spaces: dict[int, fmpq_mat]  # degree-wise kernel bases
    flagged: list[int] = field(default_factory=list)


def kernel_spaces(pmap: PolyMap, cap: int) -> dict[int, fmpq_mat]:
    out = {}
    src = pmap.source_ambient
    for d in src.degrees_upto(cap):
        mat = pmap.matrix(d)
        if mat.ncols() == 0:
            ker = linalg.identity(mat.nrows())
        else:
            ker = linalg.nullspace(mat.transpose())
        if ker.nrows():
            out[d] = ker
    return out


def kernel_generators(pmap: PolyMap, cap: int, flag_above: int | None = None) -> KernelResult:
    spaces = kernel_spaces(pmap, cap)
    src = pmap.source_ambient
    gens = minimal_generators(src, spaces, cap, flag_above)
    entries = {}
    for j, (d, row) in enumerate(gens.vectors):
        elem = src.element(row, d)
        for i, p in enumerate(elem):
            if p:
                entries[(i, j)] = p
    incl = PolyMap(pmap.spec, pmap.r, gens.degrees.degrees, pmap.source.degrees, entries)
    return KernelResult(gens.degrees, incl, spaces, gens.flagged)


# -- specialization to a line ------------------------------------------------------

@dataclass(frozen=True)
class Line:
    """A point p of V*; S -> K[T] sends a root alpha to alpha(p) T."""

    point: tuple[Fraction, ...]
    spec: FieldSpec

    def value(self, root) -> FieldElement:
        acc = self.spec.zero()
        for c, x in zip(root, self.point):
            if x:
                acc = acc + c * Fraction(x)
        return acc

    def evaluate(self, poly: Poly) -> FieldElement:
        """Coefficient c with rho(poly) = c T^deg."""
        return poly_eval(poly, self.point, self.spec)

    def is_valid(self, roots) -> bool:
        return all(not self.value(a).is_zero() for a in roots)


def specialize_to_line(spec: FieldSpec, r: int, labels, seed: int = 0, point=None) -> Line:
    """Seeded rejection sampling of a point avoiding every given root hyperplane."""
    labels = list(labels)
    if point is not None:
        line = Line(tuple(Fraction(x) for x in point), spec)
        if not line.is_valid(labels):
            raise ValueError(f"point {point} lies on a root hyperplane")
        return line
    rng = random.Random(seed)
    width = 3
    tries = 0
    while True:
        p = tuple(Fraction(rng.randint(-width, width)) for _ in range(r))
        if any(p):
            line = Line(p, spec)
            if line.is_valid(labels):
                return line
        tries += 1
        if tries % 20 == 0:
            width *= 2


@dataclass
class SpecializedMatrix:
    """A graded map of free K[T]-modules, deg T = 2: entry (i, j) is coeffs[i][j] * T^((s_j - t_i)/2)."""

    source: GradedMultiset
    target: GradedMultiset
    coeffs: list[list[FieldElement]]
    line: Line | None = None

    def exponent(self, i: int, j: int) -> int | None:
        diff = self.source.degrees[j] - self.target.degrees[i]
        if diff < 0 or diff % 2:
            return None
        return diff // 2

    @classmethod
    def from_polymap(cls, pmap: PolyMap, line: Line) -> SpecializedMatrix:
        if pmap.ann is not None:
            raise ValueError("cannot specialize a map into a quotient")
        zero = pmap.spec.zero()
        coeffs = [[zero] * len(pmap.source) for _ in pmap.target]
        for (i, j), p in pmap.entries.items():
            coeffs[i][j] = line.evaluate(p)
        return cls(pmap.source, pmap.target, coeffs, line)

    def degree_block(self, d: int) -> tuple[list[int], list[int]]:
        rows = [i for i, t in enumerate(self.target.degrees) if t <= d and (d - t) % 2 == 0]
        cols = [j for j, s in enumerate(self.source.degrees) if s <= d and (d - s) % 2 == 0]
        return rows, cols

    def cokernel_dim(self, d: int) -> int:
        rows, cols = self.degree_block(d)
        if not rows:
            return 0
        sub = [[self.coeffs[i][j] for i in rows] for j in cols]
        return len(rows) - (field_rank(sub) if sub else 0)

    def degree_span(self) -> tuple[int, int]:
        degs = list(self.target.degrees) + list(self.source.degrees)
        return (min(degs), max(degs)) if degs else (0, -1)


@dataclass(frozen=True)
class TorsionDecomposition:
    """Summands K[T]/T^(n+1) generated in degree g, stored as sorted (g, n) pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))

    @property
    def total_dim(self) -> int:
        return sum(n + 1 for _, n in self.pairs)

    def dim(self, d: int) -> int:
        return sum(1 for g, n in self.pairs if g <= d <= g + 2 * n and (d - g) % 2 == 0)

    def t_power_rank(self, d: int, m: int) -> int:
        """Rank of T^m from degree d to degree d + 2m."""
        return sum(1 for g, n in self.pairs if g <= d and d + 2 * m <= g + 2 * n and (d - g) % 2 == 0)

    def degrees(self) -> list[int]:
        out = set()
        for g, n in self.pairs:
            out.update(range(g, g + 2 * n + 1, 2))
        return sorted(out)

    def to_json(self) -> list[dict]:
        return [{"gen_degree": g, "length": n + 1} for g, n in self.pairs]


def graded_torsion_decomposition(m: SpecializedMatrix) -> TorsionDecomposition:
    """Cokernel of an injective graded map of free K[T]-modules via homogeneous Smith reduction."""
    nt, ns = len(m.target), len(m.source)
    if nt != ns:
        raise NotInjectiveError(f"ranks differ: source {ns}, target {nt}")
    c = [row[:] for row in m.coeffs]
    for i in range(nt):
        for j in range(ns):
            if m.exponent(i, j) is None and not c[i][j].is_zero():
                raise ValueError(f"entry ({i},{j}) is not homogeneous")
    rows_left = set(range(nt))
    cols_left = set(range(ns))
    pairs = []
    while cols_left:
        best = None
        for j in sorted(cols_left):
            for i in sorted(rows_left):
                if not c[i][j].is_zero():
                    e = m.exponent(i, j)
                    if best is None or e < best[0]:
                        best = (e, i, j)
        if best is None:
            raise NotInjectiveError("specialized map has a kernel")
        e, i, j = best
        piv_inv = c[i][j].inverse()
        for i2 in rows_left:
            if i2 != i and not c[i2][j].is_zero():
                f = c[i2][j] * piv_inv
                for k in cols_left:
                    if not c[i][k].is_zero():
                        c[i2][k] = c[i2][k] - f * c[i][k]
        for k in cols_left:
            if k != j:
                c[i][k] = c[i][k] * 0
        rows_left.discard(i)
        cols_left.discard(j)
        if e > 0:
            pairs.append((m.target.degrees[i], e - 1))
    decomp = TorsionDecomposition(tuple(pairs))
    lo, hi = m.degree_span()
    for d in range(lo, hi + 1):
        direct = m.cokernel_dim(d)
        if direct != decomp.dim(d):
            raise ConsistencyError(
                f"Hilbert function mismatch in degree {d}: direct {direct}, decomposition {decomp.dim(d)}"
            )
    return decomp
