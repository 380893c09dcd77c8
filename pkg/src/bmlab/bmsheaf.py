"""Braden-MacPherson sheaves on Bruhat graphs and their invariants.

Vertices are processed top-down. For each y < x the sections of the already
built part over {>y} are computed degree by degree, their image in the edge
modules at y is reduced to minimal generators, and those generators become the
stalk at y together with the maps rho_{y,E}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

from flint import fmpq_mat

from . import linalg
from .coxeter import Ball, ConsistencyError, MomentGraph, interval_graph
from .exactfield import FieldSpec
from .gradedlin import (
    Ambient,
    Annihilator,
    GradedMultiset,
    KernelResult,
    PolyMap,
    degree_dim,
    kernel_generators,
    minimal_generators,
)
from .hecke import HeckeElement, LaurentPoly

log = logging.getLogger(__name__)


class UpsetError(ValueError):
    pass


class SumAmbient(Ambient):
    """Direct sum of ambient modules; coordinates are concatenated part by part."""

    def __init__(self, parts: list[Ambient], spec: FieldSpec, r: int):
        super().__init__(spec, r, ())
        self.parts = parts
        self.gens = tuple(g for p in parts for g in p.gens)

    def basis(self, d):
        b = self._basis.get(d)
        if b is None:
            b = [(k, key) for k, p in enumerate(self.parts) for key in p.basis(d)]
            self._basis[d] = b
            self._pos[d] = {key: n for n, key in enumerate(b)}
        return b

    def offsets(self, d) -> list[int]:
        out, acc = [], 0
        for p in self.parts:
            out.append(acc)
            acc += p.qdim(d)
        return out

    def mulvar(self, i, d):
        key = (i, d)
        hit = self._mulvar.get(key)
        if hit is not None:
            return hit
        n, m = self.qdim(d), self.qdim(d + 2)
        out = fmpq_mat(n, m)
        ro, co = 0, 0
        for p in self.parts:
            blk = p.mulvar(i, d)
            c = blk.ncols()
            flat = blk.entries()
            for a in range(blk.nrows()):
                for b in range(c):
                    v = flat[a * c + b]
                    if v:
                        out[ro + a, co + b] = v
            ro += blk.nrows()
            co += c
        self._mulvar[key] = out
        return out


class SumMap:
    """Maps with a common source into a direct sum of targets."""

    def __init__(self, parts: list[PolyMap], source: GradedMultiset, spec: FieldSpec, r: int):
        self.parts = parts
        self.source = source
        self.spec = spec
        self.r = r
        self.source_ambient = Ambient(spec, r, source.degrees)

    def matrix(self, d):
        n = self.source_ambient.qdim(d)
        return linalg.hconcat([p.matrix(d) for p in self.parts], n)


@dataclass
class BMSheaf:
    ball: Ball
    x: int  # ball index of the apex
    graph: MomentGraph
    cap_margin: int
    stalks: list[GradedMultiset]  # per graph vertex
    rho_up: dict[int, PolyMap]  # edge index -> stalk(lower) -> stalk(upper)/alpha
    defects: list[GradedMultiset] = field(default_factory=list)
    defect_inclusions: list[PolyMap] = field(default_factory=list)
    cap_report: dict[int, dict] = field(default_factory=dict)
    delta_images: dict[int, dict] = field(default_factory=dict, repr=False, compare=False)

    @property
    def spec(self) -> FieldSpec:
        return self.ball.system.field

    @property
    def r(self) -> int:
        return self.ball.system.rank

    @property
    def top(self) -> int:
        return self.graph.position[self.x]

    @property
    def apex_length(self) -> int:
        return self.ball.lengths[self.x]

    def gap(self, v: int) -> int:
        return self.apex_length - self.graph.length(v)

    def vertex(self, word: str) -> int:
        return self.graph.position[self.ball.parse(word)]

    @cached_property
    def annihilators(self) -> dict[int, Annihilator]:
        cache: dict[tuple, Annihilator] = {}
        out = {}
        for k, e in enumerate(self.graph.edges):
            key = tuple(c.coeffs for c in e.label)
            if key not in cache:
                cache[key] = Annihilator(e.label)
            out[k] = cache[key]
        return out

    def stalk_ambient(self, v: int) -> Ambient:
        amb = self._stalk_amb.get(v)
        if amb is None:
            amb = Ambient(self.spec, self.r, self.stalks[v].degrees)
            self._stalk_amb[v] = amb
        return amb

    @cached_property
    def _stalk_amb(self) -> dict:
        return {}

    @cached_property
    def _quotient_maps(self) -> dict[int, PolyMap]:
        return {}

    def quotient_map(self, k: int) -> PolyMap:
        """rho_{upper,E}: canonical quotient stalk(upper) -> stalk(upper)/alpha."""
        pm = self._quotient_maps.get(k)
        if pm is None:
            e = self.graph.edges[k]
            gens = self.stalks[e.upper].degrees
            one = {(0,) * self.r: self.spec.one()}
            pm = PolyMap(self.spec, self.r, gens, gens, {(i, i): one for i in range(len(gens))},
                         self.annihilators[k])
            self._quotient_maps[k] = pm
        return pm

    def edge_ambient(self, k: int) -> Ambient:
        return self.quotient_map(k).target_ambient

    def restriction(self, v: int) -> SumMap:
        """stalk(v) -> sum over outgoing edges of the edge modules."""
        parts = [self.rho_up[k] for k in self.graph.out_edges[v]]
        return SumMap(parts, self.stalks[v], self.spec, self.r)

    def defect_generator_degrees(self, v: int) -> GradedMultiset:
        return self.defects[v]


def _is_upset(graph: MomentGraph, upset) -> bool:
    s = set(upset)
    for v in s:
        for k in graph.out_edges[v]:
            if graph.edges[k].upper not in s:
                return False
    return True


def section_space(sheaf: BMSheaf, upset, d: int) -> tuple[fmpq_mat, dict[int, tuple[int, int]]]:
    """Q-basis of degree-d sections over `upset` and the column block of each vertex."""
    verts = sorted(upset)
    blocks = {}
    off = 0
    for v in verts:
        n = sheaf.stalk_ambient(v).qdim(d)
        blocks[v] = (off, off + n)
        off += n
    ncols = off
    inside = set(verts)
    entries = {}
    row = 0
    for k, e in enumerate(sheaf.graph.edges):
        if e.lower not in inside or e.upper not in inside:
            continue
        amb = sheaf.edge_ambient(k)
        neq = amb.qdim(d)
        if neq == 0:
            continue
        for v, mat, sign in ((e.upper, sheaf.quotient_map(k).matrix(d), 1),
                             (e.lower, sheaf.rho_up[k].matrix(d), -1)):
            start = blocks[v][0]
            c = mat.ncols()
            flat = mat.entries()
            for a in range(mat.nrows()):
                for b in range(c):
                    val = flat[a * c + b]
                    if val:
                        key = (row + b, start + a)
                        entries[key] = entries.get(key, 0) + (val if sign > 0 else -val)
        row += neq
    if ncols == 0:
        return fmpq_mat(0, 0), blocks
    system = linalg.from_sparse(row, ncols, entries)
    return linalg.nullspace(system), blocks


def _delta_image(sheaf: BMSheaf, y: int, d: int, target: SumAmbient) -> fmpq_mat:
    upset = [w for w in range(len(sheaf.graph.vertices))
             if w != y and sheaf.graph.leq(y, w) and sheaf.stalks[w] is not None]
    ncols = target.qdim(d)
    if ncols == 0:
        return fmpq_mat(0, 0)
    sec, blocks = section_space(sheaf, upset, d)
    if sec.nrows() == 0:
        return fmpq_mat(0, ncols)
    parts = []
    for k in sheaf.graph.out_edges[y]:
        w = sheaf.graph.edges[k].upper
        a, b = blocks[w]
        parts.append(linalg.select_columns(sec, a, b) * sheaf.quotient_map(k).matrix(d))
    img = linalg.hconcat(parts, sec.nrows())
    return linalg.row_basis(img)


def build_bm(ball: Ball, x, cap_margin: int = 4, defects: bool = True) -> BMSheaf:
    xi = ball.idx(x)
    graph = interval_graph(ball, xi)
    nv = len(graph.vertices)
    sheaf = BMSheaf(ball, xi, graph, cap_margin, [None] * nv, {})
    top = graph.position[xi]
    sheaf.stalks[top] = GradedMultiset((0,))
    lx = ball.lengths[xi]
    order = sorted(range(nv), key=lambda v: (-graph.length(v), graph.vertices[v]))
    for y in order:
        if y == top:
            continue
        gap = lx - graph.length(y)
        cap = gap + cap_margin
        out = graph.out_edges[y]
        target = SumAmbient([sheaf.edge_ambient(k) for k in out], sheaf.spec, sheaf.r)
        image = {}
        for d in range(0, cap + 1):
            if target.qdim(d) == 0:
                continue
            img = _delta_image(sheaf, y, d, target)
            if img.nrows():
                image[d] = img
        gens = minimal_generators(target, image, cap, flag_above=gap)
        sheaf.delta_images[y] = image
        sheaf.stalks[y] = gens.degrees
        sheaf.cap_report[y] = {"stalk_cap": cap, "stalk_flags": list(gens.flagged)}
        entries_by_edge = {k: {} for k in out}
        for j, (d, row) in enumerate(gens.vectors):
            # target basis keys are (part, (gen, mono)); regroup per edge
            per_part: dict[int, dict] = {}
            for n, (part, (i, m)) in enumerate(target.basis(d)):
                coeffs = row[n * target.D:(n + 1) * target.D]
                if any(coeffs):
                    c = sheaf.spec.from_coeffs([linalg.to_fraction(linalg.q(v)) for v in coeffs])
                    per_part.setdefault(part, {}).setdefault(i, {})[m] = c
            for part, polys in per_part.items():
                k = out[part]
                for i, p in polys.items():
                    entries_by_edge[k][(i, j)] = p
        for k in out:
            upper = graph.edges[k].upper
            sheaf.rho_up[k] = PolyMap(sheaf.spec, sheaf.r, gens.degrees.degrees,
                                      sheaf.stalks[upper].degrees, entries_by_edge[k],
                                      sheaf.annihilators[k])
        if gens.flagged:
            log.warning("possible counterexample: stalk at %s has generators in degrees %s beyond %d",
                        graph.word(y), gens.flagged, gap)
    if defects:
        compute_defects(sheaf)
    return sheaf


def compute_defects(sheaf: BMSheaf) -> None:
    sheaf.defects = []
    sheaf.defect_inclusions = []
    for v in range(len(sheaf.graph.vertices)):
        res = defect_module(sheaf, v)
        sheaf.defects.append(res.degrees)
        sheaf.defect_inclusions.append(res.inclusion)
        rep = sheaf.cap_report.setdefault(v, {})
        rep["defect_cap"] = 2 * sheaf.gap(v) + sheaf.cap_margin
        rep["defect_flags"] = list(res.flagged)


def defect_module(sheaf: BMSheaf, v: int, cap: int | None = None) -> KernelResult:
    """Kernel of stalk(v) -> sum of outgoing edge modules, generated up to cap."""
    gap = sheaf.gap(v)
    if cap is None:
        cap = 2 * gap + sheaf.cap_margin
    return kernel_generators(sheaf.restriction(v), cap, flag_above=2 * gap)


def graded_character(sheaf: BMSheaf) -> HeckeElement:
    """h(B(x)) = sum_y sum_{g in defect(y)} v^(g + l(y) - l(x)) Tt_y."""
    coeffs = {}
    lx = sheaf.apex_length
    for v, degs in enumerate(sheaf.defects):
        shift = sheaf.graph.length(v) - lx
        p = LaurentPoly({})
        for g in degs.degrees:
            p = p + LaurentPoly.monomial(g + shift)
        if p:
            coeffs[sheaf.graph.vertices[v]] = p
    return HeckeElement(sheaf.ball, coeffs, "Tt")


@dataclass
class SectionSpace:
    upset: tuple[int, ...]
    dims: dict[int, int]
    bases: dict[int, fmpq_mat] = field(repr=False, default_factory=dict)


def sections_hilbert(sheaf: BMSheaf, upset, cap: int) -> SectionSpace:
    upset = tuple(sorted(set(upset)))
    if not _is_upset(sheaf.graph, upset):
        raise UpsetError("vertex set is not upwardly closed in the support")
    dims, bases = {}, {}
    D = sheaf.spec.ambient_degree
    for d in range(0, cap + 1):
        if not upset:
            dims[d] = 0
            continue
        sec, _ = section_space(sheaf, upset, d)
        dims[d] = sec.nrows() // D
        bases[d] = sec
    return SectionSpace(upset, dims, bases)


def structure_sheaf(ball: Ball, graph: MomentGraph) -> BMSheaf:
    """Constant sheaf S with quotient maps along every edge; its sections form the structure algebra."""
    nv = len(graph.vertices)
    x = graph.vertices[-1] if nv else 0
    sheaf = BMSheaf(ball, x, graph, 0, [GradedMultiset((0,)) for _ in range(nv)], {})
    for k in range(len(graph.edges)):
        sheaf.rho_up[k] = sheaf.quotient_map(k)
    return sheaf


def structure_algebra_hilbert(ball: Ball, graph: MomentGraph, cap: int) -> dict[int, int]:
    if not graph.vertices:
        return {d: 0 for d in range(cap + 1)}
    sheaf = structure_sheaf(ball, graph)
    return sections_hilbert(sheaf, range(len(graph.vertices)), cap).dims


# -- axiom checks ----------------------------------------------------------------

def check_bm_axioms(sheaf: BMSheaf, flabby_cap: int | None = None) -> dict:
    failures = []
    checks = []
    g = sheaf.graph
    D = sheaf.spec.ambient_degree
    top = sheaf.top

    # (b) support and normalisation at the apex
    checks.append("support")
    for v in range(len(g.vertices)):
        if not g.leq(v, top):
            failures.append({"check": "support", "vertex": g.word(v)})
    checks.append("apex")
    if sheaf.stalks[top].degrees != (0,):
        failures.append({"check": "apex", "vertex": g.word(top), "found": list(sheaf.stalks[top].degrees)})

    # (a) freeness: rank-nullity ties stalk, image and defect; defects are free on their generators
    # (c) surjectivity of stalk -> delta image
    checks.extend(["defect_free", "rank_nullity", "surjective"])
    for v in range(len(g.vertices)):
        gap = sheaf.gap(v)
        dcap = 2 * gap + sheaf.cap_margin
        rmap = sheaf.restriction(v)
        amb = rmap.source_ambient
        for d in range(0, dcap + 1):
            n = amb.qdim(d)
            if n == 0:
                continue
            mat = rmap.matrix(d)
            img_rank = linalg.rank(mat) if mat.ncols() else 0
            ker = n - img_rank
            free = degree_dim(sheaf.defects[v], sheaf.r, d)[0] * D
            if ker != free:
                failures.append({"check": "defect_free", "vertex": g.word(v), "degree": d,
                                 "kernel_dim": ker // D, "free_dim": free // D})
        if v == top:
            continue
        scap = gap + sheaf.cap_margin
        images = sheaf.delta_images.get(v)
        if images is None:
            target = SumAmbient([sheaf.edge_ambient(k) for k in g.out_edges[v]], sheaf.spec, sheaf.r)
            images = {d: _delta_image(sheaf, v, d, target) for d in range(scap + 1) if target.qdim(d)}
        for d in range(0, scap + 1):
            want = images.get(d)
            want_rank = want.nrows() if want is not None else 0
            if amb.qdim(d) == 0:
                got = fmpq_mat(0, want.ncols() if want is not None else 0)
            else:
                got = linalg.row_basis(rmap.matrix(d))
            got_rank = got.nrows()
            ok = got_rank == want_rank and (want_rank == 0 or linalg.contains(want, got))
            if not ok:
                failures.append({"check": "surjective", "vertex": g.word(v), "degree": d,
                                 "image_dim": got_rank // D, "delta_dim": want_rank // D})
            if amb.qdim(d):
                ker = amb.qdim(d) - got_rank
                full = degree_dim(sheaf.stalks[v], sheaf.r, d)[0] * D
                if ker + got_rank != full:
                    failures.append({"check": "rank_nullity", "vertex": g.word(v), "degree": d})

    # flabbiness on principal upsets
    checks.append("flabby_principal")
    if flabby_cap is None:
        flabby_cap = sheaf.apex_length + sheaf.cap_margin
    allv = list(range(len(g.vertices)))
    upsets = []
    for w in allv:
        ups = tuple(u for u in allv if g.leq(w, u))
        upsets.append((w, ups))
    for d in range(0, flabby_cap + 1):
        glob, blocks = section_space(sheaf, allv, d)
        for w, ups in upsets:
            loc, _ = section_space(sheaf, ups, d)
            if loc.nrows() == 0:
                continue
            restr = linalg.hconcat([linalg.select_columns(glob, *blocks[u]) for u in ups], glob.nrows())
            r = linalg.rank(restr) if restr.nrows() else 0
            if r != loc.nrows():
                failures.append({"check": "flabby_principal", "upset_of": g.word(w), "degree": d,
                                 "global_image_dim": r // D, "local_dim": loc.nrows() // D})
    return {
        "ok": not failures,
        "checks": checks,
        "principal_upsets_tested": len(upsets),
        "flabbiness_scope": "principal upsets {>= w} only",
        "failures": failures,
    }
