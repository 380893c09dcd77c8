"""Checkers for the degree, character, genericity, torsion-shape and Hard Lefschetz statements."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import linalg
from .bmsheaf import BMSheaf, graded_character
from .coxeter import ConsistencyError, field_rank
from .exactfield import FieldSpec
from .gradedlin import (
    Ambient,
    Line,
    PolyMap,
    SpecializedMatrix,
    TorsionDecomposition,
    free_generators,
    generated_span,
    graded_torsion_decomposition,
    monomials,
    specialize_to_line,
)
from .hecke import kl_basis

HOLDS = "holds"
FAILS = "fails"
HOLDS_UP_TO_CAP = "holds-up-to-cap"


@dataclass
class ConjectureReport:
    conjecture: str
    x: str
    y: str | None
    params: dict = field(default_factory=dict)
    verdict: str = HOLDS
    witness: dict | None = None

    @property
    def failed(self) -> bool:
        return self.verdict == FAILS

    def to_json(self) -> dict:
        return {
            "conjecture": self.conjecture,
            "x": self.x,
            "y": self.y,
            "params": self.params,
            "verdict": self.verdict,
            "witness": self.witness,
        }


# -- degree and character conjectures -------------------------------------------

def check_dcon(sheaf: BMSheaf) -> list[ConjectureReport]:
    """Stalk generators below l(x)-l(y), cross-checked against defect degrees above it."""
    g = sheaf.graph
    out = []
    xw = g.word(sheaf.top)
    for v in range(len(g.vertices)):
        if v == sheaf.top:
            continue
        gap = sheaf.gap(v)
        stalk = sheaf.stalks[v].degrees
        defect = sheaf.defects[v].degrees
        stalk_ok = all(d <= gap - 1 for d in stalk)
        defect_ok = all(d >= gap + 1 for d in defect)
        if stalk_ok != defect_ok:
            raise ConsistencyError(
                f"degree bound disagrees between stalk {stalk} and defect {defect} at {g.word(v)}"
            )
        rep = ConjectureReport("dcon", xw, g.word(v), {"bound": gap - 1})
        if not stalk_ok:
            rep.verdict = FAILS
            rep.witness = {"stalk_degrees": list(stalk), "defect_degrees": list(defect)}
        out.append(rep)
    return out


def check_klcon(sheaf: BMSheaf) -> ConjectureReport:
    ball = sheaf.ball
    char = graded_character(sheaf)
    kl = kl_basis(ball, sheaf.x).element
    rep = ConjectureReport("klcon", sheaf.graph.word(sheaf.top), None)
    if char != kl:
        for w in sorted(set(char.coeffs) | set(kl.coeffs), key=lambda i: (ball.lengths[i], i)):
            a, b = char.coeffs.get(w), kl.coeffs.get(w)
            if a != b:
                rep.verdict = FAILS
                rep.witness = {"y": ball.word(w), "character": repr(a), "kl": repr(b)}
                break
    return rep


# -- genericity ------------------------------------------------------------------

def _unit_vectors(amb: Ambient) -> list[tuple[int, list]]:
    return free_generators(amb)


def _inclusion_vectors(incl: PolyMap, amb: Ambient) -> list[tuple[int, list]]:
    out = []
    for j, deg in enumerate(incl.source.degrees):
        out.append((deg, amb.vector(incl.column(j), deg)))
    return out


def intersection_profile(amb: Ambient, first, second, cap: int) -> dict[int, int]:
    """Degree -> dim of (submodule generated by first) & (submodule generated by second)."""
    a = generated_span(amb, first, cap)
    b = generated_span(amb, second, cap)
    D = amb.D
    out = {}
    for d in sorted(set(a) & set(b)):
        k = linalg.intersection_dim(a[d], b[d])
        if k:
            out[d] = k // D
    return out


def check_pcon(sheaf: BMSheaf, y: int, m: int, cap: int | None = None,
               center: int | None = None) -> ConjectureReport:
    """defect_{<= c+m-1} & stalk_{<= c-m} = 0 in all degrees <= cap, with c = l(x)-l(y) by default."""
    if m < 1:
        raise ValueError("m must be >= 1")
    g = sheaf.graph
    gap = sheaf.gap(y)
    c = gap if center is None else center
    if cap is None:
        cap = 2 * sheaf.apex_length + 4
    amb = sheaf.stalk_ambient(y)
    defect_gens = [t for t in _inclusion_vectors(sheaf.defect_inclusions[y], amb) if t[0] <= c + m - 1]
    stalk_gens = [t for t in _unit_vectors(amb) if t[0] <= c - m]
    rep = ConjectureReport("pcon", g.word(sheaf.top), g.word(y), {"m": m, "cap": cap, "center": c})
    if not defect_gens or not stalk_gens:
        rep.verdict = HOLDS_UP_TO_CAP
        return rep
    prof = intersection_profile(amb, defect_gens, stalk_gens, cap)
    if prof:
        d = min(prof)
        rep.verdict = FAILS
        rep.witness = {"degree": d, "intersection_dim": prof[d]}
    else:
        rep.verdict = HOLDS_UP_TO_CAP
    return rep


def pcon_m_range(sheaf: BMSheaf, y: int, center: int | None = None) -> range:
    """m beyond this range makes the stalk truncation vanish."""
    c = sheaf.gap(y) if center is None else center
    lo = min(sheaf.stalks[y].degrees) if sheaf.stalks[y].degrees else 0
    return range(1, max(c - lo, 0) + 2)


def check_pcon_all(sheaf: BMSheaf, y: int, cap: int | None = None,
                   center: int | None = None) -> list[ConjectureReport]:
    return [check_pcon(sheaf, y, m, cap, center) for m in pcon_m_range(sheaf, y, center)]


# -- specialization, torsion shape, Hard Lefschetz --------------------------------

def interval_line(sheaf: BMSheaf, seed: int = 0) -> Line:
    return specialize_to_line(sheaf.spec, sheaf.r, sheaf.graph.labels(), seed)


def specialized_inclusion(sheaf: BMSheaf, y: int, line: Line) -> SpecializedMatrix:
    if not line.is_valid(sheaf.graph.labels()):
        raise ValueError("line lies on a root hyperplane; resample")
    return SpecializedMatrix.from_polymap(sheaf.defect_inclusions[y], line)


def _span_rank(vectors) -> int:
    vectors = [v for v in vectors if any(not c.is_zero() for c in v)]
    return field_rank(vectors) if vectors else 0


def hard_lefschetz_direct(mat: SpecializedMatrix, center: int) -> tuple[bool, dict | None]:
    """T^m: coker_{c-m} -> coker_{c+m} bijective for all m >= 1, computed on the cokernel itself."""
    lo, hi = mat.degree_span()
    top = max(abs(center - lo), abs(hi - center)) + 1
    spec = mat.line.spec
    for m in range(1, top + 1):
        k, k2 = center - m, center + m
        rows_k, _ = mat.degree_block(k)
        rows2, cols2 = mat.degree_block(k2)
        dim_k = mat.cokernel_dim(k)
        dim_k2 = mat.cokernel_dim(k2)
        if dim_k == 0 and dim_k2 == 0:
            continue
        image2 = [[mat.coeffs[i][j] for i in rows2] for j in cols2]
        units = [[spec.one() if i == i0 else spec.zero() for i in rows2] for i0 in rows_k]
        r_img = _span_rank(image2)
        r_ind = _span_rank(image2 + units) - r_img
        if not (r_ind == dim_k == dim_k2):
            return False, {"m": m, "from_degree": k, "to_degree": k2,
                           "dim_from": dim_k, "dim_to": dim_k2, "rank": r_ind}
    return True, None


def shift_lemma_check(decomp: TorsionDecomposition, center: int) -> tuple[bool, bool]:
    """(HL from Hilbert data, shape g_i = center - n_i); the two must agree."""
    degs = decomp.degrees()
    hl = True
    if degs:
        top = max(abs(center - degs[0]), abs(degs[-1] - center)) + 1
        for m in range(1, top + 1):
            a, b = decomp.dim(center - m), decomp.dim(center + m)
            if not (decomp.t_power_rank(center - m, m) == a == b):
                hl = False
                break
    shape = all(g == center - n for g, n in decomp.pairs)
    if hl != shape:
        raise ConsistencyError(f"shift lemma violated for {decomp.pairs} at center {center}")
    return hl, shape


@dataclass
class PdimoneHLResult:
    decomposition: TorsionDecomposition
    line: tuple
    verdicts: dict  # center label -> {"center", "pdimone", "hl"}
    reports: list[ConjectureReport]


def check_pdimone_hl(sheaf: BMSheaf, y: int, line: Line | None = None, seed: int = 0,
                     centers: str = "both") -> PdimoneHLResult:
    if line is None:
        line = interval_line(sheaf, seed)
    mat = specialized_inclusion(sheaf, y, line)
    decomp = graded_torsion_decomposition(mat)
    gap = sheaf.gap(y)
    chosen = {"shifted": gap - 1, "literal": gap}
    if centers != "both":
        chosen = {centers: chosen[centers]}
    g = sheaf.graph
    reports = []
    verdicts = {}
    for label, c in chosen.items():
        hl_lemma, shape = shift_lemma_check(decomp, c)
        hl, wit = hard_lefschetz_direct(mat, c)
        if hl != hl_lemma:
            raise ConsistencyError("Hard Lefschetz from matrices disagrees with the decomposition")
        params = {"center": c, "center_kind": label, "line": [str(p) for p in line.point]}
        rp = ConjectureReport("pdimone", g.word(sheaf.top), g.word(y), dict(params),
                              HOLDS if shape else FAILS,
                              None if shape else {"decomposition": decomp.to_json()})
        rh = ConjectureReport("hl", g.word(sheaf.top), g.word(y), dict(params),
                              HOLDS if hl else FAILS, wit)
        reports += [rp, rh]
        verdicts[label] = {"center": c, "pdimone": shape, "hl": hl}
    return PdimoneHLResult(decomp, line.point, verdicts, reports)


# -- generic maps ------------------------------------------------------------------

def generic_condition(f: PolyMap, l: int, ks, cap: int) -> tuple[bool, bool]:
    """(f injective up to cap, f(M_{<=l+m-1}) & N_{<=l-m} = 0 for 1 <= m <= max k, up to cap)."""
    src = f.source_ambient
    tgt = Ambient(f.spec, f.r, f.target.degrees)
    injective = True
    for d in src.degrees_upto(cap):
        mat = f.matrix(d)
        if mat.ncols() == 0 or linalg.rank(mat) != mat.nrows():
            injective = False
            break
    src_units = _unit_vectors(src)
    tgt_units = _unit_vectors(tgt)
    images = []
    for (deg, _), j in zip(src_units, range(len(src_units))):
        images.append((deg, tgt.vector(f.column(j), deg)))
    ok = True
    for m in range(1, max(ks, default=0) + 1):
        first = [t for t in images if t[0] <= l + m - 1]
        second = [t for t in tgt_units if t[0] <= l - m]
        if first and second and intersection_profile(tgt, first, second, cap):
            ok = False
            break
    return injective, ok


def random_graded_map(spec: FieldSpec, r: int, l: int, ks, rng: random.Random, box: int) -> PolyMap:
    """Uniform integer coefficients on every homogeneous entry of M = sum S{-l-k} -> N = sum S{-l+k}."""
    src = sorted(l + k for k in ks)
    tgt = sorted(l - k for k in ks)
    entries = {}
    for i, t in enumerate(tgt):
        for j, s in enumerate(src):
            diff = s - t
            if diff < 0 or diff % 2:
                continue
            p = {}
            for mono in monomials(r, diff // 2):
                c = rng.randint(-box, box)
                if c:
                    p[mono] = spec(c)
            if p:
                entries[(i, j)] = p
    return PolyMap(spec, r, src, tgt, entries)


@dataclass
class GenmapsReport:
    l: int
    ks: list[int]
    variables: int
    trials: int
    seed: int
    coeff_range: tuple[int, int]
    cap: int
    satisfied: int
    non_injective: int
    intersection_failures: int

    @property
    def fraction(self) -> float:
        return self.satisfied / self.trials

    def to_json(self) -> dict:
        return {"l": self.l, "ks": self.ks, "variables": self.variables, "trials": self.trials,
                "seed": self.seed, "coeff_range": list(self.coeff_range), "cap": self.cap,
                "satisfied": self.satisfied, "fraction": self.fraction,
                "non_injective": self.non_injective, "intersection_failures": self.intersection_failures}


def genmaps_sample(l: int, ks, trials: int, seed: int = 0, coeff_range: int = 10,
                   variables: int = 1, cap: int | None = None) -> GenmapsReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ks = list(ks)
    if any(k < 0 for k in ks):
        raise ValueError("k_i must be non-negative")
    spec = FieldSpec.from_conductor(1)
    if cap is None:
        cap = l + 3 * max(ks, default=0) + 4
    rng = random.Random(seed)
    sat = noninj = bad = 0
    for _ in range(trials):
        f = random_graded_map(spec, variables, l, ks, rng, coeff_range)
        inj, ok = generic_condition(f, l, ks, cap)
        if not inj:
            noninj += 1
        elif not ok:
            bad += 1
        else:
            sat += 1
    return GenmapsReport(l, ks, variables, trials, seed, (-coeff_range, coeff_range), cap, sat, noninj, bad)
