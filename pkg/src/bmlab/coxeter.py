"""Coxeter systems in the geometric representation, Bruhat order, Bruhat graphs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .exactfield import FieldElement, FieldSpec, build_field, validate_coxeter_matrix

Matrix = tuple[tuple[FieldElement, ...], ...]


class ConsistencyError(RuntimeError):
    """Raised when an exact computation contradicts a structural guarantee."""


class BallTooSmall(LookupError):
    pass


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum((a[i][l] * b[l][j] for l in range(k) if a[i][l] and b[l][j]), a[i][0] * 0)
              for j in range(m))
        for i in range(n)
    )


def mat_identity(spec: FieldSpec, n: int) -> Matrix:
    return tuple(tuple(spec(int(i == j)) for j in range(n)) for i in range(n))


def mat_key(a: Matrix) -> tuple:
    return tuple(x.coeffs for row in a for x in row)


def field_rank(rows: list[list[FieldElement]]) -> int:
    """Rank by Gaussian elimination over the field."""
    rows = [list(r) for r in rows if any(not x.is_zero() for x in r)]
    if not rows:
        return 0
    rank = 0
    ncols = len(rows[0])
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank]
        inv = p[c].inverse()
        for i in range(rank + 1, len(rows)):
            if not rows[i][c].is_zero():
                f = rows[i][c] * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], p)]
        rank += 1
        if rank == len(rows):
            break
    return rank


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A group element: its matrix on V in the basis of simple roots, length, one reduced word."""

    matrix: Matrix
    length: int
    word: tuple[int, ...]

    @cached_property
    def key(self) -> tuple:
        return mat_key(self.matrix)

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupElement) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"GroupElement({self.word!r})"


@dataclass
class CoxeterSystem:
    generators: list[str]
    coxeter_matrix: list[list[int]]
    field: FieldSpec
    gram: Matrix
    simple_matrices: list[Matrix] = field(repr=False)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @cached_property
    def identity(self) -> GroupElement:
        return GroupElement(mat_identity(self.field, self.rank), 0, ())

    def word_str(self, word) -> str:
        return " ".join(self.generators[i] for i in word) or "e"

    def parse_word(self, text: str) -> tuple[int, ...]:
        tokens = text.replace(",", " ").replace("*", " ").split()
        if tokens in ([], ["e"], ["1"]):
            return ()
        out = []
        for tok in tokens:
            if tok in self.generators:
                out.append(self.generators.index(tok))
            elif tok.isdigit() and 1 <= int(tok) <= self.rank:
                out.append(int(tok) - 1)
            else:
                out.extend(self._split_token(tok))
        return tuple(out)

    def _split_token(self, tok: str) -> list[int]:
        """Longest-match split of concatenated generator names, e.g. 's2s1s3'."""
        names = sorted(self.generators, key=len, reverse=True)
        out, k = [], 0
        while k < len(tok):
            hit = next((n for n in names if tok.startswith(n, k)), None)
            if hit is None:
                raise ValueError(f"unknown generator in {tok!r}; have {self.generators}")
            out.append(self.generators.index(hit))
            k += len(hit)
        return out

    def word_matrix(self, word) -> Matrix:
        m = mat_identity(self.field, self.rank)
        for i in word:
            m = mat_mul(m, self.simple_matrices[i])
        return m

    def is_reflection_matrix(self, m: Matrix) -> bool:
        one = self.field.one()
        diff = [[m[i][j] - (one if i == j else 0) for j in range(self.rank)] for i in range(self.rank)]
        if field_rank(diff) != 1:
            return False
        return mat_mul(m, m) == mat_identity(self.field, self.rank)

    def root_of_reflection(self, m: Matrix) -> tuple[FieldElement, ...]:
        """The -1 eigenvector, scaled so its first nonzero coordinate is 1; positivity asserted."""
        one = self.field.one()
        r = self.rank
        for j in range(r):
            col = [m[i][j] - (one if i == j else 0) for i in range(r)]
            if any(not c.is_zero() for c in col):
                break
        first = next(c for c in col if not c.is_zero())
        inv = first.inverse()
        root = tuple(c * inv for c in col)
        if any(c.sign() < 0 for c in root):
            raise ConsistencyError(f"root with mixed signs: {root}")
        return root

    def to_json(self) -> dict:
        return {"generators": list(self.generators), "m": [list(r) for r in self.coxeter_matrix]}


def build_system(coxeter_matrix, generators=None) -> CoxeterSystem:
    rows = validate_coxeter_matrix(coxeter_matrix)
    spec = build_field(rows)
    r = len(rows)
    if generators is None:
        generators = [f"s{i + 1}" for i in range(r)]
    if len(generators) != r or len(set(generators)) != r:
        raise ValueError("generator names must be distinct, one per row")
    half = spec(1) / 2
    gram = []
    for i in range(r):
        row = []
        for j in range(r):
            mij = rows[i][j]
            if i == j:
                row.append(spec(1))
            elif mij == 0:
                row.append(spec(-1))
            else:
                row.append(-(spec.two_cos(mij) * half))
        gram.append(tuple(row))
    gram = tuple(gram)
    simple = []
    for i in range(r):
        m = [list(row) for row in mat_identity(spec, r)]
        for j in range(r):
            # s_i(alpha_j) = alpha_j - 2 B(alpha_i, alpha_j) alpha_i
            m[i][j] = m[i][j] - gram[i][j] * 2
        simple.append(tuple(tuple(row) for row in m))
    system = CoxeterSystem(list(generators), rows, spec, gram, simple)
    ident = mat_identity(spec, r)
    for i in range(r):
        if mat_mul(simple[i], simple[i]) != ident:
            raise ConsistencyError(f"generator {i} does not square to 1")
        for j in range(i + 1, r):
            mij = rows[i][j]
            if mij == 0:
                continue
            p = mat_mul(simple[i], simple[j])
            acc = ident
            for _ in range(mij):
                acc = mat_mul(acc, p)
            if acc != ident:
                raise ConsistencyError(f"braid relation for ({i},{j}) fails")
    return system


def load_system(path) -> CoxeterSystem:
    data = json.loads(Path(path).read_text())
    return system_from_json(data)


def system_from_json(data: dict) -> CoxeterSystem:
    m = data["m"]
    gens = data.get("generators")
    return build_system(m, gens)


class Ball:
    """All elements of length <= radius, found breadth first; behaves as a list of GroupElement."""

    def __init__(self, system: CoxeterSystem, radius: int):
        if radius < 0:
            raise ValueError("radius must be non-negative")
        self.system = system
        self.radius = radius
        r = system.rank
        e = system.identity
        self.elements: list[GroupElement] = [e]
        self.index: dict[tuple, int] = {e.key: 0}
        self.right: list[list[int | None]] = []
        layer = [0]
        depth = 0
        while layer and depth < radius:
            new = []
            for i in layer:
                w = self.elements[i]
                for s in range(r):
                    m = mat_mul(w.matrix, system.simple_matrices[s])
                    k = mat_key(m)
                    if k not in self.index:
                        self.index[k] = len(self.elements)
                        self.elements.append(GroupElement(m, depth + 1, w.word + (s,)))
                        new.append(self.index[k])
            layer = new
            depth += 1
        n = len(self.elements)
        self.lengths = [w.length for w in self.elements]
        self.right = [[None] * r for _ in range(n)]
        self.left = [[None] * r for _ in range(n)]
        for i, w in enumerate(self.elements):
            for s in range(r):
                self.right[i][s] = self.index.get(mat_key(mat_mul(w.matrix, system.simple_matrices[s])))
                self.left[i][s] = self.index.get(mat_key(mat_mul(system.simple_matrices[s], w.matrix)))
        self.inverse = [self.find_word(tuple(reversed(w.word))) for w in self.elements]
        self._refl_cache: dict[tuple, tuple | None] = {}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def idx(self, w: GroupElement | int) -> int:
        if isinstance(w, int):
            return w
        try:
            return self.index[w.key]
        except KeyError:
            raise BallTooSmall(
                f"{self.system.word_str(w.word)} not in ball of radius {self.radius}"
            ) from None

    def find_word(self, word) -> int:
        i = 0
        for s in word:
            j = self.right[i][s]
            if j is None:
                raise BallTooSmall(f"word {word} leaves the ball of radius {self.radius}")
            i = j
        return i

    def element(self, word) -> GroupElement:
        return self.elements[self.find_word(word)]

    def parse(self, text: str) -> int:
        return self.find_word(self.system.parse_word(text))

    def mul(self, a: int, b: int) -> int:
        """Index of a*b, multiplying b's word onto a from the right."""
        i = a
        for s in self.elements[b].word:
            j = self.right[i][s]
            if j is None:
                raise BallTooSmall(f"product leaves the ball of radius {self.radius}")
            i = j
        return i

    def word(self, i: int) -> str:
        return self.system.word_str(self.elements[i].word)

    def reflection_root(self, matrix: Matrix):
        """Normalized root if matrix is a reflection, else None (cached by matrix)."""
        k = mat_key(matrix)
        if k not in self._refl_cache:
            if self.system.is_reflection_matrix(matrix):
                self._refl_cache[k] = self.system.root_of_reflection(matrix)
            else:
                self._refl_cache[k] = None
        return self._refl_cache[k]

    def quotient_root(self, upper: int, lower: int):
        """Root of t = upper * lower^-1 when t is a reflection."""
        m = mat_mul(self.elements[upper].matrix, self.elements[self.inverse[lower]].matrix)
        return self.reflection_root(m)

    @cached_property
    def covers(self) -> list[list[int]]:
        """covers[i] = elements covered by element i."""
        by_len: dict[int, list[int]] = {}
        for i, l in enumerate(self.lengths):
            by_len.setdefault(l, []).append(i)
        out = [[] for _ in self.elements]
        for i, l in enumerate(self.lengths):
            for j in by_len.get(l - 1, []):
                if self.quotient_root(i, j) is not None:
                    out[i].append(j)
        return out

    @cached_property
    def below(self) -> list[int]:
        """Bitset of the Bruhat lower ideal of each element."""
        order = sorted(range(len(self)), key=lambda i: self.lengths[i])
        down = [0] * len(self)
        for i in order:
            acc = 1 << i
            for j in self.covers[i]:
                acc |= down[j]
            down[i] = acc
        return down

    def leq(self, x, y) -> bool:
        xi, yi = self.idx(x), self.idx(y)
        return bool(self.below[yi] >> xi & 1)

    def interval(self, x) -> list[int]:
        """Indices of {y <= x}, in ball order (non-decreasing length)."""
        b = self.below[self.idx(x)]
        return [i for i in range(len(self)) if b >> i & 1]


def enumerate_ball(system: CoxeterSystem, max_length: int) -> Ball:
    return Ball(system, max_length)


def bruhat_leq(ball: Ball, x, y) -> bool:
    xi, yi = ball.idx(x), ball.idx(y)
    if ball.lengths[yi] > ball.radius:
        raise BallTooSmall("ball radius below the length of y")
    return ball.leq(xi, yi)


@dataclass(frozen=True)
class Edge:
    lower: int  # vertex positions inside MomentGraph.vertices
    upper: int
    label: tuple[FieldElement, ...]


@dataclass
class MomentGraph:
    ball: Ball
    vertices: list[int]  # ball indices
    edges: list[Edge]

    @cached_property
    def position(self) -> dict[int, int]:
        return {b: k for k, b in enumerate(self.vertices)}

    @cached_property
    def out_edges(self) -> list[list[int]]:
        """Edge indices leaving each vertex upward."""
        out = [[] for _ in self.vertices]
        for k, e in enumerate(self.edges):
            out[e.lower].append(k)
        return out

    @cached_property
    def in_edges(self) -> list[list[int]]:
        out = [[] for _ in self.vertices]
        for k, e in enumerate(self.edges):
            out[e.upper].append(k)
        return out

    def length(self, v: int) -> int:
        return self.ball.lengths[self.vertices[v]]

    def element(self, v: int) -> GroupElement:
        return self.ball.elements[self.vertices[v]]

    def word(self, v: int) -> str:
        return self.ball.word(self.vertices[v])

    def leq(self, a: int, b: int) -> bool:
        return self.ball.leq(self.vertices[a], self.vertices[b])

    def labels(self) -> list[tuple[FieldElement, ...]]:
        seen = {}
        for e in self.edges:
            seen.setdefault(tuple(c.coeffs for c in e.label), e.label)
        return list(seen.values())

    def to_dot(self) -> str:
        lines = ["digraph bruhat {"]
        for k in range(len(self.vertices)):
            lines.append(f'  v{k} [label="{self.word(k)}"];')
        for e in self.edges:
            lab = "(" + ", ".join(str(c) for c in e.label) + ")"
            lines.append(f'  v{e.lower} -> v{e.upper} [label="{lab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def interval_graph(ball: Ball, x) -> MomentGraph:
    xi = ball.idx(x)
    verts = ball.interval(xi)
    edges = []
    for a, lo in enumerate(verts):
        for b, up in enumerate(verts):
            gap = ball.lengths[up] - ball.lengths[lo]
            if gap <= 0 or gap % 2 == 0:
                continue
            root = ball.quotient_root(up, lo)
            if root is not None:
                edges.append(Edge(a, b, root))
    return MomentGraph(ball, verts, edges)
