"""Exact rational matrix helpers on top of python-flint.

Vectors are rows; a subspace is stored as an fmpq_mat whose rows form a basis
in reduced row echelon form. Linear maps act on rows from the right.
"""

from __future__ import annotations

from fractions import Fraction

from flint import fmpq, fmpq_mat, fmpz_mat


def q(x) -> fmpq:
    if isinstance(x, fmpq):
        return x
    if isinstance(x, int):
        return fmpq(x)
    return fmpq(x.numerator, x.denominator)


def to_fraction(x: fmpq) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def zeros(nrows: int, ncols: int) -> fmpq_mat:
    return fmpq_mat(nrows, ncols)


def from_sparse(nrows: int, ncols: int, entries: dict) -> fmpq_mat:
    m = fmpq_mat(nrows, ncols)
    for (i, j), v in entries.items():
        if v:
            m[i, j] = q(v)
    return m


def from_rows(rows, ncols: int) -> fmpq_mat:
    rows = list(rows)
    m = fmpq_mat(len(rows), ncols)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            if v:
                m[i, j] = q(v)
    return m


def rows_of(m: fmpq_mat) -> list[list[fmpq]]:
    n, c = m.nrows(), m.ncols()
    flat = m.entries()
    return [flat[i * c:(i + 1) * c] for i in range(n)]


def stack(mats, ncols: int) -> fmpq_mat:
    mats = [m for m in mats if m.nrows()]
    if not mats:
        return fmpq_mat(0, ncols)
    if len(mats) == 1:
        return mats[0]
    entries = []
    for m in mats:
        entries.extend(m.entries())
    return fmpq_mat(sum(m.nrows() for m in mats), ncols, entries)


def hconcat(mats, nrows: int) -> fmpq_mat:
    mats = [m for m in mats if m.ncols()]
    if not mats:
        return fmpq_mat(nrows, 0)
    total = sum(m.ncols() for m in mats)
    out = fmpq_mat(nrows, total)
    off = 0
    for m in mats:
        c = m.ncols()
        flat = m.entries()
        for i in range(nrows):
            row = flat[i * c:(i + 1) * c]
            for j, v in enumerate(row):
                if v:
                    out[i, off + j] = v
        off += c
    return out


def _integer_rows(m: fmpq_mat) -> fmpz_mat:
    """Scale each row by its denominator lcm; row space is unchanged."""
    n, c = m.nrows(), m.ncols()
    flat = m.entries()
    ints = []
    for i in range(n):
        row = flat[i * c:(i + 1) * c]
        den = 1
        for v in row:
            d = int(v.q)
            if d != 1:
                den = den * d // _gcd(den, d)
        ints.extend(int(v.p) * (den // int(v.q)) for v in row)
    return fmpz_mat(n, c, ints)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def row_basis(m: fmpq_mat) -> fmpq_mat:
    """Echelon basis of the row space."""
    if m.nrows() == 0 or m.ncols() == 0:
        return fmpq_mat(0, m.ncols())
    z = _integer_rows(m)
    r, _den, rank = z.rref()
    if rank == 0:
        return fmpq_mat(0, m.ncols())
    c = m.ncols()
    flat = r.entries()[: rank * c]
    out = fmpq_mat(rank, c, [fmpq(int(v)) for v in flat])
    # normalise pivots to 1 so the basis is canonical
    rows = rows_of(out)
    norm = []
    for row in rows:
        p = next(v for v in row if v)
        norm.extend(v / p for v in row)
    return fmpq_mat(rank, c, norm)


def rank(m: fmpq_mat) -> int:
    if m.nrows() == 0 or m.ncols() == 0:
        return 0
    return _integer_rows(m).rank()


def nullspace(m: fmpq_mat) -> fmpq_mat:
    """Rows spanning {x : m * x^T = 0}, returned in echelon form."""
    ncols = m.ncols()
    if m.nrows() == 0:
        return identity(ncols)
    if ncols == 0:
        return fmpq_mat(0, 0)
    z = _integer_rows(m)
    x, nullity = z.nullspace()
    if nullity == 0:
        return fmpq_mat(0, ncols)
    flat = x.entries()
    k = x.ncols()
    cols = [[flat[i * k + j] for i in range(ncols)] for j in range(nullity)]
    return row_basis(fmpq_mat(nullity, ncols, [fmpq(int(v)) for col in cols for v in col]))


def identity(n: int) -> fmpq_mat:
    m = fmpq_mat(n, n)
    for i in range(n):
        m[i, i] = 1
    return m


def contains(space: fmpq_mat, vectors: fmpq_mat) -> bool:
    if vectors.nrows() == 0:
        return True
    return rank(stack([space, vectors], space.ncols())) == space.nrows()


def intersection_dim(a: fmpq_mat, b: fmpq_mat) -> int:
    ncols = a.ncols()
    ra, rb = rank(a), rank(b)
    return ra + rb - rank(stack([a, b], ncols))


def intersection(a: fmpq_mat, b: fmpq_mat) -> fmpq_mat:
    """Basis of rowspace(a) & rowspace(b)."""
    ncols = a.ncols()
    if a.nrows() == 0 or b.nrows() == 0:
        return fmpq_mat(0, ncols)
    # x a = y b  <=>  (x, -y) [a; b] = 0
    both = stack([a, -b], ncols)
    null = nullspace(both.transpose())
    if null.nrows() == 0:
        return fmpq_mat(0, ncols)
    coeff = fmpq_mat(null.nrows(), a.nrows(), [v for row in rows_of(null) for v in row[: a.nrows()]])
    return row_basis(coeff * a)


def select_columns(m: fmpq_mat, start: int, stop: int) -> fmpq_mat:
    n, c = m.nrows(), m.ncols()
    flat = m.entries()
    width = stop - start
    return fmpq_mat(n, width, [flat[i * c + j] for i in range(n) for j in range(start, stop)])
