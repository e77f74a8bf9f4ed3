"""Thick affine building model: SL_n over Q_p at finite precision.

Everything is phrased through matrices with :class:`PadicScalar` entries.
Ideal (boundary) simplices are flags of subspaces, stored as a canonical
matrix representative: each flag step gets the interpolation basis of the
saturated lattice it cuts out of Z_p^n, so two matrices represent the same
simplex exactly when their canonical forms agree within precision.

Conventions, fixed once for the whole laboratory:

* the group acts on the left, g . (h P) = (gh) P;
* the reference ideal chamber  c_plus  is the standard coordinate flag
  span(e_1) < span(e_1, e_2) < ...; its stabilizer is the upper
  triangular subgroup;
* direction vectors of diagonal elements diag(p^{a_1}, ..., p^{a_n})
  point toward  c_plus  when the exponents ascend, and the pairing
  coordinates of such a vector are v_j = a_{j+1} - a_j.

Under these choices the attracting chamber of diag(p^{-m}, p^{m}) is
c_plus, and conjugation g -> gamma g gamma^{-1} expands the unipotent
radical of the attracting parabolic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import coxeter
from .coxeter import (
    AffineWeylElement,
    CoxeterSystem,
    WeylElement,
    get_system,
    permutation_word,
    weyl_from_permutation,
)
from .padic import INF, PadicScalar, PrecisionExhausted

__all__ = [
    "AffineWeylCoset",
    "GroupContext",
    "IdealSimplex",
    "Mat",
    "NotOpposite",
    "big_cell_frame",
    "boundary_simplex",
    "bruhat_cell",
    "cartan_decomposition",
    "chamber_of",
    "coweight_coords",
    "iwahori_coset",
    "iwasawa_decomposition",
    "mat_agreement",
    "opposite",
    "parabolic_membership",
    "project_to_star",
    "retraction",
    "type_of_dims",
    "dims_of_type",
    "weyl_distance",
]


class NotOpposite(ValueError):
    """Raised when a construction needs transverse flags and got none."""


# ---------------------------------------------------------------------------
# matrices


class Mat:
    """Immutable n x n matrix over Q_p at finite precision."""

    __slots__ = ("ctx", "rows")

    def __init__(self, ctx: "GroupContext", rows: Sequence[Sequence[PadicScalar]]):
        self.ctx = ctx
        self.rows: Tuple[Tuple[PadicScalar, ...], ...] = tuple(tuple(r) for r in rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __mul__(self, other: "Mat") -> "Mat":
        n = self.n
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = self.rows[i][0] * other.rows[0][j]
                for k in range(1, n):
                    acc = acc + self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            rows.append(row)
        return Mat(self.ctx, rows)

    def __sub__(self, other: "Mat") -> "Mat":
        return Mat(
            self.ctx,
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ],
        )

    def transpose(self) -> "Mat":
        return Mat(self.ctx, list(zip(*self.rows)))

    def scale(self, c: PadicScalar) -> "Mat":
        return Mat(self.ctx, [[c * x for x in row] for row in self.rows])

    def det(self) -> PadicScalar:
        """Cofactor expansion; division-free, fine for n <= 4."""
        return _det(self.ctx, [list(r) for r in self.rows])

    def inv(self) -> "Mat":
        """Gauss-Jordan with smallest-valuation pivoting."""
        n = self.n
        A = [list(r) for r in self.rows]
        B = [[self.ctx.one if i == j else self.ctx.zero for j in range(n)] for i in range(n)]
        for col in range(n):
            piv, best = None, None
            for i in range(col, n):
                if not A[i][col].is_zeroish():
                    v = A[i][col].val_floor()
                    if best is None or v < best:
                        piv, best = i, v
            if piv is None:
                raise PrecisionExhausted("matrix is singular within working precision")
            A[col], A[piv] = A[piv], A[col]
            B[col], B[piv] = B[piv], B[col]
            inv_p = A[col][col].inv()
            A[col] = [inv_p * x for x in A[col]]
            B[col] = [inv_p * x for x in B[col]]
            for i in range(n):
                if i == col:
                    continue
                c = A[i][col]
                if c.is_zeroish():
                    continue
                A[i] = [x - c * y for x, y in zip(A[i], A[col])]
                B[i] = [x - c * y for x, y in zip(B[i], B[col])]
        return Mat(self.ctx, B)

    def min_val_floor(self):
        return min(x.val_floor() for row in self.rows for x in row)

    def agreement(self, other: "Mat"):
        return mat_agreement(self, other)

    def __repr__(self) -> str:
        body = "; ".join(
            " ".join(x.to_literal() for x in row) for row in self.rows
        )
        return f"Mat[{body}]"


def _det(ctx: "GroupContext", rows: List[List[PadicScalar]]) -> PadicScalar:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = None
    sign = 1
    for j in range(n):
        a = rows[0][j]
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = a * _det(ctx, minor)
        if sign < 0:
            term = -term
        acc = term if acc is None else acc + term
        sign = -sign
    return acc


def mat_agreement(a: Mat, b: Mat):
    """Valuation depth to which two matrices agree (INF if identical)."""
    d = a - b
    return min(x.val_floor() for row in d.rows for x in row)


def _echelon_rows(ctx: "GroupContext", rows: List[List[PadicScalar]]):
    """Row reduction with min-valuation pivoting; (reduced, pivots)."""
    R = [list(r) for r in rows]
    m = len(R)
    k = len(R[0]) if R else 0
    pivots: List[Tuple[int, int]] = []
    r = 0
    for c in range(k):
        if r >= m:
            break
        best = None
        for i in range(r, m):
            x = R[i][c]
            if not x.is_zeroish():
                if best is None or x.valuation() < R[best][c].valuation():
                    best = i
        if best is None:
            continue
        R[r], R[best] = R[best], R[r]
        pinv = R[r][c].inv()
        R[r] = [e * pinv for e in R[r]]
        for i in range(m):
            if i != r and not R[i][c].is_zeroish():
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
        pivots.append((r, c))
        r += 1
    return R, pivots


def matrix_rank(ctx: "GroupContext", rows: List[List[PadicScalar]]) -> int:
    """Rank witnessed at working precision (never overcounts)."""
    if not rows or not rows[0]:
        return 0
    return len(_echelon_rows(ctx, rows)[1])


def kernel_basis(
    ctx: "GroupContext", rows: List[List[PadicScalar]], width: int
) -> List[List[PadicScalar]]:
    """Basis of the right kernel of the matrix with the given rows."""
    if not rows:
        return [
            [ctx.one if i == j else ctx.zero for i in range(width)]
            for j in range(width)
        ]
    R, pivots = _echelon_rows(ctx, rows)
    pivot_cols = {c: i for (i, c) in pivots}
    out = []
    for f in range(width):
        if f in pivot_cols:
            continue
        vec = [ctx.zero] * width
        vec[f] = ctx.one
        for c, i in pivot_cols.items():
            vec[c] = -R[i][f]
        out.append(vec)
    return out


def _intersection_columns(ctx, a_cols, b_cols):
    """Spanning set (possibly redundant) of span(a) meet span(b)."""
    if not a_cols or not b_cols:
        return []
    n = len(a_cols[0])
    rows = [
        [col[i] for col in a_cols] + [-col[i] for col in b_cols]
        for i in range(n)
    ]
    out = []
    for z in kernel_basis(ctx, rows, len(a_cols) + len(b_cols)):
        vec = [ctx.zero] * n
        for col, c in zip(a_cols, z[: len(a_cols)]):
            for i in range(n):
                vec[i] = vec[i] + col[i] * c
        out.append(vec)
    return out


# ---------------------------------------------------------------------------
# group context


class GroupContext:
    """Shared data for SL_n(Q_p) work at one precision level."""

    def __init__(self, n: int, p: int, precision: int = 32):
        if n < 2 or n > 4:
            raise ValueError("supported ranks are n = 2, 3, 4")
        self.n = n
        self.p = p
        self.precision = precision
        self.weyl: CoxeterSystem = get_system(f"A{n - 1}")
        self.zero = PadicScalar.zero(p)
        self.one = PadicScalar.one(p, precision)

    # -- scalar helpers ------------------------------------------------

    def s(self, x: int) -> PadicScalar:
        return PadicScalar.from_int(x, self.p, self.precision)

    def p_power(self, k: int) -> PadicScalar:
        return PadicScalar(self.p, k, 1, self.precision)

    # -- matrix constructors --------------------------------------------

    def mat(self, entries: Sequence[Sequence]) -> Mat:
        rows = []
        for r in entries:
            rows.append(
                [x if isinstance(x, PadicScalar) else self.s(x) for x in r]
            )
        return Mat(self, rows)

    @property
    def identity(self) -> Mat:
        return self.mat(
            [[1 if i == j else 0 for j in range(self.n)] for i in range(self.n)]
        )

    def diag(self, exps: Sequence[int], units: Optional[Sequence[int]] = None) -> Mat:
        n = self.n
        rows = [[self.zero for _ in range(n)] for _ in range(n)]
        for i in range(n):
            u = 1 if units is None else units[i]
            rows[i][i] = PadicScalar.from_int(u, self.p, self.precision).shift(exps[i])
        return Mat(self, rows)

    def perm(self, sigma: Sequence[int]) -> Mat:
        """Permutation matrix sending e_j to e_{sigma(j)}."""
        n = self.n
        rows = [[self.zero for _ in range(n)] for _ in range(n)]
        for j in range(n):
            rows[sigma[j]][j] = self.one
        return Mat(self, rows)

    @property
    def reversal(self) -> Mat:
        return self.perm(tuple(range(self.n - 1, -1, -1)))

    def monomial(self, sigma: Sequence[int], exps: Sequence[int]) -> Mat:
        return self.perm(sigma) * self.diag(exps)

    # -- reference boundary data ------------------------------------------

    @property
    def full_dims(self) -> Tuple[int, ...]:
        return tuple(range(1, self.n))

    @property
    def c_plus(self) -> "IdealSimplex":
        return boundary_simplex(self.identity, self.full_dims)

    @property
    def c_minus(self) -> "IdealSimplex":
        return boundary_simplex(self.reversal, self.full_dims)

    # -- samplers ----------------------------------------------------------

    def random_unit(self, rng: random.Random) -> PadicScalar:
        u = rng.randrange(1, self.p ** min(self.precision, 8))
        while u % self.p == 0:
            u += 1
        return PadicScalar.from_unit(self.p, 0, u, self.precision)

    def random_zp(self, rng: random.Random, min_val: int = 0) -> PadicScalar:
        if rng.random() < 0.08:
            return self.zero
        v = min_val + rng.choice([0, 0, 0, 1, 1, 2, 3])
        return self.random_unit(rng).shift(v)

    def random_gl_zp(self, rng: random.Random) -> Mat:
        """Random element of GL_n(Z_p): integral with unit determinant."""
        while True:
            m = Mat(
                self,
                [
                    [self.random_zp(rng) for _ in range(self.n)]
                    for _ in range(self.n)
                ],
            )
            d = m.det()
            if not d.is_zeroish() and d.val_floor() == 0:
                return m

    def random_iwahori(self, rng: random.Random) -> Mat:
        """Integral, invertible, congruent to upper triangular mod p."""
        n = self.n
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                if i == j:
                    row.append(self.random_unit(rng))
                elif i < j:
                    row.append(self.random_zp(rng))
                else:
                    row.append(self.random_zp(rng, min_val=1))
            rows.append(row)
        return Mat(self, rows)

    def random_unipotent(self, rng: random.Random, upper: bool = True, min_val: int = -2) -> Mat:
        n = self.n
        rows = [
            [self.one if i == j else self.zero for j in range(n)] for i in range(n)
        ]
        for i in range(n):
            for j in range(n):
                keep = i < j if upper else i > j
                if keep and rng.random() < 0.8:
                    rows[i][j] = self.random_unit(rng).shift(rng.randrange(min_val, 4))
        return Mat(self, rows)

    def random_element(self, rng: random.Random) -> Mat:
        """Random invertible matrix with mildly spread valuations."""
        u = self.random_unipotent(rng, upper=True)
        l = self.random_unipotent(rng, upper=False)
        exps = [rng.randrange(-2, 3) for _ in range(self.n)]
        core = self.diag(exps, units=[rng.randrange(1, self.p ** 3) * self.p + 1 for _ in range(self.n)])
        sigma = list(range(self.n))
        rng.shuffle(sigma)
        return u * (self.perm(sigma) * (core * l))

    def random_parabolic_element(
        self, rng: random.Random, dims: Sequence[int], integral: bool = False
    ) -> Mat:
        """Random element of the standard block-upper parabolic for dims."""
        n = self.n
        cuts = [0, *dims, n]
        off_lo = 0 if integral else -2
        while True:
            rows = [[self.zero for _ in range(n)] for _ in range(n)]
            for b in range(len(cuts) - 1):
                lo, hi = cuts[b], cuts[b + 1]
                for i in range(lo, hi):
                    for j in range(lo, hi):
                        rows[i][j] = self.random_zp(rng)
                    for j in range(hi, n):
                        if rng.random() < 0.7:
                            rows[i][j] = self.random_unit(rng).shift(rng.randrange(off_lo, 3))
            ok = True
            for b in range(len(cuts) - 1):
                lo, hi = cuts[b], cuts[b + 1]
                sub = [[rows[i][j] for j in range(lo, hi)] for i in range(lo, hi)]
                if _det(self, sub).is_zeroish():
                    ok = False
            if ok:
                return Mat(self, rows)


# ---------------------------------------------------------------------------
# type bookkeeping: flag dimensions <-> spherical type (generator subsets)


def dims_of_type(n: int, I: Iterable[int]) -> Tuple[int, ...]:
    """Flag dimensions fixed by the standard parabolic of type I."""
    I = frozenset(I)
    return tuple(d for d in range(1, n) if (d - 1) not in I)


def type_of_dims(n: int, dims: Iterable[int]) -> FrozenSet[int]:
    dims = frozenset(dims)
    return frozenset(i for i in range(n - 1) if (i + 1) not in dims)


# ---------------------------------------------------------------------------
# canonical flag representatives and ideal simplices


def _canonical_flag(ctx: GroupContext, g: Mat, dims: Tuple[int, ...]) -> Mat:
    """Interpolation-basis representative of the flag spanned by g's columns.

    Block by block the columns are reduced to the unique basis of the
    saturated lattice  V_d  intersect  Z_p^n  that is zero at every other
    pivot row and one at its own.  Pivot rows are the residue-field pivot
    rows of the reduced lattice, so the result depends only on the flag,
    not on the representative.
    """
    n = ctx.n
    cols: List[List[PadicScalar]] = [
        [g.rows[i][j] for i in range(n)] for j in range(n)
    ]
    cuts = [0, *dims, n]
    pivot_rows: List[int] = []  # across all finished blocks, in block order
    pivot_of_col: List[int] = [-1] * n
    for b in range(len(cuts) - 1):
        lo, hi = cuts[b], cuts[b + 1]
        block = list(range(lo, hi))
        # clear rows already used by earlier blocks
        for j in block:
            for r in pivot_rows:
                c = cols[j][r]
                if c.is_zeroish():
                    continue
                pj = pivot_of_col.index(r)
                cols[j] = [x - c * y for x, y in zip(cols[j], cols[pj])]
                cols[j][r] = ctx.zero
        done: List[int] = []
        while len(done) < len(block):
            # primitivize the unfinished columns
            for j in block:
                if j in done:
                    continue
                floor = min(
                    cols[j][i].val_floor() for i in range(n) if i not in pivot_rows
                )
                if floor is INF or all(
                    cols[j][i].is_zeroish() for i in range(n) if i not in pivot_rows
                ):
                    raise PrecisionExhausted(
                        "flag degenerate within working precision"
                    )
                if floor != 0:
                    sc = ctx.p_power(-floor)
                    cols[j] = [sc * x for x in cols[j]]
            # smallest row holding a unit of some unfinished column
            pr, pc = None, None
            for r in range(n):
                if r in pivot_rows:
                    continue
                for j in block:
                    if j in done:
                        continue
                    x = cols[j][r]
                    if not x.is_zeroish() and x.val_floor() == 0:
                        pr, pc = r, j
                        break
                if pr is not None:
                    break
            if pr is None:
                raise PrecisionExhausted("flag degenerate within working precision")
            inv_p = cols[pc][pr].inv()
            cols[pc] = [inv_p * x for x in cols[pc]]
            cols[pc][pr] = ctx.one
            for j in block:
                if j == pc:
                    continue
                c = cols[j][pr]
                if not c.is_zeroish():
                    cols[j] = [x - c * y for x, y in zip(cols[j], cols[pc])]
                # the interpolation condition holds exactly by construction
                cols[j][pr] = ctx.zero
            pivot_rows.append(pr)
            pivot_of_col[pc] = pr
            done.append(pc)
        # order the block's columns by pivot row
        block_sorted = sorted(block, key=lambda j: pivot_of_col[j])
        reordered = [cols[j] for j in block_sorted]
        pivots_sorted = [pivot_of_col[j] for j in block_sorted]
        for k, j in enumerate(block):
            cols[j] = reordered[k]
            pivot_of_col[j] = pivots_sorted[k]
    return Mat(ctx, [[cols[j][i] for j in range(n)] for i in range(n)])


class IdealSimplex:
    """Boundary simplex of the building: a flag, canonically presented."""

    __slots__ = ("ctx", "dims", "canon")

    def __init__(self, ctx: GroupContext, dims: Tuple[int, ...], canon: Mat):
        self.ctx = ctx
        self.dims = dims
        self.canon = canon

    @property
    def type(self) -> FrozenSet[int]:
        return type_of_dims(self.ctx.n, self.dims)

    def is_chamber(self) -> bool:
        return self.dims == self.ctx.full_dims

    def translate(self, g: Mat) -> "IdealSimplex":
        return boundary_simplex(g * self.canon, self.dims)

    def face(self, sub_dims: Iterable[int]) -> "IdealSimplex":
        sub = tuple(sorted(sub_dims))
        if not set(sub) <= set(self.dims):
            raise ValueError("face dimensions must refine the simplex")
        return boundary_simplex(self.canon, sub)

    def agreement(self, other: "IdealSimplex"):
        if self.dims != other.dims:
            return -INF
        return mat_agreement(self.canon, other.canon)

    def same(self, other: "IdealSimplex", depth: Optional[int] = None) -> bool:
        if depth is None:
            depth = self.ctx.precision - 4
        return self.dims == other.dims and self.agreement(other) >= depth

    def __eq__(self, other) -> bool:
        if not isinstance(other, IdealSimplex):
            return NotImplemented
        return self.same(other)

    def __hash__(self):
        # hash only structure that equality-within-precision preserves
        return hash((self.ctx.n, self.ctx.p, self.dims))

    def __repr__(self) -> str:
        return f"IdealSimplex(dims={self.dims}, rep={self.canon!r})"


def boundary_simplex(g: Mat, dims: Iterable[int]) -> IdealSimplex:
    dims = tuple(sorted(dims))
    if not dims or dims[-1] >= g.n or dims[0] < 1:
        raise ValueError(f"invalid flag dimensions {dims} for n={g.n}")
    return IdealSimplex(g.ctx, dims, _canonical_flag(g.ctx, g, dims))


def chamber_of(s: IdealSimplex) -> IdealSimplex:
    """A chamber containing s: refine along the canonical representative."""
    if s.is_chamber():
        return s
    return boundary_simplex(s.canon, s.ctx.full_dims)


def opposite(s1: IdealSimplex, s2: IdealSimplex) -> bool:
    """Transversality of two flags of dual types."""
    ctx = s1.ctx
    n = ctx.n
    if s2.dims != tuple(sorted(n - d for d in s1.dims)):
        return False
    for d in s1.dims:
        cols = [
            [s1.canon.rows[i][j] for j in range(d)]
            + [s2.canon.rows[i][j] for j in range(n - d)]
            for i in range(n)
        ]
        if _det(ctx, cols).is_zeroish():
            return False
    return True


def parabolic_membership(g: Mat, s: IdealSimplex, depth: Optional[int] = None) -> bool:
    """Does g stabilize the simplex (equal flags within precision)?"""
    return s.translate(g).same(s, depth)


# ---------------------------------------------------------------------------
# decompositions


def cartan_decomposition(g: Mat) -> Tuple[Mat, Tuple[int, ...], Mat]:
    """g = k1 * diag(p^{a_1 >= ... >= a_n}) * k2 with k's in GL_n(Z_p)."""
    ctx = g.ctx
    n = g.n
    A = [list(r) for r in g.rows]
    k1 = [list(r) for r in ctx.identity.rows]
    k2 = [list(r) for r in ctx.identity.rows]

    def row_op(i_dst, i_src, c):
        # A <- E A with E = I + c e_{i_dst, i_src}; k1 <- k1 E^{-1}
        A[i_dst] = [x + c * y for x, y in zip(A[i_dst], A[i_src])]
        for r in k1:
            r[i_src] = r[i_src] - c * r[i_dst]

    def col_op(j_dst, j_src, c):
        # A <- A F; k2 <- F^{-1} k2
        for r in A:
            r[j_dst] = r[j_dst] + c * r[j_src]
        k2[j_src] = [x - c * y for x, y in zip(k2[j_src], k2[j_dst])]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        for r in k1:
            r[i], r[j] = r[j], r[i]

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        k2[i], k2[j] = k2[j], k2[i]

    exps = []
    for t in range(n):
        piv, best = None, None
        for i in range(t, n):
            for j in range(t, n):
                if not A[i][j].is_zeroish():
                    v = A[i][j].val_floor()
                    if best is None or v < best:
                        piv, best = (i, j), v
        if piv is None:
            raise PrecisionExhausted("matrix singular within precision")
        row_swap(t, piv[0])
        col_swap(t, piv[1])
        # normalize the pivot to an exact power of p
        u_inv = PadicScalar(ctx.p, -A[t][t].valuation(), 1, ctx.precision) * A[t][t]
        c = u_inv.inv()
        for r in A:
            r[t] = r[t] * c
        k2[t] = [u_inv * x for x in k2[t]]
        exps.append(A[t][t].valuation())
        for i in range(t + 1, n):
            if not A[i][t].is_zeroish():
                row_op(i, t, -(A[i][t] * A[t][t].inv()))
                A[i][t] = ctx.zero
        for j in range(t + 1, n):
            if not A[t][j].is_zeroish():
                col_op(j, t, -(A[t][j] * A[t][t].inv()))
                A[t][j] = ctx.zero
    # sort exponents descending by conjugating with a permutation
    order = sorted(range(n), key=lambda i: -exps[i])
    sigma = [0] * n
    for pos, src in enumerate(order):
        sigma[src] = pos
    P = ctx.perm(sigma)
    Pinv = ctx.perm(order)
    K1 = Mat(ctx, k1) * Pinv
    K2 = P * Mat(ctx, k2)
    return K1, tuple(exps[i] for i in order), K2


def iwasawa_decomposition(g: Mat, lower: bool = True) -> Tuple[Mat, Mat, Mat]:
    """g = u * t * k: u unitriangular, t diagonal, k in GL_n(Z_p).

    With lower=True, u is lower unitriangular (the decomposition adapted
    to the descending flag); upper works through reversal conjugation.
    """
    ctx = g.ctx
    if not lower:
        J = ctx.reversal
        u, t, k = iwasawa_decomposition(J * g * J, lower=True)
        return J * u * J, J * t * J, J * k * J
    n = g.n
    A = [list(r) for r in g.rows]
    k = [list(r) for r in ctx.identity.rows]

    def col_op(j_dst, j_src, c):
        for r in A:
            r[j_dst] = r[j_dst] + c * r[j_src]
        k[j_src] = [x - c * y for x, y in zip(k[j_src], k[j_dst])]

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        k[i], k[j] = k[j], k[i]

    for i in range(n):
        piv, best = None, None
        for j in range(i, n):
            if not A[i][j].is_zeroish():
                v = A[i][j].val_floor()
                if best is None or v < best:
                    piv, best = j, v
        if piv is None:
            raise PrecisionExhausted("matrix singular within precision")
        col_swap(i, piv)
        for j in range(i + 1, n):
            if not A[i][j].is_zeroish():
                col_op(j, i, -(A[i][j] * A[i][i].inv()))
                A[i][j] = ctx.zero
    L = Mat(ctx, A)
    t_entries = [A[i][i] for i in range(n)]
    t = Mat(
        ctx,
        [
            [t_entries[i] if i == j else ctx.zero for j in range(n)]
            for i in range(n)
        ],
    )
    tinv = [x.inv() for x in t_entries]
    u = Mat(
        ctx,
        [[A[i][j] * tinv[j] for j in range(n)] for i in range(n)],
    )
    return u, t, Mat(ctx, k)


@dataclass(frozen=True)
class AffineWeylCoset:
    """Label of an Iwahori double coset: monomial permutation and exponents.

    The monomial representative sends e_j to p^{exps[j]} e_{perm[j]}.
    """

    perm: Tuple[int, ...]
    exps: Tuple[int, ...]

    def finite_part(self, system: CoxeterSystem) -> WeylElement:
        return weyl_from_permutation(system, self.perm)

    def is_translation(self) -> bool:
        return self.perm == tuple(range(len(self.perm)))

    def monomial(self, ctx: GroupContext) -> Mat:
        return ctx.perm(self.perm) * ctx.diag(self.exps)

    def to_affine(self) -> AffineWeylElement:
        sys = get_system(f"A{len(self.perm) - 1}")
        w = weyl_from_permutation(sys, self.perm)
        lam = coweight_coords(self.exps)
        return AffineWeylElement(lam, w)


def coweight_coords(exps: Sequence[int]) -> Tuple[int, ...]:
    """Pairing coordinates of an exponent vector: v_j = a_{j+1} - a_j."""
    return tuple(exps[j + 1] - exps[j] for j in range(len(exps) - 1))


def iwahori_coset(g: Mat) -> AffineWeylCoset:
    """Iwahori double coset label of g.

    Pivots take the globally smallest valuation, breaking ties toward the
    bottom row and then the leftmost column; with that rule every clearing
    operation lies in the standard Iwahori subgroup, so the monomial shape
    that remains is the coset label.
    """
    ctx = g.ctx
    n = g.n
    A = [list(r) for r in g.rows]
    free_rows = set(range(n))
    free_cols = set(range(n))
    perm = [0] * n
    exps = [0] * n
    while free_cols:
        piv, best = None, None
        for i in sorted(free_rows):
            for j in sorted(free_cols):
                if not A[i][j].is_zeroish():
                    v = A[i][j].val_floor()
                    if best is None or v < best or (
                        v == best and (i > piv[0] or (i == piv[0] and j < piv[1]))
                    ):
                        piv, best = (i, j), v
        if piv is None:
            raise PrecisionExhausted("matrix singular within precision")
        pi, pj = piv
        pivot = A[pi][pj]
        for i in free_rows:
            if i != pi and not A[i][pj].is_zeroish():
                c = -(A[i][pj] * pivot.inv())
                A[i] = [x + c * y for x, y in zip(A[i], A[pi])]
                A[i][pj] = ctx.zero
        for j in free_cols:
            if j != pj and not A[pi][j].is_zeroish():
                c = -(A[pi][j] * pivot.inv())
                for r in A:
                    r[j] = r[j] + c * r[pj]
                A[pi][j] = ctx.zero
        perm[pj] = pi
        exps[pj] = pivot.valuation()
        free_rows.remove(pi)
        free_cols.remove(pj)
    return AffineWeylCoset(tuple(perm), tuple(exps))


def bruhat_cell(g: Mat) -> Tuple[Mat, Mat, Mat]:
    """g = u * m * b: u upper unitriangular, m monomial, b upper triangular.

    The staircase form for the Bruhat decomposition relative to the upper
    triangular subgroup on both sides; the permutation part of m is the
    Weyl certificate of the cell.
    """
    ctx = g.ctx
    n = g.n
    A = [list(r) for r in g.rows]
    u = [list(r) for r in ctx.identity.rows]
    b = [list(r) for r in ctx.identity.rows]
    used_rows: set = set()
    for j in range(n):
        pivot_row = None
        for i in range(n - 1, -1, -1):
            if i in used_rows:
                continue
            if not A[i][j].is_zeroish():
                pivot_row = i
                break
        if pivot_row is None:
            raise PrecisionExhausted("matrix singular within precision")
        piv_inv = A[pivot_row][j].inv()
        # clear upward inside column j (left mult by upper unitriangular)
        for i in range(pivot_row):
            if i in used_rows or A[i][j].is_zeroish():
                continue
            c = -(A[i][j] * piv_inv)
            A[i] = [x + c * y for x, y in zip(A[i], A[pivot_row])]
            A[i][j] = ctx.zero
            # g = u' A'  keeps holding with u' <- u' E^{-1}
            for r in u:
                r[pivot_row] = r[pivot_row] - c * r[i]
        # clear rightward along the pivot row (right mult by upper tri)
        for jj in range(j + 1, n):
            if A[pivot_row][jj].is_zeroish():
                continue
            c = -(A[pivot_row][jj] * piv_inv)
            for r in A:
                r[jj] = r[jj] + c * r[j]
            A[pivot_row][jj] = ctx.zero
            b[j] = [x - c * y for x, y in zip(b[j], b[jj])]
        used_rows.add(pivot_row)
    return Mat(ctx, u), Mat(ctx, A), Mat(ctx, b)


def monomial_parts(m: Mat) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """(perm, exps) of a monomial matrix: m e_j = p^{exps[j]} u e_{perm[j]}."""
    n = m.n
    perm = []
    exps = []
    for j in range(n):
        hits = [i for i in range(n) if not m.rows[i][j].is_zeroish()]
        if len(hits) != 1:
            raise ValueError("matrix is not monomial within precision")
        perm.append(hits[0])
        exps.append(m.rows[hits[0]][j].valuation())
    return tuple(perm), tuple(exps)


def weyl_distance(c: IdealSimplex, d: IdealSimplex) -> WeylElement:
    """Weyl-valued distance between two ideal chambers."""
    if not (c.is_chamber() and d.is_chamber()):
        raise ValueError("Weyl distance is defined between chambers")
    ctx = c.ctx
    _, m, _ = bruhat_cell(c.canon.inv() * d.canon)
    perm, _ = monomial_parts(m)
    return weyl_from_permutation(ctx.weyl, perm)


def retraction(frame: Mat, center: WeylElement, x: IdealSimplex) -> IdealSimplex:
    """Retraction of an ideal chamber onto the apartment of the frame.

    The apartment's chambers are frame * w * c_plus; the retraction is
    centered at the chamber marked by `center` and preserves the Weyl
    distance from that chamber.
    """
    ctx = frame.ctx
    m_c = frame * ctx.perm(coxeter.permutation_from_weyl(center))
    _, m, _ = bruhat_cell(m_c.inv() * x.canon)
    perm, _ = monomial_parts(m)
    return boundary_simplex(m_c * ctx.perm(perm), ctx.full_dims)


def big_cell_frame(c1: IdealSimplex, c2: IdealSimplex) -> Mat:
    """Frame F of an apartment with F c_plus = c1 and F c_minus = c2.

    Exists exactly when the chambers are opposite; otherwise the Bruhat
    certificate is not the longest element and NotOpposite is raised.
    """
    ctx = c1.ctx
    h = c1.canon.inv() * c2.canon
    u, m, _ = bruhat_cell(h)
    perm, _ = monomial_parts(m)
    if perm != tuple(range(ctx.n - 1, -1, -1)):
        raise NotOpposite("chambers are not opposite")
    return c1.canon * u


def project_to_star(s: IdealSimplex, d: IdealSimplex) -> IdealSimplex:
    """Gate chamber of d in the set of chambers containing s.

    Each gap of the flag of s is refined by the members of d in order:
    the slice added at stage j is the intersection of the gap's top
    with the j-th member of d.  Every minimal gallery from d to a
    chamber of the star passes through the flag built this way.
    """
    ctx = s.ctx
    n = ctx.n
    if not d.is_chamber():
        raise ValueError("projection needs a chamber to project")
    s_cols = [[s.canon[i, j] for i in range(n)] for j in range(n)]
    d_cols = [[d.canon[i, j] for i in range(n)] for j in range(n)]
    cuts = [0, *s.dims, n]
    chain: List[List[PadicScalar]] = []
    for gap in range(len(cuts) - 1):
        hi = cuts[gap + 1]
        hi_cols = s_cols[:hi]
        for j in range(1, n + 1):
            if len(chain) == hi:
                break
            if j == n:
                cand = hi_cols
            else:
                cand = _intersection_columns(ctx, hi_cols, d_cols[:j])
            for v in cand:
                if len(chain) == hi:
                    break
                test = chain + [v]
                rows = [[col[i] for col in test] for i in range(n)]
                if matrix_rank(ctx, rows) == len(test):
                    chain.append(v)
    rows = [[chain[j][i] for j in range(n)] for i in range(n)]
    return boundary_simplex(Mat(ctx, rows), ctx.full_dims)


def unipotent_radical_element(
    s: IdealSimplex, rng: random.Random, min_val: int = 0
) -> Mat:
    """Random element of the unipotent radical of the simplex stabilizer."""
    ctx = s.ctx
    n = ctx.n
    cuts = [0, *s.dims, n]
    rows = [
        [ctx.one if i == j else ctx.zero for j in range(n)] for i in range(n)
    ]
    for b in range(len(cuts) - 1):
        hi = cuts[b + 1]
        lo = cuts[b]
        for i in range(lo, hi):
            for j in range(hi, n):
                if rng.random() < 0.75:
                    rows[i][j] = ctx.random_unit(rng).shift(
                        rng.randrange(min_val, min_val + 4)
                    )
    M = s.canon
    return M * Mat(ctx, rows) * M.inv()
