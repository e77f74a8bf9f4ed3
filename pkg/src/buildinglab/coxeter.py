"""Finite and affine Weyl group combinatorics.

Finite crystallographic systems are given by their Cartan matrices and
realised on root-space coordinates: a group element is the integer matrix
of its action on the simple-root basis.  Words, lengths, descents and the
ShortLex normal form are all derived from that faithful representation,
so two elements are equal exactly when their matrices agree.

Generators are 0-indexed throughout.  For the linear types A_r this means
s_i corresponds to the adjacent transposition of positions i and i+1.

Cocharacter data (translation parts of affine elements, vertex directions
of ideal simplices) lives in fundamental-coweight coordinates: the j-th
coordinate of a vector v is the pairing of v against the j-th simple root.
A translation is I-regular when its coordinate vanishes exactly on I, and
the finite Weyl action in these coordinates is s_i(v) = v - v_i * C[i].
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

Mat = Tuple[Tuple[int, ...], ...]
Vec = Tuple[int, ...]

CARTAN: Dict[str, Mat] = {
    "A1": ((2,),),
    "A2": ((2, -1), (-1, 2)),
    "A3": ((2, -1, 0), (-1, 2, -1), (0, -1, 2)),
    "B2": ((2, -1), (-2, 2)),
    "C2": ((2, -2), (-1, 2)),
    "G2": ((2, -1), (-3, 2)),
}

AFFINE_OF_FINITE = {"A~1": "A1", "A~2": "A2", "A~3": "A3", "C~2": "C2"}


def _identity_mat(r: int) -> Mat:
    return tuple(tuple(1 if i == j else 0 for j in range(r)) for i in range(r))


def _mat_mul(a: Mat, b: Mat) -> Mat:
    r = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(r)) for j in range(r)) for i in range(r)
    )


def _mat_vec(m: Mat, v: Vec) -> Vec:
    r = len(m)
    return tuple(sum(m[i][j] * v[j] for j in range(r)) for i in range(r))


def _mat_inv(m: Mat) -> Mat:
    """Inverse of a small integer matrix of determinant +-1."""
    r = len(m)
    if r == 1:
        d = m[0][0]
        adj: Mat = ((1,),)
    elif r == 2:
        (a, b), (c, dd) = m
        d = a * dd - b * c
        adj = ((dd, -b), (-c, a))
    elif r == 3:
        d = (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )
        # cyclic-index cofactors: the usual (-1)**(i+j) sign is built in
        cof = [
            [
                m[(i + 1) % 3][(j + 1) % 3] * m[(i + 2) % 3][(j + 2) % 3]
                - m[(i + 1) % 3][(j + 2) % 3] * m[(i + 2) % 3][(j + 1) % 3]
                for j in range(3)
            ]
            for i in range(3)
        ]
        adj = tuple(tuple(cof[j][i] for j in range(3)) for i in range(3))
    else:
        raise ValueError(f"rank {r} not supported")
    if d not in (1, -1):
        raise ValueError("matrix is not in the Weyl group representation")
    if d == 1:
        return adj
    return tuple(tuple(-x for x in row) for row in adj)


def _is_negative(v: Vec) -> bool:
    return all(x <= 0 for x in v) and any(x < 0 for x in v)


def positive_form(v: Vec) -> Vec:
    """Flip a root vector to its positive representative."""
    if _is_negative(v):
        return tuple(-x for x in v)
    return v


class WeylElement:
    """One element of a finite Weyl group, identified by its root action."""

    __slots__ = ("system", "mat", "inv_mat", "word")

    def __init__(self, system: "CoxeterSystem", mat: Mat, inv_mat: Mat, word: Tuple[int, ...]):
        self.system = system
        self.mat = mat
        self.inv_mat = inv_mat
        self.word = word  # ShortLex-minimal reduced word

    @property
    def length(self) -> int:
        return len(self.word)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        if self.system is not other.system:
            raise ValueError("elements of different systems")
        return self.system.from_matrix(_mat_mul(self.mat, other.mat))

    def inverse(self) -> "WeylElement":
        return self.system.from_matrix(self.inv_mat)

    def apply_root(self, beta: Vec) -> Vec:
        return _mat_vec(self.mat, beta)

    def apply_coweight(self, v: Vec) -> Vec:
        """Action on fundamental-coweight coordinates."""
        C = self.system.cartan
        out = v
        for i in reversed(self.word):
            out = tuple(out[j] - out[i] * C[i][j] for j in range(len(out)))
        return out

    def left_descents(self) -> FrozenSet[int]:
        sys = self.system
        return frozenset(
            i for i in range(sys.rank) if _is_negative(_mat_vec(self.inv_mat, sys.alpha(i)))
        )

    def right_descents(self) -> FrozenSet[int]:
        sys = self.system
        return frozenset(
            i for i in range(sys.rank) if _is_negative(_mat_vec(self.mat, sys.alpha(i)))
        )

    def is_identity(self) -> bool:
        return not self.word

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.system is other.system and self.mat == other.mat

    def __hash__(self):
        return hash((id(self.system), self.mat))

    def __repr__(self) -> str:
        if not self.word:
            return "e"
        return "*".join(f"s{i}" for i in self.word)


class CoxeterSystem:
    """A finite crystallographic Coxeter system with cached enumeration."""

    def __init__(self, name: str):
        if name not in CARTAN:
            raise ValueError(f"unknown system {name!r}; known: {sorted(CARTAN)}")
        self.name = name
        self.cartan: Mat = CARTAN[name]
        self.rank = len(self.cartan)
        self._simple_mats: List[Mat] = []
        for i in range(self.rank):
            rows = []
            for k in range(self.rank):
                if k != i:
                    rows.append(tuple(1 if j == k else 0 for j in range(self.rank)))
                else:
                    rows.append(
                        tuple(
                            (1 if j == i else 0) - self.cartan[i][j] for j in range(self.rank)
                        )
                    )
            self._simple_mats.append(tuple(rows))
        self._cache: Dict[Mat, WeylElement] = {}
        self._elements: List[WeylElement] | None = None
        ident = _identity_mat(self.rank)
        self._cache[ident] = WeylElement(self, ident, ident, ())

    # -- element construction -------------------------------------------

    def alpha(self, i: int) -> Vec:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    @property
    def identity(self) -> WeylElement:
        return self._cache[_identity_mat(self.rank)]

    def simple(self, i: int) -> WeylElement:
        return self.from_matrix(self._simple_mats[i])

    def from_word(self, word: Iterable[int]) -> WeylElement:
        m = _identity_mat(self.rank)
        for i in word:
            m = _mat_mul(m, self._simple_mats[i])
        return self.from_matrix(m)

    def from_matrix(self, mat: Mat) -> WeylElement:
        el = self._cache.get(mat)
        if el is not None:
            return el
        inv = _mat_inv(mat)
        # greedy smallest-left-descent stripping yields the ShortLex word
        word: List[int] = []
        m, mi = mat, inv
        while m != _identity_mat(self.rank):
            for i in range(self.rank):
                if _is_negative(_mat_vec(mi, self.alpha(i))):
                    word.append(i)
                    s = self._simple_mats[i]
                    m = _mat_mul(s, m)
                    mi = _mat_mul(mi, s)
                    break
            else:
                raise ValueError("matrix is not a Weyl group element")
        el = WeylElement(self, mat, inv, tuple(word))
        self._cache[mat] = el
        return el

    # -- enumeration ------------------------------------------------------

    def elements(self) -> List[WeylElement]:
        if self._elements is None:
            seen = {_identity_mat(self.rank)}
            frontier = [_identity_mat(self.rank)]
            while frontier:
                nxt = []
                for m in frontier:
                    for s in self._simple_mats:
                        m2 = _mat_mul(m, s)
                        if m2 not in seen:
                            seen.add(m2)
                            nxt.append(m2)
                frontier = nxt
            self._elements = sorted(
                (self.from_matrix(m) for m in seen), key=lambda w: (w.length, w.word)
            )
        return self._elements

    def order(self) -> int:
        return len(self.elements())

    def longest_element(self) -> WeylElement:
        w0 = max(self.elements(), key=lambda w: w.length)
        assert all(i in w0.right_descents() for i in range(self.rank))
        return w0

    def positive_roots(self) -> FrozenSet[Vec]:
        return self._roots()[0]

    def _roots(self) -> Tuple[FrozenSet[Vec], FrozenSet[Vec]]:
        if not hasattr(self, "_roots_cache"):
            seen = {self.alpha(i) for i in range(self.rank)}
            frontier = list(seen)
            while frontier:
                nxt = []
                for v in frontier:
                    for s in self._simple_mats:
                        v2 = _mat_vec(s, v)
                        if v2 not in seen:
                            seen.add(v2)
                            nxt.append(v2)
                frontier = nxt
            pos = frozenset(v for v in seen if not _is_negative(v))
            self._roots_cache = (pos, frozenset(seen))
        return self._roots_cache

    # -- opposition --------------------------------------------------------

    def opposition_involution(self) -> Dict[int, int]:
        """i -> j with  w0 * s_i * w0 == s_j."""
        w0 = self.longest_element()
        out = {}
        for i in range(self.rank):
            conj = w0 * self.simple(i) * w0
            for j in range(self.rank):
                if conj == self.simple(j):
                    out[i] = j
                    break
            else:
                raise RuntimeError("conjugate of a generator is not a generator")
        return out

    def opposite_type(self, I: Iterable[int]) -> FrozenSet[int]:
        iota = self.opposition_involution()
        return frozenset(iota[i] for i in I)

    # -- cosets and parabolic subgroups -------------------------------------

    def parabolic(self, J: Iterable[int]) -> List[WeylElement]:
        J = frozenset(J)
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for w in frontier:
                for j in J:
                    w2 = w * self.simple(j)
                    if w2 not in seen:
                        seen.add(w2)
                        nxt.append(w2)
            frontier = nxt
        return sorted(seen, key=lambda w: (w.length, w.word))

    def min_coset_rep(self, w: WeylElement, J: Iterable[int]) -> WeylElement:
        """Minimal-length representative of the right coset w * W_J."""
        J = frozenset(J)
        changed = True
        while changed:
            changed = False
            for j in sorted(J & w.right_descents()):
                w = w * self.simple(j)
                changed = True
                break
        return w

    def min_coset_rep_left(self, I: Iterable[int], w: WeylElement) -> WeylElement:
        I = frozenset(I)
        changed = True
        while changed:
            changed = False
            for i in sorted(I & w.left_descents()):
                w = self.simple(i) * w
                changed = True
                break
        return w

    def min_double_coset_rep(
        self, I: Iterable[int], w: WeylElement, J: Iterable[int]
    ) -> WeylElement:
        prev = None
        while prev != w:
            prev = w
            w = self.min_coset_rep_left(I, self.min_coset_rep(w, J))
        return w

    def parabolic_intersection(
        self, I: Iterable[int], w: WeylElement, J: Iterable[int]
    ) -> FrozenSet[int]:
        """Generators K with W_I meet w W_J w^-1 equal to W_K.

        Valid when w is the minimal representative of its (I, J) double
        coset; callers reduce first.
        """
        J = frozenset(J)
        out = set()
        for i in frozenset(I):
            conj = w.inverse() * self.simple(i) * w
            if any(conj == self.simple(j) for j in J):
                out.add(i)
        return frozenset(out)

    # -- chamber geometry of the Coxeter complex -----------------------------

    def project_to_residue(
        self, r: WeylElement, J: Iterable[int], c: WeylElement
    ) -> WeylElement:
        """Gate of chamber c in the J-residue of chamber r.

        The residue is r*W_J; its gate is the unique chamber closest to c
        in gallery distance, through which every minimal gallery from c
        into the residue passes.
        """
        v = c.inverse() * r
        return c * self.min_coset_rep(v, J)

    def separating_walls(self, c: WeylElement, d: WeylElement) -> FrozenSet[Vec]:
        """Positive roots whose walls separate chambers c and d."""
        v = c.inverse() * d
        crossed = {
            beta
            for beta in self.positive_roots()
            if _is_negative(_mat_vec(v.inv_mat, beta))
        }
        return frozenset(positive_form(c.apply_root(beta)) for beta in crossed)

    def chamber_side(self, c: WeylElement, beta: Vec) -> int:
        """+1 / -1 depending on which half-space for the wall of beta holds c."""
        img = _mat_vec(c.inv_mat, beta)
        return -1 if _is_negative(img) else 1

    def convex_hull(self, c: WeylElement, d: WeylElement) -> FrozenSet[WeylElement]:
        """Chambers lying on some minimal gallery from c to d."""
        target = (c.inverse() * d).length
        return frozenset(
            x
            for x in self.elements()
            if (c.inverse() * x).length + (x.inverse() * d).length == target
        )


@lru_cache(maxsize=None)
def get_system(name: str) -> CoxeterSystem:
    return CoxeterSystem(name)


# -- translation vectors in fundamental-coweight coordinates ---------------


def translation_type(v: Sequence[int]) -> FrozenSet[int]:
    """Generators fixing the translation: indices where the pairing vanishes."""
    return frozenset(i for i, x in enumerate(v) if x == 0)


def is_regular_for(v: Sequence[int], I: Iterable[int]) -> bool:
    return translation_type(v) == frozenset(I)


def regular_translation(system: CoxeterSystem, I: Iterable[int]) -> Vec:
    """A dominant vector whose type is exactly I: zero on I, one elsewhere."""
    I = frozenset(I)
    if not I <= set(range(system.rank)):
        raise ValueError("type is not a subset of the generator set")
    return tuple(0 if i in I else 1 for i in range(system.rank))


def pair(v: Sequence[int], beta: Sequence[int]) -> int:
    """Pairing of a coweight vector against a root, both in their bases."""
    return sum(a * b for a, b in zip(v, beta))


# -- affine elements ---------------------------------------------------------


class AffineWeylElement:
    """Element t_lambda * w of an extended affine Weyl group.

    Acts on coweight space by x -> translation + w(x); the translation is
    stored in fundamental-coweight coordinates of the underlying finite
    system.
    """

    __slots__ = ("translation", "finite")

    def __init__(self, translation: Vec, finite: WeylElement):
        self.translation = tuple(translation)
        self.finite = finite

    def __mul__(self, other: "AffineWeylElement") -> "AffineWeylElement":
        t = tuple(
            a + b
            for a, b in zip(self.translation, self.finite.apply_coweight(other.translation))
        )
        return AffineWeylElement(t, self.finite * other.finite)

    def inverse(self) -> "AffineWeylElement":
        wi = self.finite.inverse()
        t = tuple(-x for x in wi.apply_coweight(self.translation))
        return AffineWeylElement(t, wi)

    def is_translation(self) -> bool:
        return self.finite.is_identity()

    def translation_type(self) -> FrozenSet[int]:
        if not self.is_translation():
            raise ValueError("element has a nontrivial rotational part")
        return translation_type(self.translation)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineWeylElement):
            return NotImplemented
        return self.translation == other.translation and self.finite == other.finite

    def __hash__(self):
        return hash((self.translation, self.finite))

    def __repr__(self) -> str:
        return f"t{self.translation}*{self.finite!r}"


class AffineSystem:
    """Affine Weyl group presented over its finite system."""

    def __init__(self, name: str):
        if name not in AFFINE_OF_FINITE:
            raise ValueError(f"unknown affine system {name!r}")
        self.name = name
        self.finite = get_system(AFFINE_OF_FINITE[name])

    def translation(self, v: Sequence[int]) -> AffineWeylElement:
        return AffineWeylElement(tuple(v), self.finite.identity)

    def element(self, v: Sequence[int], w: WeylElement) -> AffineWeylElement:
        return AffineWeylElement(tuple(v), w)

    @property
    def identity(self) -> AffineWeylElement:
        return AffineWeylElement((0,) * self.finite.rank, self.finite.identity)


# -- permutations and linear Weyl groups ------------------------------------


def permutation_word(sigma: Sequence[int]) -> Tuple[int, ...]:
    """Reduced word of adjacent transpositions composing to sigma.

    sigma maps position i to sigma[i]; the returned word (i_1, ..., i_k)
    satisfies sigma = s_{i_1} o ... o s_{i_k} as functions, where s_i is
    the transposition of i and i+1.
    """
    sig = list(sigma)
    rev: List[int] = []
    done = False
    while not done:
        done = True
        for i in range(len(sig) - 1):
            if sig[i] > sig[i + 1]:
                sig[i], sig[i + 1] = sig[i + 1], sig[i]
                rev.append(i)
                done = False
                break
    return tuple(reversed(rev))


def weyl_from_permutation(system: CoxeterSystem, sigma: Sequence[int]) -> WeylElement:
    """Linear-type bridge: the element of A_{n-1} acting as sigma on positions."""
    if system.rank != len(sigma) - 1 or not system.name.startswith("A"):
        raise ValueError("system rank does not match the permutation")
    return system.from_word(permutation_word(sigma))


def permutation_from_weyl(w: WeylElement) -> Tuple[int, ...]:
    n = w.system.rank + 1
    sig = list(range(n))
    # compose left to right: swapping positions i, i+1 realises sig o s_i
    for i in w.word:
        sig[i], sig[i + 1] = sig[i + 1], sig[i]
    return tuple(sig)
