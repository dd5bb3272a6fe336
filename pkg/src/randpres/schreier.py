"""Schreier rewriting into H_1(K; F_q) for K = ker(f: F(X) -> J).

Cosets of K are the elements of J.  A breadth-first transversal T gives the
Schreier generators ``s(t, i) = T(t) x_i T(t f(x_i))^-1`` for the non-tree
pairs ``(t, i)``; there are ``D = 1 + |J|(n-1)`` of them and they form a free
basis of K, so ``K' = H_1(K; F_q) = F_q^D``.

Plain rewriting ``w -> ab(w T(f(w))^-1)`` fails to be a crossed homomorphism
by the transversal 2-cocycle ``c(j1, j2) = ab(T(j1) T(j2) T(j1 j2)^-1)``.
Because |J| is invertible mod q this cocycle is the coboundary of
``b(j) = |J|^-1 sum_k c(j, k)``, and ``v(w) = ab(w T(f(w))^-1) + b(f(w))``
satisfies ``v(uw) = v(u) + f(u).v(w)``.  The pair ``(v(w), f(w))`` is then
a homomorphism F -> K' x| J that restricts to the abelianisation on K.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, InvalidInputError, PreconditionError
from .fqlin import _inverses, batch_rank, check_prime, submodule_closure
from .groups import ORDER_CAP, MarkedFiniteGroup, subgroup_closure
from .words import ReducedWord, index_to_letter, letter_to_index, reduce

__all__ = [
    "SchreierSystem",
    "CrossedImage",
    "ModuleRank",
    "build_system",
    "crossed_evaluate",
    "crossed_evaluate_batch",
    "rewrite_to_generators",
    "action_matrices",
    "module_generates",
    "module_generates_batch",
    "min_module_generators",
    "build_split_extension",
    "SEARCH_CAP",
]

SEARCH_CAP = 10**7


@dataclass(frozen=True)
class CrossedImage:
    vector: np.ndarray
    jpart: int

    def __eq__(self, other):
        return (
            isinstance(other, CrossedImage)
            and self.jpart == other.jpart
            and np.array_equal(self.vector, other.vector)
        )


@dataclass(frozen=True, eq=False)
class SchreierSystem:
    J: MarkedFiniteGroup  # marks are the f-images
    q: int
    transversal: tuple[ReducedWord, ...]  # indexed by J element
    generators: tuple[tuple[int, int], ...]  # column -> (coset t, generator i >= 1)
    action: np.ndarray  # (|J|, D, D)
    correction: np.ndarray  # (|J|, D): the coboundary b
    letter_table: np.ndarray = field(repr=False)  # (|J|, 2n, D): action[j] @ v(letter)

    @property
    def n(self) -> int:
        return self.J.n

    @property
    def D(self) -> int:
        return len(self.generators)

    @property
    def sgen_index(self) -> dict[tuple[int, int], int]:
        return {pair: col for col, pair in enumerate(self.generators)}

    def generator_word(self, col: int) -> ReducedWord:
        t, i = self.generators[col]
        u = self.J.mul(t, self.J.marks[i - 1])
        return reduce(
            list(self.transversal[t]) + [i] + list(self.transversal[u].inverse()), self.n
        )

    def to_dict(self) -> dict:
        return {
            "J_order": self.J.order,
            "f_images": list(self.J.marks),
            "n": self.n,
            "q": self.q,
            "D": self.D,
            "transversal": {str(j): str(w) for j, w in enumerate(self.transversal)},
            "generators": [
                {"column": c, "coset": t, "letter": i, "word": str(self.generator_word(c))}
                for c, (t, i) in enumerate(self.generators)
            ],
            "action": {str(j): self.action[j].tolist() for j in range(self.J.order)},
        }


@dataclass(frozen=True)
class ModuleRank:
    lower: int
    upper: int
    exact: bool
    witness: np.ndarray | None = None

    @property
    def value(self) -> int:
        """Certified value when exact, else the upper bound."""
        return self.upper


def _rewrite(J: MarkedFiniteGroup, col: dict, letters: Sequence[int], D: int):
    """Plain Schreier rewrite of a letter sequence: (vector over Z, final coset)."""
    v = np.zeros(D, dtype=np.int64)
    t = 0
    for a in letters:
        i = abs(a)
        if a > 0:
            if (t, i) in col:
                v[col[(t, i)]] += 1
            t = J.mul(t, J.marks[i - 1])
        else:
            t = J.mul(t, J.inv[J.marks[i - 1]])
            if (t, i) in col:
                v[col[(t, i)]] -= 1
    return v, int(t)


def build_system(J: MarkedFiniteGroup, f_images: Sequence[int] | None, q: int) -> SchreierSystem:
    """Coset data, rewriting and J-action for ``f: x_i -> f_images[i]``."""
    if f_images is None:
        f_images = J.marks
    f_images = [int(x) for x in f_images]
    n = len(f_images)
    if n < 2:
        raise InvalidInputError(f"need n >= 2 generators, got {n}")
    Jm = J.with_marks(f_images)
    if len(subgroup_closure(Jm, f_images)) != Jm.order:
        raise InvalidInputError(f"f-images {f_images} do not generate J (order {Jm.order})")
    q = check_prime(q)
    k = Jm.order
    if q <= k:
        raise PreconditionError(f"q must exceed |J|: q={q}, |J|={k}")

    # breadth-first transversal, letters in order x_1, x_1^-1, x_2, ...
    words: dict[int, tuple[int, ...]] = {0: ()}
    tree: set[tuple[int, int]] = set()
    queue = deque([0])
    imgs = Jm.letter_images
    while queue:
        t = queue.popleft()
        for a in range(2 * n):
            u = int(Jm.mul(t, imgs[a]))
            if u in words:
                continue
            letter = index_to_letter(a)
            words[u] = words[t] + (letter,)
            tree.add((t, letter) if letter > 0 else (u, -letter))
            queue.append(u)
    transversal = tuple(ReducedWord(words[j], n) for j in range(k))
    gens = tuple((t, i) for t in range(k) for i in range(1, n + 1) if (t, i) not in tree)
    D = len(gens)
    if D != 1 + k * (n - 1) or D != k * n - (k - 1):
        raise AssertionError(f"Schreier generator count {D} != 1 + |J|(n-1)")
    col = {pair: c for c, pair in enumerate(gens)}

    def rewrite(letters):
        return _rewrite(Jm, col, letters, D)

    # conjugation action: column c of action[j] is ab(T(j) s_c T(j)^-1)
    action = np.zeros((k, D, D), dtype=np.int64)
    for c, (t, i) in enumerate(gens):
        u = int(Jm.mul(t, f_images[i - 1]))
        s = list(transversal[t]) + [i] + list(transversal[u].inverse())
        for j in range(k):
            Tj = list(transversal[j])
            vec, end = rewrite(Tj + s + [-a for a in reversed(Tj)])
            assert end == 0
            action[j][:, c] = vec
    action %= q
    eye = np.eye(D, dtype=np.int64)
    if not np.array_equal(action[0], eye):
        raise AssertionError("identity does not act trivially")
    table = Jm.table
    for j1 in range(k):
        for j2 in range(k):
            if not np.array_equal(action[j1] @ action[j2] % q, action[table[j1, j2]]):
                raise AssertionError(f"action is not a homomorphism at ({j1}, {j2})")

    # coboundary correcting the transversal cocycle
    S = np.zeros((k, D), dtype=np.int64)
    for j1 in range(k):
        for j2 in range(k):
            vec, end = rewrite(list(transversal[j1]) + list(transversal[j2]))
            assert end == table[j1, j2]
            S[j1] += vec
    correction = S * int(_inverses(q)[k % q]) % q

    letter_vecs = np.zeros((2 * n, D), dtype=np.int64)
    for a in range(2 * n):
        vec, end = rewrite([index_to_letter(a)])
        letter_vecs[a] = (vec + correction[end]) % q
    letter_table = np.einsum("jde,ae->jad", action, letter_vecs) % q

    return SchreierSystem(Jm, q, transversal, gens, action, correction, letter_table)


def crossed_evaluate(sys: SchreierSystem, w: ReducedWord) -> CrossedImage:
    if w.rank != sys.n:
        raise InvalidInputError(f"word of rank {w.rank} in a system of rank {sys.n}")
    vec, end = _rewrite(sys.J, sys.sgen_index, w.letters, sys.D)
    return CrossedImage((vec + sys.correction[end]) % sys.q, end)


def crossed_evaluate_batch(sys: SchreierSystem, letters: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised evaluation of a ``(B, l)`` array of letter indices.

    Accumulates ``v <- v + f(prefix).v(letter)`` letter by letter.
    """
    letters = np.asarray(letters, dtype=np.int64)
    B, l = letters.shape
    J = sys.J
    jtab = J.right_mul_letters
    v = np.zeros((B, sys.D), dtype=np.int64)
    j = np.zeros(B, dtype=np.int64)
    for t in range(l):
        a = letters[:, t]
        v += sys.letter_table[j, a]
        j = jtab[j, a]
    return v % sys.q, j


def rewrite_to_generators(sys: SchreierSystem, w: ReducedWord) -> list[tuple[int, int]]:
    """Reidemeister-Schreier rewrite of w T(f(w))^-1 as (column, exponent) pairs."""
    col = sys.sgen_index
    J = sys.J
    out = []
    t = 0
    for a in w.letters:
        i = abs(a)
        if a > 0:
            if (t, i) in col:
                out.append((col[(t, i)], 1))
            t = int(J.mul(t, J.marks[i - 1]))
        else:
            t = int(J.mul(t, J.inv[J.marks[i - 1]]))
            if (t, i) in col:
                out.append((col[(t, i)], -1))
    return out


def action_matrices(sys: SchreierSystem) -> dict[int, np.ndarray]:
    return {j: sys.action[j] for j in range(sys.J.order)}


def _orbit_stack(sys: SchreierSystem, vecs: np.ndarray) -> np.ndarray:
    """``(B, r, D)`` -> ``(B, r|J|, D)``: every J-translate of every vector."""
    B, r, D = vecs.shape
    orb = np.einsum("jde,bre->brjd", sys.action, vecs) % sys.q
    return orb.reshape(B, r * sys.J.order, D)


def module_generates(sys: SchreierSystem, relator_vectors: Sequence) -> bool:
    """Do the vectors generate all of K' as an F_q[J]-module?"""
    vecs = [np.asarray(v, dtype=np.int64) for v in relator_vectors]
    for v in vecs:
        if v.shape != (sys.D,):
            raise InvalidInputError(f"vector of shape {v.shape}, expected ({sys.D},)")
    if not vecs:
        return sys.D == 0
    basis = submodule_closure(vecs, sys.action, sys.q, check=False)
    return len(basis) == sys.D


def module_generates_batch(sys: SchreierSystem, vecs: np.ndarray) -> np.ndarray:
    """Vectorised :func:`module_generates` over ``(B, r, D)``."""
    vecs = np.asarray(vecs, dtype=np.int64)
    if vecs.ndim != 3 or vecs.shape[2] != sys.D:
        raise InvalidInputError(f"expected shape (B, r, {sys.D}), got {vecs.shape}")
    if vecs.shape[1] == 0:
        return np.full(vecs.shape[0], sys.D == 0)
    return batch_rank(_orbit_stack(sys, vecs), sys.q) == sys.D


def min_module_generators(sys: SchreierSystem, search_cap: int = SEARCH_CAP) -> ModuleRank:
    """Bounds on the minimal number of F_q[J]-module generators of K'.

    The lower bound is ceil(D/|J|).  The upper bound greedily prunes the
    standard basis.  Sizes m between them are searched exhaustively over
    sets of distinct nonzero vectors while q^(D m) <= ``search_cap``.
    """
    D, q = sys.D, sys.q
    lower = math.ceil(D / sys.J.order)
    keep = list(range(D))
    eye = np.eye(D, dtype=np.int64)
    for c in range(D):
        trial = [x for x in keep if x != c]
        if trial and module_generates(sys, eye[trial]):
            keep = trial
    upper, witness = len(keep), eye[keep]
    exact = lower == upper
    if not exact:
        nonzero = np.array(list(itertools.product(range(q), repeat=D))[1:], dtype=np.int64)
        for m in range(lower, upper):
            if q ** (D * m) > search_cap:
                break
            found = None
            combos = itertools.combinations(range(len(nonzero)), m)
            while True:
                chunk = np.array(list(itertools.islice(combos, 20000)), dtype=np.int64)
                if len(chunk) == 0:
                    break
                ok = module_generates_batch(sys, nonzero[chunk])
                if ok.any():
                    found = nonzero[chunk[np.argmax(ok)]]
                    break
            if found is not None:
                upper, witness, exact = m, found, True
                break
        else:
            exact = True  # every size below the greedy bound was ruled out
    return ModuleRank(lower, upper, exact, witness)


def build_split_extension(sys: SchreierSystem, cap: int = ORDER_CAP) -> MarkedFiniteGroup:
    """The group K' x| J with marks the crossed images of the generators.

    Element ``(v, j)`` has index ``j * q^D + sum_k v_k q^k``.
    """
    q, D, J = sys.q, sys.D, sys.J
    size = q**D
    order = size * J.order
    if order > cap:
        raise CapacityError(f"split extension of order {order} exceeds cap {cap}")
    powers = q ** np.arange(D, dtype=np.int64)
    jtab = J.table
    action = sys.action

    def decode(x):
        x = np.asarray(x, dtype=np.int64)
        return (x[..., None] % size) // powers % q, x // size

    def encode(v, j):
        return j * size + (v % q) @ powers

    def product(a, b):
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        va, ja = decode(a)
        vb, jb = decode(b)
        v = va + np.einsum("...de,...e->...d", action[ja], vb)
        return encode(v, jtab[ja, jb])

    idx = np.arange(order)
    v, j = decode(idx)
    jinv = J.inv[j]
    inv = encode(-np.einsum("...de,...e->...d", action[jinv], v), jinv)
    marks = []
    for i in range(1, sys.n + 1):
        img = crossed_evaluate(sys, ReducedWord((i,), sys.n))
        marks.append(int(encode(img.vector, img.jpart)))
    return MarkedFiniteGroup(order, product, inv, marks, name=f"F_{q}^{D} x| {J.name or 'J'}")


def fiber_indices(sys: SchreierSystem) -> np.ndarray:
    """Indices in :func:`build_split_extension` of the elements with trivial J-part."""
    return np.arange(sys.q**sys.D)


def decode_fiber(sys: SchreierSystem, idx: np.ndarray) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    return idx[..., None] // (sys.q ** np.arange(sys.D, dtype=np.int64)) % sys.q
