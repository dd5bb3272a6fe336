"""Finite groups with a marked map X -> G.

Elements are dense indices ``0..k-1`` with the identity at 0.  A group is
described by a vectorised ``product(a, b)`` so that large groups (split
extensions, permutation groups) need not carry a dense Cayley table; the
table is built on demand up to :data:`TABLE_CAP` elements.
"""

from __future__ import annotations

import itertools
import warnings
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CapacityError, InvalidInputError, ParseError, StructureError
from .words import ReducedWord

__all__ = [
    "MarkedFiniteGroup",
    "Subgroup",
    "ORDER_CAP",
    "TABLE_CAP",
    "from_mul_table",
    "from_permutations",
    "evaluate",
    "subgroup_closure",
    "even_subgroup",
    "cyclic",
    "dihedral",
    "symmetric",
    "quaternion",
    "trivial",
    "direct_product",
    "small_groups",
    "group_from_spec",
    "load_group",
    "parse_group",
    "format_group",
]

ORDER_CAP = 10**5
TABLE_CAP = 5000


class IncompleteGenerationWarning(UserWarning):
    pass


class MarkedFiniteGroup:
    """A finite group together with images ``marks`` of the free generators."""

    def __init__(
        self,
        order: int,
        product: Callable[[np.ndarray, np.ndarray], np.ndarray],
        inv: Sequence[int],
        marks: Sequence[int],
        name: str = "",
        table: np.ndarray | None = None,
        labels: Sequence | None = None,
    ):
        self.order = int(order)
        self._product = product
        self.inv = np.asarray(inv, dtype=np.int64)
        self.marks = tuple(int(m) for m in marks)
        self.name = name
        self.labels = labels
        if table is not None:
            self.__dict__["table"] = np.asarray(table, dtype=np.int64)
        for m in self.marks:
            if not 0 <= m < self.order:
                raise InvalidInputError(f"mark {m} is not an element of a group of order {self.order}")

    identity = 0

    def __repr__(self):
        label = self.name or "group"
        return f"MarkedFiniteGroup({label}, order={self.order}, marks={list(self.marks)})"

    @property
    def n(self) -> int:
        return len(self.marks)

    def mul(self, a, b):
        """Product ``a * b``; accepts scalars or broadcastable integer arrays."""
        if "table" in self.__dict__:
            return self.table[a, b]
        out = self._product(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        return int(out) if np.ndim(out) == 0 else out

    @cached_property
    def table(self) -> np.ndarray:
        if self.order > TABLE_CAP:
            raise CapacityError(f"Cayley table of order {self.order} exceeds TABLE_CAP={TABLE_CAP}")
        a = np.arange(self.order)
        return np.asarray(self._product(a[:, None], a[None, :]), dtype=np.int64)

    def with_marks(self, marks: Sequence[int], name: str | None = None) -> "MarkedFiniteGroup":
        g = MarkedFiniteGroup(
            self.order, self._product, self.inv, marks, name=self.name if name is None else name,
            labels=self.labels,
        )
        if "table" in self.__dict__:
            g.__dict__["table"] = self.table
        return g

    @cached_property
    def letter_images(self) -> np.ndarray:
        """Image of each letter index (x_1, x_1^-1, x_2, ...)."""
        out = np.empty(2 * self.n, dtype=np.int64)
        for i, m in enumerate(self.marks):
            out[2 * i] = m
            out[2 * i + 1] = self.inv[m]
        return out

    @cached_property
    def right_mul_letters(self) -> np.ndarray:
        """``R[g, a] = g * image(a)`` for every element g and letter index a."""
        g = np.arange(self.order)[:, None]
        return np.asarray(self.mul(g, self.letter_images[None, :]), dtype=np.int64).reshape(
            self.order, 2 * self.n
        )

    def evaluate(self, w: ReducedWord) -> int:
        return evaluate(self, w)


@dataclass(frozen=True)
class Subgroup:
    members: tuple[int, ...]
    parent_order: int

    def __contains__(self, g):
        return int(g) in self._set

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @cached_property
    def _set(self) -> frozenset:
        return frozenset(self.members)

    @property
    def index(self) -> int:
        return self.parent_order // len(self.members)

    def complement(self) -> tuple[int, ...]:
        return tuple(g for g in range(self.parent_order) if g not in self._set)


# construction ---------------------------------------------------------------


def _check_table(t: np.ndarray) -> None:
    k = t.shape[0]
    if not (t[0] == np.arange(k)).all() or not (t[:, 0] == np.arange(k)).all():
        raise StructureError("element 0 is not a two-sided identity")
    for a in range(k):
        right = np.flatnonzero(t[a] == 0)
        if len(right) == 0 or t[right[0], a] != 0:
            raise StructureError(f"element {a} has no two-sided inverse")
    # (ab)c == a(bc), one left factor at a time to bound memory
    for a in range(k):
        lhs = t[t[a][:, None], np.arange(k)[None, :]]
        rhs = t[a][t]
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            b, c = (int(x) for x in bad[0])
            raise StructureError(f"not associative: ({a}*{b})*{c} != {a}*({b}*{c})")


def from_mul_table(table, marks: Sequence[int] = (), name: str = "") -> MarkedFiniteGroup:
    """Validate a Cayley table (row = left factor) and attach marks."""
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
        raise StructureError(f"table must be square and nonempty, got shape {t.shape}")
    if not np.issubdtype(t.dtype, np.integer):
        raise StructureError("table entries must be integers")
    t = t.astype(np.int64)
    k = t.shape[0]
    if t.min() < 0 or t.max() >= k:
        raise StructureError(f"table entries must lie in 0..{k - 1}")
    _check_table(t)
    inv = np.argmax(t == 0, axis=1)
    return MarkedFiniteGroup(k, lambda a, b: t[a, b], inv, marks, name=name, table=t)


def from_permutations(
    degree: int, gens: Sequence[Sequence[int]], cap: int = ORDER_CAP, name: str = ""
) -> MarkedFiniteGroup:
    """Close a list of permutations (image lists) under composition.

    The product ``g * h`` applies g first, then h.  Elements are numbered by
    first occurrence in a breadth-first closure from the identity, and the
    marks are the input generators.
    """
    gens_arr = []
    for p in gens:
        p = tuple(int(x) for x in p)
        if len(p) != degree or sorted(p) != list(range(degree)):
            raise InvalidInputError(f"{p} is not a permutation of 0..{degree - 1}")
        gens_arr.append(p)
    ident = tuple(range(degree))
    index = {ident: 0}
    elems = [ident]
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for s in gens_arr:
            h = tuple(s[x] for x in g)
            if h not in index:
                if len(elems) >= cap:
                    raise CapacityError(f"permutation group exceeds order cap {cap}")
                index[h] = len(elems)
                elems.append(h)
                queue.append(h)
    perms = np.array(elems, dtype=np.int64).reshape(len(elems), degree)
    lookup = index

    def product(a, b):
        a, b = np.broadcast_arrays(a, b)
        composed = np.take_along_axis(perms[b.ravel()], perms[a.ravel()], axis=-1)
        out = np.fromiter((lookup[tuple(row)] for row in composed.tolist()), dtype=np.int64,
                          count=composed.shape[0])
        return out.reshape(a.shape)

    inv = np.empty(len(elems), dtype=np.int64)
    for i, p in enumerate(elems):
        q = [0] * degree
        for x, y in enumerate(p):
            q[y] = x
        inv[i] = lookup[tuple(q)]
    marks = [lookup[p] for p in gens_arr]
    return MarkedFiniteGroup(len(elems), product, inv, marks, name=name, labels=elems)


# word evaluation and subgroups ----------------------------------------------


def evaluate(G: MarkedFiniteGroup, w: ReducedWord) -> int:
    if w.rank != G.n:
        raise InvalidInputError(f"word of rank {w.rank} evaluated in a group with {G.n} marks")
    R = G.right_mul_letters
    g = 0
    for a in w.indices():
        g = R[g, a]
    return int(g)


def subgroup_closure(G: MarkedFiniteGroup, seed: Iterable[int]) -> Subgroup:
    seed = sorted({int(s) for s in seed})
    gens = np.array(seed, dtype=np.int64)
    seen = np.zeros(G.order, dtype=bool)
    seen[0] = True
    frontier = np.array([0], dtype=np.int64)
    # finite group: closure under right multiplication by the seed is a subgroup
    while len(frontier) and len(gens):
        nxt = np.asarray(G.mul(frontier[:, None], gens[None, :])).ravel()
        nxt = np.unique(nxt[~seen[nxt]])
        seen[nxt] = True
        frontier = nxt
    return Subgroup(tuple(int(x) for x in np.flatnonzero(seen)), G.order)


def even_subgroup(G: MarkedFiniteGroup) -> Subgroup:
    """Elements represented by words of even length in the marks.

    Generated by all products m_a m_b and m_a m_b^-1.  When the marks do not
    generate G an :class:`IncompleteGenerationWarning` is emitted; the result
    is then the even subgroup of the generated subgroup.
    """
    imgs = G.letter_images
    seed = np.asarray(G.mul(imgs[:, None], imgs[None, :])).ravel()
    H = subgroup_closure(G, seed)
    full = subgroup_closure(G, G.marks)
    if len(full) != G.order:
        warnings.warn(
            f"marks generate a subgroup of order {len(full)} < {G.order}", IncompleteGenerationWarning,
            stacklevel=2,
        )
    return H


# standard groups -------------------------------------------------------------


def trivial(n_marks: int = 2) -> MarkedFiniteGroup:
    return from_mul_table([[0]], [0] * n_marks, name="trivial")


def cyclic(k: int, marks: Sequence[int] | None = None) -> MarkedFiniteGroup:
    if k < 1:
        raise InvalidInputError(f"cyclic order must be >= 1, got {k}")
    a = np.arange(k)
    t = (a[:, None] + a[None, :]) % k
    if marks is None:
        marks = [1 % k, 0]
    return from_mul_table(t, marks, name=f"Z/{k}")


def dihedral(k: int) -> MarkedFiniteGroup:
    """Symmetries of the k-gon, order 2k, marks (reflection, rotation)."""
    rot = [(i + 1) % k for i in range(k)]
    ref = [(-i) % k for i in range(k)]
    return from_permutations(k, [ref, rot], name=f"D{2 * k}")


def symmetric(d: int) -> MarkedFiniteGroup:
    """S_d with marks (0 1) and the d-cycle (0 1 ... d-1)."""
    if d < 2:
        return trivial()
    swap = list(range(d))
    swap[0], swap[1] = 1, 0
    cycle = [(i + 1) % d for i in range(d)]
    return from_permutations(d, [swap, cycle], name=f"S{d}")


def quaternion() -> MarkedFiniteGroup:
    """Q8 from its multiplication rules, marks (i, j)."""
    # elements (sign, unit) with unit in {1, i, j, k}
    units = {("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
             ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
             ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
             ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1")}
    elems = [(s, u) for s in (1, -1) for u in "1ijk"]
    pos = {e: t for t, e in enumerate(elems)}

    def times(x, y):
        s, u = units[(x[1], y[1])]
        return (x[0] * y[0] * s, u)

    t = [[pos[times(x, y)] for y in elems] for x in elems]
    return from_mul_table(t, [pos[(1, "i")], pos[(1, "j")]], name="Q8")


def direct_product(G: MarkedFiniteGroup, H: MarkedFiniteGroup) -> MarkedFiniteGroup:
    """G x H with element (g, h) at index g * |H| + h; marks pair up G's and H's marks."""
    tg, th = G.table, H.table
    k = H.order
    a = np.arange(G.order * k)
    t = tg[(a // k)[:, None], (a // k)[None, :]] * k + th[(a % k)[:, None], (a % k)[None, :]]
    n = max(G.n, H.n)
    gm = list(G.marks) + [0] * (n - G.n)
    hm = list(H.marks) + [0] * (n - H.n)
    return from_mul_table(t, [g * k + h for g, h in zip(gm, hm)], name=f"{G.name}x{H.name}")


def small_groups(max_order: int = 8) -> list[MarkedFiniteGroup]:
    """One representative of every isomorphism class of order <= min(max_order, 8)."""
    out = [trivial()]
    z = cyclic
    cand = [
        z(2), z(3), z(4), direct_product(z(2), z(2)), z(5), z(6), symmetric(3), z(7),
        z(8), direct_product(z(4), z(2)), direct_product(direct_product(z(2), z(2)), z(2)),
        dihedral(4), quaternion(),
    ]
    out += [g for g in cand if g.order <= max_order]
    return out


def group_from_spec(spec: str) -> MarkedFiniteGroup:
    """Build a group from a short description.

    Accepted forms: ``trivial``, ``cyclic K``, ``dihedral K`` (order 2K),
    ``symmetric D``, ``quaternion``, ``file PATH``.
    """
    parts = spec.split()
    if not parts:
        raise InvalidInputError("empty group spec")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "trivial":
            return trivial()
        if kind == "quaternion":
            return quaternion()
        if kind == "file":
            return load_group(" ".join(args))
        k = int(args[0])
    except (IndexError, ValueError) as exc:
        raise InvalidInputError(f"bad group spec {spec!r}") from exc
    if kind == "cyclic":
        return cyclic(k)
    if kind == "dihedral":
        return dihedral(k)
    if kind == "symmetric":
        return symmetric(k)
    raise InvalidInputError(f"unknown group kind {kind!r} in {spec!r}")


# text format -----------------------------------------------------------------


def parse_group(text: str, source: str | None = None, cap: int = ORDER_CAP) -> MarkedFiniteGroup:
    """Parse either the table format or the permutation format.

    Table format::

        order k
        <k rows of k indices>
        marks i_1 ... i_n

    Permutation format::

        perm degree d
        <one line of d images per generator>
    """
    lines = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise ParseError("empty group file", source=source)

    def ints(lineno, toks):
        try:
            return [int(t) for t in toks]
        except ValueError:
            raise ParseError(f"expected integers, got {' '.join(toks)!r}", lineno, source) from None

    lineno, head = lines[0]
    toks = head.split()
    if toks[0] == "order":
        if len(toks) != 2:
            raise ParseError("expected 'order k'", lineno, source)
        (k,) = ints(lineno, toks[1:])
        if len(lines) < k + 2:
            raise ParseError(f"expected {k} table rows and a marks line", lines[-1][0], source)
        rows = []
        for i, ln in lines[1 : k + 1]:
            row = ints(i, ln.split())
            if len(row) != k:
                raise ParseError(f"table row has {len(row)} entries, expected {k}", i, source)
            rows.append(row)
        i, ln = lines[k + 1]
        mt = ln.split()
        if mt[0] != "marks":
            raise ParseError("expected 'marks i_1 ... i_n'", i, source)
        marks = ints(i, mt[1:])
        if len(lines) > k + 2:
            raise ParseError("trailing content after marks line", lines[k + 2][0], source)
        try:
            return from_mul_table(rows, marks, name=source or "")
        except InvalidInputError as exc:
            raise ParseError(str(exc), lineno, source) from exc
    if toks[0] == "perm":
        if len(toks) != 3 or toks[1] != "degree":
            raise ParseError("expected 'perm degree d'", lineno, source)
        (d,) = ints(lineno, toks[2:])
        gens = []
        for i, ln in lines[1:]:
            p = ints(i, ln.split())
            if len(p) != d or sorted(p) != list(range(d)):
                raise ParseError(f"not a permutation of 0..{d - 1}", i, source)
            gens.append(p)
        return from_permutations(d, gens, cap=cap, name=source or "")
    raise ParseError("expected 'order k' or 'perm degree d'", lineno, source)


def load_group(path: str | Path, cap: int = ORDER_CAP) -> MarkedFiniteGroup:
    path = Path(path)
    return parse_group(path.read_text(), source=str(path), cap=cap)


def format_group(G: MarkedFiniteGroup) -> str:
    lines = [f"order {G.order}"]
    lines += [" ".join(str(x) for x in row) for row in G.table]
    lines.append("marks " + " ".join(str(m) for m in G.marks))
    return "\n".join(lines) + "\n"
