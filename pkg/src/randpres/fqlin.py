"""Dense linear algebra over a prime field F_q.

Vectors and matrices are plain integer numpy arrays with residues in
``[0, q)``; the modulus travels alongside as an argument.  ``q`` is limited
to primes below 2**16 so every product fits in int64 before reduction.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, ParseError

__all__ = [
    "Q_LIMIT",
    "check_prime",
    "as_fq",
    "row_reduce",
    "rank",
    "batch_rank",
    "generates_space",
    "generating_tuple_count",
    "generation_probability",
    "submodule_closure",
    "format_matrix",
    "parse_matrix",
]

Q_LIMIT = 1 << 16


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    for d in range(2, math.isqrt(q) + 1):
        if q % d == 0:
            return False
    return True


def check_prime(q: int) -> int:
    q = int(q)
    if not is_prime(q):
        raise InvalidInputError(f"modulus {q} is not prime")
    if q >= Q_LIMIT:
        raise InvalidInputError(f"modulus {q} exceeds the supported limit {Q_LIMIT}")
    return q


@lru_cache(maxsize=None)
def _inverses(q: int) -> np.ndarray:
    inv = np.zeros(q, dtype=np.int64)
    for x in range(1, q):
        inv[x] = pow(x, q - 2, q)
    return inv


def as_fq(a, q: int) -> np.ndarray:
    return np.mod(np.asarray(a, dtype=np.int64), q)


def batch_rank(mats: np.ndarray, q: int) -> np.ndarray:
    """Ranks of a stack of matrices ``(B, r, c)`` over F_q.

    Gaussian elimination run in lockstep over the batch; within each matrix
    the pivot is the first row (at or below the current rank) with a nonzero
    entry in the current column.
    """
    check_prime(q)
    A = as_fq(mats, q).copy()
    if A.ndim != 3:
        raise InvalidInputError("batch_rank expects a 3-d array")
    B, r, c = A.shape
    rank = np.zeros(B, dtype=np.int64)
    if B == 0 or r == 0 or c == 0:
        return rank
    inv = _inverses(q)
    rows = np.arange(r)
    for col in range(c):
        cand = (A[:, :, col] != 0) & (rows[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        b = np.flatnonzero(has)
        piv = np.argmax(cand[b], axis=1)
        top = rank[b]
        pivot_rows = A[b, piv].copy()
        A[b, piv] = A[b, top]
        pivot_rows = pivot_rows * inv[pivot_rows[:, col]][:, None] % q
        A[b, top] = pivot_rows
        below = rows[None, :] > top[:, None]
        factors = A[b, :, col] * below
        A[b] = (A[b] - factors[:, :, None] * pivot_rows[:, None, :]) % q
        rank[b] += 1
        if (rank >= r).all():
            break
    return rank


def row_reduce(M, q: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    check_prime(q)
    A = as_fq(M, q).copy()
    if A.ndim != 2:
        raise InvalidInputError("row_reduce expects a matrix")
    r, c = A.shape
    inv = _inverses(q)
    pivots = []
    top = 0
    for col in range(c):
        if top == r:
            break
        nz = np.flatnonzero(A[top:, col])
        if len(nz) == 0:
            continue
        p = top + nz[0]
        A[[top, p]] = A[[p, top]]
        A[top] = A[top] * inv[A[top, col]] % q
        others = np.flatnonzero(A[:, col])
        others = others[others != top]
        A[others] = (A[others] - A[others, col][:, None] * A[top][None, :]) % q
        pivots.append(col)
        top += 1
    return A[:top], pivots


def rank(M, q: int) -> int:
    A = as_fq(M, q)
    if A.ndim != 2:
        raise InvalidInputError("rank expects a matrix")
    return int(batch_rank(A[None], q)[0])


def generates_space(vectors: Sequence, dim: int, q: int) -> bool:
    vecs = [as_fq(v, q) for v in vectors]
    for v in vecs:
        if v.shape != (dim,):
            raise InvalidInputError(f"vector of shape {v.shape} in a space of dimension {dim}")
    if not vecs:
        return dim == 0
    return rank(np.stack(vecs), q) == dim


def generating_tuple_count(E_size: int, m: int) -> int:
    """Number of m-tuples in (E^m)^m generating E^m, namely prod_{j=1}^m (1 - |E|^-j) |E|^(m^2).

    Computed in exact integers as prod_{j=1}^m (|E|^m - |E|^(m-j)).
    """
    if E_size < 2 or m < 1:
        raise InvalidInputError("need E_size >= 2 and m >= 1")
    out = 1
    for j in range(1, m + 1):
        out *= E_size**m - E_size ** (m - j)
    return out


def generation_probability(q: int, dim: int, count: int) -> float:
    """Probability that ``count`` iid uniform vectors span F_q^dim."""
    if count < 0 or dim < 0:
        raise InvalidInputError("dim and count must be nonnegative")
    if count < dim:
        return 0.0
    p = 1.0
    for i in range(dim):
        p *= 1.0 - float(q) ** (i - count)
    return p


def _check_action_closed(action: np.ndarray, q: int) -> None:
    keys = {a.tobytes() for a in action}
    for x in action:
        for y in action:
            if (x @ y % q).tobytes() not in keys:
                raise InvalidInputError("action matrices are not closed under multiplication")


def submodule_closure(vectors: Sequence, action: Sequence, q: int, check: bool = True) -> np.ndarray:
    """Basis (RREF rows) of the smallest action-stable subspace containing ``vectors``."""
    acts = as_fq(np.asarray(action), q)
    if acts.ndim != 3 or acts.shape[1] != acts.shape[2]:
        raise InvalidInputError("action must be a list of square matrices")
    dim = acts.shape[1]
    vecs = np.asarray(vectors, dtype=np.int64) if len(vectors) else np.zeros((0, dim), dtype=np.int64)
    if vecs.ndim != 2 or vecs.shape[1] != dim:
        raise InvalidInputError(f"vectors of shape {vecs.shape} under {dim}x{dim} action")
    vecs = as_fq(vecs, q)
    if check:
        _check_action_closed(acts, q)
    basis, _ = row_reduce(vecs, q) if len(vecs) else (np.zeros((0, dim), dtype=np.int64), [])
    while len(basis):
        images = np.einsum("kij,rj->kri", acts, basis).reshape(-1, dim) % q
        new, _ = row_reduce(np.vstack([basis, images]), q)
        if len(new) == len(basis):
            break
        basis = new
    return basis


def format_matrix(M, q: int) -> str:
    A = as_fq(M, q)
    if A.ndim == 1:
        A = A[None]
    return f"q {q}\n" + "\n".join(" ".join(str(int(x)) for x in row) for row in A) + "\n"


def parse_matrix(text: str) -> tuple[np.ndarray, int]:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if not lines or not lines[0][1].startswith("q "):
        raise ParseError("expected header 'q <prime>'", 1)
    try:
        q = check_prime(int(lines[0][1].split()[1]))
    except (ValueError, IndexError) as exc:
        raise ParseError(f"bad header: {exc}", lines[0][0]) from None
    rows = []
    for i, ln in lines[1:]:
        try:
            row = [int(x) for x in ln.split()]
        except ValueError:
            raise ParseError("expected integer residues", i) from None
        if rows and len(row) != len(rows[0]):
            raise ParseError("ragged row", i)
        if any(not 0 <= x < q for x in row):
            raise ParseError(f"residues must lie in [0, {q})", i)
        rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(len(rows), -1), q
