"""Non-backtracking random walks on a marked finite group.

The state space is ``Omega = G x {±1..±n}``; state ``(g, a)`` (``a`` a letter
index) is stored at flat position ``g * 2n + a``.  A step from ``(h, a)``
appends a letter ``b != a^-1`` with probability ``alpha[a, b]`` and moves to
``(h * image(b), b)``.  The walk starts at ``(image(a), a)`` with probability
``beta[a]``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import InvalidInputError, PreconditionError
from .groups import MarkedFiniteGroup, Subgroup, even_subgroup, subgroup_closure

__all__ = [
    "WalkChain",
    "StepDistribution",
    "MixingResult",
    "build_chain",
    "unbiased_weights",
    "lemma1_criterion",
    "is_irreducible",
    "period",
    "index2_subgroup",
    "distribution_at",
    "iter_distributions",
    "summed_distribution",
    "tv_to_uniform",
    "mixing_length",
    "EXACT_STATE_CAP",
    "EXACT_STEP_CAP",
]

EXACT_STATE_CAP = 200
EXACT_STEP_CAP = 30


def unbiased_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    """alpha = 1/(2n-1) off the inverse letter, beta = 1/(2n)."""
    alpha = np.full((2 * n, 2 * n), 1.0 / (2 * n - 1))
    alpha[np.arange(2 * n), np.arange(2 * n) ^ 1] = 0.0
    beta = np.full(2 * n, 1.0 / (2 * n))
    return alpha, beta


@dataclass(frozen=True, eq=False)
class WalkChain:
    group: MarkedFiniteGroup
    alpha: np.ndarray
    beta: np.ndarray
    unbiased: bool = True

    @property
    def n(self) -> int:
        return self.group.n

    @property
    def n_states(self) -> int:
        return self.group.order * 2 * self.n

    def state(self, g: int, letter_index: int) -> int:
        return g * 2 * self.n + letter_index

    @cached_property
    def successors(self) -> np.ndarray:
        """``(n_states, 2n-1)`` array of successor states, in letter-index order."""
        G, m = self.group, 2 * self.n
        R = G.right_mul_letters
        out = np.empty((G.order, m, m - 1), dtype=np.int64)
        for a in range(m):
            bs = [b for b in range(m) if b != a ^ 1]
            out[:, a, :] = R[:, bs] * m + np.array(bs)
        return out.reshape(-1, m - 1)

    @cached_property
    def successor_probs(self) -> np.ndarray:
        m = 2 * self.n
        rows = []
        for a in range(m):
            rows.append([self.alpha[a, b] for b in range(m) if b != a ^ 1])
        return np.tile(np.array(rows), (self.group.order, 1))

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        N, d = self.successors.shape
        rows = np.repeat(np.arange(N), d)
        return sp.csr_matrix((np.ones(N * d, dtype=np.int8), (rows, self.successors.ravel())), shape=(N, N))

    @cached_property
    def transition_matrix(self) -> sp.csr_matrix:
        N, d = self.successors.shape
        rows = np.repeat(np.arange(N), d)
        return sp.csr_matrix((self.successor_probs.ravel(), (rows, self.successors.ravel())), shape=(N, N))

    def initial(self) -> np.ndarray:
        mass = np.zeros((self.group.order, 2 * self.n))
        mass[self.group.letter_images, np.arange(2 * self.n)] = self.beta
        return mass

    def step(self, mass: np.ndarray) -> np.ndarray:
        """Push a ``(|G|, 2n)`` mass array one step forward."""
        moved = mass @ self.alpha
        out = np.zeros_like(moved)
        # each column b is a permutation of rows, so no index collides
        out[self.group.right_mul_letters, np.arange(2 * self.n)[None, :]] = moved
        return out


@dataclass(frozen=True)
class StepDistribution:
    step: int
    mass: np.ndarray  # shape (|G|, 2n); exact mode holds Fractions

    def __getitem__(self, state: tuple[int, int]):
        g, a = state
        return self.mass[g, a]

    def summed(self) -> np.ndarray:
        return self.mass.sum(axis=1)


@dataclass(frozen=True)
class MixingResult:
    period: int
    tol: float
    max_l: int
    length: int | None = None  # period 1
    even_length: int | None = None  # period 2
    odd_length: int | None = None
    tv: float | None = None

    @property
    def mixed(self) -> bool:
        if self.period == 1:
            return self.length is not None
        return self.even_length is not None and self.odd_length is not None

    def __str__(self):
        def fmt(v):
            return str(v) if v is not None else f"not mixed by {self.max_l}"

        if self.period == 1:
            return f"mixing length {fmt(self.length)} (tol {self.tol:g})"
        return f"mixing length even {fmt(self.even_length)}, odd {fmt(self.odd_length)} (tol {self.tol:g})"


def _check_weights(alpha, beta, n):
    m = 2 * n
    if alpha.shape != (m, m) or beta.shape != (m,):
        raise InvalidInputError(f"alpha must be {m}x{m} and beta length {m}")
    off = np.ones((m, m), dtype=bool)
    off[np.arange(m), np.arange(m) ^ 1] = False
    if np.any(alpha[~off] != 0):
        raise InvalidInputError("alpha must vanish on the inverse letter (non-backtracking)")
    if np.any(alpha[off] <= 0) or np.any(beta <= 0):
        raise InvalidInputError("alpha and beta entries must be strictly positive")
    if np.any(np.abs(alpha.sum(axis=1) - 1) > 1e-9) or abs(beta.sum() - 1) > 1e-9:
        raise InvalidInputError("alpha rows and beta must each sum to 1 (tol 1e-9)")


def build_chain(G: MarkedFiniteGroup, weights: tuple[Sequence, Sequence] | None = None) -> WalkChain:
    """Chain for ``(G, marks)``; ``weights=(alpha, beta)`` with alpha a 2n x 2n
    matrix indexed by (previous, next) letter index; unbiased when omitted."""
    if G.n < 2:
        raise InvalidInputError(f"need at least 2 marks, got {G.n}")
    if weights is None:
        alpha, beta = unbiased_weights(G.n)
        return WalkChain(G, alpha, beta, unbiased=True)
    alpha = np.asarray(weights[0], dtype=float)
    beta = np.asarray(weights[1], dtype=float)
    _check_weights(alpha, beta, G.n)
    return WalkChain(G, alpha, beta, unbiased=False)


# classification --------------------------------------------------------------


def lemma1_criterion(G: MarkedFiniteGroup) -> bool:
    """Group-theoretic irreducibility test: the marks generate G.

    A finite group is never free on n >= 2 generators, so generation is the
    whole condition.
    """
    return len(subgroup_closure(G, G.marks)) == G.order


def is_irreducible(chain: WalkChain) -> bool:
    ncomp, _ = connected_components(chain.adjacency, directed=True, connection="strong")
    return ncomp == 1


def _bfs_levels(chain: WalkChain, source: int = 0) -> np.ndarray:
    succ = chain.successors
    level = np.full(chain.n_states, -1, dtype=np.int64)
    level[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in succ[u]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
    return level


def period(chain: WalkChain) -> int:
    """gcd of ``level(u) + 1 - level(v)`` over all edges, for BFS levels from state 0."""
    if not is_irreducible(chain):
        raise PreconditionError("period is only defined here for an irreducible chain")
    level = _bfs_levels(chain)
    d = chain.successors.shape[1]
    u = np.repeat(np.arange(chain.n_states), d)
    v = chain.successors.ravel()
    p = int(np.gcd.reduce(np.abs(level[u] + 1 - level[v])))
    if p not in (1, 2):
        raise AssertionError(f"period {p} contradicts the 1-or-2 dichotomy")
    return p


def index2_subgroup(chain: WalkChain) -> Subgroup:
    """The unique index-2 subgroup avoiding every mark, for a period-2 chain."""
    if period(chain) != 2:
        raise PreconditionError("chain is aperiodic; no index-2 subgroup is forced")
    H = even_subgroup(chain.group)
    if H.index != 2 or any(m in H for m in chain.group.marks):
        raise AssertionError("even subgroup of a period-2 chain is not an index-2 mark-free subgroup")
    return H


# distributions ---------------------------------------------------------------


def _exact_weights(chain: WalkChain):
    m = 2 * chain.n
    if chain.unbiased:
        a = Fraction(1, m - 1)
        alpha = np.array([[a if b != x ^ 1 else Fraction(0) for b in range(m)] for x in range(m)], dtype=object)
        beta = np.array([Fraction(1, m)] * m, dtype=object)
    else:
        alpha = np.array([[Fraction(v).limit_denominator(10**12) for v in row] for row in chain.alpha], dtype=object)
        beta = np.array([Fraction(v).limit_denominator(10**12) for v in chain.beta], dtype=object)
    return alpha, beta


def iter_distributions(chain: WalkChain, max_l: int, exact: bool = False):
    """Yield ``StepDistribution`` for l = 1, 2, ..., max_l."""
    if exact:
        if chain.n_states > EXACT_STATE_CAP or max_l > EXACT_STEP_CAP:
            raise PreconditionError(
                f"exact mode needs |Omega| <= {EXACT_STATE_CAP} and l <= {EXACT_STEP_CAP}"
            )
        alpha, beta = _exact_weights(chain)
        G, m = chain.group, 2 * chain.n
        mass = np.full((G.order, m), Fraction(0), dtype=object)
        mass[G.letter_images, np.arange(m)] = beta
        R = G.right_mul_letters
        for l in range(1, max_l + 1):
            if l > 1:
                moved = mass.dot(alpha)
                mass = np.full_like(moved, Fraction(0))
                mass[R, np.arange(m)[None, :]] = moved
            yield StepDistribution(l, mass)
        return
    mass = chain.initial()
    for l in range(1, max_l + 1):
        if l > 1:
            mass = chain.step(mass)
        yield StepDistribution(l, mass)


def distribution_at(chain: WalkChain, l: int, exact: bool = False) -> StepDistribution:
    if l < 1:
        raise InvalidInputError(f"step must be >= 1, got {l}")
    for dist in iter_distributions(chain, l, exact=exact):
        pass
    return dist


def summed_distribution(chain: WalkChain, l: int, exact: bool = False) -> np.ndarray:
    """Law of the image in G of a random reduced word of length l (unbiased case)."""
    return distribution_at(chain, l, exact=exact).summed()


def tv_to_uniform(dist: Sequence[float], support: Iterable[int]) -> float:
    dist = np.asarray(dist, dtype=float)
    support = np.unique(np.fromiter((int(s) for s in support), dtype=np.int64))
    if len(support) == 0:
        raise InvalidInputError("support must be nonempty")
    inside = np.zeros(len(dist), dtype=bool)
    inside[support] = True
    return 0.5 * float(np.abs(dist[inside] - 1.0 / len(support)).sum() + dist[~inside].sum())


def mixing_length(chain: WalkChain, tol: float, max_l: int = 1000) -> MixingResult:
    """First l <= max_l at which the summed law is within ``tol`` (TV) of its limit.

    For period 2 the even and odd steps are tracked separately against the
    uniform laws on H and on G minus H.
    """
    if not is_irreducible(chain):
        raise PreconditionError("mixing length requires an irreducible chain")
    p = period(chain)
    G = chain.group
    if p == 1:
        target = range(G.order)
        for dist in iter_distributions(chain, max_l):
            tv = tv_to_uniform(dist.summed(), target)
            if tv <= tol:
                return MixingResult(1, tol, max_l, length=dist.step, tv=tv)
        return MixingResult(1, tol, max_l, tv=tv)
    H = index2_subgroup(chain)
    targets = {0: H.members, 1: H.complement()}
    found: dict[int, int] = {}
    worst = 0.0
    for dist in iter_distributions(chain, max_l):
        par = dist.step % 2
        if par in found:
            continue
        tv = tv_to_uniform(dist.summed(), targets[par])
        if tv <= tol:
            found[par] = dist.step
            worst = max(worst, tv)
            if len(found) == 2:
                break
    return MixingResult(2, tol, max_l, even_length=found.get(0), odd_length=found.get(1), tv=worst)


def brute_force_period(chain: WalkChain, max_len: int = 12) -> int:
    """gcd of closed-walk lengths <= max_len through state 0, from powers of the adjacency matrix."""
    A = chain.adjacency.astype(np.int64).toarray()
    row = np.zeros(chain.n_states, dtype=np.int64)
    row[0] = 1
    g = 0
    for length in range(1, max_len + 1):
        row = (row @ A > 0).astype(np.int64)
        if row[0]:
            g = math.gcd(g, length)
    return g
