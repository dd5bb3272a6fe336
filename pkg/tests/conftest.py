import itertools
from fractions import Fraction

import numpy as np
import pytest

from randpres import groups

_ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    """Record one acceptance line: record(k, ok, detail)."""

    def _record(k, ok, detail):
        _ACCEPTANCE.append(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


# oracles -------------------------------------------------------------------------


def brute_reduced_words(n, l):
    """All reduced words of length l as letter-index tuples, by filtering every word."""
    out = []
    for w in itertools.product(range(2 * n), repeat=l):
        if all(w[t + 1] != (w[t] ^ 1) for t in range(l - 1)):
            out.append(w)
    return out


def brute_summed_law(G, l):
    """Image law of a uniform reduced word, multiplying marks through the Cayley table."""
    n = G.n
    imgs = []
    for m in G.marks:
        imgs += [m, int(G.inv[m])]
    words = brute_reduced_words(n, l)
    law = np.zeros(G.order)
    for w in words:
        g = 0
        for a in w:
            g = G.table[g, imgs[a]]
        law[g] += 1
    return law / len(words)


def det_mod(M, q):
    """Determinant mod q by cofactor expansion (independent of any elimination code)."""
    M = [list(r) for r in M]
    k = len(M)
    if k == 0:
        return 1
    if k == 1:
        return M[0][0] % q
    total = 0
    for c in range(k):
        minor = [row[:c] + row[c + 1 :] for row in M[1:]]
        total += (-1) ** c * M[0][c] * det_mod(minor, q)
    return total % q


def minor_rank(M, q):
    M = np.asarray(M) % q
    r, c = M.shape
    for k in range(min(r, c), 0, -1):
        for rows in itertools.combinations(range(r), k):
            for cols in itertools.combinations(range(c), k):
                if det_mod(M[np.ix_(rows, cols)].tolist(), q):
                    return k
    return 0


def index2_subgroups(G):
    """Index-2 subgroups by checking closure of every half-size subset containing 0."""
    k = G.order
    if k % 2:
        return []
    t = G.table
    out = []
    for rest in itertools.combinations(range(1, k), k // 2 - 1):
        s = np.array((0,) + rest)
        if np.isin(t[s[:, None], s[None, :]], s).all():
            out.append(frozenset(s.tolist()))
    return out


def marked_family(max_order=8):
    """Every group of order <= max_order with every pair of marks."""
    out = []
    for G in groups.small_groups(max_order):
        for a, b in itertools.product(range(G.order), repeat=2):
            out.append(G.with_marks([a, b]))
    return out


@pytest.fixture(scope="session")
def family():
    return marked_family(8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
