import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randpres import groups
from randpres.errors import CapacityError, InvalidInputError, PreconditionError
from randpres.groups import evaluate, subgroup_closure
from randpres.schreier import (
    action_matrices,
    build_split_extension,
    build_system,
    crossed_evaluate,
    crossed_evaluate_batch,
    decode_fiber,
    min_module_generators,
    module_generates,
    module_generates_batch,
    rewrite_to_generators,
)
from randpres.walk import build_chain, period
from randpres.words import ReducedWord, concat_reduce, reduce, sample_reduced, sample_reduced_indices

Z2 = groups.cyclic(2)
Z3 = groups.cyclic(3)


def sys_z2(q=3, f=(1, 0)):
    return build_system(Z2, f, q)


def random_word(n, rng, max_len=12):
    l = int(rng.integers(0, max_len + 1))
    return sample_reduced(n, l, rng) if l else ReducedWord.identity(n)


def random_systems(count, seed, qs=(5, 7, 11), max_order=6):
    rng = np.random.default_rng(seed)
    pool = groups.small_groups(max_order)
    out = []
    while len(out) < count:
        J = pool[rng.integers(len(pool))]
        n = int(rng.integers(2, 4))
        f = rng.integers(0, J.order, size=n).tolist()
        if len(subgroup_closure(J.with_marks(f), f)) != J.order:
            continue
        q = int(rng.choice([p for p in qs if p > J.order]))
        out.append(build_system(J, f, q))
    return out


SYSTEMS = random_systems(12, 7)


def test_dimension_examples():
    assert sys_z2().D == 3
    assert build_system(Z3, (1, 0), 5).D == 4
    assert build_system(Z2, (1, 1, 0), 3).D == 5
    assert build_system(groups.trivial(), (0, 0), 5).D == 2


def test_build_errors():
    with pytest.raises(PreconditionError, match="q must exceed"):
        build_system(Z2, (1, 0), 2)
    with pytest.raises(InvalidInputError):
        build_system(groups.cyclic(4), (2, 0), 5)
    with pytest.raises(InvalidInputError):
        build_system(Z2, (1, 0), 9)


def test_transversal_is_breadth_first():
    s = build_system(groups.cyclic(4), (1, 0), 5)
    assert [str(w) for w in s.transversal] == ["", "1", "1 1", "-1"]
    assert len(s.transversal[0]) == 0


@pytest.mark.parametrize("s", SYSTEMS, ids=lambda s: f"{s.J.name}-n{s.n}-q{s.q}")
def test_dimension_formula_on_random_systems(s):
    k, n = s.J.order, s.n
    assert s.D == 1 + k * (n - 1) == k * n - (k - 1)


def test_crossed_evaluate_examples():
    s = sys_z2()
    col = s.sgen_index
    empty = crossed_evaluate(s, ReducedWord.identity(2))
    assert empty.jpart == 0 and not empty.vector.any()
    img = crossed_evaluate(s, reduce([1, 1], 2))
    assert img.jpart == 0
    assert img.vector.tolist() == np.eye(3, dtype=int)[col[(1, 1)]].tolist()
    img = crossed_evaluate(s, reduce([2], 2))
    assert img.jpart == 0
    assert img.vector.tolist() == np.eye(3, dtype=int)[col[(0, 2)]].tolist()


def test_action_examples():
    s = sys_z2()
    A = action_matrices(s)
    assert np.array_equal(A[0], np.eye(3, dtype=int))
    assert np.array_equal(A[1] @ A[1] % 3, np.eye(3, dtype=int))
    assert not np.array_equal(A[1], np.eye(3, dtype=int))
    t = build_system(groups.trivial(), (0, 0), 7)
    assert len(action_matrices(t)) == 1 and np.array_equal(t.action[0], np.eye(2, dtype=int))


@pytest.mark.parametrize("s", SYSTEMS[:6], ids=lambda s: f"{s.J.name}-n{s.n}-q{s.q}")
def test_action_is_homomorphism(s):
    T = s.J.table
    for a, b in itertools.product(range(s.J.order), repeat=2):
        assert np.array_equal(s.action[a] @ s.action[b] % s.q, s.action[T[a, b]])


@pytest.mark.parametrize("s", SYSTEMS, ids=lambda s: f"{s.J.name}-n{s.n}-q{s.q}")
def test_crossed_law(s):
    rng = np.random.default_rng(s.D * 31 + s.q)
    for _ in range(300):
        u, w = random_word(s.n, rng), random_word(s.n, rng)
        cu, cw = crossed_evaluate(s, u), crossed_evaluate(s, w)
        cuw = crossed_evaluate(s, concat_reduce(u, w))
        assert cuw.jpart == s.J.mul(cu.jpart, cw.jpart)
        assert np.array_equal(cuw.vector, (cu.vector + s.action[cu.jpart] @ cw.vector) % s.q)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SYSTEMS), st.lists(st.sampled_from([1, -1, 2, -2]), max_size=10),
       st.lists(st.sampled_from([1, -1, 2, -2]), max_size=10))
def test_crossed_law_hypothesis(s, x, y):
    u, w = reduce(x, s.n), reduce(y, s.n)
    cu, cw = crossed_evaluate(s, u), crossed_evaluate(s, w)
    cuw = crossed_evaluate(s, concat_reduce(u, w))
    assert np.array_equal(cuw.vector, (cu.vector + s.action[cu.jpart] @ cw.vector) % s.q)


def schreier_rewrite_oracle(J, f, transversal, w):
    """Rewrite w (with f(w) = 1) as a word in Schreier generators s(t, i) = T(t) x_i T(t x_i)^-1.

    Returns a list of ((t, i), +-1), collapsing tree generators (which are trivial
    in F) by checking freely that they reduce to the empty word.
    """
    n = len(f)
    out = []
    t = 0
    for a in w.letters:
        i = abs(a)
        if a > 0:
            u = J.mul(t, f[i - 1])
            out.append(((t, i), 1))
            t = u
        else:
            t = J.mul(t, J.inv[f[i - 1]])
            out.append(((t, i), -1))
    assert t == 0
    word = lambda t, i: reduce(list(transversal[t]) + [i] + [-x for x in reversed(transversal[J.mul(t, f[i - 1])].letters)], n)
    return [(pair, e) for pair, e in out if len(word(*pair))], word


@pytest.mark.parametrize("s", SYSTEMS[:8], ids=lambda s: f"{s.J.name}-n{s.n}-q{s.q}")
def test_kernel_consistency(s):
    rng = np.random.default_rng(s.q * 7 + s.D)
    f = list(s.J.marks)
    col = s.sgen_index
    done = 0
    while done < 1000:
        w = random_word(s.n, rng, 10)
        if evaluate(s.J, w) != 0:
            continue
        done += 1
        gens, word = schreier_rewrite_oracle(s.J, f, s.transversal, w)
        # the product of generator words is w in the free group
        prod = ReducedWord.identity(s.n)
        for pair, e in gens:
            g = word(*pair)
            prod = concat_reduce(prod, g if e > 0 else g.inverse())
        assert prod == w
        counts = np.zeros(s.D, dtype=np.int64)
        for pair, e in gens:
            counts[col[pair]] += e
        assert np.array_equal(crossed_evaluate(s, w).vector, counts % s.q)
        # and the library rewriter agrees
        lib = np.zeros(s.D, dtype=np.int64)
        for c, e in rewrite_to_generators(s, w):
            lib[c] += e
        assert np.array_equal(lib % s.q, counts % s.q)


@pytest.mark.parametrize("s", SYSTEMS, ids=lambda s: f"{s.J.name}-n{s.n}-q{s.q}")
def test_batch_matches_single(s):
    rng = np.random.default_rng(1)
    idx = sample_reduced_indices(s.n, 9, 200, rng)
    vecs, js = crossed_evaluate_batch(s, idx)
    for row, v, j in zip(idx[:50], vecs, js):
        from randpres.words import index_to_letter

        w = ReducedWord(tuple(index_to_letter(int(a)) for a in row), s.n)
        img = crossed_evaluate(s, w)
        assert img.jpart == j and np.array_equal(img.vector, v)


def test_module_generates_examples():
    s = sys_z2()
    assert module_generates(s, np.eye(3, dtype=int))
    assert not module_generates(s, [])
    x2 = crossed_evaluate(s, reduce([2], 2)).vector
    assert not module_generates(s, [x2])
    with pytest.raises(InvalidInputError):
        module_generates(s, [(1, 0)])


def test_no_single_vector_generates_z2_q3():
    s = sys_z2()
    vecs = np.array(list(itertools.product(range(3), repeat=3)))[:, None, :]
    assert not module_generates_batch(s, vecs).any()


@pytest.mark.parametrize("s", SYSTEMS[:6], ids=lambda s: f"{s.J.name}-n{s.n}-q{s.q}")
def test_module_generation_monotone_and_batch_consistent(s):
    rng = np.random.default_rng(5)
    for _ in range(30):
        vecs = rng.integers(0, s.q, size=(3, s.D))
        flags = [module_generates(s, vecs[:k]) for k in range(4)]
        assert flags == sorted(flags)  # false ... false true ... true
        batch = module_generates_batch(s, vecs[None, :2])[0]
        assert batch == flags[2]


def test_min_generators_examples():
    t = min_module_generators(build_system(groups.trivial(), (0, 0), 5))
    assert (t.lower, t.upper, t.exact) == (2, 2, True)
    r = min_module_generators(sys_z2())
    assert r.exact and r.value == 2
    assert module_generates(sys_z2(), r.witness)
    r3 = min_module_generators(build_system(Z3, (1, 0), 7))
    assert r3.lower == 2 and r3.upper >= 2


def test_split_extension_examples():
    H = build_split_extension(sys_z2())
    assert H.order == 54
    t = build_system(groups.trivial(), (0, 0), 3)
    H0 = build_split_extension(t)
    assert H0.order == 9
    assert sorted(decode_fiber(t, np.array(H0.marks)).tolist()) == [[0, 1], [1, 0]]
    odd = sys_z2(f=(1, 1))
    Hp = build_split_extension(odd)
    assert Hp.order == 54
    assert all(m >= 27 for m in Hp.marks)  # both marks outside the fiber
    assert period(build_chain(Hp)) == 2
    with pytest.raises(CapacityError):
        build_split_extension(build_system(Z3, (1, 0), 7), cap=1000)


@pytest.mark.parametrize("s", [sys_z2(), sys_z2(f=(1, 1)), build_system(Z3, (1, 0), 5),
                               build_system(groups.trivial(), (0, 0, 0), 3)],
                         ids=["z2-10", "z2-11", "z3", "triv-n3"])
def test_split_extension_evaluate_agrees(s):
    H = build_split_extension(s)
    size = s.q**s.D
    rng = np.random.default_rng(11)
    for _ in range(1000):
        w = random_word(s.n, rng, 14)
        h = evaluate(H, w)
        img = crossed_evaluate(s, w)
        assert h // size == img.jpart
        assert decode_fiber(s, np.array(h % size)).tolist() == img.vector.tolist()


def test_system_export():
    d = sys_z2().to_dict()
    assert d["D"] == 3 and d["q"] == 3 and d["J_order"] == 2
    assert d["transversal"] == {"0": "", "1": "1"}
    assert len(d["action"]["1"]) == 3
