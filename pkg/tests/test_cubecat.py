"""Cube category engine: generator equations, case analysis, enumeration.

The exhaustive checks deliberately recompute expectations with independent
oracles (brute-force enumeration over raw assignments, breadth-first search
over generator words) rather than reusing the library's own paths.
"""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spantt.cubecat import (
    Compose,
    CubeError,
    CubeMor,
    DegW,
    End,
    FaceW,
    IdW,
    Inl,
    Inr,
    SucW,
    SymW,
    Var,
    case_split,
    compose,
    degen,
    enumerate_homs,
    eval_word,
    face,
    format_mor,
    gen_sym_left,
    gen_sym_right,
    hom_count,
    identity,
    pad,
    parse_mor,
    reconstruct,
    suc,
    sym,
    un_pad,
    un_suc,
)

DIMS = range(0, 4)


def brute_homs(j, i, arity=2):
    """Independent enumeration oracle: all injective-on-variables assignments."""
    entries = [("e", e) for e in range(arity)] + [("v", v) for v in range(j)]
    found = []
    for raw in itertools.product(entries, repeat=i):
        vs = [x[1] for x in raw if x[0] == "v"]
        if len(vs) != len(set(vs)):
            continue
        found.append(
            CubeMor(j, i, tuple(End(x[1]) if x[0] == "e" else Var(x[1]) for x in raw))
        )
    return found


# --- generators and postconditions -------------------------------------------


def test_identity_shapes():
    assert identity(0) == CubeMor(0, 0, ())
    assert identity(2).assign == (Var(0), Var(1))


def test_face_shapes():
    assert face(0, 0).assign == (End(0),)
    assert face(1, 2).assign == (End(1), Var(0), Var(1))
    assert eval_word(FaceW(1, 2)) == face(1, 2)


def test_degen_shape():
    assert degen(0) == CubeMor(1, 0, ())
    assert degen(2).assign == (Var(1), Var(2))


def test_sym_shape():
    assert sym(0).assign == (Var(1), Var(0))
    assert sym(2).assign == (Var(1), Var(0), Var(2), Var(3))


def test_suc_shape():
    assert suc(face(0, 0)).assign == (Var(0), End(0))
    assert eval_word(SucW(FaceW(0, 0))) == suc(face(0, 0))


def test_compose_rejects_dim_mismatch():
    with pytest.raises(CubeError):
        compose(face(0, 1), face(0, 1))


def test_mor_invariants_enforced():
    with pytest.raises(CubeError):
        CubeMor(1, 2, (Var(0), Var(0)))
    with pytest.raises(CubeError):
        CubeMor(1, 1, (Var(1),))
    with pytest.raises(CubeError):
        CubeMor(0, 1, (End(2),))


# --- the ten defining equations, exhaustively for dims <= 3 ------------------


def all_homs_upto(n):
    for j in DIMS:
        for i in DIMS:
            yield from enumerate_homs(j, i)


def test_eq_suc_id():
    for i in DIMS:
        assert suc(identity(i)) == identity(1 + i)


def test_eq_suc_compose():
    for j, k, i in itertools.product(DIMS, DIMS, DIMS):
        for f in enumerate_homs(j, i):
            for g in enumerate_homs(k, j):
                assert suc(compose(f, g)) == compose(suc(f), suc(g))


def test_eq_face_natural():
    for j, i in itertools.product(DIMS, DIMS):
        for f in enumerate_homs(j, i):
            for e in (0, 1):
                assert compose(face(e, i), f) == compose(suc(f), face(e, j))


def test_eq_degen_natural():
    for j, i in itertools.product(DIMS, DIMS):
        for f in enumerate_homs(j, i):
            assert compose(degen(i), suc(f)) == compose(f, degen(j))


def test_eq_sym_natural():
    for j, i in itertools.product(DIMS, DIMS):
        for f in enumerate_homs(j, i):
            assert compose(sym(i), suc(suc(f))) == compose(suc(suc(f)), sym(j))


def test_eq_degen_face():
    for i in DIMS:
        for e in (0, 1):
            assert compose(degen(i), face(e, i)) == identity(i)


def test_eq_sym_face():
    for i in DIMS:
        for e in (0, 1):
            assert compose(sym(i), face(e, 1 + i)) == suc(face(e, i))


def test_eq_degen_sym():
    for i in DIMS:
        assert compose(degen(1 + i), sym(i)) == suc(degen(i))
    assert compose(degen(1), sym(0)) == suc(degen(0))


def test_eq_sym_involutive():
    for i in DIMS:
        assert compose(sym(i), sym(i)) == identity(2 + i)


def test_eq_braid():
    for i in DIMS:
        lhs = compose(compose(sym(1 + i), suc(sym(i))), sym(1 + i))
        rhs = compose(compose(suc(sym(i)), sym(1 + i)), suc(sym(i)))
        assert lhs == rhs


def test_category_laws_exhaustive():
    # identity laws for everything, associativity over all triples dims <= 2
    for j, i in itertools.product(DIMS, DIMS):
        for f in enumerate_homs(j, i):
            assert compose(identity(i), f) == f
            assert compose(f, identity(j)) == f
    small = range(0, 3)
    for a, b, c, d in itertools.product(small, repeat=4):
        for f in enumerate_homs(b, a):
            for g in enumerate_homs(c, b):
                for h in enumerate_homs(d, c):
                    assert compose(compose(f, g), h) == compose(f, compose(g, h))


# --- generalised symmetries ---------------------------------------------------


def test_gen_sym_base_case():
    for i1 in DIMS:
        assert gen_sym_left(0, i1) == identity(1 + i1)
        assert gen_sym_right(0, i1) == identity(1 + i1)


def test_gen_sym_left_moves_dim():
    # unfolding the recursion by hand for I0=2:
    # S_1 . suc(S_0) sends codomain dim 0 to domain dim 2
    g = gen_sym_left(2, 0)
    assert g.assign == (Var(2), Var(0), Var(1))


def test_gen_sym_mutually_inverse():
    for i0, i1 in itertools.product(DIMS, DIMS):
        left = gen_sym_left(i0, i1)
        right = gen_sym_right(i0, i1)
        assert compose(left, right) == identity(1 + i0 + i1)
        assert compose(right, left) == identity(i0 + 1 + i1)


# --- case analysis ------------------------------------------------------------


def test_case_split_face_clause():
    for e in (0, 1):
        assert case_split(face(e, 0), 0, 0) == Inl(e, identity(0))
    # k at split {1+I0}{I1} comes from the domain
    assert case_split(face(0, 2), 1, 1) == Inr(0, 1, face(0, 1))


def test_case_split_id_clause():
    assert case_split(identity(1), 0, 0) == Inr(0, 0, identity(0))
    for i0, i1 in itertools.product(range(3), range(3)):
        assert case_split(identity(i0 + 1 + i1), i0, i1) == Inr(
            i0, i1, identity(i0 + i1)
        )


def test_case_split_displayed_model_clauses():
    # degeneracy clause: R split at {I0}{I1} = inr(1+I0, I1, R_{I0+I1})
    for i0, i1 in itertools.product(range(3), range(3)):
        assert case_split(degen(i0 + 1 + i1), i0, i1) == Inr(
            1 + i0, i1, degen(i0 + i1)
        )
    # symmetry clauses
    for i in range(3):
        assert case_split(sym(i), 0, 1 + i) == Inr(1, i, identity(1 + i))
        assert case_split(sym(i), 1, i) == Inr(0, 1 + i, identity(1 + i))
    for i0, i1 in itertools.product(range(2), range(2)):
        assert case_split(sym(i0 + i1 + 1), 2 + i0, i1) == Inr(
            2 + i0, i1, sym(i0 + i1)
        )


def test_case_split_factorization_exhaustive():
    for j in range(0, 4):
        for i0, i1 in itertools.product(range(3), range(3)):
            for f in enumerate_homs(j, i0 + 1 + i1):
                res = case_split(f, i0, i1)
                assert reconstruct(res, i0, i1) == f


def test_case_split_reconstruct_roundtrip_on_results():
    # case_split . reconstruct is the identity on well-formed case results
    for i0, i1 in itertools.product(range(3), range(3)):
        for j in range(0, 3):
            for rest in enumerate_homs(j, i0 + i1):
                for e in (0, 1):
                    res = Inl(e, rest)
                    assert case_split(reconstruct(res, i0, i1), i0, i1) == res
            for j0 in range(0, j + 1):
                j1 = j - j0
                for rest in enumerate_homs(j, i0 + i1):
                    res = Inr(j0, j1, rest)
                    assert case_split(reconstruct(res, i0, i1), i0, i1) == res


# --- words --------------------------------------------------------------------


def test_eval_word_examples():
    assert eval_word(Compose(DegW(0), FaceW(0, 0))) == identity(0)
    assert eval_word(IdW(3)) == identity(3)


def test_eval_word_rejects_with_position():
    with pytest.raises(CubeError, match="position r"):
        eval_word(Compose(IdW(0), Compose(FaceW(0, 0), FaceW(0, 0))))


def test_words_reach_all_small_homs():
    # breadth-first search over words of length <= 8 hits every hom dims <= 2
    atoms = []
    for i in range(0, 3):
        atoms.append(IdW(i))
        atoms.append(DegW(i))
        atoms.append(SymW(i))
        for e in (0, 1):
            atoms.append(FaceW(e, i))
    layer = {}
    for w in atoms:
        try:
            layer[eval_word(w)] = w
        except CubeError:
            pass
    base = [SucW(a) for a in atoms] + atoms
    reached = dict(layer)
    frontier = dict(layer)
    for _ in range(7):
        new = {}
        for f, w in frontier.items():
            for a in base:
                try:
                    g = eval_word(Compose(a, w))
                except CubeError:
                    continue
                if g not in reached:
                    new[g] = Compose(a, w)
        reached.update(new)
        frontier = new
    for j in range(0, 3):
        for i in range(0, 3):
            for f in enumerate_homs(j, i):
                assert f in reached, f"{f} not reached by any short word"


@settings(max_examples=60)
@given(st.integers(0, 2), st.integers(0, 2), st.data())
def test_eval_word_respects_equations(i, j, data):
    # instantiate each defining equation with random subwords and compare
    words = []
    for d in range(0, 3):
        words.append(IdW(d))
        words.append(DegW(d))
        words.append(FaceW(0, d))
        words.append(FaceW(1, d))
        words.append(SymW(d))
    w = data.draw(st.sampled_from(words))
    f = eval_word(w)
    jj, ii = f.dom, f.cod
    pairs = [
        (Compose(DegW(ii), FaceW(0, ii)), IdW(ii)),
        (Compose(SymW(ii), SymW(ii)), IdW(2 + ii)),
        (SucW(Compose(w, IdW(jj))), Compose(SucW(w), SucW(IdW(jj)))),
        (Compose(FaceW(1, ii), w), Compose(SucW(w), FaceW(1, jj))),
        (Compose(DegW(ii), SucW(w)), Compose(w, DegW(jj))),
        (Compose(SymW(ii), SucW(SucW(w))), Compose(SucW(SucW(w)), SymW(jj))),
    ]
    for lhs, rhs in pairs:
        assert eval_word(lhs) == eval_word(rhs)


# --- enumeration and counting -------------------------------------------------


def test_enumerate_against_brute_oracle():
    for j in range(0, 4):
        for i in range(0, 4):
            got = enumerate_homs(j, i)
            expect = brute_homs(j, i)
            assert sorted(map(repr, got)) == sorted(map(repr, expect))
            assert len(set(map(repr, got))) == len(got)


def test_enumerate_counts():
    assert len(enumerate_homs(3, 0)) == 1
    assert len(enumerate_homs(0, 2)) == 4  # arity^I endpoint-only assignments
    assert len(enumerate_homs(1, 1)) == 3  # id, const-0, const-1
    assert len(enumerate_homs(0, 2, arity=3)) == 9


def test_enumerate_deterministic_order():
    assert enumerate_homs(1, 1) == [
        CubeMor(1, 1, (End(0),)),
        CubeMor(1, 1, (End(1),)),
        CubeMor(1, 1, (Var(0),)),
    ]


def test_hom_count_matches_enumeration():
    for j in range(0, 5):
        for i in range(0, 5):
            assert hom_count(j, i) == len(brute_homs(j, i))
    assert hom_count(5, 0) == 1
    assert hom_count(1, 1) == 3
    assert hom_count(2, 2) == 14


def test_symmetric_group_emerges():
    # endpoint-free endomorphisms of n are exactly the n! permutations
    import math

    for n in range(0, 6):
        perms = [
            f
            for f in enumerate_homs(n, n)
            if all(isinstance(a, Var) for a in f.assign)
        ]
        assert len(perms) == math.factorial(n)


def test_sym_suc_generate_s4():
    # closure of {sym(i) paddings} under composition at dim 4 has order 24
    gens = [suc(suc(sym(0))), suc(sym(1)), sym(2)]
    group = {identity(4)}
    frontier = {identity(4)}
    while frontier:
        new = set()
        for f in frontier:
            for g in gens:
                h = compose(f, g)
                if h not in group:
                    new.add(h)
        group.update(new)
        frontier = new
    assert len(group) == 24


# --- pad / un_pad / un_suc ----------------------------------------------------


def test_pad_unpad_roundtrip():
    for j, i in itertools.product(range(0, 3), range(0, 3)):
        for f in enumerate_homs(j, i):
            assert un_pad(pad(f, 1)) == f
            assert un_suc(suc(f)) == f
            assert pad(pad(f, 1), 1) == pad(f, 2)


def test_unpad_rejects_non_padded():
    assert un_pad(sym(0)) is None
    assert un_suc(face(0, 1)) is None


# --- text syntax --------------------------------------------------------------


def test_parse_format_roundtrip():
    f = CubeMor(3, 4, (End(0), Var(2), End(1), Var(0)))
    assert parse_mor(format_mor(f)) == f
    assert parse_mor("[e0,v0]@1->2") == CubeMor(1, 2, (End(0), Var(0)))


def test_parse_rejects_garbage():
    for bad in ["", "[e0]", "[x1]@1->1", "[e0@0->1", "[e0]@a->1", "[v0,v0]@1->2"]:
        with pytest.raises(CubeError):
            parse_mor(bad)
