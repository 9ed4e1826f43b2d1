"""Kernel: substitution calculus, global operator rewrites, conversion."""

from __future__ import annotations

import pytest

import spantt.cubecat as cc
from spantt.kernel import (
    EMPTY,
    NO,
    UNKNOWN,
    YES,
    App,
    BoolT,
    CompS,
    Ext,
    FalseC,
    ForallT,
    ForallTm,
    IdS,
    KernelError,
    Lam,
    NormCfg,
    P,
    Pairing,
    PiT,
    Q,
    Sigma,
    TmSubst,
    Top,
    TrueC,
    TypeMismatchError,
    TySubst,
    Univ,
    conv,
    conv_sub,
    conv_ty,
    cube_sub,
    dk,
    forall_con,
    infer_ctx,
    infer_type,
    lift,
    mk_app,
    mk_bool,
    mk_code,
    mk_degen_sub,
    mk_dollar,
    mk_el,
    mk_eq,
    mk_ext,
    mk_face_sub,
    mk_face_tm,
    mk_false,
    mk_forall_ty,
    mk_id,
    mk_ite,
    mk_lam,
    mk_pair,
    mk_pairing,
    mk_pi,
    mk_proj1,
    mk_proj2,
    mk_q,
    mk_refl,
    mk_sigma,
    mk_sym_sub,
    mk_top,
    mk_true,
    mk_tt,
    mk_univ,
    mk_unspan,
    normalize,
    pairing_one,
    qcube,
    validate,
    var,
    whnf,
    whnf_sub,
    whnf_tm,
    whnf_ty,
)

CFG = NormCfg(fuel=10_000)


def test_identity_substitution_is_neutral():
    g = mk_ext(EMPTY, mk_bool(EMPTY))
    t = mk_q(g)
    assert whnf(TmSubst(t, mk_id(g))) is whnf(t)


def test_beta_pairs():
    g = EMPTY
    u = mk_true(g)
    b = mk_bool(mk_ext(g, mk_bool(g)))
    v = mk_false(g)
    pr = mk_pair(u, v, b)
    assert whnf(mk_proj1(pr)) is mk_true(g)
    assert whnf(mk_proj2(pr)) is mk_false(g)


def test_beta_lambda():
    g = EMPTY
    bool_g = mk_bool(g)
    ext = mk_ext(g, bool_g)
    ident = mk_lam(mk_q(ext))
    assert whnf(mk_dollar(ident, mk_true(g))) is mk_true(g)


def test_ite_computes():
    g = EMPTY
    motive = mk_bool(mk_ext(g, mk_bool(g)))
    t = mk_ite(motive, mk_true(g), mk_false(g), mk_true(g))
    assert whnf(t) is mk_false(g)


def test_el_code_inverse():
    g = EMPTY
    assert whnf(mk_el(mk_code(mk_bool(g)))) is mk_bool(g)


def test_face_after_degen_is_identity():
    g = mk_ext(EMPTY, mk_univ(EMPTY))
    for e in (0, 1):
        comp = CompS(mk_face_sub(e, g), mk_degen_sub(g))
        assert whnf_sub(comp) is whnf_sub(mk_id(g))


def test_sym_involutive_as_subs():
    g = mk_ext(EMPTY, mk_univ(EMPTY))
    s = mk_sym_sub(g)
    assert whnf_sub(CompS(s, s)) is whnf_sub(mk_id(forall_con(forall_con(g))))


def test_five_equations_hold_as_subs():
    g = mk_ext(EMPTY, mk_univ(EMPTY))
    fg = forall_con(g)
    # k . R = id
    for e in (0, 1):
        assert (
            conv_sub(CompS(mk_face_sub(e, g), mk_degen_sub(g)), mk_id(g), CFG)
            is YES
        )
    # k_{forall G} . S = forall k
    for e in (0, 1):
        lhs = CompS(mk_face_sub(e, fg), mk_sym_sub(g))
        rhs = whnf_sub(
            cube_sub(cc.pad(cc.face(e, 0), 1), g)
        )  # forall of the face
        assert conv_sub(lhs, rhs, CFG) is YES
    # S . R_{forall G} = forall R
    lhs = CompS(mk_sym_sub(g), mk_degen_sub(fg))
    rhs = cube_sub(cc.pad(cc.degen(0), 1), g)
    assert conv_sub(lhs, rhs, CFG) is YES
    # S . S = id
    assert (
        conv_sub(
            CompS(mk_sym_sub(g), mk_sym_sub(g)), mk_id(forall_con(fg)), CFG
        )
        is YES
    )
    # braid
    s_fg = mk_sym_sub(fg)
    fs = cube_sub(cc.pad(cc.sym(0), 1), g)
    lhs = CompS(s_fg, CompS(fs, s_fg))
    rhs = CompS(fs, CompS(s_fg, fs))
    assert conv_sub(lhs, rhs, CFG) is YES


def test_whnf_k_of_R_variable():
    # q[k_{G |> A}][p, R_A]  -->  q   (the worked derivation of section-style
    # localization; exercises naturality + surjective pairing + cube merge)
    g0 = mk_ext(EMPTY, mk_univ(EMPTY))
    a = mk_el(mk_q(g0))
    g = mk_ext(g0, a)  # G = <> |> U |> El q ; ambient context with A = El q
    # build over ambient G with the type A weakened... use A' = El(var 0) over g0
    gamma = g0
    katom = mk_face_tm(0, a)
    ratom = qcube(cc.degen(0), gamma, a)
    ext_loc = Ext(gamma, a)
    pv = P(a)
    target = whnf_tm(
        TmSubst(
            TmSubst(katom, lift(mk_degen_sub(gamma), whnf_ty(ForallT(a)))),
            Pairing(pv, ratom, Ext(forall_con(gamma), TySubst(ForallT(a), CompS(mk_degen_sub(gamma), pv)))),
        )
    )
    assert target is mk_q(ext_loc)


def test_bool_qcube_collapses():
    gamma = EMPTY
    atom = qcube(cc.sym(0), gamma, mk_bool(gamma))
    # the restriction atom at a Bool slot is just the variable
    assert isinstance(atom, Q)


def test_ap_R_true_computes_to_true():
    # ap(x. R_Bool x) true  ==  true, per the symmetry computation
    gamma = EMPTY
    boolt = mk_bool(gamma)
    r_open = qcube(cc.degen(0), gamma, boolt)  # R at Bool collapses already
    fb = whnf_ty(ForallT(boolt))
    ap = whnf_tm(
        TmSubst(
            ForallTm(r_open),
            Pairing(mk_degen_sub(gamma), mk_true(gamma), Ext(forall_con(gamma), fb)),
        )
    )
    assert ap is mk_true(gamma)


def test_conv_true_false_no():
    g = EMPTY
    assert conv(mk_true(g), mk_false(g), CFG) is NO
    assert conv(mk_true(g), mk_true(g), CFG) is YES


def test_conv_eta_top_eq():
    g = mk_ext(EMPTY, mk_top(EMPTY))
    assert conv(mk_q(g), mk_tt(g), CFG) is YES
    a = mk_true(EMPTY)
    e1 = mk_refl(a)
    g2 = mk_ext(EMPTY, mk_eq(mk_bool(EMPTY), a, a))
    assert conv(mk_q(g2), TmSubst(mk_refl(a), P(g2.slot)), CFG) is YES


def test_conv_eta_pi_sigma():
    g = EMPTY
    boolt = mk_bool(g)
    ext = mk_ext(g, boolt)
    f = mk_lam(mk_q(ext))
    # eta: f = \x. f $ x
    eta = mk_lam(mk_dollar(TmSubst(f, P(boolt)), mk_q(ext)))
    assert conv(f, eta, CFG) is YES
    b_fam = mk_bool(ext)
    pr = mk_pair(mk_true(g), mk_false(g), b_fam)
    eta_pair = mk_pair(mk_proj1(pr), mk_proj2(pr), b_fam)
    assert conv(pr, eta_pair, CFG) is YES


def test_mk_app_rejects_non_pi():
    with pytest.raises(KernelError):
        mk_app(mk_true(EMPTY))


def test_mk_dollar_rejects_ill_typed_argument():
    g = EMPTY
    ext = mk_ext(g, mk_bool(g))
    f = mk_lam(mk_q(ext))
    with pytest.raises(TypeMismatchError):
        mk_dollar(f, mk_tt(g))


def test_infer_examples():
    g = EMPTY
    a = mk_true(g)
    assert whnf_ty(infer_type(mk_refl(a))) is whnf_ty(
        mk_eq(mk_bool(g), a, a)
    )
    gamma = mk_ext(EMPTY, mk_univ(EMPTY))
    t = mk_q(gamma)
    ft = ForallTm(t)
    assert whnf_ty(infer_type(ft)) is whnf_ty(ForallT(infer_type(t)))
    ks = mk_face_sub(0, gamma)
    assert infer_ctx(ks) == (forall_con(gamma), gamma)
    # idempotent under whnf
    assert whnf_ty(infer_type(whnf_tm(ft))) is whnf_ty(infer_type(ft))


def test_unspan_section_laws():
    # El (k_U [eps, unspan A_k A t_k]) = A_k and forall(El q)[...] = A
    g = EMPTY
    b = mk_bool(g)
    t = mk_top(g)
    apex = mk_sigma(b, mk_top(mk_ext(g, b)))
    leg0 = mk_proj1(mk_q(mk_ext(g, apex)))
    leg1 = mk_tt(mk_ext(g, apex))
    un = mk_unspan(b, t, apex, leg0, leg1, CFG)
    ext_u = Ext(EMPTY, whnf_ty(ForallT(mk_univ(EMPTY))))
    pair = Pairing(mk_eps(g) if False else whnf_sub(mk_id(EMPTY)), un, ext_u)
    # k_U [eps, unspan ...] computes to the code of the side
    katom = qcube(cc.face(0, 0), EMPTY, mk_univ(EMPTY))
    got = whnf_tm(TmSubst(katom, Pairing(whnf_sub(CompS(mk_id(EMPTY), mk_id(EMPTY))), un, ext_u)))
    assert whnf_ty(mk_el(got, CFG)) is whnf_ty(b)
    # forall (El q) [eps, unspan ...] = apex
    fel = whnf_ty(ForallT(mk_el(mk_q(Ext(EMPTY, mk_univ(EMPTY))))))
    inst = whnf_ty(TySubst(fel, Pairing(whnf_sub(mk_id(EMPTY)), un, ext_u)))
    assert conv_ty(inst, apex, CFG) is YES


def test_validate_accepts_wellformed():
    g = mk_ext(EMPTY, mk_univ(EMPTY))
    a = mk_el(mk_q(g))
    validate(qcube(cc.sym(0), g, a))
    validate(whnf_sub(CompS(mk_face_sub(0, g), mk_degen_sub(g))))
