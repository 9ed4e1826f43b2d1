"""Checked constructors, conversion and inference for the global theory.

Conversion is sound but deliberately partial: Yes means the two sides have a
common reduct under the oriented rules (with type-directed eta at the
comparison type), No means distinct observable constructors, and Unknown
covers stuck mismatches and fuel exhaustion.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from enum import Enum

from .. import cubecat as cc
from .core import (
    EMPTY,
    App,
    BoolT,
    Code,
    CompS,
    Con,
    CubeS,
    El,
    Empty,
    Eps,
    EqT,
    Ext,
    FalseC,
    ForallS,
    ForallT,
    ForallTm,
    IdS,
    Ite,
    KT,
    KernelError,
    Lam,
    MkForallPi,
    P,
    PairTm,
    Pairing,
    PiT,
    Proj1,
    Proj2,
    Q,
    QCube,
    Refl,
    Sigma,
    Sub,
    SubTm,
    TT,
    Tm,
    TmS,
    TmSubst,
    Top,
    TrueC,
    Ty,
    TypeMismatchError,
    TySubst,
    Univ,
    Unspan,
    forall_con,
    lift,
    pairing_one,
)
from .norm import (
    DEFAULT_FUEL,
    OutOfFuel,
    cube_sub,
    head_pi,
    head_sigma,
    nf_sub,
    nf_tm,
    nf_ty,
    qcube,
    whnf_sub,
    whnf_tm,
    whnf_ty,
    with_fuel,
)


class Verdict(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


YES, NO, UNKNOWN = Verdict.YES, Verdict.NO, Verdict.UNKNOWN


def _both(a, b):
    if a is NO or b is NO:
        return NO
    if a is YES and b is YES:
        return YES
    return UNKNOWN


def _all(*vs):
    out = YES
    for v in vs:
        out = _both(out, v)
    return out


@dataclass
class NormCfg:
    fuel: int = DEFAULT_FUEL
    trace: bool = False

    def __post_init__(self):
        if self.fuel <= 0:
            raise KernelError("fuel must be positive")


DEFAULT_CFG = NormCfg()


def _trace(cfg, msg):
    if cfg is not None and cfg.trace:
        print(f"[spantt] {msg}", file=sys.stderr)


# --- conversion -------------------------------------------------------------------


def conv(t, u, cfg=DEFAULT_CFG):
    """Typed conversion of two terms of the same type."""
    try:
        with with_fuel(cfg.fuel):
            out = _conv_tm(t, u)
    except (OutOfFuel, RecursionError):
        out = UNKNOWN
    _trace(cfg, f"conv {out.value}")
    return out


def conv_ty(a, b, cfg=DEFAULT_CFG):
    try:
        with with_fuel(cfg.fuel):
            return _conv_ty(a, b)
    except (OutOfFuel, RecursionError):
        return UNKNOWN


def conv_sub(s, d, cfg=DEFAULT_CFG):
    try:
        with with_fuel(cfg.fuel):
            return _conv_sub(s, d)
    except (OutOfFuel, RecursionError):
        return UNKNOWN


def _conv_tm(t, u):
    if t is u:
        return YES
    ty = whnf_ty(t.ty)
    ty_u = whnf_ty(u.ty)
    if type(ty) is not type(ty_u):
        # the sides do not even agree on the head of their type; compare
        # structurally only (sound, possibly incomplete)
        return _conv_struct(whnf_tm(t), whnf_tm(u))
    match ty:
        case Top() | EqT():
            return YES
        case Sigma():
            return _both(
                _conv_tm(Proj1(t), Proj1(u)), _conv_tm(Proj2(t), Proj2(u))
            )
        case PiT():
            return _conv_tm(App(t), App(u))
        case _:
            return _conv_struct(whnf_tm(t), whnf_tm(u))


def _conv_struct(tw, uw):
    if tw is uw:
        return YES
    match tw, uw:
        case TrueC(), FalseC():
            return NO
        case FalseC(), TrueC():
            return NO
        case Code(of=a), Code(of=b):
            return _conv_ty(a, b)
        case ForallTm(body=a), ForallTm(body=b):
            return _conv_tm(a, b)
        case App(fn=a), App(fn=b):
            return _conv_struct(whnf_tm(a), whnf_tm(b))
        case Proj1(pair=a), Proj1(pair=b):
            return _conv_struct(whnf_tm(a), whnf_tm(b))
        case Proj2(pair=a), Proj2(pair=b):
            return _conv_struct(whnf_tm(a), whnf_tm(b))
        case Ite(motive=m1, scrut=b1, if_true=u1, if_false=v1), Ite(
            motive=m2, scrut=b2, if_true=u2, if_false=v2
        ):
            res = _all(
                _conv_ty(m1, m2),
                _conv_struct(whnf_tm(b1), whnf_tm(b2)),
                _conv_tm(u1, u2),
                _conv_tm(v1, v2),
            )
            return res if res is YES else UNKNOWN
        case TmSubst(body=a, sub=s1), TmSubst(body=b, sub=s2):
            if a is b:
                res = _conv_sub_struct(s1, s2)
                return res if res is YES else UNKNOWN
            return UNKNOWN
        case PairTm(fst=a1, snd=b1), PairTm(fst=a2, snd=b2):
            return _both(_conv_tm(a1, a2), _conv_tm(b1, b2))
        case TmS(sub=s1), TmS(sub=s2):
            res = _conv_sub_struct(s1, s2)
            return res if res is YES else UNKNOWN
        case MkForallPi(sub=s1, t0=a1, t1=b1, apex=c1), MkForallPi(
            sub=s2, t0=a2, t1=b2, apex=c2
        ):
            res = _all(
                _conv_sub_struct(s1, s2),
                _conv_tm(a1, a2),
                _conv_tm(b1, b2),
                _conv_tm(c1, c2),
            )
            return res if res is YES else UNKNOWN
        case Unspan(side0=a1, side1=b1, apex=c1, leg0=l1, leg1=m1), Unspan(
            side0=a2, side1=b2, apex=c2, leg0=l2, leg1=m2
        ):
            res = _all(
                _conv_ty(a1, a2),
                _conv_ty(b1, b2),
                _conv_ty(c1, c2),
                _conv_tm(l1, l2),
                _conv_tm(m1, m2),
            )
            return res if res is YES else UNKNOWN
        case Refl(), Refl():
            return YES
        case _:
            return UNKNOWN


def _conv_ty(a, b):
    aw, bw = whnf_ty(a), whnf_ty(b)
    if aw is bw:
        return YES
    match aw, bw:
        case Top(), Top():
            return YES
        case BoolT(), BoolT():
            return YES
        case Univ(), Univ():
            return YES
        case Sigma(fst=f1, snd=s1), Sigma(fst=f2, snd=s2):
            return _both(_conv_ty(f1, f2), _conv_ty(s1, s2))
        case PiT(dom_ty=f1, cod_ty=s1), PiT(dom_ty=f2, cod_ty=s2):
            return _both(_conv_ty(f1, f2), _conv_ty(s1, s2))
        case EqT(of=t1, lhs=u1, rhs=v1), EqT(of=t2, lhs=u2, rhs=v2):
            return _all(_conv_ty(t1, t2), _conv_tm(u1, u2), _conv_tm(v1, v2))
        case El(code=x), El(code=y):
            return _conv_tm(x, y)
        case ForallT(body=x), ForallT(body=y):
            return _conv_ty(x, y)
        case TySubst(body=x, sub=s1), TySubst(body=y, sub=s2):
            if x is y:
                res = _conv_sub(s1, s2)
                return res if res is YES else UNKNOWN
            return UNKNOWN
        case (TySubst(), _) | (_, TySubst()) | (El(), _) | (_, El()) | (
            ForallT(),
            _,
        ) | (_, ForallT()):
            return UNKNOWN
        case _:
            return NO


def _conv_sub(s, d):
    sw, dw = whnf_sub(s), whnf_sub(d)
    if sw is dw:
        return YES
    cod = sw.cod
    if cod is EMPTY:
        return YES
    if isinstance(cod, Ext) and isinstance(dw.cod, Ext):
        pv = P(cod.slot)
        qv = Q(cod.parent, cod.slot)
        pv2 = P(dw.cod.slot)
        qv2 = Q(dw.cod.parent, dw.cod.slot)
        return _both(
            _conv_sub(CompS(pv, sw), CompS(pv2, dw)),
            _conv_tm(TmSubst(qv, sw), TmSubst(qv2, dw)),
        )
    return UNKNOWN


def _conv_sub_struct(s, d):
    """Structural comparison of substitutions appearing inside neutral
    terms (no codomain eta, so the recursion is size-decreasing)."""
    sw, dw = whnf_sub(s), whnf_sub(d)
    if sw is dw:
        return YES
    if sw.cod is EMPTY and dw.cod is EMPTY:
        return YES
    match sw, dw:
        case Pairing(sub=a1, tm=t1), Pairing(sub=a2, tm=t2):
            res = _both(_conv_sub_struct(a1, a2), _conv_tm(t1, t2))
            return res if res is YES else UNKNOWN
        case CompS(after=a1, before=b1), CompS(after=a2, before=b2):
            res = _both(_conv_sub_struct(a1, a2), _conv_sub_struct(b1, b2))
            return res if res is YES else UNKNOWN
        case SubTm(tm=t1), SubTm(tm=t2):
            res = _conv_tm(t1, t2)
            return res if res is YES else UNKNOWN
        case _:
            return UNKNOWN


# --- normalization entry points ------------------------------------------------------


def whnf(x, cfg=DEFAULT_CFG):
    """Weak head normal form of a term, type or substitution."""
    with with_fuel(cfg.fuel):
        if isinstance(x, Tm):
            return whnf_tm(x)
        if isinstance(x, Ty):
            return whnf_ty(x)
        if isinstance(x, Sub):
            return whnf_sub(x)
    raise KernelError(f"cannot normalize {x!r}")


def normalize(x, cfg=DEFAULT_CFG):
    with with_fuel(cfg.fuel):
        if isinstance(x, Tm):
            return nf_tm(x)
        if isinstance(x, Ty):
            return nf_ty(x)
        if isinstance(x, Sub):
            return nf_sub(x)
    raise KernelError(f"cannot normalize {x!r}")


def infer_type(t):
    """The rule-assigned type of a term (idempotent under whnf)."""
    return t.ty


def infer_ctx(s):
    """Domain and codomain contexts of a substitution."""
    return (s.dom, s.cod)


# --- checked constructors --------------------------------------------------------------


def _require(verdict, msg):
    if verdict is not YES:
        raise TypeMismatchError(f"{msg} [{verdict.value}]")


def _expect_ty(t, a, what, cfg=DEFAULT_CFG):
    v = conv_ty(t.ty, a, cfg)
    if v is not YES:
        raise TypeMismatchError(
            f"{what}: expected type {whnf_ty(a)!r}, inferred {whnf_ty(t.ty)!r} "
            f"[{v.value}]"
        )


def mk_ext(con, a):
    if a.con is not con:
        raise TypeMismatchError("context extension: type lives elsewhere")
    return Ext(con, a)


def mk_top(con):
    return Top(con)


def mk_bool(con):
    return BoolT(con)


def mk_univ(con):
    return Univ(con)


def mk_sigma(a, b):
    if b.con is not Ext(a.con, a):
        raise TypeMismatchError("Sigma: second component over the wrong context")
    return Sigma(a, b)


def mk_pi(a, b):
    if b.con is not Ext(a.con, a):
        raise TypeMismatchError("Pi: codomain over the wrong context")
    return PiT(a, b)


def mk_eq(a, u, v, cfg=DEFAULT_CFG):
    _expect_ty(u, a, "Eq left endpoint", cfg)
    _expect_ty(v, a, "Eq right endpoint", cfg)
    return EqT(a, u, v)


def mk_el(t, cfg=DEFAULT_CFG):
    _expect_ty(t, Univ(t.con), "El", cfg)
    return El(t)


def mk_code(a):
    return Code(a)


def mk_k(theta, con):
    return KT(theta, con)


def mk_forall_con(con):
    return forall_con(con)


def mk_forall_ty(a):
    return ForallT(a)


def mk_forall_tm(t):
    return ForallTm(t)


def mk_forall_sub(s):
    return ForallS(s)


def mk_tt(con):
    return TT(con)


def mk_true(con):
    return TrueC(con)


def mk_false(con):
    return FalseC(con)


def mk_q(con):
    if not isinstance(con, Ext):
        raise TypeMismatchError("q needs an extended context")
    return Q(con.parent, con.slot)


def var(con, n):
    """De Bruijn variable n (0 innermost), as q weakened by n projections."""
    c = con
    sub = None
    for _ in range(n):
        if not isinstance(c, Ext):
            raise TypeMismatchError("variable index out of range")
        step = P(c.slot)
        sub = step if sub is None else CompS(step, sub)
        c = c.parent
    if not isinstance(c, Ext):
        raise TypeMismatchError("variable index out of range")
    qv = Q(c.parent, c.slot)
    return qv if sub is None else TmSubst(qv, sub)


def mk_pair(u, v, b, cfg=DEFAULT_CFG):
    if not isinstance(b.con, Ext):
        raise TypeMismatchError("pair: family over a non-extended context")
    a = b.con.slot
    _expect_ty(u, a, "pair first component", cfg)
    _expect_ty(v, TySubst(b, pairing_one(u, a)), "pair second component", cfg)
    return PairTm(u, v, Sigma(a, b))


def mk_proj1(t):
    return Proj1(t)


def mk_proj2(t):
    return Proj2(t)


def mk_refl(t):
    return Refl(t)


def mk_lam(t):
    if not isinstance(t.con, Ext):
        raise TypeMismatchError("lam: body must live in an extended context")
    return Lam(t)


def mk_app(t):
    return App(t)


def mk_dollar(t, u, cfg=DEFAULT_CFG):
    pi = head_pi(t.ty)
    _expect_ty(u, pi.dom_ty, "application argument", cfg)
    return TmSubst(App(t), pairing_one(u, pi.dom_ty))


def mk_ite(motive, b, u, v, cfg=DEFAULT_CFG):
    gamma = b.con
    if motive.con is not Ext(gamma, BoolT(gamma)):
        raise TypeMismatchError("ite: motive must abstract a boolean")
    _expect_ty(b, BoolT(gamma), "ite scrutinee", cfg)
    _expect_ty(
        u, TySubst(motive, pairing_one(TrueC(gamma), BoolT(gamma))), "ite true branch", cfg
    )
    _expect_ty(
        v,
        TySubst(motive, pairing_one(FalseC(gamma), BoolT(gamma))),
        "ite false branch",
        cfg,
    )
    return Ite(motive, b, u, v)


def mk_id(con):
    return IdS(con)


def mk_eps(con):
    return Eps(con)


def mk_p(a):
    return P(a)


def mk_pairing(s, t, a, cfg=DEFAULT_CFG):
    if a.con is not s.cod:
        raise TypeMismatchError("pairing: target type over the wrong context")
    _expect_ty(t, TySubst(a, s), "pairing term component", cfg)
    return Pairing(s, t, Ext(a.con, a))


def mk_comp(f, g, cfg=DEFAULT_CFG):
    if f.dom is not g.cod:
        raise TypeMismatchError("composition: context mismatch")
    return CompS(f, g)


def mk_face_sub(e, con):
    if e not in (0, 1):
        raise TypeMismatchError("binary theory: endpoint must be 0 or 1")
    return cube_sub(cc.face(e, 0), con)


def mk_degen_sub(con):
    return cube_sub(cc.degen(0), con)


def mk_sym_sub(con):
    return cube_sub(cc.sym(0), con)


def mk_cube_sub(f, con):
    return cube_sub(f, con)


def mk_face_tm(e, a):
    """The projection term k_A := q[k_{Gamma |> A}] over forall Gamma |> forall A."""
    if e not in (0, 1):
        raise TypeMismatchError("binary theory: endpoint must be 0 or 1")
    return qcube(cc.face(e, 0), a.con, a)


def tm_of_sub(s):
    return TmS(s)


def sub_of_tm(t, theta, cfg=DEFAULT_CFG):
    _expect_ty(t, KT(theta, t.con), "democracy coercion", cfg)
    return SubTm(t, theta)


def mk_mkforallpi(s, t0, t1, t, pi, cfg=DEFAULT_CFG):
    """The packaging operator for forall of Pi; validates the compatibility
    side condition by conversion (Unknown rejects)."""
    piw = whnf_ty(pi)
    if not isinstance(piw, PiT):
        raise TypeMismatchError("mk-forall-pi: not a Pi type")
    gamma = piw.con
    a, b = piw.dom_ty, piw.cod_ty
    if s.cod is not forall_con(gamma):
        raise TypeMismatchError("mk-forall-pi: substitution target mismatch")
    for k, tk in ((0, t0), (1, t1)):
        _expect_ty(
            tk,
            TySubst(piw, CompS(cube_sub(cc.face(k, 0), gamma), s)),
            f"mk-forall-pi base function {k}",
            cfg,
        )
    fa = whnf_ty(ForallT(a))
    fb = whnf_ty(ForallT(b))
    _expect_ty(t, TySubst(PiT(fa, fb), s), "mk-forall-pi apex function", cfg)
    for k, tk in ((0, t0), (1, t1)):
        up = lift(s, fa)
        inst_fa = TySubst(fa, s)
        tkp = TmSubst(tk, P(inst_fa))
        arg = TmSubst(qcube(cc.face(k, 0), gamma, a), up)
        lhs = mk_dollar(tkp, arg, cfg)
        kb = qcube(cc.face(k, 0), Ext(gamma, a), b)
        rhs = TmSubst(kb, Pairing(up, App(t), Ext(forall_con(Ext(gamma, a)), fb)))
        v = conv(lhs, rhs, cfg)
        if v is not YES:
            raise TypeMismatchError(
                f"mk-forall-pi side condition for endpoint {k} not established "
                f"[{v.value}]"
            )
    return MkForallPi(s, t0, t1, t, piw)


def mk_unspan(a0, a1, apex, t0, t1, cfg=DEFAULT_CFG):
    gamma = a0.con
    for name, x in (("side 1", a1), ("apex", apex)):
        if x.con is not gamma:
            raise TypeMismatchError(f"unspan: {name} over the wrong context")
    for k, tk in ((0, t0), (1, t1)):
        _expect_ty(
            tk,
            TySubst((a0, a1)[k], P(apex)),
            f"unspan leg {k}",
            cfg,
        )
    return Unspan(a0, a1, apex, t0, t1)


def dk(k, b, a2, b2, cfg=DEFAULT_CFG):
    """The derived projection dk_{x.B} a2 b2 := proj2 (k_{Sigma A B} (a2, b2))."""
    if not isinstance(b.con, Ext):
        raise TypeMismatchError("dk: family over a non-extended context")
    gamma, a = b.con.parent, b.con.slot
    sig = Sigma(a, b)
    degen = cube_sub(cc.degen(0), gamma)
    fsig = whnf_ty(TySubst(ForallT(sig), degen))
    if not isinstance(fsig, Sigma):
        raise TypeMismatchError("dk: forall of Sigma did not reduce to Sigma")
    pair = PairTm(a2, b2, fsig)
    katom = qcube(cc.face(k, 0), gamma, sig)
    fsig_up = whnf_ty(ForallT(sig))
    applied = TmSubst(
        katom, Pairing(degen, pair, Ext(forall_con(gamma), fsig_up))
    )
    return Proj2(applied)


# --- scope validation ----------------------------------------------------------------


class ScopeError(KernelError):
    pass


def validate(node, _seen=None):
    """Structural well-scopedness of a node and its children."""
    if _seen is None:
        _seen = set()
    if node.uid in _seen:
        return
    _seen.add(node.uid)
    match node:
        case Empty():
            return
        case Ext(parent=p0, slot=a):
            if a.con is not p0:
                raise ScopeError(f"extension slot out of place: {node!r}")
            validate(p0, _seen)
            validate(a, _seen)
        case Sigma(fst=f, snd=s) | PiT(dom_ty=f, cod_ty=s):
            if s.con is not Ext(f.con, f):
                raise ScopeError(f"binder scope broken: {node!r}")
            validate(f, _seen)
            validate(s, _seen)
        case EqT(of=a, lhs=u, rhs=v):
            if u.con is not a.con or v.con is not a.con:
                raise ScopeError(f"Eq endpoints out of scope: {node!r}")
            for x in (a, u, v):
                validate(x, _seen)
        case TySubst(body=b, sub=s):
            if b.con is not s.cod:
                raise ScopeError(f"type substitution mismatch: {node!r}")
            validate(b, _seen)
            validate(s, _seen)
        case TmSubst(body=b, sub=s):
            if b.con is not s.cod:
                raise ScopeError(f"term substitution mismatch: {node!r}")
            validate(b, _seen)
            validate(s, _seen)
        case Pairing(sub=s, tm=t, ext=e):
            if s.cod is not e.parent or t.con is not s.dom:
                raise ScopeError(f"pairing out of scope: {node!r}")
            for x in (s, t, e):
                validate(x, _seen)
        case CompS(after=f, before=g):
            if f.dom is not g.cod:
                raise ScopeError(f"composition mismatch: {node!r}")
            validate(f, _seen)
            validate(g, _seen)
        case PairTm(fst=u, snd=v, sig=sg):
            if u.con is not v.con or sg.con is not u.con:
                raise ScopeError(f"pair out of scope: {node!r}")
            for x in (u, v, sg):
                validate(x, _seen)
        case Ite(motive=m, scrut=b):
            if m.con is not Ext(b.con, BoolT(b.con)):
                raise ScopeError(f"ite motive out of scope: {node!r}")
            for x in node.args:
                if hasattr(x, "uid"):
                    validate(x, _seen)
        case _:
            for x in getattr(node, "args", ()):
                if hasattr(x, "uid"):
                    validate(x, _seen)
