"""Fuelled oriented rewriting to weak head normal form.

All equations of the core and global theories are oriented left to right;
eta rules are contractions here and type-directed expansions in conversion.
Composites of face/degeneracy/symmetry substitutions normalize through the
cube category (structural equality of :class:`~spantt.cubecat.CubeMor`), so
the five transformation equations, the braid relation and all naturality
squares at a common base collapse into cube arithmetic.

Fuel exhaustion raises :class:`OutOfFuel`; callers (conversion, the CLI)
translate that into an explicit Unknown, never a wrong answer.
"""

from __future__ import annotations

import sys
import threading

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
    TySubst,
    Univ,
    Unspan,
    forall_con,
    forall_con_iter,
    forall_sub_iter,
    forall_tm_iter,
    forall_ty_iter,
    lift,
    pairing_one,
    unforall_con,
    unforall_iter_sub,
    unforall_iter_tm,
    unforall_sub,
    unforall_ty,
)

sys.setrecursionlimit(100000)

DEFAULT_FUEL = 100_000


class OutOfFuel(Exception):
    """The rewrite-step budget ran out; the caller must report Unknown."""


class Fuel:
    __slots__ = ("left",)

    def __init__(self, amount=DEFAULT_FUEL):
        self.left = amount

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise OutOfFuel


_state = threading.local()


def _fuel():
    f = getattr(_state, "fuel", None)
    if f is None:
        f = _state.fuel = Fuel(DEFAULT_FUEL)
    return f


class with_fuel:
    """Context manager installing a fresh fuel budget for an entry point."""

    def __init__(self, amount):
        self.amount = amount

    def __enter__(self):
        self.saved = getattr(_state, "fuel", None)
        _state.fuel = Fuel(self.amount)
        return _state.fuel

    def __exit__(self, *exc):
        _state.fuel = self.saved
        return False


_ty_cache: dict = {}
_tm_cache: dict = {}
_sub_cache: dict = {}


def clear_caches():
    _ty_cache.clear()
    _tm_cache.clear()
    _sub_cache.clear()


# --- helpers -------------------------------------------------------------------


def head_sigma(ty):
    w = whnf_ty(ty)
    if not isinstance(w, Sigma):
        raise KernelError(f"expected a Sigma type, got {w!r}")
    return w


def head_pi(ty):
    w = whnf_ty(ty)
    if not isinstance(w, PiT):
        raise KernelError(f"expected a Pi type, got {w!r}")
    return w


def cube_sub(f, base):
    """Canonical cube substitution: identities vanish, the base is peeled
    maximally through forall (``<f>_{forall D} = <suc f>_D``)."""
    while True:
        if base is EMPTY:
            return IdS(EMPTY)
        if f.is_identity:
            return whnf_sub(IdS(forall_con_iter(base, f.dom)))
        b2 = unforall_con(base)
        if b2 is not None and b2 is not base:
            base, f = b2, cc.suc(f)
            continue
        return CubeS(f, base)


def qcube(f, base, slot):
    """Canonical restriction atom ``q[<f>_{base |> slot}]``.

    Identity morphisms give back the variable; pointwise slots (Top, Bool,
    K) compute; substituted slots are collapsed onto their home context.
    """
    while True:
        if f.is_identity:
            i = f.dom
            return Q(forall_con_iter(base, i), forall_ty_iter(slot, i))
        b2, s2 = unforall_con(base), unforall_ty(slot)
        if (
            b2 is not None
            and s2 is not None
            and (b2 is not base or s2 is not slot)
        ):
            base, slot, f = b2, s2, cc.suc(f)
            continue
        break
    sw = whnf_ty(slot)
    i, j = f.cod, f.dom
    base_i = forall_con_iter(base, i)
    match sw:
        case Top():
            return TT(Ext(base_i, Top(base_i)))
        case BoolT():
            return Q(base_i, BoolT(base_i))
        case Univ() if base is not EMPTY:
            # U is context-invariant: restrict at the empty base
            slot_i = forall_ty_iter(sw, i)
            pairing = Pairing(
                Eps(Ext(base_i, slot_i)),
                Q(base_i, slot_i),
                Ext(EMPTY, forall_ty_iter(Univ(EMPTY), i)),
            )
            return whnf_tm(TmSubst(qcube(f, EMPTY, Univ(EMPTY)), pairing))
        case KT(theta=th):
            th_i = forall_con_iter(th, i)
            kt = KT(th_i, base_i)
            qv = Q(base_i, kt)
            return TmS(whnf_sub(CompS(cube_sub(f, th), SubTm(qv, th_i))))
        case TySubst(body=b, sub=d):
            th = d.cod
            slot_i = forall_ty_iter(sw, i)
            pv = P(slot_i)
            qv = Q(base_i, slot_i)
            ext = Ext(forall_con_iter(th, i), forall_ty_iter(b, i))
            pairing = Pairing(CompS(forall_sub_iter(d, i), pv), qv, ext)
            return whnf_tm(TmSubst(qcube(f, th, b), pairing))
        case _:
            return QCube(f, base, sw)


def _is_face(f):
    for k in (0, 1):
        if f == cc.face(k, 0):
            return k
    return None


def _p_headed(s):
    """Whether the leftmost factor of a composition chain is a projection.

    Cube substitutions never migrate past bare projections; doing so builds
    extended-base cubes whose expansion re-creates the original redex.
    """
    while isinstance(s, CompS):
        s = s.after
    return isinstance(s, P)


def _un_subst_tm(x):
    """Split a neutral term into head and outermost substitution, if any."""
    match x:
        case TmSubst(body=h, sub=s0):
            return h, s0
        case QCube(mor=f, base=b, slot=a):
            return Q(b, a), CubeS(f, Ext(b, a))
        case _:
            return None


# --- substitutions ---------------------------------------------------------------


def whnf_sub(s):
    hit = _sub_cache.get(s)
    if hit is not None:
        return hit
    out = _whnf_sub(s)
    _sub_cache[s] = out
    _sub_cache[out] = out
    return out


def _whnf_sub(s):
    _fuel().tick()
    if s.cod is EMPTY:
        if s.dom is EMPTY:
            return IdS(EMPTY)
        if not isinstance(s, Eps):
            return Eps(s.dom)
        return s
    match s:
        case IdS() | Eps() | P():
            return s
        case CubeS(mor=f, base=b):
            return cube_sub(f, b)
        case Pairing(sub=s0, tm=t, ext=ext):
            sw, tw = whnf_sub(s0), whnf_tm(t)
            # surjective pairing: (p . d, q[d]) = d
            match sw, tw:
                case CompS(after=P(), before=d), TmSubst(body=Q(), sub=d2) if d is d2:
                    return d
                case P(slot=a), Q(gamma=g, slot=a2) if a is a2 and g is a.con:
                    return whnf_sub(IdS(Ext(g, a)))
                case _, QCube(mor=g, base=gb, slot=ga):
                    cand = whnf_sub(
                        CompS(cube_sub(g, gb), P(forall_ty_iter(ga, g.cod)))
                    )
                    if cand is sw:
                        return whnf_sub(CubeS(g, Ext(gb, ga)))
            return Pairing(sw, tw, ext)
        case ForallS(body=b):
            bw = whnf_sub(b)
            match bw:
                case IdS():
                    return whnf_sub(IdS(forall_con(bw.dom)))
                case Eps(dom=d):
                    return Eps(forall_con(d))
                case P(slot=a):
                    return P(whnf_ty(ForallT(a)))
                case Pairing(sub=s0, tm=t, ext=ext):
                    return whnf_sub(
                        Pairing(ForallS(s0), ForallTm(t), forall_con(ext))
                    )
                case CompS(after=f, before=g):
                    return whnf_sub(CompS(ForallS(f), ForallS(g)))
                case CubeS(mor=f, base=b2):
                    return cube_sub(cc.pad(f, 1), b2)
                case SubTm(tm=t, theta=th):
                    return whnf_sub(SubTm(ForallTm(t), forall_con(th)))
                case _:
                    return ForallS(bw)
        case SubTm(tm=t, theta=th):
            if th is EMPTY:
                return Eps(t.con)
            tw = whnf_tm(t)
            match tw:
                case TmS(sub=d):
                    return whnf_sub(d)
                case PairTm(fst=u, snd=v):
                    return whnf_sub(Pairing(SubTm(u, th.parent), v, th))
                case _:
                    return SubTm(tw, th)
        case CompS(after=f, before=g):
            fw, gw = whnf_sub(f), whnf_sub(g)
            if isinstance(fw, IdS):
                return gw
            if isinstance(gw, IdS):
                return fw
            match fw:
                case CompS(after=a, before=b):
                    return whnf_sub(CompS(a, CompS(b, gw)))
                case Pairing(sub=s0, tm=t, ext=ext):
                    return whnf_sub(Pairing(CompS(s0, gw), TmSubst(t, gw), ext))
                case SubTm(tm=t, theta=th):
                    return whnf_sub(SubTm(TmSubst(t, gw), th))
                case P():
                    if isinstance(gw, Pairing):
                        return gw.sub
                    return CompS(fw, gw)
                case CubeS(mor=h, base=hb):
                    match gw:
                        case CubeS(mor=h2, base=hb2) if hb2 is hb:
                            return cube_sub(cc.compose(h2, h), hb)
                        case CompS(after=CubeS(mor=h2, base=hb2), before=y) if (
                            hb2 is hb
                        ):
                            return whnf_sub(CompS(cube_sub(cc.compose(h2, h), hb), y))
                        case Pairing(sub=s0, tm=t, ext=ext) if isinstance(hb, Ext):
                            g0, a0 = hb.parent, hb.slot
                            jh = h.dom
                            tgt = Ext(
                                forall_con_iter(g0, jh), forall_ty_iter(a0, jh)
                            )
                            return whnf_sub(
                                Pairing(
                                    CompS(cube_sub(h, g0), s0),
                                    TmSubst(qcube(h, g0, a0), gw),
                                    tgt,
                                )
                            )
                        case _:
                            if not isinstance(gw, Pairing):
                                d0 = unforall_iter_sub(gw, h.cod)
                                if (
                                    d0 is not None
                                    and d0.cod is hb
                                    and not _p_headed(d0)
                                ):
                                    return whnf_sub(
                                        CompS(
                                            forall_sub_iter(d0, h.dom),
                                            cube_sub(h, d0.dom),
                                        )
                                    )
                            return CompS(fw, gw)
                case _:
                    return CompS(fw, gw)
    return s


# --- types -----------------------------------------------------------------------


def whnf_ty(a):
    hit = _ty_cache.get(a)
    if hit is not None:
        return hit
    out = _whnf_ty(a)
    _ty_cache[a] = out
    _ty_cache[out] = out
    return out


def _whnf_ty(a):
    _fuel().tick()
    match a:
        case Top() | BoolT() | Univ() | Sigma() | PiT() | EqT():
            return a
        case El(code=x):
            xw = whnf_tm(x)
            if isinstance(xw, Code):
                return whnf_ty(xw.of)
            return El(xw)
        case KT(theta=th, con=c):
            if th is EMPTY:
                return Top(c)
            kt = KT(th.parent, c)
            qv = Q(c, kt)
            return Sigma(kt, TySubst(th.slot, SubTm(qv, th.parent)))
        case ForallT(body=x):
            xw = whnf_ty(x)
            match xw:
                case Top(con=c):
                    return Top(forall_con(c))
                case BoolT(con=c):
                    return BoolT(forall_con(c))
                case Univ(con=c) if c is not EMPTY:
                    # U is context-invariant; keep forall U based at the
                    # empty context under an explicit weakening
                    return whnf_ty(
                        TySubst(ForallT(Univ(EMPTY)), Eps(forall_con(c)))
                    )
                case Sigma(fst=f, snd=sn):
                    return Sigma(whnf_ty(ForallT(f)), whnf_ty(ForallT(sn)))
                case EqT(of=t, lhs=u, rhs=v):
                    return EqT(
                        whnf_ty(ForallT(t)),
                        whnf_tm(ForallTm(u)),
                        whnf_tm(ForallTm(v)),
                    )
                case KT(theta=th, con=c):
                    return whnf_ty(KT(forall_con(th), forall_con(c)))
                case TySubst(body=b, sub=s0):
                    return whnf_ty(TySubst(ForallT(b), ForallS(s0)))
                case El(code=code):
                    # extrude the substitution so forall always faces a
                    # substitution-free stuck head
                    spl = _un_subst_tm(code)
                    if spl is not None:
                        h, s0 = spl
                        return whnf_ty(TySubst(ForallT(El(h)), ForallS(s0)))
                    return ForallT(xw)
                case _:
                    return ForallT(xw)
        case TySubst(body=b, sub=s):
            sw = whnf_sub(s)
            if isinstance(sw, IdS):
                return whnf_ty(b)
            bw = whnf_ty(b)
            match bw:
                case Top():
                    return Top(sw.dom)
                case BoolT():
                    return BoolT(sw.dom)
                case Univ():
                    return Univ(sw.dom)
                case KT(theta=th):
                    return whnf_ty(KT(th, sw.dom))
                case Sigma(fst=f, snd=sn):
                    return Sigma(TySubst(f, sw), TySubst(sn, lift(sw, f)))
                case PiT(dom_ty=f, cod_ty=sn):
                    return PiT(TySubst(f, sw), TySubst(sn, lift(sw, f)))
                case EqT(of=t, lhs=u, rhs=v):
                    return EqT(TySubst(t, sw), TmSubst(u, sw), TmSubst(v, sw))
                case El(code=x):
                    return whnf_ty(El(TmSubst(x, sw)))
                case TySubst(body=b0, sub=d):
                    return whnf_ty(TySubst(b0, CompS(d, sw)))
                case ForallT(body=x):
                    match sw, whnf_ty(x):
                        case Pairing(tm=u), El(code=Q()):
                            uw = whnf_tm(u)
                            if isinstance(uw, Unspan):
                                return whnf_ty(uw.apex)
                    return TySubst(bw, sw)
                case _:
                    return TySubst(bw, sw)
    return a


# --- terms -----------------------------------------------------------------------


def whnf_tm(t):
    hit = _tm_cache.get(t)
    if hit is not None:
        return hit
    out = _whnf_tm(t)
    _tm_cache[t] = out
    _tm_cache[out] = out
    return out


def _mk_pair_sig(slot_a, slot_b, x):
    """Sigma annotation for a cube-restricted pair: (forall^J Sig)[x]."""
    a_j = TySubst(slot_a, x)
    return Sigma(a_j, TySubst(slot_b, lift(x, slot_a)))


def _whnf_tm(t):
    _fuel().tick()
    match t:
        case Q() | TT() | TrueC() | FalseC() | Code() | Refl() | Unspan():
            return t
        case QCube(mor=f, base=b, slot=a):
            return qcube(f, b, a)
        case Lam(body=b):
            bw = whnf_tm(b)
            if isinstance(bw, App):
                return whnf_tm(bw.fn)
            return t
        case PairTm(fst=u, snd=v):
            uw, vw = whnf_tm(u), whnf_tm(v)
            match uw, vw:
                case Proj1(pair=x), Proj2(pair=y) if x is y:
                    return whnf_tm(x)
            return t
        case Proj1(pair=x):
            xw = whnf_tm(x)
            match xw:
                case PairTm(fst=u):
                    return whnf_tm(u)
                case TmS(sub=d):
                    ext = d.cod
                    return whnf_tm(TmS(CompS(P(ext.slot), d)))
            return Proj1(xw)
        case Proj2(pair=x):
            xw = whnf_tm(x)
            match xw:
                case PairTm(snd=v):
                    return whnf_tm(v)
                case TmS(sub=d):
                    return whnf_tm(TmSubst(Q(d.cod.parent, d.cod.slot), d))
            return Proj2(xw)
        case App(fn=x):
            xw = whnf_tm(x)
            if isinstance(xw, Lam):
                return whnf_tm(xw.body)
            return App(xw)
        case Ite(motive=m, scrut=b, if_true=u, if_false=v):
            bw = whnf_tm(b)
            if isinstance(bw, TrueC):
                return whnf_tm(u)
            if isinstance(bw, FalseC):
                return whnf_tm(v)
            return Ite(m, bw, u, v)
        case TmS(sub=d):
            dw = whnf_sub(d)
            match dw:
                case Pairing(sub=s0, tm=u, ext=ext):
                    th0, slot = ext.parent, ext.slot
                    kt = KT(th0, s0.dom)
                    sig = Sigma(kt, TySubst(slot, SubTm(Q(s0.dom, kt), th0)))
                    return whnf_tm(PairTm(TmS(s0), u, sig))
                case Eps(dom=dm):
                    return TT(dm)
                case SubTm(tm=u):
                    return whnf_tm(u)
            return TmS(dw)
        case MkForallPi(sub=s, t0=t0, t1=t1, apex=tb, pi=pi):
            res = _mk_forall_pi_eta(s, t0, t1, tb)
            if res is not None:
                return whnf_tm(res)
            return t
        case ForallTm(body=x):
            xw = whnf_tm(x)
            match xw:
                case TT(con=c):
                    return TT(forall_con(c))
                case TrueC(con=c):
                    return TrueC(forall_con(c))
                case FalseC(con=c):
                    return FalseC(forall_con(c))
                case Q(gamma=g, slot=a):
                    return Q(forall_con(g), whnf_ty(ForallT(a)))
                case PairTm(fst=u, snd=v, sig=sg):
                    return whnf_tm(
                        PairTm(ForallTm(u), ForallTm(v), whnf_ty(ForallT(sg)))
                    )
                case Proj1(pair=x0):
                    return whnf_tm(Proj1(ForallTm(x0)))
                case Proj2(pair=x0):
                    return whnf_tm(Proj2(ForallTm(x0)))
                case Refl(of=a):
                    return whnf_tm(Refl(ForallTm(a)))
                case Ite(motive=m, scrut=b, if_true=u, if_false=v):
                    return whnf_tm(
                        Ite(
                            whnf_ty(ForallT(m)),
                            ForallTm(b),
                            ForallTm(u),
                            ForallTm(v),
                        )
                    )
                case TmSubst(body=b, sub=s0):
                    return whnf_tm(TmSubst(ForallTm(b), ForallS(s0)))
                case QCube(mor=f, base=b, slot=a):
                    return whnf_tm(QCube(cc.pad(f, 1), b, a))
                case TmS(sub=d):
                    return whnf_tm(TmS(ForallS(d)))
                case _:
                    return ForallTm(xw)
        case TmSubst(body=b, sub=s):
            return _whnf_tmsubst(b, s)
    return t


def _mk_forall_pi_eta(s, t0, t1, tb):
    """mk-forall-pi applied to the projections of an existing element gives
    that element back (the fourth equation of the Pi clause)."""
    sw = whnf_sub(s)
    t2 = None
    for tk in (t0, t1):
        match whnf_tm(tk):
            case TmSubst(
                body=QCube(mor=f), sub=Pairing(sub=s2, tm=cand)
            ) if _is_face(f) is not None and s2 is sw:
                if t2 is None:
                    t2 = cand
                elif t2 is not cand:
                    return None
            case _:
                return None
    # the apex is lam(forall(app q)) under the lifted (s, t2); the lift
    # distributes under whnf into ((s.p, t2[p]), q)
    match whnf_tm(tb):
        case Lam(
            body=TmSubst(
                body=ForallTm(body=App(fn=Q())),
                sub=Pairing(
                    sub=Pairing(
                        sub=CompS(after=s3, before=P()),
                        tm=TmSubst(body=cand2, sub=P()),
                    ),
                    tm=Q(),
                ),
            )
        ) if whnf_sub(s3) is sw and whnf_tm(cand2) is whnf_tm(t2):
            return t2
    return None


def _whnf_tmsubst(b, s):
    sw = whnf_sub(s)
    if isinstance(sw, IdS):
        return whnf_tm(b)
    tw = whnf_tm(b)
    match tw:
        case TT():
            return TT(sw.dom)
        case TrueC():
            return TrueC(sw.dom)
        case FalseC():
            return FalseC(sw.dom)
        case PairTm(fst=u, snd=v, sig=sg):
            sgw = head_sigma(sg)
            sig2 = Sigma(
                TySubst(sgw.fst, sw), TySubst(sgw.snd, lift(sw, sgw.fst))
            )
            return whnf_tm(PairTm(TmSubst(u, sw), TmSubst(v, sw), sig2))
        case Proj1(pair=x):
            return whnf_tm(Proj1(TmSubst(x, sw)))
        case Proj2(pair=x):
            return whnf_tm(Proj2(TmSubst(x, sw)))
        case Refl(of=a):
            return whnf_tm(Refl(TmSubst(a, sw)))
        case Code(of=a):
            return whnf_tm(Code(TySubst(a, sw)))
        case Lam(body=x):
            return whnf_tm(Lam(TmSubst(x, lift(sw, x.con.slot))))
        case Ite(motive=m, scrut=sc, if_true=u, if_false=v):
            return whnf_tm(
                Ite(
                    TySubst(m, lift(sw, BoolT(m.con.parent))),
                    TmSubst(sc, sw),
                    TmSubst(u, sw),
                    TmSubst(v, sw),
                )
            )
        case TmS(sub=d):
            return whnf_tm(TmS(CompS(d, sw)))
        case MkForallPi(sub=d, t0=t0, t1=t1, apex=tb, pi=pi):
            return whnf_tm(
                MkForallPi(
                    CompS(d, sw),
                    TmSubst(t0, sw),
                    TmSubst(t1, sw),
                    TmSubst(tb, sw),
                    pi,
                )
            )
        case Unspan(side0=s0, side1=s1, apex=ax, leg0=l0, leg1=l1):
            lf = lift(sw, ax)
            return whnf_tm(
                Unspan(
                    TySubst(s0, sw),
                    TySubst(s1, sw),
                    TySubst(ax, sw),
                    TmSubst(l0, lf),
                    TmSubst(l1, lf),
                )
            )
        case TmSubst(body=b0, sub=d):
            return whnf_tm(TmSubst(b0, CompS(d, sw)))
        case Q(gamma=g, slot=a):
            match sw:
                case Pairing(tm=u):
                    return whnf_tm(u)
                case CubeS(mor=h, base=Ext(parent=g0, slot=a0)):
                    return whnf_tm(QCube(h, g0, a0))
                case _:
                    return TmSubst(tw, sw)
        case App(fn=w):
            return _whnf_app_subst(tw, w, sw)
        case QCube(mor=f, base=th, slot=slot):
            return _whnf_qcube_subst(tw, f, th, slot, sw)
        case ForallTm(body=App(fn=wf)) if isinstance(sw, Pairing):
            # peel trailing weakenings off the function: by naturality of
            # app, forall(app (w[p]))[(rho, u)] = forall(app w)[(p.rho, u)]
            peeled = _strip_last_p(wf)
            if peeled is not None:
                w2, pslot = peeled
                rho2 = whnf_sub(
                    CompS(P(whnf_ty(ForallT(pslot))), sw.sub)
                )
                node = ForallTm(App(w2))
                return whnf_tm(TmSubst(node, Pairing(rho2, sw.tm, node.con)))
            return _whnf_forall_app_subst(tw, wf, sw)
        case ForallTm():
            return TmSubst(tw, sw)
        case _:
            return TmSubst(tw, sw)


def _whnf_app_subst(tw, w, sw):
    """(app w)[s]  --  normalize toward  app(w[s0])[(id, u)]."""
    match sw:
        case Pairing(sub=s0, tm=u, ext=ext):
            if isinstance(s0, IdS):
                ww = whnf_tm(w)
                if isinstance(ww, Lam):
                    return whnf_tm(TmSubst(ww.body, sw))
                return TmSubst(App(ww), sw)
            w2 = TmSubst(w, s0)
            pi = head_pi(w2.ty)
            return whnf_tm(
                TmSubst(App(w2), Pairing(IdS(s0.dom), u, Ext(s0.dom, pi.dom_ty)))
            )
        case _:
            ext = sw.cod
            s0 = whnf_sub(CompS(P(ext.slot), sw))
            u = whnf_tm(TmSubst(Q(ext.parent, ext.slot), sw))
            w2 = TmSubst(w, s0)
            pi = head_pi(w2.ty)
            return whnf_tm(
                TmSubst(App(w2), Pairing(IdS(sw.dom), u, Ext(sw.dom, pi.dom_ty)))
            )


def _whnf_qcube_subst(tw, f, th, slot, sw):
    i, j = f.cod, f.dom
    match sw:
        case CubeS(mor=g, base=Ext(parent=g0, slot=a0)) if (
            g0 is th and a0 is slot
        ):
            return whnf_tm(qcube(cc.compose(g, f), th, slot))
        case CompS(
            after=CubeS(mor=g, base=Ext(parent=g0, slot=a0)), before=rho
        ) if g0 is th and a0 is slot:
            return whnf_tm(TmSubst(qcube(cc.compose(g, f), th, slot), rho))
        case Pairing(sub=s0, tm=u, ext=ext):
            uw = whnf_tm(u)
            k = _is_face(f)
            slot_w = whnf_ty(slot)
            # beta laws of the global operators
            if k is not None:
                match slot_w, uw:
                    case PiT(), MkForallPi(sub=s2, t0=t0, t1=t1) if (
                        whnf_sub(s2) is s0
                    ):
                        return whnf_tm((t0, t1)[k])
                    case Univ(), Unspan(side0=a0t, side1=a1t) if th is EMPTY:
                        return whnf_tm(Code((a0t, a1t)[k]))
                    case El(code=Q(gamma=Empty())), _ if th is Ext(
                        EMPTY, Univ(EMPTY)
                    ):
                        res = _unspan_leg(k, s0, uw)
                        if res is not None:
                            return whnf_tm(res)
            # pointwise action on Sigma slots
            if isinstance(slot_w, Sigma):
                a_s, b_s = slot_w.fst, slot_w.snd
                ext_a = Ext(forall_con_iter(th, i), forall_ty_iter(a_s, i))
                fst_pair = Pairing(s0, Proj1(u), ext_a)
                fst = TmSubst(qcube(f, th, a_s), fst_pair)
                ext_b = Ext(
                    forall_con_iter(Ext(th, a_s), i), forall_ty_iter(b_s, i)
                )
                snd = TmSubst(
                    qcube(f, Ext(th, a_s), b_s),
                    Pairing(fst_pair, Proj2(u), ext_b),
                )
                x = CompS(cube_sub(f, th), s0)
                sig = _mk_pair_sig(
                    forall_ty_iter(a_s, j), forall_ty_iter(b_s, j), x
                )
                return whnf_tm(PairTm(fst, snd, sig))
            # nested restriction at the same base: compose in the cube category
            match uw:
                case TmSubst(
                    body=QCube(mor=g, base=g0, slot=a0),
                    sub=Pairing(sub=s2) as rho,
                ) if g0 is th and a0 is slot:
                    cand = whnf_sub(CompS(cube_sub(g, th), s2))
                    if cand is s0:
                        return whnf_tm(
                            TmSubst(qcube(cc.compose(g, f), th, slot), rho)
                        )
            # factor through a forall image of a term over the base
            match uw:
                case TmSubst(body=w0, sub=rho):
                    ww = unforall_iter_tm(w0, i)
                    if ww is not None:
                        rw = whnf_sub(rho)
                        if rw is s0 and ww.con is th and whnf_ty(ww.ty) is slot_w:
                            return whnf_tm(
                                TmSubst(
                                    forall_tm_iter(ww, j),
                                    CompS(cube_sub(f, th), s0),
                                )
                            )
                        match rw:
                            case Pairing(sub=s2, tm=u2) if s2 is s0:
                                wc = ww.con
                                if (
                                    isinstance(wc, Ext)
                                    and wc.parent is th
                                    and whnf_ty(ww.ty)
                                    is whnf_ty(TySubst(slot_w, P(wc.slot)))
                                ):
                                    aw = wc.slot
                                    inner = TmSubst(
                                        qcube(f, th, aw),
                                        Pairing(
                                            s0,
                                            u2,
                                            Ext(
                                                forall_con_iter(th, i),
                                                forall_ty_iter(aw, i),
                                            ),
                                        ),
                                    )
                                    tgt = Ext(
                                        forall_con_iter(th, j),
                                        forall_ty_iter(aw, j),
                                    )
                                    return whnf_tm(
                                        TmSubst(
                                            forall_tm_iter(ww, j),
                                            Pairing(
                                                whnf_sub(
                                                    CompS(cube_sub(f, th), s0)
                                                ),
                                                inner,
                                                tgt,
                                            ),
                                        )
                                    )
            # level-zero push: q[<f>_{Th |> B} . (s, u)] = (forall^J u)[<f>]
            # (a bare variable over a substituted slot would only bounce
            # through re-atomization and slot collapse)
            if i == 0 and not (
                isinstance(uw, Q) and isinstance(whnf_ty(uw.slot), TySubst)
            ):
                return whnf_tm(
                    TmSubst(forall_tm_iter(uw, j), cube_sub(f, sw.dom))
                )
            return TmSubst(tw, sw)
        case _:
            return TmSubst(tw, sw)


def _unspan_leg(k, s0, uw):
    """The leg law of unspan: restriction from the apex to a base applies
    the stored leg."""
    match whnf_sub(s0):
        case Pairing(tm=un):
            unw = whnf_tm(un)
            if isinstance(unw, Unspan):
                leg = (unw.leg0, unw.leg1)[k]
                return TmSubst(
                    leg, Pairing(IdS(uw.con), uw, Ext(unw.con, unw.apex))
                )
        case CompS(after=Pairing(tm=un), before=P()):
            unw = whnf_tm(un)
            if isinstance(unw, Unspan) and isinstance(uw, Q):
                return (unw.leg0, unw.leg1)[k]
    return None


# --- deep normalization ------------------------------------------------------------


def nf_sub(s):
    return whnf_sub(s)


def nf_ty(a):
    w = whnf_ty(a)
    match w:
        case Top() | BoolT() | Univ():
            return w
        case Sigma(fst=f, snd=sn):
            return Sigma(nf_ty(f), nf_ty(sn))
        case PiT(dom_ty=f, cod_ty=sn):
            return PiT(nf_ty(f), nf_ty(sn))
        case EqT(of=a0, lhs=u, rhs=v):
            return EqT(nf_ty(a0), nf_tm(u), nf_tm(v))
        case El(code=x):
            return El(nf_tm(x))
        case ForallT(body=x):
            return ForallT(nf_ty(x))
        case TySubst(body=b, sub=s):
            return TySubst(nf_ty(b), nf_sub(s))
        case _:
            return w


def nf_tm(t):
    w = whnf_tm(t)
    match w:
        case Q() | TT() | TrueC() | FalseC() | QCube():
            return w
        case PairTm(fst=u, snd=v, sig=sg):
            return PairTm(nf_tm(u), nf_tm(v), sg)
        case Proj1(pair=x):
            return Proj1(nf_tm(x))
        case Proj2(pair=x):
            return Proj2(nf_tm(x))
        case Refl(of=a):
            return Refl(nf_tm(a))
        case Lam(body=x):
            return Lam(nf_tm(x))
        case App(fn=x):
            return App(nf_tm(x))
        case Code(of=a):
            return Code(nf_ty(a))
        case Ite(motive=m, scrut=b, if_true=u, if_false=v):
            return Ite(nf_ty(m), nf_tm(b), nf_tm(u), nf_tm(v))
        case ForallTm(body=x):
            return ForallTm(nf_tm(x))
        case TmS(sub=d):
            return TmS(nf_sub(d))
        case MkForallPi(sub=d, t0=t0, t1=t1, apex=tb, pi=pi):
            return MkForallPi(nf_sub(d), nf_tm(t0), nf_tm(t1), nf_tm(tb), pi)
        case Unspan(side0=s0, side1=s1, apex=ax, leg0=l0, leg1=l1):
            return Unspan(nf_ty(s0), nf_ty(s1), nf_ty(ax), nf_tm(l0), nf_tm(l1))
        case TmSubst(body=b, sub=s):
            return TmSubst(nf_tm(b), nf_sub(s))
        case _:
            return w
