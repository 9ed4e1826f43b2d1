"""Term algebra for the global theory: hash-consed nodes with explicit
substitutions, a CwF-style combinator calculus extended with the span
operators (forall on every sort, face/degeneracy/symmetry substitutions,
mk-forall-pi, unspan) and strict democracy.

Composites of the face/degeneracy/symmetry transformations at a fixed base
context are kept in a single canonical node (:class:`CubeS` / :class:`QCube`)
indexed by a cube-category morphism, so their equational theory reduces to
structural equality of cube normal forms.

Every node carries its inferred context (and type, for terms) as an
annotation computed at construction; raw constructors trust their inputs,
the checked ``mk_*`` layer in :mod:`spantt.kernel.api` validates.
"""

from __future__ import annotations

import threading

from .. import cubecat as cc
from ..cubecat import CubeMor

__all__ = [
    "KernelError",
    "TypeMismatchError",
    "Node",
    "Con",
    "Ty",
    "Tm",
    "Sub",
    "Empty",
    "Ext",
    "Top",
    "BoolT",
    "Univ",
    "Sigma",
    "PiT",
    "EqT",
    "El",
    "KT",
    "ForallT",
    "TySubst",
    "Q",
    "TT",
    "TrueC",
    "FalseC",
    "PairTm",
    "Proj1",
    "Proj2",
    "Refl",
    "Lam",
    "App",
    "Code",
    "Ite",
    "ForallTm",
    "MkForallPi",
    "Unspan",
    "QCube",
    "TmS",
    "TmSubst",
    "IdS",
    "Eps",
    "P",
    "Pairing",
    "CompS",
    "ForallS",
    "CubeS",
    "SubTm",
    "EMPTY",
]


class KernelError(Exception):
    """Malformed kernel input."""


class TypeMismatchError(KernelError):
    """A smart constructor rejected ill-typed arguments."""


_intern_lock = threading.Lock()
_intern: dict = {}
_uid = [0]


class Node:
    __slots__ = ("uid", "args", "__weakref__")

    def __new__(cls, *args):
        key = (cls,) + args
        with _intern_lock:
            found = _intern.get(key)
            if found is not None:
                return found
            self = object.__new__(cls)
            _uid[0] += 1
            object.__setattr__(self, "uid", _uid[0])
            object.__setattr__(self, "args", args)
            _intern[key] = self
        self._init(*args)
        return self

    def _init(self, *args):
        raise NotImplementedError

    def __setattr__(self, name, value):
        raise AttributeError("kernel nodes are immutable")

    def _set(self, name, value):
        object.__setattr__(self, name, value)

    def __repr__(self):
        inner = ",".join(
            a.__class__.__name__ + str(a.uid) if isinstance(a, Node) else repr(a)
            for a in self.args
        )
        return f"{self.__class__.__name__}({inner})"


class Con(Node):
    __slots__ = ()


class Ty(Node):
    __slots__ = ("con",)


class Tm(Node):
    __slots__ = ("con", "ty")


class Sub(Node):
    __slots__ = ("dom", "cod")


# --- contexts (always concrete telescopes) -----------------------------------


class Empty(Con):
    __slots__ = ()

    def _init(self):
        pass

    def __repr__(self):
        return "<>"


EMPTY = Empty()


class Ext(Con):
    __slots__ = ("parent", "slot")

    def _init(self, parent, slot):
        self._set("parent", parent)
        self._set("slot", slot)


def con_len(con):
    n = 0
    while isinstance(con, Ext):
        n += 1
        con = con.parent
    return n


def con_types(con):
    """Telescope types, outermost first."""
    out = []
    while isinstance(con, Ext):
        out.append(con.slot)
        con = con.parent
    out.reverse()
    return out


# --- types --------------------------------------------------------------------


class Top(Ty):
    __slots__ = ()

    def _init(self, con):
        self._set("con", con)


class BoolT(Ty):
    __slots__ = ()

    def _init(self, con):
        self._set("con", con)


class Univ(Ty):
    __slots__ = ()

    def _init(self, con):
        self._set("con", con)


class Sigma(Ty):
    __slots__ = ("fst", "snd")

    def _init(self, fst, snd):
        self._set("fst", fst)
        self._set("snd", snd)
        self._set("con", fst.con)


class PiT(Ty):
    __slots__ = ("dom_ty", "cod_ty")

    def _init(self, dom_ty, cod_ty):
        self._set("dom_ty", dom_ty)
        self._set("cod_ty", cod_ty)
        self._set("con", dom_ty.con)


class EqT(Ty):
    __slots__ = ("of", "lhs", "rhs")

    def _init(self, of, lhs, rhs):
        self._set("of", of)
        self._set("lhs", lhs)
        self._set("rhs", rhs)
        self._set("con", of.con)


class El(Ty):
    __slots__ = ("code",)

    def _init(self, code):
        self._set("code", code)
        self._set("con", code.con)


class KT(Ty):
    __slots__ = ("theta",)

    def _init(self, theta, con):
        self._set("theta", theta)
        self._set("con", con)


class ForallT(Ty):
    __slots__ = ("body",)

    def _init(self, body):
        self._set("body", body)
        self._set("con", forall_con(body.con))


class TySubst(Ty):
    __slots__ = ("body", "sub")

    def _init(self, body, sub):
        self._set("body", body)
        self._set("sub", sub)
        self._set("con", sub.dom)


# --- substitutions -------------------------------------------------------------


class IdS(Sub):
    __slots__ = ()

    def _init(self, con):
        self._set("dom", con)
        self._set("cod", con)


class Eps(Sub):
    __slots__ = ()

    def _init(self, dom):
        self._set("dom", dom)
        self._set("cod", EMPTY)


class P(Sub):
    __slots__ = ("slot",)

    def _init(self, slot):
        self._set("slot", slot)
        self._set("dom", Ext(slot.con, slot))
        self._set("cod", slot.con)


class Pairing(Sub):
    __slots__ = ("sub", "tm", "ext")

    def _init(self, sub, tm, ext):
        self._set("sub", sub)
        self._set("tm", tm)
        self._set("ext", ext)
        self._set("dom", sub.dom)
        self._set("cod", ext)


class CompS(Sub):
    __slots__ = ("after", "before")

    def _init(self, after, before):
        self._set("after", after)
        self._set("before", before)
        self._set("dom", before.dom)
        self._set("cod", after.cod)


class ForallS(Sub):
    __slots__ = ("body",)

    def _init(self, body):
        self._set("body", body)
        self._set("dom", forall_con(body.dom))
        self._set("cod", forall_con(body.cod))


class CubeS(Sub):
    """The interpretation of a cube morphism ``f : J -> I`` at a base context,
    a substitution ``forall^I base -> forall^J base``."""

    __slots__ = ("mor", "base")

    def _init(self, mor, base):
        self._set("mor", mor)
        self._set("base", base)
        self._set("dom", forall_con_iter(base, mor.cod))
        self._set("cod", forall_con_iter(base, mor.dom))


class SubTm(Sub):
    """Democracy coercion: a term of type K Theta used as a substitution."""

    __slots__ = ("tm", "theta")

    def _init(self, tm, theta):
        self._set("tm", tm)
        self._set("theta", theta)
        self._set("dom", tm.con)
        self._set("cod", theta)


# --- terms ----------------------------------------------------------------------


class Q(Tm):
    __slots__ = ("gamma", "slot")

    def _init(self, gamma, slot):
        self._set("gamma", gamma)
        self._set("slot", slot)
        self._set("con", Ext(gamma, slot))
        self._set("ty", TySubst(slot, P(slot)))


class TT(Tm):
    __slots__ = ()

    def _init(self, con):
        self._set("con", con)
        self._set("ty", Top(con))


class TrueC(Tm):
    __slots__ = ()

    def _init(self, con):
        self._set("con", con)
        self._set("ty", BoolT(con))


class FalseC(Tm):
    __slots__ = ()

    def _init(self, con):
        self._set("con", con)
        self._set("ty", BoolT(con))


class PairTm(Tm):
    __slots__ = ("fst", "snd", "sig")

    def _init(self, fst, snd, sig):
        self._set("fst", fst)
        self._set("snd", snd)
        self._set("sig", sig)
        self._set("con", fst.con)
        self._set("ty", sig)


class Proj1(Tm):
    __slots__ = ("pair",)

    def _init(self, pair):
        from .norm import head_sigma

        sig = head_sigma(pair.ty)
        self._set("pair", pair)
        self._set("con", pair.con)
        self._set("ty", sig.fst)


class Proj2(Tm):
    __slots__ = ("pair",)

    def _init(self, pair):
        from .norm import head_sigma

        sig = head_sigma(pair.ty)
        first = Proj1(pair)
        self._set("pair", pair)
        self._set("con", pair.con)
        self._set("ty", TySubst(sig.snd, pairing_one(first, sig.fst)))


class Refl(Tm):
    __slots__ = ("of",)

    def _init(self, of):
        self._set("of", of)
        self._set("con", of.con)
        self._set("ty", EqT(of.ty, of, of))


class Lam(Tm):
    __slots__ = ("body",)

    def _init(self, body):
        ext = body.con
        if not isinstance(ext, Ext):
            raise KernelError("lam body must live in an extended context")
        self._set("body", body)
        self._set("con", ext.parent)
        self._set("ty", PiT(ext.slot, body.ty))


class App(Tm):
    __slots__ = ("fn",)

    def _init(self, fn):
        from .norm import head_pi

        pi = head_pi(fn.ty)
        self._set("fn", fn)
        self._set("con", Ext(fn.con, pi.dom_ty))
        self._set("ty", pi.cod_ty)


class Code(Tm):
    __slots__ = ("of",)

    def _init(self, of):
        self._set("of", of)
        self._set("con", of.con)
        self._set("ty", Univ(of.con))


class Ite(Tm):
    __slots__ = ("motive", "scrut", "if_true", "if_false")

    def _init(self, motive, scrut, if_true, if_false):
        self._set("motive", motive)
        self._set("scrut", scrut)
        self._set("if_true", if_true)
        self._set("if_false", if_false)
        self._set("con", scrut.con)
        self._set("ty", TySubst(motive, pairing_one(scrut, BoolT(scrut.con))))


class ForallTm(Tm):
    __slots__ = ("body",)

    def _init(self, body):
        self._set("body", body)
        self._set("con", forall_con(body.con))
        self._set("ty", ForallT(body.ty))


class MkForallPi(Tm):
    """The inverse packaging a compatible (t0, t1, t) triple into an element
    of forall of a Pi type; ``pi`` is the Pi type over the base context and
    ``sub`` the substitution into its forall-ed context."""

    __slots__ = ("sub", "t0", "t1", "apex", "pi")

    def _init(self, sub, t0, t1, apex, pi):
        self._set("sub", sub)
        self._set("t0", t0)
        self._set("t1", t1)
        self._set("apex", apex)
        self._set("pi", pi)
        self._set("con", sub.dom)
        self._set("ty", TySubst(ForallT(pi), sub))


class Unspan(Tm):
    """Section from explicit spans of types back into forall U."""

    __slots__ = ("side0", "side1", "apex", "leg0", "leg1")

    def _init(self, side0, side1, apex, leg0, leg1):
        self._set("side0", side0)
        self._set("side1", side1)
        self._set("apex", apex)
        self._set("leg0", leg0)
        self._set("leg1", leg1)
        self._set("con", side0.con)
        self._set("ty", TySubst(ForallT(Univ(EMPTY)), Eps(side0.con)))


class QCube(Tm):
    """The variable under a cube substitution at an extended context:
    ``q[<f>_{base |> slot}]``, the f-restriction in the slot direction."""

    __slots__ = ("mor", "base", "slot")

    def _init(self, mor, base, slot):
        i, j = mor.cod, mor.dom
        self._set("mor", mor)
        self._set("base", base)
        self._set("slot", slot)
        slot_i = forall_ty_iter(slot, i)
        self._set("con", Ext(forall_con_iter(base, i), slot_i))
        self._set(
            "ty",
            TySubst(forall_ty_iter(slot, j), CompS(CubeS(mor, base), P(slot_i))),
        )


class TmS(Tm):
    """Democracy coercion: a substitution used as a term of K type."""

    __slots__ = ("sub",)

    def _init(self, sub):
        self._set("sub", sub)
        self._set("con", sub.dom)
        self._set("ty", KT(sub.cod, sub.dom))


class TmSubst(Tm):
    __slots__ = ("body", "sub")

    def _init(self, body, sub):
        self._set("body", body)
        self._set("sub", sub)
        self._set("con", sub.dom)
        self._set("ty", TySubst(body.ty, sub))


# --- derived context/type builders ----------------------------------------------


def forall_con(con):
    """forall on contexts, eagerly pushed into the telescope."""
    if con is EMPTY:
        return EMPTY
    from .norm import whnf_ty

    return Ext(forall_con(con.parent), whnf_ty(ForallT(con.slot)))


def forall_con_iter(con, n):
    for _ in range(n):
        con = forall_con(con)
    return con


def forall_ty_iter(ty, n):
    from .norm import whnf_ty

    for _ in range(n):
        ty = whnf_ty(ForallT(ty))
    return ty


def forall_tm_iter(tm, n):
    for _ in range(n):
        tm = ForallTm(tm)
    return tm


def forall_sub_iter(sub, n):
    for _ in range(n):
        sub = ForallS(sub)
    return sub


def pairing_one(tm, slot):
    """The section ``(id, tm) : Sub Gamma (Gamma |> slot)``."""
    return Pairing(IdS(tm.con), tm, Ext(slot.con, slot))


def lift(sub, slot):
    """``sub^ = (sub . p, q) : Sub (Delta |> slot[sub]) (Gamma |> slot)``."""
    inst = TySubst(slot, sub)
    return Pairing(
        CompS(sub, P(inst)), Q(sub.dom, inst), Ext(slot.con, slot)
    )


# --- syntactic forall inverses ----------------------------------------------------


def unforall_con(con):
    if con is EMPTY:
        return EMPTY
    parent = unforall_con(con.parent)
    if parent is None:
        return None
    slot = unforall_ty(con.slot)
    if slot is None:
        return None
    return Ext(parent, slot)


def unforall_ty(ty):
    match ty:
        case ForallT(body=b):
            return b
        case Top(con=c) | BoolT(con=c):
            uc = unforall_con(c)
            return None if uc is None else type(ty)(uc)
        case KT(theta=t, con=c):
            ut, uc = unforall_con(t), unforall_con(c)
            return None if ut is None or uc is None else KT(ut, uc)
        case Sigma(fst=a, snd=b):
            ua, ub = unforall_ty(a), unforall_ty(b)
            return None if ua is None or ub is None else Sigma(ua, ub)
        case EqT(of=a, lhs=u, rhs=v):
            ua, uu, uv = unforall_ty(a), unforall_tm(u), unforall_tm(v)
            if ua is None or uu is None or uv is None:
                return None
            return EqT(ua, uu, uv)
        case TySubst(body=a, sub=s):
            ua, us = unforall_ty(a), unforall_sub(s)
            return None if ua is None or us is None else TySubst(ua, us)
        case _:
            return None


def unforall_tm(tm):
    match tm:
        case ForallTm(body=b):
            return b
        case Q(gamma=g, slot=a):
            ug, ua = unforall_con(g), unforall_ty(a)
            return None if ug is None or ua is None else Q(ug, ua)
        case TT(con=c) | TrueC(con=c) | FalseC(con=c):
            uc = unforall_con(c)
            return None if uc is None else type(tm)(uc)
        case PairTm(fst=u, snd=v, sig=s):
            uu, uv, us = unforall_tm(u), unforall_tm(v), unforall_ty(s)
            if uu is None or uv is None or us is None:
                return None
            return PairTm(uu, uv, us)
        case Proj1(pair=x):
            ux = unforall_tm(x)
            return None if ux is None else Proj1(ux)
        case Proj2(pair=x):
            ux = unforall_tm(x)
            return None if ux is None else Proj2(ux)
        case Refl(of=a):
            ua = unforall_tm(a)
            return None if ua is None else Refl(ua)
        case Ite(motive=m, scrut=b, if_true=u, if_false=v):
            um, ub = unforall_ty(m), unforall_tm(b)
            uu, uv = unforall_tm(u), unforall_tm(v)
            if None in (um, ub, uu, uv):
                return None
            return Ite(um, ub, uu, uv)
        case TmSubst(body=t, sub=s):
            ut, us = unforall_tm(t), unforall_sub(s)
            return None if ut is None or us is None else TmSubst(ut, us)
        case QCube(mor=f, base=b, slot=a):
            g = cc.un_pad(f)
            return None if g is None else QCube(g, b, a)
        case TmS(sub=s):
            us = unforall_sub(s)
            return None if us is None else TmS(us)
        case _:
            return None


def unforall_sub(sub):
    match sub:
        case ForallS(body=b):
            return b
        case IdS() as s:
            uc = unforall_con(s.dom)
            return None if uc is None else IdS(uc)
        case Eps(dom=d):
            ud = unforall_con(d)
            return None if ud is None else Eps(ud)
        case P(slot=a):
            ua = unforall_ty(a)
            return None if ua is None else P(ua)
        case Pairing(sub=s, tm=t, ext=e):
            us, ut, ue = unforall_sub(s), unforall_tm(t), unforall_con(e)
            if us is None or ut is None or ue is None:
                return None
            return Pairing(us, ut, ue)
        case CompS(after=f, before=g):
            uf, ug = unforall_sub(f), unforall_sub(g)
            return None if uf is None or ug is None else CompS(uf, ug)
        case CubeS(mor=f, base=b):
            g = cc.un_pad(f)
            return None if g is None else CubeS(g, b)
        case SubTm(tm=t, theta=th):
            ut, uth = unforall_tm(t), unforall_con(th)
            return None if ut is None or uth is None else SubTm(ut, uth)
        case _:
            return None


def unforall_iter_tm(tm, n):
    for _ in range(n):
        tm = unforall_tm(tm)
        if tm is None:
            return None
    return tm


def unforall_iter_sub(sub, n):
    for _ in range(n):
        sub = unforall_sub(sub)
        if sub is None:
            return None
    return sub
