"""Translations between presentations of the theory.

* localization: the context-local operators (forall, ap, apd, foralld, the
  k/R/S projections, mk-forall-pi, unspan) as composites of the global
  operators under the degeneracy substitution;
* globalization: rebuilding the global operators from the local ones through
  strict democracy, together with the packaging isomorphism;
* the interpretation of cube morphisms as substitutions between iterated
  forall contexts;
* the external parametricity translation on the U/El/Pi fragment computing,
  from each type, its logical relation and, from each term, the witness that
  it respects it.
"""

from __future__ import annotations

from . import cubecat as cc
from .kernel import (
    DEFAULT_CFG,
    EMPTY,
    App,
    CompS,
    Ext,
    ForallS,
    ForallT,
    ForallTm,
    IdS,
    KT,
    KernelError,
    Lam,
    P,
    PairTm,
    Pairing,
    PiT,
    Q,
    Sigma,
    TT,
    TmSubst,
    TySubst,
    Univ,
    cube_sub,
    forall_con,
    lift,
    mk_dollar,
    mk_el,
    mk_eps,
    mk_lam,
    mk_mkforallpi,
    mk_proj1,
    mk_proj2,
    mk_q,
    mk_unspan,
    pairing_one,
    qcube,
    sub_of_tm,
    tm_of_sub,
    var,
    whnf_sub,
    whnf_tm,
    whnf_ty,
)


class UnsupportedError(KernelError):
    """A former outside the parametricity-translation fragment."""


# --- localization ------------------------------------------------------------------


class LocalOps:
    """The operators of the local theory over a fixed ambient context.

    Each operator is the corresponding global operator pulled back along the
    degeneracy R over the ambient context (and its lifts), following the
    localization recipe.
    """

    def __init__(self, gamma):
        self.gamma = gamma
        self.r = cube_sub(cc.degen(0), gamma)  # Sub Gamma (forall Gamma)
        self.r2 = whnf_sub(
            CompS(cube_sub(cc.pad(cc.degen(0), 1), gamma), self.r)
        )  # Sub Gamma (forall^2 Gamma)

    def _fext(self, a):
        return Ext(forall_con(self.gamma), whnf_ty(ForallT(a)))

    # types ---------------------------------------------------------------

    def forall(self, a):
        """The span former: (forall A)[R]."""
        return TySubst(ForallT(a), self.r)

    def forall2(self, a):
        """Double span: (forall^2 A)[R . R]."""
        ffa = whnf_ty(ForallT(whnf_ty(ForallT(a))))
        return TySubst(ffa, self.r2)

    def foralld(self, b, a2):
        """Dependent span former applied: (forall B)[R, a2]."""
        return TySubst(ForallT(b), Pairing(self.r, a2, self._fext(b.con.slot)))

    def foralld_open(self, b):
        """forall-d as a family over Gamma |> forall A."""
        return TySubst(ForallT(b), lift(self.r, whnf_ty(ForallT(b.con.slot))))

    # terms ---------------------------------------------------------------

    def ap(self, t, a2):
        """ap (x. t) a2 for x:A |- t (apd is the same composite)."""
        return TmSubst(ForallTm(t), Pairing(self.r, a2, self._fext(t.con.slot)))

    apd = ap

    def ap_open(self, t):
        """ap (x. t) as a term over Gamma |> forall A."""
        return TmSubst(ForallTm(t), lift(self.r, whnf_ty(ForallT(t.con.slot))))

    def k(self, e, a, a2):
        """The span projection k_A a2 for a2 : forall A."""
        atom = qcube(cc.face(e, 0), self.gamma, a)
        return TmSubst(atom, Pairing(self.r, a2, self._fext(a)))

    def k_open(self, e, a):
        atom = qcube(cc.face(e, 0), self.gamma, a)
        return TmSubst(atom, lift(self.r, whnf_ty(ForallT(a))))

    def rr(self, a, t):
        """The degeneracy R_A t for t : A."""
        return TmSubst(qcube(cc.degen(0), self.gamma, a), pairing_one(t, a))

    def rr_open(self, a):
        return qcube(cc.degen(0), self.gamma, a)

    def sym(self, a, t22):
        """The symmetry S_A t22 for t22 : forall (forall A)."""
        atom = qcube(cc.sym(0), self.gamma, a)
        ffa = whnf_ty(ForallT(whnf_ty(ForallT(a))))
        ext = Ext(forall_con(forall_con(self.gamma)), ffa)
        return TmSubst(atom, Pairing(self.r2, t22, ext))

    def sym_open(self, a):
        atom = qcube(cc.sym(0), self.gamma, a)
        ffa = whnf_ty(ForallT(whnf_ty(ForallT(a))))
        return TmSubst(atom, lift(self.r2, ffa))

    def mkfapi(self, a2, t0, t1, t, pi, cfg=DEFAULT_CFG):
        """mk-forall-pi a2 t0 t1 t at a Pi family over Gamma |> A."""
        piw = whnf_ty(pi)
        a = piw.con.slot
        sigma = Pairing(self.r, a2, self._fext(a))
        return mk_mkforallpi(sigma, t0, t1, t, piw, cfg)

    def unspan(self, a0, a1, apex, t0, t1, cfg=DEFAULT_CFG):
        return mk_unspan(a0, a1, apex, t0, t1, cfg)


# --- cube morphisms as substitutions --------------------------------------------------


def interp_cube(f, gamma):
    """``<f>_Gamma : Sub (forall^I Gamma) (forall^J Gamma)`` for f : J -> I."""
    return cube_sub(f, gamma)


def interp_word(w, gamma):
    """The recursive interpretation over generator words: composition and
    suc structurally, the generators as iterated forall of the three
    transformations.  Evaluates to the same substitution as
    :func:`interp_cube` of the word's normal form."""
    match w:
        case cc.IdW(i=i):
            return whnf_sub(IdS(_forall_iter_con(gamma, i)))
        case cc.FaceW(e=e, i=i):
            return _forall_sub_iter_whnf(cube_sub(cc.face(e, 0), gamma), i)
        case cc.DegW(i=i):
            return _forall_sub_iter_whnf(cube_sub(cc.degen(0), gamma), i)
        case cc.SymW(i=i):
            return _forall_sub_iter_whnf(cube_sub(cc.sym(0), gamma), i)
        case cc.SucW(word=inner):
            return interp_word(inner, forall_con(gamma))
        case cc.Compose(left=left, right=right):
            return whnf_sub(
                CompS(interp_word(right, gamma), interp_word(left, gamma))
            )
    raise KernelError(f"bad word {w!r}")


def _forall_iter_con(gamma, n):
    for _ in range(n):
        gamma = forall_con(gamma)
    return gamma


def _forall_sub_iter_whnf(s, n):
    for _ in range(n):
        s = whnf_sub(ForallS(s))
    return s


# --- globalization --------------------------------------------------------------------


def q_as_sub(gamma, theta):
    """q : Sub (Gamma |> K Theta) Theta through strict democracy."""
    kt = KT(theta, gamma)
    return sub_of_tm(Q(gamma, kt), theta)


def globalize_con(gamma):
    """forall on contexts rebuilt from the local operators, mutually with
    the packaging isomorphism onto <> |> forall (K Gamma).

    Returns (forall' Gamma, iso, iso_inverse) where
    iso : Sub (forall' Gamma) (<> |> forall(K Gamma)).
    """
    loc = LocalOps(EMPTY)
    if gamma is EMPTY:
        fk = whnf_ty(loc.forall(KT(EMPTY, EMPTY)))  # reduces to Top
        target = Ext(EMPTY, fk)
        fwd = Pairing(IdS(EMPTY), TT(EMPTY), target)
        bwd = mk_eps(target)
        return EMPTY, fwd, bwd
    parent, a = gamma.parent, gamma.slot
    fprime, iso, _ = globalize_con(parent)
    # forall'(Gamma |> A) := forall' Gamma |> foralld (A[q]) [iso]
    a_q = TySubst(a, q_as_sub(EMPTY, parent))  # over <> |> K parent
    fam = loc.foralld_open(a_q)  # over <> |> forall(K parent)
    slot = whnf_ty(TySubst(fam, iso))
    new_con = Ext(fprime, slot)
    # iso: (id, (q[iso . p], q)) with the pair packaged at forall(K Gamma)
    fk_gamma = whnf_ty(loc.forall(KT(gamma, EMPTY)))
    if not isinstance(fk_gamma, Sigma):
        raise KernelError("globalize: forall K of an extension is not a Sigma")
    first = whnf_tm(
        TmSubst(mk_q(iso.cod), whnf_sub(CompS(iso, P(slot))))
    )
    pair = PairTm(first, mk_q(new_con), fk_gamma)
    fwd = Pairing(IdS(new_con), pair, Ext(EMPTY, fk_gamma))
    # inverse: (iso_inv . (eps, proj1 q), proj2 q)
    outer = Ext(EMPTY, fk_gamma)
    qv = mk_q(outer)
    prev_fk = whnf_ty(loc.forall(KT(parent, EMPTY)))
    _, _, prev_bwd = globalize_con(parent)
    inner = Pairing(IdS(outer), mk_proj1(qv), Ext(EMPTY, prev_fk))
    bwd = Pairing(whnf_sub(CompS(prev_bwd, inner)), mk_proj2(qv), new_con)
    return new_con, fwd, bwd


def globalize_ty(a, gamma):
    """forall' on types: foralld (A[q]) [iso]."""
    _, iso, _ = globalize_con(gamma)
    loc = LocalOps(EMPTY)
    a_q = TySubst(a, q_as_sub(EMPTY, gamma))
    return whnf_ty(TySubst(loc.foralld_open(a_q), iso))


def globalize_tm(t, gamma):
    """forall' on terms: apd (t[q]) [iso]."""
    _, iso, _ = globalize_con(gamma)
    loc = LocalOps(EMPTY)
    t_q = TmSubst(t, q_as_sub(EMPTY, gamma))
    return whnf_tm(TmSubst(loc.ap_open(t_q), iso))


def globalize_sub(sigma):
    """forall' on substitutions, by induction on the target telescope."""
    gamma = sigma.cod
    delta = sigma.dom
    fdelta, iso_d, _ = globalize_con(delta)
    if gamma is EMPTY:
        return whnf_sub(mk_eps(fdelta) if fdelta is not EMPTY else IdS(EMPTY))
    parent, a = gamma.parent, gamma.slot
    head = globalize_sub(whnf_sub(CompS(P(a), sigma)))
    t = TmSubst(Q(parent, a), sigma)
    loc = LocalOps(EMPTY)
    t_q = TmSubst(t, q_as_sub(EMPTY, delta))
    comp = whnf_tm(TmSubst(loc.ap_open(t_q), iso_d))
    fprime_g, _, _ = globalize_con(gamma)
    return Pairing(head, comp, fprime_g)


def globalize_face(e, gamma):
    """k'_Gamma := (k_{K Gamma}, seen as a substitution) [iso]."""
    _, iso, _ = globalize_con(gamma)
    loc = LocalOps(EMPTY)
    k_term = loc.k_open(e, KT(gamma, EMPTY))
    return sub_of_tm(whnf_tm(TmSubst(k_term, iso)), gamma)


def globalize_degen(gamma):
    """R'_Gamma := iso_inv . (id, R_{K Gamma} (id as a term))."""
    _, _, iso_inv = globalize_con(gamma)
    loc = LocalOps(EMPTY)
    kt = KT(gamma, EMPTY)
    r_term = loc.rr(kt, tm_of_sub(IdS(gamma)))
    pack = Pairing(IdS(gamma), r_term, Ext(EMPTY, whnf_ty(loc.forall(kt))))
    return whnf_sub(CompS(iso_inv, pack))


def globalize_sym(gamma):
    """S'_Gamma := the local symmetry at K Gamma, repackaged."""
    ffg = forall_con(forall_con(gamma))
    loc = LocalOps(EMPTY)
    s_term = loc.sym(KT(gamma, EMPTY), tm_of_sub(IdS(ffg)))
    return sub_of_tm(s_term, ffg)


def globalize_mkfapi(sigma, t0, t1, t, pi, cfg=DEFAULT_CFG):
    """mk-forall-pi' with its substitution argument repackaged through the
    strict-democracy isomorphism: q[iso . sigma] read back as a substitution."""
    gamma = whnf_ty(pi).con
    _, iso, _ = globalize_con(gamma)
    packed = whnf_tm(TmSubst(mk_q(iso.cod), whnf_sub(CompS(iso, sigma))))
    sigma_repacked = sub_of_tm(packed, forall_con(gamma), cfg)
    return mk_mkforallpi(sigma_repacked, t0, t1, t, pi, cfg)


# --- the external parametricity translation -------------------------------------------


class BJP:
    """The logical-relations translation on the U/El/Pi fragment.

    arity 2 gives binary relations (two fresh copies per variable plus a
    witness), arity 1 the unary predicate variant.  Anything outside
    contexts, substitution formers, variables, lambda, application, U, El
    and Pi is rejected with :class:`UnsupportedError`.
    """

    def __init__(self, arity=2):
        if arity not in (1, 2):
            raise UnsupportedError("translation arity must be 1 or 2")
        self.arity = arity

    # contexts ------------------------------------------------------------

    def ctx(self, gamma):
        """Gamma^P plus the projections onto Gamma (one per endpoint)."""
        if gamma is EMPTY:
            return EMPTY, [IdS(EMPTY)] * self.arity
        parent, a = gamma.parent, gamma.slot
        gp, projs = self.ctx(parent)
        cur = gp
        for k in range(self.arity):
            inst = whnf_ty(TySubst(a, self._weaken(projs[k], cur, gp)))
            cur = Ext(cur, inst)
        rel = self.ty(a, parent)  # over gp |> copies, which is cur
        out = Ext(cur, rel)
        new_projs = []
        block = 1 + self.arity
        for k in range(self.arity):
            drop = self._p_iter(out, block)
            xk = var(out, self.arity - k)
            new_projs.append(
                Pairing(whnf_sub(CompS(projs[k], drop)), xk, Ext(parent, a))
            )
        return out, new_projs

    # helpers ---------------------------------------------------------------

    def _p_iter(self, con, n):
        s = None
        c = con
        for _ in range(n):
            step = P(c.slot)
            s = step if s is None else CompS(step, s)
            c = c.parent
        return whnf_sub(s) if s is not None else IdS(con)

    def _depth(self, cur, home):
        n = 0
        c = cur
        while c is not home:
            if not isinstance(c, Ext):
                raise KernelError("context mismatch in translation")
            c = c.parent
            n += 1
        return n

    def _weaken(self, sub, cur, home):
        n = self._depth(cur, home)
        if n == 0:
            return whnf_sub(sub)
        return whnf_sub(CompS(sub, self._p_iter(cur, n)))

    def _weaken_tm(self, t, cur, home):
        n = self._depth(cur, home)
        if n == 0:
            return t
        return TmSubst(t, self._p_iter(cur, n))

    def _rel_ctx(self, a, gamma):
        """gp |> A[0] (|> A[1][p]): the context the relation lives over."""
        gp, projs = self.ctx(gamma)
        cur = gp
        for k in range(self.arity):
            inst = whnf_ty(TySubst(a, self._weaken(projs[k], cur, gp)))
            cur = Ext(cur, inst)
        return gp, projs, cur

    # types -----------------------------------------------------------------

    def ty(self, a, gamma):
        """A^P over Gamma^P |> A[0] (|> A[1][p])."""
        gp, projs, ctx0 = self._rel_ctx(a, gamma)
        aw = whnf_ty(a)
        match aw:
            case Univ():
                # El x0 => El x1 => U (unary: El x0 => U)
                cur = ctx0
                for k in range(self.arity):
                    code = var(cur, self._depth(cur, ctx0) + self.arity - 1 - k)
                    cur = Ext(cur, mk_el(code))
                body = Univ(cur)
                for _ in range(self.arity):
                    body = PiT(cur.slot, body)
                    cur = cur.parent
                return body
            case El(code=x):
                xp = self._weaken_tm(self.tm(x, gamma), ctx0, gp)
                out = xp
                for k in range(self.arity):
                    out = mk_dollar(out, var(ctx0, self.arity - 1 - k))
                return mk_el(out)
            case PiT(dom_ty=b, cod_ty=c):
                return self._pi_clause(b, c, gamma, gp, projs, ctx0)
            case _:
                raise UnsupportedError(
                    f"type former {aw.__class__.__name__} is outside the "
                    "translated fragment"
                )

    def _retarget(self, cur, drop, target, values):
        """Build (p^drop, values...) : Sub cur target."""
        res = self._p_iter(cur, drop)
        layers = []
        c = target
        for _ in range(len(values)):
            layers.append((c.parent, c.slot))
            c = c.parent
        layers.reverse()
        for (parent, slot), value in zip(layers, values):
            res = Pairing(res, value, Ext(parent, slot))
        return res

    def _pi_clause(self, b, c, gamma, gp, projs, ctx0):
        """(Pi(x:B).C)^P := Pi(x0 x1 x2). C^P[..., f0 $ x0, f1 $ x1]."""
        arity = self.arity
        cur = ctx0  # gp |> f-copies
        for k in range(arity):
            proj_w = self._weaken(projs[k], cur, gp)
            cur = Ext(cur, whnf_ty(TySubst(b, proj_w)))
        # cur = gp |> f-copies |> x-copies
        bp = self.ty(b, gamma)  # over gp |> B-copies
        xs = [var(cur, arity - 1 - k) for k in range(arity)]
        bp_inst = whnf_ty(TySubst(bp, self._retarget(cur, 2 * arity, bp.con, xs)))
        cur2 = Ext(cur, bp_inst)
        cp = self.ty(c, Ext(gamma, b))  # over (Gamma |> B)^P |> C-copies
        apps = [
            mk_dollar(var(cur2, 2 * arity - k), var(cur2, arity - k))
            for k in range(arity)
        ]
        vals = (
            [var(cur2, arity - k) for k in range(arity)]
            + [var(cur2, 0)]
            + apps
        )
        body = whnf_ty(
            TySubst(cp, self._retarget(cur2, 1 + 2 * arity, cp.con, vals))
        )
        c2 = cur2
        for _ in range(arity + 1):
            body = PiT(c2.slot, body)
            c2 = c2.parent
        return body

    # substitutions -----------------------------------------------------------

    def sub(self, sigma):
        """sigma^P : Sub Delta^P Gamma^P, pointwise on pairings."""
        sw = whnf_sub(sigma)
        dp, _ = self.ctx(sw.dom)
        match sw:
            case IdS():
                return IdS(dp)
            case _ if sw.cod is EMPTY:
                return whnf_sub(mk_eps(dp) if dp is not EMPTY else IdS(EMPTY))
            case P(slot=a):
                return self._p_iter(dp, 1 + self.arity)
            case Pairing(sub=s0, tm=t, ext=ext):
                head = self.sub(s0)
                gp, projs_d = self.ctx(sw.dom)
                res = head
                tgt, _ = self.ctx(ext)
                layers = []
                c = tgt
                for _ in range(1 + self.arity):
                    layers.append((c.parent, c.slot))
                    c = c.parent
                layers.reverse()
                fill = [
                    whnf_tm(TmSubst(t, projs_d[k])) for k in range(self.arity)
                ] + [self.tm(t, sw.dom)]
                for (tgt_parent, slot), value in zip(layers, fill):
                    res = Pairing(res, value, Ext(tgt_parent, slot))
                return res
            case CompS(after=f, before=g):
                return whnf_sub(CompS(self.sub(f), self.sub(g)))
            case _:
                raise UnsupportedError(
                    f"substitution former {sw.__class__.__name__} is outside "
                    "the fragment"
                )

    # terms ---------------------------------------------------------------------

    def tm(self, t, gamma):
        """t^P : Tm Gamma^P (A^P[t[0], t[1]]), the fundamental lemma."""
        gp, projs = self.ctx(gamma)
        tw = whnf_tm(t)
        idx = self._var_index(tw)
        if idx is not None:
            return var(gp, idx * (1 + self.arity))
        match tw:
            case Lam(body=body):
                inner = self.tm(body, body.con)
                out = inner
                for _ in range(1 + self.arity):
                    out = Lam(out)
                return out
            case TmSubst(body=App(fn=f), sub=Pairing(sub=IdS(), tm=u)):
                fp = self.tm(f, gamma)
                out = fp
                for k in range(self.arity):
                    out = mk_dollar(out, whnf_tm(TmSubst(u, projs[k])))
                return mk_dollar(out, self.tm(u, gamma))
            case TmSubst(body=b, sub=s):
                bp = self.tm(b, s.cod)
                return whnf_tm(TmSubst(bp, self.sub(s)))
            case _:
                raise UnsupportedError(
                    f"term former {tw.__class__.__name__} is outside the "
                    "fragment"
                )

    def _var_index(self, tw):
        match tw:
            case Q():
                return 0
            case TmSubst(body=Q(), sub=sub):
                steps = self._count_p(sub)
                return None if steps is None else steps
            case _:
                return None

    def _count_p(self, sub):
        s = whnf_sub(sub)
        n = 0
        while True:
            match s:
                case P():
                    return n + 1
                case CompS(after=P(), before=rest):
                    n += 1
                    s = whnf_sub(rest)
                case _:
                    return None
