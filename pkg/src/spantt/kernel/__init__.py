"""Kernel for the global theory: term algebra, normalizer and conversion."""

from .core import (  # noqa: F401
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
    con_len,
    con_types,
    forall_con,
    forall_con_iter,
    forall_sub_iter,
    forall_tm_iter,
    forall_ty_iter,
    lift,
    pairing_one,
    unforall_con,
    unforall_sub,
    unforall_ty,
)
from .norm import (  # noqa: F401
    DEFAULT_FUEL,
    OutOfFuel,
    clear_caches,
    cube_sub,
    head_pi,
    head_sigma,
    qcube,
    whnf_sub,
    whnf_tm,
    whnf_ty,
)
from .api import (  # noqa: F401
    DEFAULT_CFG,
    NO,
    UNKNOWN,
    YES,
    NormCfg,
    ScopeError,
    Verdict,
    conv,
    conv_sub,
    conv_ty,
    dk,
    infer_ctx,
    infer_type,
    mk_app,
    mk_bool,
    mk_code,
    mk_comp,
    mk_cube_sub,
    mk_degen_sub,
    mk_dollar,
    mk_el,
    mk_eps,
    mk_eq,
    mk_ext,
    mk_face_sub,
    mk_face_tm,
    mk_false,
    mk_forall_con,
    mk_forall_sub,
    mk_forall_tm,
    mk_forall_ty,
    mk_id,
    mk_ite,
    mk_k,
    mk_lam,
    mk_mkforallpi,
    mk_p,
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
    sub_of_tm,
    tm_of_sub,
    validate,
    var,
    whnf,
)
