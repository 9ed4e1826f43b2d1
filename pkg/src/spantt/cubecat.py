"""The BCH cube category: objects are dimensions, morphisms are canonical
endpoint/variable assignments.

A morphism ``f : J -> I`` is stored as an assignment, indexed by the I
codomain dimensions, of either a domain dimension ``Var(j)`` (injectively)
or an endpoint ``End(e)``.  Under this representation the quotient by the
generator equations becomes plain structural equality, so the free
presentation (:class:`GenWord`) is kept only for the word problem and for
tests.

The direction convention: restriction of an I-cube along ``f : J -> I``
substitutes each of the I dimensions by a J-dimension or an endpoint.  It is
the convention under which ``compose(degen(i), face(e, i))`` is the
identity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial

DEFAULT_ARITY = 2


class CubeError(Exception):
    """Raised on malformed morphisms or ill-composed words."""


@dataclass(frozen=True)
class Var:
    j: int

    def __repr__(self):
        return f"v{self.j}"


@dataclass(frozen=True)
class End:
    e: int

    def __repr__(self):
        return f"e{self.e}"


@dataclass(frozen=True)
class CubeMor:
    """Canonical form of a morphism in the cube category.

    ``dom`` and ``cod`` are natural numbers; ``assign`` has length ``cod``
    and maps each codomain dimension to a domain dimension or endpoint.
    """

    dom: int
    cod: int
    assign: tuple
    arity: int = DEFAULT_ARITY

    def __post_init__(self):
        if self.dom < 0 or self.cod < 0:
            raise CubeError("negative dimension")
        if len(self.assign) != self.cod:
            raise CubeError(f"assignment length {len(self.assign)} != cod {self.cod}")
        seen = set()
        for a in self.assign:
            match a:
                case Var(j):
                    if not 0 <= j < self.dom:
                        raise CubeError(f"variable {j} out of range for dom {self.dom}")
                    if j in seen:
                        raise CubeError(f"variable {j} used twice")
                    seen.add(j)
                case End(e):
                    if not 0 <= e < self.arity:
                        raise CubeError(f"endpoint {e} out of range for arity {self.arity}")
                case _:
                    raise CubeError(f"bad assignment entry {a!r}")

    def __repr__(self):
        inner = ",".join(repr(a) for a in self.assign)
        return f"[{inner}]@{self.dom}->{self.cod}"

    @property
    def is_identity(self):
        return self.dom == self.cod and all(
            a == Var(i) for i, a in enumerate(self.assign)
        )


def identity(i, arity=DEFAULT_ARITY):
    return CubeMor(i, i, tuple(Var(k) for k in range(i)), arity)


def compose(f, g):
    """``f . g`` (g first): for f : J -> I and g : K -> J, gives K -> I."""
    if f.dom != g.cod:
        raise CubeError(f"cannot compose: dom {f.dom} != cod {g.cod}")
    if f.arity != g.arity:
        raise CubeError("arity mismatch")
    out = []
    for a in f.assign:
        match a:
            case Var(j):
                out.append(g.assign[j])
            case End(_):
                out.append(a)
    return CubeMor(g.dom, f.cod, tuple(out), f.arity)


def face(e, i, arity=DEFAULT_ARITY):
    """The face map ``k_I : I -> 1+I`` sending dimension 0 to endpoint e."""
    if not 0 <= e < arity:
        raise CubeError(f"endpoint {e} out of range for arity {arity}")
    return CubeMor(i, 1 + i, (End(e),) + tuple(Var(k) for k in range(i)), arity)


def degen(i, arity=DEFAULT_ARITY):
    """The degeneracy ``R_I : 1+I -> I``; domain dimension 0 is unused."""
    return CubeMor(1 + i, i, tuple(Var(1 + k) for k in range(i)), arity)


def sym(i, arity=DEFAULT_ARITY):
    """The symmetry ``S_I : 2+I -> 2+I`` swapping the first two dimensions."""
    return CubeMor(
        2 + i, 2 + i, (Var(1), Var(0)) + tuple(Var(2 + k) for k in range(i)), arity
    )


def suc(f):
    """Prepend a passthrough dimension: J -> I becomes 1+J -> 1+I."""
    shifted = tuple(Var(a.j + 1) if isinstance(a, Var) else a for a in f.assign)
    return CubeMor(f.dom + 1, f.cod + 1, (Var(0),) + shifted, f.arity)


def un_suc(f):
    """Inverse of :func:`suc` when it applies, else None."""
    if f.cod == 0 or f.dom == 0 or f.assign[0] != Var(0):
        return None
    out = []
    for a in f.assign[1:]:
        match a:
            case Var(0):
                return None
            case Var(j):
                out.append(Var(j - 1))
            case _:
                out.append(a)
    return CubeMor(f.dom - 1, f.cod - 1, tuple(out), f.arity)


def pad(f, n):
    """Append n passthrough dimensions at the end: J -> I becomes J+n -> I+n."""
    extra = tuple(Var(f.dom + k) for k in range(n))
    return CubeMor(f.dom + n, f.cod + n, f.assign + extra, f.arity)


def un_pad(f):
    """Inverse of ``pad(_, 1)`` when it applies, else None."""
    if f.cod == 0 or f.dom == 0 or f.assign[-1] != Var(f.dom - 1):
        return None
    if any(a == Var(f.dom - 1) for a in f.assign[:-1]):
        return None
    return CubeMor(f.dom - 1, f.cod - 1, f.assign[:-1], f.arity)


def gen_sym_left(i0, i1, arity=DEFAULT_ARITY):
    """``(sym_{I0,1}|id_{I1}) : I0+1+I1 -> 1+I0+I1``.

    Moves the distinguished dimension from position I0 of the domain to
    position 0 of the codomain.  Defined by the recursion
    ``(sym_{1+I0,1}|id) = S . suc (sym_{I0,1}|id)`` with identity base case.
    """
    if i0 == 0:
        return identity(1 + i1, arity)
    return compose(sym(i0 - 1 + i1, arity), suc(gen_sym_left(i0 - 1, i1, arity)))


def gen_sym_right(i0, i1, arity=DEFAULT_ARITY):
    """``(sym_{1,I0}|id_{I1}) : 1+I0+I1 -> I0+1+I1``, inverse of gen_sym_left."""
    if i0 == 0:
        return identity(1 + i1, arity)
    return compose(suc(gen_sym_right(i0 - 1, i1, arity)), sym(i0 - 1 + i1, arity))


# --- case analysis -----------------------------------------------------------


@dataclass(frozen=True)
class Inl:
    """The distinguished codomain dimension comes from a face map."""

    e: int
    rest: CubeMor  # J -> I0+I1


@dataclass(frozen=True)
class Inr:
    """The distinguished codomain dimension comes from domain dimension J0."""

    j0: int
    j1: int
    rest: CubeMor  # J0+J1 -> I0+I1


def _delete_cod(f, pos):
    return f.assign[:pos] + f.assign[pos + 1 :]


def _strip_dom_var(assign, m):
    out = []
    for a in assign:
        match a:
            case Var(j) if j > m:
                out.append(Var(j - 1))
            case _:
                out.append(a)
    return tuple(out)


def case_split(f, i0, i1):
    """Decompose ``f : J -> I0+1+I1`` by where codomain dimension I0 comes from.

    Returns Inl(e, f') with ``f = gen_sym_right(I0,I1) . face(e, I0+I1) . f'``
    or Inr(J0, J1, f') with
    ``f = gen_sym_right(I0,I1) . suc f' . gen_sym_left(J0,J1)``.
    """
    if f.cod != i0 + 1 + i1:
        raise CubeError(f"cod {f.cod} != {i0}+1+{i1}")
    rest_assign = _delete_cod(f, i0)
    match f.assign[i0]:
        case End(e):
            return Inl(e, CubeMor(f.dom, i0 + i1, rest_assign, f.arity))
        case Var(m):
            stripped = _strip_dom_var(rest_assign, m)
            return Inr(m, f.dom - m - 1, CubeMor(f.dom - 1, i0 + i1, stripped, f.arity))


def reconstruct(res, i0, i1, arity=DEFAULT_ARITY):
    """Rebuild the morphism a :func:`case_split` result factors."""
    right = gen_sym_right(i0, i1, arity)
    match res:
        case Inl(e, rest):
            return compose(compose(right, face(e, i0 + i1, arity)), rest)
        case Inr(j0, j1, rest):
            return compose(compose(right, suc(rest)), gen_sym_left(j0, j1, arity))
    raise CubeError(f"bad case result {res!r}")


# --- the free presentation ---------------------------------------------------


@dataclass(frozen=True)
class IdW:
    i: int


@dataclass(frozen=True)
class Compose:
    left: "GenWord"
    right: "GenWord"


@dataclass(frozen=True)
class SucW:
    word: "GenWord"


@dataclass(frozen=True)
class FaceW:
    e: int
    i: int


@dataclass(frozen=True)
class DegW:
    i: int


@dataclass(frozen=True)
class SymW:
    i: int


GenWord = IdW | Compose | SucW | FaceW | DegW | SymW


def eval_word(w, arity=DEFAULT_ARITY, _pos=()):
    """Map a free word onto its canonical normal form.

    Ill-composed words are rejected with the position (a path of 'l'/'r'
    choices through Compose nodes) of the offending composition.
    """
    match w:
        case IdW(i):
            return identity(i, arity)
        case FaceW(e, i):
            return face(e, i, arity)
        case DegW(i):
            return degen(i, arity)
        case SymW(i):
            return sym(i, arity)
        case SucW(inner):
            return suc(eval_word(inner, arity, _pos))
        case Compose(left, right):
            f = eval_word(left, arity, _pos + ("l",))
            g = eval_word(right, arity, _pos + ("r",))
            if f.dom != g.cod:
                raise CubeError(
                    f"ill-composed word at position {''.join(_pos) or 'root'}: "
                    f"dom {f.dom} != cod {g.cod}"
                )
            return compose(f, g)
    raise CubeError(f"bad word {w!r}")


# --- enumeration -------------------------------------------------------------


def _entries(j, arity):
    return [End(e) for e in range(arity)] + [Var(k) for k in range(j)]


def enumerate_homs(j, i, arity=DEFAULT_ARITY):
    """All morphisms J -> I in a deterministic (lexicographic) order.

    Endpoints sort before variables, matching the order of :func:`_entries`.
    """
    out = []
    for assign in itertools.product(_entries(j, arity), repeat=i):
        vars_used = [a.j for a in assign if isinstance(a, Var)]
        if len(vars_used) != len(set(vars_used)):
            continue
        out.append(CubeMor(j, i, assign, arity))
    return out


def hom_count(j, i, arity=DEFAULT_ARITY):
    """Closed form for ``|hom(J, I)|``: choose the variable positions, then an
    injection from them into J, then endpoints elsewhere."""
    total = 0
    for m in range(0, min(i, j) + 1):
        total += comb(i, m) * (factorial(j) // factorial(j - m)) * arity ** (i - m)
    return total


# --- text syntax (CLI) -------------------------------------------------------


def format_mor(f):
    return repr(f)


def parse_mor(text, arity=DEFAULT_ARITY):
    """Parse ``[e0,v2,e1]@J->I`` literals (the ``@J->I`` part is required)."""
    text = text.strip()
    if "@" not in text:
        raise CubeError(f"missing @J->I annotation in {text!r}")
    body, dims = text.rsplit("@", 1)
    body = body.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise CubeError(f"morphism literal must be bracketed: {text!r}")
    if "->" not in dims:
        raise CubeError(f"missing -> in dimension annotation {dims!r}")
    dom_s, cod_s = dims.split("->", 1)
    try:
        dom, cod = int(dom_s), int(cod_s)
    except ValueError as exc:
        raise CubeError(f"bad dimensions in {dims!r}") from exc
    inner = body[1:-1].strip()
    assign = []
    if inner:
        for piece in inner.split(","):
            piece = piece.strip()
            if len(piece) < 2 or piece[0] not in "ev":
                raise CubeError(f"bad assignment entry {piece!r}")
            try:
                n = int(piece[1:])
            except ValueError as exc:
                raise CubeError(f"bad assignment entry {piece!r}") from exc
            assign.append(End(n) if piece[0] == "e" else Var(n))
    return CubeMor(dom, cod, tuple(assign), arity)
