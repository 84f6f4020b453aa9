"""Rotation and Euclidean/Poincaré Lie algebras with exact structure data.

Basis order: translations t_0..t_3 first (indices 0..3), then the six
rotation generators r_(ab) for strictly increasing pairs (a,b) in
lexicographic order (indices 4..9).  The rotation generators act on the
translation block through

    (r_(ab))^c_d = eta_ad delta^c_b - eta_bd delta^c_a

which keeps every structure constant an exact rational and the curvature
pairing table integer-valued.

Signature conventions: (1,3) uses eta = diag(+1,-1,-1,-1); (4,0) the
identity; (0,4) minus the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

DIM = 10
ROT_PAIRS: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
SUPPORTED_SIGNATURES = {(1, 3), (4, 0), (0, 4)}


class UnsupportedSignature(Exception):
    pass


class DimensionMismatch(Exception):
    pass


class UnknownModule(Exception):
    pass


Matrix4 = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class LieAlgebraSpec:
    """Structure constants, invariant metric and vector representation.

    ``structure`` maps ordered basis pairs (A, B) with A < B to the nonzero
    bracket components ((C, c^C_AB), ...); the other order follows by
    antisymmetry.  Immutable after construction.
    """

    p: int
    q: int
    basis_labels: tuple[str, ...]
    structure: Mapping[tuple[int, int], tuple[tuple[int, Fraction], ...]]
    eta: Matrix4
    rho: tuple[Matrix4, ...]

    @property
    def dim(self) -> int:
        return DIM

    @property
    def signature(self) -> tuple[int, int]:
        return (self.p, self.q)

    def bracket_components(self, A: int, B: int) -> tuple[tuple[int, Fraction], ...]:
        """Nonzero (C, c^C_AB) for any ordered pair (A, B)."""
        if A == B:
            return ()
        if A < B:
            return self.structure.get((A, B), ())
        return tuple((C, -c) for C, c in self.structure.get((B, A), ()))

    def structure_constant(self, C: int, A: int, B: int) -> Fraction:
        for D, c in self.bracket_components(A, B):
            if D == C:
                return c
        return Fraction(0)


def _diag_eta(p: int, q: int) -> Matrix4:
    signs = [Fraction(1)] * p + [Fraction(-1)] * q
    return tuple(
        tuple(signs[a] if a == b else Fraction(0) for b in range(4)) for a in range(4)
    )


def _rotation_matrix(eta: Matrix4, a: int, b: int) -> Matrix4:
    return tuple(
        tuple(eta[a][d] * (1 if c == b else 0) - eta[b][d] * (1 if c == a else 0) for d in range(4))
        for c in range(4)
    )


def _mat_commutator(x: Matrix4, y: Matrix4) -> Matrix4:
    def mul(m, n):
        return tuple(
            tuple(sum(m[r][k] * n[k][c] for k in range(4)) for c in range(4)) for r in range(4)
        )

    xy, yx = mul(x, y), mul(y, x)
    return tuple(tuple(xy[r][c] - yx[r][c] for c in range(4)) for r in range(4))


def _expand_in_rotation_basis(eta: Matrix4, rho: Sequence[Matrix4], X: Matrix4):
    """Write a matrix in so(eta) as a combination of the r_(ab) basis."""
    coeffs = []
    for k, (a, b) in enumerate(ROT_PAIRS):
        # r_(ab) is the unique basis element with a nonzero (b, a) entry
        coeffs.append(X[b][a] / eta[a][a])
    # safety: the expansion must reproduce X exactly
    acc = [[Fraction(0)] * 4 for _ in range(4)]
    for k, c in enumerate(coeffs):
        for r in range(4):
            for s in range(4):
                acc[r][s] += c * rho[k][r][s]
    if any(acc[r][s] != X[r][s] for r in range(4) for s in range(4)):
        raise ValueError("matrix does not lie in the span of the rotation generators")
    return coeffs


def build_euclidean_or_poincare(p: int, q: int) -> LieAlgebraSpec:
    """Construct so(p,q) |x R^(p,q) for the supported four-dimensional signatures."""
    if (p, q) not in SUPPORTED_SIGNATURES:
        raise UnsupportedSignature(f"signature ({p},{q}) is not supported")
    eta = _diag_eta(p, q)
    rho = tuple(_rotation_matrix(eta, a, b) for a, b in ROT_PAIRS)
    structure: dict[tuple[int, int], tuple[tuple[int, Fraction], ...]] = {}

    def put(A: int, B: int, comps: Iterable[tuple[int, Fraction]]):
        comps = tuple((C, c) for C, c in comps if c != 0)
        if comps:
            structure[(A, B)] = comps

    # [t_a, t_b] = 0 (abelian ideal); [r_i, t_b] = rho_i^a_b t_a
    for k in range(6):
        i = 4 + k
        for b in range(4):
            put(b, i, tuple((a, -rho[k][a][b]) for a in range(4)))
    # [r_i, r_j] expanded through the faithful vector representation
    for k in range(6):
        for l in range(k + 1, 6):
            comm = _mat_commutator(rho[k], rho[l])
            coeffs = _expand_in_rotation_basis(eta, rho, comm)
            put(4 + k, 4 + l, tuple((4 + m, c) for m, c in enumerate(coeffs)))

    labels = tuple(f"t{a}" for a in range(4)) + tuple(f"r{a}{b}" for a, b in ROT_PAIRS)
    return LieAlgebraSpec(p=p, q=q, basis_labels=labels, structure=structure, eta=eta, rho=rho)


def bracket(spec: LieAlgebraSpec, X: Sequence, Y: Sequence) -> list:
    """Component bracket [X, Y]^C = c^C_AB X^A Y^B."""
    if len(X) != DIM or len(Y) != DIM:
        raise DimensionMismatch(f"algebra elements must have {DIM} components")
    out = [0] * DIM
    for (A, B), comps in spec.structure.items():
        coef = X[A] * Y[B] - X[B] * Y[A]
        if coef == 0:
            continue
        for C, c in comps:
            out[C] = out[C] + c * coef
    return out


def unimodularity_defect(spec: LieAlgebraSpec) -> list[Fraction]:
    """Per-index traces sum_B c^B_AB; all must vanish."""
    return [sum((spec.structure_constant(B, A, B) for B in range(DIM)), Fraction(0)) for A in range(DIM)]


def jacobi_defect(spec: LieAlgebraSpec, A: int, B: int, C: int) -> list:
    """Cyclic Jacobi sum on three basis elements; zero list when satisfied."""
    e = lambda k: [1 if j == k else 0 for j in range(DIM)]
    terms = [
        bracket(spec, e(A), bracket(spec, e(B), e(C))),
        bracket(spec, e(B), bracket(spec, e(C), e(A))),
        bracket(spec, e(C), bracket(spec, e(A), e(B))),
    ]
    return [sum(t[k] for t in terms) for k in range(DIM)]


# ---------------------------------------------------------------------------
# module actions of the rotation block

MODULE_DIMS = {
    "scalar": None,
    "vector": 4,
    "covector": 4,
    "bivector": 4,  # dense antisymmetric 4x4
    "spinor": 4,
    "cospinor": 4,
    "endo": 4,
    "adjoint": DIM,
    "coadjoint": DIM,
}


def module_zero(module: str):
    head, _, rest = module.partition("*")
    if head == "scalar":
        inner = 0
    elif head in ("vector", "covector", "spinor", "cospinor"):
        inner = (0,) * 4
    elif head in ("bivector", "endo"):
        inner = ((0,) * 4,) * 4
    elif head in ("adjoint", "coadjoint"):
        inner = (0,) * DIM
    else:
        raise UnknownModule(f"unknown module {head!r}")
    if not rest:
        return inner
    tail = module_zero(rest)
    if head == "scalar":
        return tail
    size = 4 if head not in ("adjoint", "coadjoint") else DIM
    del inner
    return tuple(tail for _ in range(size))


def coadjoint_action(spec: LieAlgebraSpec, xi: Sequence, value, module: str, gamma=None):
    """Action of the rotation part of ``xi`` on a registered module element.

    Tensor-product modules are written ``"a*b*..."`` and acted on by the
    Leibniz rule.  Spinor-type modules need the ``gamma`` system for the
    rotation endomorphisms.
    """
    if len(xi) != DIM:
        raise DimensionMismatch(f"algebra elements must have {DIM} components")
    head, _, rest = module.partition("*")
    if head not in MODULE_DIMS:
        raise UnknownModule(f"unknown module {head!r}")
    if rest:
        # derivation property: act on the head slot, then on the tail slots
        if head == "scalar":
            return coadjoint_action(spec, xi, value, rest, gamma)
        if head in ("bivector", "endo"):
            raise UnknownModule(f"{head!r} cannot prefix a tensor product")
        size = MODULE_DIMS[head]
        out = [module_zero(rest)] * size
        basis = [tuple(1 if j == k else 0 for j in range(size)) for k in range(size)]
        for k in range(size):
            coeffs = coadjoint_action(spec, xi, basis[k], head, gamma)
            for j in range(size):
                if coeffs[j] != 0:
                    out[j] = value_like_add(out[j], value_like_scale(value[k], coeffs[j]))
        for k in range(size):
            out[k] = value_like_add(out[k], coadjoint_action(spec, xi, value[k], rest, gamma))
        return tuple(out)

    if head == "scalar":
        return 0
    if head == "vector":
        return tuple(
            sum((xi[4 + k] * spec.rho[k][a][b] * value[b] for k in range(6) for b in range(4)), start=0)
            for a in range(4)
        )
    if head == "covector":
        return tuple(
            -sum((xi[4 + k] * spec.rho[k][b][a] * value[b] for k in range(6) for b in range(4)), start=0)
            for a in range(4)
        )
    if head == "bivector":
        out = [[0] * 4 for _ in range(4)]
        for k in range(6):
            x = xi[4 + k]
            if x == 0:
                continue
            r = spec.rho[k]
            for a in range(4):
                for b in range(4):
                    acc = sum(r[a][c] * value[c][b] + r[b][c] * value[a][c] for c in range(4))
                    out[a][b] += x * acc
        return tuple(tuple(row) for row in out)
    if head == "adjoint":
        xr = [0] * 4 + [xi[4 + k] for k in range(6)]
        return tuple(bracket(spec, xr, list(value)))
    if head == "coadjoint":
        out = [0] * DIM
        for k in range(6):
            x = xi[4 + k]
            if x == 0:
                continue
            for A in range(DIM):
                for B, c in spec.bracket_components(4 + k, A):
                    out[A] = out[A] - x * c * value[B]
        return tuple(out)
    if head in ("spinor", "cospinor", "endo"):
        if gamma is None:
            raise UnknownModule(f"module {head!r} needs a gamma system")
        sig = [gamma.sigma[k] for k in range(6)]
        if head == "spinor":
            out = [0] * 4
            for k in range(6):
                x = xi[4 + k]
                if x == 0:
                    continue
                for a in range(4):
                    out[a] = out[a] + x * sum(sig[k][a][b] * value[b] for b in range(4))
            return tuple(out)
        if head == "cospinor":
            out = [0] * 4
            for k in range(6):
                x = xi[4 + k]
                if x == 0:
                    continue
                for a in range(4):
                    out[a] = out[a] - x * sum(value[b] * sig[k][b][a] for b in range(4))
            return tuple(out)
        out = [[0] * 4 for _ in range(4)]
        for k in range(6):
            x = xi[4 + k]
            if x == 0:
                continue
            s = sig[k]
            for a in range(4):
                for b in range(4):
                    acc = sum(s[a][c] * value[c][b] - value[a][c] * s[c][b] for c in range(4))
                    out[a][b] += x * acc
        return tuple(tuple(row) for row in out)
    raise UnknownModule(f"unknown module {head!r}")


def value_like_add(u, v):
    if isinstance(u, tuple):
        return tuple(value_like_add(a, b) for a, b in zip(u, v))
    return u + v


def value_like_scale(u, s):
    if isinstance(u, tuple):
        return tuple(value_like_scale(a, s) for a in u)
    return u * s
