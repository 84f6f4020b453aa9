"""Clifford algebra Cl(1,3) / Cl(4,0) acting on a four-dimensional complex spinor module.

Convention: ``gamma^a gamma^b + gamma^b gamma^a = -2 eta^{ab} Id``.  This is
the opposite sign from the common +2eta textbook choice, so the concrete
matrices below are ``i`` times the standard Dirac-basis (respectively
Euclidean) gamma matrices; every entry stays in {0, +-1, +-i}.

The Dirac adjoint is ``psibar = psi^dagger B`` with B = diag(1,1,-1,-1) for
(1,3) and B = Id for (4,0).  With these choices the rotation endomorphisms

    sigma^a_b = 1/4 [gamma^a, gamma^{b'}] eta_{b'b},
    sigma_i   = 1/2 rho_i^b_a sigma^a_b

are exactly anti-hermitian for the pairing, which is the one constraint the
theory imposes on the phase conventions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exterior import Form, dual_form
from .liealg import ROT_PAIRS, LieAlgebraSpec, UnsupportedSignature, build_euclidean_or_poincare
from .scalars import GaussianRational, conj

Mat = tuple[tuple, ...]

_I = GaussianRational(0, 1)


class BadAmbient(Exception):
    pass


def mat_mul(a: Mat, b: Mat) -> Mat:
    n = len(a)
    return tuple(
        tuple(sum((a[r][k] * b[k][c] for k in range(n)), start=0) for c in range(n))
        for r in range(n)
    )


def mat_add(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a: Mat, s) -> Mat:
    return tuple(tuple(x * s for x in row) for row in a)


def mat_sub(a: Mat, b: Mat) -> Mat:
    return mat_add(a, mat_scale(b, -1))


def commutator(a: Mat, b: Mat) -> Mat:
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def anticommutator(a: Mat, b: Mat) -> Mat:
    return mat_add(mat_mul(a, b), mat_mul(b, a))


def dagger(a: Mat) -> Mat:
    n = len(a)
    return tuple(tuple(conj(a[c][r]) for c in range(n)) for r in range(n))


def mat_eq(a: Mat, b: Mat) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def identity(n: int = 4) -> Mat:
    return tuple(tuple(1 if r == c else 0 for c in range(n)) for r in range(n))


ZERO4 = tuple(tuple(0 for _ in range(4)) for _ in range(4))

_PAULI = (
    ((0, 1), (1, 0)),
    ((0, GaussianRational(0, -1)), (GaussianRational(0, 1), 0)),
    ((1, 0), (0, -1)),
)


def _block(tl, tr, bl, br) -> Mat:
    rows = []
    for r in range(2):
        rows.append(tuple(tl[r]) + tuple(tr[r]))
    for r in range(2):
        rows.append(tuple(bl[r]) + tuple(br[r]))
    return tuple(rows)


def _times_i(m: Mat) -> Mat:
    return mat_scale(m, _I)


@dataclass(frozen=True)
class GammaSystem:
    """Gamma matrices, adjoint pairing and rotation endomorphisms for one signature."""

    signature: tuple[int, int]
    eta: Mat
    gamma: tuple[Mat, Mat, Mat, Mat]
    B: Mat
    sigma_ab: Mat  # sigma_ab[a][b] = sigma^a_b, a 4x4 table of 4x4 matrices
    sigma: tuple[Mat, ...]  # six rotation generators sigma_i

    def gamma_lower(self, a: int) -> Mat:
        """gamma_a = eta_ab gamma^b (diagonal eta)."""
        return mat_scale(self.gamma[a], self.eta[a][a])


def build_gamma(signature: tuple[int, int], spec: LieAlgebraSpec | None = None) -> GammaSystem:
    p, q = signature
    if spec is None:
        spec = build_euclidean_or_poincare(p, q)
    z2 = ((0, 0), (0, 0))
    i2 = ((1, 0), (0, 1))
    if signature == (1, 3):
        g0 = _times_i(_block(i2, z2, z2, mat_scale(i2, -1)))
        gk = tuple(
            _times_i(_block(z2, _PAULI[k], mat_scale(_PAULI[k], -1), z2)) for k in range(3)
        )
        gammas = (g0,) + gk
        B = _block(i2, z2, z2, mat_scale(i2, -1))
    elif signature == (4, 0):
        g0 = _times_i(_block(z2, i2, i2, z2))
        gk = tuple(
            _block(z2, _PAULI[k], mat_scale(_PAULI[k], -1), z2) for k in range(3)
        )
        gammas = (g0,) + gk
        B = identity(4)
    else:
        raise UnsupportedSignature(f"no spinor module for signature {signature}")

    eta = spec.eta
    quarter = Fraction(1, 4)
    # sigma^a_b = 1/4 [gamma^a, gamma^{b'}] eta_{b'b}; eta is diagonal
    sigma_ab = tuple(
        tuple(mat_scale(commutator(gammas[a], gammas[b]), quarter * eta[b][b]) for b in range(4))
        for a in range(4)
    )
    half = Fraction(1, 2)
    sigmas = []
    for k in range(6):
        acc = ZERO4
        for a in range(4):
            for b in range(4):
                r = spec.rho[k][b][a]
                if r != 0:
                    acc = mat_add(acc, mat_scale(sigma_ab[a][b], half * r))
        sigmas.append(acc)
    return GammaSystem(
        signature=signature, eta=eta, gamma=gammas, B=B, sigma_ab=sigma_ab, sigma=tuple(sigmas)
    )


def dirac_adjoint(sys: GammaSystem, psi) -> tuple:
    """The dual spinor psi^dagger B."""
    return tuple(
        sum((conj(psi[j]) * sys.B[j][k] for j in range(4)), start=0) for k in range(4)
    )


def pairing(sys: GammaSystem, psi1, psi2):
    """Hermitian pairing psibar_1 psi_2."""
    bar = dirac_adjoint(sys, psi1)
    return sum((bar[k] * psi2[k] for k in range(4)), start=0)


def gamma_dual(sys: GammaSystem, ambient: int) -> Form:
    """End(Sigma)-valued dual form: gamma^(3) for ambient 4, gamma^(9) for ambient 10."""
    if ambient not in (4, 10):
        raise BadAmbient(f"ambient dimension must be 4 or 10, got {ambient}")
    acc = Form(ambient - 1, None, "endo")
    for a in range(4):
        acc = acc + dual_form((a,), ambient).map_values(
            lambda s, g=sys.gamma[a]: mat_scale(g, s), module="endo"
        )
    return acc
