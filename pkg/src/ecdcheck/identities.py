"""Structural identities of the dual-form calculus, checked on scenes.

Every check returns a :class:`CheckResult`; the exact ones hold in rational
arithmetic on any CONSTANT scene (a few need the horizontality verdict, as
noted).  The CLI identity suite and the acceptance tests drive these.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .clifford import mat_scale
from .exterior import Form, dual_form, wedge
from .lagrangian import d7, d8, d9
from .liealg import DIM
from .scalars import GaussianRational
from .scene import Scene, covariant_differential, curvature_torsion, differential, \
    rotation_action_on_form


@dataclass
class CheckResult:
    check_id: str
    anchor: str
    ok: bool
    norm: float
    exact: bool

    @staticmethod
    def from_form(check_id: str, anchor: str, residual: Form) -> "CheckResult":
        r = residual.value_form()
        return CheckResult(check_id, anchor, r.is_zero(), r.max_norm(), r.is_exact())


def _omega_full(scene: Scene) -> list[Form]:
    omegas, _, _ = curvature_torsion(scene)
    return omegas


def check_dual8_differential(scene: Scene) -> CheckResult:
    """d dual8_AB = Omega^C ^ dual7_ABC - c^C_AB dual9_C, for all A < B."""
    omegas = _omega_full(scene)
    spec = scene.spec
    worst = Form(9)
    ok = True
    exact = True
    norm = 0.0
    for A in range(DIM):
        for B in range(A + 1, DIM):
            lhs = differential(scene, d8(A, B))
            rhs = Form(9)
            for C in range(DIM):
                if C not in (A, B) and not omegas[C].is_zero():
                    rhs = rhs + wedge(omegas[C], d7(A, B, C))
            for C, c in spec.bracket_components(A, B):
                rhs = rhs - d9(C).scale(c)
            res = (lhs - rhs).value_form()
            ok = ok and res.is_zero()
            exact = exact and res.is_exact()
            norm = max(norm, res.max_norm())
    return CheckResult("dual8-differential", "eight-form structure identity", ok, norm, exact)


def check_dual8_translation(scene: Scene) -> CheckResult:
    """On the translation block the connection drops: omega . dual8_bc = 0 and
    d^w dual8_bc = Omega^D ^ dual7_bcD."""
    omegas = _omega_full(scene)
    ok, exact, norm = True, True, 0.0
    for b in range(4):
        for c in range(b + 1, 4):
            # the index action wedges a rotation leg into a form already
            # carrying the full rotation block; each term must vanish
            action = Form(9)
            for k in range(6):
                for d in range(4):
                    rd = scene.spec.rho[k][d][b]
                    if rd != 0:
                        action = action - wedge(Form.generator(4 + k), d8(d, c)).scale(rd)
                    rd2 = scene.spec.rho[k][d][c]
                    if rd2 != 0:
                        action = action - wedge(Form.generator(4 + k), d8(b, d)).scale(rd2)
            lhs = differential(scene, d8(b, c)) + action
            rhs = Form(9)
            for D in range(DIM):
                if D not in (b, c) and not omegas[D].is_zero():
                    rhs = rhs + wedge(omegas[D], d7(b, c, D))
            res = (lhs - rhs).value_form()
            ok = ok and action.is_zero() and res.is_zero()
            exact = exact and res.is_exact()
            norm = max(norm, res.max_norm(), action.max_norm())
    return CheckResult("dual8-translation-cov", "translation-block covariant identity", ok, norm, exact)


def base_dual(I: Iterable[int]) -> Form:
    """Dual forms of the four-dimensional horizontal block (alpha duals)."""
    return dual_form(tuple(I), 4)


def check_alpha3_covariant(scene: Scene) -> CheckResult:
    """d^w alpha3_a = Omega^b ^ alpha2_ab (covector action on the free index)."""
    omegas = _omega_full(scene)
    ok, exact, norm = True, True, 0.0
    for a in range(4):
        lhs = differential(scene, base_dual((a,)))
        for k in range(6):
            for b in range(4):
                r = scene.spec.rho[k][b][a]
                if r != 0:
                    lhs = lhs - wedge(Form.generator(4 + k), base_dual((b,))).scale(r)
        rhs = Form(4)
        for b in range(4):
            if b != a and not omegas[b].is_zero():
                rhs = rhs + wedge(omegas[b], base_dual((a, b)))
        res = (lhs - rhs).value_form()
        ok, exact = ok and res.is_zero(), exact and res.is_exact()
        norm = max(norm, res.max_norm())
    return CheckResult("alpha3-covariant", "soldering-block covariant identity", ok, norm, exact)


def _random_form(rng: random.Random, degree: int, module: str = "scalar", terms: int = 5) -> Form:
    from itertools import combinations

    pool = list(combinations(range(DIM), degree))
    coeffs = {}
    for idx in rng.sample(pool, min(terms, len(pool))):
        if module == "scalar":
            coeffs[idx] = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        else:
            coeffs[idx] = tuple(
                GaussianRational(
                    Fraction(rng.randint(-3, 3), rng.randint(1, 3)),
                    Fraction(rng.randint(-3, 3), rng.randint(1, 3)),
                )
                for _ in range(4)
            )
    return Form(degree, coeffs, module)


def check_graded_leibniz(scene: Scene, rng: random.Random, trials: int) -> CheckResult:
    """d^w(Psi ^ mu) = (d^w Psi) ^ mu + (-1)^k Psi ^ d mu on random pairs."""
    ok, exact, norm = True, True, 0.0
    for _ in range(trials):
        k = rng.randint(0, 4)
        m = rng.randint(0, 4)
        psi = _random_form(rng, k, "spinor", terms=3)
        mu = _random_form(rng, m, "scalar", terms=3)
        lhs = covariant_differential(scene, wedge(psi, mu))
        rhs = wedge(covariant_differential(scene, psi), mu)
        dmu = differential(scene, mu)
        rhs = rhs + (wedge(psi, dmu) if k % 2 == 0 else -wedge(psi, dmu))
        res = (lhs - rhs).value_form()
        ok, exact = ok and res.is_zero(), exact and res.is_exact()
        norm = max(norm, res.max_norm())
    return CheckResult("graded-leibniz", "covariant graded product rule", ok, norm, exact)


def check_contraction_compat(scene: Scene, rng: random.Random, trials: int) -> CheckResult:
    """d(psibar ^ Psi) = (d^w psibar) ^ Psi + (-1)^l psibar ^ (d^w Psi)."""
    ok, exact, norm = True, True, 0.0
    for _ in range(trials):
        l = rng.randint(0, 3)
        k = rng.randint(0, 3)
        bar = _random_form(rng, l, "cospinor", terms=3)
        psi = _random_form(rng, k, "spinor", terms=3)
        lhs = differential(scene, wedge(bar, psi))
        rhs = wedge(covariant_differential(scene, bar), psi)
        t2 = wedge(bar, covariant_differential(scene, psi))
        rhs = rhs + (t2 if l % 2 == 0 else -t2)
        res = (lhs - rhs).value_form()
        ok, exact = ok and res.is_zero(), exact and res.is_exact()
        norm = max(norm, res.max_norm())
    return CheckResult("contraction-compat", "invariant-contraction product rule", ok, norm, exact)


def check_d_alpha4(scene: Scene) -> CheckResult:
    """d alpha4 = 0 whenever the structure 2-form is horizontal."""
    res = differential(scene, base_dual(())).value_form()
    return CheckResult.from_form("d-alpha4", "horizontal volume closed", res)


def check_gamma3_covariant(scene: Scene) -> CheckResult:
    """d^w(gamma^a alpha3_a) = gamma^a Omega^b ^ alpha2_ab, and it is horizontal."""
    gam = scene.gamma.gamma
    omegas = _omega_full(scene)
    g3 = Form(3, None, "endo")
    for a in range(4):
        g3 = g3 + base_dual((a,)).map_values(lambda s, g=gam[a]: mat_scale(g, s), module="endo")
    lhs = covariant_differential(scene, g3)
    rhs = Form(4, None, "endo")
    for a in range(4):
        for b in range(4):
            if b != a and not omegas[b].is_zero():
                rhs = rhs + wedge(omegas[b], base_dual((a, b))).map_values(
                    lambda s, g=gam[a]: mat_scale(g, s), module="endo"
                )
    res = (lhs - rhs).value_form()
    ok = res.is_zero() and lhs.value_form().is_horizontal()
    return CheckResult("gamma3-covariant", "spin-current covariant identity", ok, res.max_norm(), res.is_exact())


def check_wedge_associative(rng: random.Random, trials: int) -> CheckResult:
    ok = True
    for _ in range(trials):
        a = _random_form(rng, rng.randint(0, 3), terms=3)
        b = _random_form(rng, rng.randint(0, 3), terms=3)
        c = _random_form(rng, rng.randint(0, 3), terms=3)
        if wedge(wedge(a, b), c) != wedge(a, wedge(b, c)):
            ok = False
    return CheckResult("wedge-associative", "exterior product associativity", ok, 0.0, True)


def check_interior_antiderivation(rng: random.Random, trials: int) -> CheckResult:
    """i_X(a^b) = (i_X a)^b + (-1)^deg(a) a^(i_X b) for degree-1 X."""
    from .exterior import MultiVector, interior

    ok = True
    for _ in range(trials):
        j = rng.randrange(DIM)
        X = MultiVector.basis((j,))
        a = _random_form(rng, rng.randint(1, 3), terms=3)
        b = _random_form(rng, rng.randint(1, 3), terms=3)
        lhs = interior(X, wedge(a, b))
        t2 = wedge(a, interior(X, b))
        rhs = wedge(interior(X, a), b) + (t2 if a.degree % 2 == 0 else -t2)
        if lhs != rhs:
            ok = False
    return CheckResult("interior-antiderivation", "contraction antiderivation law", ok, 0.0, True)


IdentitySuite = Callable[[Scene, random.Random, int], list[CheckResult]]


def identity_suite(scene: Scene, rng: random.Random, trials: int) -> list[CheckResult]:
    """All structural identities on one scene; the horizontality-dependent
    checks run only on scenes with a true frame-bundle verdict."""
    _, gfb, _ = curvature_torsion(scene)
    out = [
        check_dual8_differential(scene),
        check_dual8_translation(scene),
        check_alpha3_covariant(scene),
        check_graded_leibniz(scene, rng, trials),
        check_contraction_compat(scene, rng, trials),
        check_wedge_associative(rng, trials),
        check_interior_antiderivation(rng, trials),
    ]
    if gfb:
        out.append(check_d_alpha4(scene))
        if scene.gamma is not None:
            out.append(check_gamma3_covariant(scene))
    return out
