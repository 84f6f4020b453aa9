"""Reduction of the coframe Euler-Lagrange equations to base-manifold form.

Pipeline: restrict to scenes whose structure 2-form is horizontal and whose
spinor is equivariant, reduce modulo the ideal generated by the horizontal
coframe legs (the forms vanishing on rotation orbits), strip the rotation
volume factor, and assemble the three base field equations:

    torsion:   Theta^L ^ a1_JKL + 1/16 PsiBar {[gamma_J, gamma_K], gamma3} Psi = 0
    einstein:  1/2 kappa^cd_i Omega^i ^ a1_Jcd
               - 1/2 (PsiBar gamma^a dPsi - dPsiBar gamma^a Psi) ^ a2_aJ
               - m PsiBar Psi a3_J = 0
    dirac:     gamma3 ^ dPsi - 1/2 gamma^a Psi Theta^b ^ a2_ab + m Psi a4 = 0

with a_k the duals of the four-dimensional horizontal block and dPsi the
extracted horizontal derivative S_a alpha^a.  ``lift_compare`` verifies that
these agree exactly with the restricted ten-dimensional equation pairings.

Orbit integration is replaced, on CONSTANT scenes, by exact coefficient
extraction: an invariant top fiber form integrates to a positive multiple of
its coefficient, so the cancellation lemma's conclusion is coefficient
vanishing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

from .clifford import anticommutator, mat_mul, mat_scale, mat_sub
from .exterior import Form, MultiVector, dual_form, interior, wedge
from .lagrangian import VOL10, VOL_KEY, build_kappa, cospinor_form, d7, d8, d9, endo_form, \
    psi_forms, spinor_form
from .liealg import DIM
from .scalars import is_zero
from .scene import CONSTANT, JetField, ModeUnsupported, Scene, check_equivariance, \
    covariant_differential, curvature_torsion, differential, rotation_action_on_form

OMEGA6 = Form.monomial(range(4, DIM))
ALPHA4 = Form.monomial(range(4))


class NotGFB(Exception):
    pass


class NotEquivariant(Exception):
    pass


class NotDivisible(Exception):
    pass


class NotInvariant(Exception):
    pass


def base_dual(I) -> Form:
    return dual_form(tuple(I), 4)


def mod_alpha_reduce(form: Form) -> Form:
    """Projection modulo the ideal of forms vanishing on rotation orbits.

    Keeps exactly the multi-indices with no translation leg; an algebra
    homomorphism onto the rotation-leg subalgebra, and idempotent.
    """
    out = Form.__new__(Form)
    out.degree, out.module = form.degree, form.module
    out.coeffs = {idx: v for idx, v in form.coeffs.items() if all(k >= 4 for k in idx)}
    return out


def strip_volume_factors(form: Form, which: str) -> Form:
    """Exact division by the rotation volume ("omega6") or the horizontal
    volume ("alpha4"); both factors have even degree so no signs appear."""
    if which == "omega6":
        factor = tuple(range(4, DIM))
    elif which == "alpha4":
        factor = tuple(range(4))
    else:
        raise ValueError(f"unknown volume factor {which!r}")
    fs = set(factor)
    table = {}
    for idx, val in form.coeffs.items():
        if not fs.issubset(idx):
            raise NotDivisible(f"multi-index {idx} lacks the {which} legs")
        table[tuple(k for k in idx if k not in fs)] = val
    out = Form.__new__(Form)
    out.degree, out.module, out.coeffs = form.degree - len(factor), form.module, table
    return out


def vertical_lie_derivative(scene: Scene, form: Form, k: int) -> Form:
    """Lie derivative along the k-th rotation coframe dual, by the homotopy
    formula i_X d + d i_X."""
    X = MultiVector.basis((4 + k,))
    return interior(X, differential(scene, form)) + differential(scene, interior(X, form))


def invariance_defect(scene: Scene, form: Form, k: int) -> Form:
    """Orbit-restricted equivariance defect of a form under one generator."""
    lie = vertical_lie_derivative(scene, form, k)
    if form.module != "scalar":
        lie = lie + rotation_action_on_form(scene, k, form)
    return mod_alpha_reduce(lie.value_form())


@dataclass
class CancellationResult:
    invariant_ok: bool
    premise_ok: bool  # E = d P5 modulo the orbit ideal
    conclusion_ok: bool  # reduced part of E vanishes

    @property
    def passed(self) -> bool:
        return self.premise_ok and self.conclusion_ok


def cancellation_check(scene: Scene, E: Form, P5: Form) -> CancellationResult:
    """Operational form of the orbit-integration cancellation argument.

    For a CONSTANT scene, an invariant 6-form restricted to an orbit is a
    constant multiple of the fiber volume, so exactness modulo the orbit
    ideal forces the reduced coefficient of E to vanish.
    """
    if scene.mode != CONSTANT:
        raise ModeUnsupported("cancellation analysis needs invariant coefficients")
    for k in range(6):
        if not invariance_defect(scene, E, k).is_zero():
            raise NotInvariant(f"form is not invariant along generator {k}")
    premise = mod_alpha_reduce((E - differential(scene, P5)).value_form()).is_zero()
    conclusion = mod_alpha_reduce(E.value_form()).is_zero()
    return CancellationResult(invariant_ok=True, premise_ok=premise, conclusion_ok=conclusion)


# ---------------------------------------------------------------------------
# base residual assembly


@dataclass
class BaseResiduals:
    """Base-manifold field-equation residuals in the moving horizontal coframe."""

    torsion: dict[tuple[int, int], Form]  # per antisymmetric index pair, 3-forms
    torsion_rot: dict[int, Form]  # curvature-pairing contraction, per rotation index
    einstein: dict[int, Form]  # per horizontal index, 3-forms
    dirac: Form  # spinor-valued 4-form

    def norms(self) -> dict[str, float]:
        return {
            "torsion": max((f.max_norm() for f in self.torsion.values()), default=0.0),
            "einstein": max((f.max_norm() for f in self.einstein.values()), default=0.0),
            "dirac": self.dirac.max_norm(),
        }

    def exact_zero(self) -> dict[str, bool]:
        return {
            "torsion": all(f.is_zero() and f.is_exact() for f in self.torsion.values()),
            "einstein": all(f.is_zero() and f.is_exact() for f in self.einstein.values()),
            "dirac": self.dirac.is_zero() and self.dirac.is_exact(),
        }


def _require_base_inputs(scene: Scene):
    omegas, gfb, omega_bc = curvature_torsion(scene)
    if not gfb:
        raise NotGFB("structure 2-form has rotation legs; no base reduction")
    equiv, S = check_equivariance(scene, scene.psi)
    if not equiv:
        raise NotEquivariant("spinor field is not equivariant; no base reduction")
    return omegas, omega_bc, S


def base_ecd_residuals(scene: Scene) -> BaseResiduals:
    omegas, _, _S = _require_base_inputs(scene)
    kappa = build_kappa(scene.spec)
    gam = scene.gamma.gamma if scene.gamma else None
    sig = scene.gamma.sigma if scene.gamma else None

    psi0, bar0 = psi_forms(scene)
    psi0, bar0 = psi0.value_form(), bar0.value_form()
    has_psi = not psi0.is_zero()
    # horizontal derivative as 1-forms from the extracted coefficients
    dpsi = covariant_differential(scene, psi_forms(scene)[0]).value_form()
    dbar = covariant_differential(scene, psi_forms(scene)[1]).value_form()

    gamma3 = Form(3, None, "endo")
    if gam:
        for a in range(4):
            gamma3 = gamma3 + base_dual((a,)).map_values(
                lambda s, g=gam[a]: mat_scale(g, s), module="endo"
            )

    torsion: dict[tuple[int, int], Form] = {}
    for J in range(4):
        for K in range(J + 1, 4):
            acc = Form(3)
            for L in range(4):
                if L in (J, K) or omegas[L].is_zero():
                    continue
                acc = acc + wedge(omegas[L], base_dual((J, K, L)))
            if has_psi:
                comm = mat_sub(
                    mat_mul(scene.gamma.gamma_lower(J), scene.gamma.gamma_lower(K)),
                    mat_mul(scene.gamma.gamma_lower(K), scene.gamma.gamma_lower(J)),
                )
                anti = Form(3, None, "endo")
                for idx, m3 in gamma3.coeffs.items():
                    anti = anti + Form(3, {idx: anticommutator(comm, m3)}, "endo")
                acc = acc + wedge(bar0, wedge(anti, psi0)).scale(Fraction(1, 16))
            torsion[(J, K)] = acc.value_form()

    torsion_rot: dict[int, Form] = {}
    for i in range(6):
        acc = Form(3)
        for b in range(4):
            for c in range(b + 1, 4):
                kv = kappa.get((4 + i, b, c), 0)
                if kv == 0:
                    continue
                for d in range(4):
                    if d in (b, c) or omegas[d].is_zero():
                        continue
                    acc = acc + wedge(omegas[d], base_dual((b, c, d))).scale(kv)
        if has_psi:
            anti = Form(3, None, "endo")
            for idx, m3 in gamma3.coeffs.items():
                anti = anti + Form(3, {idx: anticommutator(sig[i], m3)}, "endo")
            acc = acc + wedge(bar0, wedge(anti, psi0)).scale(Fraction(1, 2))
        torsion_rot[i] = acc.value_form()

    einstein: dict[int, Form] = {}
    for J in range(4):
        acc = Form(3)
        for i in range(6):
            if omegas[4 + i].is_zero():
                continue
            for c in range(4):
                for d in range(c + 1, 4):
                    kv = kappa.get((4 + i, c, d), 0)
                    if kv == 0 or J in (c, d):
                        continue
                    acc = acc + wedge(omegas[4 + i], base_dual((J, c, d))).scale(kv)
        if has_psi:
            for a in range(4):
                if a == J:
                    continue
                cur = wedge(bar0, wedge(endo_form(gam[a]), dpsi))
                cur = cur - wedge(wedge(dbar, endo_form(gam[a])), psi0)
                if not cur.is_zero():
                    acc = acc - wedge(cur, base_dual((a, J))).scale(Fraction(1, 2))
            if not is_zero(scene.mass):
                dens = wedge(bar0, psi0)
                acc = acc + wedge(dens, base_dual((J,))).scale(-scene.mass)
        einstein[J] = acc.value_form()

    dirac = Form(4, None, "spinor")
    if has_psi:
        dirac = wedge(gamma3, dpsi)
        for a in range(4):
            gpsi = wedge(endo_form(gam[a]), psi0)
            for b in range(4):
                if b == a or omegas[b].is_zero():
                    continue
                tors = wedge(omegas[b], base_dual((a, b)))
                dirac = dirac - wedge(gpsi, tors).scale(Fraction(1, 2))
        if not is_zero(scene.mass):
            dirac = dirac + wedge(psi0, ALPHA4).scale(scene.mass)
        dirac = dirac.value_form()

    return BaseResiduals(torsion=torsion, torsion_rot=torsion_rot, einstein=einstein, dirac=dirac)


# ---------------------------------------------------------------------------
# lift / base coincidence


@dataclass
class LiftCompareResult:
    coframe_ok: bool
    spinor_ok: bool
    boundary_exact: bool
    coframe_defect_norm: float
    spinor_defect_norm: float

    @property
    def passed(self) -> bool:
        return self.coframe_ok and self.spinor_ok


def lift_compare(
    scene: Scene, eps: Mapping[tuple[int, int], Any], phi: JetField | None
) -> LiftCompareResult:
    """Restricted lifted field-equation pairings versus the base pairings.

    ``eps`` maps (A, e) to the component eps^A_e of a horizontal coframe
    variation eps^A = eps^A_e alpha^e.  Both sides are tensorial in the
    variation, so arbitrary components are admissible.
    """
    omegas, _, _ = _require_base_inputs(scene)
    kappa = build_kappa(scene.spec)
    gam = scene.gamma.gamma if scene.gamma else None
    sig = scene.gamma.sigma if scene.gamma else None
    base = base_ecd_residuals(scene)

    eps_form = {}
    for (A, e), v in eps.items():
        if e >= 4:
            raise ValueError("lift comparison needs horizontal variations")
        if not is_zero(v):
            eps_form[A] = eps_form.get(A, Form(1)) + Form(1, {(e,): v})

    psi0, bar0 = psi_forms(scene)
    psi0, bar0 = psi0.value_form(), bar0.value_form()
    has_psi = not psi0.is_zero()
    dpsi = covariant_differential(scene, psi_forms(scene)[0]).value_form()
    dbar = covariant_differential(scene, psi_forms(scene)[1]).value_form()

    # ten-dimensional restricted pairing
    lhs = Form(10)
    for i in range(6):
        ei = eps_form.get(4 + i)
        for b in range(4):
            for c in range(b + 1, 4):
                kv = kappa.get((4 + i, b, c), 0)
                if kv == 0:
                    continue
                for d in range(4):
                    if d in (b, c):
                        continue
                    if ei is not None and not omegas[d].is_zero():
                        lhs = lhs + wedge(ei, wedge(omegas[d], d7(b, c, d))).scale(kv)
                    ed = eps_form.get(d)
                    if ed is not None and not omegas[4 + i].is_zero():
                        lhs = lhs + wedge(ed, wedge(omegas[4 + i], d7(b, c, d))).scale(kv)
    if has_psi:
        gamma9 = Form(9, None, "endo")
        for a in range(4):
            gamma9 = gamma9 + d9(a).map_values(
                lambda s, g=gam[a]: mat_scale(g, s), module="endo"
            )
        for b in range(4):
            eb = eps_form.get(b)
            if eb is None:
                continue
            for a in range(4):
                if a == b:
                    continue
                cur = wedge(bar0, wedge(endo_form(gam[a]), dpsi))
                cur = cur - wedge(wedge(dbar, endo_form(gam[a])), psi0)
                if not cur.is_zero():
                    lhs = lhs - wedge(eb, wedge(cur, d8(a, b))).scale(Fraction(1, 2))
            if not is_zero(scene.mass):
                dens = wedge(bar0, psi0)
                lhs = lhs - wedge(eb, wedge(dens, d9(b))).scale(scene.mass)
        for i in range(6):
            ei = eps_form.get(4 + i)
            if ei is None:
                continue
            anti9 = Form(9, None, "endo")
            for idx, m9 in gamma9.coeffs.items():
                anti9 = anti9 + Form(9, {idx: anticommutator(sig[i], m9)}, "endo")
            lhs = lhs + wedge(ei, wedge(bar0, wedge(anti9, psi0))).scale(Fraction(1, 2))

    # base-side pairing lifted back with the fiber volume
    rhs = Form(10)
    for i in range(6):
        ei = eps_form.get(4 + i)
        if ei is not None and not base.torsion_rot[i].is_zero():
            rhs = rhs + wedge(ei, wedge(base.torsion_rot[i], OMEGA6))
    for d in range(4):
        ed = eps_form.get(d)
        if ed is not None and not base.einstein[d].is_zero():
            rhs = rhs + wedge(ed, wedge(base.einstein[d], OMEGA6))
    coframe_defect = (lhs - rhs).value_form()

    # spinor pairing
    spinor_defect = Form(10)
    if phi is not None:
        _, phibar = psi_forms(scene, phi)
        phibar = phibar.value_form()
        bracket = Form(10, None, "spinor")
        if has_psi:
            bracket = wedge(gamma9, dpsi).scale(Fraction(1, 2))
            g9psi = wedge(gamma9, psi0)
            bracket = bracket - covariant_differential(scene, g9psi).value_form().scale(
                Fraction(1, 2)
            )
            if not is_zero(scene.mass):
                bracket = bracket + wedge(psi0, VOL10).scale(scene.mass)
        lhs_psi = wedge(phibar, bracket)
        rhs_psi = wedge(phibar, wedge(base.dirac, OMEGA6))
        spinor_defect = (lhs_psi - rhs_psi).value_form()

    # exactness of the multiplier boundary term for this variation
    boundary = Form(9)
    for (A, B, C), p in scene.P_free.items():
        eA = eps_form.get(A)
        if eA is not None and not is_zero(p):
            boundary = boundary + wedge(eA, d8(B, C)).scale(p)
    dboundary = differential(scene, boundary).value_form()

    return LiftCompareResult(
        coframe_ok=coframe_defect.is_zero(),
        spinor_ok=spinor_defect.is_zero(),
        boundary_exact=dboundary.is_zero(),
        coframe_defect_norm=coframe_defect.max_norm(),
        spinor_defect_norm=spinor_defect.max_norm(),
    )
