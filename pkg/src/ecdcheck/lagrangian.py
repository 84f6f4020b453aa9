"""Total Lagrangian, Euler-Lagrange residuals and first-variation formulas.

The Lagrangian 10-form evaluated here is

    L = 1/2 P^BC_A (d w^A + 1/2 [w ^ w]^A) ^ dual8_BC
        - m PsiBar Psi vol
        - 1/2 (PsiBar gamma9 ^ dw Psi  +  dw PsiBar ^ gamma9 Psi)
        + 1/2 (KBar^i dw Psi - dw PsiBar K^i) ^ dual9_i

with the curvature-pairing slots of P pinned to the kappa table and only the
remaining slots free.  The evaluator accepts an arbitrary invertible coframe
substitution w'^A = T^A_B w^B, which is what the finite-difference and
dual-number variation cross-checks perturb.

Note on reality: the spinor kinetic and mass terms form conjugate pairs, so
scenes without multiplier spinors K evaluate to a real Lagrangian; the K pair
enters with a relative minus sign and contributes an imaginary part when
KBar^i (dw Psi)_i has one.  The value is reported as computed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Mapping

from .clifford import mat_add, mat_mul, mat_scale
from .exterior import Form, dual_form, value_of, wedge
from .liealg import DIM, LieAlgebraSpec, coadjoint_action
from .scalars import Dual, Jet, conj, dual_part, is_exact, is_zero, to_complex
from .scene import CONSTANT, JetField, Scene, covariant_differential, curvature_torsion, \
    check_equivariance, differential, scene_field_form

VOL_KEY = tuple(range(DIM))
VOL10 = Form.monomial(VOL_KEY)

KappaTable = dict[tuple[int, int, int], Fraction]


@lru_cache(maxsize=None)
def d9(A: int) -> Form:
    return dual_form((A,), DIM)


@lru_cache(maxsize=None)
def d8(A: int, B: int) -> Form:
    if A == B:
        return Form(8)
    return dual_form((A, B), DIM)


@lru_cache(maxsize=None)
def d7(A: int, B: int, C: int) -> Form:
    if len({A, B, C}) != 3:
        return Form(7)
    return dual_form((A, B, C), DIM)


def build_kappa(spec: LieAlgebraSpec) -> KappaTable:
    """kappa_A^bc = 2 eta^bd rho_A^c_d; nonzero only on the rotation block."""
    table: KappaTable = {}
    for k in range(6):
        A = 4 + k
        for b in range(4):
            for c in range(4):
                v = 2 * spec.eta[b][b] * spec.rho[k][c][b]  # eta inverse = eta
                if v != 0:
                    table[(A, b, c)] = v
    return table


def full_P(scene: Scene) -> dict[tuple[int, int, int], Any]:
    """All multiplier components on canonical keys (A, B, C) with B < C.

    The translation-block slots carry the kappa table (the load-time
    constraint); the remaining slots come from the scene.
    """
    kappa = build_kappa(scene.spec)
    table: dict[tuple[int, int, int], Any] = dict(scene.P_free)
    for (A, b, c), v in kappa.items():
        if b < c:
            table[(A, b, c)] = v
    return table


# ---------------------------------------------------------------------------
# small constructors


def endo_form(mat) -> Form:
    return Form(0, {(): mat}, "endo")


def spinor_form(spinor) -> Form:
    return Form(0, {(): tuple(spinor)}, "spinor")


def cospinor_form(cospinor) -> Form:
    return Form(0, {(): tuple(cospinor)}, "cospinor")


def _bar(scene: Scene, spinor):
    B = scene.gamma.B
    return tuple(sum((conj(spinor[j]) * B[j][k] for j in range(4)), start=0) for k in range(4))


def _bar_value_tree(scene: Scene, value):
    # componentwise Dirac adjoint of a (possibly jet-valued) spinor tree
    B = scene.gamma.B
    return tuple(
        sum((conj(value[j]) * B[j][k] for j in range(4)), start=0) for k in range(4)
    )


def psi_forms(scene: Scene, psi: JetField | None = None):
    """(Psi, PsiBar) as 0-forms with jet coefficients."""
    fld = psi if psi is not None else scene.psi
    psi_f = scene_field_form(fld)
    val = fld.jet_value()
    bar_val = _bar_value_tree(scene, val)
    from .exterior import value_is_zero

    bar_f = Form(0, None, "cospinor") if value_is_zero(bar_val) else Form(0, {(): bar_val}, "cospinor")
    return psi_f, bar_f


def covariant_with(scene: Scene, form: Form, omega_forms) -> Form:
    """d^w with an explicit rotation-block connection (list of six 1-forms)."""
    out = differential(scene, form)
    if form.module == "scalar":
        return out
    from .scene import rotation_action_on_form

    for k in range(6):
        if omega_forms[k].is_zero():
            continue
        acted = rotation_action_on_form(scene, k, form)
        if not acted.is_zero():
            out = out + wedge(omega_forms[k], acted)
    return out


# ---------------------------------------------------------------------------
# the Lagrangian evaluator


def _values_matrix(T) -> list[list]:
    return [[value_of(T[r][c]) for c in range(DIM)] for r in range(DIM)]


def _inverse_and_det(M):
    """Gaussian elimination over any scalar field in the tower.

    Pivots are ranked by the plain numeric value; nilpotent perturbation
    slots never qualify as pivots.
    """

    def lift(x):
        return Fraction(x) if isinstance(x, int) else x

    n = len(M)
    a = [[lift(x) for x in row] for row in M]
    inv = [[Fraction(1) if r == c else Fraction(0) for c in range(n)] for r in range(n)]
    det = Fraction(1)
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(to_complex(a[r][col])))
        if to_complex(a[pivot][col]) == 0:
            raise ZeroDivisionError("coframe substitution is singular")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
            det = -det
        piv = a[col][col]
        det = det * piv
        for r in range(n):
            if r == col:
                continue
            f = a[r][col] / piv
            if is_zero(f):
                continue
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
            inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    for r in range(n):
        piv = a[r][r]
        inv[r] = [x / piv for x in inv[r]]
    return inv, det


def _identity_T():
    return [[1 if r == c else 0 for c in range(DIM)] for r in range(DIM)]


@dataclass
class CoframeData:
    """Perturbed coframe with its differentials, curvature and dual forms."""

    cof: list[Form]
    omega_full: list[Form]
    det: Any
    d9p: list[Form]
    d8p: dict[tuple[int, int], Form]
    vol: Form


def coframe_data(scene: Scene, T=None) -> CoframeData:
    if T is None:
        T = _identity_T()
    cof = []
    for A in range(DIM):
        coeffs = {(B,): T[A][B] for B in range(DIM) if not is_zero(T[A][B])}
        cof.append(Form(1, coeffs))
    spec = scene.spec
    omega_full = []
    for A in range(DIM):
        acc = differential(scene, cof[A])
        for (B, C), comps in spec.structure.items():
            for C2, c in comps:
                if C2 == A and c != 0:
                    acc = acc + wedge(cof[B], cof[C]).scale(c)
        omega_full.append(acc)
    Tval = _values_matrix(T)
    Tinv, det = _inverse_and_det(Tval)
    d9p = []
    for A in range(DIM):
        acc = Form(9)
        for B in range(DIM):
            f = Tinv[B][A]
            if not is_zero(f):
                acc = acc + d9(B).scale(f * det)
        d9p.append(acc)
    d8p = {}
    for A in range(DIM):
        for B in range(A + 1, DIM):
            acc = Form(8)
            for Ap in range(DIM):
                for Bp in range(Ap + 1, DIM):
                    f = Tinv[Ap][A] * Tinv[Bp][B] - Tinv[Bp][A] * Tinv[Ap][B]
                    if not is_zero(f):
                        acc = acc + d8(Ap, Bp).scale(f * det)
            d8p[(A, B)] = acc
    return CoframeData(
        cof=cof, omega_full=omega_full, det=det, d9p=d9p, d8p=d8p, vol=VOL10.scale(det)
    )


def _d8p(data: CoframeData, A: int, B: int) -> Form:
    if A == B:
        return Form(8)
    return data.d8p[(A, B)] if A < B else -data.d8p[(B, A)]


def lagrangian_form(scene: Scene, T=None, psi: JetField | None = None) -> Form:
    """The total Lagrangian 10-form, optionally under a coframe substitution."""
    data = coframe_data(scene, T)
    P = full_P(scene)
    total = Form(10)
    for (A, B, C), p in P.items():
        term = wedge(data.omega_full[A], _d8p(data, B, C))
        total = total + term.scale(p)

    if scene.gamma is not None:
        psi_f, bar_f = psi_forms(scene, psi)
        if not psi_f.is_zero() or any(any(not is_zero(c) for c in k) for k in scene.K):
            omega_rot = [data.cof[4 + k] for k in range(6)]
            dpsi = covariant_with(scene, psi_f, omega_rot)
            dbar = covariant_with(scene, bar_f, omega_rot)
            gamma9 = Form(9, None, "endo")
            for a in range(4):
                gamma9 = gamma9 + data.d9p[a].map_values(
                    lambda s, g=scene.gamma.gamma[a]: mat_scale(g, s), module="endo"
                )
            # mass term
            if not is_zero(scene.mass) and not psi_f.is_zero():
                dens = wedge(bar_f, psi_f)  # scalar 0-form PsiBar Psi
                total = total + wedge(dens, data.vol).scale(-scene.mass)
            # kinetic conjugate pair
            half = Fraction(1, 2)
            total = total - wedge(bar_f, wedge(gamma9, dpsi)).scale(half)
            total = total - wedge(dbar, wedge(gamma9, psi_f)).scale(half)
            # multiplier pair
            for i in range(6):
                K = scene.K[i]
                if all(is_zero(c) for c in K):
                    continue
                kbar_f = cospinor_form(_bar(scene, K))
                k_f = spinor_form(K)
                cur = wedge(kbar_f, dpsi) - wedge(dbar, k_f)
                total = total + wedge(cur, data.d9p[4 + i]).scale(half)
    return total


def eval_lagrangian(scene: Scene, T=None, psi: JetField | None = None):
    """Coefficient of the volume form in the total Lagrangian."""
    form = lagrangian_form(scene, T, psi)
    val = form.value_form().coeffs.get(VOL_KEY, 0)
    return val


# ---------------------------------------------------------------------------
# Euler-Lagrange residuals


@dataclass
class ResidualReport:
    """Residual forms and norms for one scene evaluation."""

    scene_name: str
    gfb_verdict: bool
    equivariance_verdict: bool
    lagrangian_value: Any
    res_psi: Form  # spinor-valued 10-form
    res_coframe: dict[int, Form]  # per free index D, scalar 9-forms
    omega_bc: dict
    S: dict

    def norm_psi(self) -> float:
        return self.res_psi.max_norm()

    def norms_coframe(self) -> dict[int, float]:
        return {D: f.max_norm() for D, f in self.res_coframe.items()}

    def exact_zero_psi(self) -> bool:
        return self.res_psi.is_zero() and self.res_psi.is_exact()

    def max_norm_coframe(self) -> float:
        return max(self.norms_coframe().values(), default=0.0)


def el_residuals(scene: Scene) -> ResidualReport:
    """Evaluate the four Euler-Lagrange residuals of the total Lagrangian.

    The coframe equation is assembled term by term as displayed, with the
    multiplier divergence using the rotation-block connection on the free
    index.  Residuals are pointwise forms.
    """
    omegas, gfb, omega_bc = curvature_torsion(scene)
    P = full_P(scene)
    spec = scene.spec

    if scene.gamma is not None:
        psi_f, bar_f = psi_forms(scene)
        dpsi = covariant_differential(scene, psi_f)
        dbar = covariant_differential(scene, bar_f)
        gamma9 = Form(9, None, "endo")
        for a in range(4):
            gamma9 = gamma9 + d9(a).map_values(
                lambda s, g=scene.gamma.gamma[a]: mat_scale(g, s), module="endo"
            )
        equiv, S = check_equivariance(scene, scene.psi)
    else:
        psi_f = bar_f = dpsi = dbar = gamma9 = None
        equiv, S = True, {}

    half = Fraction(1, 2)

    # spinor equation: -1/2 gamma9 ^ dw Psi + 1/2 dw(gamma9 Psi) - m Psi vol
    #                  + 1/2 dw(K^i dual9_i)
    if scene.gamma is not None:
        res_psi = wedge(gamma9, dpsi).scale(-half)
        res_psi = res_psi + covariant_differential(scene, wedge(gamma9, psi_f)).scale(half)
        if not is_zero(scene.mass):
            res_psi = res_psi + wedge(psi_f, VOL10).scale(-scene.mass)
        k_nine = Form(9, None, "spinor")
        for i in range(6):
            if any(not is_zero(c) for c in scene.K[i]):
                k_nine = k_nine + wedge(spinor_form(scene.K[i]), d9(4 + i))
        if not k_nine.is_zero():
            res_psi = res_psi + covariant_differential(scene, k_nine).scale(half)
        res_psi = res_psi.value_form()
    else:
        res_psi = Form(10, None, "spinor")

    # coframe equation, per free index D
    X = []
    for E in range(DIM):
        acc = Form(8)
        for (A, B, C), p in P.items():
            if A == E:
                acc = acc + d8(B, C).scale(p)
        X.append(acc)

    res_coframe: dict[int, Form] = {}
    for D in range(DIM):
        # multiplier divergence d^w(1/2 P^BC_D dual8_BC)
        acc = differential(scene, X[D])
        for k in range(6):
            for E, c in spec.bracket_components(4 + k, D):
                if c != 0 and not X[E].is_zero():
                    acc = acc - wedge(Form.generator(4 + k), X[E]).scale(c)
        # curvature pairing 1/2 P^BC_A Omega^A ^ dual7_BCD
        for (A, B, C), p in P.items():
            if D in (B, C) or omegas[A].is_zero():
                continue
            acc = acc + wedge(omegas[A], d7(B, C, D)).scale(p)
        if scene.gamma is not None:
            sig = scene.gamma.sigma
            gam = scene.gamma.gamma
            # rotation-index anticommutator and multiplier-spinor terms
            if D >= 4:
                j = D - 4
                anti = Form(9, None, "endo")
                for a in range(4):
                    m = mat_add(mat_mul(sig[j], gam[a]), mat_mul(gam[a], sig[j]))
                    anti = anti + d9(a).map_values(lambda s, mm=m: mat_scale(mm, s), module="endo")
                if not psi_f.is_zero():
                    acc = acc + wedge(bar_f, wedge(anti, psi_f)).scale(half)
                for i in range(6):
                    K = scene.K[i]
                    if all(is_zero(c) for c in K):
                        continue
                    kbar = _bar(scene, K)
                    spsi = _matvec_tree(sig[j], scene.psi.jet_value())
                    kb_spsi = sum((kbar[a] * spsi[a] for a in range(4)), start=0)
                    acc = acc + d9(4 + i).scale(half * kb_spsi)
                    bar_tree = _bar_value_tree(scene, scene.psi.jet_value())
                    bs = _vecmat_tree(bar_tree, sig[j])
                    bs_k = sum((bs[a] * K[a] for a in range(4)), start=0)
                    acc = acc - d9(4 + i).scale(half * bs_k)
            # mass term
            if not is_zero(scene.mass) and not psi_f.is_zero():
                dens = wedge(bar_f, psi_f)
                acc = acc + wedge(dens, d9(D)).scale(-scene.mass)
            # spinor currents
            if not psi_f.is_zero():
                for a in range(4):
                    if a == D:
                        continue
                    cur = wedge(bar_f, wedge(endo_form(gam[a]), dpsi))
                    if not cur.is_zero():
                        acc = acc - wedge(cur, d8(a, D)).scale(half)
                    cur2 = wedge(wedge(dbar, endo_form(gam[a])), psi_f)
                    if not cur2.is_zero():
                        acc = acc + wedge(cur2, d8(a, D)).scale(half)
            # multiplier currents
            for i in range(6):
                K = scene.K[i]
                if all(is_zero(c) for c in K) or 4 + i == D:
                    continue
                kbar_f = cospinor_form(_bar(scene, K))
                cur = wedge(kbar_f, dpsi)
                if not cur.is_zero():
                    acc = acc - wedge(cur, d8(4 + i, D)).scale(half)
                cur2 = wedge(dbar, spinor_form(K))
                if not cur2.is_zero():
                    acc = acc + wedge(cur2, d8(4 + i, D)).scale(half)
        res_coframe[D] = acc.value_form()

    return ResidualReport(
        scene_name=scene.name,
        gfb_verdict=gfb,
        equivariance_verdict=equiv,
        lagrangian_value=eval_lagrangian(scene),
        res_psi=res_psi,
        res_coframe=res_coframe,
        omega_bc=omega_bc,
        S=S,
    )


def _matvec_tree(mat, vec):
    return tuple(sum((mat[r][c] * vec[c] for c in range(4)), start=0) for r in range(4))


def _vecmat_tree(vec, mat):
    return tuple(sum((vec[r] * mat[r][c] for r in range(4)), start=0) for c in range(4))


# ---------------------------------------------------------------------------
# variations


def variation_dual_forms(scene: Scene, eps: Mapping[int, Form]):
    """First variations of vol, dual9_A and dual8_AB under a coframe variation.

    ``eps`` maps the algebra index A to the 1-form variation of w^A.  Returns
    (Dvol, Ddual9, Ddual8) with Ddual9[A] and Ddual8[(A, B)] for A < B.
    """
    dvol = Form(10)
    for A, e in eps.items():
        if not e.is_zero():
            dvol = dvol + wedge(e, d9(A))
    dd9 = {}
    for A in range(DIM):
        acc = Form(9)
        for C, e in eps.items():
            if C != A and not e.is_zero():
                acc = acc + wedge(e, d8(A, C))
        dd9[A] = acc
    dd8 = {}
    for A in range(DIM):
        for B in range(A + 1, DIM):
            acc = Form(8)
            for C, e in eps.items():
                if C not in (A, B) and not e.is_zero():
                    acc = acc + wedge(e, d7(A, B, C))
            dd8[(A, B)] = acc
    return dvol, dd9, dd8


def _dd8_at(dd8, A, B) -> Form:
    if A == B:
        return Form(8)
    return dd8[(A, B)] if A < B else -dd8[(B, A)]


def directional_variation(scene: Scene, eps: Mapping[int, Form], phi: JetField | None):
    """Exact first variation of the Lagrangian along (eps, phi).

    Assembled from the term-by-term variation of the total Lagrangian; the
    result is the volume coefficient of the variation 10-form (boundary
    contributions included, since d of the boundary forms is evaluated too).
    """
    eps = {A: e for A, e in eps.items() if not e.is_zero()}
    P = full_P(scene)
    spec = scene.spec
    _, dd9, dd8 = variation_dual_forms(scene, eps)
    omegas = []
    for A in range(DIM):
        acc = scene.d_coframe[A]
        for (B, C), comps in spec.structure.items():
            for C2, c in comps:
                if C2 == A and c != 0:
                    acc = acc + Form(2, {(B, C): c})
        omegas.append(acc)

    total = Form(10)
    # multiplier term: 1/2 P^BC_A [ (d eps + [eps ^ w])^A ^ dual8_BC
    #                               + Omega^A ^ D dual8_BC . eps ]
    d_eps = {}
    for A in range(DIM):
        e = eps.get(A)
        acc = differential(scene, e) if e is not None else Form(2)
        for (B, C), comps in spec.structure.items():
            eB, eC = eps.get(B), eps.get(C)
            for A2, c in comps:
                if A2 != A or c == 0:
                    continue
                if eB is not None:
                    acc = acc + wedge(eB, Form.generator(C)).scale(c)
                if eC is not None:
                    acc = acc - wedge(eC, Form.generator(B)).scale(c)
        d_eps[A] = acc
    for (A, B, C), p in P.items():
        acc = wedge(d_eps[A], d8(B, C))
        acc = acc + wedge(omegas[A], _dd8_at(dd8, B, C))
        total = total + acc.scale(p)

    if scene.gamma is not None:
        psi_f, bar_f = psi_forms(scene)
        if phi is not None:
            phi_f, phibar_f = psi_forms(scene, phi)
        else:
            phi_f, phibar_f = Form(0, None, "spinor"), Form(0, None, "cospinor")
        dpsi = covariant_differential(scene, psi_f)
        dbar = covariant_differential(scene, bar_f)
        dphi = covariant_differential(scene, phi_f)
        dphibar = covariant_differential(scene, phibar_f)
        sig = scene.gamma.sigma
        gam = scene.gamma.gamma
        # delta(dw Psi) = dw Phi + eps^i sigma_i Psi
        ddpsi = dphi
        ddbar = dphibar
        for k in range(6):
            e = eps.get(4 + k)
            if e is None:
                continue
            spsi = wedge(endo_form(sig[k]), psi_f)
            if not spsi.is_zero():
                ddpsi = ddpsi + wedge(e, spsi)
            bsig = wedge(bar_f, endo_form(sig[k]))
            if not bsig.is_zero():
                ddbar = ddbar - wedge(e, bsig)
        gamma9 = Form(9, None, "endo")
        dgamma9 = Form(9, None, "endo")
        for a in range(4):
            gamma9 = gamma9 + d9(a).map_values(
                lambda s, g=gam[a]: mat_scale(g, s), module="endo"
            )
            if not dd9[a].is_zero():
                dgamma9 = dgamma9 + dd9[a].map_values(
                    lambda s, g=gam[a]: mat_scale(g, s), module="endo"
                )
        half = Fraction(1, 2)
        # mass variation
        if not is_zero(scene.mass):
            dens = wedge(bar_f, psi_f)
            ddens = wedge(phibar_f, psi_f) + wedge(bar_f, phi_f)
            dvol = Form(10)
            for A, e in eps.items():
                dvol = dvol + wedge(e, d9(A))
            total = total + wedge(ddens, VOL10).scale(-scene.mass)
            total = total + wedge(dens, dvol).scale(-scene.mass)
        # kinetic variation
        total = total - wedge(phibar_f, wedge(gamma9, dpsi)).scale(half)
        total = total - wedge(bar_f, wedge(dgamma9, dpsi)).scale(half)
        total = total - wedge(bar_f, wedge(gamma9, ddpsi)).scale(half)
        total = total - wedge(ddbar, wedge(gamma9, psi_f)).scale(half)
        total = total - wedge(dbar, wedge(dgamma9, psi_f)).scale(half)
        total = total - wedge(dbar, wedge(gamma9, phi_f)).scale(half)
        # multiplier variation
        for i in range(6):
            K = scene.K[i]
            if all(is_zero(c) for c in K):
                continue
            kbar_f = cospinor_form(_bar(scene, K))
            k_f = spinor_form(K)
            dcur = wedge(kbar_f, ddpsi) - wedge(ddbar, k_f)
            total = total + wedge(dcur, d9(4 + i)).scale(half)
            cur = wedge(kbar_f, dpsi) - wedge(dbar, k_f)
            if not cur.is_zero() and not dd9[4 + i].is_zero():
                total = total + wedge(cur, dd9[4 + i]).scale(half)
    return total.value_form().coeffs.get(VOL_KEY, 0)


def variation_via_dual(scene: Scene, eps_components, phi: JetField | None):
    """Same first variation through nilpotent perturbation of the evaluator.

    ``eps_components`` maps (A, B) to the (possibly jet-valued) component
    eps^A_B of the variation 1-form.  Cross-validates the assembled formula.
    """
    T = _identity_T()
    for (A, B), comp in eps_components.items():
        if isinstance(comp, Jet):
            g = None if comp.grad is None else {d: Dual(0, v) for d, v in comp.grad.items()}
            T[A][B] = T[A][B] + Jet(Dual(0, comp.value), g)
        else:
            T[A][B] = T[A][B] + Dual(0, comp)
    psi = scene.psi
    if phi is not None:
        value = tuple(p + Dual(0, f) for p, f in zip(psi.value, phi.value))
        if psi.mode == CONSTANT and phi.mode == CONSTANT:
            grad, mode = {}, CONSTANT
        else:
            mode = "JET1"
            pg = psi.grad if psi.mode != CONSTANT else {}
            fg = phi.grad if phi.mode != CONSTANT else {}
            if pg is None or fg is None:
                grad = None
            else:
                z = (0, 0, 0, 0)
                grad = {
                    d: tuple(a + Dual(0, b) for a, b in zip(pg.get(d, z), fg.get(d, z)))
                    for d in set(pg) | set(fg)
                }
        psi = JetField(module="spinor", value=value, grad=grad, mode=mode)
    val = eval_lagrangian(scene, T=T, psi=psi)
    return dual_part(val)
