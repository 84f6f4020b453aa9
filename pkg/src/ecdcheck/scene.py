"""Coframed 10-manifold scenes and the differential calculus on them.

A scene fixes, at one abstract point: the signature, the structure functions
F^A_BC of the coframe (``d w^A = 1/2 F^A_BC w^B ^ w^C``), the spinor field,
the free multiplier slots, and the mass coupling.  Fields are first-order
jets: a value plus optional derivatives along the ten coframe directions.

CONSTANT scenes have invariant coefficients (all derivatives vanish), which
is the regime where every identity can be checked in exact arithmetic.  JET1
scenes carry explicit first derivatives; repeated differentiation then runs
out of data and raises :class:`MissingJet`.

Sign conventions: a Maurer-Cartan scene of the algebra with structure
constants c has F^A_BC = -c^A_BC.  The structure 2-form is

    Omega^A = d w^A + 1/2 [w ^ w]^A,

horizontal exactly when every stored multi-index has no rotation leg; its
translation block is the torsion, its rotation block the curvature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Sequence

from .clifford import GammaSystem, build_gamma
from .exterior import Form, merge_index, sort_index, value_add, value_is_zero, value_neg, value_scale
from .liealg import (
    DIM,
    LieAlgebraSpec,
    ROT_PAIRS,
    SUPPORTED_SIGNATURES,
    UnsupportedSignature,
    build_euclidean_or_poincare,
    coadjoint_action,
)
from .scalars import GaussianRational, Jet, MissingJet, is_zero

CONSTANT = "CONSTANT"
JET1 = "JET1"


class ModeUnsupported(Exception):
    pass


class SceneError(Exception):
    """Malformed scene data (bad file, constrained slots, inconsistent jets)."""


@dataclass(frozen=True)
class JetField:
    """Module-valued field value with first derivatives along the coframe.

    ``grad`` maps a coframe direction to a module element; ``None`` marks a
    JET1 field whose derivatives were not supplied.  CONSTANT fields must
    have an empty grad.
    """

    module: str
    value: Any
    grad: Mapping[int, Any] | None = field(default_factory=dict)
    mode: str = CONSTANT

    def __post_init__(self):
        if self.mode == CONSTANT and self.grad:
            raise SceneError("CONSTANT fields carry no derivative data")

    def jet_value(self):
        """Value tree with Jet leaves carrying the per-direction derivatives."""
        if self.mode == CONSTANT:
            return self.value
        if self.grad is None:
            return _tree_map(lambda leaf: Jet(leaf, None), self.value)
        grads = dict(self.grad)

        def build(leaf, path):
            g = {}
            for d, tree in grads.items():
                comp = _tree_at(tree, path)
                if not is_zero(comp):
                    g[d] = comp
            return Jet(leaf, g)

        return _tree_map_with_path(build, self.value)


def _tree_map(fn, tree):
    if isinstance(tree, tuple):
        return tuple(_tree_map(fn, t) for t in tree)
    return fn(tree)


def _tree_map_with_path(fn, tree, path=()):
    if isinstance(tree, tuple):
        return tuple(_tree_map_with_path(fn, t, path + (k,)) for k, t in enumerate(tree))
    return fn(tree, path)


def _tree_at(tree, path):
    for k in path:
        tree = tree[k]
    return tree


ZERO_SPINOR = (0, 0, 0, 0)


@dataclass(frozen=True)
class Scene:
    """Complete input to residual evaluation; immutable after load."""

    signature: tuple[int, int]
    mode: str
    F: Mapping[tuple[int, int, int], Any]  # canonical keys (A, B, C) with B < C
    psi: JetField
    P_free: Mapping[tuple[int, int, int], Any]  # canonical (A, B, C), B < C, not both < 4
    K: tuple[tuple, ...]  # six spinors K^i
    mass: Any
    name: str = ""

    def __post_init__(self):
        if self.signature not in SUPPORTED_SIGNATURES:
            raise UnsupportedSignature(f"signature {self.signature} is not supported")
        for (A, B, C) in self.F:
            if not (0 <= A < DIM and 0 <= B < C < DIM):
                raise SceneError(f"bad structure-function key {(A, B, C)}")
        for (A, B, C) in self.P_free:
            if not (0 <= A < DIM and 0 <= B < C < DIM):
                raise SceneError(f"bad multiplier key {(A, B, C)}")
            if B < 4 and C < 4:
                raise SceneError(
                    f"multiplier slot {(A, B, C)} is a constrained curvature-pairing slot"
                )
        if self.signature == (0, 4) and (
            any(not is_zero(c) for c in self.psi.value)
            or any(any(not is_zero(c) for c in k) for k in self.K)
        ):
            raise UnsupportedSignature("signature (0,4) has no spinor module")

    @cached_property
    def spec(self) -> LieAlgebraSpec:
        return build_euclidean_or_poincare(*self.signature)

    @cached_property
    def gamma(self) -> GammaSystem | None:
        if self.signature == (0, 4):
            return None
        return build_gamma(self.signature, self.spec)

    def F_at(self, A: int, B: int, C: int):
        """F^A_BC with antisymmetry in (B, C)."""
        if B == C:
            return 0
        if B < C:
            return self.F.get((A, B, C), 0)
        return -self.F.get((A, C, B), 0)

    @cached_property
    def d_coframe(self) -> tuple[Form, ...]:
        """d w^A as 2-forms: sum over B < C of F^A_BC w^B ^ w^C."""
        out = []
        for A in range(DIM):
            coeffs = {}
            for (A2, B, C), f in self.F.items():
                if A2 == A and not is_zero(f):
                    coeffs[(B, C)] = f
            out.append(Form(2, coeffs))
        return tuple(out)

    def psi_bar(self) -> JetField:
        """Dirac adjoint of the spinor field, as a cospinor jet field."""
        B = self.gamma.B

        def bar(spinor):
            from .scalars import conj

            return tuple(
                sum((conj(spinor[j]) * B[j][k] for j in range(4)), start=0) for k in range(4)
            )

        grad = None
        if self.psi.grad is not None:
            grad = {d: bar(v) for d, v in self.psi.grad.items()}
        return JetField(module="cospinor", value=bar(self.psi.value), grad=grad, mode=self.psi.mode)


def scene_field_form(field_: JetField) -> Form:
    """A jet field as a 0-form with jet-carrying coefficients."""
    v = field_.jet_value()
    if value_is_zero(v):
        return Form(0, None, field_.module)
    return Form(0, {(): v}, field_.module)


def _value_partial(value, direction: int):
    """Componentwise derivative of a coefficient tree along one direction.

    Derivatives of jets come back as unknown-gradient jets: their own
    derivatives are second-order data the scene does not carry, so a further
    differentiation must fail rather than silently treat them as constant.
    """
    if isinstance(value, tuple):
        return tuple(_value_partial(v, direction) for v in value)
    if isinstance(value, Jet):
        d = value.partial(direction)
        return Jet(d, None) if not is_zero(d) else 0
    return 0


def differential(scene: Scene, form: Form) -> Form:
    """Exterior differential using the scene's structure functions.

    d(c * w^I) = (d_A c) w^A ^ w^I + c * d(w^I), with d w^A expanded by the
    Leibniz rule.  Raises :class:`MissingJet` when a JET1 coefficient has no
    derivative data.
    """
    table: dict[tuple[int, ...], Any] = {}

    def put(idx, val):
        if value_is_zero(val):
            return
        if idx in table:
            s = value_add(table[idx], val)
            if value_is_zero(s):
                del table[idx]
            else:
                table[idx] = s
        else:
            table[idx] = val

    d_cof = scene.d_coframe
    for I, val in form.coeffs.items():
        # coefficient gradient
        for A in range(DIM):
            dv = _value_partial(val, A)
            if value_is_zero(dv):
                continue
            merged = merge_index((A,), I)
            if merged is None:
                continue
            key, sign = merged
            put(key, value_neg(dv) if sign < 0 else dv)
        # Leibniz over the legs; d w^{i_k} is a 2-form, so only the
        # antiderivation sign (-1)^k appears
        for k, leg in enumerate(I):
            rest = I[:k] + I[k + 1 :]
            for (B, C), f in d_cof[leg].coeffs.items():
                merged = merge_index((B, C), rest)
                if merged is None:
                    continue
                key, sign = merged
                if k % 2:
                    sign = -sign
                sval = value_scale(val, f)
                put(key, value_neg(sval) if sign < 0 else sval)
    out = Form.__new__(Form)
    out.degree, out.module, out.coeffs = form.degree + 1, form.module, table
    return out


def rotation_action_on_form(scene: Scene, k: int, form: Form) -> Form:
    """Pointwise action of the k-th rotation generator on the coefficients."""
    xi = [0] * DIM
    xi[4 + k] = 1
    return form.map_values(
        lambda v: coadjoint_action(scene.spec, xi, v, form.module, scene.gamma)
    )


def covariant_differential(scene: Scene, form: Form) -> Form:
    """d^w = d + omega-action in the coefficients' representation."""
    out = differential(scene, form)
    if form.module == "scalar":
        return out
    from .exterior import wedge

    for k in range(6):
        acted = rotation_action_on_form(scene, k, form)
        if not acted.is_zero():
            out = out + wedge(Form.generator(4 + k), acted)
    return out


def curvature_torsion(scene: Scene):
    """Structure 2-form Omega^A, the frame-bundle verdict, and its coefficients.

    Returns ``(Omega, gfb_verdict, Omega_bc)`` where Omega is a list of ten
    scalar 2-forms, the verdict is True when every Omega^A lies in the span
    of the horizontal 2-forms, and Omega_bc maps (A, b, c) with b < c to the
    coefficient in Omega^A = 1/2 Omega^A_bc alpha^b ^ alpha^c.
    """
    from .exterior import wedge

    omegas = []
    for A in range(DIM):
        acc = scene.d_coframe[A]
        half_bracket = {}
        for (B, C), comps in scene.spec.structure.items():
            for C2, c in comps:
                if C2 == A and c != 0:
                    half_bracket[(B, C)] = half_bracket.get((B, C), 0) + c
        if half_bracket:
            acc = acc + Form(2, half_bracket)
        omegas.append(acc.value_form())
    verdict = all(om.is_horizontal() for om in omegas)
    omega_bc = {}
    if verdict:
        for A in range(DIM):
            for (b, c), val in omegas[A].coeffs.items():
                omega_bc[(A, b, c)] = val
    return omegas, verdict, omega_bc


def induced_action_check(scene: Scene) -> bool:
    """Bracket criterion for the induced rotation-algebra action.

    The coframe-dual fields satisfy [e_A, e_B] = -F^C_AB e_C on CONSTANT
    scenes; the rotation fields generate an action matching the algebra
    bracket exactly when -F^C_{iB} = c^C_{iB} for every rotation i and
    basis direction B.
    """
    if scene.mode != CONSTANT:
        raise ModeUnsupported("the bracket comparison needs invariant structure functions")
    spec = scene.spec
    for i in range(4, DIM):
        for B in range(DIM):
            if i == B:
                continue
            for C in range(DIM):
                if -scene.F_at(C, i, B) != spec.structure_constant(C, i, B):
                    return False
    return True


def check_equivariance(scene: Scene, field_: JetField):
    """Horizontality of d^w(field): returns (verdict, S) with d^w Psi = S_a alpha^a.

    Both the verdict and the extracted coefficients are pointwise values.
    """
    dw = covariant_differential(scene, scene_field_form(field_)).value_form()
    verdict = dw.is_horizontal()
    S = {}
    for (a,), val in dw.coeffs.items():
        if a < 4:
            S[a] = val
    return verdict, S


# ---------------------------------------------------------------------------
# scene construction


def make_scene(
    signature,
    F: Mapping[tuple[int, int, int], Any],
    mode: str = CONSTANT,
    psi=None,
    psi_grad=None,
    P_free=None,
    K=None,
    mass=0,
    name: str = "",
) -> Scene:
    Fc: dict[tuple[int, int, int], Any] = {}
    for (A, B, C), v in F.items():
        if B == C:
            if not is_zero(v):
                raise SceneError(f"structure function F^{A}_{B}{C} must vanish")
            continue
        key, sgn = ((A, B, C), 1) if B < C else ((A, C, B), -1)
        v = v if sgn > 0 else -v
        if key in Fc and Fc[key] != v:
            raise SceneError(f"conflicting structure-function entries at {key}")
        if not is_zero(v):
            Fc[key] = v
    psi_field = JetField(
        module="spinor",
        value=tuple(psi) if psi is not None else ZERO_SPINOR,
        grad=psi_grad if mode == JET1 else {},
        mode=mode,
    )
    return Scene(
        signature=tuple(signature),
        mode=mode,
        F=Fc,
        psi=psi_field,
        P_free=dict(P_free or {}),
        K=tuple(tuple(k) for k in (K or [ZERO_SPINOR] * 6)),
        mass=mass,
        name=name,
    )


def maurer_cartan_scene(p: int, q: int, name: str = "") -> Scene:
    """Flat model: F^A_BC = -c^A_BC."""
    spec = build_euclidean_or_poincare(p, q)
    F = {}
    for (A, B), comps in spec.structure.items():
        for C, c in comps:
            F[(C, A, B)] = F.get((C, A, B), 0) - c
    return make_scene((p, q), F, name=name or f"flat-{p}{q}")


def split_orthogonal_scene(p: int, q: int, extra_sign: int, name: str = "") -> Scene:
    """Homogeneous curved model from a five-dimensional orthogonal algebra.

    Splits so(eta5), eta5 = diag(eta, extra_sign), into the four-dimensional
    rotation block plus the four generators mixing with the extra direction,
    which play the translation role.  The scene is the Maurer-Cartan scene of
    that algebra expressed in the split basis: torsion-free with constant
    curvature.
    """
    signs = [Fraction(1)] * p + [Fraction(-1)] * q + [Fraction(extra_sign)]
    eta5 = [[signs[a] if a == b else Fraction(0) for b in range(5)] for a in range(5)]

    def gen(a, b):
        return tuple(
            tuple(eta5[a][d] * (1 if c == b else 0) - eta5[b][d] * (1 if c == a else 0) for d in range(5))
            for c in range(5)
        )

    basis = [gen(a, 4) for a in range(4)] + [gen(a, b) for a, b in ROT_PAIRS]

    def mul(x, y):
        return tuple(
            tuple(sum(x[r][k] * y[k][c] for k in range(5)) for c in range(5)) for r in range(5)
        )

    def expand(X):
        # translations from column 4, rotations from the upper-left block
        trans = [X[c][4] / (-eta5[4][4]) for c in range(4)]
        rot = [X[b][a] / eta5[a][a] for a, b in ROT_PAIRS]
        coeffs = trans + rot
        acc = [[Fraction(0)] * 5 for _ in range(5)]
        for k, cf in enumerate(coeffs):
            for r in range(5):
                for s in range(5):
                    acc[r][s] += cf * basis[k][r][s]
        if any(acc[r][s] != X[r][s] for r in range(5) for s in range(5)):
            raise SceneError("five-dimensional commutator left the split basis span")
        return coeffs

    F = {}
    for A in range(DIM):
        for B in range(A + 1, DIM):
            x, y = basis[A], basis[B]
            comm = tuple(
                tuple(mul(x, y)[r][c] - mul(y, x)[r][c] for c in range(5)) for r in range(5)
            )
            for C, cf in enumerate(expand(comm)):
                if cf != 0:
                    F[(C, A, B)] = -cf
    return make_scene((p, q), F, name=name or f"split-{p}{q}{'+' if extra_sign > 0 else '-'}")


def with_matter(
    scene: Scene,
    psi=None,
    psi_grad=None,
    K=None,
    mass=None,
    mode: str | None = None,
    name: str | None = None,
) -> Scene:
    """Copy of a scene with spinor data, multipliers or mass replaced."""
    new_mode = mode if mode is not None else (JET1 if psi_grad is not None else scene.mode)
    return make_scene(
        scene.signature,
        dict(scene.F),
        mode=new_mode,
        psi=psi if psi is not None else scene.psi.value,
        psi_grad=psi_grad,
        P_free=dict(scene.P_free),
        K=K if K is not None else scene.K,
        mass=mass if mass is not None else scene.mass,
        name=name if name is not None else scene.name,
    )


# ---------------------------------------------------------------------------
# scene files


def _parse_number(tok: str):
    tok = tok.strip()
    if "." in tok or "e" in tok.lower():
        return float(tok)
    return Fraction(tok) if "/" in tok else int(tok)


def _parse_complex_pair(re_tok: str, im_tok: str):
    re_v, im_v = _parse_number(re_tok), _parse_number(im_tok)
    if isinstance(re_v, float) or isinstance(im_v, float):
        return complex(re_v) + 1j * complex(im_v)
    if im_v == 0:
        return re_v
    return GaussianRational(re_v, im_v)


def _parse_spinor(tokens):
    if len(tokens) != 8:
        raise SceneError(f"spinor needs 8 real components, got {len(tokens)}")
    return tuple(_parse_complex_pair(tokens[2 * k], tokens[2 * k + 1]) for k in range(4))


def load_scene(path) -> Scene:
    """Parse the key/value scene file format (see README for the layout)."""
    sections: dict[str, list[list[str]]] = {}
    current = None
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise SceneError(f"cannot read scene file {path}: {exc}") from exc
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current in sections:
                raise SceneError(f"duplicate section [{current}]")
            sections[current] = []
            continue
        if current is None:
            raise SceneError(f"content outside any section: {line!r}")
        sections[current].append(line.split("=", 1)[-1].split() if "=" in line else line.split())

    known = {"signature", "mode", "F", "Psi", "Psi.grad", "P", "K", "mass"}
    unknown = set(sections) - known
    if unknown:
        raise SceneError(f"unknown sections: {sorted(unknown)}")

    def single(name, default=None):
        rows = sections.get(name)
        if not rows:
            if default is not None:
                return default
            raise SceneError(f"missing [{name}] section")
        if len(rows) != 1:
            raise SceneError(f"[{name}] must hold a single entry")
        return rows[0]

    sig_tokens = [t.strip("[],") for t in single("signature")]
    sig_tokens = [t for t in sig_tokens if t]
    if len(sig_tokens) != 2:
        raise SceneError("signature must be of the form [p, q]")
    signature = (int(sig_tokens[0]), int(sig_tokens[1]))

    mode = single("mode", ["CONSTANT"])[0]
    if mode not in (CONSTANT, JET1):
        raise SceneError(f"unknown mode {mode!r}")

    F = {}
    for row in sections.get("F", []):
        if len(row) != 4:
            raise SceneError(f"[F] rows are 'A B C value', got {row}")
        A, B, C = int(row[0]), int(row[1]), int(row[2])
        F[(A, B, C)] = F.get((A, B, C), 0) + _parse_number(row[3])

    psi = ZERO_SPINOR
    if "Psi" in sections:
        psi = _parse_spinor(single("Psi"))

    psi_grad = None
    if "Psi.grad" in sections:
        if mode != JET1:
            raise SceneError("[Psi.grad] requires JET1 mode")
        psi_grad = {}
        for row in sections["Psi.grad"]:
            if len(row) != 9:
                raise SceneError("[Psi.grad] rows are 'A' plus 8 real components")
            d = int(row[0])
            if not 0 <= d < DIM:
                raise SceneError(f"bad derivative direction {d}")
            if d in psi_grad:
                raise SceneError(f"duplicate derivative direction {d}")
            psi_grad[d] = _parse_spinor(row[1:])

    P_free = {}
    for row in sections.get("P", []):
        if len(row) != 4:
            raise SceneError(f"[P] rows are 'A B C value', got {row}")
        A, B, C = int(row[0]), int(row[1]), int(row[2])
        if B == C:
            raise SceneError(f"degenerate multiplier slot {(A, B, C)}")
        key, sgn = ((A, B, C), 1) if B < C else ((A, C, B), -1)
        v = _parse_number(row[3])
        P_free[key] = P_free.get(key, 0) + (v if sgn > 0 else -v)

    K = [list(ZERO_SPINOR) for _ in range(6)]
    for row in sections.get("K", []):
        if len(row) != 4:
            raise SceneError(f"[K] rows are 'i alpha re im', got {row}")
        i, alpha = int(row[0]), int(row[1])
        if not (0 <= i < 6 and 0 <= alpha < 4):
            raise SceneError(f"bad K slot ({i}, {alpha})")
        K[i][alpha] = _parse_complex_pair(row[2], row[3])

    mass = _parse_number(single("mass", ["0"])[0])

    import os

    name = os.path.splitext(os.path.basename(str(path)))[0]
    try:
        return make_scene(
            signature,
            F,
            mode=mode,
            psi=psi,
            psi_grad=psi_grad,
            P_free=P_free,
            K=[tuple(k) for k in K],
            mass=mass,
            name=name,
        )
    except (SceneError, UnsupportedSignature):
        raise
    except Exception as exc:  # malformed numeric data and similar
        raise SceneError(f"invalid scene data in {path}: {exc}") from exc


def _fmt_number(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _fmt_complex(z) -> tuple[str, str]:
    if isinstance(z, GaussianRational):
        return str(z.re), str(z.im)
    if isinstance(z, complex):
        return repr(z.real), repr(z.imag)
    return _fmt_number(z), "0"


def save_scene(scene: Scene, path) -> None:
    """Write a scene in the text format read back by :func:`load_scene`."""
    lines = ["[signature]", f"signature = [{scene.signature[0]}, {scene.signature[1]}]", ""]
    lines += ["[mode]", f"mode = {scene.mode}", ""]
    lines.append("[F]")
    for (A, B, C) in sorted(scene.F):
        lines.append(f"{A} {B} {C} {_fmt_number(scene.F[(A, B, C)])}")
    lines.append("")
    if any(not is_zero(c) for c in scene.psi.value):
        lines.append("[Psi]")
        comps = []
        for c in scene.psi.value:
            comps.extend(_fmt_complex(c))
        lines.append("psi = " + " ".join(comps))
        lines.append("")
    if scene.psi.grad:
        lines.append("[Psi.grad]")
        for d in sorted(scene.psi.grad):
            comps = []
            for c in scene.psi.grad[d]:
                comps.extend(_fmt_complex(c))
            lines.append(f"{d} " + " ".join(comps))
        lines.append("")
    if scene.P_free:
        lines.append("[P]")
        for (A, B, C) in sorted(scene.P_free):
            lines.append(f"{A} {B} {C} {_fmt_number(scene.P_free[(A, B, C)])}")
        lines.append("")
    k_rows = []
    for i, spinor in enumerate(scene.K):
        for alpha, z in enumerate(spinor):
            if not is_zero(z):
                re_s, im_s = _fmt_complex(z)
                k_rows.append(f"{i} {alpha} {re_s} {im_s}")
    if k_rows:
        lines.append("[K]")
        lines.extend(k_rows)
        lines.append("")
    lines += ["[mass]", f"mass = {_fmt_number(scene.mass)}", ""]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
