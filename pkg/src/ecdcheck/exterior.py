"""Graded exterior algebra over the ten coframe generators.

A :class:`Form` stores a sparse map from strictly increasing index tuples to
coefficients in a named value module.  Coefficients may be any scalar from
:mod:`ecdcheck.scalars`, or tuples of scalars for vector-like modules; the
wedge product combines value modules through a small pairing registry.

Index convention: generators 0..3 are the translation (horizontal) block,
4..9 the rotation block.  The volume form for ambient dimension ``n`` is
``w^0 ^ ... ^ w^(n-1)`` in this order, which fixes every dual-form sign.

Dual forms follow the contraction convention

    ``dual(I) = u_I _| vol``,   ``i_{X1 ^ ... ^ Xp} = i_{Xp} ... i_{X1}``,

so that ``dual(I) = sign(I, I^c) * w^{I^c}`` and, for any p-form ``f`` and
increasing multi-index ``I``: ``f ^ dual(I) = f_I * vol``.
"""

from __future__ import annotations

import random
import re
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Iterable

from .scalars import GaussianRational, is_exact, is_zero, magnitude, scalar_eq

Index = tuple[int, ...]


class NoPairing(Exception):
    """Wedge of two forms whose value modules have no registered pairing."""


class DegreeUnderflow(Exception):
    """Interior product with a multivector of higher degree than the form."""


class RepeatedIndex(Exception):
    """Multi-index with a repeated entry where distinct entries are required."""


# ---------------------------------------------------------------------------
# index bookkeeping


def perm_parity(seq: Iterable[int]) -> int:
    """Sign of the permutation sorting ``seq`` (must have distinct entries)."""
    s = list(seq)
    sign = 1
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


def sort_index(indices: Iterable[int]) -> tuple[Index, int] | None:
    """Normalize to a strictly increasing tuple with sign; None if repeated."""
    s = tuple(indices)
    if len(set(s)) != len(s):
        return None
    return tuple(sorted(s)), perm_parity(s)


def merge_index(a: Index, b: Index) -> tuple[Index, int] | None:
    """Merge two increasing tuples, returning (merged, sign) or None on overlap."""
    if set(a) & set(b):
        return None
    out = tuple(sorted(a + b))
    return out, perm_parity(a + b)


def epsilon_sign(I: Iterable[int], n: int) -> int:
    """Sign of the shuffle listing I first and then its complement in 0..n-1."""
    I = tuple(I)
    if len(set(I)) != len(I):
        raise RepeatedIndex(f"repeated entry in multi-index {I}")
    comp = tuple(k for k in range(n) if k not in I)
    return perm_parity(I + comp)


def complement(I: Iterable[int], n: int) -> Index:
    s = set(I)
    return tuple(k for k in range(n) if k not in s)


# ---------------------------------------------------------------------------
# value modules

# Values are scalars or (nested) tuples of scalars.  These helpers are
# structure-driven and module-agnostic.


def value_add(u, v):
    if isinstance(u, tuple):
        return tuple(value_add(a, b) for a, b in zip(u, v, strict=True))
    return u + v


def value_neg(u):
    if isinstance(u, tuple):
        return tuple(value_neg(a) for a in u)
    return -u


def value_scale(u, s):
    if isinstance(u, tuple):
        return tuple(value_scale(a, s) for a in u)
    return u * s


def value_is_zero(u) -> bool:
    if isinstance(u, tuple):
        return all(value_is_zero(a) for a in u)
    return is_zero(u)


def value_eq(u, v) -> bool:
    if isinstance(u, tuple):
        return len(u) == len(v) and all(value_eq(a, b) for a, b in zip(u, v))
    return scalar_eq(u, v)


def value_is_exact(u) -> bool:
    if isinstance(u, tuple):
        return all(value_is_exact(a) for a in u)
    return is_exact(u)


def value_of(u):
    """Point value of a coefficient tree: Jet leaves collapse to their value."""
    from .scalars import Jet

    if isinstance(u, tuple):
        return tuple(value_of(a) for a in u)
    if isinstance(u, Jet):
        return value_of(u.value)
    return u


def value_norm(u) -> float:
    if isinstance(u, tuple):
        return max((value_norm(a) for a in u), default=0.0)
    return magnitude(u)


def _matvec(m, v):
    return tuple(sum((m[r][c] * v[c] for c in range(len(v))), start=0) for r in range(len(m)))


def _vecmat(v, m):
    return tuple(sum((v[r] * m[r][c] for r in range(len(v))), start=0) for c in range(len(m)))


def _vecdot(u, v):
    return sum((a * b for a, b in zip(u, v, strict=True)), start=0)


def _matmul(a, b):
    n = len(a)
    return tuple(
        tuple(sum((a[r][k] * b[k][c] for k in range(n)), start=0) for c in range(n))
        for r in range(n)
    )


# (module_left, module_right) -> (module_out, combine)
PAIRINGS: dict[tuple[str, str], tuple[str, Callable[[Any, Any], Any]]] = {
    ("endo", "spinor"): ("spinor", _matvec),
    ("cospinor", "endo"): ("cospinor", _vecmat),
    ("cospinor", "spinor"): ("scalar", _vecdot),
    ("endo", "endo"): ("endo", _matmul),
}


def pair_values(ma: str, mb: str, u, v) -> tuple[str, Any]:
    if ma == "scalar":
        return mb, value_scale(v, u)
    if mb == "scalar":
        return ma, value_scale(u, v)
    hit = PAIRINGS.get((ma, mb))
    if hit is None:
        raise NoPairing(f"no bilinear pairing registered for {ma} ^ {mb}")
    out, fn = hit
    return out, fn(u, v)


# ---------------------------------------------------------------------------
# forms


class Form:
    """Immutable graded-antisymmetric coefficient table.

    ``coeffs`` maps strictly increasing index tuples to nonzero module values.
    Degrees above 10 collapse to the zero form.
    """

    __slots__ = ("degree", "module", "coeffs")

    def __init__(self, degree: int, coeffs=None, module: str = "scalar", _normalized=False):
        self.degree = degree
        self.module = module
        if degree > 10 or degree < 0:
            self.coeffs = {}
            return
        table: dict[Index, Any] = {}
        if coeffs:
            for idx, val in (coeffs.items() if hasattr(coeffs, "items") else coeffs):
                idx = tuple(idx)
                if len(idx) != degree:
                    raise ValueError(f"index {idx} does not match degree {degree}")
                if _normalized:
                    key, sign = idx, 1
                else:
                    norm = sort_index(idx)
                    if norm is None:
                        continue
                    key, sign = norm
                if sign < 0:
                    val = value_neg(val)
                if key in table:
                    val = value_add(table[key], val)
                if value_is_zero(val):
                    table.pop(key, None)
                else:
                    table[key] = val
        self.coeffs = table

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def zero(degree: int = 0, module: str = "scalar") -> Form:
        return Form(degree, None, module)

    @staticmethod
    def scalar(value, module: str = "scalar") -> Form:
        if value_is_zero(value):
            return Form(0, None, module)
        return Form(0, {(): value}, module)

    @staticmethod
    def generator(i: int) -> Form:
        """The coframe 1-form w^i."""
        return Form(1, {(i,): 1})

    @staticmethod
    def monomial(indices: Iterable[int], value=1, module: str = "scalar") -> Form:
        idx = tuple(indices)
        return Form(len(idx), {idx: value}, module)

    # -- basic algebra ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_exact(self) -> bool:
        return all(value_is_exact(v) for v in self.coeffs.values())

    def max_norm(self) -> float:
        return max((value_norm(v) for v in self.coeffs.values()), default=0.0)

    def get(self, indices: Iterable[int]):
        """Coefficient at an arbitrary-order index tuple (antisymmetric lookup)."""
        norm = sort_index(tuple(indices))
        if norm is None:
            return None
        key, sign = norm
        val = self.coeffs.get(key)
        if val is None:
            return None
        return value_neg(val) if sign < 0 else val

    def terms(self):
        return self.coeffs.items()

    def __add__(self, other: Form) -> Form:
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree or self.module != other.module:
            raise ValueError("cannot add forms of different degree or module")
        table = dict(self.coeffs)
        for idx, val in other.coeffs.items():
            if idx in table:
                s = value_add(table[idx], val)
                if value_is_zero(s):
                    del table[idx]
                else:
                    table[idx] = s
            else:
                table[idx] = val
        out = Form.__new__(Form)
        out.degree, out.module, out.coeffs = self.degree, self.module, table
        return out

    def __neg__(self) -> Form:
        out = Form.__new__(Form)
        out.degree, out.module = self.degree, self.module
        out.coeffs = {i: value_neg(v) for i, v in self.coeffs.items()}
        return out

    def __sub__(self, other: Form) -> Form:
        return self + (-other)

    def scale(self, s) -> Form:
        if is_zero(s):
            return Form(self.degree, None, self.module)
        out = Form.__new__(Form)
        out.degree, out.module = self.degree, self.module
        out.coeffs = {}
        for i, v in self.coeffs.items():
            sv = value_scale(v, s)
            if not value_is_zero(sv):
                out.coeffs[i] = sv
        return out

    def map_values(self, fn: Callable[[Any], Any], module: str | None = None) -> Form:
        """Apply fn to every coefficient (used for matrix actions on values)."""
        out = Form.__new__(Form)
        out.degree = self.degree
        out.module = self.module if module is None else module
        out.coeffs = {}
        for i, v in self.coeffs.items():
            w = fn(v)
            if not value_is_zero(w):
                out.coeffs[i] = w
        return out

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        if self.degree != other.degree:
            return self.is_zero() and other.is_zero()
        keys = set(self.coeffs) | set(other.coeffs)
        zero = None
        for k in keys:
            a, b = self.coeffs.get(k), other.coeffs.get(k)
            if a is None:
                if not value_is_zero(b):
                    return False
            elif b is None:
                if not value_is_zero(a):
                    return False
            elif not value_eq(a, b):
                return False
        return True

    def __repr__(self):
        if self.module == "scalar":
            return f"Form({render_form(self)!r})"
        return f"Form(degree={self.degree}, module={self.module}, terms={len(self.coeffs)})"

    # -- structural predicates -------------------------------------------------

    def is_horizontal(self) -> bool:
        """No rotation-block (index >= 4) leg in any stored multi-index."""
        return all(all(k < 4 for k in idx) for idx in self.coeffs)

    def value_form(self) -> Form:
        """Pointwise evaluation: jet coefficients collapse to their values."""
        out = Form.__new__(Form)
        out.degree, out.module = self.degree, self.module
        out.coeffs = {}
        for i, v in self.coeffs.items():
            w = value_of(v)
            if not value_is_zero(w):
                out.coeffs[i] = w
        return out


class MultiVector:
    """Sparse antisymmetric multivector over the dual basis u_i."""

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree: int, coeffs=None):
        self.degree = degree
        table: dict[Index, Any] = {}
        if coeffs:
            for idx, val in (coeffs.items() if hasattr(coeffs, "items") else coeffs):
                norm = sort_index(tuple(idx))
                if norm is None:
                    continue
                key, sign = norm
                if sign < 0:
                    val = -val
                val = table.get(key, 0) + val
                if is_zero(val):
                    table.pop(key, None)
                else:
                    table[key] = val
        self.coeffs = table

    @staticmethod
    def basis(indices: Iterable[int]) -> MultiVector:
        idx = tuple(indices)
        if len(set(idx)) != len(idx):
            raise RepeatedIndex(f"repeated entry in multivector index {idx}")
        return MultiVector(len(idx), {idx: 1})

    def terms(self):
        return self.coeffs.items()


def wedge(a: Form, b: Form) -> Form:
    """Wedge product; value modules combine through the pairing registry."""
    degree = a.degree + b.degree
    if degree > 10 or a.is_zero() or b.is_zero():
        mod = _wedge_module(a.module, b.module)
        return Form(degree, None, mod)
    out_module = None
    table: dict[Index, Any] = {}
    for ia, va in a.coeffs.items():
        for ib, vb in b.coeffs.items():
            merged = merge_index(ia, ib)
            if merged is None:
                continue
            key, sign = merged
            mod, val = pair_values(a.module, b.module, va, vb)
            out_module = mod
            if sign < 0:
                val = value_neg(val)
            if key in table:
                val = value_add(table[key], val)
            if value_is_zero(val):
                table.pop(key, None)
            else:
                table[key] = val
    if out_module is None:
        out_module = _wedge_module(a.module, b.module)
    out = Form.__new__(Form)
    out.degree, out.module, out.coeffs = degree, out_module, table
    return out


def _wedge_module(ma: str, mb: str) -> str:
    if ma == "scalar":
        return mb
    if mb == "scalar":
        return ma
    hit = PAIRINGS.get((ma, mb))
    if hit is None:
        raise NoPairing(f"no bilinear pairing registered for {ma} ^ {mb}")
    return hit[0]


def wedge_all(forms: Iterable[Form]) -> Form:
    forms = list(forms)
    if not forms:
        return Form.scalar(1)
    acc = forms[0]
    for f in forms[1:]:
        acc = wedge(acc, f)
    return acc


def _contract_one(j: int, form: Form) -> Form:
    table: dict[Index, Any] = {}
    for idx, val in form.coeffs.items():
        if j not in idx:
            continue
        pos = idx.index(j)
        key = idx[:pos] + idx[pos + 1 :]
        v = value_neg(val) if pos % 2 else val
        if key in table:
            v = value_add(table[key], v)
        if value_is_zero(v):
            table.pop(key, None)
        else:
            table[key] = v
    out = Form.__new__(Form)
    out.degree, out.module, out.coeffs = form.degree - 1, form.module, table
    return out


def interior(X: MultiVector, a: Form) -> Form:
    """Iterated interior product ``i_{Xp} ... i_{X1} a`` for X = X1 ^ ... ^ Xp."""
    if X.degree > a.degree:
        raise DegreeUnderflow(f"multivector degree {X.degree} exceeds form degree {a.degree}")
    result = Form(a.degree - X.degree, None, a.module)
    for idx, coef in X.coeffs.items():
        piece = a
        for j in idx:  # i_{u_{j1}} applies first, per the contraction convention
            piece = _contract_one(j, piece)
        result = result + piece.scale(coef)
    return result


def vol_form(n: int) -> Form:
    return Form.monomial(range(n))


def dual_form(I: Iterable[int], n: int) -> Form:
    """The (n-p)-form dual to the index sequence I: ``u_I _| vol``."""
    I = tuple(I)
    if len(set(I)) != len(I):
        raise RepeatedIndex(f"repeated entry in multi-index {I}")
    if any(k < 0 or k >= n for k in I):
        raise ValueError(f"index {I} out of range for ambient dimension {n}")
    sign = epsilon_sign(I, n)
    return Form.monomial(complement(I, n), sign)


def check_dual_identity(n: int, p: int, trials: int, seed: int = 0):
    """Verify ``(f_J e^J) ^ dual(I) == f_I vol`` on random rational p-forms.

    Returns (ok, counterexample) with the first failing (trial, I) if any.
    """
    rng = random.Random(seed)
    indices = list(combinations(range(n), p))
    vol = vol_form(n)
    for trial in range(trials):
        coeffs = {
            J: Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for J in indices
        }
        f = Form(p, coeffs)
        for I in indices:
            lhs = wedge(f, dual_form(I, n))
            rhs = vol.scale(coeffs[I])
            if lhs != rhs:
                return False, (trial, I)
    return True, None


# ---------------------------------------------------------------------------
# canonical text rendering (scalar-valued forms)

_GAUSS_RE = re.compile(r"^\((-?\d+(?:/\d+)?)([+-]\d+(?:/\d+)?)i\)$")


def _render_scalar(c) -> str:
    if isinstance(c, GaussianRational):
        im = c.im
        sign = "+" if im >= 0 else "-"
        return f"({c.re}{sign}{abs(im)}i)"
    if isinstance(c, (int, Fraction)):
        return str(c)
    return repr(c)


def _parse_scalar(tok: str):
    m = _GAUSS_RE.match(tok)
    if m:
        return GaussianRational(Fraction(m.group(1)), Fraction(m.group(2)))
    return Fraction(tok)


def render_form(form: Form) -> str:
    """Canonical text for a scalar-valued form, e.g. ``3/2·ϖ^0∧ϖ^4``."""
    if form.module != "scalar":
        raise ValueError("canonical rendering is defined for scalar-valued forms")
    if form.is_zero():
        return "0"
    parts = []
    for idx in sorted(form.coeffs):
        c = _render_scalar(form.coeffs[idx])
        if idx:
            basis = "∧".join(f"ϖ^{k}" for k in idx)
            parts.append(f"{c}·{basis}")
        else:
            parts.append(c)
    return " + ".join(parts)


def parse_form(text: str, degree: int | None = None) -> Form:
    """Inverse of :func:`render_form` for exact coefficients."""
    text = text.strip()
    if text == "0":
        return Form(0 if degree is None else degree)
    coeffs = {}
    deg = degree
    for chunk in text.split(" + "):
        chunk = chunk.strip()
        if "·" in chunk:
            coef_txt, basis = chunk.split("·", 1)
            idx = tuple(int(g.split("^")[1]) for g in basis.split("∧"))
        else:
            coef_txt, idx = chunk, ()
        if deg is None:
            deg = len(idx)
        elif deg != len(idx):
            raise ValueError(f"mixed degrees in rendered form: {text!r}")
        coeffs[idx] = _parse_scalar(coef_txt)
    return Form(deg, coeffs)
