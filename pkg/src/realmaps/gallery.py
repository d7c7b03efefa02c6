"""Named map and state families with replayable expected facts.

Every entry has a builder, a parameter schema and a list of facts.  A fact
runs one check from :mod:`realmaps.posit`, :mod:`realmaps.cones` or
:mod:`realmaps.ebreak` and compares the measurement with a closed form, an
independent oracle, or a trivial identity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from importlib import resources
from typing import Any, Callable, Optional

import numpy as np

from realmaps import chanrep, cones, ebreak, posit
from realmaps.chanrep import LinearMapRep
from realmaps.errors import ParamRangeError, UnknownEntryError
from realmaps.matkit import BipartiteOperator, Field, kron, partial_transpose_left, vec
from realmaps.posit import SolverConfig, Status

__all__ = [
    "GalleryEntry",
    "Fact",
    "FactResult",
    "EntryReport",
    "ENTRIES",
    "build",
    "expected_facts",
    "run_entry",
    "list_ids",
    "manifest",
    "witness_battery",
    "o_plus",
    "o_minus",
    "GAMMA",
]

GAMMA = np.array([[0.0, 1.0], [-1.0, 0.0]])
SQRT2 = math.sqrt(2.0)


# -- building blocks ------------------------------------------------------------------


def o_plus(block: int) -> np.ndarray:
    """``[[0, I], [I, 0]]`` with ``block x block`` identities."""
    z, e = np.zeros((block, block)), np.eye(block)
    return np.block([[z, e], [e, z]])


def o_minus(block: int) -> np.ndarray:
    """``diag(I, -I)``."""
    z, e = np.zeros((block, block)), np.eye(block)
    return np.block([[e, z], [z, -e]])


def _swap_w(n: int) -> np.ndarray:
    w = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            w[i * n + j, j * n + i] = 1.0
    return w


def _func_map(fn, n, field=Field.REAL):
    return chanrep.from_function(fn, n, field)


def pospres_nonadjoint() -> LinearMapRep:
    return _func_map(lambda a: np.array([[(a[0, 0] + a[1, 1] + a[0, 1] - a[1, 0]) / 2]]), 2)


def diag_norm_trick() -> LinearMapRep:
    return _func_map(
        lambda a: np.diag([(a[0, 0] + a[1, 1]) / 2, (a[0, 1] - a[1, 0]) / 2]), 2
    )


def reduction_q(n: int, q: float) -> LinearMapRep:
    """``A -> Tr(A) I - q A``."""
    return _func_map(lambda a: np.trace(a) * np.eye(n) - q * a, n)


def xz_reduction(block: int, q: float) -> LinearMapRep:
    """``A -> Tr(A) I - q (O+ A O+ + O- A O-)`` on ``M_{2 block}``."""
    op, om = o_plus(block), o_minus(block)
    d = 2 * block
    return _func_map(lambda a: np.trace(a) * np.eye(d) - q * (op @ a @ op + om @ a @ om), d)


def antisym_shift(n: int, s: float) -> LinearMapRep:
    """``A -> A + s (A - A^t)``."""
    return _func_map(lambda a: a + s * (a - a.T), n)


def unital_norm_one() -> LinearMapRep:
    def fn(a):
        h = (a[0, 1] - a[1, 0]) / 2
        return np.array([[a[1, 1], h], [-h, a[1, 1]]])

    return _func_map(fn, 2)


def trace_preserving_skew() -> LinearMapRep:
    def fn(a):
        h = (a[0, 1] - a[1, 0]) / 2
        return np.array([[0.0, h], [-h, a[0, 0] + a[1, 1]]])

    return _func_map(fn, 2)


def _skew_mix_apply(a, t):
    diag = (a[0, 0] + a[1, 1] + 2 * a[2, 2]) / 4
    off = (a[0, 1] - a[1, 0]) * t / (2 * SQRT2)
    out = np.zeros((3, 3), dtype=np.result_type(a, float))
    out[0, 0] = out[1, 1] = diag
    out[0, 1], out[1, 0] = off, -off
    out[2, 2] = (a[0, 0] + a[1, 1]) / 2
    return out


def skew_mix(t: float) -> LinearMapRep:
    return _func_map(lambda a: _skew_mix_apply(a, t), 3)


def skew_mix_ext(n: int, t: float) -> LinearMapRep:
    """Top-left 3x3 corner through the skew mix, bottom-right corner unchanged, rest dropped."""

    def fn(a):
        out = np.zeros((n, n), dtype=np.result_type(a, float))
        out[:3, :3] = _skew_mix_apply(a[:3, :3], t)
        out[3:, 3:] = a[3:, 3:]
        return out

    return _func_map(fn, n)


def choi_map(n: int) -> LinearMapRep:
    """``X -> (n-1) Tr(X) I - X``."""
    return _func_map(lambda a: (n - 1) * np.trace(a) * np.eye(n) - a, n)


def antisymmetrizer(n: int) -> LinearMapRep:
    """``X -> X - X^t``."""
    return _func_map(lambda a: a - a.T, n)


def werner(n: int, s: float) -> BipartiteOperator:
    """``s/(n(n+1)) (I + W) + (1-s)/(n(n-1)) (I - W)`` with the swap ``W``."""
    eye = np.eye(n * n)
    w = _swap_w(n)
    mat = s / (n * (n + 1)) * (eye + w) + (1 - s) / (n * (n - 1)) * (eye - w)
    return BipartiteOperator(n, n, Field.REAL, mat)


def werner_pt_min(n: int, s: float) -> float:
    """Smallest eigenvalue of the left partial transpose of the Werner matrix.

    The partial transpose is ``a I + b vec(I) vec(I)^t``, so the spectrum is
    ``{a, a + n b}``.
    """
    a = s / (n * (n + 1)) + (1 - s) / (n * (n - 1))
    b = s / (n * (n + 1)) - (1 - s) / (n * (n - 1))
    return min(a, a + n * b)


def xz_pair_state(block: int) -> BipartiteOperator:
    vp, vm = vec(o_plus(block)), vec(o_minus(block))
    mat = (np.outer(vp, vp) + np.outer(vm, vm)) / (4 * block)
    d = 2 * block
    return BipartiteOperator(d, d, Field.REAL, mat)


def xz_pair_state_factors(block: int) -> cones.SepDecomposition:
    """Conjugate pair ``(O+ + i O-)/(2 sqrt(2 block))`` and its conjugate, each of rank ``block``."""
    a = (o_plus(block) + 1j * o_minus(block)) / (2 * math.sqrt(2 * block))
    d = 2 * block
    return cones.SepDecomposition(d, d, block, Field.COMPLEX, (a, a.conj()), conjugate_paired=True)


def _sigma_y_embed(d: int) -> np.ndarray:
    out = np.zeros((d, d), dtype=complex)
    out[0, 1], out[1, 0] = -1j, 1j
    return out


def sigma_y_pair_state(n: int, m: int) -> BipartiteOperator:
    """``I (x) I + A_n (x) A_m`` with ``A`` the imaginary Pauli matrix padded by zeros.

    The product of the two purely imaginary factors is real, so the matrix is
    stored as a real operator.
    """
    prod = np.kron(_sigma_y_embed(n), _sigma_y_embed(m))
    return BipartiteOperator(n, m, Field.REAL, np.eye(n * m) + prod.real)


def sigma_y_pair_terms(n: int, m: int):
    """The two product terms ``(I+A)(x)(I+A)`` and ``(I-A)(x)(I-A)`` summing to twice the state."""
    an, am = _sigma_y_embed(n), _sigma_y_embed(m)
    return [
        (np.eye(n) + an, np.eye(m) + am),
        (np.eye(n) - an, np.eye(m) - am),
    ]


def sigma_y_pair_factors(n: int, m: int) -> cones.SepDecomposition:
    """Product-vector factors from the eigenvectors of the PSD product terms."""
    factors = []
    for left, right in sigma_y_pair_terms(n, m):
        wl, vl = np.linalg.eigh(left)
        wr, vr = np.linalg.eigh(right)
        for i in range(n):
            for j in range(m):
                weight = wl[i] * wr[j] / 2
                if weight > 1e-14:
                    factors.append(math.sqrt(weight) * np.outer(vl[:, i], vr[:, j]))
    return cones.SepDecomposition(n, m, 1, Field.COMPLEX, tuple(factors))


def xz_pair_channel(block: int) -> LinearMapRep:
    return chanrep.from_kraus([o_plus(block), o_minus(block)], Field.REAL)


def idempotent_ppt() -> LinearMapRep:
    eye = np.eye(2)
    choi = 0.5 * np.block([[eye, GAMMA], [-GAMMA, eye]])
    return chanrep.from_choi(choi, 2, 2, Field.REAL)


def idempotent_ppt_factors() -> cones.SepDecomposition:
    """``a conj(a)^t`` and its conjugate with ``a = (1, -i)/sqrt 2``; rank one each."""
    a = np.array([1.0, -1j]) / SQRT2
    f = np.outer(a, a.conj())
    return cones.SepDecomposition(2, 2, 1, Field.COMPLEX, (f, f.conj()), conjugate_paired=True)


def sym_depol(n: int, lam: float) -> LinearMapRep:
    """``X -> (1 - lam) Tr(X) I / n + lam (X + X^t) / 2``."""
    return _func_map(lambda a: (1 - lam) * np.trace(a) * np.eye(n) / n + lam * (a + a.T) / 2, n)


UPB_TILES_VECTORS = (
    ((1, 0, 0), (1, -1, 0)),
    ((1, -1, 0), (0, 0, 1)),
    ((0, 0, 1), (0, 1, -1)),
    ((0, 1, -1), (1, 0, 0)),
    ((1, 1, 1), (1, 1, 1)),
)


def upb_tiles() -> BipartiteOperator:
    """Normalized projector onto the complement of the five-tile product basis."""
    proj = np.zeros((9, 9))
    for left, right in UPB_TILES_VECTORS:
        v = np.kron(np.asarray(left, float), np.asarray(right, float))
        v /= np.linalg.norm(v)
        proj += np.outer(v, v)
    return BipartiteOperator(3, 3, Field.REAL, (np.eye(9) - proj) / 4)


# -- witness family -------------------------------------------------------------------


def witness_battery(n: int, m: int, field, p: int) -> list[tuple[str, LinearMapRep]]:
    """Maps ``M_n -> M_m`` whose positivity level over ``field`` is at least ``p``.

    * the transpose, positive over both fields, at ``p = 1``;
    * ``Tr(X) I - X / p``, p-positive over both fields, for ``p < n``;
    * the xz reduction at ``q = 1/sqrt(2b(2b-1))``, real and (2b-1)-positive.
    """
    field = Field.parse(field)
    out: list[tuple[str, LinearMapRep]] = []
    if n != m:
        return out
    f = field
    if p == 1:
        out.append(("transpose", chanrep.transpose_map(n, f)))
    if p < n:
        phi = reduction_q(n, 1.0 / p)
        out.append((f"reduction-q(q=1/{p})", phi if f is Field.REAL else chanrep.complexify(phi)))
    if field is Field.REAL and n % 2 == 0:
        b = n // 2
        if p <= 2 * b - 1:
            q = 1.0 / math.sqrt(2 * b * (2 * b - 1))
            out.append((f"xz-reduction(block={b},q={q:.6g})", xz_reduction(b, q)))
    return out


# -- registry -------------------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str
    default: Any
    lo: Optional[float] = None
    hi: Optional[float] = None
    integer: bool = False

    def check(self, value):
        if self.integer:
            if isinstance(value, float) and not float(value).is_integer():
                raise ParamRangeError(f"{self.name} must be an integer, got {value}")
            value = int(value)
        else:
            value = float(value)
        if self.lo is not None and value < self.lo:
            raise ParamRangeError(f"{self.name}={value} below minimum {self.lo}")
        if self.hi is not None and value > self.hi:
            raise ParamRangeError(f"{self.name}={value} above maximum {self.hi}")
        return value

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "default": self.default,
            "min": self.lo,
            "max": self.hi,
            "type": "integer" if self.integer else "number",
        }


@dataclass(frozen=True)
class FactResult:
    name: str
    passed: bool
    measured: Any
    expected: Any
    source: str
    anchor: str

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": _jsonable(self.measured),
            "expected": _jsonable(self.expected),
            "source": self.source,
            "anchor": self.anchor,
        }


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


@dataclass(frozen=True)
class Fact:
    """One replayable assertion.

    ``evaluate(obj, params, cfg)`` returns ``(passed, measured)``.
    ``source`` is ``closed_form`` (a formula for the family), ``oracle`` (an
    independent computation named in ``oracle``) or ``trivial``.
    """

    name: str
    check: str
    expected: Any
    source: str
    anchor: str
    evaluate: Callable
    oracle: str = ""

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "check": self.check,
            "expected": _jsonable(self.expected),
            "source": self.source,
            "anchor": self.anchor,
        }
        if self.oracle:
            out["oracle"] = self.oracle
        return out


@dataclass(frozen=True)
class GalleryEntry:
    id: str
    kind: str  # "MAP" or "STATE"
    params: tuple
    builder: Callable
    anchor: str
    facts: Callable  # params -> list[Fact]
    enabled_by_default: bool = True

    def resolve(self, overrides: dict) -> dict:
        known = {p.name: p for p in self.params}
        unknown = set(overrides) - set(known)
        if unknown:
            raise ParamRangeError(f"{self.id} has no parameter(s) {sorted(unknown)}")
        values = {p.name: p.default for p in self.params}
        values.update(overrides)
        return {name: known[name].check(v) for name, v in values.items()}


# -- fact helpers ---------------------------------------------------------------------


def _close(measured, expected, tol):
    return measured is not None and abs(measured - expected) <= tol


def _random_psd_inputs(n, count, seed):
    rng = np.random.default_rng(seed)
    for k in range(count):
        rank = 1 + k % n
        g = rng.standard_normal((n, rank))
        yield g @ g.T


def _positivity_spot_check(phi: LinearMapRep, count=100, seed=7) -> float:
    worst = np.inf
    for x in _random_psd_inputs(phi.dim_in, count, seed):
        y = chanrep.apply(phi, x)
        worst = min(worst, float(np.linalg.eigvalsh(0.5 * (y + y.T))[0]))
    return worst


def _fact_positivity_preserving(anchor):
    def ev(phi, params, cfg):
        worst = _positivity_spot_check(phi)
        return worst >= -1e-12, worst

    return Fact("preserves positivity on 100 random PSD inputs", "chanrep.apply", ">= 0", "closed_form",
                anchor, ev)


def _fact_commutes(expected: bool, anchor, source="closed_form"):
    def ev(phi, params, cfg):
        res = posit.commutes_with_adjoint(phi)
        return res.commutes == expected, {"commutes": res.commutes, "choiDefect": res.choi_defect,
                                          "basisViolation": res.worst_basis_violation}

    return Fact(f"commutes with adjoint is {expected}", "posit.commutes_with_adjoint", expected, source, anchor, ev)


def _fact_norm(expected, anchor, tol=1e-6, source="closed_form"):
    def ev(phi, params, cfg):
        lower, at_id = posit.estimate_map_norm(phi, cfg.replace(restarts=min(cfg.restarts, 32)))
        return _close(lower, expected, tol) and _close(at_id, expected, tol), {"lowerBound": lower,
                                                                              "normAtIdentity": at_id}

    return Fact(f"map norm estimate equals {expected}", "posit.estimate_map_norm", expected, source, anchor, ev)


def _fact_complexification(p, refute: bool, anchor, expected_value=None, tol=1e-6, restarts=None,
                           source="closed_form", upper_only=False):
    def ev(phi, params, cfg):
        c = cfg.replace(restarts=restarts) if restarts else cfg
        v = posit.check_complexification_p_positive(phi, p, c)
        ok = v.refuted == refute
        if refute and expected_value is not None:
            if upper_only:
                ok = ok and v.value <= expected_value + tol
            else:
                ok = ok and _close(v.value, expected_value, tol)
        return ok, {"status": v.status.value, "value": v.value}

    word = "REFUTED" if refute else "not refuted"
    exp = word if expected_value is None else {"status": word, "value": expected_value}
    return Fact(f"complexification {p}-positivity {word}", "posit.check_complexification_p_positive", exp,
                source, anchor, ev)


def _fact_p_positive(p, refute: bool, anchor, expected_value=None, tol=1e-6, restarts=None, source="closed_form"):
    def ev(phi, params, cfg):
        c = cfg.replace(restarts=restarts) if restarts else cfg
        v = posit.check_p_positive(phi, p, c)
        ok = v.refuted == refute
        if refute and expected_value is not None:
            ok = ok and _close(v.value, expected_value, tol)
        return ok, {"status": v.status.value, "value": v.value}

    word = "REFUTED" if refute else "not refuted"
    exp = word if expected_value is None else {"status": word, "value": expected_value}
    return Fact(f"real {p}-positivity {word}", "posit.check_p_positive", exp, source, anchor, ev)


def _fact_classify(field, p, status: Status, anchor, source="closed_form"):
    field = Field.parse(field)

    def ev(state, params, cfg):
        op = state.choi if isinstance(state, LinearMapRep) else state
        cls = cones.classify_state(op, [(field, p)], cfg)
        v = cls.verdict(field, p)
        return v.status is status, {"status": v.status.value, "value": v.value, "note": v.note}

    return Fact(f"{field.value}-SEP_{p} {status.value}", "cones.classify_state", status.value, source, anchor, ev)


def _fact_eb(field, p, status: Status, anchor, source="closed_form"):
    field = Field.parse(field)

    def ev(phi, params, cfg):
        b = ebreak.check_eb_p(phi, p, field, cfg)
        ok = b.choi_sep.status is status
        if ok and status is Status.CERTIFIED and b.kraus_certificate is not None:
            ok = b.kraus_residual <= 1e-10
        return ok, {"status": b.choi_sep.status.value, "krausResidual": b.kraus_residual}

    return Fact(f"{field.value}-entanglement {p}-breaking {status.value}", "ebreak.check_eb_p", status.value,
                source, anchor, ev)


def _fact_ipt(expected: bool, anchor, expected_defect=None, tol=1e-12, source="closed_form"):
    def ev(obj, params, cfg):
        op = obj.choi if isinstance(obj, LinearMapRep) else obj
        ipt, defect = cones.is_ipt(op)
        ok = ipt == expected
        if expected_defect is not None:
            ok = ok and _close(defect, expected_defect, tol)
        return ok, defect

    exp = expected if expected_defect is None else {"ipt": expected, "defect": expected_defect}
    return Fact(f"IPT is {expected}", "cones.is_ipt", exp, source, anchor, ev)


def _fact_decomposition(factors_fn, tol, anchor, source="closed_form"):
    def ev(obj, params, cfg):
        op = obj.choi if isinstance(obj, LinearMapRep) else obj
        dec = factors_fn(params)
        res = dec.residual(op)
        rank = dec.max_rank()
        return res <= tol and rank <= dec.rank_bound, {"residual": res, "maxRank": rank}

    return Fact("explicit factors reproduce the matrix", "cones.SepDecomposition.verify", f"residual <= {tol:g}",
                source, anchor, ev)


# -- per-entry fact lists -------------------------------------------------------------


def _facts_pospres_nonadjoint(params):
    a = "positivity preserving map to scalars that fails adjoint commutation"
    return [_fact_positivity_preserving(a), _fact_commutes(False, a)]


def _facts_diag_norm_trick(params):
    a = "diagonal map with norm attained at the identity, not adjoint commuting"
    return [_fact_positivity_preserving(a), _fact_commutes(False, a), _fact_norm(1.0, a)]


def _facts_reduction_q(params):
    n, q = params["n"], params["q"]
    a = "quadratic form at the normalized rank-l identity vector is 1 - q l"
    facts = []

    def ev_apply(phi, params, cfg):
        d = float(np.max(np.abs(chanrep.apply(phi, np.eye(n)) - (n - q) * np.eye(n))))
        return d <= 1e-12, d

    facts.append(Fact("image of identity is (n - q) I", "chanrep.apply", (n - q), "closed_form", a, ev_apply))

    def ev_ladder(phi, params, cfg):
        vals = [posit.seesaw_min_schmidt(phi.choi, l, cfg)[0] for l in range(1, n + 1)]
        errs = [abs(v - (1 - q * l)) for l, v in enumerate(vals, start=1)]
        return max(errs) <= 1e-7, vals

    facts.append(Fact("Schmidt-capped minimum is 1 - q l for every l", "posit.seesaw_min_schmidt",
                      [1 - q * l for l in range(1, n + 1)], "closed_form", a, ev_ladder))
    for level in range(1, n + 1):
        val = 1 - q * level
        if val < -1e-6:
            facts.append(_fact_p_positive(level, True, a, expected_value=val, tol=1e-6))
            break
        if val > 1e-6:
            facts.append(_fact_p_positive(level, False, a))
    return facts


def _facts_xz_reduction(params):
    b, q = params["block"], params["q"]
    a = "Choi matrix is I - q times two orthogonal vec(O) projections"
    facts = []

    def ev_choi(phi, params, cfg):
        vp, vm = vec(o_plus(b)), vec(o_minus(b))
        d = 2 * b
        closed = np.eye(d * d) - q * (np.outer(vp, vp) + np.outer(vm, vm))
        err = float(np.max(np.abs(phi.choi.matrix - closed)))
        return err <= 1e-12, err

    facts.append(Fact("Choi matrix matches the closed form", "chanrep.from_function", "I - q(vv^t + ww^t)",
                      "closed_form", a, ev_choi))
    thr_real = 1.0 / math.sqrt(2 * b * (2 * b - 1))
    if q > 1.0 / (2 * b):
        facts.append(_fact_complexification(b, True, "complexified form is 1 - 2 b q at vec(O+ + i O-)",
                                            expected_value=1 - 2 * b * q, tol=1e-6, upper_only=b > 1))
    if q <= thr_real + 1e-12:
        facts.append(_fact_p_positive(2 * b - 1, False, "real form bounded below by 1 - q sqrt(2b(2b-1))",
                                      restarts=256))
    if b == 1:
        def ev_real(phi, params, cfg):
            val = posit.seesaw_min_schmidt(phi.choi, 1, cfg)[0]
            return _close(val, 1 - q, 1e-6), val

        facts.append(Fact("real product-vector minimum is 1 - q", "posit.seesaw_min_schmidt", 1 - q, "oracle",
                          "real product vectors reach at most half the projection weight", ev_real,
                          oracle="grid search over two angles on the unit circle"))
    if q > 1.0 / (2 * b):
        facts.append(_fact_p_positive(2 * b, True, "full-rank vec(O) vectors give 1 - 2 b q",
                                      expected_value=1 - 2 * b * q, tol=1e-9))
    return facts


def _facts_antisym_shift(params):
    n, s = params["n"], params["s"]
    a = "A + s(A - A^t) preserves positivity; its complexification has eigenvalue -2s at a rank-one input"
    facts = [
        _fact_positivity_preserving(a),
        _fact_commutes(True, "Choi matrix (1+s) vec(I)vec(I)^t - s W is symmetric for every s", source="oracle"),
    ]

    def ev_eig(phi, params, cfg):
        pm = np.zeros((n, n), dtype=complex)
        pm[0, 0] = pm[1, 1] = 1
        pm[0, 1], pm[1, 0] = 1j, -1j
        out = chanrep.apply(chanrep.complexify(phi), pm)
        lam = float(np.linalg.eigvalsh(out)[0]) if n == 2 else float(np.linalg.eigvalsh(out[:2, :2])[0])
        return _close(lam, -2 * s, 1e-9), lam

    facts.append(Fact("complexified image has eigenvalue -2s", "chanrep.complexify", -2 * s, "closed_form", a, ev_eig))
    return facts


def _facts_unital_norm_one(params):
    a = "positive unital norm-one map with non-positive complexification"
    facts = [_fact_commutes(True, a), _fact_positivity_preserving(a), _fact_norm(1.0, a)]

    def ev_unital(phi, params, cfg):
        d = chanrep.diagnostics(phi).unital_defect
        return d <= 1e-12, d

    facts.append(Fact("unital", "chanrep.diagnostics", 0.0, "closed_form", a, ev_unital))

    def ev_witness(phi, params, cfg):
        lam = 2.0
        x = np.array([[lam, 1j], [-1j, 1 / lam]])
        out = chanrep.apply(chanrep.complexify(phi), x)
        target = np.array([[1 / lam, 1j], [-1j, 1 / lam]])
        err = float(np.max(np.abs(out - target)))
        low = float(np.linalg.eigvalsh(out)[0])
        return err <= 1e-12 and _close(low, 1 / lam - 1, 1e-12), {"error": err, "minEigenvalue": low}

    facts.append(Fact("complexified image of a rank-one input is indefinite", "chanrep.complexify",
                      {"minEigenvalue": -0.5}, "closed_form", a, ev_witness))
    facts.append(_fact_complexification(1, True, a))
    return facts


def _facts_trace_preserving_skew(params):
    a = "trace-preserving map with norm 2 at the identity and non-positive complexification"
    facts = [_fact_commutes(True, a), _fact_norm(2.0, a)]

    def ev_tp(phi, params, cfg):
        d = chanrep.diagnostics(phi).trace_defect
        return d <= 1e-12, d

    facts.append(Fact("trace preserving", "chanrep.diagnostics", 0.0, "closed_form", a, ev_tp))

    def ev_witness(phi, params, cfg):
        x = np.array([[1, 1j], [-1j, 1]])
        out = chanrep.apply(chanrep.complexify(phi), x)
        err = float(np.max(np.abs(out - np.array([[0, 1j], [-1j, 2]]))))
        return err <= 1e-12, err

    facts.append(Fact("complexified image of [[1,i],[-i,1]] is [[0,i],[-i,2]]", "chanrep.complexify",
                      [[0, "i"], ["-i", 2]], "closed_form", a, ev_witness))
    facts.append(_fact_complexification(1, True, a))
    return facts


def _skew_mix_common(params, t, a):
    facts = []

    def ev_ut(phi, params, cfg):
        d = chanrep.diagnostics(phi)
        return max(d.unital_defect, d.trace_defect) <= 1e-12, {"unital": d.unital_defect, "trace": d.trace_defect}

    facts.append(Fact("unital and trace preserving", "chanrep.diagnostics", 0.0, "closed_form", a, ev_ut))
    facts.append(_fact_commutes(True, a))
    facts.append(_fact_positivity_preserving(a))
    facts.append(_fact_norm(1.0, a))
    refute = t > 1 / SQRT2 + 1e-12
    facts.append(_fact_complexification(1, refute, a, restarts=None if refute else 256))
    return facts


def _facts_skew_mix(params):
    t = params["t"]
    a = "unital trace-preserving norm-one map on M_3; complexification positive exactly when t <= 1/sqrt 2"
    facts = _skew_mix_common(params, t, a)

    def ev_witness(phi, params, cfg):
        x = np.array([[1, 1j, 0], [-1j, 1, 0], [0, 0, 0]])
        out = chanrep.apply(chanrep.complexify(phi), x)
        target = 0.5 * np.array([[1, 1j * t * SQRT2, 0], [-1j * t * SQRT2, 1, 0], [0, 0, 2]])
        low = float(np.linalg.eigvalsh(out)[0])
        err = float(np.max(np.abs(out - target)))
        expected = (1 - t * SQRT2) / 2
        return err <= 1e-12 and _close(low, expected, 1e-9), {"error": err, "minEigenvalue": low}

    facts.append(Fact("complexified image of the rank-one witness", "chanrep.complexify",
                      {"minEigenvalue": (1 - t * SQRT2) / 2}, "closed_form", a, ev_witness,
                      oracle="2x2 eigenvalue formula"))
    return facts


def _facts_skew_mix_ext(params):
    n, t = params["n"], params["t"]
    a = "corner extension of the skew mix to M_n keeps every property"
    facts = _skew_mix_common(params, t, a)

    def ev_corner(phi, params, cfg):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((n, n))
        out = chanrep.apply(phi, x)
        ref = chanrep.apply(skew_mix(t), x[:3, :3])
        err = max(float(np.max(np.abs(out[:3, :3] - ref))), float(np.max(np.abs(out[3:, 3:] - x[3:, 3:]))),
                  float(np.max(np.abs(out[:3, 3:]))), float(np.max(np.abs(out[3:, :3]))))
        return err <= 1e-12, err

    facts.append(Fact("block structure matches the corner construction", "chanrep.apply", 0.0, "trivial", a, ev_corner))
    return facts


def _facts_choi_map(params):
    n = params["n"]
    a = "(n-1) Tr(X) I - X is (n-1)-positive but not n-positive"
    facts = [_fact_p_positive(n - 1, False, a) if n > 1 else None,
             _fact_p_positive(n, True, a, expected_value=-1.0, tol=1e-9)]
    facts = [f for f in facts if f is not None]

    def ev_horo(phi, params, cfg):
        omega = np.outer(vec(np.eye(n)), vec(np.eye(n))) / n
        v = cones.horodecki_check(BipartiteOperator(n, n, Field.REAL, omega), [("choi-map", phi)])
        return v.refuted and _close(v.value, -1.0 / n, 1e-9), {"status": v.status.value, "value": v.value}

    facts.append(Fact("detects the maximally entangled state", "cones.horodecki_check",
                      {"status": "REFUTED", "value": -1.0 / n}, "oracle", a, ev_horo,
                      oracle="spectrum of (n-1) I - vec(I) vec(I)^t, divided by n"))
    return facts


def _facts_antisymmetrizer(params):
    a = "X - X^t and its negative are both positive but neither is 2-positive"

    def make(sign, p, refute):
        def ev(phi, params, cfg):
            target = phi if sign > 0 else chanrep.from_choi(-phi.choi.matrix, phi.dim_in, phi.dim_out)
            v = posit.check_p_positive(target, p, cfg)
            ok = v.refuted == refute and (not refute or _close(v.value, -1.0, 1e-7))
            return ok, {"status": v.status.value, "value": v.value}

        sgn = "+" if sign > 0 else "-"
        word = "REFUTED at -1" if refute else "not refuted"
        return Fact(f"{sgn}map {p}-positivity {word}", "posit.check_p_positive", word, "oracle", a, ev,
                    oracle="quadratic form of C_id - W at explicit vectors")

    return [make(1, 1, False), make(-1, 1, False), make(1, 2, True), make(-1, 2, True)]


def _facts_werner(params):
    n, s = params["n"], params["s"]
    a = "Werner family; complex separable for s in [1/2, 1], partial-transpose invariant only at s = (n+1)/(2n)"
    facts = []

    def ev_pt(state, params, cfg):
        pt = partial_transpose_left(state).matrix
        low = float(np.linalg.eigvalsh(pt)[0])
        return _close(low, werner_pt_min(n, s), 1e-10), low

    facts.append(Fact("partial transpose minimum eigenvalue", "cones.is_ppt", werner_pt_min(n, s), "oracle", a, ev_pt,
                      oracle="PT is a I + b vec(I) vec(I)^t"))
    s_ipt = (n + 1) / (2 * n)
    facts.append(_fact_ipt(abs(s - s_ipt) < 1e-12, a))
    if s >= 0.5:
        facts.append(_fact_classify(Field.COMPLEX, 1, Status.CERTIFIED, a))
    elif werner_pt_min(n, s) < -1e-9:
        facts.append(_fact_classify(Field.COMPLEX, 1, Status.REFUTED, a))
    if abs(s - s_ipt) > 1e-12:
        facts.append(_fact_classify(Field.REAL, 1, Status.REFUTED, a))
    elif s >= 0.5:
        facts.append(_fact_classify(Field.REAL, 1, Status.CERTIFIED, a))
    return facts


def _facts_xz_pair_state(params):
    b = params["block"]
    a = "real span of O+ and O- has only full-rank matrices, yet the state is complex b-separable"
    facts = [_fact_decomposition(lambda pr: xz_pair_state_factors(pr["block"]), 1e-10, a)]
    q = 0.6 if b == 1 else 1.0 / math.sqrt(2 * b * (2 * b - 1))

    def ev_wit(state, params, cfg):
        val = cones.witness_value(xz_reduction(b, q), state)
        return _close(val, 1 - 2 * b * q, 1e-9), val

    facts.append(Fact(f"witness xz-reduction(q={q:.6g}) value", "cones.witness_value", 1 - 2 * b * q, "oracle", a,
                      ev_wit, oracle="trace against I - q(vv^t + ww^t)"))

    def ev_gate(state, params, cfg):
        v = posit.check_p_positive(xz_reduction(b, q), 2 * b - 1, cfg.replace(restarts=256))
        return not v.refuted, {"status": v.status.value, "value": v.value}

    facts.append(Fact("witness map is not refuted at its positivity level", "posit.check_p_positive",
                      "not refuted", "closed_form", a, ev_gate))

    def ev_grid(state, params, cfg):
        th = np.linspace(0, 2 * np.pi, 721)
        dets = [abs(np.linalg.det(math.cos(x) * o_plus(b) + math.sin(x) * o_minus(b))) for x in th]
        return min(dets) > 0.5, min(dets)

    facts.append(Fact("real span contains only full-rank matrices", "numpy.linalg.det", "> 0", "closed_form", a,
                      ev_grid, oracle="determinant grid over the unit circle"))
    if b == 1:
        facts.append(_fact_classify(Field.REAL, 1, Status.REFUTED, a))
    facts.append(_fact_classify(Field.COMPLEX, b, Status.CERTIFIED, a))
    return facts


def _facts_sigma_y_pair_state(params):
    n, m = params["n"], params["m"]
    a = "I + A (x) A with imaginary Pauli A: complex separable, not partial-transpose invariant"

    def ev_ident(state, params, cfg):
        total = sum(np.kron(l, r) for l, r in sigma_y_pair_terms(n, m))
        err = float(np.max(np.abs(total - 2 * state.matrix)))
        return err <= 1e-12, err

    return [
        Fact("2P equals the two product terms", "numpy.kron", 0.0, "closed_form", a, ev_ident),
        _fact_ipt(False, a),
        _fact_decomposition(lambda pr: sigma_y_pair_factors(pr["n"], pr["m"]), 1e-10, a),
        _fact_classify(Field.REAL, 1, Status.REFUTED, a),
    ]


def _facts_xz_pair_channel(params):
    b = params["block"]
    a = "Kraus pair O+, O-: complex entanglement b-breaking, not real (2b-1)-breaking"

    def ev_cp(phi, params, cfg):
        v = posit.is_completely_positive(phi, cfg)
        return v.certified, v.status.value

    def ev_choi(phi, params, cfg):
        err = float(np.max(np.abs(phi.choi.matrix - 4 * b * xz_pair_state(b).matrix)))
        return err <= 1e-12, err

    facts = [
        Fact("completely positive", "posit.is_completely_positive", "CERTIFIED", "trivial", a, ev_cp),
        Fact("Choi matrix is 4b times the xz pair state", "chanrep.from_kraus", 0.0, "closed_form", a, ev_choi),
        _fact_eb(Field.COMPLEX, b, Status.CERTIFIED, a),
    ]
    if b == 1:
        facts.append(_fact_eb(Field.REAL, 1, Status.REFUTED, a))
    return facts


def _facts_idempotent_ppt(params):
    a = "idempotent unital CP map, PPT but not IPT; complex EB through the A+/A- pair"

    def ev_idem(phi, params, cfg):
        d = float(np.max(np.abs(chanrep.compose(phi, phi).choi.matrix - phi.choi.matrix)))
        return d <= 1e-12, d

    def ev_ppt(phi, params, cfg):
        v = cones.is_ppt(phi.choi)
        return v.certified and v.value >= -1e-12, {"status": v.status.value, "minEigenvalue": v.value}

    def ev_ceb(phi, params, cfg):
        dec = idempotent_ppt_factors()
        res = dec.residual(phi.choi)
        kraus = [f.T for f in dec.factors]
        rebuilt = chanrep.from_kraus(kraus, Field.COMPLEX).choi.matrix
        kres = float(np.linalg.norm(rebuilt - phi.choi.matrix))
        return res <= 1e-10 and kres <= 1e-10 and dec.max_rank() == 1, {"residual": res, "krausResidual": kres}

    def ev_reb(phi, params, cfg):
        b = ebreak.check_eb_p(phi, 1, Field.REAL, cfg)
        return b.choi_sep.refuted, {"status": b.choi_sep.status.value, "note": b.choi_sep.note}

    return [
        Fact("idempotent", "chanrep.compose", 0.0, "closed_form", a, ev_idem),
        Fact("PPT certified", "cones.is_ppt", "CERTIFIED", "closed_form", a, ev_ppt),
        _fact_ipt(False, a, expected_defect=2.0),
        Fact("C-entanglement breaking via A+/A- factors", "ebreak.check_eb_p", "CERTIFIED", "closed_form", a, ev_ceb),
        Fact("R-entanglement breaking REFUTED", "ebreak.check_eb_p", "REFUTED", "closed_form", a, ev_reb),
    ]


def _facts_sym_depol(params):
    n, lam = params["n"], params["lam"]
    a = "symmetrized depolarizing family, closed under composition with multiplied parameters"

    def ev_comp(phi, params, cfg):
        d = float(np.max(np.abs(chanrep.compose(phi, phi).choi.matrix - sym_depol(n, lam * lam).choi.matrix)))
        return d <= 1e-12, d

    def ev_asym(phi, params, cfg):
        d = ebreak.antisymmetric_annihilation(phi)
        return d <= 1e-12, d

    facts = [
        _fact_ipt(True, a),
        Fact("square equals the family member at lam^2", "chanrep.compose", 0.0, "oracle", a, ev_comp,
             oracle="symbolic composition of the family"),
        Fact("annihilates antisymmetric matrices", "ebreak.antisymmetric_annihilation", 0.0, "trivial", a, ev_asym),
    ]
    if posit.is_completely_positive(sym_depol(n, lam)).certified:
        def ev_probe(phi, params, cfg):
            rep = ebreak.run_ipt_squared_probe(phi, cfg)
            return rep.real.choi_sep.certified and not rep.potential_counterexample, {
                "real": rep.real.choi_sep.status.value, "complex": rep.complex.choi_sep.status.value}

        facts.append(Fact("square is R-entanglement breaking", "ebreak.run_ipt_squared_probe", "CERTIFIED",
                          "oracle", a, ev_probe, oracle="separable ball around the identity"))
    return facts


def _facts_upb_tiles(params):
    a = "complement of a real unextendible product basis: IPT and PPT, yet entangled"

    def ev_ppt(state, params, cfg):
        v = cones.is_ppt(state)
        return v.certified, v.status.value

    def ev_search(state, params, cfg):
        res = {}
        for f in (Field.REAL, Field.COMPLEX):
            dec, r = cones.search_sep_decomposition(state, 1, f, cfg.replace(decomp_restarts=1))
            res[f.value] = r
            if dec is not None:
                return False, res
        return True, res

    return [
        _fact_ipt(True, a),
        Fact("PPT certified", "cones.is_ppt", "CERTIFIED", "closed_form", a, ev_ppt),
        Fact("decomposition search finds nothing", "cones.search_sep_decomposition", "no certificate",
             "closed_form", a, ev_search),
    ]


def _entry(id_, kind, params, builder, anchor, facts, enabled=True):
    return GalleryEntry(id_, kind, tuple(params), builder, anchor, facts, enabled)


_P = Param
ENTRIES: dict[str, GalleryEntry] = {
    e.id: e
    for e in [
        _entry("pospres-nonadjoint", "MAP", [], lambda: pospres_nonadjoint(),
               "(a+d+b-c)/2 on M_2 to M_1", _facts_pospres_nonadjoint),
        _entry("diag-norm-trick", "MAP", [], lambda: diag_norm_trick(),
               "diag((a+d)/2, (b-c)/2)", _facts_diag_norm_trick),
        _entry("reduction-q", "MAP", [_P("n", 3, 2, 8, True), _P("q", 0.6, 0.0, None)],
               lambda n, q: reduction_q(n, q), "Tr(A) I - q A", _facts_reduction_q),
        _entry("xz-reduction", "MAP", [_P("block", 1, 1, 4, True), _P("q", 0.6, 0.0, None)],
               lambda block, q: xz_reduction(block, q), "Tr(A) I - q (O+ A O+ + O- A O-)", _facts_xz_reduction),
        _entry("antisym-shift", "MAP", [_P("n", 2, 2, 8, True), _P("s", 0.3, None, None)],
               lambda n, s: antisym_shift(n, s), "A + s (A - A^t)", _facts_antisym_shift),
        _entry("unital-norm-one", "MAP", [], lambda: unital_norm_one(),
               "[[d, (b-c)/2], [(c-b)/2, d]]", _facts_unital_norm_one),
        _entry("trace-preserving-skew", "MAP", [], lambda: trace_preserving_skew(),
               "[[0, (b-c)/2], [(c-b)/2, a+d]]", _facts_trace_preserving_skew),
        _entry("skew-mix", "MAP", [_P("t", 0.8, 0.0, 1.0)], lambda t: skew_mix(t),
               "three-dimensional unital trace-preserving family", _facts_skew_mix),
        _entry("skew-mix-ext", "MAP", [_P("n", 4, 4, 8, True), _P("t", 0.8, 0.0, 1.0)],
               lambda n, t: skew_mix_ext(n, t), "skew mix on a corner, identity on the complement",
               _facts_skew_mix_ext),
        _entry("choi-map", "MAP", [_P("n", 3, 2, 8, True)], lambda n: choi_map(n),
               "(n-1) Tr(X) I - X", _facts_choi_map),
        _entry("antisymmetrizer", "MAP", [_P("n", 2, 2, 8, True)], lambda n: antisymmetrizer(n),
               "X - X^t", _facts_antisymmetrizer),
        _entry("werner", "STATE", [_P("n", 2, 2, 8, True), _P("s", 0.6, 0.0, 1.0)],
               lambda n, s: werner(n, s), "symmetric/antisymmetric projector mixture", _facts_werner),
        _entry("xz-pair-state", "STATE", [_P("block", 1, 1, 4, True)], lambda block: xz_pair_state(block),
               "(vec O+ vec O+^t + vec O- vec O-^t) / (4 block)", _facts_xz_pair_state),
        _entry("sigma-y-pair-state", "STATE", [_P("n", 2, 2, 8, True), _P("m", 2, 2, 8, True)],
               lambda n, m: sigma_y_pair_state(n, m), "I (x) I + A (x) A with imaginary Pauli A",
               _facts_sigma_y_pair_state),
        _entry("xz-pair-channel", "MAP", [_P("block", 1, 1, 4, True)], lambda block: xz_pair_channel(block),
               "X -> O+ X O+ + O- X O-", _facts_xz_pair_channel),
        _entry("idempotent-ppt", "MAP", [], lambda: idempotent_ppt(),
               "Choi matrix (1/2)[[I, g], [-g, I]]", _facts_idempotent_ppt),
        _entry("sym-depol", "MAP", [_P("n", 2, 2, 8, True), _P("lam", 0.4, -1.0, 1.0)],
               lambda n, lam: sym_depol(n, lam), "(1-lam) Tr(X) I/n + lam (X + X^t)/2", _facts_sym_depol),
        _entry("upb-tiles", "STATE", [], lambda: upb_tiles(),
               "complement of the five-tile product basis", _facts_upb_tiles, enabled=False),
    ]
}


def list_ids(include_disabled: bool = True) -> list[str]:
    return [k for k, e in ENTRIES.items() if include_disabled or e.enabled_by_default]


def _get(id_: str) -> GalleryEntry:
    try:
        return ENTRIES[id_]
    except KeyError:
        raise UnknownEntryError(f"unknown gallery id {id_!r}") from None


def build(id_: str, **params):
    entry = _get(id_)
    return entry.builder(**entry.resolve(params))


def expected_facts(id_: str, **params) -> list[Fact]:
    entry = _get(id_)
    return entry.facts(entry.resolve(params))


@dataclass
class EntryReport:
    id: str
    params: dict
    results: list = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> int:
        return sum(not r.passed for r in self.results)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "params": self.params,
            "passed": self.passed,
            "facts": [r.to_json() for r in self.results],
        }


def run_entry(id_: str, cfg: SolverConfig = SolverConfig(), **params) -> EntryReport:
    entry = _get(id_)
    resolved = entry.resolve(params)
    obj = entry.builder(**resolved)
    report = EntryReport(id_, resolved)
    for fact in entry.facts(resolved):
        try:
            passed, measured = fact.evaluate(obj, resolved, cfg)
        except Exception as exc:  # a crashing check is a failed fact, not a crashed run
            passed, measured = False, f"error: {type(exc).__name__}: {exc}"
        report.results.append(FactResult(fact.name, bool(passed), measured, fact.expected, fact.source, fact.anchor))
    return report


def manifest() -> dict:
    return {
        "entries": [
            {
                "id": e.id,
                "kind": e.kind,
                "params": [p.to_json() for p in e.params],
                "anchor": e.anchor,
                "enabledByDefault": e.enabled_by_default,
            }
            for e in ENTRIES.values()
        ]
    }


def load_manifest() -> dict:
    """The shipped ``gallery.json``."""
    text = resources.files("realmaps").joinpath("gallery.json").read_text()
    return json.loads(text)
