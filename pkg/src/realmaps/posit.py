"""Positivity verdicts for linear maps via the Choi quadratic form.

A map is p-positive iff its Choi matrix ``C`` is Hermitian and
``<V, C V> >= 0`` for every V of Schmidt rank at most p.  Refutation comes
from a seesaw minimizer over factored vectors ``V = vec(X Y^T)``; it returns
upper bounds on the constrained minimum, so it can refute but never certify
below full Schmidt rank.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import asdict, dataclass
from typing import Any, Optional

import numpy as np

from realmaps import chanrep
from realmaps.chanrep import LinearMapRep
from realmaps.matkit import (
    BipartiteOperator,
    Field,
    hermitian_defect,
    matrix_to_json,
    unvec,
    vec,
)

logger = logging.getLogger(__name__)

__all__ = [
    "Status",
    "CertifiedBy",
    "SolverConfig",
    "FactoredVector",
    "RealPair",
    "Verdict",
    "AdjointCheck",
    "commutes_with_adjoint",
    "is_completely_positive",
    "seesaw_min_schmidt",
    "check_p_positive",
    "check_complexification_p_positive",
    "check_corollary_2p_consistency",
    "estimate_map_norm",
    "quadratic_value",
]


class Status(enum.Enum):
    CERTIFIED = "CERTIFIED"
    REFUTED = "REFUTED"
    UNDECIDED = "UNDECIDED"


class CertifiedBy(enum.Enum):
    CHOI_PSD = "CHOI_PSD"
    FULL_SCHMIDT = "FULL_SCHMIDT"
    ANALYTIC = "ANALYTIC"
    DECOMPOSITION = "DECOMPOSITION"


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 20240611
    restarts: int = 64
    max_iters: int = 500
    convergence_tol: float = 1e-10
    psd_tol: float = 1e-9
    rank_tol: float = 1e-9
    decomp_tol: float = 1e-8
    decomp_restarts: int = 4
    decomp_iters: int = 3000
    max_factors: Optional[int] = None

    def __post_init__(self):
        for name in ("restarts", "max_iters", "decomp_restarts", "decomp_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("convergence_tol", "psd_tol", "rank_tol", "decomp_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_factors is not None and self.max_factors < 1:
            raise ValueError("max_factors must be positive")

    def replace(self, **kw) -> "SolverConfig":
        data = asdict(self)
        data.update(kw)
        return SolverConfig(**data)

    def rng(self, *stream: int) -> np.random.Generator:
        """Independent generator for the stream ``(seed, *stream)``."""
        return np.random.default_rng([self.seed & (2**64 - 1), *stream])

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class FactoredVector:
    """``V = sum_k X[:, k] (x) Y[:, k]``, so ``unvec(V) = X Y^T``."""

    X: np.ndarray
    Y: np.ndarray

    @property
    def field(self) -> Field:
        cplx = np.iscomplexobj(self.X) or np.iscomplexobj(self.Y)
        return Field.COMPLEX if cplx else Field.REAL

    def vector(self) -> np.ndarray:
        return vec(self.X @ self.Y.T)

    def to_json(self) -> dict:
        return {"kind": "factored", "X": matrix_to_json(self.X), "Y": matrix_to_json(self.Y)}


@dataclass(frozen=True, eq=False)
class RealPair:
    """Real matrices with ``<vec X, C vec X> + <vec Y, C vec Y> < 0`` and low ``rank(X + iY)``."""

    X: np.ndarray
    Y: np.ndarray

    def to_json(self) -> dict:
        return {"kind": "real_pair", "X": matrix_to_json(self.X), "Y": matrix_to_json(self.Y)}


@dataclass
class Verdict:
    status: Status
    witness: Any = None
    certified_by: Optional[CertifiedBy] = None
    value: Optional[float] = None
    trials: int = 0
    note: str = ""

    def __post_init__(self):
        if self.status is Status.REFUTED and self.witness is None:
            raise ValueError("a REFUTED verdict needs a witness")
        if self.status is Status.CERTIFIED and self.certified_by is None:
            raise ValueError("a CERTIFIED verdict needs certified_by")

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "value": None if self.value is None else float(self.value),
            "witness": _witness_json(self.witness),
            "certifiedBy": None if self.certified_by is None else self.certified_by.value,
            "trials": self.trials,
            "note": self.note,
        }


def _witness_json(w):
    if w is None:
        return None
    if hasattr(w, "to_json"):
        return w.to_json()
    if isinstance(w, np.ndarray):
        return matrix_to_json(w)
    if isinstance(w, dict):
        return {k: _witness_json(v) if isinstance(v, np.ndarray) else v for k, v in w.items()}
    return w


def _tol(cfg_tol: float, c: np.ndarray) -> float:
    return cfg_tol * max(1.0, float(np.linalg.norm(c, 2)))


def quadratic_value(c, v) -> float:
    """``<v, C v>`` for a unit-normalized ``v``."""
    c = c.matrix if isinstance(c, BipartiteOperator) else np.asarray(c)
    if isinstance(v, FactoredVector):
        v = v.vector()
    v = np.asarray(v).reshape(-1)
    v = v / np.linalg.norm(v)
    return float(np.real(np.vdot(v, c @ v)))


# -- adjoint commutation ----------------------------------------------------------


@dataclass
class AdjointCheck:
    commutes: bool
    choi_defect: float
    worst_basis_violation: float

    def __bool__(self) -> bool:
        return self.commutes


def commutes_with_adjoint(phi: LinearMapRep, tol: float = 1e-9) -> AdjointCheck:
    """Hermitian Choi test, cross-checked on a basis.

    For real maps the basis check uses the symmetric/antisymmetric split: the
    image of ``E_ij + E_ji`` must be symmetric and that of ``E_ij - E_ji``
    antisymmetric.  For complex maps it compares ``Phi(E_ji)`` with
    ``Phi(E_ij)*``.
    """
    defect = hermitian_defect(phi.choi.matrix)
    imgs = chanrep.basis_images(phi)
    n = phi.dim_in
    worst = 0.0
    if phi.field is Field.REAL:
        for i in range(n):
            for j in range(i, n):
                sym = imgs[i, j] + imgs[j, i]
                worst = max(worst, float(np.linalg.norm(sym - sym.T)) / 2)
                if i != j:
                    asym = imgs[i, j] - imgs[j, i]
                    worst = max(worst, float(np.linalg.norm(asym + asym.T)) / 2)
    else:
        for i in range(n):
            for j in range(n):
                worst = max(worst, float(np.linalg.norm(imgs[j, i] - imgs[i, j].conj().T)))
    scale = max(1.0, float(np.linalg.norm(phi.choi.matrix)))
    return AdjointCheck(defect <= tol * scale, defect, worst)


# -- seesaw -----------------------------------------------------------------------


def _orthonormalize(a: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(a)
    return q


def _min_eig_batched(mats: np.ndarray):
    mats = 0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2)))
    w, v = np.linalg.eigh(mats)
    return w[:, 0], v[:, :, 0]


def seesaw_min_schmidt(c: BipartiteOperator, p: int, cfg: SolverConfig = SolverConfig()):
    """Minimize ``<V, C V>`` over unit V of Schmidt rank at most ``p``.

    All restarts run as one batch.  Each half-step fixes one factor,
    orthonormalizes it and takes the smallest eigenvector of the compressed
    form, so the value is non-increasing along every restart.

    Returns:
        ``(value, FactoredVector)`` of the best restart; ties go to the lowest
        restart index.
    """
    n, m = c.dim_left, c.dim_right
    if not 1 <= p <= min(n, m):
        raise ValueError(f"p must lie in [1, {min(n, m)}], got {p}")
    cmat = np.asarray(c.matrix)
    if hermitian_defect(cmat) > _tol(cfg.psd_tol, cmat):
        raise ValueError("seesaw needs a Hermitian operator")
    cplx = c.field is Field.COMPLEX
    dtype = np.complex128 if cplx else np.float64
    c4 = (0.5 * (cmat + cmat.conj().T)).reshape(n, m, n, m)
    if not cplx:
        c4 = c4.real

    r = cfg.restarts
    y = np.empty((r, m, p), dtype=dtype)
    for k in range(r):
        g = cfg.rng(k)
        block = g.standard_normal((m, p))
        if cplx:
            block = block + 1j * g.standard_normal((m, p))
        y[k] = block

    values = np.full(r, np.inf)
    x = np.zeros((r, n, p), dtype=dtype)
    for it in range(cfg.max_iters):
        qy = _orthonormalize(y)
        # compressed form over vec(X): M[(i,a),(j,b)] = sum_kl conj(qy[k,a]) C[i,k,j,l] qy[l,b]
        mx = np.einsum("rka,ikjl,rlb->riajb", qy.conj(), c4, qy).reshape(r, n * p, n * p)
        _, vx = _min_eig_batched(mx)
        x = vx.reshape(r, n, p)
        qx = _orthonormalize(x)
        # compressed form over vec(Y^T): M[(a,k),(b,l)] = sum_ij conj(qx[i,a]) C[i,k,j,l] qx[j,b]
        my = np.einsum("ria,ikjl,rjb->rakbl", qx.conj(), c4, qx).reshape(r, p * m, p * m)
        wy, vy = _min_eig_batched(my)
        y = np.swapaxes(vy.reshape(r, p, m), 1, 2)
        x = qx
        improvement = values - wy
        values = wy
        if it > 0 and np.all(improvement < cfg.convergence_tol):
            break

    # recompute from the factors so the reported value is exactly re-checkable
    final = np.array([quadratic_value(cmat, vec(x[k] @ y[k].T)) for k in range(r)])
    best = int(np.argmin(final))
    vx_best, vy_best = x[best], y[best]
    norm = np.linalg.norm(vx_best @ vy_best.T)
    fv = FactoredVector(vx_best, vy_best / norm)
    return float(final[best]), fv


# -- verdicts ---------------------------------------------------------------------


def _non_hermitian_refutation(cmat: np.ndarray, trials: int = 0) -> Verdict:
    skew = 0.5 * (cmat - cmat.conj().T)
    return Verdict(
        Status.REFUTED,
        witness=skew,
        value=float(np.linalg.norm(skew) * 2),
        trials=trials,
        note="Choi matrix is not Hermitian: the map does not commute with the adjoint",
    )


def is_completely_positive(phi: LinearMapRep, cfg: SolverConfig = SolverConfig()) -> Verdict:
    cmat = phi.choi.matrix
    tol = _tol(cfg.psd_tol, cmat)
    if hermitian_defect(cmat) > tol:
        return _non_hermitian_refutation(cmat)
    w, v = np.linalg.eigh(0.5 * (cmat + cmat.conj().T))
    if w[0] >= -tol:
        return Verdict(Status.CERTIFIED, certified_by=CertifiedBy.CHOI_PSD, value=float(w[0]))
    return Verdict(Status.REFUTED, witness=v[:, 0], value=float(w[0]), note="negative Choi eigenvalue")


def check_p_positive(phi: LinearMapRep, p: int, cfg: SolverConfig = SolverConfig()) -> Verdict:
    cmat = phi.choi.matrix
    n, m = phi.dim_in, phi.dim_out
    tol = _tol(cfg.psd_tol, cmat)
    if hermitian_defect(cmat) > tol:
        return _non_hermitian_refutation(cmat)
    w, v = np.linalg.eigh(0.5 * (cmat + cmat.conj().T))
    if w[0] >= -tol:
        tag = CertifiedBy.FULL_SCHMIDT if p >= min(n, m) else CertifiedBy.CHOI_PSD
        return Verdict(Status.CERTIFIED, certified_by=tag, value=float(w[0]))
    if p >= min(n, m):
        return Verdict(
            Status.REFUTED, witness=v[:, 0], value=float(w[0]), note="full Schmidt rank eigenvector"
        )
    value, fv = seesaw_min_schmidt(phi.choi, p, cfg)
    if value < -tol:
        return Verdict(Status.REFUTED, witness=fv, value=value, trials=cfg.restarts)
    return Verdict(Status.UNDECIDED, value=value, trials=cfg.restarts)


def check_complexification_p_positive(
    phi: LinearMapRep, p: int, cfg: SolverConfig = SolverConfig()
) -> Verdict:
    """p-positivity of the complexification, with refutations as real pairs."""
    if phi.field is not Field.REAL:
        raise ValueError("expected a REAL map")
    verdict = check_p_positive(chanrep.complexify(phi), p, cfg)
    if verdict.refuted and verdict.witness is not None:
        w = verdict.witness
        n, m = phi.dim_in, phi.dim_out
        if isinstance(w, FactoredVector):
            vv = w.vector()
            a = unvec(vv / np.linalg.norm(vv), n, m)
            verdict.witness = RealPair(a.real.copy(), a.imag.copy())
        elif isinstance(w, np.ndarray) and w.ndim == 1:
            a = unvec(w / np.linalg.norm(w), n, m)
            verdict.witness = RealPair(np.real(a).copy(), np.imag(a).copy())
    return verdict


def real_pair_value(c, pair: RealPair) -> float:
    """``<vec X, C vec X> + <vec Y, C vec Y>`` for a real symmetric ``C``."""
    cmat = c.matrix if isinstance(c, BipartiteOperator) else np.asarray(c)
    x, y = vec(pair.X), vec(pair.Y)
    return float(np.real(x @ cmat @ x + y @ cmat @ y))


@dataclass
class CorollaryReport:
    real_2p: Verdict
    complex_p: Verdict
    consistent: bool

    def to_json(self) -> dict:
        return {
            "real2p": self.real_2p.to_json(),
            "complexP": self.complex_p.to_json(),
            "consistent": self.consistent,
        }


def check_corollary_2p_consistency(
    phi: LinearMapRep, p: int, cfg: SolverConfig = SolverConfig()
) -> CorollaryReport:
    """If the real map is not refuted at level 2p, its complexification must not be refuted at p."""
    n, m = phi.dim_in, phi.dim_out
    real_v = check_p_positive(phi, min(2 * p, min(n, m)), cfg)
    cplx_v = check_complexification_p_positive(phi, p, cfg)
    consistent = real_v.refuted or not cplx_v.refuted
    if not consistent:
        logger.warning("2p-positivity implication violated numerically: %s / %s", real_v, cplx_v)
    return CorollaryReport(real_v, cplx_v, consistent)


# -- norm estimation ----------------------------------------------------------------


def _polar(a: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def _haar(rng: np.random.Generator, n: int, cplx: bool) -> np.ndarray:
    z = rng.standard_normal((n, n))
    if cplx:
        z = z + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def estimate_map_norm(
    phi: LinearMapRep, cfg: SolverConfig = SolverConfig(), ascent_steps: int = 200
) -> tuple[float, float]:
    """Lower bound on ``sup_{||A|| <= 1} ||Phi(A)||`` and the value ``||Phi(I)||``.

    Samples orthogonal (real) or unitary (complex) starting points, the
    identity included, and climbs with ``U <- polar(grad)``; each step
    maximizes the linearization of the convex objective over the unit ball,
    so the objective never decreases.
    """
    n = phi.dim_in
    cplx = phi.field is Field.COMPLEX
    dual = chanrep.adjoint_map(phi)
    eye = np.eye(n, dtype=complex if cplx else float)
    at_identity = float(np.linalg.norm(chanrep.apply(phi, eye), 2))

    def climb(u: np.ndarray) -> float:
        best = float(np.linalg.norm(chanrep.apply(phi, u), 2))
        for _ in range(ascent_steps):
            out = chanrep.apply(phi, u)
            lu, s, rvh = np.linalg.svd(out)
            left, right = lu[:, 0], rvh[0].conj()
            # d/dU of Re(left* Phi(U) right) is the dual map applied to right left*
            g = chanrep.apply(dual, np.outer(right, left.conj()))
            target = g.conj().T if cplx else g.T
            new_u = _polar(target)
            val = float(np.linalg.norm(chanrep.apply(phi, new_u), 2))
            if val <= best + 1e-14:
                break
            u, best = new_u, val
        return best

    best = climb(eye)
    for k in range(cfg.restarts):
        best = max(best, climb(_haar(cfg.rng(1_000_003, k), n, cplx)))
    return best, at_identity
