"""Bipartite PSD matrices against the separability cones.

``SEP_p(K)`` is the cone of sums ``vec(A) vec(A)*`` with ``rank(A) <= p`` and
K-valued factors.  Membership is certified constructively (an explicit factor
list, or the identity-ball criterion) and refuted by necessary conditions
(PSD, IPT, PPT) or by a witness map with ``Tr(C_Phi P) < 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from realmaps import chanrep
from realmaps.chanrep import LinearMapRep
from realmaps.errors import DimensionError
from realmaps.matkit import (
    BipartiteOperator,
    Field,
    hermitian_defect,
    matrix_to_json,
    partial_transpose_left,
    vec,
)
from realmaps.posit import CertifiedBy, SolverConfig, Status, Verdict

logger = logging.getLogger(__name__)

__all__ = [
    "SepDecomposition",
    "StateClassification",
    "is_psd",
    "is_ppt",
    "is_ipt",
    "witness_value",
    "horodecki_check",
    "search_sep_decomposition",
    "gurvits_barnum_certify",
    "ball_threshold",
    "eigen_decomposition",
    "complex_to_real_doubled",
    "complex_ipt_to_real",
    "classify_state",
]


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(a, 2)))


# -- decompositions ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SepDecomposition:
    """``P = sum_j vec(A_j) vec(A_j)*`` with every ``rank(A_j) <= rank_bound``.

    With ``conjugate_paired`` set, factors come in consecutive pairs
    ``(A, conj(A))`` so the sum is real even though the factors are not.
    """

    dim_left: int
    dim_right: int
    rank_bound: int
    field: Field
    factors: tuple
    conjugate_paired: bool = False

    def reconstruct(self) -> np.ndarray:
        n, m = self.dim_left, self.dim_right
        dtype = self.field.dtype
        out = np.zeros((n * m, n * m), dtype=dtype)
        for a in self.factors:
            v = vec(a)
            out += np.outer(v, v.conj())
        if self.conjugate_paired:
            out = out.real
        return out

    def residual(self, p) -> float:
        target = p.matrix if isinstance(p, BipartiteOperator) else np.asarray(p)
        return float(np.linalg.norm(target - self.reconstruct()))

    def max_rank(self, tol: float = 1e-9) -> int:
        best = 0
        for a in self.factors:
            s = np.linalg.svd(a, compute_uv=False)
            if s.size and s[0] > 0:
                best = max(best, int(np.sum(s > tol * s[0])))
        return best

    def verify(self, p, tol: float, rank_tol: float = 1e-9) -> bool:
        return self.residual(p) <= tol and self.max_rank(rank_tol) <= self.rank_bound

    def to_json(self) -> dict:
        return {
            "rankBound": self.rank_bound,
            "field": self.field.value,
            "dimLeft": self.dim_left,
            "dimRight": self.dim_right,
            "conjugatePaired": self.conjugate_paired,
            "factors": [matrix_to_json(a) for a in self.factors],
        }


def eigen_decomposition(p: BipartiteOperator, tol: float = 1e-12) -> SepDecomposition:
    """Spectral factors ``sqrt(lambda) v``; full Schmidt rank, so always valid at ``p = min(n, m)``."""
    n, m = p.dim_left, p.dim_right
    w, v = np.linalg.eigh(0.5 * (p.matrix + p.matrix.conj().T))
    keep = w > tol * max(1.0, float(np.max(np.abs(w))))
    factors = tuple((np.sqrt(w[k]) * v[:, k]).reshape(n, m) for k in np.flatnonzero(keep))
    return SepDecomposition(n, m, min(n, m), p.field, factors)


def complex_to_real_doubled(dec: SepDecomposition) -> SepDecomposition:
    """Complex rank-p factors of a real matrix become real rank-2p factors.

    ``Re(v v*) = Re(v) Re(v)^t + Im(v) Im(v)^t`` and each part has rank <= 2p.
    """
    factors = []
    for a in dec.factors:
        a = np.asarray(a)
        for part in (a.real, a.imag):
            if np.any(part != 0):
                factors.append(np.array(part, dtype=float))
    n, m = dec.dim_left, dec.dim_right
    return SepDecomposition(n, m, min(2 * dec.rank_bound, n, m), Field.REAL, tuple(factors))


def complex_ipt_to_real(dec: SepDecomposition) -> SepDecomposition:
    """Complex product factors of a real IPT matrix become real product factors.

    For a real IPT target, ``P = sum Re(x x*) (x) Re(y y*)``; each
    ``Re(x x*) = u u^t + w w^t`` with ``x = u + i w``, giving four real
    products per complex factor.  The caller must check the result, since
    the identity only holds when the target really is IPT.
    """
    if dec.rank_bound != 1:
        raise ValueError("product-factor conversion needs rank bound 1")
    factors = []
    for a in dec.factors:
        u, s, vh = np.linalg.svd(np.asarray(a, dtype=complex))
        if s[0] == 0:
            continue
        x = np.sqrt(s[0]) * u[:, 0]
        y = np.sqrt(s[0]) * vh[0]  # a = x y^t
        for xp in (x.real, x.imag):
            for yp in (y.real, y.imag):
                if np.any(xp != 0) and np.any(yp != 0):
                    factors.append(np.outer(xp, yp))
    return SepDecomposition(dec.dim_left, dec.dim_right, 1, Field.REAL, tuple(factors))


# -- necessary conditions -----------------------------------------------------------


def is_psd(p, tol: float = 1e-9) -> Verdict:
    mat = p.matrix if isinstance(p, BipartiteOperator) else np.asarray(p)
    scale = _scale(mat)
    defect = hermitian_defect(mat)
    if defect > tol * scale:
        skew = 0.5 * (mat - mat.conj().T)
        return Verdict(Status.REFUTED, witness=skew, value=defect, note="not Hermitian")
    w, v = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    if w[0] >= -tol * scale:
        return Verdict(Status.CERTIFIED, certified_by=CertifiedBy.CHOI_PSD, value=float(w[0]))
    return Verdict(Status.REFUTED, witness=v[:, 0], value=float(w[0]))


def is_ppt(p: BipartiteOperator, tol: float = 1e-9) -> Verdict:
    pt = partial_transpose_left(p).matrix
    scale = _scale(pt)
    if hermitian_defect(pt) > tol * scale:
        return Verdict(
            Status.REFUTED,
            witness=0.5 * (pt - pt.conj().T),
            value=hermitian_defect(pt),
            note="partial transpose is not Hermitian",
        )
    w, v = np.linalg.eigh(0.5 * (pt + pt.conj().T))
    if w[0] >= -tol * scale:
        return Verdict(Status.CERTIFIED, certified_by=CertifiedBy.CHOI_PSD, value=float(w[0]))
    return Verdict(Status.REFUTED, witness=v[:, 0], value=float(w[0]))


def is_ipt(p: BipartiteOperator, tol: float = 1e-9) -> tuple[bool, float]:
    defect = float(np.linalg.norm(p.matrix - partial_transpose_left(p).matrix))
    return defect <= tol * max(1.0, float(np.linalg.norm(p.matrix))), defect


def witness_value(phi: LinearMapRep, p: BipartiteOperator) -> float:
    """``Tr(C_Phi P)``."""
    if (phi.dim_in, phi.dim_out) != (p.dim_left, p.dim_right):
        raise DimensionError(
            f"map {phi.dim_in}->{phi.dim_out} cannot test a state on {p.dim_left}x{p.dim_right}"
        )
    return float(np.real(np.sum(phi.choi.matrix * p.matrix.T)))


def _apply_left(phi: LinearMapRep, p: BipartiteOperator) -> np.ndarray:
    """``(Phi (x) id)(P)``."""
    n, m = p.dim_left, p.dim_right
    r = phi.dim_out
    out = np.einsum("ikjl,iajb->kalb", phi.choi.shape4, p.shape4)
    return out.reshape(r * m, r * m)


def horodecki_check(
    p: BipartiteOperator,
    maps: Sequence[tuple[str, LinearMapRep]],
    tol: float = 1e-9,
) -> Verdict:
    """Refute separability if some listed map, tensored with the identity, breaks positivity.

    The listed maps must have the positivity level the caller is testing;
    the family is never exhaustive, so a clean pass is UNDECIDED.
    """
    worst = np.inf
    for name, phi in maps:
        if phi.dim_in != p.dim_left:
            raise DimensionError(f"map {name!r} acts on M_{phi.dim_in}, state has left factor {p.dim_left}")
        out = _apply_left(phi, p)
        w, v = np.linalg.eigh(0.5 * (out + out.conj().T))
        worst = min(worst, float(w[0]))
        if w[0] < -tol * _scale(out):
            return Verdict(
                Status.REFUTED,
                witness={"map": name, "eigenvector": v[:, 0]},
                value=float(w[0]),
                note=f"map {name} tensored with the identity is not positive on the state",
            )
    return Verdict(Status.UNDECIDED, value=None if worst == np.inf else worst)


# -- decomposition search -----------------------------------------------------------


def _polar(a: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(a, full_matrices=False)
    return u @ vh


def _truncate(g: np.ndarray, n: int, m: int, p: int) -> np.ndarray:
    """Project every column of ``g`` to Schmidt rank ``p``."""
    k = g.shape[1]
    mats = g.T.reshape(k, n, m)
    u, s, vh = np.linalg.svd(mats, full_matrices=False)
    s[:, p:] = 0
    out = np.einsum("kia,ka,kaj->kij", u, s, vh)
    return out.reshape(k, n * m).T


def _gram(g: np.ndarray) -> np.ndarray:
    return g @ g.conj().T


def _polish(target, xs, ys, cplx, max_nfev):
    """Least-squares refinement of ``sum_k vec(X_k Y_k^t) vec(X_k Y_k^t)*``."""
    k, n, p = xs.shape
    m = ys.shape[1]
    iu = np.triu_indices(n * m)
    nx, ny = xs.size, ys.size

    def unpack(z):
        if cplx:
            half = z.size // 2
            z = z[:half] + 1j * z[half:]
        return z[:nx].reshape(k, n, p), z[nx:].reshape(k, m, p)

    def resid(z):
        x, y = unpack(z)
        g = np.einsum("kia,kja->kij", x, y).reshape(k, n * m).T
        d = (_gram(g) - target)[iu]
        return np.concatenate([d.real, d.imag]) if cplx else d

    z0 = np.concatenate([xs.ravel(), ys.ravel()])
    if cplx:
        z0 = np.concatenate([z0.real, z0.imag])
    sol = least_squares(resid, z0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    x, y = unpack(sol.x)
    return np.einsum("kia,kja->kij", x, y)


def _split_rank(mats: np.ndarray, p: int):
    u, s, vh = np.linalg.svd(mats, full_matrices=False)
    root = np.sqrt(s[:, :p])
    xs = u[:, :, :p] * root[:, None, :]
    ys = np.swapaxes(vh[:, :p, :], 1, 2) * root[:, None, :]
    return xs, ys


def search_sep_decomposition(
    p: BipartiteOperator,
    rank_bound: int,
    field=Field.COMPLEX,
    cfg: SolverConfig = SolverConfig(),
) -> tuple[Optional[SepDecomposition], float]:
    """Look for an explicit rank-bounded decomposition of a PSD matrix.

    Writes ``P = R R*`` and alternates between truncating the columns of
    ``R U`` to Schmidt rank ``rank_bound`` and re-fitting the co-isometry
    ``U`` by an orthogonal Procrustes step; the best restart is then polished
    by nonlinear least squares on the factors.

    Returns:
        ``(decomposition or None, best residual)``.  ``None`` is silence,
        not a refutation.
    """
    field = Field.parse(field)
    n, m = p.dim_left, p.dim_right
    if not 1 <= rank_bound:
        raise ValueError("rank bound must be positive")
    rank_bound = min(rank_bound, n, m)
    target = 0.5 * (p.matrix + p.matrix.conj().T)
    cplx = field is Field.COMPLEX
    if not cplx and np.iscomplexobj(target) and np.any(target.imag != 0):
        return None, float(np.linalg.norm(target.imag))
    if not cplx:
        target = target.real
    scale = max(1.0, float(np.linalg.norm(target)))
    tol = cfg.decomp_tol * scale

    if rank_bound >= min(n, m):
        dec = eigen_decomposition(BipartiteOperator(n, m, field, target))
        return dec, dec.residual(target)

    w, v = np.linalg.eigh(target)
    keep = w > cfg.rank_tol * max(float(w[-1]), 0.0)
    if not np.any(keep):
        return SepDecomposition(n, m, rank_bound, field, ()), float(np.linalg.norm(target))
    root = v[:, keep] * np.sqrt(w[keep])
    r = root.shape[1]
    k = cfg.max_factors or (n * m) ** 2
    k = max(k, r)

    best_res, best_g = np.inf, None
    for restart in range(cfg.decomp_restarts):
        rng = cfg.rng(2_000_003, restart)
        u0 = rng.standard_normal((r, k))
        if cplx:
            u0 = u0 + 1j * rng.standard_normal((r, k))
        u = _polar(u0)
        res = np.inf
        g = None
        stall = 0
        for _ in range(cfg.decomp_iters):
            g = _truncate(root @ u, n, m, rank_bound)
            new_res = float(np.linalg.norm(target - _gram(g)))
            u = _polar(root.conj().T @ g)
            if new_res < res * (1 - 1e-6):
                stall = 0
            else:
                stall += 1
            res = min(res, new_res)
            if res <= tol or stall > 50:
                break
        if res < best_res:
            best_res, best_g = res, g
        if best_res <= tol:
            break

    mats = best_g.T.reshape(-1, n, m)
    # polish toward round-off even when the projection phase already met the tolerance
    if best_res > 1e-13 * scale:
        xs, ys = _split_rank(mats, rank_bound)
        polished = _polish(target, xs, ys, cplx, max_nfev=200 * (n + m))
        res = float(np.linalg.norm(target - _gram(polished.reshape(-1, n * m).T)))
        if res < best_res:
            mats, best_res = polished, res
    if best_res > tol:
        return None, best_res

    mats = [a for a in mats if np.linalg.norm(a) > 1e-14 * scale]
    paired = False
    real_target = not np.iscomplexobj(p.matrix) or bool(np.all(p.matrix.imag == 0))
    if cplx and real_target:
        # real target, complex factors: symmetrize into conjugate pairs
        root2 = 1 / np.sqrt(2.0)
        mats = [f for a in mats for f in (a * root2, a.conj() * root2)]
        paired = True
    dec = SepDecomposition(n, m, rank_bound, field, tuple(np.asarray(a) for a in mats), paired)
    res = dec.residual(target)
    if res > tol or dec.max_rank(cfg.rank_tol) > rank_bound:
        return None, res
    return dec, res


# -- ball certificate ---------------------------------------------------------------


def gurvits_barnum_certify(p: BipartiteOperator) -> Verdict:
    """Certify complex separability when ``P = c (I + H)`` with ``||H||_F <= 1``."""
    mat = p.matrix
    dim = p.size
    c = float(np.real(np.trace(mat))) / dim
    if c <= 0:
        return Verdict(Status.UNDECIDED, value=None, note="trace is not positive")
    h = mat / c - np.eye(dim)
    radius = float(np.linalg.norm(h))
    if radius <= 1.0 and hermitian_defect(mat) <= 1e-12 * _scale(mat):
        return Verdict(
            Status.CERTIFIED,
            certified_by=CertifiedBy.ANALYTIC,
            value=radius,
            note="inside the separable ball around the identity",
        )
    return Verdict(Status.UNDECIDED, value=radius, note="outside the separable ball")


def ball_threshold(a) -> float:
    """Largest ``s`` with ``(1-s) I + s A`` inside the separable ball: ``1 / (1 + ||A||_F)``."""
    return 1.0 / (1.0 + float(np.linalg.norm(np.asarray(a))))


# -- orchestration ------------------------------------------------------------------


@dataclass
class StateClassification:
    dim_left: int
    dim_right: int
    psd: Verdict
    ppt: Verdict
    ipt_defect: float
    sep: dict = dc_field(default_factory=dict)
    decompositions: dict = dc_field(default_factory=dict)
    witnesses: list = dc_field(default_factory=list)

    def verdict(self, field, p: int) -> Verdict:
        return self.sep[(Field.parse(field), p)]

    def to_json(self) -> dict:
        return {
            "dimLeft": self.dim_left,
            "dimRight": self.dim_right,
            "psd": self.psd.to_json(),
            "ppt": self.ppt.to_json(),
            "iptDefect": self.ipt_defect,
            "sep": [
                {"field": f.value, "p": p, "verdict": v.to_json()} for (f, p), v in self.sep.items()
            ],
            "witnesses": [{"map": name, "value": val} for name, val in self.witnesses],
        }


def _default_battery(n: int, m: int, field: Field, p: int):
    from realmaps import gallery

    return gallery.witness_battery(n, m, field, p)


def classify_state(
    p: BipartiteOperator,
    requests: Sequence[tuple] = ((Field.REAL, 1), (Field.COMPLEX, 1)),
    cfg: SolverConfig = SolverConfig(),
    battery=None,
    search: bool = True,
) -> StateClassification:
    """Classify ``P`` against ``SEP_p`` for each requested ``(field, p)``.

    Args:
        battery: callable ``(n, m, field, p) -> [(name, map)]`` returning maps
            that are known to be p-positive over ``field``; defaults to the
            gallery witness family.
        search: run the decomposition search when cheaper tests are silent.
    """
    n, m = p.dim_left, p.dim_right
    battery = battery or _default_battery
    tol = cfg.psd_tol
    psd = is_psd(p, tol)
    ppt = is_ppt(p, tol) if hermitian_defect(p.matrix) <= tol * _scale(p.matrix) else Verdict(
        Status.UNDECIDED, note="not Hermitian"
    )
    ipt, ipt_defect = is_ipt(p, tol)
    out = StateClassification(n, m, psd, ppt, ipt_defect)
    is_real = not np.iscomplexobj(p.matrix) or bool(np.all(p.matrix.imag == 0))

    for req_field, rank in requests:
        req_field = Field.parse(req_field)
        key = (req_field, int(rank))
        out.sep[key] = _classify_one(p, req_field, int(rank), cfg, psd, ppt, ipt, ipt_defect, is_real,
                                     battery, search, out)
    return out


def _classify_one(p, field, rank, cfg, psd, ppt, ipt, ipt_defect, is_real, battery, search, out):
    n, m = p.dim_left, p.dim_right
    tol = cfg.psd_tol
    if rank < 1:
        raise ValueError("p must be positive")
    if not psd.certified:
        if psd.refuted:
            return Verdict(Status.REFUTED, witness=psd.witness, value=psd.value, note="not PSD")
        return Verdict(Status.UNDECIDED, note="PSD status undecided")
    if field is Field.REAL and not is_real:
        imag = np.imag(p.matrix)
        return Verdict(Status.REFUTED, witness=imag, value=float(np.linalg.norm(imag)),
                       note="matrix has a nonzero imaginary part")
    if rank >= min(n, m):
        dec = eigen_decomposition(p)
        out.decompositions[(field, rank)] = dec
        return Verdict(Status.CERTIFIED, witness=None, certified_by=CertifiedBy.FULL_SCHMIDT,
                       value=dec.residual(p), note="every PSD matrix is separable at full Schmidt rank")

    # necessary conditions at the product level
    if rank == 1 and field is Field.REAL and not ipt:
        pt_gap = p.matrix - partial_transpose_left(p).matrix
        return Verdict(Status.REFUTED, witness=pt_gap, value=ipt_defect,
                       note="not invariant under partial transpose")
    if rank == 1 and field is Field.COMPLEX and ppt.refuted:
        return Verdict(Status.REFUTED, witness=ppt.witness, value=ppt.value,
                       note="partial transpose is not PSD")

    # ball certificate: complex, and real at rank 1 once IPT holds
    ball = gurvits_barnum_certify(p)
    if ball.certified and (field is Field.COMPLEX or (rank == 1 and ipt and is_real)):
        note = "separable ball around the identity"
        if field is Field.REAL:
            note += ", real by partial-transpose invariance"
        return Verdict(Status.CERTIFIED, certified_by=CertifiedBy.ANALYTIC, value=ball.value, note=note)

    # witness battery
    for name, phi in battery(n, m, field, rank):
        val = witness_value(phi, p)
        out.witnesses.append((name, val))
        if val < -tol * _scale(p.matrix):
            return Verdict(Status.REFUTED, witness={"map": name, "choi": phi.choi.matrix}, value=val,
                           note=f"witness {name} is negative on the state")

    if not search:
        return Verdict(Status.UNDECIDED, note="decomposition search skipped")

    best = np.inf
    dec, res = search_sep_decomposition(p, rank, field, cfg)
    best = min(best, res)
    if dec is None and field is Field.REAL and rank == 1 and ipt:
        cdec, cres = search_sep_decomposition(p, 1, Field.COMPLEX, cfg)
        if cdec is not None:
            rdec = complex_ipt_to_real(cdec)
            rres = rdec.residual(p)
            best = min(best, rres)
            if rdec.verify(p, cfg.decomp_tol * _scale(p.matrix), cfg.rank_tol):
                dec = rdec
    if dec is not None:
        out.decompositions[(field, rank)] = dec
        return Verdict(Status.CERTIFIED, certified_by=CertifiedBy.DECOMPOSITION, value=dec.residual(p),
                       note=f"{len(dec.factors)} explicit factors")
    return Verdict(Status.UNDECIDED, value=best, note="no certificate or refutation found")
