"""Entanglement-breaking classification and iteration experiments.

A map breaks entanglement at level p exactly when its Choi matrix lies in
``SEP_p``; an explicit decomposition ``C = sum vec(A_j) vec(A_j)*`` turns into
Kraus operators ``A_j^t`` of rank at most p.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from realmaps import chanrep, cones
from realmaps.chanrep import LinearMapRep
from realmaps.errors import DimensionError, NotIPTError
from realmaps.matkit import BipartiteOperator, Field, matrix_to_json, partial_transpose_left
from realmaps.posit import SolverConfig, Status, Verdict, is_completely_positive

logger = logging.getLogger(__name__)

__all__ = [
    "EBVerdictBundle",
    "MapClassification",
    "IPTSquaredReport",
    "IterationStep",
    "IterationTrace",
    "check_eb_p",
    "classify_map_ppt_ipt",
    "antisymmetric_annihilation",
    "run_ipt_squared_probe",
    "iterate_and_track",
    "distance_to_eb_surrogates",
    "transpose_commutation_defects",
    "random_cp_map",
    "random_ipt_cp_map",
]


@dataclass
class EBVerdictBundle:
    field: Field
    p: int
    choi_sep: Verdict
    kraus_certificate: Optional[list] = None
    kraus_residual: Optional[float] = None
    composition_probe: list = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "field": self.field.value,
            "p": self.p,
            "choiSep": self.choi_sep.to_json(),
            "krausRankCertificate": None
            if self.kraus_certificate is None
            else [matrix_to_json(k) for k in self.kraus_certificate],
            "krausResidual": self.kraus_residual,
            "compositionProbe": [{"map": name, "minEigenvalue": val} for name, val in self.composition_probe],
        }


def _probe_family(m: int, field: Field, p: int):
    from realmaps import gallery

    return gallery.witness_battery(m, m, field, p)


def check_eb_p(
    phi: LinearMapRep,
    p: int,
    field=Field.REAL,
    cfg: SolverConfig = SolverConfig(),
    probe_family=None,
    search: bool = True,
) -> EBVerdictBundle:
    """Entanglement p-breaking over ``field`` via the Choi matrix."""
    field = Field.parse(field)
    if field is Field.REAL and phi.field is Field.COMPLEX:
        raise ValueError("a complex map cannot be tested over the real field")
    cls = cones.classify_state(phi.choi, [(field, p)], cfg, search=search)
    verdict = cls.verdict(field, p)
    bundle = EBVerdictBundle(field, p, verdict)

    dec = cls.decompositions.get((field, p))
    if verdict.certified and dec is not None:
        kraus = [np.asarray(a).T.copy() for a in dec.factors]
        rebuilt = chanrep.from_kraus(kraus, Field.COMPLEX if any(np.iscomplexobj(k) for k in kraus) else Field.REAL)
        residual = float(np.linalg.norm(rebuilt.choi.matrix - phi.choi.matrix))
        bundle.kraus_certificate = kraus
        bundle.kraus_residual = residual

    target = phi if field is Field.REAL or phi.field is Field.COMPLEX else chanrep.complexify(phi)
    family = (probe_family or _probe_family)(phi.dim_out, field, p)
    for name, psi in family:
        comp = chanrep.compose(psi, target)
        c = comp.choi.matrix
        lam = float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0])
        bundle.composition_probe.append((name, lam))
    return bundle


# -- PPT / IPT ----------------------------------------------------------------------


def antisymmetric_annihilation(phi: LinearMapRep) -> float:
    """Largest ``||Phi(E_ij - E_ji)||_F`` over ``i < j``."""
    imgs = chanrep.basis_images(phi)
    worst = 0.0
    for i in range(phi.dim_in):
        for j in range(i + 1, phi.dim_in):
            worst = max(worst, float(np.linalg.norm(imgs[i, j] - imgs[j, i])))
    return worst


@dataclass
class MapClassification:
    cp: Verdict
    ppt: Verdict
    ipt: bool
    ipt_defect: float
    asym_annihilation: float

    def to_json(self) -> dict:
        return {
            "cp": self.cp.to_json(),
            "ppt": self.ppt.to_json(),
            "ipt": self.ipt,
            "iptDefect": self.ipt_defect,
            "asymAnnihilation": self.asym_annihilation,
        }


def classify_map_ppt_ipt(phi: LinearMapRep, tol: float = 1e-9) -> MapClassification:
    cfg = SolverConfig(psd_tol=tol)
    cp = is_completely_positive(phi, cfg)
    ppt = cones.is_ppt(phi.choi, tol)
    ipt, defect = cones.is_ipt(phi.choi, tol)
    asym = antisymmetric_annihilation(phi)
    if cp.certified and ipt != (asym <= tol * max(1.0, float(np.linalg.norm(phi.choi.matrix)))):
        logger.warning("IPT defect %.3e and antisymmetric image %.3e disagree", defect, asym)
    return MapClassification(cp, ppt, ipt, defect, asym)


def transpose_commutation_defects(phi: LinearMapRep) -> tuple[float, float]:
    """``(||tau o Phi - Phi||, ||Phi o tau - Phi||)`` on Choi matrices, for the complexification."""
    target = chanrep.complexify(phi) if phi.field is Field.REAL else phi
    t_out = chanrep.transpose_map(phi.dim_out, Field.COMPLEX)
    t_in = chanrep.transpose_map(phi.dim_in, Field.COMPLEX)
    c = target.choi.matrix
    left = chanrep.compose(t_out, target).choi.matrix
    right = chanrep.compose(target, t_in).choi.matrix
    return float(np.linalg.norm(left - c)), float(np.linalg.norm(right - c))


# -- IPT-squared probe --------------------------------------------------------------


@dataclass
class IPTSquaredReport:
    real: EBVerdictBundle
    complex: EBVerdictBundle
    potential_counterexample: bool

    def to_json(self) -> dict:
        return {
            "real": self.real.to_json(),
            "complex": self.complex.to_json(),
            "potentialCounterexample": self.potential_counterexample,
        }


def run_ipt_squared_probe(phi: LinearMapRep, cfg: SolverConfig = SolverConfig()) -> IPTSquaredReport:
    """Test whether the square of a CP IPT map breaks entanglement.

    Raises:
        NotIPTError: if the map is not certified CP or not IPT.
    """
    cls = classify_map_ppt_ipt(phi, cfg.psd_tol)
    if not cls.cp.certified or not cls.ipt:
        raise NotIPTError(
            f"probe needs a CP IPT map (cp={cls.cp.status.value}, iptDefect={cls.ipt_defect:.3e})"
        )
    square = chanrep.compose(phi, phi)
    real = check_eb_p(square, 1, Field.REAL, cfg)
    cplx = check_eb_p(square, 1, Field.COMPLEX, cfg)
    flagged = real.choi_sep.refuted or cplx.choi_sep.refuted
    if flagged:
        logger.error(
            "POTENTIAL COUNTEREXAMPLE: the square of a CP IPT map was refuted as entanglement "
            "breaking (real=%s, complex=%s)",
            real.choi_sep.status.value,
            cplx.choi_sep.status.value,
        )
    return IPTSquaredReport(real, cplx, flagged)


# -- iteration ----------------------------------------------------------------------


def _sep_residual(choi: BipartiteOperator, cfg: SolverConfig) -> Optional[float]:
    if not cones.is_psd(choi, cfg.psd_tol).certified:
        return None
    _, res = cones.search_sep_decomposition(choi, 1, Field.REAL, cfg)
    return res


def distance_to_eb_surrogates(phi: LinearMapRep, cfg: SolverConfig = SolverConfig()) -> dict:
    """Bracket the distance from the Choi matrix to the real separable cone.

    ``iptDefect`` and ``pptNegativity`` vanish on every real separable Choi
    matrix; ``sepUpperBound`` is the residual of the best decomposition found.
    """
    c = phi.choi
    pt = partial_transpose_left(c).matrix
    ipt_half = float(np.linalg.norm(c.matrix - pt)) / 2
    lam = float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])
    return {
        "iptDefect": ipt_half,
        "pptNegativity": abs(min(0.0, lam)),
        "sepUpperBound": _sep_residual(c, cfg),
    }


@dataclass
class IterationStep:
    k: int
    ipt_defect: float
    ppt_min_eigenvalue: float
    sep_residual: Optional[float]
    sep_certified: bool
    sep_status: str

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "iptDefect": self.ipt_defect,
            "pptMinEigenvalue": self.ppt_min_eigenvalue,
            "sepResidual": self.sep_residual,
            "sepCertified": self.sep_certified,
            "sepStatus": self.sep_status,
        }


@dataclass
class IterationTrace:
    steps: list = dc_field(default_factory=list)
    maps: list = dc_field(default_factory=list, repr=False)

    def first_certified(self) -> Optional[int]:
        """Smallest k after which every recorded step is certified."""
        k_star = None
        for step in reversed(self.steps):
            if not step.sep_certified:
                break
            k_star = step.k
        return k_star

    def to_json_lines(self) -> list[dict]:
        return [s.to_json() for s in self.steps]


def iterate_and_track(
    phi: LinearMapRep, k_max: int, cfg: SolverConfig = SolverConfig(), keep_maps: bool = False
) -> IterationTrace:
    """Diagnostics of the powers ``Phi^1 .. Phi^k_max`` against real entanglement breaking."""
    if phi.dim_in != phi.dim_out:
        raise DimensionError("iteration needs a map M_n -> M_n")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    trace = IterationTrace()
    power = phi
    for k in range(1, k_max + 1):
        if k > 1:
            power = chanrep.compose(phi, power)
        c = power.choi
        diag = chanrep.diagnostics(power)
        cls = cones.classify_state(c, [(Field.REAL, 1)], cfg)
        verdict = cls.verdict(Field.REAL, 1)
        dec = cls.decompositions.get((Field.REAL, 1))
        if dec is not None:
            residual = dec.residual(c)
        else:
            residual = _sep_residual(c, cfg)
        trace.steps.append(
            IterationStep(k, diag.ipt_defect, diag.ppt_min_eigenvalue, residual, verdict.certified, verdict.status.value)
        )
        if keep_maps:
            trace.maps.append(power)
    return trace


# -- random families ----------------------------------------------------------------


def random_cp_map(n: int, m: int, rng: np.random.Generator, kraus_count: int = 3) -> LinearMapRep:
    ops = [rng.standard_normal((m, n)) for _ in range(kraus_count)]
    return chanrep.from_kraus(ops, Field.REAL)


def _sym_psd(rng, d):
    g = rng.standard_normal((d, d))
    return g @ g.T


def random_ipt_cp_map(n: int, m: int, rng: np.random.Generator, terms: int = 3) -> LinearMapRep:
    """A CP map whose Choi matrix is invariant under partial transpose.

    Sum of products of symmetric PSD matrices plus a partial-transpose
    symmetrized Gaussian correction, scaled so the result stays positive
    definite; the correction makes the Choi matrix generically not a sum of
    real products.
    """
    base = sum(np.kron(_sym_psd(rng, n), _sym_psd(rng, m)) for _ in range(terms))
    base = base + np.eye(n * m)
    g = rng.standard_normal((n * m, n * m))
    g = g @ g.T
    op = BipartiteOperator(n, m, Field.REAL, g)
    corr = 0.5 * (g + partial_transpose_left(op).matrix)
    lo = float(np.linalg.eigvalsh(base)[0])
    neg = max(1e-12, -float(np.linalg.eigvalsh(corr)[0]))
    eps = min(1.0, 0.5 * lo / neg)
    choi = base + eps * corr
    choi = 0.5 * (choi + choi.T)
    choi = choi / np.trace(choi) * n
    # exact PT symmetrization removes rounding drift
    choi = 0.5 * (choi + partial_transpose_left(BipartiteOperator(n, m, Field.REAL, choi)).matrix)
    return chanrep.from_choi(choi, n, m, Field.REAL)
