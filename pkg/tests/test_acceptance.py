"""Acceptance gate: one PASS/FAIL line per criterion is printed in the terminal summary.

Every check runs at its stated tolerance. Two checks are known to be red:
the real product-vector bound for the xz reduction (1b) and the Werner
partial-transpose formula at s = 1 (5); both are kept as stated.
"""

import math
import time

import numpy as np
import pytest

from oracles import partial_transpose_by_loops, real_product_min_grid
from realmaps import chanrep, cones, ebreak, gallery, posit
from realmaps.matkit import BipartiteOperator, Field, partial_transpose_left, unvec, vec
from realmaps.posit import SolverConfig, Status

SQRT2 = math.sqrt(2.0)
CFG = SolverConfig()

# 1
GAMMA_Q = 0.6
GAMMA_COMPLEX_TARGET = 1 - 2 * GAMMA_Q  # -0.2
GAMMA_REAL_TARGET = 1 - GAMMA_Q * SQRT2  # 0.151472...
GAMMA_REAL_ORACLE = 0.4  # frozen output of real_product_min_grid on the same Choi matrix


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# -- criterion 1 -----------------------------------------------------------------------


@pytest.fixture(scope="module")
def gamma_runs():
    phi = gallery.xz_reduction(1, GAMMA_Q)
    (cplx, real), elapsed = _timed(lambda: (
        posit.check_complexification_p_positive(phi, 1, CFG),
        posit.seesaw_min_schmidt(phi.choi, 1, CFG)[0],
    ))
    return phi, cplx, real, elapsed


@pytest.mark.criterion(1, "complexification refuted at 1 - 2q")
def test_c1_complexification_refuted(gamma_runs):
    _, cplx, _, _ = gamma_runs
    assert cplx.status is Status.REFUTED
    assert abs(cplx.value - GAMMA_COMPLEX_TARGET) <= 1e-6


@pytest.mark.criterion(1, "real seesaw at 1 - q sqrt 2")
def test_c1_real_seesaw_bound(gamma_runs):
    phi, _, real, _ = gamma_runs
    # the independent grid oracle agrees with the seesaw, not with the stated target
    assert abs(real_product_min_grid(phi.choi_matrix) - GAMMA_REAL_ORACLE) < 1e-12
    assert abs(real - GAMMA_REAL_TARGET) <= 1e-6


@pytest.mark.criterion(1, "runtime under 5 s")
def test_c1_runtime(gamma_runs):
    assert gamma_runs[3] < 5.0


# -- criterion 2 -----------------------------------------------------------------------


@pytest.mark.criterion(2, "ladder 1 - q l for n = 4")
def test_c2_reduction_ladder():
    n = 4

    def run():
        return {q: [posit.seesaw_min_schmidt(gallery.reduction_q(n, q).choi, l, CFG)[0] for l in range(1, n + 1)]
                for q in (0.3, 0.6, 1.0)}

    vals, elapsed = _timed(run)
    for q, row in vals.items():
        np.testing.assert_allclose(row, [1 - q * l for l in range(1, n + 1)], rtol=0, atol=1e-7)
    assert elapsed < 10.0


# -- criterion 3 -----------------------------------------------------------------------


@pytest.mark.criterion(3, "eigenvalue -2s of the complexified shift")
def test_c3_antisym_shift_eigenvalue():
    s = 0.3
    p = np.array([[1, 1j], [-1j, 1]])
    out = chanrep.apply(chanrep.complexify(gallery.antisym_shift(2, s)), p)
    assert abs(np.linalg.eigvalsh(out)[0] - (-2 * s)) <= 1e-9


# -- criterion 4 -----------------------------------------------------------------------


@pytest.fixture(scope="module")
def skew_scan():
    ts = np.linspace(0.69, 0.73, 50)
    cfg = CFG.replace(restarts=256)
    statuses, elapsed = _timed(
        lambda: [posit.check_complexification_p_positive(gallery.skew_mix(float(t)), 1, cfg).status for t in ts])
    return ts, statuses, elapsed


@pytest.mark.criterion(4, "single flip of the refutation verdict near 1/sqrt 2")
def test_c4_threshold_flip(skew_scan):
    ts, statuses, _ = skew_scan
    refuted = [s is Status.REFUTED for s in statuses]
    flips = [i for i in range(1, len(ts)) if refuted[i] != refuted[i - 1]]
    assert len(flips) == 1 and not refuted[0] and refuted[-1]
    lo, hi = ts[flips[0] - 1], ts[flips[0]]
    assert 0.7071 - 1e-3 <= lo and hi <= 0.7072 + 1e-3


@pytest.mark.criterion(4, "map norm equals 1")
@pytest.mark.parametrize("t", [0.25, 0.71, 1.0])
def test_c4_norm_one(t):
    low, _ = posit.estimate_map_norm(gallery.skew_mix(t), CFG)
    assert abs(low - 1.0) <= 1e-6


@pytest.mark.criterion(4, "scan runtime under 60 s")
def test_c4_runtime(skew_scan):
    assert skew_scan[2] < 60.0


# -- criterion 5 -----------------------------------------------------------------------


@pytest.mark.criterion(5, "PT minimum equals (2s - 1)/2")
@pytest.mark.parametrize("s", [0.0, 0.3, 0.5, 0.75, 1.0])
def test_c5_werner_pt_min(s):
    state = gallery.werner(2, s)
    pt = partial_transpose_by_loops(state.matrix, 2, 2)
    np.testing.assert_array_equal(pt, partial_transpose_left(state).matrix)
    assert abs(np.linalg.eigvalsh(pt)[0] - (2 * s - 1) / 2) <= 1e-10


@pytest.mark.criterion(5, "IPT exactly at s = 3/4")
def test_c5_ipt_defects():
    assert cones.is_ipt(gallery.werner(2, 0.75))[1] < 1e-12
    for s in (0.6, 0.9):
        assert cones.is_ipt(gallery.werner(2, s))[1] > 0.01


@pytest.mark.criterion(5, "complex separability certified on [1/2, 1]")
@pytest.mark.parametrize("s", [0.5, 0.75, 1.0])
def test_c5_complex_sep(s):
    cls = cones.classify_state(gallery.werner(2, s), [(Field.COMPLEX, 1)], CFG)
    assert cls.verdict(Field.COMPLEX, 1).certified


# -- criterion 6 -----------------------------------------------------------------------


@pytest.mark.criterion(6, "explicit conjugate-pair factors")
def test_c6_explicit_factors():
    state = gallery.xz_pair_state(1)
    dec = gallery.xz_pair_state_factors(1)
    assert dec.conjugate_paired and dec.max_rank() == 1
    assert dec.residual(state) <= 1e-10


@pytest.mark.criterion(6, "real separability refuted with witness value -0.2")
def test_c6_real_sep_refuted():
    state = gallery.xz_pair_state(1)
    val = cones.witness_value(gallery.xz_reduction(1, GAMMA_Q), state)
    assert abs(val - GAMMA_COMPLEX_TARGET) <= 1e-9
    assert cones.classify_state(state, [(Field.REAL, 1)], CFG).verdict(Field.REAL, 1).refuted


@pytest.mark.criterion(6, "witness map passes the 1-positivity gate")
def test_c6_witness_gate():
    v = posit.check_p_positive(gallery.xz_reduction(1, GAMMA_Q), 1, CFG.replace(restarts=256))
    assert not v.refuted


# -- criterion 7 -----------------------------------------------------------------------


@pytest.mark.criterion(7, "idempotent")
def test_c7_idempotent():
    phi = gallery.idempotent_ppt()
    assert np.max(np.abs(chanrep.compose(phi, phi).choi_matrix - phi.choi_matrix)) <= 1e-12


@pytest.mark.criterion(7, "PPT certified")
def test_c7_ppt():
    v = cones.is_ppt(gallery.idempotent_ppt().choi)
    assert v.certified and v.value >= -1e-12


@pytest.mark.criterion(7, "IPT defect 2")
def test_c7_ipt_defect():
    assert abs(cones.is_ipt(gallery.idempotent_ppt().choi)[1] - 2.0) <= 1e-12


@pytest.mark.criterion(7, "complex EB through the A+/A- pair")
def test_c7_complex_eb():
    phi = gallery.idempotent_ppt()
    dec = gallery.idempotent_ppt_factors()
    assert dec.residual(phi.choi) <= 1e-10 and dec.max_rank() == 1
    kraus = [a.T for a in dec.factors]
    assert np.linalg.norm(chanrep.from_kraus(kraus).choi_matrix - phi.choi_matrix) <= 1e-10
    assert ebreak.check_eb_p(phi, 1, Field.COMPLEX, CFG).choi_sep.certified


@pytest.mark.criterion(7, "real EB refuted")
def test_c7_real_eb_refuted():
    assert ebreak.check_eb_p(gallery.idempotent_ppt(), 1, Field.REAL, CFG).choi_sep.refuted


# -- criterion 8 -----------------------------------------------------------------------


@pytest.mark.criterion(8, "two product terms sum to 2P and P is not IPT")
@pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (3, 3)])
def test_c8_sigma_y_identity(n, m):
    state = gallery.sigma_y_pair_state(n, m)
    total = sum(np.kron(a, b) for a, b in gallery.sigma_y_pair_terms(n, m))
    assert np.max(np.abs(total - 2 * state.matrix)) <= 1e-12
    assert cones.is_ipt(state)[1] > 0


# -- criterion 9 -----------------------------------------------------------------------


def _random_map(rng, n, m, cplx):
    c = rng.standard_normal((n * m, n * m))
    if cplx:
        c = c + 1j * rng.standard_normal((n * m, n * m))
    return chanrep.from_choi(c, n, m)


@pytest.mark.criterion(9, "Choi inversion and adjoint identities on 200 maps")
def test_c9_choi_and_adjoint():
    rng = np.random.default_rng(9)
    worst = 0.0
    for k in range(200):
        n, m, cplx = int(rng.integers(1, 5)), int(rng.integers(1, 5)), bool(k % 2)
        phi = _random_map(rng, n, m, cplx)
        rebuilt = chanrep.from_basis_images(chanrep.basis_images(phi))
        worst = max(worst, float(np.max(np.abs(rebuilt.choi_matrix - phi.choi_matrix))))
        a = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if cplx else 0)
        b = rng.standard_normal((m, m)) + (1j * rng.standard_normal((m, m)) if cplx else 0)
        lhs = np.trace(chanrep.apply(phi, a) @ b)
        rhs = np.trace(a @ chanrep.apply(chanrep.adjoint_map(phi), b))
        worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-10


@pytest.mark.criterion(9, "vec/unvec round trips and PT involution")
def test_c9_vec_and_pt():
    rng = np.random.default_rng(19)
    for _ in range(200):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        a = rng.standard_normal((n, m))
        np.testing.assert_array_equal(unvec(vec(a), n, m), a)
        p = BipartiteOperator(n, m, Field.REAL, rng.standard_normal((n * m, n * m)))
        np.testing.assert_array_equal(partial_transpose_left(partial_transpose_left(p)).matrix, p.matrix)


@pytest.mark.criterion(9, "IPT iff antisymmetric annihilation on 200 CP maps")
def test_c9_ipt_equivalence():
    rng = np.random.default_rng(29)
    for k in range(200):
        n = int(rng.integers(2, 5))
        phi = ebreak.random_ipt_cp_map(n, n, rng) if k % 2 else ebreak.random_cp_map(n, n, rng)
        cls = ebreak.classify_map_ppt_ipt(phi)
        annihilates = cls.asym_annihilation <= 1e-9 * max(1.0, float(np.linalg.norm(phi.choi_matrix)))
        assert cls.cp.certified and cls.ipt == annihilates == bool(k % 2)


@pytest.mark.criterion(9, "pointedness probe on X - X^t")
@pytest.mark.parametrize("sign", [1, -1])
def test_c9_pointedness(sign):
    base = gallery.antisymmetrizer(2)
    phi = chanrep.from_choi(sign * base.choi_matrix, 2, 2)
    assert not posit.check_p_positive(phi, 1, CFG).refuted
    v = posit.check_p_positive(phi, 2, CFG)
    assert v.refuted and abs(v.value + 1) <= 1e-7


# -- criterion 10 ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def depol_trace():
    return _timed(lambda: ebreak.iterate_and_track(gallery.sym_depol(2, 0.9), 40, CFG, keep_maps=True))


@pytest.mark.criterion(10, "sym-depol powers stay IPT and become certified")
def test_c10_sym_depol_trace(depol_trace):
    trace, _ = depol_trace
    assert all(step.ipt_defect <= 1e-12 for step in trace.steps)
    k_star = trace.first_certified()
    assert k_star is not None and k_star <= 40


@pytest.mark.criterion(10, "powers match the family at lam^k")
def test_c10_powers_match_family(depol_trace):
    trace, _ = depol_trace
    for k, power in enumerate(trace.maps, start=1):
        assert np.max(np.abs(power.choi_matrix - gallery.sym_depol(2, 0.9**k).choi_matrix)) <= 1e-12


@pytest.mark.criterion(10, "idempotent map trace is constant")
def test_c10_idempotent_trace():
    trace = ebreak.iterate_and_track(gallery.idempotent_ppt(), 10, CFG, keep_maps=True)
    first = trace.steps[0]
    for step, power in zip(trace.steps, trace.maps):
        assert np.max(np.abs(power.choi_matrix - trace.maps[0].choi_matrix)) <= 1e-12
        assert abs(step.ipt_defect - first.ipt_defect) <= 1e-12
        assert abs(step.ppt_min_eigenvalue - first.ppt_min_eigenvalue) <= 1e-12
        assert step.sep_status == first.sep_status and step.sep_certified == first.sep_certified


@pytest.mark.criterion(10, "runtime under 60 s")
def test_c10_runtime(depol_trace):
    assert depol_trace[1] < 60.0
