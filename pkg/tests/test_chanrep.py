import numpy as np
import pytest

from oracles import choi_by_loops, sym_depol_apply
from realmaps import chanrep, gallery
from realmaps.chanrep import Side
from realmaps.errors import AlreadyComplexError, DimensionError
from realmaps.matkit import Field, vec

GAMMA = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _random_map(rng, n, m, cplx=False):
    c = rng.standard_normal((n * m, n * m))
    if cplx:
        c = c + 1j * rng.standard_normal((n * m, n * m))
    return chanrep.from_choi(c, n, m)


def test_choi_matches_loop_oracle(rng):
    a, b = rng.standard_normal((3, 2)), rng.standard_normal((3, 2))
    fn = lambda x: a @ x @ b.T + np.trace(x) * np.eye(3)
    phi = chanrep.from_function(fn, 2)
    np.testing.assert_allclose(phi.choi_matrix, choi_by_loops(fn, 2, 3), atol=1e-14)


def test_identity_and_transpose_choi():
    n = 3
    omega = np.outer(vec(np.eye(n)), vec(np.eye(n)))
    np.testing.assert_array_equal(chanrep.identity_map(n).choi_matrix, omega)
    np.testing.assert_array_equal(chanrep.transpose_map(n).choi_matrix,
                                  choi_by_loops(lambda x: x.T, n, n))


def test_choi_inversion_on_random_maps(rng):
    worst = 0.0
    for k in range(200):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        phi = _random_map(rng, n, m, cplx=bool(k % 2))
        x = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if k % 2 else 0)
        by_units = sum(x[i, j] * chanrep.apply(phi, np.eye(n)[:, [i]] @ np.eye(n)[[j], :])
                       for i in range(n) for j in range(n))
        worst = max(worst, float(np.max(np.abs(chanrep.apply(phi, x) - by_units))))
        rebuilt = chanrep.from_basis_images(chanrep.basis_images(phi))
        worst = max(worst, float(np.max(np.abs(rebuilt.choi_matrix - phi.choi_matrix))))
    assert worst <= 1e-10


def test_adjoint_identity_on_random_maps(rng):
    worst = 0.0
    for k in range(200):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        cplx = bool(k % 2)
        phi = _random_map(rng, n, m, cplx)
        dual = chanrep.adjoint_map(phi)
        a = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if cplx else 0)
        b = rng.standard_normal((m, m)) + (1j * rng.standard_normal((m, m)) if cplx else 0)
        lhs = np.trace(chanrep.apply(phi, a) @ b)
        rhs = np.trace(a @ chanrep.apply(dual, b))
        worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs)))
        worst = max(worst, float(np.max(np.abs(chanrep.adjoint_map(dual).choi_matrix - phi.choi_matrix))))
    assert worst <= 1e-10


def test_kraus_application(rng):
    ops = [rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2)) for _ in range(3)]
    phi = chanrep.from_kraus(ops)
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    direct = sum(c @ x @ c.conj().T for c in ops)
    np.testing.assert_allclose(chanrep.apply(phi, x), direct, atol=1e-13)
    assert np.linalg.eigvalsh(phi.choi_matrix)[0] >= -1e-12


def test_kraus_adjoint_daggers_operators(rng):
    ops = [rng.standard_normal((3, 2))]
    dual = chanrep.adjoint_map(chanrep.from_kraus(ops))
    np.testing.assert_allclose(dual.kraus[0], ops[0].T)
    np.testing.assert_allclose(dual.choi_matrix, chanrep.from_kraus([ops[0].T]).choi_matrix, atol=1e-14)


def test_compose_matches_sequential_application(rng):
    phi, psi = _random_map(rng, 3, 2), _random_map(rng, 2, 3)
    comp = chanrep.compose(phi, psi)
    x = rng.standard_normal((2, 2))
    np.testing.assert_allclose(chanrep.apply(comp, x), chanrep.apply(phi, chanrep.apply(psi, x)), atol=1e-12)
    with pytest.raises(DimensionError):
        chanrep.compose(phi, _random_map(rng, 2, 2))


@pytest.mark.parametrize("side", [Side.LEFT, Side.RIGHT])
def test_tensor_with_identity(side, rng):
    n, m, r = 2, 3, 2
    phi = _random_map(rng, n, m)
    big = chanrep.tensor_with_identity(phi, r, side)
    a, b = rng.standard_normal((n, n)), rng.standard_normal((r, r))
    if side is Side.RIGHT:
        got, want = chanrep.apply(big, np.kron(a, b)), np.kron(chanrep.apply(phi, a), b)
    else:
        got, want = chanrep.apply(big, np.kron(b, a)), np.kron(b, chanrep.apply(phi, a))
    np.testing.assert_allclose(got, want, atol=1e-13)


def test_iterate_and_sym_depol_semigroup(rng):
    phi = gallery.sym_depol(3, 0.7)
    x = rng.standard_normal((3, 3))
    want = x
    for _ in range(4):
        want = sym_depol_apply(want, 0.7)
    np.testing.assert_allclose(chanrep.apply(chanrep.iterate(phi, 4), x), want, atol=1e-13)
    np.testing.assert_allclose(chanrep.iterate(phi, 4).choi_matrix, gallery.sym_depol(3, 0.7**4).choi_matrix,
                               atol=1e-13)
    with pytest.raises(ValueError):
        chanrep.iterate(phi, 0)


def test_complexify_shares_choi_and_rejects_twice(rng):
    phi = _random_map(rng, 2, 2)
    c = chanrep.complexify(phi)
    assert c.field is Field.COMPLEX
    np.testing.assert_array_equal(c.choi_matrix.real, phi.choi_matrix)
    x, y = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    np.testing.assert_allclose(chanrep.apply(c, x + 1j * y), chanrep.apply(phi, x) + 1j * chanrep.apply(phi, y))
    with pytest.raises(AlreadyComplexError):
        chanrep.complexify(c)
    with pytest.raises(ValueError):
        chanrep.apply(phi, 1j * np.eye(2))


def test_diagnostics_idempotent_ppt():
    d = chanrep.diagnostics(gallery.idempotent_ppt())
    assert d.hermitian_choi_defect == 0
    assert abs(d.ipt_defect - 2.0) <= 1e-12
    assert abs(d.ppt_min_eigenvalue) <= 1e-12
    assert d.unital_defect <= 1e-12 and d.trace_defect <= 1e-12


def test_map_json_roundtrip(rng):
    phi = chanrep.from_kraus([rng.standard_normal((2, 3)), rng.standard_normal((2, 3))])
    back = chanrep.map_from_json(chanrep.map_to_json(phi))
    np.testing.assert_array_equal(back.choi_matrix, phi.choi_matrix)
    assert len(back.kraus) == 2
    with pytest.raises(ValueError):
        chanrep.map_from_json({"dimIn": 2})
    obj = chanrep.map_to_json(phi)
    obj["dimIn"] = 2
    with pytest.raises(DimensionError):
        chanrep.map_from_json(obj)


def test_wrong_input_shape(rng):
    with pytest.raises(DimensionError):
        chanrep.apply(_random_map(rng, 2, 2), np.eye(3))
