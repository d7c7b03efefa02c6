import numpy as np
import pytest

from realmaps import chanrep, gallery
from realmaps.errors import ParamRangeError, UnknownEntryError
from realmaps.matkit import Field


@pytest.mark.parametrize("entry_id", gallery.list_ids(include_disabled=False))
def test_entry_facts_pass(entry_id):
    report = gallery.run_entry(entry_id)
    failed = [(r.name, r.measured) for r in report.results if not r.passed]
    assert not failed


@pytest.mark.parametrize("entry_id,params", [
    ("reduction-q", {"n": 4, "q": 0.3}),
    ("reduction-q", {"n": 4, "q": 1.0}),
    ("xz-reduction", {"block": 2, "q": 1 / np.sqrt(12)}),
    ("antisym-shift", {"n": 3, "s": -0.4}),
    ("skew-mix", {"t": 0.5}),
    ("skew-mix-ext", {"n": 5, "t": 0.9}),
    ("choi-map", {"n": 4}),
    ("werner", {"n": 3, "s": 2 / 3}),
    ("werner", {"n": 2, "s": 0.2}),
    ("xz-pair-state", {"block": 2}),
    ("sigma-y-pair-state", {"n": 3, "m": 3}),
    ("sym-depol", {"n": 3, "lam": 0.3}),
])
def test_entry_facts_pass_with_params(entry_id, params):
    report = gallery.run_entry(entry_id, **params)
    assert report.passed, [(r.name, r.measured) for r in report.results if not r.passed]


@pytest.mark.slow
def test_disabled_entry_runs():
    assert gallery.run_entry("upb-tiles").passed


def test_every_fact_has_a_source():
    for entry_id in gallery.list_ids():
        for fact in gallery.expected_facts(entry_id):
            assert fact.source in {"closed_form", "oracle", "trivial"}
            assert fact.anchor


def test_shipped_manifest_is_current():
    assert gallery.load_manifest() == gallery.manifest()
    ids = [e["id"] for e in gallery.manifest()["entries"]]
    assert len(ids) == len(set(ids)) == 18


def test_unknown_id_and_param_range():
    with pytest.raises(UnknownEntryError):
        gallery.build("no-such-entry")
    with pytest.raises(ParamRangeError):
        gallery.build("werner", s=1.5)
    with pytest.raises(ParamRangeError):
        gallery.build("reduction-q", n=2.5)
    with pytest.raises(ParamRangeError):
        gallery.build("werner", bogus=1)


def test_failing_fact_is_reported_not_raised(monkeypatch):
    def broken(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(gallery.posit, "commutes_with_adjoint", broken)
    report = gallery.run_entry("pospres-nonadjoint")
    assert not report.passed
    assert any("boom" in str(r.measured) for r in report.results)


def test_witness_battery_levels():
    names = [n for n, _ in gallery.witness_battery(4, 4, Field.REAL, 1)]
    assert names[0] == "transpose" and any(n.startswith("xz-reduction") for n in names)
    assert all(not n.startswith("xz") for n, _ in gallery.witness_battery(4, 4, Field.COMPLEX, 1))
    assert gallery.witness_battery(3, 4, Field.REAL, 1) == []
    for _, phi in gallery.witness_battery(4, 4, Field.COMPLEX, 2):
        assert phi.field is Field.COMPLEX


def test_o_plus_o_minus_real_span_is_invertible():
    # det(cos O+ + sin O-) = -1 for every angle on M_2
    for th in np.linspace(0, 2 * np.pi, 13):
        m = np.cos(th) * gallery.o_plus(1) + np.sin(th) * gallery.o_minus(1)
        assert abs(np.linalg.det(m) + 1) < 1e-12


def test_antisym_shift_choi_is_symmetric():
    c = gallery.antisym_shift(3, 0.7).choi_matrix
    np.testing.assert_array_equal(c, c.T)


def test_skew_mix_witness_image():
    t = 0.8
    x = np.array([[1, 1j, 0], [-1j, 1, 0], [0, 0, 0]])
    out = chanrep.apply(chanrep.complexify(gallery.skew_mix(t)), x)
    assert out[2, 2] == 1.0
    assert abs(np.linalg.eigvalsh(out)[0] - (1 - t * np.sqrt(2)) / 2) < 1e-12
