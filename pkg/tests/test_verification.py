import numpy as np
import pytest

from fwlab.landau import ModelParams, analytic_spectrum, build_dirac_hamiltonian, make_record
from fwlab.verification import (
    DEFAULT_TOLERANCES,
    ResidualReport,
    all_passed,
    compare_spectra,
    failed,
    oracle_diagonalize,
    phase_distance,
    random_hermitian,
    run_suite,
)

DEFAULT = ModelParams(m=1.0, e=1.0, H=0.1, mu_prime=0.001, n_max=64)


def test_report_passed_flag():
    assert ResidualReport("x", 1e-9, 1e-8).passed
    assert not ResidualReport("x", 1e-7, 1e-8).passed
    assert not ResidualReport("x", float("nan"), 1e-8).passed
    assert ResidualReport("x", 1e-8, 1e-8).passed


def test_oracle_ground_level():
    p = ModelParams(mu_prime=0.0)
    values, vectors = oracle_diagonalize(p)
    assert values[values > 0].min() == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(vectors.conj().T @ vectors, np.eye(p.dim), atol=1e-10)


def test_oracle_tiny_field_clusters_at_mass():
    p = ModelParams(H=1e-6, mu_prime=0.0, n_max=8)
    values, _ = oracle_diagonalize(p)
    pos = values[values > 0]
    # up to n_max, eps0 - m <= (2 n_max + 2) eH / 2m
    assert np.max(np.abs(pos - 1.0)) <= (p.n_max + 1) * 1e-6


@pytest.mark.parametrize("e", [1.0, -1.0])
def test_oracle_spectrum_symmetric_without_amm(e):
    values, _ = oracle_diagonalize(ModelParams(e=e, mu_prime=0.0, n_max=20))
    assert np.allclose(np.sort(values), np.sort(-values), atol=1e-12)


def test_compare_exact_model():
    p = ModelParams(n_max=16)
    values, _ = oracle_diagonalize(p)
    records = analytic_spectrum(p)
    cmp = compare_spectra(values[values > 0], records, 1e-10)
    # only the truncation-edge state (n_max, lambda=-1) is unmatched
    assert len(cmp.unmatched_records) == 1 and len(cmp.unmatched_values) == 1
    assert (cmp.unmatched_records[0].n, cmp.unmatched_records[0].lam) == (p.n_max, -1)
    assert cmp.max_rel_error <= 1e-10


def test_compare_empty_records():
    cmp = compare_spectra([1.0, 2.0], [])
    assert cmp.unmatched_values == [1.0, 2.0] and not cmp.matched


def test_compare_perturbed_reports_mismatch():
    p = ModelParams(n_max=16)
    H = build_dirac_hamiltonian(p).matrix + random_hermitian(p.dim, 1e-3)
    values = np.linalg.eigvalsh(H)
    recs = [r for r in analytic_spectrum(p) if r.n <= p.n_interior]
    cmp = compare_spectra(values[values > 0], recs, 1e-10)
    assert cmp.unmatched_records
    assert not cmp.complete()


def test_compare_is_one_to_one_with_multiplicity():
    recs = [make_record(ModelParams(mu_prime=0.0), 0, -1), make_record(ModelParams(mu_prime=0.0), 1, 1)]
    assert recs[0].E_total == recs[1].E_total
    cmp = compare_spectra([recs[0].E_total, recs[0].E_total], recs, 1e-10)
    assert len(cmp.matched) == 2 and cmp.complete()
    cmp = compare_spectra([recs[0].E_total] * 3, recs, 1e-10)
    assert len(cmp.matched) == 2 and len(cmp.unmatched_values) == 1
    assert cmp.ambiguous  # a leftover level is indistinguishable from a matched one


def test_phase_distance():
    a = np.array([1.0, 2.0j, 0.5])
    assert phase_distance(a, np.exp(0.7j) * a) == pytest.approx(0.0, abs=1e-14)
    assert phase_distance(a, -a) == pytest.approx(0.0, abs=1e-14)
    assert phase_distance(a, np.zeros(3)) == pytest.approx(np.linalg.norm(a))


def test_random_hermitian_scale_and_seed():
    A = random_hermitian(12, 1e-3, seed=5)
    assert np.allclose(A, A.conj().T, atol=0)
    assert np.max(np.abs(A)) == pytest.approx(1e-3)
    assert np.array_equal(A, random_hermitian(12, 1e-3, seed=5))


def test_suite_default_passes():
    reports = run_suite(DEFAULT)
    assert all_passed(reports), failed(reports)
    names = [r.check_name for r in reports]
    assert names == sorted(names)
    assert set(DEFAULT_TOLERANCES) - {"degeneracy_numeric"} <= set(names)


def test_suite_sabotage_detected():
    reports = {r.check_name: r for r in run_suite(DEFAULT, spin_operator="sigma")}
    for name in ("exactness_commutator", "connection_lower_spinor", "connection_upper_factor", "invariance_even"):
        assert not reports[name].passed
    assert reports["exactness_commutator"].context["spin_operator"] == "sigma"


def test_suite_perturbation_detected():
    reports = {r.check_name: r for r in run_suite(DEFAULT, perturbation=1e-3, seed=11)}
    assert not reports["spectrum_identity"].passed
    assert reports["spectrum_identity"].context["seed"] == "11"


def test_suite_mu0_reports_degeneracy():
    reports = {r.check_name: r for r in run_suite(ModelParams(mu_prime=0.0, n_max=16), radial=False)}
    assert "degeneracy_numeric" in reports and "amm_splitting_numeric" not in reports
    assert reports["amm_splitting_analytic"].context["splitting"] == "0.0"
    assert reports["degeneracy_analytic"].max_residual == 0.0
    assert all(r.passed for r in reports.values())


def test_suite_deterministic():
    a = run_suite(ModelParams(n_max=16))
    b = run_suite(ModelParams(n_max=16))
    for x, y in zip(a, b):
        assert x.check_name == y.check_name
        assert abs(x.max_residual - y.max_residual) <= 1e-13


def test_tolerance_scale_and_override():
    p = ModelParams(n_max=8)
    tight = run_suite(p, tolerances={"fw_unitarity": 1e-30}, radial=False)
    rep = {r.check_name: r for r in tight}["fw_unitarity"]
    assert rep.tolerance == 1e-30
    scaled = {r.check_name: r for r in run_suite(p, tolerance_scale=10, radial=False)}
    assert scaled["fw_conjugation"].tolerance == pytest.approx(1e-7)
    with pytest.raises(ValueError):
        run_suite(p, tolerance_scale=0)


@pytest.mark.parametrize("m", [0.5, 1.0])
@pytest.mark.parametrize("e", [-1.0, 1.0])
@pytest.mark.parametrize("H", [0.05, 0.1, 0.5])
@pytest.mark.parametrize("mu_prime", [0.0, 1e-3])
@pytest.mark.parametrize("n_max", [16, 64])
def test_suite_grid(m, e, H, mu_prime, n_max):
    reports = run_suite(ModelParams(m, e, H, mu_prime, n_max), radial=False)
    assert all_passed(reports), failed(reports)
