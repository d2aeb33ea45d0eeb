"""Brute-force oracle and residual checks for the exact FW transformation."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .landau import (
    EigenRecord,
    LabelledEigensystem,
    ModelParams,
    analytic_spectrum,
    build_dirac_hamiltonian,
    dirac_eigensystem,
    fw_hamiltonian_closed_form,
    fw_wavefunction,
    interior_index,
    label_eigensystem,
    lowest_admissible_states,
    make_record,
)
from .operators import (
    commutator,
    conjugate,
    epsilon_of,
    exactness_residual,
    fw_hamiltonian,
    fw_unitary,
    hermitian_eig,
    max_norm,
)

DEFAULT_SEED = 20240517
DEFAULT_TOLERANCES = {
    "amm_splitting_analytic": 1e-14,
    "amm_splitting_numeric": 1e-9,
    "connection_explicit_vs_unitary": 1e-8,
    "connection_lower_spinor": 1e-8,
    "connection_upper_factor": 1e-8,
    "degeneracy_analytic": 1e-15,
    "degeneracy_numeric": 1e-10,
    "exactness_commutator": 1e-12,
    "fw_closed_form": 1e-10,
    "fw_commutes_beta_odd2": 1e-10,
    "fw_commutes_even": 1e-10,
    "fw_conjugation": 1e-8,
    "fw_inverse": 1e-10,
    "fw_unitarity": 1e-10,
    "invariance_epsilon": 1e-8,
    "invariance_even": 1e-8,
    "oracle_labels": 1e-8,
    "radial_fd_eigenvalue": 1e-4,
    "radial_normalization": 1e-8,
    "renormalized_form": 1e-8,
    "simultaneous_eigen_epsilon": 1e-8,
    "simultaneous_eigen_even": 1e-8,
    "spectrum_identity": 1e-10,
    "spectrum_negative_branch": 1e-10,
    "spectrum_preservation": 1e-8,
    "upper_norm_bookkeeping": 1e-8,
}


@dataclass(frozen=True)
class ResidualReport:
    check_name: str
    max_residual: float
    tolerance: float
    context: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        # NaN compares False
        return bool(self.max_residual <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "max_residual": float(self.max_residual),
            "tolerance": float(self.tolerance),
            "passed": self.passed,
            "context": dict(sorted(self.context.items())),
        }


@dataclass
class SpectrumComparison:
    matched: list  # (numeric value, EigenRecord, relative error)
    unmatched_values: list
    unmatched_records: list
    ambiguous: list = field(default_factory=list)  # (numeric value, EigenRecord)

    @property
    def max_rel_error(self) -> float:
        return max((r for _, _, r in self.matched), default=0.0)

    def complete(self) -> bool:
        return not self.unmatched_values and not self.unmatched_records and not self.ambiguous


def oracle_diagonalize(params: ModelParams, spin_operator: str = "pi"):
    """Full eigensystem of the truncated Dirac Hamiltonian."""
    system = dirac_eigensystem(params, spin_operator)
    return system.values, system.vectors


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def compare_spectra(values, records, rel_tol: float = 1e-10) -> SpectrumComparison:
    """Greedy unique nearest-match pairing of numeric levels with analytic records.

    Pairs are accepted in order of increasing relative error while both sides
    are unused and the error is within ``rel_tol``.  A pairing is flagged as
    ambiguous when an unmatched numeric level sits within ``rel_tol/10`` of a
    matched one, i.e. the choice between them was arbitrary.
    """
    values = [float(v) for v in values]
    records = list(records)
    if not values or not records:
        return SpectrumComparison([], values, records)
    vals = np.asarray(values)
    targets = np.array([r.E_total for r in records])
    err = np.abs(vals[:, None] - targets[None, :]) / np.maximum(np.abs(targets[None, :]), 1e-300)
    order = np.argsort(err, axis=None, kind="stable")
    used_v = np.zeros(len(vals), bool)
    used_r = np.zeros(len(records), bool)
    pairs = []
    for flat in order:
        i, j = divmod(int(flat), len(records))
        if err[i, j] > rel_tol:
            break
        if used_v[i] or used_r[j]:
            continue
        used_v[i] = used_r[j] = True
        pairs.append((i, j))
    leftover = np.flatnonzero(~used_v)
    ambiguous = []
    for i, j in pairs:
        if leftover.size and np.any(np.abs(vals[leftover] - vals[i]) <= rel_tol / 10 * abs(vals[i])):
            ambiguous.append((values[i], records[j]))
    pairs.sort()
    return SpectrumComparison(
        matched=[(values[i], records[j], float(err[i, j])) for i, j in pairs],
        unmatched_values=[values[i] for i in leftover],
        unmatched_records=[records[j] for j in np.flatnonzero(~used_r)],
        ambiguous=ambiguous,
    )


def spectrum_residual(cmp: SpectrumComparison, values) -> float:
    """Worst relative error of the pairing.

    Unmatched records count with their relative distance to the nearest
    level.  An incomplete or ambiguous pairing that would otherwise look no
    worse than the matched pairs scores ``inf``.
    """
    res = cmp.max_rel_error
    values = np.asarray(values, float)
    for rec in cmp.unmatched_records:
        res = max(res, float(np.min(np.abs(values - rec.E_total))) / abs(rec.E_total) if values.size else math.inf)
    if not cmp.complete() and res <= cmp.max_rel_error:
        res = math.inf
    return res


def random_hermitian(dim: int, scale: float, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Hermitian matrix with max-norm ``scale``."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    X = X + X.conj().T
    return X * (scale / max_norm(X))


def phase_distance(a, b) -> float:
    """min over theta of ||a - exp(i theta) b||."""
    a = np.ravel(a)
    b = np.ravel(b)
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def radial_operator_fd(params: ModelParams, m_l: int, rho, R):
    """Apply the radial part of pi_perp^2 (symmetric gauge) by central differences.

    Returns ``(rho[1:-1], (pi_perp^2 R)[1:-1])``; the grid must be uniform.
    """
    rho = np.asarray(rho, float)
    R = np.asarray(R, float)
    h = rho[1] - rho[0]
    if not np.allclose(np.diff(rho), h, rtol=1e-9, atol=0):
        raise ValueError("finite differences need a uniform grid")
    r = rho[1:-1]
    d2 = (R[2:] - 2 * R[1:-1] + R[:-2]) / h**2
    d1 = (R[2:] - R[:-2]) / (2 * h)
    eH = params.e * params.H
    potential = m_l**2 / r**2 + eH**2 * r**2 / 4 - eH * m_l
    return r, -d2 - d1 / r + potential * R[1:-1]


def radial_grid(params: ModelParams, points: int = 4000, rho_max_b: float = 12.0) -> np.ndarray:
    """Uniform grid h, 2h, ..., rho_max with rho_max = rho_max_b * b."""
    rho_max = rho_max_b * params.magnetic_length
    return np.linspace(rho_max / points, rho_max, points)


def radial_norm(rho, R) -> float:
    """Simpson estimate of int_0^rho_max R^2 rho drho; the origin contributes zero."""
    rho = np.concatenate([[0.0], rho])
    f = np.concatenate([[0.0], np.asarray(R) ** 2 * rho[1:]])
    return float(simpson(f, x=rho))


def radial_fd_eigenvalue(params: ModelParams, m_l: int, rho, R) -> float:
    """Rayleigh quotient <R|pi_perp^2|R> / <R|R> with the finite-difference operator."""
    r, LR = radial_operator_fd(params, m_l, rho, R)
    Rin = np.asarray(R)[1:-1]
    return float(simpson(Rin * LR * r, x=r) / simpson(Rin**2 * r, x=r))


@dataclass(frozen=True)
class RadialCheck:
    n: int
    lam: int
    M: float
    norm_error: float
    fd_eigenvalue: float
    expected: float

    @property
    def fd_rel_error(self) -> float:
        return abs(self.fd_eigenvalue - self.expected) / self.expected


def check_radial_states(params: ModelParams, count: int = 5, points: int = 4000, rho_max_b: float = 12.0):
    grid = radial_grid(params, points, rho_max_b)
    out = []
    for rec in lowest_admissible_states(params, count):
        wf = fw_wavefunction(params, rec.n, rec.lam, rec.M, grid)
        out.append(
            RadialCheck(
                rec.n,
                rec.lam,
                rec.M,
                abs(radial_norm(grid, wf.values) - 1.0),
                radial_fd_eigenvalue(params, wf.m_l, grid, wf.values),
                (2 * rec.n + 1) * params.eH_abs,
            )
        )
    return out


def _records_for(params, n, lam):
    return [make_record(params, int(a), int(b)) for a, b in zip(n, lam)]


def _interior_positive(params: ModelParams, system: LabelledEigensystem):
    return np.flatnonzero(system.positive() & system.interior(params))


def _degeneracy_checks(params, system, tol):
    s = params.sign
    mu_h = params.mu_prime * params.H
    deg_a = spl_a = deg_n = 0.0
    for n in range(params.n_interior):
        lo = make_record(params, n, -s)
        hi = make_record(params, n + 1, s)
        deg_a = max(deg_a, abs(lo.eps0 - hi.eps0))
        spl_a = max(spl_a, abs((lo.E_total - hi.E_total) - 2 * s * mu_h))
        e_lo = system.values[system.find(n, -s)]
        e_hi = system.values[system.find(n + 1, s)]
        deg_n = max(deg_n, abs((e_lo - e_hi) - 2 * s * mu_h))
    ctx = {"pairs": f"eps0(n,{-s:+d}) = eps0(n+1,{s:+d}), n<{params.n_interior}",
           "splitting": repr(2 * s * mu_h)}
    numeric_name = "degeneracy_numeric" if params.mu_prime == 0 else "amm_splitting_numeric"
    return [
        ResidualReport("degeneracy_analytic", deg_a, tol("degeneracy_analytic"), ctx),
        ResidualReport("amm_splitting_analytic", spl_a, tol("amm_splitting_analytic"), ctx),
        ResidualReport(numeric_name, deg_n, tol(numeric_name), ctx),
    ]


def run_suite(
    params: ModelParams,
    tolerance_scale: float = 1.0,
    tolerances: dict | None = None,
    spin_operator: str = "pi",
    perturbation: float = 0.0,
    seed: int = DEFAULT_SEED,
    radial: bool = True,
) -> list[ResidualReport]:
    """Run every residual check for one parameter point; reports sorted by name.

    ``spin_operator="sigma"`` and ``perturbation > 0`` are negative controls:
    the first breaks exactness of the transform, the second adds a random
    Hermitian matrix of the given max-norm to the Dirac Hamiltonian.
    """
    if not tolerance_scale > 0:
        raise ValueError("tolerance_scale must be positive")
    tols = {**DEFAULT_TOLERANCES, **(tolerances or {})}

    def tol(name):
        return tols[name] * tolerance_scale

    idx = interior_index(params)
    ctx = {k: repr(v) for k, v in params.as_dict().items()}
    ctx["interior"] = f"n<={params.n_interior}"
    if spin_operator != "pi":
        ctx["spin_operator"] = spin_operator
    if perturbation:
        ctx["perturbation"] = repr(perturbation)
        ctx["seed"] = str(seed)

    split = build_dirac_hamiltonian(params, spin_operator)
    H = split.matrix
    if perturbation:
        H = H + random_hermitian(params.dim, perturbation, seed)
        values, vectors = hermitian_eig(H)
        system = label_eigensystem(params, values, vectors)
    else:
        system = dirac_eigensystem(params, spin_operator)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        U = fw_unitary(split, +1)
        U_inv = fw_unitary(split, -1)
    eps = epsilon_of(split)
    h_fw = fw_hamiltonian(split)
    eye = np.eye(params.dim)
    odd2 = split.odd @ split.odd

    reports = [
        ResidualReport("exactness_commutator", exactness_residual(split, idx), tol("exactness_commutator"), ctx),
        ResidualReport("fw_unitarity", max_norm(U.conj().T @ U - eye, idx), tol("fw_unitarity"), ctx),
        ResidualReport("fw_inverse", max_norm(U @ U_inv - eye, idx), tol("fw_inverse"), ctx),
        ResidualReport("fw_conjugation", max_norm(conjugate(U, H, U_inv) - h_fw, idx), tol("fw_conjugation"), ctx),
        ResidualReport(
            "fw_closed_form", max_norm(h_fw - fw_hamiltonian_closed_form(params), idx), tol("fw_closed_form"), ctx
        ),
        ResidualReport(
            "fw_commutes_beta_odd2",
            max_norm(commutator(split.beta @ odd2, h_fw), idx),
            tol("fw_commutes_beta_odd2"),
            ctx,
        ),
        ResidualReport("fw_commutes_even", max_norm(commutator(split.even, h_fw), idx), tol("fw_commutes_even"), ctx),
        ResidualReport(
            "invariance_even", max_norm(conjugate(U, split.even, U_inv) - split.even, idx), tol("invariance_even"), ctx
        ),
        ResidualReport("invariance_epsilon", max_norm(conjugate(U, eps, U_inv) - eps, idx), tol("invariance_epsilon"), ctx),
    ]

    # spectrum preservation: interior diagonal of H_FW vs oracle levels, label by label
    sel = _interior_positive(params, system)
    neg = np.flatnonzero(~system.positive() & system.interior(params))
    reports.append(ResidualReport("oracle_labels", float(np.max(system.label_spread)), tol("oracle_labels"), ctx))

    interior_records = [r for r in analytic_spectrum(params) if r.n <= params.n_interior]
    cmp = compare_spectra(system.values[sel], interior_records, tol("spectrum_identity"))
    spec_res = spectrum_residual(cmp, system.values[sel])
    spec_ctx = dict(ctx, matched=str(len(cmp.matched)), unmatched_values=str(len(cmp.unmatched_values)),
                    unmatched_records=str(len(cmp.unmatched_records)), ambiguous=str(len(cmp.ambiguous)))
    reports.append(ResidualReport("spectrum_identity", spec_res, tol("spectrum_identity"), spec_ctx))

    fw_vals = np.linalg.eigvalsh(h_fw[np.ix_(idx, idx)])
    dirac_by_label = {}
    for j in np.flatnonzero(system.interior(params)):
        dirac_by_label[(int(system.n[j]), int(system.lam[j]), bool(system.values[j] > 0))] = system.values[j]
    fw_diag = np.real(np.diag(h_fw))[idx]
    pres = 0.0
    for k, d in enumerate(fw_diag):
        n, s = divmod(k, 4)
        pz = (1, -1, -1, 1)[s]
        key = (n, pz, s < 2)
        pres = max(pres, abs(dirac_by_label.get(key, math.inf) - d))
    pres = max(pres, max_norm(np.sort(fw_vals) - np.sort(fw_diag)))
    reports.append(ResidualReport("spectrum_preservation", pres, tol("spectrum_preservation"), ctx))

    neg_res = 0.0
    for j in neg:
        n, p = int(system.n[j]), int(system.lam[j])
        expected = -make_record(params, n, -p).eps0 - p * params.mu_prime * params.H
        neg_res = max(neg_res, _rel(system.values[j], expected))
    reports.append(ResidualReport("spectrum_negative_branch", neg_res, tol("spectrum_negative_branch"), ctx))

    # eigenvector-level checks over interior positive-energy states
    records = _records_for(params, system.n[sel], system.lam[sel])
    V = system.vectors[:, sel]
    eps0 = np.array([r.eps0 for r in records])
    E0 = np.array([r.E0 for r in records])
    E = np.array([r.E_total for r in records])
    m = params.m
    reports.append(ResidualReport(
        "simultaneous_eigen_epsilon",
        float(np.max(np.linalg.norm(eps @ V - V * eps0, axis=0), initial=0.0)),
        tol("simultaneous_eigen_epsilon"), ctx))
    reports.append(ResidualReport(
        "simultaneous_eigen_even",
        float(np.max(np.linalg.norm(split.even @ V - V * E0, axis=0), initial=0.0)),
        tol("simultaneous_eigen_even"), ctx))

    blocks = V.reshape(params.n_levels, 4, -1)
    upper_norm2 = np.sum(np.abs(blocks[:, :2, :]) ** 2, axis=(0, 1))
    reports.append(ResidualReport(
        "upper_norm_bookkeeping",
        float(np.max(np.abs(upper_norm2 - (eps0 + m) / (2 * eps0)), initial=0.0)),
        tol("upper_norm_bookkeeping"), ctx))

    fw_states = (U @ V).reshape(params.n_levels, 4, -1)
    lower = np.linalg.norm(fw_states[:, 2:, :], axis=(0, 1))
    factor = np.sqrt(2 * eps0 / (eps0 + m))
    upper_dev = np.linalg.norm(fw_states[:, :2, :] - factor * blocks[:, :2, :], axis=(0, 1))
    reports.append(ResidualReport("connection_lower_spinor", float(np.max(lower, initial=0.0)),
                                  tol("connection_lower_spinor"), ctx))
    reports.append(ResidualReport("connection_upper_factor", float(np.max(upper_dev, initial=0.0)),
                                  tol("connection_upper_factor"), ctx))

    beta_diag = np.tile([1.0, 1.0, -1.0, -1.0], params.n_levels)[:, None]
    explicit = (eps0 + beta_diag * (E - E0)) * V / np.sqrt(2 * eps0 * (eps0 + m))
    reports.append(ResidualReport(
        "connection_explicit_vs_unitary",
        float(np.max(np.linalg.norm(explicit - U @ V, axis=0), initial=0.0)),
        tol("connection_explicit_vs_unitary"), ctx))

    renorm = 0.0
    for j in range(V.shape[1]):
        phi = blocks[:, :2, j]
        target = np.zeros((params.n_levels, 4), complex)
        target[:, :2] = phi / np.linalg.norm(phi)
        renorm = max(renorm, phase_distance(fw_states[:, :, j], target))
    reports.append(ResidualReport("renormalized_form", renorm, tol("renormalized_form"), ctx))

    try:
        reports.extend(_degeneracy_checks(params, system, tol))
    except LookupError as exc:
        reports.append(ResidualReport("degeneracy_numeric", math.inf, tol("degeneracy_numeric"),
                                      dict(ctx, error=str(exc))))

    if radial:
        checks = check_radial_states(params)
        rctx = dict(ctx, states=";".join(f"({c.n},{c.lam:+d},{c.M:g})" for c in checks), grid="4000 pts, 12 b")
        reports.append(ResidualReport("radial_normalization", max(c.norm_error for c in checks),
                                      tol("radial_normalization"), rctx))
        reports.append(ResidualReport("radial_fd_eigenvalue", max(c.fd_rel_error for c in checks),
                                      tol("radial_fd_eigenvalue"), rctx))

    reports.sort(key=lambda r: r.check_name)
    return reports


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)


def failed(reports) -> list[str]:
    return [r.check_name for r in reports if not r.passed]
