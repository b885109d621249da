"""Collective two-level ensemble coupled to one mode: build, solve, scan.

The Hamiltonian lives on the product of a truncated Fock space (photon
index major) and the maximal collective-spin sector of N two-level atoms,

    H = omega a'a + omega_A S_z + (g/sqrt(N)) (a + a') S_x

with hbar = 1 (energies in rad/s), or the number-conserving variant
(g/sqrt(N)) (a S+ + a' S-) when rwa is set.  g is the collective coupling:
the figure of merit g^2/(omega omega_A) equals 1 at the critical point.

The parity operator (-1)^(a'a + S_z + N/2) is diagonal in this basis and
commutes with both variants, so ground states are computed per parity
sector; that keeps <a + a'> exactly zero and resolves the near-degenerate
doublet deep in the high-coupling phase deterministically.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as splinalg

DEFAULT_DIMENSION_CAP = 250_000
FOCK_SCHEDULE_START = 8
FOCK_SCHEDULE_CAP = 512
FRACTION_TOL = 1e-4
TOP_POPULATION_TOL = 1e-8
NEAR_DEGENERACY_FACTOR = 1e-8


class SolverConvergenceError(RuntimeError):
    """Eigensolver failed to reach the requested residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class FockTruncationError(RuntimeError):
    """No truncation in the schedule met the convergence criteria."""


class DimensionError(ValueError):
    """Requested matrix exceeds the configured dimension cap."""


@dataclass(frozen=True)
class DickeParams:
    """Model parameters; g_collective enters as g/sqrt(N) with collective spins."""

    n_atoms: int
    omega: float  # mode frequency (rad/s)
    omega_a: float  # atomic frequency (rad/s)
    g_collective: float  # collective coupling (rad/s)
    rwa: bool = False  # number-conserving coupling when True
    n_max: int = FOCK_SCHEDULE_START  # Fock truncation (highest photon number kept)

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"atom count must be at least 1, got {self.n_atoms}")
        if self.omega <= 0.0 or self.omega_a <= 0.0:
            raise ValueError("frequencies must be positive")
        if self.g_collective < 0.0:
            raise ValueError(f"coupling must be nonnegative, got {self.g_collective}")
        if self.n_max < 1:
            raise ValueError(f"Fock truncation must be at least 1, got {self.n_max}")

    @classmethod
    def from_figure_of_merit(
        cls,
        n_atoms: int,
        fom: float,
        omega: float,
        omega_a: float,
        rwa: bool = False,
        n_max: int = FOCK_SCHEDULE_START,
    ) -> "DickeParams":
        """Parametrize by the figure of merit: g = sqrt(F omega omega_A)."""
        if fom < 0.0:
            raise ValueError(f"figure of merit must be nonnegative, got {fom}")
        return cls(
            n_atoms=n_atoms,
            omega=omega,
            omega_a=omega_a,
            g_collective=math.sqrt(fom * omega * omega_a),
            rwa=rwa,
            n_max=n_max,
        )

    @property
    def figure_of_merit(self) -> float:
        return self.g_collective**2 / (self.omega * self.omega_a)

    @property
    def dimension(self) -> int:
        return (self.n_max + 1) * (self.n_atoms + 1)


@dataclass(frozen=True)
class GroundStateReport:
    """Ground-state observables used as criticality evidence."""

    energy: float  # rad/s
    photon_fraction: float  # <a'a>/N
    inversion: float  # <S_z>/N
    sx2_fraction: float  # <S_x^2>/N^2
    parity_expectation: float
    top_fock_population: float  # weight in the highest kept Fock layer
    converged_n_max: int
    near_degenerate: bool = False


@dataclass(frozen=True)
class ScanRow:
    """One row of a coupling scan; numeric fields are None on solver failure."""

    fom: float
    n_atoms: int
    n_max: int | None
    energy: float | None
    photon_fraction: float | None
    inversion: float | None
    sx2_fraction: float | None
    parity: float | None
    error: str | None = None


def _spin_x(n_atoms: int) -> np.ndarray:
    """Dense collective S_x on the spin-N/2 ladder, m ascending."""
    s = n_atoms / 2.0
    m = np.arange(n_atoms + 1) - s
    raising = 0.5 * np.sqrt(s * (s + 1.0) - m[:-1] * (m[:-1] + 1.0))
    sx = np.zeros((n_atoms + 1, n_atoms + 1))
    idx = np.arange(n_atoms)
    sx[idx + 1, idx] = raising
    sx[idx, idx + 1] = raising
    return sx


def build_hamiltonian(p: DickeParams, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> sparse.csr_matrix:
    """Sparse symmetric Hamiltonian on |n> (x) |N/2, m>, photon index major.

    Ladder matrix elements are sqrt(n) and sqrt(S(S+1) - m(m+/-1)); the
    symmetric pairs are built from the same float values, so H equals its
    transpose exactly.
    """
    if p.dimension > dimension_cap:
        raise DimensionError(
            f"dimension {p.dimension} exceeds cap {dimension_cap}; "
            "raise dimension_cap explicitly if this size is intended"
        )
    n_ph = p.n_max + 1
    n_sp = p.n_atoms + 1
    s = p.n_atoms / 2.0
    m = np.arange(n_sp) - s

    photon_number = sparse.diags(np.arange(n_ph, dtype=float))
    spin_z = sparse.diags(m)
    identity_ph = sparse.identity(n_ph)
    identity_sp = sparse.identity(n_sp)

    h = p.omega * sparse.kron(photon_number, identity_sp) + p.omega_a * sparse.kron(identity_ph, spin_z)

    scale = p.g_collective / math.sqrt(p.n_atoms)
    if p.rwa:
        # a (x) S+ plus its transpose (= a' (x) S-)
        annihilate = sparse.diags(np.sqrt(np.arange(1, n_ph, dtype=float)), offsets=1)
        raising = sparse.diags(
            np.sqrt(s * (s + 1.0) - m[:-1] * (m[:-1] + 1.0)), offsets=-1, shape=(n_sp, n_sp)
        )
        half = sparse.kron(annihilate, raising)
        h = h + scale * (half + half.T)
    else:
        ladder = np.sqrt(np.arange(1, n_ph, dtype=float))
        x_op = sparse.diags([ladder, ladder], offsets=[1, -1])
        h = h + scale * sparse.kron(x_op, sparse.csr_matrix(_spin_x(p.n_atoms)))
    return sparse.csr_matrix(h)


def parity_diagonal(p: DickeParams) -> np.ndarray:
    """Diagonal of (-1)^(a'a + S_z + N/2): +/-1 per basis state."""
    ph = 1.0 - 2.0 * (np.arange(p.n_max + 1) % 2)
    sp = 1.0 - 2.0 * (np.arange(p.n_atoms + 1) % 2)
    return np.kron(ph, sp)


def excitation_diagonal(p: DickeParams) -> np.ndarray:
    """Diagonal of a'a + S_z + N/2 (integers; conserved under rwa)."""
    ph = np.arange(p.n_max + 1, dtype=float)
    sp = np.arange(p.n_atoms + 1, dtype=float)
    return (ph[:, None] + sp[None, :]).ravel()


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(vec)))
    return -vec if vec[pivot] < 0.0 else vec


def ground_state(h, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of a real symmetric matrix.

    Iterative Lanczos (ARPACK) with a fixed seeded pseudorandom start
    vector, so repeated runs return the same vector and no sign structure
    of the ground state can leave the start vector orthogonal to it;
    blocks smaller than 8 are diagonalized densely.  The residual
    ||Hv - Ev|| is checked against tol times the max-row-sum norm of H.
    """
    h = sparse.csr_matrix(h)
    dim = h.shape[0]
    scale = float(np.max(np.abs(h).sum(axis=1))) or 1.0
    if dim < 8:
        values, vectors = np.linalg.eigh(h.toarray())
        return float(values[0]), _fix_sign(vectors[:, 0])
    v0 = np.random.default_rng(902).standard_normal(dim)
    v0 /= np.linalg.norm(v0)
    values, vectors = splinalg.eigsh(h, k=1, which="SA", v0=v0, tol=0)
    energy = float(values[0])
    vec = vectors[:, 0]
    residual = float(np.linalg.norm(h @ vec - energy * vec))
    if residual > tol * scale:
        raise SolverConvergenceError("ground-state solve did not converge", residual)
    return energy, _fix_sign(vec / np.linalg.norm(vec))


def ground_state_sectored(
    p: DickeParams, h: sparse.csr_matrix | None = None, tol: float = 1e-10
) -> tuple[float, np.ndarray, bool]:
    """Ground state resolved per parity sector.

    Solves each sector separately and returns the lower one (ties go to
    even parity), together with a flag marking a near-degenerate doublet
    (sector gap below 1e-8 of the matrix norm scale).  The returned vector
    is supported on a single sector, so parity is exact.
    """
    if h is None:
        h = build_hamiltonian(p)
    par = parity_diagonal(p)
    scale = float(np.max(np.abs(h).sum(axis=1))) or 1.0
    results = []
    for sign in (1.0, -1.0):
        idx = np.flatnonzero(par == sign)
        if idx.size == 0:
            continue
        sub = h[idx][:, idx]
        energy, vec = ground_state(sub, tol=tol)
        full = np.zeros(h.shape[0])
        full[idx] = vec
        results.append((energy, full))
    if len(results) == 2:
        gap = abs(results[0][0] - results[1][0])
        near_degenerate = gap < NEAR_DEGENERACY_FACTOR * scale
    else:
        near_degenerate = False
    energy, vec = min(results, key=lambda item: item[0])
    return energy, vec, near_degenerate


def observables(
    state: np.ndarray,
    p: DickeParams,
    energy: float | None = None,
    h: sparse.csr_matrix | None = None,
    near_degenerate: bool = False,
) -> GroundStateReport:
    """Expectation values of a normalized state in the product basis."""
    vec = np.asarray(state, dtype=float)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"state is not normalized: |v| = {norm}")
    psi = vec.reshape(p.n_max + 1, p.n_atoms + 1)
    photon_weights = (psi**2).sum(axis=1)
    spin_weights = (psi**2).sum(axis=0)
    n_values = np.arange(p.n_max + 1, dtype=float)
    m_values = np.arange(p.n_atoms + 1, dtype=float) - p.n_atoms / 2.0
    sx = _spin_x(p.n_atoms)
    sx2 = sx @ sx
    if energy is None:
        if h is None:
            h = build_hamiltonian(p)
        energy = float(vec @ (h @ vec))
    parity = float(
        ((1.0 - 2.0 * (np.arange(p.n_max + 1) % 2)) @ (psi**2)) @ (1.0 - 2.0 * (np.arange(p.n_atoms + 1) % 2))
    )
    # rounding can push a sector-supported state's parity past +/-1 by ~1 ulp
    parity = float(np.clip(parity, -1.0, 1.0))
    return GroundStateReport(
        energy=energy,
        photon_fraction=float(n_values @ photon_weights) / p.n_atoms,
        inversion=float(m_values @ spin_weights) / p.n_atoms,
        sx2_fraction=float(np.einsum("nj,jk,nk->", psi, sx2, psi)) / p.n_atoms**2,
        parity_expectation=parity,
        top_fock_population=float(photon_weights[-1]),
        converged_n_max=p.n_max,
        near_degenerate=near_degenerate,
    )


def mode_displacement(state: np.ndarray, p: DickeParams) -> float:
    """<a + a'> of a state (vanishes for parity-definite states)."""
    psi = np.asarray(state, dtype=float).reshape(p.n_max + 1, p.n_atoms + 1)
    ladder = np.sqrt(np.arange(1, p.n_max + 1, dtype=float))
    shifted = psi[1:] * ladder[:, None]
    return 2.0 * float(np.sum(psi[:-1] * shifted))


def meanfield_order_parameter(fom: float, omega: float, omega_a: float) -> float:
    """Photon fraction of the variational product ansatz in the large-N limit.

    Minimizing omega x^2 + (omega_A/2) cos(t) + g x sin(t) over the mode
    amplitude x (per sqrt(N)) and spin angle t gives 0 up to the critical
    point and (F omega_A / 4 omega)(1 - 1/F^2) beyond it.
    """
    if fom < 0.0:
        raise ValueError(f"figure of merit must be nonnegative, got {fom}")
    if omega <= 0.0 or omega_a <= 0.0:
        raise ValueError("frequencies must be positive")
    if fom <= 1.0:
        return 0.0
    return fom * omega_a / (4.0 * omega) * (1.0 - 1.0 / fom**2)


def _converged_ground(
    p: DickeParams,
    tol: float = 1e-10,
    start: int = FOCK_SCHEDULE_START,
    cap: int = FOCK_SCHEDULE_CAP,
    fraction_tol: float = FRACTION_TOL,
    top_tol: float = TOP_POPULATION_TOL,
) -> tuple[GroundStateReport, np.ndarray]:
    """Walk a doubling Fock schedule until the photon fraction settles.

    Accepts the smallest truncation whose top-layer weight is below
    top_tol and whose photon fraction moves by less than fraction_tol when
    the truncation is doubled.
    """
    previous: tuple[GroundStateReport, np.ndarray] | None = None
    n_max = start
    while n_max <= cap:
        candidate = replace(p, n_max=n_max)
        h = build_hamiltonian(candidate)
        energy, vec, near = ground_state_sectored(candidate, h=h, tol=tol)
        report = observables(vec, candidate, energy=energy, near_degenerate=near)
        if previous is not None:
            prev_report, prev_vec = previous
            if (
                prev_report.top_fock_population < top_tol
                and abs(report.photon_fraction - prev_report.photon_fraction) < fraction_tol
            ):
                return prev_report, prev_vec
        previous = (report, vec)
        n_max *= 2
    raise FockTruncationError(
        f"no Fock truncation up to {cap} met the convergence criteria "
        f"(fom {p.figure_of_merit:.3g}, N {p.n_atoms})"
    )


def fock_convergence(
    p: DickeParams,
    start: int = FOCK_SCHEDULE_START,
    cap: int = FOCK_SCHEDULE_CAP,
    fraction_tol: float = FRACTION_TOL,
    top_tol: float = TOP_POPULATION_TOL,
) -> int:
    """Smallest truncation in the doubling schedule meeting the criteria."""
    report, _ = _converged_ground(p, start=start, cap=cap, fraction_tol=fraction_tol, top_tol=top_tol)
    return report.converged_n_max


def _scan_one(template: DickeParams, fom: float, tol: float) -> ScanRow:
    try:
        p = DickeParams.from_figure_of_merit(
            n_atoms=template.n_atoms,
            fom=fom,
            omega=template.omega,
            omega_a=template.omega_a,
            rwa=template.rwa,
        )
        report, _ = _converged_ground(p, tol=tol)
    except (SolverConvergenceError, FockTruncationError, DimensionError) as exc:
        return ScanRow(
            fom=fom,
            n_atoms=template.n_atoms,
            n_max=None,
            energy=None,
            photon_fraction=None,
            inversion=None,
            sx2_fraction=None,
            parity=None,
            error=str(exc),
        )
    return ScanRow(
        fom=fom,
        n_atoms=template.n_atoms,
        n_max=report.converged_n_max,
        energy=report.energy,
        photon_fraction=report.photon_fraction,
        inversion=report.inversion,
        sx2_fraction=report.sx2_fraction,
        parity=report.parity_expectation,
    )


def scan_coupling(
    template: DickeParams,
    fom_grid,
    tol: float = 1e-10,
    max_workers: int = 1,
) -> list[ScanRow]:
    """Converged ground-state observables over a figure-of-merit grid.

    Rows are ordered by the figure of merit; each grid point converges its
    own Fock truncation, so rows are independent and may run in parallel
    (assembly order is fixed by the grid, not by completion).
    """
    grid = sorted(float(f) for f in fom_grid)
    if any(f < 0.0 for f in grid):
        raise ValueError("figure-of-merit grid values must be nonnegative")
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(lambda f: _scan_one(template, f, tol), grid))
    return [_scan_one(template, f, tol) for f in grid]


def crossing_estimate(rows: list[ScanRow], threshold: float = 0.05) -> float | None:
    """Figure of merit at which the photon fraction first exceeds threshold.

    Linear interpolation between the bracketing grid points; None when the
    scan never crosses.
    """
    previous = None
    for row in rows:
        if row.photon_fraction is None:
            continue
        if row.photon_fraction > threshold:
            if previous is None:
                return row.fom
            f0, y0 = previous
            return f0 + (row.fom - f0) * (threshold - y0) / (row.photon_fraction - y0)
        previous = (row.fom, row.photon_fraction)
    return None


# ---------------------------------------------------------------------------
# Scan serialization
# ---------------------------------------------------------------------------

SCAN_CSV_COLUMNS = ("F", "N", "n_max", "energy", "photon_fraction", "inversion", "sx2_fraction", "parity")


def _cell(value) -> str:
    return "" if value is None else repr(float(value)) if isinstance(value, float) else str(value)


def scan_rows_to_csv(rows: list[ScanRow], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SCAN_CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                _cell(row.fom),
                _cell(row.n_atoms),
                _cell(row.n_max),
                _cell(row.energy),
                _cell(row.photon_fraction),
                _cell(row.inversion),
                _cell(row.sx2_fraction),
                _cell(row.parity),
            ]
        )


def scan_rows_to_json(rows: list[ScanRow]) -> list[dict]:
    payload = []
    for row in rows:
        entry = {
            "F": row.fom,
            "N": row.n_atoms,
            "n_max": row.n_max,
            "energy_rad_per_s": row.energy,
            "photon_fraction": row.photon_fraction,
            "inversion": row.inversion,
            "sx2_fraction": row.sx2_fraction,
            "parity": row.parity,
        }
        if row.error is not None:
            entry["error"] = row.error
        payload.append(entry)
    return payload
