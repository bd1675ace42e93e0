"""Bogoliubov-de Gennes stability analysis and excitation handling.

Small perturbations delta_psi around a stationary state phi (chemical
potential mu) of the condensate split into mode pairs (u, v) satisfying

    [ L        g phi^2 ] [u]       [u]          L = -1/2 Laplace + V - mu
    [ -g phi^2   -L    ] [v] = w   [v],             + 2 g phi^2.

Substituting u = (w1 - w2)/2, v = (w1 + w2)/2 decouples the pair into a
single product eigenproblem

    (H0 - mu + g phi^2)(H0 - mu + 3 g phi^2) w1 = w^2 w1,

so only one eigenvalue problem has to be solved; w2 follows by applying
the second factor.  The Hamiltonian is discretized with 6th order
symmetric finite differences and zero Dirichlet exterior, the product
operator is applied matrix-free, and the eigenvalues nearest a small
positive shift come from ARPACK in shift-invert mode with BiCGSTAB inner
solves preconditioned by an ILU factorization of a 2nd order assembled
approximation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla
from scipy.ndimage import correlate1d

from .grid import ComplexField, Grid, inner_product

# 6th order central weights for the second derivative.
FD6_WEIGHTS = np.array(
    [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0]
)


def _correlate_all_axes(values: np.ndarray, grid: Grid) -> np.ndarray:
    out = np.zeros_like(values)
    for ax, h in enumerate(grid.spacing):
        out += correlate1d(values, FD6_WEIGHTS / h**2, axis=ax, mode="constant", cval=0.0)
    return out


def fd_laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """6th order finite difference Laplacian, zero Dirichlet exterior."""
    if np.iscomplexobj(values):
        return _correlate_all_axes(values.real, grid) + 1j * _correlate_all_axes(
            values.imag, grid
        )
    return _correlate_all_axes(values, grid)


@dataclass
class FdOperator:
    """Matrix-free application of -1/2 Laplace + diagonal on a grid."""

    grid: Grid
    diagonal: np.ndarray

    def __post_init__(self) -> None:
        self.diagonal = np.asarray(self.diagonal, dtype=float)
        if self.diagonal.shape != self.grid.dims:
            raise ValueError("diagonal must be sampled on the grid")

    def apply(self, values: np.ndarray) -> np.ndarray:
        return -0.5 * fd_laplacian(values, self.grid) + self.diagonal * values

    def apply_flat(self, flat: np.ndarray) -> np.ndarray:
        return self.apply(flat.reshape(self.grid.dims)).ravel()


def _fd2_laplacian_matrix(grid: Grid) -> sparse.spmatrix:
    """Assembled 2nd order Laplacian (Dirichlet), preconditioner quality."""
    mats = []
    for j, h in zip(grid.dims, grid.spacing):
        main = -2.0 * np.ones(j) / h**2
        off = np.ones(j - 1) / h**2
        mats.append(sparse.diags([off, main, off], [-1, 0, 1], format="csr"))
    lap = None
    for ax, t_ax in enumerate(mats):
        before = [sparse.identity(grid.dims[i], format="csr") for i in range(ax)]
        after = [sparse.identity(grid.dims[i], format="csr") for i in range(ax + 1, grid.ndim)]
        term = t_ax
        for m in before[::-1]:
            term = sparse.kron(m, term, format="csr")
        for m in after:
            term = sparse.kron(term, m, format="csr")
        lap = term if lap is None else lap + term
    return lap


@dataclass
class BdgMode:
    """One Bogoliubov mode: frequency and normalized amplitudes.

    ``u`` and ``v`` are real-valued (stored as complex fields) and
    normalized to int (u^2 - v^2) = 1.  ``residual`` is the relative L2
    defect of the full 2x2 eigenproblem.
    """

    omega: float
    u: ComplexField
    v: ComplexField
    residual: float
    eigenvalue: float

    @property
    def effective_period(self) -> float:
        """pi/omega: for near-antisymmetric pairs (v ~ -u) the density
        pattern repeats after half an oscillation period."""
        return np.pi / self.omega


def _real_ground_state(phi: ComplexField) -> np.ndarray:
    """Strip the global phase; stationary states here are real and positive."""
    values = phi.values
    peak = np.unravel_index(np.argmax(np.abs(values)), values.shape)
    rotated = values * np.exp(-1j * np.angle(values[peak]))
    residue = float(np.max(np.abs(rotated.imag)))
    if residue > 1e-6 * float(np.max(np.abs(rotated.real))):
        warnings.warn(
            f"ground state has imaginary residue {residue:.2e} after phase fixing",
            stacklevel=3,
        )
    return np.ascontiguousarray(rotated.real)


def fd_chemical_potential(
    phi: ComplexField, potential: np.ndarray, g: float
) -> float:
    """Rayleigh quotient <phi|(-1/2 Lap_fd + V + g|phi|^2)|phi> / <phi|phi>
    with the 6th order finite difference Laplacian."""
    phi_r = _real_ground_state(phi)
    op = FdOperator(phi.grid, potential + g * phi_r**2)
    return float(np.sum(phi_r * op.apply(phi_r)) / np.sum(phi_r * phi_r))


def solve_bdg(
    phi: ComplexField,
    potential: np.ndarray,
    g: float,
    n_modes: int = 3,
    *,
    frequency_scale: float,
    mu: float | None = None,
    sigma: float | None = None,
    goldstone_tol: float = 1e-3,
    inner_rtol: float = 1e-10,
    inner_maxiter: int = 2000,
    ilu_drop_tol: float = 1e-4,
    ilu_fill_factor: float = 10.0,
) -> list[BdgMode]:
    """Lowest ``n_modes`` excitation modes of a stationary state.

    ``frequency_scale`` sets the default shift sigma = (0.1*scale)^2 and
    the Goldstone rejection threshold |w| < goldstone_tol*scale.  ``mu``
    defaults to the finite difference Rayleigh quotient of ``phi``; a
    chemical potential computed with a different discretization displaces
    the Goldstone eigenvalue from zero by the mismatch, so only pass one
    obtained from the same stencil.  The product operator is applied
    matrix-free with the 6th order stencil; ARPACK runs in shift-invert
    mode where each inverse application solves (A - sigma) x = b by
    ILU-preconditioned BiCGSTAB on the assembled 2nd order approximation.
    Eigenvalues more negative than the Goldstone band indicate the input
    is not a stable ground state and raise.
    """
    grid = phi.grid
    if potential.shape != grid.dims:
        raise ValueError("potential must be sampled on the grid")
    if frequency_scale <= 0:
        raise ValueError("frequency_scale must be positive")
    if sigma is None:
        sigma = (0.1 * frequency_scale) ** 2
    if mu is None:
        mu = fd_chemical_potential(phi, potential, g)

    phi_r = _real_ground_state(phi)
    dens = phi_r**2
    op_soft = FdOperator(grid, potential - mu + g * dens)
    op_hard = FdOperator(grid, potential - mu + 3.0 * g * dens)
    n = grid.size

    def apply_product(flat: np.ndarray) -> np.ndarray:
        return op_soft.apply_flat(op_hard.apply_flat(flat))

    a_op = spla.LinearOperator((n, n), matvec=apply_product, dtype=float)

    # Preconditioner: ILU of the 2nd order assembled product, shifted.
    lap2 = _fd2_laplacian_matrix(grid)
    s_soft = -0.5 * lap2 + sparse.diags(op_soft.diagonal.ravel())
    s_hard = -0.5 * lap2 + sparse.diags(op_hard.diagonal.ravel())
    approx = (s_soft @ s_hard - sigma * sparse.identity(n)).tocsc()
    try:
        ilu = spla.spilu(approx, drop_tol=ilu_drop_tol, fill_factor=ilu_fill_factor)
    except RuntimeError as exc:
        raise RuntimeError(
            f"ILU factorization failed (drop_tol={ilu_drop_tol}, "
            f"fill_factor={ilu_fill_factor}): {exc}"
        ) from exc
    precond = spla.LinearOperator((n, n), matvec=ilu.solve, dtype=float)

    def solve_shifted(rhs: np.ndarray) -> np.ndarray:
        rhs = np.real(rhs).astype(float)
        sol, info = spla.bicgstab(
            spla.LinearOperator(
                (n, n), matvec=lambda x: apply_product(x) - sigma * x, dtype=float
            ),
            rhs,
            rtol=inner_rtol,
            atol=0.0,
            maxiter=inner_maxiter,
            M=precond,
        )
        if info != 0:
            raise RuntimeError(
                f"BiCGSTAB stagnated (info={info}) in the shift-invert solve; "
                f"preconditioner: ILU(drop_tol={ilu_drop_tol}, "
                f"fill_factor={ilu_fill_factor}), nnz={ilu.nnz}"
            )
        return sol

    op_inv = spla.LinearOperator((n, n), matvec=solve_shifted, dtype=float)
    k = min(n_modes + 2, n - 2)  # headroom for the Goldstone mode
    v0 = np.ones(n) / np.sqrt(n)
    vals, vecs = spla.eigs(a_op, k=k, sigma=sigma, which="LM", OPinv=op_inv, v0=v0)

    if np.max(np.abs(vals.imag)) > 1e-6 * max(np.max(np.abs(vals.real)), 1.0):
        raise RuntimeError("product operator returned genuinely complex eigenvalues")
    lam = vals.real
    goldstone_band = (goldstone_tol * frequency_scale) ** 2
    if np.any(lam < -goldstone_band):
        raise RuntimeError(
            f"negative Bogoliubov eigenvalue {lam.min():.3e}: the input state "
            "is not a stable ground state of the given potential"
        )

    order = np.argsort(lam)
    weight = grid.cell_volume
    modes: list[BdgMode] = []
    for idx in order:
        if len(modes) == n_modes:
            break
        if abs(lam[idx]) < goldstone_band:
            continue  # Goldstone / gauge mode
        omega = float(np.sqrt(lam[idx]))
        w1 = np.real(vecs[:, idx]).reshape(grid.dims)
        w2 = -op_hard.apply(w1) / omega
        u = 0.5 * (w1 - w2)
        v = 0.5 * (w1 + w2)
        norm = float(np.sum(u * u - v * v) * weight)
        if norm <= 0.0:
            raise RuntimeError(
                f"mode at omega={omega:.6f} has non-positive norm {norm:.3e}"
            )
        scale = 1.0 / np.sqrt(norm)
        u *= scale
        v *= scale
        peak = np.unravel_index(np.argmax(np.abs(u)), u.shape)
        if u[peak] < 0.0:
            u = -u
            v = -v
        op_l = FdOperator(grid, potential - mu + 2.0 * g * dens)
        res1 = op_l.apply(u) + g * dens * v - omega * u
        res2 = -g * dens * u - op_l.apply(v) - omega * v
        mode_norm = np.sqrt(np.sum(u * u + v * v) * weight)
        res = float(
            np.sqrt((np.sum(res1**2) + np.sum(res2**2)) * weight) / mode_norm
        )
        modes.append(
            BdgMode(
                omega=omega,
                u=ComplexField(grid, u.astype(complex)),
                v=ComplexField(grid, v.astype(complex)),
                residual=res,
                eigenvalue=float(lam[idx]),
            )
        )
    if len(modes) < n_modes:
        raise RuntimeError(
            f"only {len(modes)} of {n_modes} requested modes survived the "
            "Goldstone filter; request more or lower the shift"
        )
    return modes


def evolve_excitation(mode: BdgMode, mu: float, t: float) -> ComplexField:
    """Linearized excitation at time t:
    (u e^{-i w t} + conj(v) e^{+i w t}) e^{-i mu t}."""
    values = (
        mode.u.values * np.exp(-1j * mode.omega * t)
        + np.conj(mode.v.values) * np.exp(1j * mode.omega * t)
    ) * np.exp(-1j * mu * t)
    return ComplexField(mode.u.grid, values)


def overlap_series(mode: BdgMode, mu: float, times: Sequence[float]) -> np.ndarray:
    """|<delta_psi(0), delta_psi(t)>|^2 normalized to one at t = 0.

    For modes with v ~ -u the series revives at the effective period
    pi/omega, half a full oscillation.
    """
    start = evolve_excitation(mode, mu, 0.0)
    n0 = abs(inner_product(start, start))
    if n0 == 0.0:
        raise ValueError("excitation vanishes at t=0; cannot normalize")
    out = np.empty(len(times))
    for i, t in enumerate(times):
        out[i] = abs(inner_product(start, evolve_excitation(mode, mu, float(t)))) ** 2
    return out / n0**2


def excitation_phase(psi_final: ComplexField, target: ComplexField) -> float:
    """Global phase theta = arg <psi_d, psi(T)> of the reached state.

    Warns when the overlap magnitude is below 0.5: the linearization
    around the target is then unreliable.
    """
    overlap = inner_product(target, psi_final)
    if abs(overlap) < 0.5:
        warnings.warn(
            f"|<target, psi(T)>| = {abs(overlap):.3f} < 0.5; the extracted "
            "excitation is outside the linear response regime",
            stacklevel=2,
        )
    return float(np.angle(overlap))


def extract_excitation(
    snapshots: Sequence[tuple[float, ComplexField]],
    psi_final: ComplexField,
    target: ComplexField,
    mu: float,
    horizon: float,
) -> tuple[float, list[tuple[float, ComplexField]]]:
    """Subtract the phase-aligned stationary target from post-protocol states.

    Each snapshot (t, psi(t)) with t >= horizon is mapped to
    delta_psi(t) = psi(t) - e^{i theta} psi_d e^{-i mu (t - horizon)} with
    theta = arg <psi_d, psi(T)>.  Returns theta and the series.
    """
    theta = excitation_phase(psi_final, target)
    series: list[tuple[float, ComplexField]] = []
    for t, psi in snapshots:
        reference = (
            np.exp(1j * theta) * target.values * np.exp(-1j * mu * (t - horizon))
        )
        series.append((t, ComplexField(psi.grid, psi.values - reference)))
    return theta, series
