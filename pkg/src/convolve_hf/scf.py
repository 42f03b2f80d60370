"""Self-consistent field solver for one doubly occupied orbital.

The outer loop rebuilds the mean field from the current density, the
inner loop relaxes the lowest eigenpair of the frozen one-particle
operator, and linear density mixing damps the feedback.  Because the
overlap-Coulomb convolution is linear, mixing densities is implemented
by mixing the convolved fields directly, so each outer iteration costs a
single padded convolution plus the inner-loop Laplacians.

For a single orbital the exchange acting on the occupied orbital itself
collapses onto the local field s[0,0], so the frozen operator is local:
v_eff = -sum_c Z_c h_c + s[0,0].  The public ``apply_fock`` keeps the
full non-local exchange operator (linear and Hermitian) and coincides
with the local form on the occupied orbital.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.sparse import linalg as spla

from .convolution import ConvolutionPlan, coulomb_convolve, get_plan
from .fields import GridSpec, ScalarField, laplacian
from .hf import (
    HfFields,
    MolecularSystem,
    OrbitalSet,
    build_fields,
    build_p,
    nuclear_mask,
)
from .kernels import Gaussian, sample

__all__ = ["ScfConfig", "ScfIteration", "ScfResult", "apply_fock", "solve"]

_INNER_STEPS = 12
_CG_TOL = 1e-10


@dataclass(frozen=True)
class ScfConfig:
    """Iteration controls; ``time_step=None`` derives a stable explicit
    step from the grid's spectral Laplacian bound."""

    max_iterations: int = 200
    mixing: float = 0.6
    energy_tolerance: float = 1e-7
    orbital_tolerance: float = 1e-6
    eigensolver: str = "imaginary_time"
    time_step: float | None = None

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if not (0.0 < self.mixing <= 1.0):
            raise ValueError(f"mixing must lie in (0, 1], got {self.mixing}")
        if self.energy_tolerance <= 0 or self.orbital_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.eigensolver not in ("imaginary_time", "inverse_iteration"):
            raise ValueError(f"unknown eigensolver {self.eigensolver!r}")
        if self.time_step is not None and self.time_step <= 0:
            raise ValueError("time_step must be positive")


@dataclass(frozen=True)
class ScfIteration:
    iteration: int
    energy: float
    orbital_change: float
    epsilon: float


@dataclass(frozen=True)
class ScfResult:
    orbitals: OrbitalSet
    converged: bool
    iteration_count: int
    history: tuple[ScfIteration, ...]
    final_residual: float
    fields: HfFields
    wall_seconds: float

    @property
    def energy_history(self) -> tuple[float, ...]:
        return tuple(it.energy for it in self.history)


def apply_fock(
    psi: ScalarField,
    system: MolecularSystem,
    fields: HfFields,
    orbitals: OrbitalSet,
    plan: ConvolutionPlan | None = None,
) -> ScalarField:
    """One-particle operator with frozen fields applied to a trial field:

        -1/2 lap psi - sum_c Z_c h_c psi + 2 sum_c s[c,c] psi - K psi,

    where (K psi)(x) = sum_c [(conj(psi_c) psi) * h](x) psi_c(x).  The
    exchange recomputes the overlap convolution with the trial, which
    keeps the operator linear and Hermitian; on psi = psi_a it equals
    sum_c s[a,c] psi_c.
    """
    if fields.n != len(orbitals):
        raise ValueError("fields were built from a different orbital count")
    plan = plan or get_plan(psi.grid)
    # p = 2 sum Z_c h_c and q = 4 sum s_cc, so nuclear + Hartree = (q - p)/2
    vals = -0.5 * laplacian(psi, method="spectral").values
    vals += 0.5 * (fields.q.values - fields.p.values) * psi.values
    for psi_c in orbitals.orbitals:
        overlap = coulomb_convolve(psi_c.conj() * psi, plan=plan)
        vals -= overlap.values * psi_c.values
    return psi.with_values(vals)


def _spectral_k2(grid: GridSpec) -> np.ndarray:
    h = grid.spacing
    kx = sfft.fftfreq(grid.points_per_axis, d=h)
    kz = sfft.rfftfreq(grid.points_per_axis, d=h)
    return 4.0 * np.pi**2 * (
        kx[:, None, None] ** 2 + kx[None, :, None] ** 2 + kz[None, None, :] ** 2
    )


def solve(system: MolecularSystem, grid: GridSpec, config: ScfConfig) -> ScfResult:
    """Fixed-point loop for the n = 1 closed-shell ground state.

    Each outer iteration freezes v_eff = -sum Z_c h_c + s_mixed, relaxes
    the lowest eigenpair (imaginary-time Euler steps with per-step
    renormalization, or one shifted inverse-iteration solve), then mixes
    the overlap-Coulomb field linearly.  Converged means both the energy
    change and the orbital change fell below their tolerances.
    """
    if system.pair_count != 1:
        raise NotImplementedError("multi-orbital SCF is out of scope (n = 1 only)")
    system.require_inside(grid)
    t_start = time.perf_counter()
    h = grid.spacing
    h3 = h**3
    shape = grid.shape

    v_nuc = -0.5 * build_p(system, grid).values.real  # -sum_c Z_c h_c, mollified
    k2 = _spectral_k2(grid)

    def lap(arr):
        return sfft.irfftn(sfft.rfftn(arr) * (-k2), s=shape)

    def l2(arr):
        return np.sqrt((arr * arr).sum() * h3)

    # initial guess: normalized Gaussian at the charge barycenter
    guess = sample(Gaussian(alpha=1.0, center=tuple(system.charge_barycenter())), grid)
    psi = guess.values.real.copy()
    psi /= l2(psi)

    plan = get_plan(grid)

    def s_of(density):
        return coulomb_convolve(
            ScalarField(grid=grid, values=density.astype(np.complex128)), plan=plan
        ).values.real

    rho = psi * psi
    s_mix = s_of(rho)
    if config.time_step is not None:
        dt = config.time_step
    else:
        lam_max = 1.5 * (np.pi / h) ** 2
        dt = 1.8 / (lam_max - v_nuc.min())

    history: list[ScfIteration] = []
    converged = False
    e_prev = None
    psi_prev = psi.copy()
    eps = 0.0
    iteration = 0

    for iteration in range(1, config.max_iterations + 1):
        v_eff = v_nuc + s_mix

        if config.eigensolver == "imaginary_time":
            for _ in range(_INNER_STEPS):
                f_psi = -0.5 * lap(psi) + v_eff * psi
                eps = (psi * f_psi).sum() * h3
                psi = psi - dt * (f_psi - eps * psi)
                nrm = l2(psi)
                if not np.isfinite(nrm) or nrm == 0.0:
                    raise ValueError(
                        "imaginary-time propagation diverged; reduce time_step"
                    )
                psi /= nrm
        else:  # inverse_iteration
            f_psi = -0.5 * lap(psi) + v_eff * psi
            eps = (psi * f_psi).sum() * h3
            shift = eps - 1.0
            op = spla.LinearOperator(
                (psi.size, psi.size),
                matvec=lambda v: (
                    -0.5 * lap(v.reshape(shape)) + (v_eff - shift) * v.reshape(shape)
                ).ravel(),
            )
            precond_mul = 1.0 / (0.5 * k2 + max(1.0, -shift))
            precond = spla.LinearOperator(
                (psi.size, psi.size),
                matvec=lambda v: sfft.irfftn(
                    sfft.rfftn(v.reshape(shape)) * precond_mul, s=shape
                ).ravel(),
            )
            sol, info = spla.cg(op, psi.ravel(), rtol=_CG_TOL, maxiter=400, M=precond)
            if info != 0:
                raise ValueError(f"inverse-iteration CG failed to converge (info={info})")
            psi = sol.reshape(shape)
            psi /= l2(psi)

        if psi.sum() < 0:  # fix the global sign for reproducible output
            psi = -psi
        rho_new = psi * psi
        s_new = s_of(rho_new)

        kinetic_1 = -0.5 * (psi * lap(psi)).sum() * h3
        v_nuc_1 = 2.0 * (rho_new * v_nuc).sum() * h3
        hartree = (rho_new * s_new).sum() * h3
        energy = 2.0 * kinetic_1 + v_nuc_1 + hartree
        eps = kinetic_1 + 0.5 * v_nuc_1 + hartree  # Rayleigh quotient of the new field

        orbital_change = l2(psi - psi_prev)
        psi_prev = psi.copy()
        history.append(
            ScfIteration(
                iteration=iteration,
                energy=float(energy),
                orbital_change=float(orbital_change),
                epsilon=float(eps),
            )
        )

        de = abs(energy - e_prev) if e_prev is not None else np.inf
        e_prev = energy
        s_mix = (1.0 - config.mixing) * s_mix + config.mixing * s_new
        if de <= config.energy_tolerance and orbital_change <= config.orbital_tolerance:
            converged = True
            break

    psi_field = ScalarField(grid=grid, values=psi.astype(np.complex128))
    final_fields = None
    if history:
        v_eff = v_nuc + s_new
        f_psi = -0.5 * lap(psi) + v_eff * psi
        eps = (psi * f_psi).sum() * h3
        resid = f_psi - eps * psi
        resid[~nuclear_mask(grid, system)] = 0.0
        den = l2(np.where(nuclear_mask(grid, system), f_psi, 0.0))
        final_residual = l2(resid) / den if den > 0 else 0.0
    else:
        eps = 0.0
        final_residual = np.inf
    orbitals = OrbitalSet(orbitals=(psi_field,), energies=(float(eps),))
    final_fields = build_fields(system, orbitals, plan=plan)
    return ScfResult(
        orbitals=orbitals,
        converged=converged,
        iteration_count=len(history),
        history=tuple(history),
        final_residual=float(final_residual),
        fields=final_fields,
        wall_seconds=time.perf_counter() - t_start,
    )
