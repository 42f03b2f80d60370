"""Truncated basis expansions and their transformed residual ladders.

Orbitals are projected onto the leading members of an even-tempered
Gaussian family by least squares on the grid (normal equations through
the Gram matrix).  For each truncation order n the expansion carries the
truncated orbitals T[n,a], the overlap-Coulomb fields r[n,a,c] built
from them, their Hartree sum q_n, and a uniform L2 bound K on the
truncations.  The residual ladders re-evaluate the two transformed
equations with (T, r, q_n) in place of (psi, s, q): as the fit improves
the residual norms must not grow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .convolution import ConvolutionPlan, convolve_with_kernel, coulomb_convolve, get_plan
from .errors import IllConditionedBasisError
from .fields import ScalarField, inner, norm
from .hf import HfFields, OrbitalSet
from .kernels import Gaussian, PoissonDt2Kernel, PoissonKernel, sample
from .residuals import ResidualReport, _require_gaussian_window

__all__ = ["ExpansionState", "project_orbitals",
           "expansion_poisson_residuals", "expansion_window_residuals"]

GRAM_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class ExpansionState:
    """Least-squares truncations of an orbital set over a fixed basis."""

    basis: tuple[Gaussian, ...]
    orders: tuple[int, ...]
    coefficients: dict  # order -> (order, n_orbitals) array
    truncations: dict   # order -> tuple of ScalarField per orbital
    r_fields: dict      # order -> n x n tuple of ScalarField
    q_fields: dict      # order -> ScalarField
    fit_errors: dict    # order -> tuple of ||T - psi||_2 per orbital
    k_bound: float
    gram_condition: float

    @property
    def n_orbitals(self) -> int:
        return len(next(iter(self.truncations.values())))

    def truncation_l2(self, order: int, a: int) -> float:
        return norm(self.truncations[order][a], 2)


def project_orbitals(
    orbitals: OrbitalSet,
    basis,
    orders,
    plan: ConvolutionPlan | None = None,
) -> ExpansionState:
    """Project every orbital onto the first n basis members for each order n.

    Solves the symmetric positive-definite normal equations per order, so
    the fit errors are non-increasing in n.  Rejects bases whose Gram
    matrix condition number exceeds 1e12.
    """
    basis = tuple(basis)
    orders = tuple(sorted(set(int(n) for n in orders)))
    if not basis or not orders:
        raise ValueError("need at least one basis function and one order")
    if max(orders) > len(basis):
        raise ValueError(f"order {max(orders)} exceeds basis size {len(basis)}")
    plan = plan or get_plan(orbitals.grid)
    grid = orbitals.grid
    sampled = [sample(b, grid) for b in basis]
    m = len(basis)
    gram = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            gram[i, j] = gram[j, i] = inner(sampled[i], sampled[j]).real
    condition = float(np.linalg.cond(gram))
    if condition > GRAM_CONDITION_LIMIT:
        raise IllConditionedBasisError(
            f"basis Gram matrix condition number {condition:.3e} exceeds "
            f"{GRAM_CONDITION_LIMIT:.0e}"
        )
    rhs = np.array([[inner(sampled[i], psi).real for psi in orbitals.orbitals] for i in range(m)])

    coefficients, truncations, r_fields, q_fields, fit_errors = {}, {}, {}, {}, {}
    for order in orders:
        cho = sla.cho_factor(gram[:order, :order])
        coeff = sla.cho_solve(cho, rhs[:order, :])
        coefficients[order] = coeff
        ts = []
        errs = []
        for a, psi in enumerate(orbitals.orbitals):
            vals = sum(coeff[k, a] * sampled[k].values for k in range(order))
            t_field = ScalarField(grid=grid, values=vals)
            ts.append(t_field)
            errs.append(norm(t_field - psi, 2))
        truncations[order] = tuple(ts)
        fit_errors[order] = tuple(errs)
        n_orb = len(orbitals)
        r = [[None] * n_orb for _ in range(n_orb)]
        for a in range(n_orb):
            for c in range(a, n_orb):
                r_ac = coulomb_convolve(ts[c].conj() * ts[a], plan=plan)
                r[a][c] = r_ac
                if c != a:
                    r[c][a] = r_ac.conj()
        r_fields[order] = tuple(tuple(row) for row in r)
        q_fields[order] = ScalarField(
            grid=grid, values=4.0 * sum(r[c][c].values for c in range(n_orb))
        )

    # uniform bound realized as the projection bound ||psi|| + max_n ||T_n - psi||
    k_bound = max(
        norm(psi, 2) + max(fit_errors[n][a] for n in orders)
        for a, psi in enumerate(orbitals.orbitals)
    )
    return ExpansionState(
        basis=basis,
        orders=orders,
        coefficients=coefficients,
        truncations=truncations,
        r_fields=r_fields,
        q_fields=q_fields,
        fit_errors=fit_errors,
        k_bound=k_bound,
        gram_condition=condition,
    )


def _expansion_terms(state, order, a, orbitals, fields):
    t_a = state.truncations[order][a]
    eps_a = orbitals.energies[a]
    local = t_a.with_values(
        (fields.p.values - state.q_fields[order].values + 2.0 * eps_a) * t_a.values
    )
    exch = sum(
        state.r_fields[order][a][c].values * state.truncations[order][c].values
        for c in range(state.n_orbitals)
    )
    return t_a, local, t_a.with_values(exch)


def expansion_poisson_residuals(
    state: ExpansionState,
    a: int,
    orbitals: OrbitalSet,
    fields: HfFields,
    t: float,
    orders=None,
    plan: ConvolutionPlan | None = None,
) -> list[ResidualReport]:
    """Height-transformed residual of each truncation:

        T[n,a] * d2t P_t - [(p - q_n + 2 eps_a) T[n,a]] * P_t
                         - 2 sum_c [r[n,a,c] T[n,c]] * P_t

    Signs follow the height-transform identity (the same that the
    crosscheck enforces), with the expansion surrogates in place of the
    exact fields.
    """
    plan = plan or get_plan(orbitals.grid)
    orders = state.orders if orders is None else tuple(int(n) for n in orders)
    missing = [n for n in orders if n not in state.truncations]
    if missing:
        raise KeyError(f"orders {missing} not present in the expansion state")
    reports = []
    for order in orders:
        t_a, local, exch = _expansion_terms(state, order, a, orbitals, fields)
        terms = (
            convolve_with_kernel(t_a, PoissonDt2Kernel(t=t), plan=plan, strict=True),
            -1.0 * convolve_with_kernel(local, PoissonKernel(t=t), plan=plan, strict=True),
            -2.0 * convolve_with_kernel(exch, PoissonKernel(t=t), plan=plan, strict=True),
        )
        reports.append(
            ResidualReport.from_terms(
                ("kernel_dt2", "potential", "exchange"),
                terms,
                {"t": t, "orbital": a, "order": order},
            )
        )
    return reports


def expansion_window_residuals(
    state: ExpansionState,
    a: int,
    orbitals: OrbitalSet,
    fields: HfFields,
    w: Gaussian,
    orders=None,
    plan: ConvolutionPlan | None = None,
) -> list[ResidualReport]:
    """Window-transformed residual ladder (lap moves onto the window):

        T[n,a] * (lap w) + [(p - q_n + 2 eps_a) T[n,a]] * w
                         + 2 sum_c [r[n,a,c] T[n,c]] * w

    Gaussian windows are integrable, so L2 norms are always reported
    alongside the sup norms.
    """
    _require_gaussian_window(w)
    plan = plan or get_plan(orbitals.grid)
    orders = state.orders if orders is None else tuple(int(n) for n in orders)
    missing = [n for n in orders if n not in state.truncations]
    if missing:
        raise KeyError(f"orders {missing} not present in the expansion state")
    reports = []
    for order in orders:
        t_a, local, exch = _expansion_terms(state, order, a, orbitals, fields)
        terms = (
            convolve_with_kernel(t_a, w.laplacian(), plan=plan),
            convolve_with_kernel(local, w, plan=plan),
            2.0 * convolve_with_kernel(exch, w, plan=plan),
        )
        reports.append(
            ResidualReport.from_terms(
                ("kernel_lap", "potential", "exchange"),
                terms,
                {"window_alpha": w.alpha, "orbital": a, "order": order},
            )
        )
    return reports
