"""Convolution-transformed residuals of the eigenvalue equations.

Two transforms eliminate the Laplacian: convolution with the Poisson
kernel (the height derivative takes over the second derivatives) and
convolution with a smooth window w (the Laplacian moves onto w).  Both
are evaluated per-term so the reports expose which contribution
dominates, and both are cross-validated against the convolved strong
residual: the kernel-derivative route and the grid-Laplacian route must
agree.

The printed window form that drops the exchange term and the psi_a
factor in the Hartree term is provided as ``window_residual_literal``
for side-by-side logging only; the asserted form is the one consistent
with convolving the strong equation with w.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convolution import ConvolutionPlan, convolve, convolve_with_kernel, get_plan
from .fields import ScalarField, laplacian, norm
from .hf import HfFields, MolecularSystem, OrbitalSet, strong_residual
from .kernels import Gaussian, PoissonDt2Kernel, PoissonKernel

__all__ = [
    "ResidualReport",
    "laplacian_convolution_symmetry_defect",
    "poisson_transformed_residual",
    "window_transformed_residual",
    "window_residual_literal",
    "CrosscheckReport",
    "poisson_crosscheck",
]


@dataclass(frozen=True)
class ResidualReport:
    """Per-term and total norms of one transformed-equation evaluation.

    ``relative`` is the total L2 norm over the largest per-term L2 norm
    (zero when all terms vanish); ``params`` records the transform
    parameter (height t, window, truncation order).
    """

    term_names: tuple[str, ...]
    term_l2: tuple[float, ...]
    term_sup: tuple[float, ...]
    total_l2: float
    total_sup: float
    relative: float
    params: dict
    total_field: ScalarField

    @classmethod
    def from_terms(cls, names, terms, params) -> "ResidualReport":
        total = terms[0]
        for t in terms[1:]:
            total = total + t
        term_l2 = tuple(norm(t, 2) for t in terms)
        scale = max(term_l2)
        total_l2 = norm(total, 2)
        return cls(
            term_names=tuple(names),
            term_l2=term_l2,
            term_sup=tuple(norm(t, np.inf) for t in terms),
            total_l2=total_l2,
            total_sup=norm(total, np.inf),
            relative=total_l2 / scale if scale > 0 else 0.0,
            params=dict(params),
            total_field=total,
        )


def laplacian_convolution_symmetry_defect(
    f: ScalarField,
    g: ScalarField,
    plan: ConvolutionPlan | None = None,
    method: str = "spectral",
) -> float:
    """||(lap f) * g - f * (lap g)||_inf / ||(lap f) * g||_inf.

    With the spectral Laplacian the two sides agree to roundoff for
    band-limited box-supported fields; rough partners (impulses) need
    the local stencil, whose transfer through the linear convolution is
    exact away from the boundary.
    """
    plan = plan or get_plan(f.grid)
    lhs = convolve(laplacian(f, method=method), g, plan=plan)
    rhs = convolve(f, laplacian(g, method=method), plan=plan)
    den = norm(lhs, np.inf)
    if den == 0.0:
        return 0.0
    return norm(lhs - rhs, np.inf) / den


def poisson_transformed_residual(
    a: int,
    orbitals: OrbitalSet,
    fields: HfFields,
    t: float,
    plan: ConvolutionPlan | None = None,
) -> ResidualReport:
    """Height-transformed residual at height t for orbital ``a``:

        psi_a * d2t P_t - [(p - q + 2 eps_a) psi_a] * P_t
                        - 2 sum_c [s[a,c] psi_c] * P_t

    The first term goes through the analytic kernel derivative; vanishes
    for exact solutions.  Heights below 2h are rejected.
    """
    plan = plan or get_plan(orbitals.grid)
    psi_a = orbitals.orbitals[a]
    eps_a = orbitals.energies[a]
    kernel_term = convolve_with_kernel(psi_a, PoissonDt2Kernel(t=t), plan=plan, strict=True)
    local = psi_a.with_values(
        (fields.p.values - fields.q.values + 2.0 * eps_a) * psi_a.values
    )
    potential_term = -1.0 * convolve_with_kernel(local, PoissonKernel(t=t), plan=plan, strict=True)
    exch_vals = sum(
        fields.s[a][c].values * orbitals.orbitals[c].values for c in range(len(orbitals))
    )
    exchange_term = -2.0 * convolve_with_kernel(
        psi_a.with_values(exch_vals), PoissonKernel(t=t), plan=plan, strict=True
    )
    return ResidualReport.from_terms(
        ("kernel_dt2", "potential", "exchange"),
        (kernel_term, potential_term, exchange_term),
        {"t": t, "orbital": a},
    )


def _require_gaussian_window(w):
    if not isinstance(w, Gaussian):
        raise ValueError(f"unsupported window kind {type(w).__name__}; use a Gaussian")
    if w.center != (0.0, 0.0, 0.0):
        raise ValueError("window must be centered at the origin")


def window_transformed_residual(
    a: int,
    orbitals: OrbitalSet,
    fields: HfFields,
    w: Gaussian,
    plan: ConvolutionPlan | None = None,
) -> ResidualReport:
    """Window-transformed residual (the strong equation convolved with w):

        psi_a * (lap w) + [(p - q + 2 eps_a) psi_a] * w
                        + 2 sum_c [s[a,c] psi_c] * w

    with lap w evaluated in closed form.  Scales linearly with w.
    """
    _require_gaussian_window(w)
    plan = plan or get_plan(orbitals.grid)
    psi_a = orbitals.orbitals[a]
    eps_a = orbitals.energies[a]
    kernel_term = convolve_with_kernel(psi_a, w.laplacian(), plan=plan)
    local = psi_a.with_values(
        (fields.p.values - fields.q.values + 2.0 * eps_a) * psi_a.values
    )
    potential_term = convolve_with_kernel(local, w, plan=plan)
    exch_vals = sum(
        fields.s[a][c].values * orbitals.orbitals[c].values for c in range(len(orbitals))
    )
    exchange_term = 2.0 * convolve_with_kernel(psi_a.with_values(exch_vals), w, plan=plan)
    return ResidualReport.from_terms(
        ("kernel_lap", "potential", "exchange"),
        (kernel_term, potential_term, exchange_term),
        {"window_alpha": w.alpha, "window_amplitude": w.prefactor, "orbital": a},
    )


def window_residual_literal(
    a: int,
    orbitals: OrbitalSet,
    fields: HfFields,
    w: Gaussian,
    plan: ConvolutionPlan | None = None,
) -> ResidualReport:
    """The literal printed window expression, for logging only:

        psi_a * (lap w) - [(p psi_a) * w] + [q * w] - 2 eps_a [psi_a * w]

    It differs from the consistent form by two signs, a missing psi_a
    factor on the Hartree term, and the absent exchange term; it is never
    asserted against zero.
    """
    _require_gaussian_window(w)
    plan = plan or get_plan(orbitals.grid)
    psi_a = orbitals.orbitals[a]
    eps_a = orbitals.energies[a]
    terms = (
        convolve_with_kernel(psi_a, w.laplacian(), plan=plan),
        -1.0 * convolve_with_kernel(psi_a.with_values(fields.p.values * psi_a.values), w, plan=plan),
        convolve_with_kernel(fields.q, w, plan=plan),
        -2.0 * eps_a * convolve_with_kernel(psi_a, w, plan=plan),
    )
    return ResidualReport.from_terms(
        ("kernel_lap", "nuclear", "hartree", "energy"),
        terms,
        {"window_alpha": w.alpha, "orbital": a, "literal": True},
    )


@dataclass(frozen=True)
class CrosscheckReport:
    """Agreement between the kernel-derivative and grid-Laplacian routes."""

    diff_l2: float
    diff_sup: float
    transformed_l2: float
    transformed_sup: float
    convolved_strong_l2: float
    convolved_strong_sup: float
    scale: float
    relative: float
    params: dict


def poisson_crosscheck(
    a: int,
    orbitals: OrbitalSet,
    fields: HfFields,
    system: MolecularSystem,
    t: float,
    plan: ConvolutionPlan | None = None,
    method: str = "finite_difference_2nd",
) -> CrosscheckReport:
    """Compare the height-transformed residual with -(strong residual * P_t).

    The relative measure divides by max(largest transformed term,
    ||convolved strong residual||): for exact solutions both routes are
    residual-sized and a ratio of the two alone would be noise over noise.
    """
    plan = plan or get_plan(orbitals.grid)
    report = poisson_transformed_residual(a, orbitals, fields, t, plan=plan)
    strong = strong_residual(a, orbitals, fields, system, method=method)
    cross = -1.0 * convolve_with_kernel(strong, PoissonKernel(t=t), plan=plan, strict=True)
    diff_field = report.total_field - cross
    cross_l2 = norm(cross, 2)
    diff = norm(diff_field, 2)
    scale = max(max(report.term_l2), cross_l2)
    return CrosscheckReport(
        diff_l2=diff,
        diff_sup=norm(diff_field, np.inf),
        transformed_l2=report.total_l2,
        transformed_sup=report.total_sup,
        convolved_strong_l2=cross_l2,
        convolved_strong_sup=norm(cross, np.inf),
        scale=scale,
        relative=diff / scale if scale > 0 else 0.0,
        params={"t": t, "orbital": a, "laplacian": method},
    )
