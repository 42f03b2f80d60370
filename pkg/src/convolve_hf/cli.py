"""Command-line frontend.

    convolve-hf <scf|extend-sweep|residuals|expand|verify>
                --config <path> [--out <dir>] [--grid-n <int>] [--quiet]

Exit codes: 0 success, 1 configuration/validation error, 2 SCF did not
converge, 3 an invariant check failed.  All CSV files are written
atomically (temp file + rename) with a header row; floats are printed
with 17 significant digits, so identical configurations produce
byte-identical outputs.  When ``--out`` is absent the CONVOLVE_HF_OUT
environment variable overrides the config's output.dir.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .convolution import get_plan, resolution_floor
from .errors import ConfigError, IllConditionedBasisError, ResolutionError
from .expansion import (
    expansion_poisson_residuals,
    expansion_window_residuals,
    project_orbitals,
)
from .extension import extend, harmonicity_residual
from .fields import ScalarField, laplacian, norm
from .hf import (
    HfFields,
    OrbitalSet,
    build_fields,
    build_p,
    check_orbital_bounds,
    energies,
    nuclear_mask,
)
from .kernels import Gaussian, Slater1s, basis_function, sample
from .residuals import (
    ResidualReport,
    poisson_crosscheck,
    poisson_transformed_residual,
    window_residual_literal,
    window_transformed_residual,
)
from .scf import solve
from .verify import run_verify

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2
EXIT_INVARIANT = 3


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _say(quiet: bool, *message):
    if not quiet:
        print(*message)


# ----------------------------------------------------------------- scf


def cmd_scf(config: RunConfig, out: Path, quiet: bool) -> int:
    result = solve(config.system(), config.grid(), config.scf())
    _write_csv(
        out / "scf_history.csv",
        ["iteration", "energy", "orbital_change", "epsilon"],
        [(str(it.iteration), it.energy, it.orbital_change, it.epsilon) for it in result.history],
    )
    grid = config.grid()
    x = grid.axis_coordinates()
    k0 = grid.points_per_axis // 2  # z = 0 plane
    psi = result.orbitals.orbitals[0].values.real
    plane_rows = [
        (x[i], x[j], psi[i, j, k0])
        for i in range(grid.points_per_axis)
        for j in range(grid.points_per_axis)
    ]
    _write_csv(out / "orbital_z0.csv", ["x", "y", "value"], plane_rows)

    report = energies(result.orbitals, config.system(), fields=result.fields)
    bounds = check_orbital_bounds(result.orbitals, config.system(), fields=result.fields)
    summary = [
        f"converged = {result.converged}",
        f"iterations = {result.iteration_count}",
        f"epsilon = {_fmt(result.orbitals.energies[0])}",
        f"kinetic = {_fmt(report.kinetic)}",
        f"potential = {_fmt(report.potential)}",
        f"total_energy = {_fmt(report.total)}",
        f"virial_ratio = {_fmt(report.virial_ratio)}",
        f"final_residual = {_fmt(result.final_residual)}",
        f"max_s_sup = {_fmt(bounds.max_s_sup)} (bound {_fmt(bounds.s_bound)})",
        f"max_l2_square = {_fmt(bounds.max_l2_square)} (bound {_fmt(bounds.l2_bound)})",
        f"bound_checks_pass = {bounds.all_ok}",
        f"orbital_sup_bounded = {result.orbitals.sup_bounded}",
        f"wall_seconds = {result.wall_seconds:.1f}",
    ]
    _write_atomic(out / "summary.txt", "\n".join(summary) + "\n")
    _say(quiet, "\n".join(summary))
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


# -------------------------------------------------------- extend-sweep


def cmd_extend_sweep(config: RunConfig, out: Path, quiet: bool) -> int:
    if not config.poisson_t_values:
        raise ConfigError("poisson.t_values is empty")
    grid = config.grid()
    plan = get_plan(grid)
    base = sample(Gaussian(alpha=config.window_alpha, amplitude=1.0), grid)
    floor = resolution_floor(grid)
    base_l2 = norm(base, 2)
    rows = []
    for t in sorted(config.poisson_t_values, reverse=True):
        delta = t / 8.0
        ext = extend(base, (t - delta, t, t + delta), plan=plan)
        sl = ext.slice_at(t)
        defect = harmonicity_residual(ext, 1)
        flag = "" if t >= floor * (1 - 1e-12) else "unresolved"
        rows.append(
            (
                t,
                norm(sl - base, 2),
                norm(sl - base, np.inf),
                norm(sl, np.inf),
                4.0 / (np.pi * t),
                defect,
                flag,
            )
        )
    _write_csv(
        out / "extension_sweep.csv",
        ["t", "l2_distance", "sup_distance", "sup_norm", "paper_bound_4_over_pi_t",
         "harmonicity_defect", "flag"],
        rows,
    )
    _say(quiet, f"extension sweep over {len(rows)} heights written; "
         f"base L2 = {_fmt(base_l2)}")
    return EXIT_OK


# ----------------------------------------------------------- residuals


def _masked_strong_report(a, orbitals, fields, system, method="spectral") -> ResidualReport:
    """Strong residual with per-term norms, all masked near the nuclei."""
    psi_a = orbitals.orbitals[a]
    eps_a = orbitals.energies[a]
    keep = nuclear_mask(psi_a.grid, system)

    def masked(vals):
        v = vals.copy()
        v[~keep] = 0.0
        return psi_a.with_values(v)

    lap_term = masked(laplacian(psi_a, method=method).values)
    pot_term = masked((fields.p.values - fields.q.values + 2.0 * eps_a) * psi_a.values)
    exch_term = masked(
        2.0 * sum(fields.s[a][c].values * orbitals.orbitals[c].values
                  for c in range(len(orbitals)))
    )
    return ResidualReport.from_terms(
        ("laplacian", "potential", "exchange"),
        (lap_term, pot_term, exch_term),
        {"orbital": a, "laplacian": method, "masked": True},
    )


def _residual_inputs(config: RunConfig):
    """(orbitals, fields, system, scf_exit) for the configured source."""
    grid = config.grid()
    system = config.system()
    if config.residuals_source == "zero":
        zero = ScalarField.zeros(grid)
        orbitals = OrbitalSet(orbitals=(zero,), energies=(0.0,), validate=False)
        return orbitals, build_fields(system, orbitals), system, EXIT_OK
    if config.residuals_source == "hydrogen_identity":
        center = system.nuclei[0][1]
        psi = sample(Slater1s(center=center), grid)
        psi = psi * (1.0 / norm(psi, 2))
        orbitals = OrbitalSet(orbitals=(psi,), energies=(-0.5,))
        fields = HfFields(
            p=build_p(system, grid),
            q=ScalarField.zeros(grid),
            s=((ScalarField.zeros(grid),),),
        )
        return orbitals, fields, system, EXIT_OK
    result = solve(system, grid, config.scf())
    code = EXIT_OK if result.converged else EXIT_NOT_CONVERGED
    return result.orbitals, result.fields, system, code


def cmd_residuals(config: RunConfig, out: Path, quiet: bool) -> int:
    orbitals, fields, system, code = _residual_inputs(config)
    t = config.residuals_t
    w = Gaussian(alpha=config.window_alpha, amplitude=1.0)
    a = 0
    strong = _masked_strong_report(a, orbitals, fields, system)
    thm4 = poisson_transformed_residual(a, orbitals, fields, t)
    thm5 = window_transformed_residual(a, orbitals, fields, w)
    cross = poisson_crosscheck(a, orbitals, fields, system, t)
    literal = window_residual_literal(a, orbitals, fields, w)

    def row(name, rep: ResidualReport, param):
        return (
            name,
            rep.term_l2[0], rep.term_sup[0],
            rep.term_l2[1], rep.term_sup[1],
            rep.term_l2[2], rep.term_sup[2],
            rep.total_l2, rep.total_sup, rep.relative, param,
        )

    rows = [
        row("strong", strong, "masked"),
        row("thm4", thm4, f"t={t:g}"),
        row("thm5", thm5, f"alpha={config.window_alpha:g}"),
        (
            "thm4_vs_strong_crosscheck",
            cross.transformed_l2, cross.transformed_sup,
            cross.convolved_strong_l2, cross.convolved_strong_sup,
            0.0, 0.0,
            cross.diff_l2, cross.diff_sup, cross.relative, f"t={t:g}",
        ),
    ]
    _write_csv(
        out / "residuals.csv",
        ["pipeline", "term1_l2", "term1_sup", "term2_l2", "term2_sup",
         "term3_l2", "term3_sup", "total_l2", "total_sup", "relative", "param"],
        rows,
    )
    _say(quiet, f"strong relative = {_fmt(strong.relative)}")
    _say(quiet, f"thm4 relative = {_fmt(thm4.relative)}")
    _say(quiet, f"thm5 relative = {_fmt(thm5.relative)}")
    _say(quiet, f"crosscheck relative = {_fmt(cross.relative)}")
    _say(quiet, "literal window form (logged, not asserted): "
         f"total_l2 = {_fmt(literal.total_l2)} vs consistent {_fmt(thm5.total_l2)}")
    return code


# -------------------------------------------------------------- expand


def cmd_expand(config: RunConfig, out: Path, quiet: bool) -> int:
    orbitals, fields, system, code = _residual_inputs(config)
    if code != EXIT_OK:
        return code
    basis = [basis_function(k, config.basis_alpha0, config.basis_beta)
             for k in range(config.basis_count)]
    orders = config.orders()
    state = project_orbitals(orbitals, basis, orders)
    t = config.residuals_t
    w = Gaussian(alpha=config.window_alpha, amplitude=1.0)
    thm6 = expansion_poisson_residuals(state, 0, orbitals, fields, t)
    thm7 = expansion_window_residuals(state, 0, orbitals, fields, w)
    rows = [
        (
            str(n),
            state.fit_errors[n][0],
            r6.total_sup, r6.total_l2,
            r7.total_sup, r7.total_l2,
            state.k_bound,
        )
        for n, r6, r7 in zip(state.orders, thm6, thm7)
    ]
    _write_csv(
        out / "expansion_ladder.csv",
        ["n", "fit_error_l2", "thm6_sup", "thm6_l2", "thm7_sup", "thm7_l2", "K_bound"],
        rows,
    )
    _say(quiet, f"expansion ladder over orders {state.orders}; "
         f"Gram condition {state.gram_condition:.3e}")
    return EXIT_OK


# -------------------------------------------------------------- verify


def cmd_verify(config: RunConfig, out: Path, quiet: bool) -> int:
    results = run_verify(config)
    rows = [(r.check, r.value, r.bound, "pass" if r.passed else "FAIL") for r in results]
    _write_csv(out / "verify_results.csv", ["check", "value", "bound", "status"], rows)
    width = max(len(r.check) for r in results)
    for r in results:
        _say(quiet, f"{r.check:<{width}}  value={_fmt(r.value):<24} "
             f"bound={_fmt(r.bound):<24} {'pass' if r.passed else 'FAIL'}"
             + (f"  [{r.detail}]" if r.detail else ""))
    failures = [r for r in results if not r.passed]
    if failures:
        print("failed checks: " + ", ".join(r.check for r in failures), file=sys.stderr)
        for r in failures:
            if r.detail:
                print(f"  {r.check}: {r.detail}", file=sys.stderr)
        return EXIT_INVARIANT
    _say(quiet, f"all {len(results)} checks passed")
    return EXIT_OK


# ---------------------------------------------------------------- main


_COMMANDS = {
    "scf": cmd_scf,
    "extend-sweep": cmd_extend_sweep,
    "residuals": cmd_residuals,
    "expand": cmd_expand,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convolve-hf",
        description="Grid laboratory for closed-shell Hartree-Fock equations "
        "and their convolution transforms",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a key=value config file")
        p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        p.add_argument("--grid-n", type=int, default=None, help="override grid.n")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.grid_n is not None:
            config = replace(config, grid_n=args.grid_n).validated()
        out = Path(args.out or os.environ.get("CONVOLVE_HF_OUT") or config.output_dir)
        if args.quiet:
            warnings.simplefilter("ignore")
        return _COMMANDS[args.command](config, out, args.quiet)
    except (ConfigError, IllConditionedBasisError, ResolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
