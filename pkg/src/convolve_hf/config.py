"""Plain key-value run configuration.

One ``key = value`` per line, ``#`` starts a comment, unknown keys are
rejected, and every numeric key is validated against the module
preconditions before any computation starts.  Nuclei are listed as
semicolon-separated ``Z,x,y,z`` quadruples.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError
from .fields import GridSpec
from .hf import MolecularSystem
from .scf import ScfConfig

__all__ = ["RunConfig", "parse_config", "load_config"]

_EIGENSOLVERS = ("imaginary_time", "inverse_iteration")
_RESIDUAL_SOURCES = ("scf", "hydrogen_identity", "zero")


@dataclass(frozen=True)
class RunConfig:
    grid_n: int = 64
    grid_extent: float = 10.0
    nuclei: tuple = ((2.0, (0.0, 0.0, 0.0)),)
    pairs: int = 1
    scf_max_iter: int = 200
    scf_mixing: float = 0.6
    scf_tol_energy: float = 1e-7
    scf_tol_orbital: float = 1e-6
    scf_eigensolver: str = "imaginary_time"
    scf_time_step: float | None = None
    poisson_t_values: tuple[float, ...] = (0.8, 0.4, 0.2, 0.1)
    window_alpha: float = 1.0
    basis_alpha0: float = 0.1
    basis_beta: float = 3.0
    basis_count: int = 6
    masking_radius_cells: float = 2.0
    output_dir: str = "out"
    residuals_source: str = "scf"
    residuals_t: float = 0.25
    expand_orders: tuple[int, ...] | None = None
    verify_violate_sup: bool = False  # test hook: breaks the sup-bound precondition

    def grid(self) -> GridSpec:
        return GridSpec(points_per_axis=self.grid_n, extent=self.grid_extent)

    def system(self) -> MolecularSystem:
        margin = self.masking_radius_cells * self.grid().spacing
        return MolecularSystem(
            nuclei=self.nuclei, pair_count=self.pairs, regular_set_margin=margin
        )

    def scf(self) -> ScfConfig:
        return ScfConfig(
            max_iterations=self.scf_max_iter,
            mixing=self.scf_mixing,
            energy_tolerance=self.scf_tol_energy,
            orbital_tolerance=self.scf_tol_orbital,
            eigensolver=self.scf_eigensolver,
            time_step=self.scf_time_step,
        )

    def validated(self) -> "RunConfig":
        """Trigger every module-level precondition; raise ConfigError on any."""
        try:
            grid = self.grid()
            system = self.system()
            system.require_inside(grid)
            self.scf()
        except (ValueError, NotImplementedError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.scf_eigensolver not in _EIGENSOLVERS:
            raise ConfigError(f"scf.eigensolver must be one of {_EIGENSOLVERS}")
        if self.residuals_source not in _RESIDUAL_SOURCES:
            raise ConfigError(f"residuals.source must be one of {_RESIDUAL_SOURCES}")
        if not all(t > 0 for t in self.poisson_t_values):
            raise ConfigError("poisson.t_values must be positive")
        if self.window_alpha <= 0:
            raise ConfigError("window.alpha must be positive")
        if self.basis_alpha0 <= 0:
            raise ConfigError("basis.alpha0 must be positive")
        if self.basis_beta <= 1.0:
            raise ConfigError("basis.beta must exceed 1")
        if self.basis_count < 1:
            raise ConfigError("basis.count must be >= 1")
        if self.masking_radius_cells <= 0:
            raise ConfigError("masking.radius_cells must be positive")
        if self.residuals_t <= 0:
            raise ConfigError("residuals.t must be positive")
        if self.expand_orders is not None:
            if not self.expand_orders:
                raise ConfigError("expand.orders must not be empty")
            if any(n < 1 for n in self.expand_orders):
                raise ConfigError("expand.orders must be positive integers")
            if max(self.expand_orders) > self.basis_count:
                raise ConfigError("expand.orders exceed basis.count")
        return self

    def orders(self) -> tuple[int, ...]:
        if self.expand_orders is not None:
            return self.expand_orders
        if self.basis_count == 1:
            return (1,)
        return tuple(range(2, self.basis_count + 1, 2))


def _parse_nuclei(raw: str, key: str):
    out = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 4:
            raise ConfigError(f"{key}: expected 'Z,x,y,z' but got {chunk!r}")
        try:
            z, x, y, zz = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"{key}: non-numeric entry in {chunk!r}") from exc
        out.append((z, (x, y, zz)))
    if not out:
        raise ConfigError(f"{key}: no nuclei given")
    return tuple(out)


def _parse_float_list(raw: str, key: str):
    try:
        return tuple(float(p) for p in raw.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated reals, got {raw!r}") from exc


def _parse_int_list(raw: str, key: str):
    try:
        return tuple(int(p) for p in raw.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated integers, got {raw!r}") from exc


def _scalar(parser, key):
    def convert(raw: str):
        try:
            return parser(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {raw!r}") from exc

    return convert


def _parse_bool(raw: str, key: str) -> bool:
    v = raw.strip().lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _key_table():
    return {
        "grid.n": ("grid_n", _scalar(int, "grid.n")),
        "grid.extent": ("grid_extent", _scalar(float, "grid.extent")),
        "system.nuclei": ("nuclei", lambda raw: _parse_nuclei(raw, "system.nuclei")),
        "system.pairs": ("pairs", _scalar(int, "system.pairs")),
        "scf.max_iter": ("scf_max_iter", _scalar(int, "scf.max_iter")),
        "scf.mixing": ("scf_mixing", _scalar(float, "scf.mixing")),
        "scf.tol_energy": ("scf_tol_energy", _scalar(float, "scf.tol_energy")),
        "scf.tol_orbital": ("scf_tol_orbital", _scalar(float, "scf.tol_orbital")),
        "scf.eigensolver": ("scf_eigensolver", str),
        "scf.time_step": (
            "scf_time_step",
            lambda raw: None if raw.strip().lower() == "auto" else _scalar(float, "scf.time_step")(raw),
        ),
        "poisson.t_values": (
            "poisson_t_values",
            lambda raw: _parse_float_list(raw, "poisson.t_values"),
        ),
        "window.alpha": ("window_alpha", _scalar(float, "window.alpha")),
        "basis.alpha0": ("basis_alpha0", _scalar(float, "basis.alpha0")),
        "basis.beta": ("basis_beta", _scalar(float, "basis.beta")),
        "basis.count": ("basis_count", _scalar(int, "basis.count")),
        "masking.radius_cells": (
            "masking_radius_cells",
            _scalar(float, "masking.radius_cells"),
        ),
        "output.dir": ("output_dir", str),
        "residuals.source": ("residuals_source", str),
        "residuals.t": ("residuals_t", _scalar(float, "residuals.t")),
        "expand.orders": ("expand_orders", lambda raw: _parse_int_list(raw, "expand.orders")),
        "verify.violate_sup": (
            "verify_violate_sup",
            lambda raw: _parse_bool(raw, "verify.violate_sup"),
        ),
    }


def parse_config(text: str) -> RunConfig:
    table = _key_table()
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in table:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, convert = table[key]
        updates[attr] = convert(raw)
    return replace(RunConfig(), **updates).validated()


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text())
