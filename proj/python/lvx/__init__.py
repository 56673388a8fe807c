"""Python access to the lvx core: checks, Volterra helpers and the CLI runner."""

from ._lvx import (
    ConfigError,
    NumericalFailure,
    bdg_constant,
    check,
    exp_kernel_family,
    heat_lp_norm,
    preset_dir,
    resolve_preset,
    run,
    stability_fixed_point,
)

__all__ = [
    "ConfigError",
    "NumericalFailure",
    "bdg_constant",
    "check",
    "exp_kernel_family",
    "heat_lp_norm",
    "preset_dir",
    "resolve_preset",
    "run",
    "stability_fixed_point",
]
