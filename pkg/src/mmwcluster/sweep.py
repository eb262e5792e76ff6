"""Parameter sweeps and CSV emission for the reference figure curves.

A sweep evaluates one metric (coverage or area spectral efficiency) over an
axis of parameter values, for a set of association models and engines, and
writes one CSV row per (value, model, engine).  Rows are computed by a
worker pool but always written in spec order, so output files are
byte-stable for a fixed (config, spec, seed) regardless of thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from . import analytical, montecarlo
from .analytical import CoverageFlags
from .config import _FLOAT_KEYS, apply_override
from .errors import ConfigError, NumericalError, UsageError
from .model import AssociationModel, NetworkConfig

__all__ = ["SweepSpec", "run_sweep", "figure_specs", "parse_sweep_spec", "CSV_HEADER"]

CSV_HEADER = "axis_value,model,engine,coverage_or_ase,ci_half_width,is_upper_bound,seed,error"

_AXES = ("mean_active", "gamma_th_db", "scatter_std", "carrier_hz", "avg_los_distance")
_BASE_ENGINES = ("analytical", "analytical_approx", "lower_bound", "montecarlo")
_MC_VARIANTS = {
    "intra_only": dict(include_inter=False),
    "inter_only": dict(include_intra=False),
    "no_interference": dict(include_intra=False, include_inter=False),
    "los_only": dict(include_nlos_interference=False),
    "nlos_only": dict(include_los_interference=False),
    "losball": {},  # blockage-mode switch, handled separately
}


@dataclass(frozen=True)
class SweepSpec:
    """One figure curve family: axis, values, models, engines, metric."""

    axis: str
    values: tuple[float, ...]
    models: tuple[AssociationModel, ...]
    engines: tuple[str, ...]
    metric: str = "coverage"
    config_overrides: tuple[tuple[str, float], ...] = ()
    label: str = ""

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ConfigError(f"axis must be one of {_AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("values must be non-empty")
        if not self.engines:
            raise ConfigError("engines must be non-empty")
        if not self.models:
            raise ConfigError("models must be non-empty")
        if self.metric not in ("coverage", "ase"):
            raise ConfigError("metric must be 'coverage' or 'ase'")
        for engine in self.engines:
            _parse_engine(engine)


def _parse_engine(token: str) -> tuple[str, tuple[str, ...]]:
    parts = token.split(":")
    base, variants = parts[0], tuple(parts[1:])
    if base not in _BASE_ENGINES:
        raise ConfigError(f"unknown engine {token!r}")
    if variants and base != "montecarlo":
        raise ConfigError(f"engine {base!r} takes no variants")
    for var in variants:
        if var not in _MC_VARIANTS:
            raise ConfigError(f"unknown montecarlo variant {var!r}")
    return base, variants


def _mc_case(variants: tuple[str, ...], cfg: NetworkConfig):
    opts = {}
    blockage: montecarlo.BlockageMode = montecarlo.IidExponential()
    for var in variants:
        if var == "losball":
            blockage = montecarlo.LosBall(math.log(2.0) / cfg.channel.blockage_rate)
        else:
            opts.update(_MC_VARIANTS[var])
    return montecarlo.SinrOptions(**opts), blockage


@dataclass(frozen=True)
class _Row:
    axis_value: float
    model: AssociationModel
    engine: str
    value: float | None
    ci_half_width: float | None
    is_upper_bound: bool
    seed: int | None
    error: str = ""


def _format(x: float | None) -> str:
    if x is None:
        return ""
    return f"{x:.9g}"


def _row_seed(base_seed: int, index: int) -> int:
    return (base_seed * 1_000_003 + index) & ((1 << 63) - 1)


def _evaluate_point(cfg: NetworkConfig, model: AssociationModel, engine: str,
                    metric: str, axis_value: float, seed: int, trials: int) -> _Row:
    gamma = 10.0 ** (cfg.gamma_th_db / 10.0)
    base, variants = _parse_engine(engine)
    try:
        if base == "analytical":
            value = analytical.coverage(model, gamma, CoverageFlags(), cfg)
            ci, upper, row_seed = None, True, None
        elif base == "analytical_approx":
            value = analytical.coverage(model, gamma, CoverageFlags(use_assumption1=True), cfg)
            ci, upper, row_seed = None, True, None
        elif base == "lower_bound":
            value = analytical.coverage_lower_bound(gamma, cfg)
            ci, upper, row_seed = None, False, None
        else:
            options, blockage = _mc_case(variants, cfg)
            est = montecarlo.estimate_coverage(cfg, model, gamma, trials, seed,
                                               blockage, options)
            value, ci, upper, row_seed = est.p_hat, est.half_width_95, False, seed
        if metric == "ase":
            value = analytical.ase_from_coverage(cfg, gamma, value)
            if ci is not None:
                ci = analytical.ase_from_coverage(cfg, gamma, ci)
        return _Row(axis_value, model, engine, value, ci, upper, row_seed)
    except (UsageError, NumericalError) as exc:
        return _Row(axis_value, model, engine, None, None, base != "lower_bound"
                    and base != "montecarlo", None, error=str(exc).replace(",", ";"))


def run_sweep(cfg: NetworkConfig, spec: SweepSpec, out_path: str | Path,
              seed: int = 1, trials: int = 20_000, threads: int = 1) -> Path:
    """Evaluate the sweep and write the CSV; returns the output path.

    Per-point numerical failures land in the ``error`` column instead of
    aborting the sweep.
    """
    base_cfg = cfg
    for key, value in spec.config_overrides:
        base_cfg = apply_override(base_cfg, key, value)

    points = []
    for value in spec.values:
        cfg_v = apply_override(base_cfg, spec.axis, value)
        for model in spec.models:
            for engine in spec.engines:
                points.append((value, cfg_v, model, engine))

    def work(item):
        index, (value, cfg_v, model, engine) = item
        return _evaluate_point(cfg_v, model, engine, spec.metric, value,
                               _row_seed(seed, index), trials)

    items = list(enumerate(points))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, items))
    else:
        rows = [work(item) for item in items]

    out_path = Path(out_path)
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join([
            _format(row.axis_value),
            row.model.value,
            row.engine,
            _format(row.value),
            _format(row.ci_half_width),
            "true" if row.is_upper_bound else "false",
            "" if row.seed is None else str(row.seed),
            row.error,
        ]))
    out_path.write_text("\n".join(lines) + "\n")
    return out_path


# ---------------------------------------------------------------------------
# Built-in figure presets
# ---------------------------------------------------------------------------

_ALL_MODELS = (AssociationModel.UNIFORM, AssociationModel.CLOSEST,
               AssociationModel.CLOSEST_LOS)


def figure_specs(figure: str) -> list[SweepSpec]:
    """Named sweeps reproducing the reference figures (one CSV per spec)."""
    s_axis = tuple(float(s) for s in range(1, 11))
    g_axis = tuple(float(g) for g in range(0, 41, 5))
    if figure == "2a":
        return [SweepSpec(
            axis="mean_active", values=s_axis, models=_ALL_MODELS,
            engines=("analytical", "analytical_approx", "montecarlo"),
            config_overrides=(("scatter_std", 20.0), ("gamma_th_db", 20.0)),
            label="fig2a")]
    if figure == "2b":
        return [SweepSpec(
            axis="gamma_th_db", values=g_axis, models=(AssociationModel.UNIFORM,),
            engines=("montecarlo", "lower_bound", "analytical"),
            config_overrides=(("carrier_hz", 60e9), ("scatter_std", 10.0),
                              ("mean_active", 10.0)),
            label="fig2b")]
    if figure == "3a":
        return [SweepSpec(
            axis="mean_active", values=tuple(float(s) for s in range(1, 7)),
            models=(AssociationModel.UNIFORM,),
            engines=("montecarlo", "montecarlo:intra_only", "montecarlo:inter_only"),
            config_overrides=(("scatter_std", 10.0), ("gamma_th_db", 10.0)),
            label="fig3a")]
    if figure == "3b":
        return [SweepSpec(
            axis="mean_active", values=tuple(float(s) for s in range(4, 11)),
            models=(AssociationModel.UNIFORM,),
            engines=("montecarlo", "montecarlo:losball"),
            config_overrides=(("scatter_std", 10.0), ("gamma_th_db", 10.0)),
            label="fig3b")]
    if figure == "4a":
        return [SweepSpec(
            axis="mean_active", values=s_axis, models=_ALL_MODELS,
            engines=("montecarlo", "montecarlo:los_only", "montecarlo:nlos_only",
                     "montecarlo:no_interference"),
            config_overrides=(("scatter_std", 20.0), ("gamma_th_db", 20.0)),
            label="fig4a")]
    if figure == "4b":
        # receiver beam variants: default, higher main lobe, narrower main lobe
        variants = [
            ("rx10db90deg", ()),
            ("rx20db90deg", (("rx_main_lobe_db", 20.0),)),
            ("rx10db45deg", (("rx_beamwidth_deg", 45.0),)),
        ]
        return [SweepSpec(
            axis="gamma_th_db", values=g_axis, models=_ALL_MODELS,
            engines=("analytical_approx", "montecarlo"),
            config_overrides=(("scatter_std", 10.0), ("mean_active", 3.0)) + extra,
            label=f"fig4b_{name}") for name, extra in variants]
    if figure == "5a":
        return [SweepSpec(
            axis="mean_active", values=tuple(float(s) for s in range(1, 16)),
            models=_ALL_MODELS, engines=("analytical_approx", "montecarlo"),
            metric="ase",
            config_overrides=(("scatter_std", 10.0), ("gamma_th_db", 20.0)),
            label="fig5a")]
    if figure == "5b":
        return [SweepSpec(
            axis="gamma_th_db", values=g_axis, models=(AssociationModel.UNIFORM,),
            engines=("montecarlo", "analytical"),
            config_overrides=(("carrier_hz", carrier), ("scatter_std", 30.0),
                              ("mean_active", 3.0)),
            label=f"fig5b_{int(carrier / 1e9)}ghz")
            for carrier in (28e9, 38e9, 60e9, 73e9)]
    raise ConfigError(f"unknown figure id {figure!r}; expected one of "
                      "2a, 2b, 3a, 3b, 4a, 4b, 5a, 5b")


# rx beam overrides are only meaningful inside figure presets; accept them in
# sweep-spec files too by treating every non-reserved key as a config override.
_RESERVED_SPEC_KEYS = {"axis", "values", "models", "engines", "metric"}
_EXTRA_OVERRIDE_KEYS = set(_FLOAT_KEYS) | {"carrier_hz"}


def parse_sweep_spec(path: str | Path) -> SweepSpec:
    """Parse a sweep-spec file (same line-oriented key = value format).

    Reserved keys: axis, values (comma-separated), models, engines, metric.
    Any other key must be a config key and is applied as an override before
    the sweep runs.
    """
    axis = None
    values: tuple[float, ...] = ()
    models = _ALL_MODELS
    engines: tuple[str, ...] = ()
    metric = "coverage"
    overrides: list[tuple[str, float]] = []
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        try:
            if key == "axis":
                axis = val
            elif key == "values":
                values = tuple(float(tok) for tok in val.split(","))
            elif key == "models":
                models = tuple(AssociationModel(tok.strip()) for tok in val.split(","))
            elif key == "engines":
                engines = tuple(tok.strip() for tok in val.split(","))
            elif key == "metric":
                metric = val
            elif key in _EXTRA_OVERRIDE_KEYS:
                overrides.append((key, float(val)))
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    if axis is None:
        raise ConfigError(f"{path}: missing 'axis'")
    return SweepSpec(axis=axis, values=values, models=models, engines=engines,
                     metric=metric, config_overrides=tuple(overrides),
                     label=Path(path).stem)
