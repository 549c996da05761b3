"""Plain-text scenario files.

INI-style sections [params], [control], [scenario]. Every rate key also
accepts a ``_days`` variant giving the mean period instead (mu_days=255
means mu = 1/255); the settling constant c accepts c_days the same way.
Unknown sections or keys are errors so typos cannot silently fall back to
defaults.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .control import (
    ControlConfig,
    ModulationFamily,
    ReferenceProfile,
    VaccinationLaw,
)
from .errors import ConfigError
from .model import ModelParams, StateVec
from .sim import ScenarioConfig

_RATE_KEYS = ("mu", "omega", "beta", "sigma", "gamma", "nu")
_PARAM_KEYS = _RATE_KEYS + ("rho", "I0_ref", "N0_ref")
_CONTROL_NUMBER_KEYS = ("K_R", "K_Rd", "eps", "eps0", "vartheta", "c")
_CONTROL_ENUM_KEYS = ("law", "g_family", "h_family")
_SCENARIO_KEYS = ("name", "S0", "E0", "I0", "R0", "horizon", "dt", "steady_state_tol")


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from None


def _parse_enum(section: str, key: str, raw: str, enum_cls):
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise ConfigError(
            f"[{section}] {key} = {raw!r}; allowed values: {allowed}"
        ) from None


def _rate_with_period(section, items: dict[str, str], key: str) -> float | None:
    """Value for a rate key, honoring the _days reciprocal spelling."""
    direct = items.pop(key, None)
    period = items.pop(f"{key}_days", None)
    if direct is not None and period is not None:
        raise ConfigError(f"[{section}] give {key} or {key}_days, not both")
    if direct is not None:
        return _parse_float(section, key, direct)
    if period is not None:
        days = _parse_float(section, f"{key}_days", period)
        if days == 0.0:
            raise ConfigError(f"[{section}] {key}_days must be nonzero")
        return 1.0 / days
    return None


def _reject_unknown(section: str, items: dict[str, str]) -> None:
    if items:
        raise ConfigError(
            f"unknown key(s) in [{section}]: {', '.join(sorted(items))}"
        )


def _build_params(items: dict[str, str]) -> ModelParams:
    values: dict[str, float] = {}
    for key in _RATE_KEYS:
        v = _rate_with_period("params", items, key)
        if v is None:
            raise ConfigError(f"[params] missing required key {key} (or {key}_days)")
        values[key] = v
    rho = items.pop("rho", None)
    if rho is None:
        raise ConfigError("[params] missing required key rho")
    values["rho"] = _parse_float("params", "rho", rho)
    for key in ("I0_ref", "N0_ref"):
        raw = items.pop(key, None)
        if raw is not None:
            values[key] = _parse_float("params", key, raw)
    _reject_unknown("params", items)
    return ModelParams(**values)


def _build_control(items: dict[str, str]) -> ControlConfig:
    kwargs = {}
    raw = items.pop("law", None)
    if raw is not None:
        kwargs["law"] = _parse_enum("control", "law", raw, VaccinationLaw)
    raw = items.pop("g_family", None)
    if raw is not None:
        kwargs["g_family"] = _parse_enum("control", "g_family", raw, ModulationFamily)
    raw = items.pop("h_family", None)
    if raw is not None:
        kwargs["h_family"] = _parse_enum("control", "h_family", raw, ReferenceProfile)
    c = _rate_with_period("control", items, "c")
    if c is not None:
        kwargs["c"] = c
    for key in ("K_R", "K_Rd", "eps", "eps0", "vartheta"):
        raw = items.pop(key, None)
        if raw is not None:
            kwargs[key] = _parse_float("control", key, raw)
    _reject_unknown("control", items)
    return ControlConfig(**kwargs)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse a scenario file. The result is unresolved: defaults like eps0
    are filled in by ScenarioConfig.resolved() (integrate does this)."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (K_R vs k_r)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    known = {"params", "control", "scenario"}
    extra = set(parser.sections()) - known
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")
    if "params" not in parser:
        raise ConfigError("config needs a [params] section")

    params = _build_params(dict(parser["params"]))
    control = (
        _build_control(dict(parser["control"])) if "control" in parser
        else ControlConfig()
    )

    scen = dict(parser["scenario"]) if "scenario" in parser else {}
    name = scen.pop("name", path.stem)
    x0_vals = []
    for key in ("S0", "E0", "I0", "R0"):
        raw = scen.pop(key, None)
        if raw is None:
            raise ConfigError(f"[scenario] missing required key {key}")
        x0_vals.append(_parse_float("scenario", key, raw))
    kwargs = {}
    for key in ("horizon", "dt", "steady_state_tol"):
        raw = scen.pop(key, None)
        if raw is not None:
            kwargs[key] = _parse_float("scenario", key, raw)
    _reject_unknown("scenario", scen)

    return ScenarioConfig(
        params=params,
        x0=StateVec(*x0_vals),
        control=control,
        name=name,
        **kwargs,
    )
