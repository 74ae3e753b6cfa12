"""Run configuration: a single INI file with nested sections.

Vector values are whitespace-separated numbers; coefficient tables are rows
separated by ';' with one row per positive frequency and one column per
channel.  Initial panel profiles and disturbance shapes are polynomial
coefficient lists (ascending powers of xi) or named presets.  The resolved
configuration can be written back out and reparses to an identical value,
which is what the run manifest relies on.
"""

import configparser
import io
from dataclasses import dataclass, replace

import numpy as np

from .discretize import InitialProfiles
from .params import PhysicalParams
from .simulate import SignalSpec


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


INITIAL_PROFILE_PRESETS = ("parabolic_moment", "zero", "custom")
CONTROLLER_KINDS = ("passive", "observer")
SWEEP_PARAMETERS = ("c1", "c2", "q0", "r0")

# default sweep ranges (lo, hi) per tunable parameter
SWEEP_RANGES = {"c1": (0.5, 10.0), "c2": (0.5, 10.0), "q0": (1.0, 100.0), "r0": (0.01, 1.0)}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration (value-typed, equality-comparable)."""

    rho: float = 1.0
    a: float = 1.0
    E: float = 1.0
    I: float = 1.0
    gamma: float = 5.0
    m: float = 1.0
    I_m: float = 1.0

    n_basis: int = 10

    controller_kind: str = "passive"
    c1: float = 2.5
    c2: float = 4.0
    q0: float = 10.0
    r0: float = 0.1

    frequencies: tuple = (0.0, 1.0, 2.0, 5.0)
    yref_const: tuple = (1.0, 2.0)
    yref_cos: tuple = ((3.0, 0.0), (0.0, 1.5), (0.0, 0.0))
    yref_sin: tuple = ((0.0, 0.0), (0.0, 0.0), (0.0, -1.0))
    wd_const: tuple = (0.0, 0.0, 10.0, 15.0)
    wd_cos: tuple = ((0.0,) * 4, (0.0,) * 4, (0.0,) * 4)
    wd_sin: tuple = ((0.0,) * 4, (0.0,) * 4, (0.0,) * 4)

    t_final: float = 15.0
    dt: float = 0.005
    initial_profile: str = "parabolic_moment"
    left_velocity: tuple = ()
    right_velocity: tuple = ()
    left_moment: tuple = ()
    right_moment: tuple = ()
    hub_velocity: tuple = (0.0, 0.0)
    bd1: tuple = (1.0,)
    bd2: tuple = (1.0,)

    sweep_points: int = 25
    sweep_scale: str = "log"
    workers: int = 0  # 0 means available parallelism

    out_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        try:
            self.physical()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.n_basis < 1:
            raise ConfigError(f"n_basis must be >= 1, got {self.n_basis}")
        if self.controller_kind not in CONTROLLER_KINDS:
            raise ConfigError(f"controller kind must be one of {CONTROLLER_KINDS}")
        for name in ("c1", "c2", "q0", "r0"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be positive")
        freqs = self.frequencies
        if not freqs or any(f < 0 for f in freqs) or list(freqs) != sorted(set(freqs)):
            raise ConfigError("frequencies must be nonnegative, strictly increasing, duplicate-free")
        q = len(self.positive_frequencies())
        for name, rows, dim in (
            ("yref_cos", self.yref_cos, 2),
            ("yref_sin", self.yref_sin, 2),
            ("wd_cos", self.wd_cos, 4),
            ("wd_sin", self.wd_sin, 4),
        ):
            if len(rows) != q or any(len(r) != dim for r in rows):
                raise ConfigError(f"{name} must have {q} rows of {dim} entries")
        if len(self.yref_const) != 2 or len(self.wd_const) != 4:
            raise ConfigError("yref offset needs 2 entries and wd offset 4")
        if self.t_final <= 0 or self.dt <= 0 or self.t_final < self.dt:
            raise ConfigError("need t_final >= dt > 0")
        if self.initial_profile not in INITIAL_PROFILE_PRESETS:
            raise ConfigError(f"initial profile must be one of {INITIAL_PROFILE_PRESETS}")
        if self.sweep_scale not in ("log", "linear"):
            raise ConfigError("sweep scale must be 'log' or 'linear'")
        if self.sweep_points < 1:
            raise ConfigError("sweep_points must be >= 1")
        if self.workers < 0:
            raise ConfigError("workers must be >= 0")

    # --- resolved objects ---

    def physical(self) -> PhysicalParams:
        return PhysicalParams(
            rho=self.rho, a=self.a, E=self.E, I=self.I,
            gamma=self.gamma, m=self.m, I_m=self.I_m,
        )

    def positive_frequencies(self) -> tuple:
        return tuple(f for f in self.frequencies if f > 0.0)

    def yref_spec(self) -> SignalSpec:
        return SignalSpec.create(
            self.positive_frequencies(), self.yref_const, self.yref_cos, self.yref_sin
        )

    def wd_spec(self) -> SignalSpec:
        return SignalSpec.create(
            self.positive_frequencies(), self.wd_const, self.wd_cos, self.wd_sin
        )

    def initial_profiles(self) -> InitialProfiles:
        if self.initial_profile == "zero":
            return InitialProfiles()
        if self.initial_profile == "parabolic_moment":
            # panels at rest with parabolic initial bending moments 4(1 +- xi)^2
            return InitialProfiles(
                left_moment=lambda x: 4.0 * (1.0 + x) ** 2,
                right_moment=lambda x: 4.0 * (1.0 - x) ** 2,
            )
        def poly(coeffs):
            return tuple(coeffs) if coeffs else None
        return InitialProfiles(
            left_velocity=poly(self.left_velocity),
            right_velocity=poly(self.right_velocity),
            left_moment=poly(self.left_moment),
            right_moment=poly(self.right_moment),
            hub_velocity=tuple(self.hub_velocity),
        )

    def bd_profiles(self) -> tuple:
        return (tuple(self.bd1), tuple(self.bd2))

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **kw)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)  # shortest string that parses back to the same float
    return str(value)


def _fmt_vec(vec) -> str:
    return " ".join(_fmt(float(v)) for v in vec)


def _fmt_mat(mat) -> str:
    return " ; ".join(_fmt_vec(row) for row in mat)


def _parse_vec(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split())
    except ValueError as exc:
        raise ConfigError(f"expected numbers, got {text!r}") from exc


def _parse_mat(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(_parse_vec(row) for row in text.split(";"))


_SCHEMA = {
    "physical": {
        "rho": float, "a": float, "E": float, "I": float,
        "gamma": float, "m": float, "I_m": float,
    },
    "discretization": {"n_basis": int},
    "controller": {"kind": str, "c1": float, "c2": float, "q0": float, "r0": float},
    "signals": {
        "frequencies": "vec", "yref_const": "vec", "yref_cos": "mat",
        "yref_sin": "mat", "wd_const": "vec", "wd_cos": "mat", "wd_sin": "mat",
    },
    "simulation": {
        "t_final": float, "dt": float, "initial_profile": str,
        "left_velocity": "vec", "right_velocity": "vec",
        "left_moment": "vec", "right_moment": "vec",
        "hub_velocity": "vec", "bd1": "vec", "bd2": "vec",
    },
    "sweep": {"points": int, "scale": str, "workers": int},
    "output": {"directory": str, "seed": int},
}

# config key -> RunConfig field where the names differ
_KEY_TO_FIELD = {
    ("controller", "kind"): "controller_kind",
    ("sweep", "points"): "sweep_points",
    ("sweep", "scale"): "sweep_scale",
    ("output", "directory"): "out_dir",
}


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; missing keys keep their defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str  # keys are case sensitive (E vs e)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"could not parse config: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            kind = _SCHEMA[section][key]
            field_name = _KEY_TO_FIELD.get((section, key), key)
            try:
                if kind == "vec":
                    values[field_name] = _parse_vec(raw)
                elif kind == "mat":
                    values[field_name] = _parse_mat(raw)
                elif kind is str:
                    values[field_name] = raw.strip()
                else:
                    values[field_name] = kind(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc


def config_to_ini(cfg: RunConfig) -> str:
    """Serialize a resolved configuration; parsing the result reproduces it."""
    buf = io.StringIO()
    sections = {
        "physical": {k: _fmt(getattr(cfg, k)) for k in _SCHEMA["physical"]},
        "discretization": {"n_basis": str(cfg.n_basis)},
        "controller": {
            "kind": cfg.controller_kind,
            "c1": _fmt(cfg.c1), "c2": _fmt(cfg.c2),
            "q0": _fmt(cfg.q0), "r0": _fmt(cfg.r0),
        },
        "signals": {
            "frequencies": _fmt_vec(cfg.frequencies),
            "yref_const": _fmt_vec(cfg.yref_const),
            "yref_cos": _fmt_mat(cfg.yref_cos),
            "yref_sin": _fmt_mat(cfg.yref_sin),
            "wd_const": _fmt_vec(cfg.wd_const),
            "wd_cos": _fmt_mat(cfg.wd_cos),
            "wd_sin": _fmt_mat(cfg.wd_sin),
        },
        "simulation": {
            "t_final": _fmt(cfg.t_final),
            "dt": _fmt(cfg.dt),
            "initial_profile": cfg.initial_profile,
            "left_velocity": _fmt_vec(cfg.left_velocity),
            "right_velocity": _fmt_vec(cfg.right_velocity),
            "left_moment": _fmt_vec(cfg.left_moment),
            "right_moment": _fmt_vec(cfg.right_moment),
            "hub_velocity": _fmt_vec(cfg.hub_velocity),
            "bd1": _fmt_vec(cfg.bd1),
            "bd2": _fmt_vec(cfg.bd2),
        },
        "sweep": {
            "points": str(cfg.sweep_points),
            "scale": cfg.sweep_scale,
            "workers": str(cfg.workers),
        },
        "output": {"directory": cfg.out_dir, "seed": str(cfg.seed)},
    }
    for name, body in sections.items():
        buf.write(f"[{name}]\n")
        for key, val in body.items():
            buf.write(f"{key} = {val}\n")
        buf.write("\n")
    return buf.getvalue()


def write_manifest(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(config_to_ini(cfg))


def default_sweep_grid(cfg: RunConfig, parameter: str) -> np.ndarray:
    """Default grid for one tunable parameter (log-spaced over its range)."""
    if parameter not in SWEEP_RANGES:
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    lo, hi = SWEEP_RANGES[parameter]
    if cfg.sweep_scale == "log":
        return np.geomspace(lo, hi, cfg.sweep_points)
    return np.linspace(lo, hi, cfg.sweep_points)
