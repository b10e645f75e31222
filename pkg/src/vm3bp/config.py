"""Run configuration for the command-line harness.

Configs are INI files read with :mod:`configparser`.  Grammar::

    [system]
    nu = 0.01215            # 0 < nu <= 1/2
    G = 1.0
    mode = rotating         # rotating | collinear

    [law]
    spec = linear:0.1       # constant[:u0] | linear:a | exponential:a |
                            # mestschersky:alpha,beta,gamma | kappa[:u0[,u_dot0]]
    kappa = 2.0             # optional, must exceed 1

    [time]
    t0 = 0.0
    t_end = 10.0

    [integrator]
    rtol = 1e-10
    atol = 1e-12
    initial_step = 0.0001
    max_step = inf
    max_steps = 1000000

    [points]
    labels = L1,L2,L3,L4,L5 # L0..L11
    explicit = 0.5,0.866,0 ; 0.1,0.2,0.3   # xi,eta,zeta triples separated by ';'
    ring_phase = 0.7853981633974483

    [run]
    families = collinear,triangular   # collinear | triangular | coplanar | ring
    threshold = 1e-06
    out = out
    svg = false
    nu_grid = 0.1,0.3,0.5
    kappa_grid = 1.5,2.0
    workers = 1

Floats are written with ``repr`` so that parsing a written config returns an
equal :class:`RunConfig`.
"""
from __future__ import annotations

import configparser
import dataclasses
import io
import math
from dataclasses import dataclass

from .equilibria import LABELS
from .odecore import IntegratorSettings
from .primary import MODES

__all__ = ["ConfigError", "RunConfig", "FAMILIES", "load_config", "parse_config", "convert_value"]

FAMILIES = ("collinear", "triangular", "coplanar", "ring")
LAW_KINDS = ("constant", "linear", "exponential", "mestschersky", "kappa")

# field -> (section, key)
_LAYOUT = {
    "nu": ("system", "nu"),
    "G": ("system", "G"),
    "mode": ("system", "mode"),
    "mass_law": ("law", "spec"),
    "kappa": ("law", "kappa"),
    "t0": ("time", "t0"),
    "t_end": ("time", "t_end"),
    "rtol": ("integrator", "rtol"),
    "atol": ("integrator", "atol"),
    "initial_step": ("integrator", "initial_step"),
    "max_step": ("integrator", "max_step"),
    "max_steps": ("integrator", "max_steps"),
    "points": ("points", "labels"),
    "explicit_points": ("points", "explicit"),
    "ring_phase": ("points", "ring_phase"),
    "families": ("run", "families"),
    "threshold": ("run", "threshold"),
    "out": ("run", "out"),
    "svg": ("run", "svg"),
    "nu_grid": ("run", "nu_grid"),
    "kappa_grid": ("run", "kappa_grid"),
    "workers": ("run", "workers"),
}


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class RunConfig:
    nu: float = 0.01215
    G: float = 1.0
    mode: str = "rotating"
    mass_law: str = "constant"
    kappa: float | None = None
    t0: float = 0.0
    t_end: float = 10.0
    rtol: float = 1e-10
    atol: float = 1e-12
    initial_step: float = 1e-4
    max_step: float = math.inf
    max_steps: int = 1_000_000
    points: tuple[str, ...] = ("L1", "L2", "L3", "L4", "L5")
    explicit_points: tuple[tuple[float, float, float], ...] = ()
    ring_phase: float = math.pi / 4
    families: tuple[str, ...] = ("collinear", "triangular")
    threshold: float = 1e-6
    out: str = "out"
    svg: bool = False
    nu_grid: tuple[float, ...] = ()
    kappa_grid: tuple[float, ...] = ()
    workers: int = 1

    def __post_init__(self):
        _check_nu("nu", self.nu)
        for v in self.nu_grid:
            _check_nu("nu_grid", v)
        if self.kappa is not None:
            _check_kappa("kappa", self.kappa)
        for v in self.kappa_grid:
            _check_kappa("kappa_grid", v)
        if not (math.isfinite(self.G) and self.G > 0):
            raise ConfigError("G", f"must be a positive number (got {self.G!r})")
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)} (got {self.mode!r})")
        kind = self.mass_law.partition(":")[0].strip().lower()
        if kind not in LAW_KINDS:
            raise ConfigError("mass_law", f"unknown kind {kind!r}; expected one of {', '.join(LAW_KINDS)}")
        if kind == "kappa" and self.kappa is None:
            raise ConfigError("kappa", "the kappa mass law needs a kappa value")
        if not (math.isfinite(self.t0) and math.isfinite(self.t_end) and self.t_end > self.t0):
            raise ConfigError("t_end", f"must be finite and exceed t0={self.t0!r} (got {self.t_end!r})")
        for name in ("rtol", "atol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(name, f"tolerance must be strictly positive (got {v!r})")
        if not self.initial_step > 0:
            raise ConfigError("initial_step", "must be positive")
        if not self.max_step >= self.initial_step:
            raise ConfigError("max_step", "must be at least initial_step")
        if self.max_steps < 1:
            raise ConfigError("max_steps", "must be at least 1")
        for lab in self.points:
            if lab not in LABELS[:12]:
                raise ConfigError("points", f"unknown label {lab!r}; expected L0..L11")
        for p in self.explicit_points:
            if len(p) != 3 or not all(math.isfinite(c) for c in p):
                raise ConfigError("explicit_points", "each point needs three finite coordinates")
        for fam in self.families:
            if fam not in FAMILIES:
                raise ConfigError("families", f"unknown family {fam!r}; expected one of {', '.join(FAMILIES)}")
        if not (self.threshold > 0):
            raise ConfigError("threshold", "must be positive")
        if self.workers < 1:
            raise ConfigError("workers", "must be at least 1")

    @property
    def settings(self) -> IntegratorSettings:
        return IntegratorSettings(
            rtol=self.rtol,
            atol=self.atol,
            initial_step=self.initial_step,
            max_step=self.max_step,
            max_steps=self.max_steps,
        )

    @property
    def t_span(self) -> tuple[float, float]:
        return (self.t0, self.t_end)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for f in dataclasses.fields(self):
            section, key = _LAYOUT[f.name]
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, key, _format(getattr(self, f.name)))
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _check_nu(name, v):
    if not (isinstance(v, (int, float)) and 0.0 < v <= 0.5):
        raise ConfigError(name, f"nu must lie in (0, 1/2] (got {v!r})")


def _check_kappa(name, v):
    if not v > 1.0:
        raise ConfigError(name, f"kappa must exceed 1 (got {v!r})")


def _format(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return " ; ".join(",".join(repr(float(c)) for c in p) for p in v)
        return ",".join(_format(x) for x in v)
    return str(v)


def _floats(field_name, text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(field_name, f"expected comma-separated numbers (got {text!r})") from None


def convert_value(field_name: str, text: str):
    """Parse one raw config string for ``field_name`` into its typed value."""
    text = text.strip()
    try:
        if field_name in ("nu", "G", "t0", "t_end", "rtol", "atol", "initial_step",
                          "max_step", "ring_phase", "threshold"):
            return float(text)
        if field_name == "kappa":
            return float(text) if text else None
        if field_name in ("max_steps", "workers"):
            return int(text)
    except ValueError:
        raise ConfigError(field_name, f"expected a number (got {text!r})") from None
    if field_name == "svg":
        low = text.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError("svg", f"expected true or false (got {text!r})")
        return low in ("true", "1", "yes")
    if field_name in ("points", "families"):
        return tuple(x.strip() for x in text.split(",") if x.strip())
    if field_name in ("nu_grid", "kappa_grid"):
        return _floats(field_name, text)
    if field_name == "explicit_points":
        pts = []
        for chunk in text.split(";"):
            if chunk.strip():
                pts.append(_floats(field_name, chunk))
        return tuple(pts)
    return text


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse INI text into a validated :class:`RunConfig`.

    ``overrides`` maps field names to already-typed values and wins over the
    file.  Unknown sections or keys are rejected.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", f"malformed file: {exc}") from None
    reverse = {v: k for k, v in _LAYOUT.items()}
    values = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            name = reverse.get((section, key))
            if name is None:
                raise ConfigError(f"{section}.{key}", "unknown configuration key")
            values[name] = convert_value(name, raw)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values)


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    text = ""
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, overrides)
