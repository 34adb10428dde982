"""Scenario configuration: a flat ``key = value`` file plus command-line overrides."""

import configparser
import dataclasses
from dataclasses import dataclass

SCENARIOS = ("central-potential", "bar", "synthetic-routh", "dissipative")


class ConfigError(ValueError):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "central-potential"
    # physical parameters
    m: float = 1.0
    J: float = 1.0
    alpha: float = 0.1
    beta: float = 2.0
    nu: float = 0.7
    mu: object = -0.114  # a number, or "auto" to take m r0^2 etadot0
    mu2: float = 2.5
    c: float = 0.3
    kappa: float = 0.5
    # discretization
    h: float = None
    t_end: float = None
    N: int = None
    # central potential initial data
    r0: float = 0.2
    eta0: float = 1.5708
    rdot0: float = 0.01
    etadot0: float = -2.85
    r1: float = 0.201
    # discrete seeds for the other scenarios
    tau0: tuple = (0.0, 0.0)
    tau1: tuple = (0.1, 0.2)
    q0: tuple = (0.3, -0.2)
    q1: tuple = (0.35, -0.1)
    # solvers
    tol: float = 1e-12
    max_iter: int = 50
    oracle_tol: float = 1e-12
    # convergence study
    h_list: tuple = (0.2, 0.1, 0.05, 0.025)
    conv_t_end: float = 10.0
    # checks
    preservation_steps: int = 50
    n_random: int = 8

    @property
    def mu_value(self):
        if isinstance(self.mu, str):
            return self.m * self.r0 ** 2 * self.etadot0
        return float(self.mu)

    @property
    def step(self):
        if self.h is not None:
            return self.h
        return 0.1 if self.scenario in ("synthetic-routh", "dissipative") else 0.2

    @property
    def n_steps(self):
        if self.N is not None:
            return self.N
        t_end = self.t_end
        if t_end is None and self.scenario == "central-potential":
            t_end = 100.0
        if t_end is not None:
            return round(t_end / self.step)
        return 100 if self.scenario == "bar" else 50


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _convert(key, raw):
    if key not in _FIELDS:
        raise ConfigError(f"unknown configuration key {key!r}")
    raw = raw.strip()
    try:
        if key == "scenario":
            return raw
        if key == "mu":
            return "auto" if raw == "auto" else float(raw)
        if key in ("N", "max_iter", "preservation_steps", "n_random"):
            return int(raw)
        if key in ("tau0", "tau1", "q0", "q1", "h_list"):
            return _floats(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def validate(cfg):
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}; expected one of {SCENARIOS}")
    if not cfg.step > 0:
        raise ConfigError(f"h must be positive, got {cfg.step!r}")
    if cfg.N is not None and cfg.N < 2:
        raise ConfigError(f"N must be at least 2, got {cfg.N}")
    if cfg.t_end is not None:
        if cfg.t_end < 0:
            raise ConfigError("t_end must be non-negative")
        ratio = cfg.t_end / cfg.step
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError(f"t_end = {cfg.t_end} is not a multiple of h = {cfg.step}")
    if cfg.scenario == "central-potential":
        if cfg.r0 <= 0 or cfg.r1 <= 0:
            raise ConfigError("radii must be positive")
    if cfg.scenario == "bar" and (len(cfg.tau0) != 2 or len(cfg.tau1) != 2):
        raise ConfigError("tau0 and tau1 need two components (phi, y)")
    if cfg.scenario in ("synthetic-routh", "dissipative") and (len(cfg.q0) != 2 or len(cfg.q1) != 2):
        raise ConfigError("q0 and q1 need two components")
    hl = cfg.h_list
    if len(hl) < 3 or any(not b > 0 for b in hl):
        raise ConfigError("h_list needs at least three positive step sizes")
    if cfg.tol <= 0 or cfg.oracle_tol <= 0 or cfg.max_iter < 1:
        raise ConfigError("solver tolerances must be positive")
    return cfg


def parse_text(text):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc
    return dict(parser["config"])


def load(path=None, overrides=()):
    """Build a validated :class:`ScenarioConfig`.

    ``overrides`` is a sequence of ``key=value`` strings applied after the file.
    """
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        values.update(parse_text(text))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        values[k.strip()] = v
    kwargs = {k: _convert(k, v) for k, v in values.items()}
    return validate(ScenarioConfig(**kwargs))
