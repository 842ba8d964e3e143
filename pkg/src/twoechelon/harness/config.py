"""Experiment configuration read from a TOML file."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields, replace

from ..costs import CostParams
from ..demand import DemandModel, parse_demand
from ..trace import ETA_RULES, OGD_GRADIENTS

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODES = ("centralized", "decentralized", "both")
DESK_T = 2 ** 17
DESK_TRIALS = 16
FULL_T = 800_000
FULL_TRIALS = 128


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def default_checkpoints(T: int) -> list[int]:
    """Powers of two from ``2**10`` up to ``T``, always ending at ``T``."""
    out = []
    c = 2 ** 10
    while c <= T:
        out.append(c)
        c *= 2
    if not out or out[-1] != T:
        out.append(T)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment grid: every demand law crossed with every cost triple.

    ``costs`` entries are ``(h1, h2, p1)`` or ``(h1, h2, p1, alpha)``.
    ``delta=None`` means ``1 / T**2``. ``checkpoints=None`` means the
    default powers-of-two list. ``workers=None`` uses every CPU.
    """

    T: int = DESK_T
    trials: int = DESK_TRIALS
    mode: str = "both"
    demands: tuple = ("uniform(1,4)",)
    costs: tuple = ((0.3, 0.1, 0.5),)
    delta: float | None = None
    c1: float = 1.0
    c3: float = 1.0
    eta_rule: str = "2B"
    ogd_gradient: str = "unbiased"
    l1_cap: int = 64
    seed: int = 0
    out: str = "results"
    checkpoints: tuple | None = None
    traces: bool = False
    workers: int | None = None
    _models: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.T, int) or self.T < 1:
            raise ConfigError("T must be an integer >= 1")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be an integer >= 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.eta_rule not in ETA_RULES:
            raise ConfigError(f"eta_rule must be one of {ETA_RULES}")
        if self.ogd_gradient not in OGD_GRADIENTS:
            raise ConfigError(f"ogd_gradient must be one of {OGD_GRADIENTS}")
        if self.c1 <= 0 or self.c3 <= 0:
            raise ConfigError("c1 and c3 must be positive")
        if not isinstance(self.l1_cap, int) or self.l1_cap < 1:
            raise ConfigError("l1_cap must be an integer >= 1")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.demands or not self.costs:
            raise ConfigError("need at least one demand law and one cost triple")
        models = []
        for text in self.demands:
            try:
                m = parse_demand(text)
            except ValueError as exc:
                raise ConfigError(f"bad demand {text!r}: {exc}") from exc
            if not m.is_continuous:
                raise ConfigError(f"demand {text!r}: runs need a continuous law with density bounds")
            models.append(m)
        for c in self.costs:
            if len(c) not in (3, 4):
                raise ConfigError(f"cost entry {c!r} must have 3 or 4 numbers")
            try:
                CostParams(*map(float, c))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad cost entry {c!r}: {exc}") from exc
        if self.checkpoints is not None:
            cps = list(self.checkpoints)
            if not cps or any(not isinstance(t, int) or not 1 <= t <= self.T for t in cps):
                raise ConfigError("checkpoints must be integers in [1, T]")
            if sorted(set(cps)) != cps:
                raise ConfigError("checkpoints must be strictly increasing")
        object.__setattr__(self, "_models", tuple(models))

    @property
    def effective_checkpoints(self) -> list[int]:
        return list(self.checkpoints) if self.checkpoints is not None else default_checkpoints(self.T)

    @property
    def modes(self) -> list[str]:
        return ["centralized", "decentralized"] if self.mode == "both" else [self.mode]

    def scenarios(self) -> list[tuple[str, CostParams, DemandModel]]:
        """``(name, params, model)`` for every demand law and cost triple."""
        out = []
        for text, model in zip(self.demands, self._models):
            for c in self.costs:
                params = CostParams(*map(float, c))
                name = f"{text} h=({','.join(repr(float(v)) for v in c)})"
                out.append((name, params, model))
        return out

    def with_overrides(self, **kw) -> ExperimentConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        if "T" in kw and "checkpoints" not in kw and self.checkpoints is not None:
            kw["checkpoints"] = tuple(t for t in self.checkpoints if t <= kw["T"]) or None
        return replace(self, **kw)

    def full_scale(self) -> ExperimentConfig:
        """The full-scale horizon (800000) and trial count (128), keeping everything else."""
        return self.with_overrides(T=FULL_T, trials=FULL_TRIALS)


_KEYS = {f.name for f in fields(ExperimentConfig) if f.init}


def config_from_dict(data: dict) -> ExperimentConfig:
    unknown = sorted(set(data) - _KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kw = dict(data)
    for key in ("demands", "checkpoints"):
        if key in kw and kw[key] is not None:
            if not isinstance(kw[key], list):
                raise ConfigError(f"{key} must be a list")
            kw[key] = tuple(kw[key])
    if "costs" in kw:
        if not isinstance(kw["costs"], list) or not all(isinstance(c, list) for c in kw["costs"]):
            raise ConfigError("costs must be a list of [h1, h2, p1] lists")
        kw["costs"] = tuple(tuple(c) for c in kw["costs"])
    for key in ("delta", "c1", "c3"):
        if key in kw and isinstance(kw[key], int) and not isinstance(kw[key], bool):
            kw[key] = float(kw[key])
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    """Parse a TOML experiment file; raises :class:`ConfigError` on any problem."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path} is not valid TOML: {exc}") from exc
    return config_from_dict(data)
