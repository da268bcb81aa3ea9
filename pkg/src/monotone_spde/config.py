"""Run configuration: sectioned TOML with a canonical re-serialisation.

Canonical form: every section and field written in declaration order with
defaults filled in, floats as floats, through ``tomli_w``.  Loading the
canonical text gives back an equal config, and re-serialising it gives the
same bytes.
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .field_space import GridSpec
from .operators import PhysParams

_REQUIRED = object()


class ConfigError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(frozen=True)
class GridSection:
    n: int = _REQUIRED
    d: int = 2
    pad_factor: int = 2


@dataclass(frozen=True)
class PhysicsSection:
    mu: float = 1.0
    beta: float = 1.0
    p: float = 3.0
    r: float = 6.0


@dataclass(frozen=True)
class NoiseSection:
    kind: str = "additive_diagonal"
    K_max: int = 8
    c_decay: float = 1.0
    amplitude: float = 1.0
    a: float = 1.0
    b: float = 0.0
    coeffs: list = field(default_factory=list)  # explicit c_k; overrides K_max/c_decay/amplitude when nonempty


@dataclass(frozen=True)
class InitialSection:
    kind: str = "random"  # "random" or "zero"
    amplitude: float = 1.0
    decay: float = 3.0
    seed: int = 0


@dataclass(frozen=True)
class TimeSection:
    T: float = 0.1
    dt: float = 1e-3


@dataclass(frozen=True)
class EnsembleSection:
    n_paths: int = 10000


@dataclass(frozen=True)
class InequalitySection:
    n_samples: int = 10000
    gn_safety: float = 1.5


@dataclass(frozen=True)
class LdpSection:
    eps_list: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    delta: float = 1e-2
    M: list = field(default_factory=lambda: [1.0, 2.0, 4.0])
    n_paths: int = 1000
    rho: float = 0.5
    gaussian_eps_list: list = field(default_factory=lambda: [2.5, 1.8, 1.4])
    gaussian_n_paths: int = 100000


@dataclass(frozen=True)
class VaradhanSection:
    t_list: list = field(default_factory=lambda: [0.4, 0.2, 0.1])
    center_shift: float = 0.3  # center2 = u0 + center_shift * phi_1
    rho2: float = 0.1
    n_paths: int = 100000


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json"])


_SECTIONS = {
    "grid": GridSection,
    "physics": PhysicsSection,
    "noise": NoiseSection,
    "initial": InitialSection,
    "time": TimeSection,
    "ensemble": EnsembleSection,
    "inequalities": InequalitySection,
    "ldp": LdpSection,
    "varadhan": VaradhanSection,
    "output": OutputSection,
}


@dataclass(frozen=True)
class RunConfig:
    grid: GridSection
    physics: PhysicsSection = PhysicsSection()
    noise: NoiseSection = NoiseSection()
    initial: InitialSection = InitialSection()
    time: TimeSection = TimeSection()
    ensemble: EnsembleSection = EnsembleSection()
    inequalities: InequalitySection = InequalitySection()
    ldp: LdpSection = LdpSection()
    varadhan: VaradhanSection = VaradhanSection()
    output: OutputSection = OutputSection()
    seed: int = 0

    def __post_init__(self):
        try:
            self.grid_spec()
        except ValueError as e:
            raise ConfigError("grid", str(e)) from None
        try:
            self.phys_params()
        except ValueError as e:
            msg = str(e)
            where = msg.split(" ", 1)[0] if msg.startswith("physics.") else "physics"
            raise ConfigError(where, msg) from None
        if self.noise.kind not in ("additive_diagonal", "projected_multiplicative"):
            raise ConfigError("noise.kind", f"unknown noise kind {self.noise.kind!r}")
        if self.noise.kind == "additive_diagonal" and self.noise.b != 0:
            raise ConfigError("noise.b", "must be 0 for additive_diagonal noise")
        if self.noise.K_max < 1:
            raise ConfigError("noise.K_max", "must be >= 1")
        if any(not c > 0 for c in self.noise.coeffs):
            raise ConfigError("noise.coeffs", "entries must be positive")
        if self.initial.kind not in ("random", "zero"):
            raise ConfigError("initial.kind", "must be 'random' or 'zero'")
        if not (self.time.T >= 0 and self.time.dt > 0):
            raise ConfigError("time", "need T >= 0 and dt > 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        for where, val in [("ensemble.n_paths", self.ensemble.n_paths), ("ldp.n_paths", self.ldp.n_paths),
                           ("inequalities.n_samples", self.inequalities.n_samples)]:
            if val < 1:
                raise ConfigError(where, "must be >= 1")

    def grid_spec(self) -> GridSpec:
        return GridSpec(self.grid.n, self.grid.d, self.grid.pad_factor)

    def phys_params(self) -> PhysParams:
        ph = self.physics
        return PhysParams(mu=ph.mu, beta=ph.beta, p=ph.p, r=ph.r, d=self.grid.d)

    def to_dict(self) -> dict:
        out = {name: asdict(getattr(self, name)) for name in _SECTIONS}
        out["seed"] = self.seed
        return out

    def canonical(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def replace(self, **overrides) -> "RunConfig":
        """Overrides as {"section.field": value} or {"seed": value}."""
        data = self.to_dict()
        for key, val in overrides.items():
            if key == "seed":
                data["seed"] = val
                continue
            sec, _, name = key.partition(".")
            if sec not in _SECTIONS or name not in data[sec]:
                raise ConfigError(key, "unknown field")
            data[sec][name] = val
        return from_dict(data)


def _coerce(where: str, typ, value):
    if typ in (float, "float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(where, f"expected a number, got {value!r}")
        return float(value)
    if typ in (int, "int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(where, f"expected an integer, got {value!r}")
        return value
    if typ in (str, "str"):
        if not isinstance(value, str):
            raise ConfigError(where, f"expected a string, got {value!r}")
        return value
    if typ in (list, "list"):
        if not isinstance(value, list):
            raise ConfigError(where, f"expected an array, got {value!r}")
        return [float(v) if isinstance(v, int) and not isinstance(v, bool) and where != "output.formats" else v
                for v in value]
    raise TypeError(typ)


def _section(name: str, cls, raw) -> object:
    if not isinstance(raw, dict):
        raise ConfigError(name, "expected a table")
    known = {f.name: f for f in fields(cls)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{name}.{key}", "unknown field")
    kw = {}
    for fname, f in known.items():
        where = f"{name}.{fname}"
        if fname in raw:
            kw[fname] = _coerce(where, f.type, raw[fname])
        elif f.default is _REQUIRED:
            raise ConfigError(where, "required field is missing")
    return cls(**kw)


def from_dict(data: dict) -> RunConfig:
    unknown = set(data) - set(_SECTIONS) - {"seed"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    if "grid" not in data:
        raise ConfigError("grid.n", "required field is missing")
    kw = {name: _section(name, cls, data.get(name, {})) for name, cls in _SECTIONS.items()}
    seed = _coerce("seed", int, data.get("seed", 0))
    return RunConfig(**kw, seed=seed)


def loads(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("config", f"TOML syntax error: {e}") from None
    return from_dict(data)


def load(path) -> RunConfig:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        return loads(raw.decode("utf-8"))
    except UnicodeDecodeError:
        raise ConfigError("config", "file is not UTF-8") from None
