"""Strict JSON run configuration.

Every block is a frozen dataclass.  Parsing rejects unknown keys and reports
missing or mistyped ones with their full dotted path, e.g.
``config.system.arm_b.coupling``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .model import PARAMETER_PATHS, ArrayParams, SystemParams

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


def _expect(value: Any, kind, path: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {type(value).__name__}")
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"{path}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _table(raw: Any, path: str, required: set[str], optional: set[str]) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = sorted(set(raw) - required - optional)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(map(repr, unknown))}")
    missing = sorted(required - set(raw))
    if missing:
        raise ConfigError(f"{path}.{missing[0]}: missing required key")
    return raw


@dataclass(frozen=True)
class GridBlock:
    e_min: float
    e_max: float
    count: int
    refine: bool = True

    @classmethod
    def parse(cls, raw: Any, path: str, scale: float) -> GridBlock:
        t = _table(raw, path, {"e_min", "e_max", "count"}, {"refine"})
        block = cls(
            e_min=_expect(t["e_min"], float, f"{path}.e_min") / scale,
            e_max=_expect(t["e_max"], float, f"{path}.e_max") / scale,
            count=_expect(t["count"], int, f"{path}.count"),
            refine=_expect(t.get("refine", True), bool, f"{path}.refine"),
        )
        if block.count < 2:
            raise ConfigError(f"{path}.count: must be >= 2")
        if not block.e_min < block.e_max:
            raise ConfigError(f"{path}: e_min must be < e_max")
        return block


@dataclass(frozen=True)
class SweepBlock:
    vary: str
    values: tuple[float, ...]
    energy_grid: GridBlock

    @classmethod
    def parse(cls, raw: Any, path: str, scale: float) -> SweepBlock:
        t = _table(raw, path, {"vary", "values", "energy_grid"}, set())
        vary = _expect(t["vary"], str, f"{path}.vary")
        if vary not in PARAMETER_PATHS:
            raise ConfigError(f"{path}.vary: must be one of {', '.join(PARAMETER_PATHS)}")
        values = _expect(t["values"], list, f"{path}.values")
        if not values:
            raise ConfigError(f"{path}.values: must not be empty")
        # every tunable parameter is an energy
        vals = tuple(_expect(v, float, f"{path}.values[{i}]") / scale for i, v in enumerate(values))
        steps = [b - a for a, b in zip(vals, vals[1:])]
        if steps and not (all(d > 0 for d in steps) or all(d < 0 for d in steps)):
            raise ConfigError(f"{path}.values: must be strictly monotone")
        return cls(vary, vals, GridBlock.parse(t["energy_grid"], f"{path}.energy_grid", scale))


@dataclass(frozen=True)
class BoundBlock:
    verify: bool = False
    N: int = 400

    @classmethod
    def parse(cls, raw: Any, path: str) -> BoundBlock:
        t = _table(raw, path, set(), {"verify", "N"})
        block = cls(
            verify=_expect(t.get("verify", False), bool, f"{path}.verify"),
            N=_expect(t.get("N", 400), int, f"{path}.N"),
        )
        if block.N < 2:
            raise ConfigError(f"{path}.N: must be >= 2")
        return block


@dataclass(frozen=True)
class OracleBlock:
    N: int = 400
    wavepacket_N: int = 1500
    width_sites: float = 50.0
    resonance_width_sites: float = 100.0
    grid_points: int = 201
    f_branch: str = "outgoing"
    carriers: tuple[float, ...] | None = None

    @classmethod
    def parse(cls, raw: Any, path: str, scale: float) -> OracleBlock:
        keys = {f.name for f in fields(cls)}
        t = _table(raw, path, set(), keys)
        d = cls()
        carriers = t.get("carriers")
        if carriers is not None:
            carriers = tuple(
                _expect(c, float, f"{path}.carriers[{i}]") / scale
                for i, c in enumerate(_expect(carriers, list, f"{path}.carriers"))
            )
        block = cls(
            N=_expect(t.get("N", d.N), int, f"{path}.N"),
            wavepacket_N=_expect(t.get("wavepacket_N", d.wavepacket_N), int, f"{path}.wavepacket_N"),
            width_sites=_expect(t.get("width_sites", d.width_sites), float, f"{path}.width_sites"),
            resonance_width_sites=_expect(
                t.get("resonance_width_sites", d.resonance_width_sites),
                float,
                f"{path}.resonance_width_sites",
            ),
            grid_points=_expect(t.get("grid_points", d.grid_points), int, f"{path}.grid_points"),
            f_branch=_expect(t.get("f_branch", d.f_branch), str, f"{path}.f_branch"),
            carriers=carriers,
        )
        if block.f_branch not in ("outgoing", "flipped"):
            raise ConfigError(f"{path}.f_branch: must be 'outgoing' or 'flipped'")
        if block.N < 2 or block.wavepacket_N < 2:
            raise ConfigError(f"{path}: lattice half-lengths must be >= 2")
        if block.grid_points < 2:
            raise ConfigError(f"{path}.grid_points: must be >= 2")
        if block.width_sites <= 0 or block.resonance_width_sites <= 0:
            raise ConfigError(f"{path}: packet widths must be positive")
        return block

    @property
    def branch(self) -> int:
        return 1 if self.f_branch == "outgoing" else -1


@dataclass(frozen=True)
class OutputBlock:
    path: str | None = None
    tracks_path: str | None = None

    @classmethod
    def parse(cls, raw: Any, path: str) -> OutputBlock:
        t = _table(raw, path, set(), {"path", "tracks_path"})
        return cls(
            path=None if t.get("path") is None else _expect(t["path"], str, f"{path}.path"),
            tracks_path=None
            if t.get("tracks_path") is None
            else _expect(t["tracks_path"], str, f"{path}.tracks_path"),
        )


def _parse_arm(raw: Any, path: str, scale: float) -> ArrayParams:
    t = _table(raw, path, {"omega", "hopping", "coupling"}, set())
    try:
        return ArrayParams(
            omega=_expect(t["omega"], float, f"{path}.omega") / scale,
            hopping=_expect(t["hopping"], float, f"{path}.hopping") / scale,
            coupling=_expect(t["coupling"], float, f"{path}.coupling") / scale,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams
    schema_version: int = SCHEMA_VERSION
    energy_scale: float = 1.0
    spectrum: GridBlock | None = None
    sweep: SweepBlock | None = None
    window: tuple[float, float] | None = None
    bound: BoundBlock = field(default_factory=BoundBlock)
    oracle: OracleBlock = field(default_factory=OracleBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    @classmethod
    def from_dict(cls, raw: Any) -> RunConfig:
        p = "config"
        t = _table(
            raw,
            p,
            {"schema_version", "system"},
            {"units", "spectrum", "sweep", "resonances", "bound", "oracle", "output"},
        )
        version = _expect(t["schema_version"], int, f"{p}.schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"{p}.schema_version: unsupported version {version}")
        scale = 1.0
        if "units" in t:
            u = _table(t["units"], f"{p}.units", {"energy_scale"}, set())
            scale = _expect(u["energy_scale"], float, f"{p}.units.energy_scale")
            if scale <= 0:
                raise ConfigError(f"{p}.units.energy_scale: must be positive")
        s = _table(t["system"], f"{p}.system", {"arm_a", "arm_b", "controller_level"}, set())
        system = SystemParams(
            _parse_arm(s["arm_a"], f"{p}.system.arm_a", scale),
            _parse_arm(s["arm_b"], f"{p}.system.arm_b", scale),
            _expect(s["controller_level"], float, f"{p}.system.controller_level") / scale,
        )
        window = None
        if "resonances" in t:
            r = _table(t["resonances"], f"{p}.resonances", set(), {"window"})
            if "window" in r:
                w = _expect(r["window"], list, f"{p}.resonances.window")
                if len(w) != 2:
                    raise ConfigError(f"{p}.resonances.window: expected [lower, upper]")
                lo, hi = (_expect(x, float, f"{p}.resonances.window[{i}]") / scale for i, x in enumerate(w))
                if not lo < hi:
                    raise ConfigError(f"{p}.resonances.window: lower must be < upper")
                window = (lo, hi)
        return cls(
            system=system,
            schema_version=version,
            energy_scale=scale,
            spectrum=GridBlock.parse(t["spectrum"], f"{p}.spectrum", scale) if "spectrum" in t else None,
            sweep=SweepBlock.parse(t["sweep"], f"{p}.sweep", scale) if "sweep" in t else None,
            window=window,
            bound=BoundBlock.parse(t.get("bound", {}), f"{p}.bound"),
            oracle=OracleBlock.parse(t.get("oracle", {}), f"{p}.oracle", scale),
            output=OutputBlock.parse(t.get("output", {}), f"{p}.output"),
        )

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        """Canonical form: energies in internal units, every default spelled out."""
        d: dict[str, Any] = {
            "schema_version": self.schema_version,
            "system": asdict(self.system),
            "bound": asdict(self.bound),
            "oracle": asdict(self.oracle),
        }
        if self.oracle.carriers is None:
            del d["oracle"]["carriers"]
        else:
            d["oracle"]["carriers"] = list(self.oracle.carriers)
        if self.spectrum is not None:
            d["spectrum"] = asdict(self.spectrum)
        if self.sweep is not None:
            d["sweep"] = {
                "vary": self.sweep.vary,
                "values": list(self.sweep.values),
                "energy_grid": asdict(self.sweep.energy_grid),
            }
        if self.window is not None:
            d["resonances"] = {"window": list(self.window)}
        out = {k: v for k, v in asdict(self.output).items() if v is not None}
        if out:
            d["output"] = out
        return d

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"
