"""Experiment configuration files (TOML) and their validation."""
from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cocycle import Cocycle, GroupSpec
from .errors import AdicError, ConfigError
from .harness import Window
from .symbolic import TransitionSystem, validate_tms


@dataclass
class SimulationConfig:
    seed: int
    orbits: int = 2000
    n_list: list[int] = field(default_factory=lambda: [10**4, 10**5, 10**6])
    fiber_cap: int = 24
    return_budget: float = 200.0


@dataclass
class ExperimentConfig:
    name: str
    matrix: list[list[int]]
    cocycle_range: int
    group_k: int
    group_D: int
    entries: dict[tuple[int, ...], list[float]]
    window: Window
    simulation: SimulationConfig
    suites: list[str]
    suite_options: dict[str, dict[str, Any]]
    output_dir: str
    assert_aperiodic: bool
    digest: str
    source: Path | None = None

    def system(self) -> TransitionSystem:
        return validate_tms(self.matrix)

    def cocycle(self, ts: TransitionSystem | None = None) -> Cocycle:
        ts = ts or self.system()
        return Cocycle(ts, self.cocycle_range, GroupSpec(self.group_k, self.group_D), self.entries)

    def options(self, suite: str) -> dict[str, Any]:
        return dict(self.suite_options.get(suite, {}))


def _need(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}: missing field '{key}'")
    return table[key]


def _int_list(value, where: str) -> list[int]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"{where}: expected a list of integers, got {value!r}")
    return list(value)


def _parse_matrix(value) -> list[list[int]]:
    if not isinstance(value, list) or not value:
        raise ConfigError("system.transition_matrix: expected a non-empty list of rows")
    d = len(value)
    rows = []
    for i, row in enumerate(value, start=1):
        where = f"system.transition_matrix row {i}"
        row = _int_list(row, where)
        if len(row) != d:
            raise ConfigError(f"{where}: has {len(row)} entries, expected {d}")
        if any(v not in (0, 1) for v in row):
            raise ConfigError(f"{where}: entries must be 0 or 1, got {row}")
        rows.append(row)
    return rows


def _parse_entries(value, r: int, D: int) -> dict[tuple[int, ...], list[float]]:
    if not isinstance(value, list):
        raise ConfigError("cocycle.entries: expected an array of tables")
    out = {}
    for i, item in enumerate(value, start=1):
        where = f"cocycle.entries[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{where}: expected a table with 'word' and 'value'")
        word = tuple(_int_list(_need(item, "word", where), f"{where}.word"))
        val = _need(item, "value", where)
        if not isinstance(val, list) or len(val) != D or not all(isinstance(v, (int, float)) for v in val):
            raise ConfigError(f"{where}.value: expected {D} numbers, got {val!r}")
        if len(word) != r:
            raise ConfigError(f"{where}.word: length {len(word)} does not match range {r}")
        if word in out:
            raise ConfigError(f"{where}.word: duplicate entry {list(word)}")
        out[word] = list(val)
    return out


def _parse_window(table: dict, k: int, D: int) -> Window:
    pts = table.get("lattice_points", [[0] * k])
    if not isinstance(pts, list) or not pts:
        raise ConfigError("window.lattice_points: expected a non-empty list")
    lattice = []
    for i, p in enumerate(pts, start=1):
        p = _int_list(p, f"window.lattice_points[{i}]")
        if len(p) != k:
            raise ConfigError(f"window.lattice_points[{i}]: expected {k} coordinates")
        lattice.append(tuple(p))
    lo = table.get("real_lo", [-0.5] * (D - k))
    hi = table.get("real_hi", [0.5] * (D - k))
    if len(lo) != D - k or len(hi) != D - k or any(b <= a for a, b in zip(lo, hi)):
        raise ConfigError(f"window.real_lo/real_hi: need {D - k} coordinates with lo < hi")
    return Window(tuple(lattice), tuple(float(v) for v in lo), tuple(float(v) for v in hi))


def parse_config(text: str, source: Path | None = None) -> ExperimentConfig:
    from .suites import SUITES

    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source or '<config>'}: {exc}") from None
    digest = hashlib.sha256(text.encode()).hexdigest()[:16]

    system = _need(raw, "system", "config")
    matrix = _parse_matrix(_need(system, "transition_matrix", "system"))

    coc = _need(raw, "cocycle", "config")
    r = _need(coc, "range", "cocycle")
    group = _need(coc, "group", "cocycle")
    k, D = _need(group, "k", "cocycle.group"), _need(group, "D", "cocycle.group")
    if not (isinstance(r, int) and r >= 1):
        raise ConfigError(f"cocycle.range: expected a positive integer, got {r!r}")
    if not (isinstance(k, int) and isinstance(D, int) and 0 <= k <= D and D >= 1):
        raise ConfigError(f"cocycle.group: need integers 0 <= k <= D, D >= 1 (got k={k!r}, D={D!r})")
    entries = _parse_entries(_need(coc, "entries", "cocycle"), r, D)

    sim_t = _need(raw, "simulation", "config")
    if "seed" not in sim_t:
        raise ConfigError("simulation: missing field 'seed' (there is no clock-based default)")
    n_list = _int_list(sim_t.get("n_list", [10**4, 10**5, 10**6]), "simulation.n_list")
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or not n_list or n_list[0] < 1:
        raise ConfigError(f"simulation.n_list: must be strictly increasing positive integers, got {n_list}")
    sim = SimulationConfig(
        seed=int(sim_t["seed"]),
        orbits=int(sim_t.get("orbits", 2000)),
        n_list=n_list,
        fiber_cap=int(sim_t.get("fiber_cap", 24)),
        return_budget=float(sim_t.get("return_budget", 200.0)),
    )

    suites_t = raw.get("suites", {})
    names = suites_t.get("run", list(SUITES))
    for s in names:
        if s not in SUITES:
            raise ConfigError(f"suites.run: unknown suite '{s}'")
    options = {s: v for s, v in suites_t.items() if s != "run"}
    for s in options:
        if s not in SUITES:
            raise ConfigError(f"suites.{s}: unknown suite")

    cfg = ExperimentConfig(
        name=str(raw.get("name", source.stem if source else "experiment")),
        matrix=matrix,
        cocycle_range=r,
        group_k=k,
        group_D=D,
        entries=entries,
        window=_parse_window(raw.get("window", {}), k, D),
        simulation=sim,
        suites=[s for s in SUITES if s in names],
        suite_options=options,
        output_dir=str(raw.get("output", {}).get("dir", "results")),
        assert_aperiodic=bool(coc.get("assert_aperiodic", True)),
        digest=digest,
        source=source,
    )
    try:
        ts = cfg.system()
        cfg.cocycle(ts)
    except (AdicError, ValueError) as exc:
        raise ConfigError(f"{source or '<config>'}: {exc}") from None
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, path)


def shipped_config(name: str) -> Path:
    """Path of a configuration bundled with the package (``hik``, ``golden_mean``)."""
    p = Path(__file__).parent / "configs" / f"{name}.cfg"
    if not p.exists():
        raise ConfigError(f"no shipped config named {name!r}")
    return p
