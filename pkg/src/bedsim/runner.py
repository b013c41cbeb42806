"""Headless scenario execution and data export."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .control import ControlConfig
from .errors import ValidationError
from .grid import GridSpec, PressureMap
from .morphology import ELEMENTS, SQUARE3, FirmnessMode, StructuringElement
from .plant import BodyProfile, PlantConfig, SensorModel, resolve_profile
from .sim import Simulation, TraceRow

HEATMAP_RAMP = " .:-=+*#"


@dataclass(frozen=True)
class Perturbation:
    tick: int
    cell: tuple[int, int]
    extension_delta_mm: float


@dataclass(frozen=True)
class Scenario:
    name: str
    profile: str | dict
    mode: FirmnessMode = FirmnessMode.STANDARD
    control: ControlConfig = field(default_factory=ControlConfig)
    plant: PlantConfig = field(default_factory=PlantConfig)
    sensor: SensorModel = field(default_factory=SensorModel)
    structuring_element: StructuringElement = SQUARE3
    max_ticks: int = 2400
    perturbations: tuple[Perturbation, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.max_ticks < 1:
            raise ValidationError(f"max_ticks must be at least 1, got {self.max_ticks}")

    def body(self) -> BodyProfile:
        return resolve_profile(self.profile)


def _overrides(cls, doc: dict, what: str):
    known = {f.name for f in fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ValidationError(f"unknown {what} fields: {sorted(unknown)}")
    if "weight_gate" in doc:
        doc = {**doc, "weight_gate": tuple(doc["weight_gate"])}
    return cls(**doc)


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        name = str(doc["name"])
        profile = doc["profile"]
    except KeyError as exc:
        raise ValidationError(f"scenario is missing field {exc}") from exc
    try:
        mode = FirmnessMode(doc.get("mode", "standard"))
    except ValueError:
        raise ValidationError(f"unknown firmness mode {doc.get('mode')!r}") from None
    se_name = doc.get("structuring_element", "square3")
    if se_name not in ELEMENTS:
        raise ValidationError(f"unknown structuring element {se_name!r}")
    perturbations = []
    for p in doc.get("perturbations", ()):
        perturbations.append(
            Perturbation(
                tick=int(p["tick"]),
                cell=(int(p["cell"][0]), int(p["cell"][1])),
                extension_delta_mm=float(p["extension_delta_mm"]),
            )
        )
    scenario = Scenario(
        name=name,
        profile=profile,
        mode=mode,
        control=_overrides(ControlConfig, doc.get("control", {}), "control"),
        plant=_overrides(PlantConfig, doc.get("plant", {}), "plant"),
        sensor=_overrides(SensorModel, doc.get("sensor", {}), "sensor"),
        structuring_element=ELEMENTS[se_name],
        max_ticks=int(doc.get("max_ticks", 2400)),
        perturbations=tuple(perturbations),
        seed=int(doc.get("seed", 0)),
    )
    grid = scenario.body().grid
    for p in scenario.perturbations:
        i, j = p.cell
        if not (0 <= i < grid.rows and 0 <= j < grid.cols):
            raise ValidationError(f"perturbation cell ({i}, {j}) is off-grid")
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"scenario file is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


@dataclass(frozen=True)
class RunReport:
    scenario: str
    converged: bool
    ticks_to_converge: int | None
    final_max_abs_deviation: float
    final_target: float
    support_size: int
    excluded_count: int
    trace: tuple[TraceRow, ...]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "converged": self.converged,
            "ticks_to_converge": self.ticks_to_converge,
            "final_max_abs_deviation": self.final_max_abs_deviation,
            "final_target": self.final_target,
            "support_size": self.support_size,
            "excluded_count": self.excluded_count,
            "trace": [
                [t.tick, t.max_abs_deviation, t.total_force] for t in self.trace
            ],
        }


def build_simulation(scenario: Scenario, seed: int | None = None) -> Simulation:
    return Simulation(
        scenario.body(),
        control_cfg=scenario.control,
        plant_cfg=scenario.plant,
        sensor=scenario.sensor,
        se=scenario.structuring_element,
        seed=scenario.seed if seed is None else seed,
    )


def run(scenario: Scenario, seed: int | None = None) -> tuple[RunReport, Simulation]:
    """Execute a scenario to convergence or tick budget; deterministic per seed.

    Returns the report plus the final simulation for snapshot export.
    Gate rejection and validation errors propagate to the caller.
    """
    sim = build_simulation(scenario, seed)
    sim.activate(scenario.mode)
    pending = sorted(scenario.perturbations, key=lambda p: p.tick)
    trace: list[TraceRow] = []
    converged_at: int | None = None
    for _ in range(scenario.max_ticks):
        now = sim.tick_index + 1
        while pending and pending[0].tick == now:
            p = pending.pop(0)
            sim.perturb(p.cell, p.extension_delta_mm)
        row = sim.step()
        trace.append(row)
        if sim.state.converged and converged_at is None:
            converged_at = row.tick
        elif not sim.state.converged:
            converged_at = None
        if sim.state.converged and not pending:
            break
    controlled = len(sim.state.controlled_cells())
    report = RunReport(
        scenario=scenario.name,
        converged=sim.state.converged,
        ticks_to_converge=converged_at,
        final_max_abs_deviation=sim.last_max_dev,
        final_target=sim.state.target,
        support_size=controlled,
        excluded_count=len(sim.state.excluded),
        trace=tuple(trace),
    )
    return report, sim


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def format_grid_csv(values: np.ndarray, decimals: int) -> str:
    """Row-major CSV, head row first, fixed decimal places."""
    lines = [
        ",".join(f"{v:.{decimals}f}" for v in row) for row in np.asarray(values, float)
    ]
    return "\n".join(lines) + "\n"


def parse_grid_csv(text: str, grid: GridSpec | None = None) -> np.ndarray:
    rows = [
        [float(v) for v in line.split(",")]
        for line in text.strip().splitlines()
        if line.strip()
    ]
    arr = np.array(rows, dtype=float)
    if grid is not None and arr.shape != grid.shape:
        raise ValidationError(f"CSV shape {arr.shape} does not match grid {grid.shape}")
    return arr


def export_pressures_csv(pmap: PressureMap, path: str | Path) -> None:
    Path(path).write_text(format_grid_csv(pmap.values, 4), encoding="utf-8")


def export_extensions_csv(extension: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(format_grid_csv(extension, 2), encoding="utf-8")


def export_trace_csv(trace: tuple[TraceRow, ...], path: str | Path) -> None:
    lines = ["tick,max_abs_deviation,total_force"]
    lines += [f"{t.tick},{t.max_abs_deviation:.6f},{t.total_force:.6f}" for t in trace]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_report_json(report: RunReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )


def export_run(report: RunReport, sim: Simulation, directory: str | Path) -> list[Path]:
    """Write the standard artifact set for one run into a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "pressures.csv": lambda p: export_pressures_csv(sim.forces, p),
        "extensions.csv": lambda p: export_extensions_csv(sim.bank.extension, p),
        "trace.csv": lambda p: export_trace_csv(report.trace, p),
        "report.json": lambda p: export_report_json(report, p),
    }
    written = []
    for name, writer in paths.items():
        target = directory / name
        writer(target)
        written.append(target)
    return written


def render_heatmap(values: np.ndarray) -> str:
    """Text heatmap: glyph ramp binned over [0, max]; all-zero maps render blank."""
    arr = np.asarray(values, dtype=float)
    peak = arr.max()
    lines = []
    for row in arr:
        if peak <= 0:
            lines.append(" " * len(row))
            continue
        glyphs = [
            HEATMAP_RAMP[min(len(HEATMAP_RAMP) - 1, int(v / peak * len(HEATMAP_RAMP)))]
            for v in row
        ]
        lines.append("".join(glyphs))
    return "\n".join(lines)
