import json
from pathlib import Path

import numpy as np
import pytest

from bedsim.errors import ValidationError
from bedsim.grid import GridSpec, PressureMap
from bedsim.runner import (
    Perturbation,
    Scenario,
    export_run,
    format_grid_csv,
    load_scenario,
    parse_grid_csv,
    render_heatmap,
    run,
    scenario_from_dict,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture
def canonical_scenario():
    return load_scenario(SCENARIOS / "canonical_standard.json")


class TestScenarioLoading:
    def test_canonical_fixture(self, canonical_scenario):
        assert canonical_scenario.name == "canonical_standard"
        assert canonical_scenario.perturbations == (
            Perturbation(tick=1, cell=(3, 2), extension_delta_mm=5.0),
        )

    def test_rejects_off_grid_perturbation(self):
        doc = {
            "name": "bad",
            "profile": "adult_supine_80",
            "perturbations": [{"tick": 1, "cell": [99, 0], "extension_delta_mm": 1}],
        }
        with pytest.raises(ValidationError, match="off-grid"):
            scenario_from_dict(doc)

    def test_rejects_unknown_override_fields(self):
        doc = {"name": "bad", "profile": "adult_supine_80", "control": {"dead_band": 1}}
        with pytest.raises(ValidationError, match="dead_band"):
            scenario_from_dict(doc)

    def test_rejects_zero_tick_budget(self):
        with pytest.raises(ValidationError):
            Scenario(name="x", profile="adult_supine_80", max_ticks=0)

    def test_inline_profile(self):
        doc = {
            "name": "inline",
            "profile": {
                "name": "slab",
                "weight_kgf": 50,
                "grid": {"rows": 2, "cols": 2},
                "clearance_mm": [[0, 0], [0, 0]],
            },
        }
        assert scenario_from_dict(doc).body().weight == 50


class TestRun:
    def test_canonical_standard(self, canonical_scenario):
        report, sim = run(canonical_scenario)
        assert report.converged
        assert report.final_max_abs_deviation < 0.05
        assert report.support_size == 53
        assert report.final_target == pytest.approx(1.51, abs=0.01)
        for row in report.trace:
            assert row.total_force == pytest.approx(80.0, abs=1e-4)

    def test_single_tick_budget_yields_wellformed_report(self, canonical_scenario):
        from dataclasses import replace

        report, _ = run(replace(canonical_scenario, max_ticks=1))
        assert not report.converged
        assert report.ticks_to_converge is None
        assert len(report.trace) == 1

    def test_mid_run_perturbation_forces_reconvergence(self):
        scenario = Scenario(
            name="perturbed",
            profile="adult_supine_80",
            perturbations=(Perturbation(tick=100, cell=(10, 4), extension_delta_mm=6.0),),
        )
        report, _ = run(scenario)
        assert report.converged
        assert report.ticks_to_converge > 100
        devs = {row.tick: row.max_abs_deviation for row in report.trace}
        assert devs[100] > 0.05  # the disturbance reopened the loop
        assert report.final_max_abs_deviation < 0.05

    def test_determinism_same_seed_same_bytes(self, canonical_scenario, tmp_path):
        outputs = []
        for attempt in ("a", "b"):
            report, sim = run(canonical_scenario)
            directory = tmp_path / attempt
            export_run(report, sim, directory)
            outputs.append({p.name: p.read_bytes() for p in directory.iterdir()})
        assert outputs[0] == outputs[1]

    def test_seed_override_changes_noisy_runs(self):
        scenario = Scenario(
            name="noisy",
            profile="adult_supine_80",
        )
        from dataclasses import replace

        from bedsim.plant import SensorModel

        noisy = replace(scenario, sensor=SensorModel(noise_sigma=0.005))
        r1, _ = run(noisy, seed=1)
        r2, _ = run(noisy, seed=2)
        assert [t.max_abs_deviation for t in r1.trace] != [
            t.max_abs_deviation for t in r2.trace
        ]


class TestCsv:
    def test_all_zero_map(self):
        text = format_grid_csv(np.zeros((18, 9)), 4)
        lines = text.strip().split("\n")
        assert len(lines) == 18
        assert all(line == ",".join(["0.0000"] * 9) for line in lines)

    def test_round_trip_at_stated_precision(self):
        rng = np.random.default_rng(5)
        values = rng.uniform(0, 3, (18, 9))
        parsed = parse_grid_csv(format_grid_csv(values, 4), GridSpec())
        assert np.allclose(parsed, np.round(values, 4), atol=1e-12)
        assert format_grid_csv(parsed, 4) == format_grid_csv(values, 4)

    def test_canonical_converged_pressures(self, canonical_scenario, tmp_path):
        report, sim = run(canonical_scenario)
        export_run(report, sim, tmp_path)
        pressures = parse_grid_csv((tmp_path / "pressures.csv").read_text(), GridSpec())
        contact = pressures >= 0.05
        assert contact.sum() == 53
        assert np.all(np.abs(pressures[contact] - 1.5094) < 0.05)
        report_doc = json.loads((tmp_path / "report.json").read_text())
        assert report_doc["converged"] is True
        trace_lines = (tmp_path / "trace.csv").read_text().strip().split("\n")
        assert trace_lines[0] == "tick,max_abs_deviation,total_force"
        assert len(trace_lines) == len(report.trace) + 1


class TestHeatmap:
    def test_all_zero_is_blank(self):
        text = render_heatmap(np.zeros((18, 9)))
        assert text == "\n".join([" " * 9] * 18)

    def test_single_peak_cell(self):
        values = np.zeros((18, 9))
        values[4, 4] = 2.5
        lines = render_heatmap(values).split("\n")
        assert lines[4][4] == "#"
        assert sum(line.count("#") for line in lines) == 1

    def test_canonical_silhouette_matches_golden(self, canonical_scenario):
        _, sim = run(canonical_scenario)
        expected = (GOLDEN / "canonical_standard_heatmap.txt").read_text()
        assert render_heatmap(sim.forces.values) + "\n" == expected
