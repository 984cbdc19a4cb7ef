import json

import numpy as np
import pytest

from scenariopac.models import (
    CoveringBound,
    ErrorRow,
    ErrorSurface,
    MinimizerConfig,
    PlanResult,
    ScenarioSolution,
    TailProfile,
)
from scenariopac.output import (
    SURFACE_HEADER,
    emit_csv,
    emit_plot,
    emit_profile_csv,
    format_covering,
    format_plans,
    format_solution,
    format_surface,
    profile_to_csv,
    read_csv,
    surface_to_csv,
)


def _make_row(**overrides):
    defaults = dict(d=5, N=100, mean_error=0.25, std_error=0.01, replicates=25, seed=0)
    defaults.update(overrides)
    return ErrorRow(**defaults)


def _make_surface():
    return ErrorSurface(rows=(
        _make_row(d=20, N=100, mean_error=0.9),
        _make_row(d=5, N=1000, mean_error=0.1),
        _make_row(d=5, N=100, mean_error=0.3),
        _make_row(d=20, N=1000, mean_error=0.7),
    ))


def _make_profile(dim=1):
    grid = np.linspace(-1, 1, 5)[:, None] if dim == 1 else np.array([[0.0, 0.0], [0.0, 1.0]])
    t_hat = np.linspace(0.5, 0.1, grid.shape[0])
    return TailProfile(epsilon=0.5, grid=grid, t_hat=t_hat, tau_hat=float(t_hat.min()),
                       mc_samples=100, seed=0, reference_value=0.0, reference_source="optimum")


class TestSurfaceCsv:
    def test_header_only_for_empty_surface(self):
        assert surface_to_csv(ErrorSurface()) == ",".join(SURFACE_HEADER) + "\n"

    def test_rows_sorted_by_dimension_then_size(self):
        lines = surface_to_csv(_make_surface()).splitlines()
        assert [line.split(",")[:2] for line in lines[1:]] == [["5", "100"], ["5", "1000"], ["20", "100"], ["20", "1000"]]

    def test_round_trip(self, tmp_path):
        surface = _make_surface()
        path = emit_csv(surface, tmp_path / "surface.csv")
        parsed = read_csv(path)
        assert sorted(parsed.rows, key=lambda r: (r.d, r.N)) == sorted(surface.rows, key=lambda r: (r.d, r.N))

    def test_write_failure_names_path(self, tmp_path):
        with pytest.raises(OSError, match="cannot write"):
            emit_csv(_make_surface(), tmp_path / "missing" / "surface.csv")

    def test_read_failure(self, tmp_path):
        with pytest.raises(OSError, match="cannot read"):
            read_csv(tmp_path / "nope.csv")


class TestEmitPlot:
    def test_empty_surface(self, tmp_path):
        path = emit_plot(ErrorSurface(), tmp_path / "empty.svg")
        assert path.read_text().lstrip().startswith("<?xml")

    def test_deterministic(self, tmp_path):
        a = emit_plot(_make_surface(), tmp_path / "a.svg").read_text()
        b = emit_plot(_make_surface(), tmp_path / "b.svg").read_text()
        assert a == b

    def test_one_line_per_dimension(self, tmp_path):
        text = emit_plot(_make_surface(), tmp_path / "s.svg").read_text()
        assert "d = 5" in text
        assert "d = 20" in text


class TestProfileCsv:
    def test_one_dimensional_header(self):
        lines = profile_to_csv(_make_profile()).splitlines()
        assert lines[0] == "x,t_hat"
        assert len(lines) == 6
        assert lines[1] == "-1.0,0.5"

    def test_multi_dimensional_header(self):
        assert profile_to_csv(_make_profile(dim=2)).splitlines()[0] == "x0,x1,t_hat"

    def test_emit(self, tmp_path):
        path = emit_profile_csv(_make_profile(), tmp_path / "profile.csv")
        assert path.read_text(encoding="utf-8") == profile_to_csv(_make_profile())


class TestFormatters:
    def test_surface_json(self):
        output = json.loads(format_surface(_make_surface(), "json"))
        assert len(output["rows"]) == 4
        assert output["rows"][0]["d"] == 20

    def test_plans_json_keeps_intermediates(self):
        plans = [PlanResult(6, "trig", 5.61, {"lnC": 4.61, "q": 1})]
        output = json.loads(format_plans(plans, "json"))
        assert output["plans"][0]["n_required"] == 6
        assert output["plans"][0]["intermediates"]["q"] == 1

    def test_plans_csv(self):
        text = format_plans([PlanResult(4, "convex", 4.0)], "csv")
        assert text.splitlines() == ["family,n_required,raw", "convex,4,4.0"]

    def test_covering_csv(self):
        text = format_covering([CoveringBound(log_value=1.5, q_effective=3, radius=0.5)], "csv")
        assert text.splitlines()[1] == "0.5,3,1.5"

    def test_solution_json(self):
        solution = ScenarioSolution(-1.0, (-10.0,), 10, 3, MinimizerConfig(), -1.0)
        output = json.loads(format_solution(solution, 1.0, "json"))
        assert output["solution"]["value"] == -1.0
        assert output["solution"]["config"]["grid_points_per_dim"] == 2001
        assert output["error"] == 1.0

    def test_console_returns_nothing(self):
        assert format_surface(_make_surface(), "console") is None
