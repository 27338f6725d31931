"""
Unit tests for the plain-text artifact formats
"""

import numpy as np
import pytest
from pydantic import ValidationError

from models.requests import ExperimentConfig, SpacetimeSource
from services.persistence import (
    causet_from_text,
    causet_to_text,
    config_from_text,
    config_to_text,
    format_value,
    read_causet,
    read_csv,
    read_matrix,
    transitive_reduction,
    write_causet,
    write_csv,
    write_matrix,
    write_scenario_bundle,
)
from services.spacetime import chain_causet, sprinkle
from utils.errors import LiteralParseError


class TestCausetFormat:
    """causet n=<N> header, points, links"""

    def test_four_point_text(self, four_point):
        text = causet_to_text(four_point)
        lines = text.splitlines()
        assert lines[0] == "causet n=4"
        assert lines[-2:] == ["0<1", "2<3"]

    def test_only_links_are_written(self):
        """A chain is stored as its n - 1 covering pairs"""
        text = causet_to_text(chain_causet(5))
        assert text.count("<") == 4
        assert np.array_equal(causet_from_text(text).relation, chain_causet(5).relation)

    def test_sprinkled_file_round_trip(self, temp_workspace):
        cs = sprinkle((0.0, 2.0), (-1.0, 1.0), 6.0, seed=2)
        back = read_causet(write_causet(cs, temp_workspace / "causet.txt"))
        assert np.array_equal(back.relation, cs.relation)
        assert np.array_equal(back.coords, cs.coords)

    def test_reduction_of_four_point_is_itself(self, four_point):
        assert np.array_equal(transitive_reduction(four_point), four_point.relation)

    @pytest.mark.parametrize("text", [
        "",
        "points n=2\n",
        "causet n=2\n0 0 0\n",
        "causet n=2\n0 0 0\n2 1 0\n",
        "causet n=2\n0 0 0\n1 1 0\n0-1\n",
        "causet n=2\n0 0 0\n1 1 0\n0<5\n",
        "causet n=2\n0 0 0\n1 1 0\n0<1\n1<0\n",
    ])
    def test_rejects_malformed(self, text):
        with pytest.raises(LiteralParseError):
            causet_from_text(text)


class TestMatrixFormat:
    def test_round_trip(self, temp_workspace, four_point_props):
        path = write_matrix(four_point_props.delta, temp_workspace / "delta.txt", kind="pauli_jordan")
        assert path.read_text().startswith("matrix n=4 m=4 kind=pauli_jordan\n")
        assert np.array_equal(read_matrix(path), four_point_props.delta)

    def test_rejects_wrong_row_count(self, temp_workspace):
        path = temp_workspace / "bad.txt"
        path.write_text("matrix n=3 m=2 kind=x\n1 2\n3 4\n")
        with pytest.raises(LiteralParseError):
            read_matrix(path)

    def test_rejects_missing_header(self, temp_workspace):
        path = temp_workspace / "bad.txt"
        path.write_text("1 2\n")
        with pytest.raises(LiteralParseError):
            read_matrix(path)


class TestCsv:
    def test_full_precision(self, temp_workspace):
        path = write_csv(temp_workspace / "out.csv", ["s", "re"], [(0.1, 1 / 3)])
        assert path.read_text() == "s,re\n0.10000000000000001,0.33333333333333331\n"
        assert read_csv(path) == [{"s": "0.10000000000000001", "re": "0.33333333333333331"}]

    def test_value_text(self):
        assert format_value(None) == "none"
        assert format_value(True) == "true"
        assert format_value(np.int64(3)) == "3"
        assert format_value(SpacetimeSource.CONTINUUM) == "continuum"
        assert format_value((1, 2.5)) == "1,2.5"


class TestConfigFormat:
    """key=value experiment configs"""

    def test_defaults_round_trip(self):
        config = ExperimentConfig()
        assert config_from_text(config_to_text(config)) == config

    def test_comments_and_linspace(self):
        config = config_from_text("# four-point scan\nkraus = ideal:uniform:w=1  # Charlie\ns_grid=0:1:5\n")
        assert config.kraus == "ideal:uniform:w=1"
        assert config.s_grid == (0.0, 0.25, 0.5, 0.75, 1.0)

    def test_overrides_win(self):
        config = config_from_text("t=0.5\n", overrides={"t": 2.0})
        assert config.t == 2.0

    def test_none_clears_nullable(self):
        assert config_from_text("lab_rect=none\n").lab_rect is None

    def test_rejects_line_without_equals(self):
        with pytest.raises(LiteralParseError):
            config_from_text("kraus\n")

    def test_rejects_repeated_key(self):
        with pytest.raises(LiteralParseError):
            config_from_text("t=1\nt=2\n")

    def test_rejects_unknown_key(self):
        with pytest.raises(ValidationError):
            config_from_text("kruas=kick:square\n")

    def test_rejects_reversed_range(self):
        with pytest.raises(ValidationError):
            config_from_text("t_range=4,0\n")


class TestScenarioBundle:
    def test_four_point_bundle(self, scenario, temp_workspace):
        written = write_scenario_bundle(scenario, temp_workspace / "scenario")
        assert sorted(p.name for p in written) == ["causet.txt", "scenario.txt", "vectors.csv"]
        summary = (temp_workspace / "scenario" / "scenario.txt").read_text().splitlines()
        assert "x_plus=3" in summary
        assert "x_minus=0" in summary
        assert "lab=1,2" in summary
        rows = read_csv(temp_workspace / "scenario" / "vectors.csv")
        assert [float(r["f"]) for r in rows] == list(scenario.f)
