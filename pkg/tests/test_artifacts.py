import json
import math

import numpy as np
import pytest

from gpucb_lab.artifacts import SCHEMA_LINE, read_run_csv, run_columns, write_json, write_run_csv
from gpucb_lab.errors import SchemaError
from gpucb_lab.kernels import KernelSpec
from gpucb_lab.policies import BetaSchedule, GpUcb, Mvr, run_policy
from gpucb_lab.sampler import Grid, sample_prior

SPEC = KernelSpec.matern(2.5, 0.2)


@pytest.fixture(scope="module")
def run():
    path = sample_prior(SPEC, Grid(2, 1.0, 9), seed=3)
    return run_policy(path, GpUcb(BetaSchedule(0.1, 2)), 0.7, 25, seed=3)


def valid_text(tmp_path, run):
    p = write_run_csv(tmp_path / "run.csv", run, {"policy": "gp-ucb"})
    return p, p.read_text().splitlines()


class TestRoundTrip:
    def test_bitwise(self, tmp_path, run):
        table = read_run_csv(write_run_csv(tmp_path / "r.csv", run, {"seed": 3}))
        assert table.T == 25 and table.d == 2 and table.metadata == {"seed": 3}
        np.testing.assert_array_equal(table["x1"], run.x[:, 0])
        np.testing.assert_array_equal(table["x2"], run.x[:, 1])
        for key in ("y", "f", "mu", "sigma", "beta", "inst_regret", "info_gain"):
            np.testing.assert_array_equal(table[key], getattr(run, key))
        np.testing.assert_array_equal(table["cum_regret"], np.cumsum(run.inst_regret))

    def test_nan_beta_survives(self, tmp_path):
        path = sample_prior(SPEC, Grid(1, 1.0, 16), seed=0)
        mvr = run_policy(path, Mvr(), 1.0, 4, seed=0)
        table = read_run_csv(write_run_csv(tmp_path / "m.csv", mvr, {}))
        assert np.all(np.isnan(table["beta"]))

    def test_layout(self, tmp_path, run):
        _, lines = valid_text(tmp_path, run)
        assert lines[0] == SCHEMA_LINE and lines[1].startswith("# meta=")
        assert lines[2].split(",") == run_columns(2)
        assert len(lines) == 3 + 25


class TestSchemaErrors:
    def rewrite(self, tmp_path, lines):
        p = tmp_path / "bad.csv"
        p.write_text("\n".join(lines) + "\n")
        return p

    def test_missing_schema_line(self, tmp_path, run):
        _, lines = valid_text(tmp_path, run)
        with pytest.raises(SchemaError, match="line 1"):
            read_run_csv(self.rewrite(tmp_path, lines[1:]))

    def test_wrong_header(self, tmp_path, run):
        _, lines = valid_text(tmp_path, run)
        lines[2] = lines[2].replace("sigma", "sd")
        with pytest.raises(SchemaError, match="line 3"):
            read_run_csv(self.rewrite(tmp_path, lines))

    def test_bad_cell_names_line_and_column(self, tmp_path, run):
        _, lines = valid_text(tmp_path, run)
        cells = lines[6].split(",")
        cells[run_columns(2).index("mu")] = "abc"
        lines[6] = ",".join(cells)
        with pytest.raises(SchemaError, match="line 7, column 'mu'"):
            read_run_csv(self.rewrite(tmp_path, lines))

    def test_short_row(self, tmp_path, run):
        _, lines = valid_text(tmp_path, run)
        lines[4] = ",".join(lines[4].split(",")[:-1])
        with pytest.raises(SchemaError, match="line 5"):
            read_run_csv(self.rewrite(tmp_path, lines))

    def test_step_sequence(self, tmp_path, run):
        _, lines = valid_text(tmp_path, run)
        lines[5] = "9" + lines[5][1:]
        with pytest.raises(SchemaError, match="column 't'"):
            read_run_csv(self.rewrite(tmp_path, lines))

    def test_non_finite_regret(self, tmp_path, run):
        _, lines = valid_text(tmp_path, run)
        cells = lines[3].split(",")
        cells[run_columns(2).index("inst_regret")] = "nan"
        lines[3] = ",".join(cells)
        with pytest.raises(SchemaError, match="line 4, column 'inst_regret'"):
            read_run_csv(self.rewrite(tmp_path, lines))

    def test_no_rows(self, tmp_path, run):
        _, lines = valid_text(tmp_path, run)
        with pytest.raises(SchemaError):
            read_run_csv(self.rewrite(tmp_path, lines[:3]))


class TestJson:
    def test_non_finite_become_null(self, tmp_path):
        p = write_json(tmp_path / "a.json", {"b": math.inf, "a": [np.float64(1.5), np.int64(2), np.bool_(True)]})
        assert json.loads(p.read_text()) == {"a": [1.5, 2, True], "b": None}

    def test_sorted_keys(self, tmp_path):
        text = write_json(tmp_path / "a.json", {"z": 1, "a": 2}).read_text()
        assert text.index('"a"') < text.index('"z"')
