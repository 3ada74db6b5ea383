import csv
import io
import json
import math

import pytest
from numpy.testing import assert_allclose

from cpgraphene import cli
from cpgraphene.io import crossings_to_csv, format_cell, records_to_csv, round12, table_to_csv
from cpgraphene.analysis import CurveTable

K_B = 8.617333262e-5
EV_UM_N = 1.602176634e-13


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_f0_example_has_no_absolute_column(capsys):
    code, out, err = run(capsys, "f0", "--gap-ev", "0.2", "--mu-ev", "0.15", "--sep-um", "5",
                         "--temp-k", "300")
    assert code == 0 and err == ""
    rows = parse_csv(out)
    assert len(rows) == 2
    header = rows[0]
    assert "reduced_force" in header and "force_N" not in header
    assert {"gap_eV", "mu_eV", "sep_um", "temp_K"} <= set(header)
    assert out.endswith("\r\n")


def test_ideal_example(capsys):
    code, out, _ = run(capsys, "ideal", "--sep-um", "5", "--temp-k", "300",
                       "--alpha0-um3", "1e-12")
    assert code == 0
    row = dict(zip(*parse_csv(out)))
    assert_allclose(float(row["force_N"]), -3 * K_B * 300 * 1e-12 / (4 * 5 ** 4) * EV_UM_N,
                    rtol=1e-11)
    assert float(row["reduced_force"]) == 6.0


@pytest.mark.parametrize("argv", [
    ["f0", "--gap-ev", "0.2"],                         # missing separation
    ["ideal", "--sep-um", "5"],                        # missing alpha0
    ["force", "--sep-um", "-1"],
    ["force", "--sep-um", "2", "--gap-ev", "-0.1"],
    ["force", "--sep-um", "2", "--rel-tol", "0"],
    ["f0", "--sep-um", "2", "--unknown-flag", "1"],
    ["a0", "--threshold", "1.5"],
    ["scan-ratio", "--a-min-um", "10", "--a-max-um", "5"],
    ["nonsense"],
])
def test_validation_errors_exit_2_without_output(capsys, argv, tmp_path):
    out_file = tmp_path / "o.csv"
    code, out, err = run(capsys, *argv, "--out", str(out_file)) if argv != ["nonsense"] else \
        run(capsys, *argv)
    assert code == 2
    assert out == "" and err
    assert not out_file.exists()


def test_regime_violation_is_a_validation_error(capsys):
    code, out, err = run(capsys, "asym", "--gap-ev", "0.2", "--sep-um", "0.005")
    assert code == 2 and out == "" and "thermal parameter" in err


def test_nonconvergence_exit_3(capsys):
    code, out, err = run(capsys, "force", "--gap-ev", "0.1", "--sep-um", "3",
                         "--max-panels", "10", "--rel-tol", "1e-15")
    assert code == 3 and out == ""
    assert "best estimate" in err and "error bound" in err


def test_all_point_commands_run(capsys):
    for cmd in ("force", "f0", "asym", "delta-f0", "ratio"):
        code, out, _ = run(capsys, cmd, "--gap-ev", "0.2", "--mu-ev", "0.075", "--sep-um", "10")
        assert code == 0, cmd
        assert len(parse_csv(out)) == 2
    code, out, _ = run(capsys, "a0", "--gap-ev", "0.1", "--format", "json")
    data = json.loads(out)
    assert data["result"]["zero_term_fraction"] >= 0.99


def test_json_round_trip_is_byte_identical(capsys, tmp_path):
    first = tmp_path / "first.json"
    code, _, _ = run(capsys, "force", "--gap-ev", "0.15", "--mu-ev", "0.025", "--sep-um", "3.7",
                     "--alpha0-um3", "2.5e-13", "--format", "json", "--out", str(first))
    assert code == 0
    data = json.loads(first.read_text())
    assert list(data) == ["command", "config", "result"]
    second = tmp_path / "second.json"
    code, _, _ = run(capsys, "force", "--config", str(first), "--format", "json",
                     "--out", str(second))
    assert code == 0
    assert first.read_bytes() == second.read_bytes()


def test_key_value_config_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sheet\ngap-ev = 0.2\nmu_ev = 0.025\nsep_um = 3\n")
    _, from_cfg, _ = run(capsys, "f0", "--config", str(cfg))
    _, direct, _ = run(capsys, "f0", "--gap-ev", "0.2", "--mu-ev", "0.025", "--sep-um", "3")
    assert from_cfg == direct
    _, override, _ = run(capsys, "f0", "--config", str(cfg), "--sep-um", "6")
    assert dict(zip(*parse_csv(override)))["sep_um"] == "6"
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, out, err = run(capsys, "f0", "--config", str(bad))
    assert code == 2 and "unknown config key" in err and out == ""


def test_scan_outputs(capsys, tmp_path):
    cross = tmp_path / "cross.csv"
    code, out, _ = run(capsys, "scan-ratio", "--gaps-ev", "0.2", "--mus-ev", "0,0.15",
                       "--n-points", "4", "--crossings-out", str(cross))
    assert code == 0
    rows = parse_csv(out)
    assert rows[0][0] == "separation_um" and len(rows) == 5 and len(rows[0]) == 3
    crossing_rows = parse_csv(cross.read_text())
    assert crossing_rows[0] == ["curve", "gap_eV", "mu_eV", "threshold", "crossing_um"]
    assert len(crossing_rows) == 1 + 2 * 2
    code, out, _ = run(capsys, "scan-a0", "--gaps-ev", "0.1,0.2", "--mus-ev", "0",
                       "--format", "json")
    data = json.loads(out)
    assert data["config"]["gaps_ev"] == [0.1, 0.2]
    assert data["result"]["abscissa"]["values"] == [0.1, 0.2]
    values = data["result"]["curves"][0]["values"]
    assert values[0] > values[1]


def test_io_helpers():
    assert round12(1 / 3) == 0.333333333333
    assert round12(math.nan) is None
    assert format_cell(None) == "" and format_cell(True) == "true"
    text = records_to_csv([{"name": 'a "quoted", value', "x": 1.0}])
    assert parse_csv(text)[1] == ['a "quoted", value', "1"]
    assert '"a ""quoted"", value"' in text
    table = CurveTable("gap", "eV", [0.1, 0.2], {"c": [1.0, None]}, {"c": {"mu_eV": 0.0}}, "a0_um")
    assert parse_csv(table_to_csv(table))[2] == ["0.2", ""]
    assert crossings_to_csv(table) == "curve,gap_eV,mu_eV,threshold,crossing_um\r\n"
