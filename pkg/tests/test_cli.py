import json

import pytest

from dynspectra.cli import EXIT_NOCERT, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main

TABLE_MODEL = {
    "alphabet": 2,
    "transitions": "full",
    "geometry": {"kind": "branches",
                 "branches": [{"letter": 0, "coeffs": ["1/3", "0"]}, {"letter": 1, "coeffs": ["1/3", "2/3"]}]},
    "rate_bounds": {"l1u": "3", "l2u": "3", "l1s": "3", "l2s": "3"},
    "potential": {"kind": "table", "radius": 1,
                  "values": {f"{a},{b},{c}": f"{a + 2 * b + c}/2" for a in (0, 1) for b in (0, 1) for c in (0, 1)}},
}


def run(args, capsys):
    code = main(args)
    return code, capsys.readouterr().out


def test_slice_csv_with_manifest(capsys):
    code, out = run(["slice", "--t", "3", "--period-max", "4", "--digit-cap", "2"], capsys)
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0].startswith("# manifest ")
    man = json.loads(lines[0][len("# manifest "):])
    assert man["command"] == "slice" and "threads" not in json.dumps(man)
    assert lines[1] == "lo,hi,period_word"
    assert lines[2].startswith("2.236067977499,2.236067977500")
    assert len(lines) == 5


def test_validate_table_model(tmp_path, capsys):
    f = tmp_path / "m.json"
    f.write_text(json.dumps(TABLE_MODEL))
    code, out = run(["validate", "--model", str(f)], capsys)
    assert code == EXIT_OK and out.strip().endswith("OK")


def test_bad_model_file_is_validation_error(tmp_path, capsys):
    bad = dict(TABLE_MODEL, potential={"kind": "table", "radius": 1, "values": {"0,0,0": "1"}})
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(bad))
    assert main(["validate", "--model", str(f)]) == EXIT_VALIDATION


def test_overlapping_branches_is_validation_error(tmp_path):
    bad = json.loads(json.dumps(TABLE_MODEL))
    bad["geometry"]["branches"][1]["coeffs"] = ["1/3", "1/6"]
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(bad))
    assert main(["validate", "--model", str(f)]) == EXIT_VALIDATION


def test_usage_errors():
    with pytest.raises(SystemExit) as ei:
        main(["slice", "--bogus"])
    assert ei.value.code == EXIT_USAGE
    assert main(["slice"]) == EXIT_USAGE
    assert main(["dimension-curve", "--t-min", "3", "--t-max", "2", "--steps", "3"]) == EXIT_USAGE


def test_extract_below_minimum_has_no_certificate():
    assert main(["extract", "--t", "2.2", "--digit-cap", "2", "--r0", "3"]) == EXIT_NOCERT


def test_dimension_curve_table_model_threads_identical(tmp_path):
    f = tmp_path / "m.json"
    f.write_text(json.dumps(TABLE_MODEL))
    outs = []
    for th in ("1", "2"):
        o = tmp_path / f"c{th}.csv"
        assert main(["dimension-curve", "--model", str(f), "--t-min", "1", "--t-max", "2", "--steps", "3",
                     "--r-max", "6", "--depth", "10", "--threads", th, "--out", str(o)]) == EXIT_OK
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]
    rows = outs[0].decode().splitlines()[2:]
    ups = [float(r.split(",")[2]) for r in rows]
    assert ups == sorted(ups)
