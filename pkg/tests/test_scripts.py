import io
import json
import os

import pandas as pd
import pytest

from conftest import ROOT
from core.analysis import fpr_standard_exact
from core.codec import load_filter


def _run(load_script, capsys, name, argv):
    code = load_script(name).main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# ----------------------------------------------------------------------
# table
# ----------------------------------------------------------------------

def test_table1_csv_matches_golden(load_script, capsys, golden):
    code, out, _ = _run(load_script, capsys, "make_table", ["1"])
    assert code == 0
    df = pd.read_csv(io.StringIO(out))
    assert len(df) == 8
    cell = df[(df["m"] == 512) & (df["k"] == 16)]["F_p/F_s"].iloc[0]
    assert cell == pytest.approx(1.09783475, abs=1.5e-8)
    assert out.splitlines()[0] == "m,k,F_a,F_s,F_p,F_p/F_s"
    assert all(len(field.split(".")[1]) == 8 for field in out.splitlines()[1].split(",")[2:])
    diff = (df.drop(columns=["m", "k"]) - golden(1).drop(columns=["m", "k"])).abs()
    misprinted = (df["m"] == 64) & (df["k"] == 8)
    assert diff[~misprinted].max().max() <= 1.5e-8
    assert diff.loc[misprinted, ["F_a", "F_s", "F_p"]].max().max() <= 1.5e-8
    assert df.loc[misprinted, "F_p/F_s"].iloc[0] == pytest.approx(1.21703636, abs=1.5e-8)


def test_table4_cell(load_script, capsys):
    code, out, _ = _run(load_script, capsys, "make_table", ["4"])
    assert code == 0
    assert "512,8,0.0535," in out


def test_table_output_is_stable(load_script, capsys, tmp_path):
    _, first, _ = _run(load_script, capsys, "make_table", ["3"])
    target = tmp_path / "t3.csv"
    _, second, err = _run(load_script, capsys, "make_table", ["3", "--out", str(target)])
    assert first == second
    assert target.read_text(encoding="utf-8") == first
    assert "[Save]" in err


def test_table_markdown(load_script, capsys):
    code, out, _ = _run(load_script, capsys, "make_table", ["4", "--format", "markdown"])
    assert code == 0
    assert out.startswith("| m | k | some |")


def test_table_json_round_trips_doubles(load_script, capsys):
    from core.tables import build_table

    _, out, _ = _run(load_script, capsys, "make_table", ["1", "--format", "json"])
    records = json.loads(out)
    assert records[1]["F_s"] == build_table(1)["F_s"].iloc[1]


# ----------------------------------------------------------------------
# analyze
# ----------------------------------------------------------------------

def test_analyze_fs_and_fp(load_script, capsys):
    _, out, _ = _run(load_script, capsys, "analyze", ["fs", "--n", "5", "--m", "64", "--k", "8"])
    assert out.strip() == "0.00260362"
    _, out, _ = _run(load_script, capsys, "analyze", ["fp", "--n", "5", "--m", "64", "--k", "8"])
    assert out.strip() == "0.00316870"


def test_analyze_per_element_below_global(load_script, capsys):
    _, out, _ = _run(load_script, capsys, "analyze", ["per-element", "--n", "5", "--m", "64", "--k", "8", "--d", "8"])
    assert float(out) < 0.00260362


def test_analyze_json_is_exact(load_script, capsys):
    _, out, _ = _run(load_script, capsys, "analyze", ["fs", "--n", "5", "--m", "64", "--k", "8", "--format", "json"])
    assert json.loads(out)["value"] == fpr_standard_exact(5, 64, 8)


def test_analyze_vector_and_integer_results(load_script, capsys):
    _, out, _ = _run(load_script, capsys, "analyze", ["collisions", "--m", "64", "--k", "8"])
    assert len(out.split()) == 9
    _, out, _ = _run(load_script, capsys, "analyze", ["hash-bits", "--m", "512", "--k", "8", "--variant", "standard"])
    assert out.strip() == "72"
    _, out, _ = _run(load_script, capsys, "analyze", ["capacity", "--m", "64", "--k", "4"])
    assert out.strip() == "11"


def test_analyze_collisions_allows_more_hashes_than_bits(load_script, capsys):
    code, out, _ = _run(load_script, capsys, "analyze", ["collisions", "--m", "2", "--k", "3"])
    assert code == 0
    assert [float(v) for v in out.split()] == [0.0, 0.25, 0.75, 0.0]
    code, _, _ = _run(load_script, capsys, "analyze", ["fs", "--n", "1", "--m", "2", "--k", "3"])
    assert code == 1


def test_analyze_invalid_input(load_script, capsys):
    code, _, err = _run(load_script, capsys, "analyze", ["fp", "--n", "5", "--m", "63", "--k", "4"])
    assert code == 1
    assert "[Error]" in err and "usage:" in err


def test_analyze_missing_flag_is_usage_error(load_script):
    with pytest.raises(SystemExit) as info:
        load_script("analyze").main(["fs", "--m", "64", "--k", "8"])
    assert info.value.code == 2


# ----------------------------------------------------------------------
# filter
# ----------------------------------------------------------------------

def test_filter_lifecycle(load_script, capsys, tmp_path):
    path = str(tmp_path / "f.pbf")
    lines = tmp_path / "elements.txt"
    lines.write_text("alpha\nbeta\ngamma\ndelta\nepsilon\n", encoding="utf-8")

    assert _run(load_script, capsys, "bloom_filter",
                ["create", path, "--variant", "partitioned", "--m", "64", "--k", "8", "--seed", "3"])[0] == 0
    assert _run(load_script, capsys, "bloom_filter", ["insert", path, "--input", str(lines)])[0] == 0

    code, out, _ = _run(load_script, capsys, "bloom_filter", ["query", path, "beta"])
    assert code == 0
    assert out == "beta\tpresent\n"

    code, out, _ = _run(load_script, capsys, "bloom_filter", ["info", path])
    info = json.loads(out)
    assert info["inserted_count"] == 5
    assert 0 < info["fill_ratio"] <= 40 / 64
    assert all(0 < info[f"part_{i}_fill"] <= 5 / 8 for i in range(8))
    assert load_filter(path).inserted_count == 5


def test_filter_hex_elements(load_script, capsys, tmp_path):
    path = str(tmp_path / "h.pbf")
    _run(load_script, capsys, "bloom_filter", ["create", path, "--variant", "standard", "--m", "256", "--k", "4"])
    data = tmp_path / "hex.txt"
    data.write_text("00ff10\ndeadbeef\n", encoding="utf-8")
    _run(load_script, capsys, "bloom_filter", ["--hex", "insert", path, "--input", str(data)])
    f = load_filter(path)
    assert bytes.fromhex("deadbeef") in f


def test_filter_set_operations(load_script, capsys, tmp_path):
    a, b, u = (str(tmp_path / n) for n in ("a.pbf", "b.pbf", "u.pbf"))
    for path, text in ((a, "x\ny\n"), (b, "z\n")):
        src = tmp_path / f"{path[-5]}.txt"
        src.write_text(text, encoding="utf-8")
        _run(load_script, capsys, "bloom_filter", ["create", path, "--variant", "partitioned", "--m", "128", "--k", "4"])
        _run(load_script, capsys, "bloom_filter", ["insert", path, "--input", str(src)])

    assert _run(load_script, capsys, "bloom_filter", ["union", a, b, "--out", u])[0] == 0
    merged = load_filter(u)
    assert all(e in merged for e in (b"x", b"y", b"z"))

    code, out, _ = _run(load_script, capsys, "bloom_filter", ["disjoint", a, a])
    assert code == 0 and out == "possibly-overlapping\n"


def test_filter_intersect_with_different_seeds_fails(load_script, capsys, tmp_path):
    a, b = str(tmp_path / "a.pbf"), str(tmp_path / "b.pbf")
    _run(load_script, capsys, "bloom_filter", ["create", a, "--m", "64", "--k", "4", "--seed", "1"])
    _run(load_script, capsys, "bloom_filter", ["create", b, "--m", "64", "--k", "4", "--seed", "2"])
    code, _, err = _run(load_script, capsys, "bloom_filter", ["intersect", a, b, "--out", str(tmp_path / "i.pbf")])
    assert code == 1
    assert "ParamsMismatchError" in err and "seed" in err


def test_filter_fold_and_truncate(load_script, capsys, tmp_path):
    s, p = str(tmp_path / "s.pbf"), str(tmp_path / "p.pbf")
    _run(load_script, capsys, "bloom_filter", ["create", s, "--variant", "standard", "--m", "256", "--k", "4"])
    _run(load_script, capsys, "bloom_filter", ["create", p, "--variant", "partitioned", "--m", "256", "--k", "4"])
    assert _run(load_script, capsys, "bloom_filter", ["fold", s, "--m-prime", "128", "--out", s + ".f"])[0] == 0
    assert load_filter(s + ".f").params.m == 128
    assert _run(load_script, capsys, "bloom_filter", ["truncate", p, "--k-prime", "2", "--out", p + ".t"])[0] == 0
    assert load_filter(p + ".t").params.k == 2
    assert _run(load_script, capsys, "bloom_filter", ["fold", p, "--m-prime", "128", "--out", p + ".f"])[0] == 1


def test_filter_corrupt_file(load_script, capsys, tmp_path):
    bad = tmp_path / "bad.pbf"
    bad.write_bytes(b"NOPE" + bytes(60))
    code, _, err = _run(load_script, capsys, "bloom_filter", ["info", str(bad)])
    assert code == 1
    assert "BadMagicError" in err


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------

def test_simulate_zero_trials_is_usage_error(load_script):
    with pytest.raises(SystemExit) as info:
        load_script("simulate").main(["fpr", "--trials", "0"])
    assert info.value.code == 2


def test_simulate_fpr_json(load_script, capsys):
    code, out, err = _run(
        load_script, capsys, "simulate",
        ["fpr", "--variant", "partitioned", "--m", "64", "--k", "8", "--n", "5",
         "--trials", "2000", "--seed", "1", "--format", "json", "--no-progress"],
    )
    assert code == 0
    report = json.loads(out)
    assert report["trials_used"] == 2000
    assert report["reference"] == pytest.approx(0.00316870, abs=1e-8)
    assert report["ci95_lo"] <= report["point_estimate"] <= report["ci95_hi"]
    assert "[Cfg]" in err


def test_simulate_double_hash_step_zero(load_script, capsys):
    code, out, _ = _run(
        load_script, capsys, "simulate",
        ["double-hash", "--step-class", "0", "--m", "512", "--k", "8", "--fill", "0.5",
         "--trials", "2000", "--no-progress"],
    )
    assert code == 0
    df = pd.read_csv(io.StringIO(out)).set_index("layout")
    assert df.loc["standard", "reference"] == pytest.approx(0.5)
    assert abs(df.loc["standard", "point_estimate"] - 0.5) < 0.05


def test_simulate_with_config(load_script, capsys):
    code, out, _ = _run(
        load_script, capsys, "simulate",
        ["fpr", "--config", os.path.join(ROOT, "configs", "experiments.yaml"), "--trials", "500", "--no-progress"],
    )
    assert code == 0
    df = pd.read_csv(io.StringIO(out))
    assert df["meta_m"].iloc[0] == 512 and df["meta_n"].iloc[0] == 44


def test_simulate_invalid_combination(load_script, capsys):
    code, _, err = _run(
        load_script, capsys, "simulate",
        ["per-element", "--variant", "standard", "--scheme", "independent", "--step-class", "0",
         "--m", "64", "--k", "4", "--trials", "10", "--no-progress"],
    )
    assert code == 1
    assert "InfeasibleError" in err
