import csv
import io
import json
import os

import numpy as np
import pytest

from instance_forge.cli import main
from instance_forge.features import FEATURE_IDS
from instance_forge.instances import RandomSource, random_instance, write_instance

SQUARE_TSPLIB = """NAME: square
TYPE: TSP
DIMENSION: 4
EDGE_WEIGHT_TYPE: EUC_2D
NODE_COORD_SECTION
1 0 0
2 0 10
3 10 10
4 10 0
EOF
"""


def tiny_run_spec(mode, feature, threshold, generations=2):
    return {
        "n": 8,
        "mode": mode,
        "alpha_threshold": threshold,
        "measure": feature,
        "mu": 3,
        "lambda": 1,
        "generations": generations,
    }


def write_config(path, **doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
    return str(path)


def parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture(scope="module")
def evolved(tmp_path_factory):
    """One easy and one hard run directory, plus a zero-generation easy run."""
    base = tmp_path_factory.mktemp("runs")
    cfg = write_config(
        base / "config.json",
        output_dir=str(base),
        seeds=[0],
        runs=[
            tiny_run_spec("easy", "mst_dists_mean", 1.1),
            tiny_run_spec("hard", "nnds_mean", 1.0),
            tiny_run_spec("easy", "chull_area", 1.1, generations=0),
        ],
    )
    assert main(["evolve", cfg]) == 0
    return {
        "easy": str(base / "run00_easy_mst_dists_mean_n8_seed0"),
        "hard": str(base / "run01_hard_nnds_mean_n8_seed0"),
        "frozen": str(base / "run02_easy_chull_area_n8_seed0"),
    }


class TestEvolve:
    def test_runs_print_directories(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.json",
            output_dir=str(tmp_path / "out"),
            seeds=[0, 1],
            runs=[tiny_run_spec("easy", "mst_dists_mean", 1.1)],
        )
        assert main(["evolve", cfg]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == [
            str(tmp_path / "out" / "run00_easy_mst_dists_mean_n8_seed0"),
            str(tmp_path / "out" / "run00_easy_mst_dists_mean_n8_seed1"),
        ]
        for line in lines:
            assert os.path.isfile(os.path.join(line, "config.json"))
            assert os.path.isfile(os.path.join(line, "generations.csv"))
            assert os.path.isfile(os.path.join(line, "population", "features.csv"))

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["evolve", str(tmp_path / "absent.json")]) == 1
        assert "not found" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text("{nope")
        assert main(["evolve", str(path)]) == 1
        assert "line 1" in capsys.readouterr().err

    def test_missing_fields(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", output_dir=str(tmp_path), seeds=[0])
        assert main(["evolve", cfg]) == 1
        assert "'runs'" in capsys.readouterr().err

    def test_seeds_must_be_integers(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.json",
            output_dir=str(tmp_path),
            seeds=["zero"],
            runs=[tiny_run_spec("easy", "mst_dists_mean", 1.1)],
        )
        assert main(["evolve", cfg]) == 1
        assert "list of integers" in capsys.readouterr().err

    def test_seed_inside_run_spec_rejected(self, tmp_path, capsys):
        spec = tiny_run_spec("easy", "mst_dists_mean", 1.1)
        spec["seed"] = 7
        cfg = write_config(
            tmp_path / "c.json", output_dir=str(tmp_path), seeds=[0], runs=[spec]
        )
        assert main(["evolve", cfg]) == 1
        assert "top-level" in capsys.readouterr().err

    def test_bad_run_spec_names_its_index(self, tmp_path, capsys):
        good = tiny_run_spec("easy", "mst_dists_mean", 1.1)
        bad = tiny_run_spec("easy", "mst_dists_mean", 1.1)
        bad["mode"] = "medium"
        cfg = write_config(
            tmp_path / "c.json", output_dir=str(tmp_path), seeds=[0], runs=[good, bad]
        )
        assert main(["evolve", cfg]) == 1
        err = capsys.readouterr().err
        assert "runs[1]" in err
        assert "medium" in err

    def test_oracle_checked_before_any_run(self, tmp_path, capsys):
        out = tmp_path / "out"
        spec = tiny_run_spec("easy", "mst_dists_mean", 1.1)
        spec["n"] = 20
        spec["oracle"] = "exact"
        cfg = write_config(
            tmp_path / "c.json",
            output_dir=str(out),
            seeds=[0],
            runs=[tiny_run_spec("easy", "mst_dists_mean", 1.1), spec],
        )
        assert main(["evolve", cfg]) == 1
        assert "oracle" in capsys.readouterr().err
        assert not out.exists()

    def test_parallel_matches_sequential(self, tmp_path, capsys):
        name = "run00_easy_mst_dists_mean_n8_seed3"
        outs = {}
        for label, parallelism in (("a", 1), ("b", 2)):
            out = tmp_path / label
            cfg = write_config(
                tmp_path / f"{label}.json",
                output_dir=str(out),
                seeds=[3],
                parallelism=parallelism,
                runs=[tiny_run_spec("easy", "mst_dists_mean", 1.1)],
            )
            assert main(["evolve", cfg]) == 0
            outs[label] = out / name
        capsys.readouterr()
        for fname in ("generations.csv", "config.json"):
            seq = (outs["a"] / fname).read_bytes()
            par = (outs["b"] / fname).read_bytes()
            assert seq == par


class TestFeatures:
    def test_mixed_good_and_bad_files(self, tmp_path, capsys):
        square = tmp_path / "square.tsp"
        square.write_text(SQUARE_TSPLIB)
        native = tmp_path / "native.json"
        write_instance(random_instance(6, RandomSource(1), id="native-6"), native)
        code = main(["features", str(square), str(tmp_path / "ghost.json"), str(native)])
        out, err = capsys.readouterr()
        assert code == 1
        assert err != ""
        rows = parse_csv(out)
        assert rows[0] == ["id", "n", *FEATURE_IDS]
        assert len(rows) == 3
        assert rows[1][1] == "4"
        assert rows[1][rows[0].index("chull_area")] == "1.0"
        assert rows[2][0] == "native-6"

    def test_no_files_is_header_only(self, capsys):
        assert main(["features"]) == 0
        rows = parse_csv(capsys.readouterr().out)
        assert rows == [["id", "n", *FEATURE_IDS]]


class TestSolve:
    def test_three_city_alpha_one(self, tmp_path, capsys):
        path = tmp_path / "tri.json"
        write_instance(random_instance(3, RandomSource(2)), path)
        assert main(["solve", str(path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert abs(out["alpha"] - 1.0) <= 1e-12
        assert sorted(out["best_tour"]) == [0, 1, 2]
        assert out["restarts"] == 5
        assert out["best_length"] <= out["A"] + 1e-12
        assert out["A"] == pytest.approx(out["OPT"], rel=1e-12)

    def test_restart_count_argument(self, tmp_path, capsys):
        path = tmp_path / "i.json"
        write_instance(random_instance(5, RandomSource(3)), path)
        assert main(["solve", str(path), "--restarts", "3"]) == 0
        assert json.loads(capsys.readouterr().out)["restarts"] == 3

    def test_exact_oracle_capacity_is_runtime_error(self, tmp_path, capsys):
        path = tmp_path / "big.json"
        write_instance(random_instance(20, RandomSource(4)), path)
        assert main(["solve", str(path), "--oracle", "exact"]) == 2
        assert "n <= 16" in capsys.readouterr().err

    def test_missing_instance(self, tmp_path, capsys):
        assert main(["solve", str(tmp_path / "absent.json")]) == 1
        assert capsys.readouterr().err != ""


class TestReportRanges:
    def test_defaults_to_measured_feature(self, evolved, capsys):
        assert main(["report-ranges", evolved["easy"]]) == 0
        rows = parse_csv(capsys.readouterr().out)
        assert rows[0] == ["run", "feature", "n", "mode", "min", "max", "range", "median"]
        assert len(rows) == 2
        run, feature, n, mode, lo, hi, rng_, med = rows[1]
        assert run == evolved["easy"]
        assert feature == "mst_dists_mean"
        assert (n, mode) == ("8", "easy")
        assert float(rng_) == pytest.approx(float(hi) - float(lo), abs=1e-15)

    def test_zero_generation_population_has_zero_range(self, evolved, capsys):
        assert main(["report-ranges", evolved["frozen"]]) == 0
        rows = parse_csv(capsys.readouterr().out)
        _, feature, _, _, lo, hi, rng_, med = rows[1]
        assert feature == "chull_area"
        assert lo == hi == med
        assert rng_ == "0.0"

    def test_all_features_flag(self, evolved, capsys):
        assert main(["report-ranges", evolved["easy"], "--all-features"]) == 0
        rows = parse_csv(capsys.readouterr().out)
        assert [r[1] for r in rows[1:]] == list(FEATURE_IDS)

    def test_raw_values_file(self, evolved, tmp_path, capsys):
        raw = tmp_path / "raw.csv"
        code = main(
            ["report-ranges", evolved["easy"], evolved["hard"], "--raw", str(raw)]
        )
        assert code == 0
        capsys.readouterr()
        rows = parse_csv(raw.read_text())
        assert rows[0] == ["run", "id", "feature", "n", "mode", "value"]
        assert len(rows) == 1 + 2 * 3 * len(FEATURE_IDS)  # two runs of mu=3
        assert {r[4] for r in rows[1:]} == {"easy", "hard"}

    def test_not_a_run_directory(self, tmp_path, capsys):
        assert main(["report-ranges", str(tmp_path)]) == 1
        assert "config.json" in capsys.readouterr().err


class TestClassify:
    def test_pairs_sweep(self, evolved, capsys):
        code = main(["classify", evolved["easy"], evolved["hard"], "--combo-size", "2"])
        assert code == 0
        rows = parse_csv(capsys.readouterr().out)
        assert rows[0][:4] == ["feature_1", "feature_2", "feature_3", "n"]
        assert len(rows) == 22  # all 2-of-7 subsets, single instance size
        for row in rows[1:]:
            assert row[2] == ""
            assert (row[3], row[4], row[5], row[6]) == ("8", "rbf", "100.0", "2.0")
            assert row[7] != "NA"
            assert 0.0 <= float(row[7]) <= 1.0

    def test_both_sizes_by_default(self, evolved, capsys):
        assert main(["classify", evolved["easy"], evolved["hard"]]) == 0
        rows = parse_csv(capsys.readouterr().out)
        assert len(rows) == 1 + 21 + 35

    def test_linear_kernel_leaves_gamma_blank(self, evolved, capsys):
        code = main(
            [
                "classify", evolved["easy"], evolved["hard"],
                "--kernel", "linear", "--C", "1.5", "--combo-size", "2",
            ]
        )
        assert code == 0
        rows = parse_csv(capsys.readouterr().out)
        assert all(row[4] == "linear" for row in rows[1:])
        assert all(row[5] == "1.5" for row in rows[1:])
        assert all(row[6] == "" for row in rows[1:])

    def test_pool_flag_merges_sizes(self, evolved, capsys):
        code = main(
            ["classify", evolved["easy"], evolved["hard"], "--pool", "--combo-size", "2"]
        )
        assert code == 0
        rows = parse_csv(capsys.readouterr().out)
        assert all(row[3] == "0" for row in rows[1:])

    def test_out_file(self, evolved, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = main(
            [
                "classify", evolved["easy"], evolved["hard"],
                "--combo-size", "2", "--out", str(out),
            ]
        )
        assert code == 0
        assert capsys.readouterr().out == ""
        assert len(parse_csv(out.read_text())) == 22

    def test_single_class_rejected(self, evolved, capsys):
        assert main(["classify", evolved["easy"], evolved["easy"]]) == 1
        assert "hard-mode" in capsys.readouterr().err


class TestArgumentErrors:
    def test_no_command(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 1

    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["discombobulate"])
        assert exc.value.code == 1

    def test_combo_size_choices(self, evolved, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["classify", evolved["easy"], "--combo-size", "4"])
        assert exc.value.code == 1
