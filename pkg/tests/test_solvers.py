import json
import os
import stat
import sys

import numpy as np
import pytest

from instance_forge.errors import (
    OracleCapacityError,
    OracleError,
    OracleInconsistencyError,
)
from instance_forge.instances import (
    RandomSource,
    TspInstance,
    distance_matrix,
    random_instance,
    tour_length,
)
from instance_forge.solvers import (
    CachedOracle,
    CommandOracle,
    ExactOracle,
    approximation_ratio,
    exact_optimum,
    make_oracle,
    two_opt,
    two_opt_mean_quality,
)
from refimpl import brute_force_opt, improving_two_exchanges


class TestTwoOpt:
    def test_identity_on_convex_order(self, square4):
        # visiting a convex polygon in boundary order is already optimal
        out = two_opt(square4, [0, 1, 2, 3])
        assert tour_length(square4, out) == pytest.approx(4.0)

    def test_untangles_crossing(self, square4):
        out = two_opt(square4, [0, 2, 1, 3])
        assert tour_length(square4, out) == pytest.approx(4.0)

    def test_result_is_local_optimum(self, rng):
        inst = random_instance(22, rng.child(1))
        out = two_opt(inst, rng.child(2).permutation(22))
        dist = distance_matrix(inst.coords)
        assert improving_two_exchanges(dist, out) == []

    def test_rejects_bad_start(self, square4):
        with pytest.raises(ValueError, match="permutation"):
            two_opt(square4, [0, 1, 2, 2])


class TestMeanQuality:
    def test_deterministic_given_seed(self, inst10):
        a = two_opt_mean_quality(inst10, 5, RandomSource(4))
        b = two_opt_mean_quality(inst10, 5, RandomSource(4))
        assert a.mean_length == b.mean_length
        assert a.length == b.length
        assert np.array_equal(a.best_tour, b.best_tour)

    def test_mean_bounded_by_best(self, inst10, rng):
        report = two_opt_mean_quality(inst10, 5, rng)
        assert report.restarts == 5
        assert report.mean_length >= report.length
        assert report.length == pytest.approx(tour_length(inst10, report.best_tour))

    def test_restart_seeds_are_independent_of_run_count(self, inst10):
        # the first restart of a 1-run and a 3-run report draw the same start
        one = two_opt_mean_quality(inst10, 1, RandomSource(9))
        three = two_opt_mean_quality(inst10, 3, RandomSource(9))
        assert one.length >= three.length - 1e-15

    def test_needs_rng(self, inst10):
        with pytest.raises(ValueError, match="RandomSource"):
            two_opt_mean_quality(inst10, 5, None)


class TestExactOptimum:
    @pytest.mark.parametrize("n,seed", [(5, 1), (7, 2), (9, 3)])
    def test_matches_enumeration(self, n, seed):
        inst = random_instance(n, RandomSource(700 + seed))
        assert exact_optimum(inst) == pytest.approx(
            brute_force_opt(np.asarray(inst.coords)), rel=1e-9
        )

    def test_capacity_guard(self, rng):
        inst = random_instance(20, rng)
        with pytest.raises(OracleCapacityError, match="n <= 16"):
            exact_optimum(inst)

    def test_capacity_raisable(self, rng):
        inst = random_instance(17, rng)
        assert exact_optimum(inst, max_exact=17) > 0


class TestOracles:
    def test_exact_oracle(self, inst10):
        oracle = ExactOracle()
        assert oracle.opt(inst10) == exact_optimum(inst10)
        oracle.check(10)
        with pytest.raises(OracleCapacityError):
            oracle.check(17)

    def test_cached_oracle(self, inst10):
        inst = inst10.with_id("a")
        oracle = CachedOracle({"a": 3.25})
        assert oracle.opt(inst) == 3.25
        with pytest.raises(OracleError, match="no cached optimum"):
            oracle.opt(inst10)  # id is None

    def test_cached_oracle_from_file(self, tmp_path, inst10):
        path = tmp_path / "opt.json"
        path.write_text(json.dumps({"z": 2.5}))
        oracle = CachedOracle.from_file(path)
        assert oracle.opt(inst10.with_id("z")) == 2.5

    def test_command_oracle_runs_script(self, tmp_path, inst10):
        script = tmp_path / "fake_solver.py"
        script.write_text(
            "import json, sys\n"
            "doc = json.load(open(sys.argv[1]))\n"
            "print(len(doc['cities']) * 0.5)\n"
        )
        oracle = CommandOracle(f"{sys.executable} {script} {{path}}")
        assert oracle.opt(inst10) == pytest.approx(5.0)

    def test_command_oracle_appends_path_without_placeholder(self, tmp_path, inst10):
        script = tmp_path / "fake_solver.py"
        script.write_text(
            "import json, sys\nprint(json.load(open(sys.argv[1]))['n'])\n"
        )
        oracle = CommandOracle(f"{sys.executable} {script}")
        assert oracle.opt(inst10) == pytest.approx(10.0)

    def test_command_oracle_reports_failure(self, inst10):
        oracle = CommandOracle(f"{sys.executable} -c 'import sys; sys.exit(3)'")
        with pytest.raises(OracleError, match="exited 3"):
            oracle.opt(inst10)

    def test_command_oracle_rejects_garbage_output(self, inst10):
        oracle = CommandOracle(f"{sys.executable} -c 'print(\"nope\")'")
        with pytest.raises(OracleError, match="parseable"):
            oracle.opt(inst10)


class TestMakeOracle:
    def test_exact_spec(self):
        assert isinstance(make_oracle("exact"), ExactOracle)
        assert make_oracle("exact:20").max_exact == 20

    def test_default_small_n(self):
        assert isinstance(make_oracle(None, 12), ExactOracle)

    def test_default_large_n_without_env(self, monkeypatch):
        monkeypatch.delenv("INSTANCE_FORGE_ORACLE_CMD", raising=False)
        with pytest.raises(OracleCapacityError, match="INSTANCE_FORGE_ORACLE_CMD"):
            make_oracle(None, 50)

    def test_env_command_used_for_large_n(self, monkeypatch):
        monkeypatch.setenv("INSTANCE_FORGE_ORACLE_CMD", "solver {path}")
        oracle = make_oracle(None, 50)
        assert isinstance(oracle, CommandOracle)
        assert oracle.template == "solver {path}"

    def test_command_spec_inline(self):
        oracle = make_oracle("command:mysolver --tsp {path}")
        assert oracle.template == "mysolver --tsp {path}"

    def test_command_spec_from_env(self, monkeypatch):
        monkeypatch.setenv("INSTANCE_FORGE_ORACLE_CMD", "envsolver {path}")
        assert make_oracle("command").template == "envsolver {path}"

    def test_cached_spec(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text("{}")
        assert isinstance(make_oracle(f"cached:{path}"), CachedOracle)

    def test_unknown_spec(self):
        with pytest.raises(OracleError, match="unknown oracle"):
            make_oracle("quantum")


class TestApproximationRatio:
    def test_alpha_usually_one_on_tiny_instances(self, rng):
        # 2-OPT with 5 restarts solves most n=6 instances to optimality
        hits = 0
        for k in range(10):
            inst = random_instance(6, rng.child(0, k))
            alpha = approximation_ratio(inst, ExactOracle(), rng.child(1, k))
            assert alpha >= 1.0 - 1e-9
            if alpha <= 1.0 + 1e-9:
                hits += 1
        assert hits >= 8

    def test_alpha_at_least_one(self, rng):
        for k in range(5):
            inst = random_instance(12, rng.child(10, k))
            alpha = approximation_ratio(inst, ExactOracle(), rng.child(11, k))
            assert alpha >= 1.0 - 1e-9

    def test_inconsistent_oracle_detected(self, inst10, rng):
        lying = CachedOracle({"a": 1e6})
        # claimed optimum far above any tour length => alpha << 1
        with pytest.raises(OracleInconsistencyError, match="inconsistent"):
            approximation_ratio(inst10.with_id("a"), lying, rng)
