"""2-OPT local search, exact optima, optimal-tour oracles, approximation ratio.

The hardness measure is alpha(I) = A(I) / OPT(I) where A(I) is the average
tour length of five 2-OPT runs from independent random starts and OPT(I)
comes from an oracle: Held-Karp dynamic programming up to max_exact cities,
an external solver command, or a file of cached optima.
"""
from __future__ import annotations

import json
import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import OracleCapacityError, OracleError, OracleInconsistencyError
from .instances import RandomSource, TspInstance, check_tour, distance_matrix

DEFAULT_MAX_EXACT = 16
DEFAULT_RESTARTS = 5
_ALPHA_TOL = 1e-9

ORACLE_ENV_VAR = "INSTANCE_FORGE_ORACLE_CMD"


@dataclass(frozen=True)
class SolveReport:
    """Outcome of repeated 2-OPT runs on one instance."""

    best_tour: np.ndarray
    length: float
    restarts: int
    mean_length: float


def two_opt(inst: TspInstance, start) -> np.ndarray:
    """Run first-improvement 2-OPT from `start` to a local optimum.

    Deterministic: position pairs are scanned lexicographically and the scan
    restarts after each accepted segment reversal, so the result depends
    only on the instance and the start tour.
    """
    order = check_tour(start, inst.n)
    return _kernels.two_opt(distance_matrix(inst.coords), order)


def two_opt_mean_quality(
    inst: TspInstance, runs: int = DEFAULT_RESTARTS, rng: RandomSource | None = None
) -> SolveReport:
    """2-OPT from `runs` random starts; A(I) is the mean local-optimum length.

    Restart r draws its start from rng.child(r), so the report is a pure
    function of (instance, rng seed) and restarts could run in parallel.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if rng is None:
        raise ValueError("two_opt_mean_quality needs an explicit RandomSource")
    dist = distance_matrix(inst.coords)
    best_tour = None
    best_length = np.inf
    total = 0.0
    for r in range(runs):
        start = rng.child(r).permutation(inst.n)
        tour = _kernels.two_opt(dist, start)
        length = _kernels.tour_length(dist, tour)
        total += length
        if length < best_length:
            best_length = length
            best_tour = tour
    return SolveReport(best_tour, best_length, runs, total / runs)


def exact_optimum(inst: TspInstance, max_exact: int = DEFAULT_MAX_EXACT) -> float:
    """Optimal tour length by Held-Karp DP; O(n^2 2^n) time, O(n 2^n) memory."""
    if inst.n > max_exact:
        raise OracleCapacityError(
            f"exact solver limited to n <= {max_exact}, got n = {inst.n}; "
            "configure an external oracle (see solvers.CommandOracle)"
        )
    return _kernels.held_karp(distance_matrix(inst.coords))


class ExactOracle:
    """Held-Karp oracle for small instances."""

    def __init__(self, max_exact: int = DEFAULT_MAX_EXACT):
        self.max_exact = max_exact

    def opt(self, inst: TspInstance) -> float:
        return exact_optimum(inst, self.max_exact)

    def check(self, n: int) -> None:
        if n > self.max_exact:
            raise OracleCapacityError(
                f"exact solver limited to n <= {self.max_exact}, configured size is {n}"
            )

    def spec(self) -> str:
        return f"exact:{self.max_exact}"


class CommandOracle:
    """External solver invoked per instance.

    Protocol: the instance is written to a temp file in the native JSON
    format, `{path}` in the argument template is substituted with that file,
    and the command must print the optimal tour length as a single decimal
    number on stdout.
    """

    def __init__(self, template: str):
        if not template.strip():
            raise OracleError("external oracle command template is empty")
        self.template = template

    def opt(self, inst: TspInstance) -> float:
        fd, path = tempfile.mkstemp(suffix=".json", prefix="ifinst_")
        os.close(fd)
        try:
            from .instances import write_instance

            write_instance(inst, path)
            parts = shlex.split(self.template)
            argv = [part.replace("{path}", path) for part in parts]
            if not any("{path}" in part for part in parts):
                argv.append(path)
            proc = subprocess.run(argv, capture_output=True, text=True)
            if proc.returncode != 0:
                raise OracleError(
                    f"oracle command {argv[0]!r} exited {proc.returncode}: "
                    f"{proc.stderr.strip()[:200]}"
                )
            out = proc.stdout.strip().split()
            try:
                value = float(out[0])
            except (IndexError, ValueError):
                raise OracleError(
                    f"oracle command {argv[0]!r} printed no parseable length: "
                    f"{proc.stdout.strip()[:200]!r}"
                )
            if value <= 0:
                raise OracleError(f"oracle returned non-positive optimum {value}")
            return value
        finally:
            os.unlink(path)

    def check(self, n: int) -> None:
        pass

    def spec(self) -> str:
        return f"command:{self.template}"


class CachedOracle:
    """Optimal lengths looked up by instance id from a JSON map."""

    def __init__(self, table: dict[str, float], source: str = "<memory>"):
        self.table = {str(k): float(v) for k, v in table.items()}
        self.source = source

    @classmethod
    def from_file(cls, path) -> "CachedOracle":
        with open(path, "r", encoding="utf-8") as fh:
            table = json.load(fh)
        if not isinstance(table, dict):
            raise OracleError(f"{path}: cached oracle file must be a JSON object")
        return cls(table, str(path))

    def opt(self, inst: TspInstance) -> float:
        if inst.id is None or inst.id not in self.table:
            raise OracleError(
                f"no cached optimum for instance id {inst.id!r} in {self.source}"
            )
        return self.table[inst.id]

    def check(self, n: int) -> None:
        pass

    def spec(self) -> str:
        return f"cached:{self.source}"


def make_oracle(spec: str | None, n: int | None = None):
    """Build an oracle from a spec string.

    Accepted forms: "exact", "exact:N" (raise the Held-Karp size cap),
    "command:TEMPLATE" ({path} is replaced by the instance file), "command"
    (template from $INSTANCE_FORGE_ORACLE_CMD), "cached:FILE". With no spec,
    uses exact DP when it can serve size n, else the environment command.
    """
    if spec is None or not spec.strip():
        if n is not None and n <= DEFAULT_MAX_EXACT:
            return ExactOracle()
        env = os.environ.get(ORACLE_ENV_VAR, "")
        if env.strip():
            return CommandOracle(env)
        raise OracleCapacityError(
            f"no oracle configured for n={n}; pass an oracle spec or set ${ORACLE_ENV_VAR}"
        )
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "exact":
        if not arg:
            return ExactOracle()
        try:
            return ExactOracle(int(arg))
        except ValueError:
            raise OracleError(f"bad exact oracle size {arg!r}")
    if kind == "command":
        template = arg or os.environ.get(ORACLE_ENV_VAR, "")
        if not template.strip():
            raise OracleError(
                f"oracle 'command' needs a template (inline or via ${ORACLE_ENV_VAR})"
            )
        return CommandOracle(template)
    if kind == "cached":
        if not arg:
            raise OracleError("oracle 'cached' needs a file path, e.g. cached:opt.json")
        return CachedOracle.from_file(arg)
    raise OracleError(f"unknown oracle spec {spec!r}")


def ratio_of(mean_length: float, opt: float) -> float:
    """Approximation ratio with a consistency guard on the oracle value."""
    alpha = mean_length / opt
    if alpha < 1.0 - _ALPHA_TOL:
        raise OracleInconsistencyError(
            f"2-OPT mean {mean_length!r} beats claimed optimum {opt!r} "
            f"(alpha={alpha!r}); the oracle is inconsistent"
        )
    return alpha


def approximation_ratio(
    inst: TspInstance, oracle, rng: RandomSource, runs: int = DEFAULT_RESTARTS
) -> float:
    """alpha(I) = mean 2-OPT length over `runs` restarts / OPT(I).

    Raises OracleInconsistencyError when the heuristic beats the claimed
    optimum by more than a 1e-9 relative tolerance (broken external oracle).
    """
    report = two_opt_mean_quality(inst, runs, rng)
    return ratio_of(report.mean_length, oracle.opt(inst))
