"""Diversity-maximizing (mu+lambda) EA over TSP instances.

Per generation: pick lambda parents uniformly without replacement, mutate
each by moving one city, keep offspring whose 2-OPT approximation ratio
stays on the configured side of the threshold (easy: alpha <= alpha_e,
hard: alpha >= alpha_h), then prune back to mu members by minimum
diversity contribution. The bootstrap seeds the population with mu copies
of one feasible instance, so the measured feature range starts at zero
and can only grow.
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass

import numpy as np

from .diversity import EvaluatedInstance, Population, WeightSpec, prune
from .errors import BootstrapBudgetError, ConfigError
from .features import FEATURE_IDS, compute_all, feature_bounds
from .instances import RandomSource, TspInstance, random_instance, write_instance
from .solvers import approximation_ratio, make_oracle

# Tour sums taken in different orders (2-OPT vs the DP oracle) differ in the
# last ulp, so feasibility at alpha_threshold = 1.0 needs a tolerance.
ALPHA_FEASIBILITY_TOL = 1e-9

REFERENCE_EASY_ALPHA = {25: 1.0, 50: 1.0, 100: 1.03}
REFERENCE_HARD_ALPHA = {25: 1.15, 50: 1.18, 100: 1.2}

GENERATIONS_HEADER = ("gen", "feat_min", "feat_max", "range", "alpha_min", "alpha_max")


@dataclass(frozen=True)
class EaConfig:
    """Full parameterization of one EA run. Defaults follow the reference
    setup: mu=30, lambda=5, sigma 0.025/0.05 mixed 0.9/0.1, 10000 generations."""

    n: int
    mode: str
    alpha_threshold: float
    measure: WeightSpec
    seed: int
    mu: int = 30
    lam: int = 5
    generations: int = 10000
    sigma_small: float = 0.025
    sigma_large: float = 0.05
    p_small: float = 0.9
    oracle: str | None = None
    bootstrap_budget: int = 50000
    cities_per_mutation: int = 1

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError(f"n must be >= 3, got {self.n}")
        if self.mode not in ("easy", "hard"):
            raise ConfigError(f"mode must be 'easy' or 'hard', got {self.mode!r}")
        if self.alpha_threshold < 1.0:
            raise ConfigError(
                f"alpha_threshold must be >= 1, got {self.alpha_threshold}"
            )
        if not 1 <= self.lam <= self.mu:
            raise ConfigError(f"need 1 <= lambda <= mu, got lambda={self.lam} mu={self.mu}")
        if self.mu < 2:
            raise ConfigError(f"mu must be >= 2, got {self.mu}")
        if not 0.0 < self.p_small <= 1.0:
            raise ConfigError(f"p_small must be in (0, 1], got {self.p_small}")
        if self.sigma_small <= 0 or self.sigma_large <= 0:
            raise ConfigError("mutation sigmas must be positive")
        if self.generations < 0:
            raise ConfigError(f"generations must be >= 0, got {self.generations}")
        if self.bootstrap_budget < 1:
            raise ConfigError("bootstrap_budget must be >= 1")
        if self.cities_per_mutation < 1:
            raise ConfigError("cities_per_mutation must be >= 1")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "alpha_threshold": self.alpha_threshold,
            "measure": self.measure.to_dict(),
            "seed": self.seed,
            "mu": self.mu,
            "lambda": self.lam,
            "generations": self.generations,
            "sigma_small": self.sigma_small,
            "sigma_large": self.sigma_large,
            "p_small": self.p_small,
            "oracle": self.oracle,
            "bootstrap_budget": self.bootstrap_budget,
            "cities_per_mutation": self.cities_per_mutation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EaConfig":
        d = dict(d)
        known = {
            "n", "mode", "alpha_threshold", "measure", "seed", "mu", "lambda",
            "generations", "sigma_small", "sigma_large", "p_small", "oracle",
            "bootstrap_budget", "cities_per_mutation",
        }
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown EA config fields: {sorted(unknown)}")
        for req in ("n", "mode", "alpha_threshold", "measure", "seed"):
            if req not in d:
                raise ConfigError(f"EA config missing required field {req!r}")
        measure = d.pop("measure")
        if isinstance(measure, str):
            spec = WeightSpec.single(measure)
        elif isinstance(measure, dict):
            spec = WeightSpec.from_dict(measure)
        else:
            raise ConfigError(f"measure must be a feature id or an object, got {measure!r}")
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        try:
            return cls(measure=spec, **d)
        except TypeError as exc:
            raise ConfigError(str(exc))


def reference_config(
    n: int, mode: str, feature: str, seed: int = 0, oracle: str | None = None
) -> EaConfig:
    """Reference configuration for the standard sizes n in {25, 50, 100}."""
    table = REFERENCE_EASY_ALPHA if mode == "easy" else REFERENCE_HARD_ALPHA
    if n not in table:
        raise ConfigError(
            f"no reference alpha threshold for n={n}; choose from {sorted(table)} "
            "or build an EaConfig directly"
        )
    return EaConfig(
        n=n,
        mode=mode,
        alpha_threshold=table[n],
        measure=WeightSpec.single(feature),
        seed=seed,
        oracle=oracle,
    )


def is_feasible(alpha: float, cfg: EaConfig) -> bool:
    if cfg.mode == "easy":
        return alpha <= cfg.alpha_threshold + ALPHA_FEASIBILITY_TOL
    return alpha >= cfg.alpha_threshold - ALPHA_FEASIBILITY_TOL


def mutate(inst: TspInstance, cfg: EaConfig, rng: RandomSource) -> TspInstance:
    """Move cities_per_mutation cities (default one) by a Gaussian offset.

    Per city: sigma is sigma_small with probability p_small else sigma_large;
    each coordinate gets an independent N(0, sigma^2) offset and is reset to
    the parent's value if the proposal leaves [0, 1].
    """
    coords = inst.coords.copy()
    for _ in range(cfg.cities_per_mutation):
        sigma = cfg.sigma_small if rng.uniform() < cfg.p_small else cfg.sigma_large
        city = int(rng.integers(inst.n))
        dx = rng.normal(0.0, sigma)
        dy = rng.normal(0.0, sigma)
        x = coords[city, 0] + dx
        y = coords[city, 1] + dy
        if 0.0 <= x <= 1.0:
            coords[city, 0] = x
        if 0.0 <= y <= 1.0:
            coords[city, 1] = y
    return TspInstance(coords)


def _evaluate(inst: TspInstance, oracle, rng: RandomSource) -> EvaluatedInstance:
    alpha = approximation_ratio(inst, oracle, rng)
    return EvaluatedInstance(inst, compute_all(inst), alpha)


def bootstrap(cfg: EaConfig, oracle=None, rng: RandomSource | None = None) -> Population:
    """Find one feasible instance and duplicate it mu times.

    Easy mode rejection-samples random instances. Hard mode hill-climbs a
    random instance with the run's mutation operator, accepting any move
    that does not lower alpha. Evaluation k draws from rng.child(k), so
    the result depends only on the config.
    """
    if oracle is None:
        oracle = make_oracle(cfg.oracle, cfg.n)
    if rng is None:
        rng = RandomSource(cfg.seed).child(0)
    evals = 0

    def evaluate(inst: TspInstance) -> EvaluatedInstance:
        nonlocal evals
        if evals >= cfg.bootstrap_budget:
            raise BootstrapBudgetError(
                f"bootstrap used {evals} evaluations without reaching "
                f"alpha {'<=' if cfg.mode == 'easy' else '>='} {cfg.alpha_threshold} "
                f"({cfg.mode} mode, n={cfg.n})"
            )
        member = _evaluate(inst, oracle, rng.child(evals))
        evals += 1
        return member

    if cfg.mode == "easy":
        member = evaluate(random_instance(cfg.n, rng))
        while not is_feasible(member.alpha, cfg):
            member = evaluate(random_instance(cfg.n, rng))
    else:
        member = evaluate(random_instance(cfg.n, rng))
        while not is_feasible(member.alpha, cfg):
            child = evaluate(mutate(member.inst, cfg, rng))
            if child.alpha >= member.alpha:
                member = child
    return Population((member,) * cfg.mu, cfg.mu)


@dataclass(frozen=True)
class GenRecord:
    gen: int
    feat_min: float
    feat_max: float
    range: float
    alpha_min: float
    alpha_max: float
    removed: int


@dataclass(frozen=True)
class RunLog:
    config: EaConfig
    records: tuple[GenRecord, ...]
    population: Population


def evolve(cfg: EaConfig, oracle=None, progress=None) -> RunLog:
    """Run the EA to completion and return its log and final population.

    Seed layout: stream 0 bootstraps, stream 1+g drives generation g, and
    offspring j of a generation evaluates under that stream's child j, so
    offspring could be processed in parallel without changing the result.
    """
    if oracle is None:
        oracle = make_oracle(cfg.oracle, cfg.n)
    root = RandomSource(cfg.seed)
    pop = bootstrap(cfg, oracle, root.child(0))
    bounds = feature_bounds(cfg.n)
    logged_feature = cfg.measure.features[0]
    records = []
    for g in range(cfg.generations):
        grng = root.child(1 + g)
        parents = grng.choice_without_replacement(len(pop), cfg.lam)
        members = list(pop.members)
        accepted = 0
        for j, pidx in enumerate(parents):
            orng = grng.child(j)
            child = mutate(pop.members[int(pidx)].inst, cfg, orng)
            member = _evaluate(child, oracle, orng)
            if is_feasible(member.alpha, cfg):
                members.append(member)
                accepted += 1
        pop = Population(tuple(members), cfg.mu)
        if len(pop) > cfg.mu:
            pop = prune(pop, cfg.mu, cfg.measure, grng, bounds)
        values = pop.feature_values(logged_feature)
        alphas = pop.alphas()
        records.append(
            GenRecord(
                gen=g + 1,
                feat_min=float(values.min()),
                feat_max=float(values.max()),
                range=float(values.max() - values.min()),
                alpha_min=float(alphas.min()),
                alpha_max=float(alphas.max()),
                removed=accepted,
            )
        )
        if progress is not None:
            progress(records[-1])
    return RunLog(cfg, tuple(records), pop)


def save_run(log: RunLog, outdir) -> None:
    """Persist a run: config.json, generations.csv, population/ directory."""
    os.makedirs(outdir, exist_ok=True)
    popdir = os.path.join(outdir, "population")
    os.makedirs(popdir, exist_ok=True)

    _atomic_write(
        os.path.join(outdir, "config.json"),
        json.dumps(log.config.to_dict(), indent=2) + "\n",
    )

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GENERATIONS_HEADER)
    for rec in log.records:
        writer.writerow(
            [
                rec.gen,
                repr(rec.feat_min),
                repr(rec.feat_max),
                repr(rec.range),
                repr(rec.alpha_min),
                repr(rec.alpha_max),
            ]
        )
    _atomic_write(os.path.join(outdir, "generations.csv"), buf.getvalue())

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "n", *FEATURE_IDS, "alpha"])
    for i, member in enumerate(log.population.members):
        inst = member.inst
        if inst.id is None:
            inst = inst.with_id(f"instance_{i:03d}")
        write_instance(inst, os.path.join(popdir, f"instance_{i:03d}.json"))
        writer.writerow(
            [
                inst.id,
                inst.n,
                *[repr(member.features[f]) for f in FEATURE_IDS],
                repr(member.alpha),
            ]
        )
    _atomic_write(os.path.join(popdir, "features.csv"), buf.getvalue())


def _atomic_write(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def load_run_config(run_dir) -> EaConfig:
    path = os.path.join(run_dir, "config.json")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return EaConfig.from_dict(json.load(fh))
    except FileNotFoundError:
        raise ConfigError(f"{run_dir}: no config.json (not a run directory?)")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")


def load_population(run_dir) -> list[EvaluatedInstance]:
    """Rebuild the persisted final population of a run directory.

    Features are recomputed from the stored coordinates (they are a pure
    function of the instance); alpha comes from features.csv.
    """
    from .instances import read_instance

    popdir = os.path.join(run_dir, "population")
    path = os.path.join(popdir, "features.csv")
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        raise ConfigError(f"{run_dir}: no population/features.csv")
    members = []
    for i, row in enumerate(rows):
        inst = read_instance(os.path.join(popdir, f"instance_{i:03d}.json"))
        members.append(EvaluatedInstance(inst, compute_all(inst), float(row["alpha"])))
    return members
