"""Population diversity: per-feature contributions, weighted sums, pruning.

The contribution of a member to population diversity on one feature is the
product of the gaps to the next smaller and next larger feature values.
Members holding a unique minimum or maximum get R^2 where R bounds the
feature on the unit square, so extremes are never pruned. Members sharing
a feature value with anyone else contribute 0 on that feature.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import FEATURE_IDS, FeatureVector, feature_bounds
from .instances import RandomSource, TspInstance


@dataclass(frozen=True)
class EvaluatedInstance:
    """An instance with its feature vector and 2-OPT approximation ratio."""

    inst: TspInstance
    features: FeatureVector
    alpha: float


@dataclass(frozen=True)
class Population:
    members: tuple[EvaluatedInstance, ...]
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if self.capacity < 1:
            raise ValueError(f"population capacity must be >= 1, got {self.capacity}")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def feature_values(self, feature_id: str) -> np.ndarray:
        return np.array([m.features[feature_id] for m in self.members])

    def alphas(self) -> np.ndarray:
        return np.array([m.alpha for m in self.members])


@dataclass(frozen=True)
class WeightSpec:
    """Features entering the diversity measure and their nonnegative weights."""

    features: tuple[str, ...]
    weights: tuple[float, ...] = field(default=())

    def __post_init__(self):
        feats = tuple(self.features)
        weights = tuple(float(w) for w in self.weights) or (1.0,) * len(feats)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "weights", weights)
        if not feats:
            raise ValueError("WeightSpec needs at least one feature")
        if len(weights) != len(feats):
            raise ValueError(
                f"{len(feats)} features but {len(weights)} weights"
            )
        for f in feats:
            if f not in FEATURE_IDS:
                raise ValueError(f"unknown feature id {f!r}")
        if len(set(feats)) != len(feats):
            raise ValueError(f"duplicate feature in {feats}")
        if any(w < 0 for w in weights):
            raise ValueError(f"negative weight in {weights}")
        if not any(w > 0 for w in weights):
            raise ValueError("at least one weight must be positive")

    @classmethod
    def single(cls, feature_id: str) -> "WeightSpec":
        return cls((feature_id,), (1.0,))

    def to_dict(self) -> dict:
        return {"features": list(self.features), "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSpec":
        return cls(tuple(d["features"]), tuple(d.get("weights", ())))


def value_contributions(values, bound: float) -> np.ndarray:
    """Diversity contribution of each value within the multiset `values`.

    Unique extremes score bound^2; values shared with any other member
    score 0; interior unique values score the product of the gaps to the
    nearest smaller and nearest larger value.
    """
    vals = np.asarray(values, dtype=np.float64)
    m = vals.shape[0]
    if m == 0:
        return np.zeros(0)
    contrib = np.zeros(m)
    order = np.argsort(vals, kind="stable")
    s = vals[order]
    r2 = bound * bound
    for pos in range(m):
        v = s[pos]
        if (pos > 0 and s[pos - 1] == v) or (pos < m - 1 and s[pos + 1] == v):
            continue
        if pos == 0 or pos == m - 1:
            contrib[order[pos]] = r2
        else:
            contrib[order[pos]] = (v - s[pos - 1]) * (s[pos + 1] - v)
    return contrib


def single_feature_contributions(
    pop: Population, feature_id: str, bound: float
) -> np.ndarray:
    """Per-member diversity contributions on one feature, in member order."""
    if len(pop) < 1:
        raise ValueError("contributions need at least one member")
    return value_contributions(pop.feature_values(feature_id), bound)


def weighted_contributions(
    pop: Population, spec: WeightSpec, bounds: dict[str, float]
) -> np.ndarray:
    """Weighted sum of per-feature contributions, each normalized by the
    current population maximum for that feature. A feature whose maximum
    contribution is 0 drops out of the sum (everyone ties at 0 on it)."""
    total = np.zeros(len(pop))
    for fid, w in zip(spec.features, spec.weights):
        c = single_feature_contributions(pop, fid, bounds[fid])
        cmax = c.max()
        if cmax > 0.0:
            total += w * (c / cmax)
    return total


def _as_spec(measure) -> WeightSpec:
    if isinstance(measure, WeightSpec):
        return measure
    return WeightSpec.single(measure)


def contributions(
    pop: Population, measure, bounds: dict[str, float] | None = None
) -> np.ndarray:
    """Contributions under either a bare feature id or a WeightSpec."""
    spec = _as_spec(measure)
    if bounds is None:
        bounds = feature_bounds(pop.members[0].inst.n)
    if len(spec.features) == 1:
        return spec.weights[0] * single_feature_contributions(
            pop, spec.features[0], bounds[spec.features[0]]
        )
    return weighted_contributions(pop, spec, bounds)


def prune(
    pop: Population,
    mu: int,
    measure,
    rng: RandomSource,
    bounds: dict[str, float] | None = None,
) -> Population:
    """Shrink the population to mu members by repeatedly removing one member
    of minimum diversity contribution, recomputing contributions after every
    removal. Ties at the minimum are broken uniformly at random.
    """
    if mu < 2:
        raise ValueError(f"prune target must be >= 2, got {mu}")
    if len(pop) < mu:
        raise ValueError(f"cannot prune {len(pop)} members up to {mu}")
    spec = _as_spec(measure)
    if bounds is None:
        bounds = feature_bounds(pop.members[0].inst.n)
    members = list(pop.members)
    while len(members) > mu:
        current = Population(tuple(members), pop.capacity)
        c = contributions(current, spec, bounds)
        ties = np.flatnonzero(c == c.min())
        if ties.shape[0] == 1:
            drop = int(ties[0])
        else:
            drop = int(ties[int(rng.integers(ties.shape[0]))])
        del members[drop]
    return Population(tuple(members), pop.capacity)
