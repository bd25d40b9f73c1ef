"""TSP instances on the unit square: construction, distances, tours, files.

An instance is n >= 3 cities in [0,1]^2, stored as an immutable (n, 2)
float64 array. Tours are permutations of the city indices, represented as
plain int64 numpy arrays. All randomness flows through RandomSource so that
every run is replayable from its seed.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import InstanceFormatError
from ._kernels import tour_length as _tour_length_kernel


class RandomSource:
    """Seeded random stream (PCG64) that can spawn independent children.

    Same seed => identical stream of draws. `child(*key)` derives a stream
    that depends only on (seed, key), so sub-computations (EA generations,
    2-OPT restarts) are replayable in isolation.
    """

    def __init__(self, seed: int, _spawn_key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self._spawn_key = tuple(int(k) for k in _spawn_key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self._spawn_key)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, *key: int) -> "RandomSource":
        """Independently-seeded child stream keyed by integers."""
        return RandomSource(self.seed, self._spawn_key + tuple(key))

    def random(self, shape=None):
        """Uniform floats in [0, 1)."""
        return self._gen.random() if shape is None else self._gen.random(shape)

    def uniform(self) -> float:
        return float(self._gen.random())

    def integers(self, high: int) -> int:
        """Uniform integer in [0, high)."""
        return int(self._gen.integers(high))

    def normal(self, loc: float = 0.0, scale: float = 1.0) -> float:
        return float(self._gen.normal(loc, scale))

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n).astype(np.int64)

    def choice_without_replacement(self, n: int, k: int) -> np.ndarray:
        return self._gen.choice(n, size=k, replace=False).astype(np.int64)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, key={self._spawn_key})"


@dataclass(frozen=True, eq=False)
class TspInstance:
    """n cities in the normalized plane [0,1]^2."""

    coords: np.ndarray
    id: str | None = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError(f"coords must have shape (n, 2), got {coords.shape}")
        if coords.shape[0] < 3:
            raise ValueError(f"an instance needs at least 3 cities, got {coords.shape[0]}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        if coords.min() < 0.0 or coords.max() > 1.0:
            raise ValueError("coordinates must lie in [0, 1]^2")
        coords = np.ascontiguousarray(coords)
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def with_id(self, new_id: str | None) -> "TspInstance":
        return TspInstance(self.coords, new_id)


def distance(a, b) -> float:
    """Euclidean distance between two points."""
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def distance_matrix(coords: np.ndarray) -> np.ndarray:
    """Full pairwise Euclidean distance matrix (C-contiguous float64)."""
    d = np.asarray(coords, dtype=np.float64)
    dx = d[:, 0][:, None] - d[:, 0][None, :]
    dy = d[:, 1][:, None] - d[:, 1][None, :]
    return np.ascontiguousarray(np.sqrt(dx * dx + dy * dy))


def check_tour(order, n: int) -> np.ndarray:
    """Validate that `order` is a permutation of 0..n-1; return it as int64."""
    t = np.asarray(order, dtype=np.int64)
    if t.shape != (n,) or not np.array_equal(np.sort(t), np.arange(n)):
        raise ValueError(f"tour is not a permutation of 0..{n - 1}")
    return t


def tour_length(inst: TspInstance, order) -> float:
    """Length of the closed tour visiting cities in the given order."""
    t = check_tour(order, inst.n)
    return _tour_length_kernel(distance_matrix(inst.coords), t)


def random_instance(n: int, rng: RandomSource, id: str | None = None) -> TspInstance:
    """Instance with n points i.i.d. uniform on [0,1]^2."""
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    return TspInstance(rng.random((n, 2)), id)


def random_tour(n: int, rng: RandomSource) -> np.ndarray:
    return rng.permutation(n)


# ---------------------------------------------------------------------------
# Native JSON format: {"n": int, "cities": [[x, y], ...], "id": str?}
# ---------------------------------------------------------------------------

def write_instance(inst: TspInstance, path) -> None:
    """Write the native JSON format at full float precision (round-trip exact)."""
    payload = {"n": inst.n, "cities": [[x, y] for x, y in inst.coords.tolist()]}
    if inst.id is not None:
        payload["id"] = inst.id
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    os.replace(tmp, path)


def _parse_native(text: str, path) -> TspInstance:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise InstanceFormatError(f"{path}: expected a JSON object")
    if "cities" not in payload:
        raise InstanceFormatError(f"{path}: missing required field 'cities'")
    cities = payload["cities"]
    if not isinstance(cities, list) or any(
        not isinstance(c, list) or len(c) != 2 for c in cities
    ):
        raise InstanceFormatError(f"{path}: field 'cities' must be a list of [x, y] pairs")
    if "n" in payload and payload["n"] != len(cities):
        raise InstanceFormatError(
            f"{path}: field 'n' is {payload['n']} but 'cities' has {len(cities)} entries"
        )
    inst_id = payload.get("id")
    if inst_id is not None and not isinstance(inst_id, str):
        raise InstanceFormatError(f"{path}: field 'id' must be a string")
    try:
        return TspInstance(np.array(cities, dtype=np.float64), inst_id)
    except ValueError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# TSPLIB EUC_2D import (read-only). Coordinates are rescaled affinely into
# [0,1]^2 with a single scale factor so the aspect ratio is preserved.
# ---------------------------------------------------------------------------

def _parse_tsplib(text: str, path) -> TspInstance:
    name = None
    dimension = None
    coords: list[tuple[float, float]] = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line or line == "EOF":
            continue
        if ":" in line:
            key, _, value = line.partition(":")
            key = key.strip().upper()
            value = value.strip()
            if key == "NAME":
                name = value
            elif key == "DIMENSION":
                try:
                    dimension = int(value)
                except ValueError:
                    raise InstanceFormatError(f"{path}:{i}: DIMENSION must be an integer")
            elif key == "EDGE_WEIGHT_TYPE" and value != "EUC_2D":
                raise InstanceFormatError(
                    f"{path}:{i}: only EDGE_WEIGHT_TYPE EUC_2D is supported, got {value}"
                )
            continue
        if line.upper().startswith("NODE_COORD_SECTION"):
            while i < len(lines):
                row = lines[i].strip()
                i += 1
                if not row or row == "EOF":
                    break
                parts = row.split()
                if len(parts) != 3:
                    raise InstanceFormatError(
                        f"{path}:{i}: node line must be 'index x y', got {row!r}"
                    )
                try:
                    coords.append((float(parts[1]), float(parts[2])))
                except ValueError:
                    raise InstanceFormatError(f"{path}:{i}: non-numeric coordinate in {row!r}")
            continue
        raise InstanceFormatError(f"{path}:{i}: unrecognized TSPLIB line {line!r}")
    if not coords:
        raise InstanceFormatError(f"{path}: no NODE_COORD_SECTION found")
    if dimension is not None and dimension != len(coords):
        raise InstanceFormatError(
            f"{path}: DIMENSION is {dimension} but {len(coords)} nodes were read"
        )
    arr = np.array(coords, dtype=np.float64)
    mins = arr.min(axis=0)
    span = float((arr.max(axis=0) - mins).max())
    scale = 1.0 / span if span > 0.0 else 1.0
    arr = (arr - mins) * scale
    np.clip(arr, 0.0, 1.0, out=arr)  # guard the last-ulp of the rescale
    try:
        return TspInstance(arr, name)
    except ValueError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc


def read_instance(path) -> TspInstance:
    """Read a native JSON instance or import a TSPLIB EUC_2D file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_native(text, path)
    return _parse_tsplib(text, path)
