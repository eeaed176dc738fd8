"""Piecewise-constant functions on boxes in R^1/R^2 and norms indexed by cubes.

Balls are replaced by grid-aligned cubes (intervals in 1-d, squares of cells
in 2-d).  A cube covers whole cells, so its mass and every restriction are
exact, and each supremum over "all balls" becomes a maximum over a finite
:class:`CubeFamily`.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .rearrangement import INFINITY, InvalidIndices, LorentzIndices, StepProfile, normalize

DEFAULT_CUBE_CAP = 200_000


class GridError(ValueError):
    """Raised for malformed grids, out-of-range cubes or empty families."""


@dataclass(frozen=True)
class GridFunction:
    dim: int
    box: tuple[tuple[float, float], ...]
    cells: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"only 1-d and 2-d grids are supported, got dim={self.dim}")
        cells = np.array(self.cells, dtype=float)
        if cells.ndim != self.dim:
            raise GridError(f"cells must be a {self.dim}-d array")
        if any(n < 1 for n in cells.shape):
            raise GridError("resolution must be at least 1 per axis")
        bad = np.argwhere(~np.isfinite(cells))
        if bad.size:
            raise GridError(f"non-finite cell at index {tuple(int(i) for i in bad[0])}")
        box = tuple((float(a), float(b)) for a, b in self.box)
        if len(box) != self.dim or any(not b > a for a, b in box):
            raise GridError("box needs one increasing [a, b] pair per axis")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "box", box)

    @property
    def resolution(self) -> tuple[int, ...]:
        return self.cells.shape

    @property
    def cell_volume(self) -> float:
        return math.prod((b - a) / n for (a, b), n in zip(self.box, self.resolution))

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in self.box)

    def with_cells(self, cells: np.ndarray) -> "GridFunction":
        return GridFunction(self.dim, self.box, cells)

    def cutoff(self, cube: "Cube") -> "GridFunction":
        """``f * 1_B``: cells outside the cube set to zero."""
        cube.check_inside(self)
        out = np.zeros_like(self.cells)
        sl = cube.slices()
        out[sl] = self.cells[sl]
        return self.with_cells(out)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.cells)))

    def to_json(self) -> dict:
        return {
            "type": "grid",
            "dim": self.dim,
            "box": [list(ab) for ab in self.box],
            "resolution": list(self.resolution),
            "cells": [float(x) for x in self.cells.ravel()],
        }


def ingest_grid(spec) -> GridFunction:
    """Build a grid from the JSON document (dict or text) describing it."""
    if isinstance(spec, (str, bytes)):
        try:
            spec = json.loads(spec, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise GridError(f"invalid JSON: {exc}") from exc
    if not isinstance(spec, dict) or spec.get("type") != "grid":
        raise GridError('expected an object with "type": "grid"')
    try:
        dim = int(spec["dim"])
        box = spec["box"]
        res = [int(n) for n in spec["resolution"]]
        cells = spec["cells"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GridError(f"missing or malformed field: {exc}") from exc
    if dim not in (1, 2) or len(res) != dim or len(box) != dim:
        raise GridError("dim, box and resolution disagree")
    if any(n < 1 for n in res):
        raise GridError("resolution must be at least 1 per axis")
    if not isinstance(cells, list) or len(cells) != math.prod(res):
        got = len(cells) if isinstance(cells, list) else "non-list"
        raise GridError(f"expected {math.prod(res)} cells, got {got}")
    vals = np.empty(len(cells))
    for i, c in enumerate(cells):
        if c is None or isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
            raise GridError(f"cell {i} is not a finite number: {c!r}")
        vals[i] = c
    return GridFunction(dim, tuple(tuple(ab) for ab in box), vals.reshape(res))


def _reject_constant(name: str):
    raise GridError(f"non-finite number {name!r} in grid file")


@dataclass(frozen=True)
class Cube:
    start: tuple[int, ...]
    extent: tuple[int, ...]

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(s, s + e) for s, e in zip(self.start, self.extent))

    def check_inside(self, f: GridFunction) -> None:
        if len(self.start) != f.dim or len(self.extent) != f.dim:
            raise GridError("cube dimension does not match the grid")
        for s, e, n in zip(self.start, self.extent, f.resolution):
            if e < 1 or s < 0 or s + e > n:
                raise GridError(f"cube {self} lies outside the {f.resolution} grid")

    def mass(self, f: GridFunction) -> float:
        return math.prod(self.extent) * f.cell_volume

    def cells(self, f: GridFunction) -> np.ndarray:
        self.check_inside(f)
        return f.cells[self.slices()].ravel()


class Completeness(enum.Enum):
    ALL_CUBES = "ALL_CUBES"
    SAMPLED = "SAMPLED"


@dataclass(frozen=True)
class CubeFamily:
    """Finite family of cubes, stored as parallel ``starts``/``extents`` arrays."""

    starts: np.ndarray
    extents: np.ndarray
    completeness: Completeness
    resolution: tuple[int, ...]

    def __len__(self) -> int:
        return self.starts.shape[0]

    def __iter__(self) -> Iterator[Cube]:
        for s, e in zip(self.starts, self.extents):
            yield Cube(tuple(int(x) for x in s), tuple(int(x) for x in e))

    @classmethod
    def from_cubes(cls, cubes: Sequence[Cube], resolution, completeness=Completeness.SAMPLED) -> "CubeFamily":
        seen = []
        keys = set()
        for c in cubes:
            key = (c.start, c.extent)
            if key not in keys:
                keys.add(key)
                seen.append(c)
        if not seen:
            raise GridError("cube family is empty")
        starts = np.array([c.start for c in seen], dtype=np.int64)
        extents = np.array([c.extent for c in seen], dtype=np.int64)
        return cls(starts, extents, completeness, tuple(resolution))

    def groups(self) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
        """Yield ``(extent, starts)`` with cubes sharing an extent batched together."""
        ext = [tuple(int(x) for x in e) for e in self.extents]
        order: dict[tuple[int, ...], list[int]] = {}
        for i, e in enumerate(ext):
            order.setdefault(e, []).append(i)
        for e, rows in order.items():
            yield e, np.asarray(rows)

    def subset(self, rows) -> "CubeFamily":
        rows = np.asarray(rows)
        return CubeFamily(self.starts[rows], self.extents[rows], Completeness.SAMPLED, self.resolution)


def _square_sides(res: tuple[int, ...]) -> range:
    return range(1, min(res) + 1)


def all_cubes(f: GridFunction | tuple[int, ...], cap: int = DEFAULT_CUBE_CAP) -> CubeFamily:
    """Every interval (1-d) or every square of cells (2-d); stratified sample past ``cap``."""
    res = f.resolution if isinstance(f, GridFunction) else tuple(f)
    if len(res) == 1:
        n = res[0]
        total = n * (n + 1) // 2
        if total <= cap:
            starts, extents = [], []
            for e in range(1, n + 1):
                s = np.arange(0, n - e + 1)
                starts.append(s)
                extents.append(np.full(s.size, e))
            st = np.concatenate(starts)[:, None]
            ex = np.concatenate(extents)[:, None]
            return CubeFamily(st, ex, Completeness.ALL_CUBES, res)
        return _stratified_1d(n, cap)
    n1, n2 = res
    total = sum((n1 - e + 1) * (n2 - e + 1) for e in _square_sides(res))
    if total <= cap:
        starts, extents = [], []
        for e in _square_sides(res):
            i, j = np.meshgrid(np.arange(n1 - e + 1), np.arange(n2 - e + 1), indexing="ij")
            starts.append(np.stack((i.ravel(), j.ravel()), axis=1))
            extents.append(np.full((i.size, 2), e))
        return CubeFamily(np.concatenate(starts), np.concatenate(extents), Completeness.ALL_CUBES, res)
    return _stratified_2d(res, cap)


def _stratum_lengths(n: int) -> np.ndarray:
    small = np.arange(1, min(n, 32) + 1)
    big = np.round(np.geomspace(32, n, 96)).astype(int) if n > 32 else np.zeros(0, int)
    return np.unique(np.concatenate((small, big)))


def _strided(count: int, want: int) -> np.ndarray:
    if count <= want:
        return np.arange(count)
    # both ends are kept so cubes touching the boundary stay in the family
    return np.unique(np.round(np.linspace(0, count - 1, want)).astype(int))


def _starts_per_axis(count: np.ndarray, lengths: np.ndarray, density: float) -> np.ndarray:
    # roughly ``density`` starts per cube length, i.e. a start stride of about L/density
    return np.minimum(count, np.maximum(2, np.ceil(density * count / lengths))).astype(int)


def _fit_density(counts, lengths, dim: int, cap: int) -> np.ndarray:
    density = 16.0
    for _ in range(60):
        want = _starts_per_axis(counts, lengths, density)
        if int(np.sum(want.astype(np.int64) ** dim)) <= cap:
            return want
        density *= 0.8
    return _starts_per_axis(counts, lengths, density)


def _stratified_1d(n: int, cap: int) -> CubeFamily:
    lengths = _stratum_lengths(n)
    want = _fit_density(n - lengths + 1, lengths, 1, cap)
    starts, extents = [], []
    for e, k in zip(lengths, want):
        s = _strided(n - e + 1, k)
        starts.append(s)
        extents.append(np.full(s.size, e))
    return CubeFamily(np.concatenate(starts)[:, None], np.concatenate(extents)[:, None], Completeness.SAMPLED, (n,))


def _stratified_2d(res: tuple[int, int], cap: int) -> CubeFamily:
    n1, n2 = res
    sides = _stratum_lengths(min(res))
    # the same per-axis density on both axes, sized by the longer one
    want = _fit_density(max(res) - sides + 1, sides, 2, cap)
    starts, extents = [], []
    for e, k in zip(sides, want):
        i, j = np.meshgrid(_strided(n1 - e + 1, k), _strided(n2 - e + 1, k), indexing="ij")
        starts.append(np.stack((i.ravel(), j.ravel()), axis=1))
        extents.append(np.full((i.size, 2), e))
    return CubeFamily(np.concatenate(starts), np.concatenate(extents), Completeness.SAMPLED, res)


def windows(f: GridFunction, extent: tuple[int, ...], starts: np.ndarray, values: np.ndarray | None = None) -> np.ndarray:
    """Cell values of each cube with the given extent, one row per start."""
    x = f.cells if values is None else values
    if f.dim == 1:
        view = np.lib.stride_tricks.sliding_window_view(x, extent[0])
        return view[starts[:, 0]]
    view = np.lib.stride_tricks.sliding_window_view(x, extent)
    return view[starts[:, 0], starts[:, 1]].reshape(starts.shape[0], -1)


def _check_family(f: GridFunction, fam: CubeFamily) -> None:
    if len(fam) == 0:
        raise GridError("cube family is empty")
    if tuple(fam.resolution) != tuple(f.resolution):
        raise GridError(f"family built for {fam.resolution} used on a {f.resolution} grid")


def sorted_windows(f: GridFunction, fam: CubeFamily) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield ``(rows, values, breakpoints)``: decreasing |f| per cube, uniform cell masses."""
    _check_family(f, fam)
    a = np.abs(f.cells)
    h = f.cell_volume
    for extent, rows in fam.groups():
        w = windows(f, extent, fam.starts[rows], a)
        v = -np.sort(-w, axis=1)
        t = h * np.arange(v.shape[1] + 1, dtype=float)
        yield rows, v, t


def restrict_profile(f: GridFunction, cube: Cube) -> StepProfile:
    vals = np.abs(cube.cells(f))
    return normalize(StepProfile(vals, np.full(vals.size, f.cell_volume)))


def global_profile(f: GridFunction) -> StepProfile:
    vals = np.abs(f.cells).ravel()
    vals = vals[vals > 0]
    return normalize(StepProfile(vals, np.full(vals.size, f.cell_volume)))


def ball_average(f: GridFunction, cube: Cube) -> float:
    return float(np.mean(cube.cells(f)))


def mean_oscillation(f: GridFunction, cube: Cube) -> float:
    x = cube.cells(f)
    return float(np.mean(np.abs(x - x.mean())))


def bmo_contributions(f: GridFunction, fam: CubeFamily) -> np.ndarray:
    _check_family(f, fam)
    out = np.empty(len(fam))
    for extent, rows in fam.groups():
        out[rows] = kernels.bmo_rows(windows(f, extent, fam.starts[rows]))
    return out


def bmo_norm(f: GridFunction, fam: CubeFamily) -> float:
    return float(np.max(bmo_contributions(f, fam)))


def local_lorentz_norm(f: GridFunction, cube: Cube, idx: LorentzIndices) -> float:
    from .rearrangement import lorentz_norm, rearrange

    return lorentz_norm(rearrange(restrict_profile(f, cube)), idx)


@dataclass(frozen=True)
class MorreyIndices:
    p: float
    kappa: float
    r: float | None = None

    def __post_init__(self):
        p = float(self.p)
        k = float(self.kappa)
        if not 1 <= p < INFINITY:
            raise InvalidIndices(f"p must lie in [1, inf), got {p}")
        if not 0 < k < 1:
            raise InvalidIndices(
                f"kappa must lie strictly inside (0, 1), got {k}; kappa = 0 or 1 are the plain L^p / L^inf norms"
            )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "kappa", k)
        if self.r is not None:
            r = LorentzIndices(p, self.r).r
            object.__setattr__(self, "r", r)

    @property
    def lorentz(self) -> LorentzIndices:
        return LorentzIndices(self.p, self.p if self.r is None else self.r)


class Flavor(enum.Enum):
    MORREY = "morrey"
    WEAK_MORREY = "weak_morrey"
    LORENTZ_MORREY = "lm"
    LORENTZ_MORREY_STAR = "lm_star"


def _resolve_r(idx: MorreyIndices, flavor: Flavor) -> float:
    if flavor is Flavor.MORREY:
        if idx.r is not None and idx.r != idx.p:
            raise InvalidIndices("the Morrey flavor fixes r = p")
        return idx.p
    if flavor is Flavor.WEAK_MORREY:
        if idx.r is not None and not math.isinf(idx.r):
            raise InvalidIndices("the weak Morrey flavor fixes r = inf")
        return INFINITY
    if idx.r is None:
        raise InvalidIndices(f"{flavor.value} needs an explicit r")
    if flavor is Flavor.LORENTZ_MORREY_STAR and idx.p <= 1:
        raise InvalidIndices("the starred Lorentz-Morrey functional needs p > 1")
    return idx.r


def local_norm_rows(v: np.ndarray, t: np.ndarray, p: float, r: float, star: bool = False) -> np.ndarray:
    if star:
        return kernels.star_lorentz_rows(v, t, p, r)
    if r == p:
        return kernels.lp_rows(v, t, p)
    return kernels.lorentz_rows(v, t, p, r)


class SortedFamily:
    """Decreasing |f| on every cube of a family, sorted once and reused."""

    def __init__(self, f: GridFunction, fam: CubeFamily):
        self.f = f
        self.fam = fam
        self.blocks = list(sorted_windows(f, fam))

    def _collect(self, fn) -> np.ndarray:
        out = np.empty(len(self.fam))
        h = self.f.cell_volume
        for rows, v, t in self.blocks:
            out[rows] = fn(v, t, v.shape[1] * h)
        return out

    def contributions(self, idx: MorreyIndices, flavor: Flavor) -> np.ndarray:
        """``m(B)^{-kappa/p}`` times the local norm, for every cube of the family."""
        r = _resolve_r(idx, flavor)
        star = flavor is Flavor.LORENTZ_MORREY_STAR
        scale = -idx.kappa / idx.p
        return self._collect(lambda v, t, m: m**scale * local_norm_rows(v, t, idx.p, r, star))

    def norm(self, idx: MorreyIndices, flavor: Flavor) -> float:
        return float(np.max(self.contributions(idx, flavor)))

    def layer_cake_contributions(self, idx: MorreyIndices) -> np.ndarray:
        """Per-cube Lorentz-Morrey terms computed from the distribution functions."""
        r = idx.lorentz.r
        scale = -idx.kappa / idx.p
        return self._collect(lambda v, t, m: m**scale * kernels.lorentz_rows_layer(v, t, idx.p, r))

    def local(self, fn) -> np.ndarray:
        """Apply ``fn(v, t, mass)`` to every cube (rows of decreasing values)."""
        return self._collect(fn)


def family_contributions(f: GridFunction, fam: CubeFamily, idx: MorreyIndices, flavor: Flavor) -> np.ndarray:
    return SortedFamily(f, fam).contributions(idx, flavor)


def family_norm(f: GridFunction, fam: CubeFamily, idx: MorreyIndices, flavor: Flavor) -> float:
    return float(np.max(family_contributions(f, fam, idx, flavor)))


def family_norm_layer_cake(f: GridFunction, fam: CubeFamily, idx: MorreyIndices) -> float:
    return float(np.max(SortedFamily(f, fam).layer_cake_contributions(idx)))


def contributions_csv(f: GridFunction, fam: CubeFamily, values: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cube_id", "start", "extent", "mass", "value"])
    h = f.cell_volume
    for i, (s, e) in enumerate(zip(fam.starts, fam.extents)):
        w.writerow([i, " ".join(str(int(x)) for x in s), " ".join(str(int(x)) for x in e),
                    f"{math.prod(int(x) for x in e) * h:.11e}", f"{values[i]:.11e}"])
    return buf.getvalue()


def from_function(fn, n, box=None, dim: int = 1) -> GridFunction:
    """Sample ``fn`` at cell centres of a uniform grid (``n`` cells per axis)."""
    if box is None:
        box = ((-1.0, 1.0),) * dim
    axes = [a + (np.arange(n) + 0.5) * (b - a) / n for a, b in box]
    if dim == 1:
        cells = fn(axes[0])
    else:
        x, y = np.meshgrid(*axes, indexing="ij")
        cells = fn(x, y)
    return GridFunction(dim, box, np.asarray(cells, dtype=float))
