"""Seeded test corpora and the canonical function families."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .grid import GridFunction
from .rearrangement import StepProfile

Item = Union[StepProfile, GridFunction]


class CorpusError(ValueError):
    pass


class Family(enum.Enum):
    POWER = "power"
    TRUNC_LOG = "trunc_log"
    INDICATOR = "indicator"
    TWO_STEP = "two_step"


@dataclass(frozen=True)
class Entry:
    name: str
    item: Item

    @property
    def is_grid(self) -> bool:
        return isinstance(self.item, GridFunction)


@dataclass(frozen=True)
class CorpusConfig:
    profiles: int = 0
    grids: int = 0
    grid_dims: tuple[int, ...] = (1,)
    atoms: tuple[int, int] = (2, 20)
    values: tuple[float, float] = (1e-3, 1e3)
    masses: tuple[float, float] = (1e-3, 1e3)
    resolution: tuple[int, int] = (8, 64)
    resolution_2d: tuple[int, int] = (8, 16)
    padded: bool = True
    canonical: bool = True

    def validate(self) -> None:
        if self.profiles < 0 or self.grids < 0:
            raise CorpusError("entry counts must be non-negative")
        for name in ("atoms", "values", "masses", "resolution", "resolution_2d"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi) or not math.isfinite(hi):
                raise CorpusError(f"degenerate range for {name}: {(lo, hi)}")
        if self.atoms[0] < 1:
            raise CorpusError("profiles need at least one atom")
        if self.grids and not self.grid_dims:
            raise CorpusError("grid_dims is empty")
        if any(d not in (1, 2) for d in self.grid_dims):
            raise CorpusError("grid dimensions must be 1 or 2")


@dataclass(frozen=True)
class Corpus:
    seed: int
    config: CorpusConfig
    entries: tuple[Entry, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)

    def profiles(self) -> list[Entry]:
        return [e for e in self.entries if not e.is_grid]

    def grids(self) -> list[Entry]:
        return [e for e in self.entries if e.is_grid]


def _log_uniform(rng: np.random.Generator, lo: float, hi: float, size) -> np.ndarray:
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def random_profile(rng: np.random.Generator, cfg: CorpusConfig) -> StepProfile:
    k = int(rng.integers(cfg.atoms[0], cfg.atoms[1] + 1))
    return StepProfile(_log_uniform(rng, *cfg.values, k), _log_uniform(rng, *cfg.masses, k))


def random_grid(rng: np.random.Generator, cfg: CorpusConfig, dim: int, heavy: bool) -> GridFunction:
    lo, hi = cfg.resolution if dim == 1 else cfg.resolution_2d
    n = int(rng.integers(lo, hi + 1))
    shape = (n,) * dim
    vals = rng.standard_t(1.5, shape) if heavy else rng.standard_normal(shape)
    vals = vals + rng.standard_normal() * 2.0
    if cfg.padded:
        # zero border: the function lives inside the box and vanishes outside it
        pad = max(1, n // 4)
        vals = np.pad(vals, pad)
        shape = vals.shape
    box = ((0.0, float(shape[0]) / n),) * dim
    return GridFunction(dim, box, vals)


def generate_corpus(cfg: CorpusConfig, seed: int) -> Corpus:
    """Canonical entries (if enabled and anything is requested) plus seeded random ones."""
    cfg.validate()
    rng = np.random.default_rng(seed)
    entries: list[Entry] = []
    if cfg.canonical and cfg.profiles:
        entries += canonical_profiles()
    for i in range(cfg.profiles):
        entries.append(Entry(f"profile{i}", random_profile(rng, cfg)))
    if cfg.canonical and cfg.grids:
        entries += canonical_grids(cfg.grid_dims)
    for i in range(cfg.grids):
        dim = cfg.grid_dims[i % len(cfg.grid_dims)]
        heavy = bool(i % 2)
        entries.append(Entry(f"grid{i}_d{dim}{'_heavy' if heavy else ''}", random_grid(rng, cfg, dim, heavy)))
    return Corpus(seed, cfg, tuple(entries))


def canonical_profiles() -> list[Entry]:
    return [
        Entry("indicator", canonical_family(Family.INDICATOR)),
        Entry("two_step", canonical_family(Family.TWO_STEP)),
        Entry("trunc_log_profile", canonical_family(Family.TRUNC_LOG, form="profile", M=200.0)),
    ]


def canonical_grids(dims=(1,)) -> list[Entry]:
    out = []
    for d in dims:
        n = 64 if d == 1 else 16
        out += [
            Entry(f"indicator_d{d}", canonical_family(Family.INDICATOR, form="grid", dim=d, N=n)),
            Entry(f"two_step_d{d}", canonical_family(Family.TWO_STEP, form="grid", dim=d, N=n)),
            Entry(f"trunc_log_d{d}", canonical_family(Family.TRUNC_LOG, form="grid", dim=d, N=n, M=8.0)),
        ]
    return out


def _centres(n: int, dim: int) -> tuple[np.ndarray, ...]:
    x = -1.0 + (np.arange(n) + 0.5) * 2.0 / n
    if dim == 1:
        return (x,)
    return tuple(np.meshgrid(x, x, indexing="ij"))


def _radius(n: int, dim: int) -> np.ndarray:
    c = _centres(n, dim)
    return np.sqrt(sum(a * a for a in c))


def canonical_family(name: Family | str, form: str | None = None, **params) -> Item:
    """Build a named family member.

    POWER: grid of ``|x|^{-n/p}`` on ``[-1,1]^n``, each cell holding the infimum
    over the cell (params ``p``, ``dim``, ``N``).
    TRUNC_LOG: ``min(M, log(1/|x|))`` on ``[-1,1]^n`` as a grid, or its exact
    decreasing rearrangement on geometric pieces (``form="profile"``, 1-d only).
    INDICATOR: ``c`` on mass ``m``; the grid form is ``c`` on the middle half of
    ``[-1,1]^n``.  TWO_STEP: atoms ``(a, m1), (b, m2)``; grid form puts them on
    adjacent quarters of ``[-1,1]``.
    """
    fam = Family(name) if not isinstance(name, Family) else name
    if fam is Family.POWER:
        p = float(params.get("p", 2.0))
        dim = int(params.get("dim", 1))
        n = int(params.get("N", 4096))
        _check_grid_params(dim, n)
        if not p >= 1:
            raise CorpusError("POWER needs p >= 1")
        if n % 2:
            raise CorpusError("POWER needs an even N so no cell centre sits on the singularity")
        # each cell takes the infimum of F over the cell (its farthest corner), so the grid
        # function is a minorant of F with the same level-set masses at cell scale
        far = np.sqrt(sum((np.abs(a) + 1.0 / n) ** 2 for a in _centres(n, dim)))
        return GridFunction(dim, ((-1.0, 1.0),) * dim, far ** (-dim / p))
    if fam is Family.TRUNC_LOG:
        m = float(params.get("M", 12.0))
        if not m > 0 or not math.isfinite(m):
            raise CorpusError("TRUNC_LOG needs a finite cap M > 0")
        if (form or "grid") == "profile":
            return _trunc_log_profile(m, int(params.get("per_unit", 8)))
        dim = int(params.get("dim", 1))
        n = int(params.get("N", 8192))
        _check_grid_params(dim, n)
        with np.errstate(divide="ignore"):
            vals = np.minimum(m, -np.log(_radius(n, dim)))
        return GridFunction(dim, ((-1.0, 1.0),) * dim, vals)
    if fam is Family.INDICATOR:
        c = float(params.get("c", 1.0))
        if form == "grid":
            dim = int(params.get("dim", 1))
            n = int(params.get("N", 64))
            _check_grid_params(dim, n)
            inside = np.ones((n,) * dim, dtype=bool)
            for axis in _centres(n, dim):
                inside &= np.abs(axis) < 0.5
            return GridFunction(dim, ((-1.0, 1.0),) * dim, np.where(inside, c, 0.0))
        m = float(params.get("m", 1.0))
        if not (c > 0 and m > 0):
            raise CorpusError("INDICATOR needs c > 0 and m > 0")
        return StepProfile.from_atoms([(c, m)])
    a = float(params.get("a", 2.0))
    b = float(params.get("b", 1.0))
    if form == "grid":
        n = int(params.get("N", 64))
        dim = int(params.get("dim", 1))
        _check_grid_params(dim, n)
        x = _centres(n, dim)[0]
        vals = np.where((x >= -0.5) & (x < 0), a, np.where((x >= 0) & (x < 0.5), b, 0.0))
        return GridFunction(dim, ((-1.0, 1.0),) * dim, vals)
    m1 = float(params.get("m1", 1.0))
    m2 = float(params.get("m2", 1.0))
    if not (a > b > 0 and m1 > 0 and m2 > 0):
        raise CorpusError("TWO_STEP needs a > b > 0 and positive masses")
    return StepProfile.from_atoms([(a, m1), (b, m2)])


def _check_grid_params(dim: int, n: int) -> None:
    if dim not in (1, 2):
        raise CorpusError("dim must be 1 or 2")
    if n < 2:
        raise CorpusError("N must be at least 2")


def _trunc_log_profile(m: float, per_unit: int) -> StepProfile:
    """``f*(t) = min(M, log(2/t))`` on ``(0, 2)``: the rearrangement of
    ``min(M, log(1/|x|))`` on ``[-1, 1]``, with each geometric piece carrying
    its exact average so every ``L^1`` mass is preserved."""
    t0 = 2.0 * math.exp(-m)
    k = max(1, int(math.ceil(m * per_unit)))
    edges = t0 * np.exp(np.linspace(0.0, m, k + 1))
    edges[-1] = 2.0
    a, b = edges[:-1], edges[1:]
    # average of log(2/t) over (a, b)
    avg = math.log(2.0) + 1.0 - (b * np.log(b) - a * np.log(a)) / (b - a)
    values = np.concatenate(([m], avg))
    masses = np.concatenate(([t0], b - a))
    return StepProfile(values, masses)


def grid_tuples(seed: int, count: int, k: int = 2, cfg: CorpusConfig | None = None,
                canonical: bool = True) -> list[tuple[str, tuple[GridFunction, ...]]]:
    """``count`` random k-tuples of same-resolution 1-d grids, for product estimates."""
    if k < 2:
        raise CorpusError("products need at least two factors")
    cfg = cfg or CorpusConfig()
    cfg.validate()
    rng = np.random.default_rng(seed)
    out = []
    if canonical and count:
        base = [e.item for e in canonical_grids((1,))]
        out.append(("canonical", tuple(base[i % len(base)] for i in range(k))))
    for i in range(count):
        n = int(rng.integers(cfg.resolution[0], cfg.resolution[1] + 1))
        fixed = CorpusConfig(resolution=(n, n), padded=cfg.padded)
        members = tuple(random_grid(rng, fixed, 1, heavy=bool((i + j) % 2)) for j in range(k))
        out.append((f"tuple{i}", members))
    return out
