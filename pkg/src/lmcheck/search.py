"""Extremal search for the sharpness of explicit constants, and the growth-order
experiment on the truncated logarithm."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .checks import Q_GRID, embedding_constant, fit_slope
from .corpus import Family, canonical_family
from .grid import Flavor, GridError, GridFunction, MorreyIndices, SortedFamily, all_cubes, bmo_norm, global_profile
from .rearrangement import INFINITY, InvalidIndices, LorentzIndices, StepProfile, lorentz_norm, lp_norm, rearrange
from .report import CheckReport, Kind

BOUND_SLACK = 1e-9


class Objective(enum.Enum):
    LORENTZ_INTERP = "thm31"
    MORREY_INTERP = "thm41"
    APPENDIX = "appendix"
    BMO_GROWTH = "bmo_growth"

    @classmethod
    def parse(cls, name: str) -> "Objective":
        key = name.strip().lower().removesuffix("_ratio")
        try:
            return cls(key)
        except ValueError:
            raise InvalidIndices(
                f"unknown objective {name!r}; choose one of {', '.join(o.value for o in cls)}"
            ) from None


@dataclass(frozen=True)
class SearchConfig:
    objective: Objective = Objective.LORENTZ_INTERP
    p: float = 2.0
    r: float = 3.0
    q: float = 4.0
    kappa: float = 0.5
    atoms: int = 6
    cells: int = 12
    value_bounds: tuple[float, float] = (1e-3, 1e3)
    mass_bounds: tuple[float, float] = (1e-3, 1e3)
    restarts: int = 4
    iterations: int = 1000
    scale: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if self.iterations < 0 or self.restarts < 1:
            raise InvalidIndices("iterations must be >= 0 and restarts >= 1")
        if self.atoms < 1 or self.cells < 2:
            raise InvalidIndices("need at least one atom and two cells")
        if not self.scale > 0:
            raise InvalidIndices("perturbation scale must be positive")
        for lo, hi in (self.value_bounds, self.mass_bounds):
            if not 0 < lo < hi < INFINITY:
                raise InvalidIndices("bounds must satisfy 0 < lo < hi < inf")
        obj = self.objective
        if obj in (Objective.LORENTZ_INTERP, Objective.MORREY_INTERP) and not (1 <= self.p < self.r < self.q < INFINITY):
            raise InvalidIndices(f"{obj.value} needs 1 <= p < r < q < inf")
        if obj is Objective.APPENDIX and not (1 <= self.q < self.p < INFINITY and 1 <= self.r < INFINITY):
            raise InvalidIndices("appendix objective needs 1 <= q < p < inf and 1 <= r < inf")
        if obj is Objective.BMO_GROWTH and not (1 < self.p < self.q < INFINITY):
            raise InvalidIndices("bmo_growth needs 1 < p < q < inf")
        if obj is not Objective.LORENTZ_INTERP and not 0 < self.kappa < 1:
            raise InvalidIndices("kappa must lie in (0, 1)")


@dataclass
class SearchResult:
    best: StepProfile | GridFunction
    ratio: float
    report: CheckReport
    trajectory: list[float] = field(default_factory=list)

    def descriptor(self) -> dict:
        return self.best.to_json()


def objective_bound(cfg: SearchConfig) -> float | None:
    """The proven explicit constant, or ``None`` when it is not numeric."""
    if cfg.objective in (Objective.LORENTZ_INTERP, Objective.MORREY_INTERP):
        return 2.0
    if cfg.objective is Objective.APPENDIX:
        return embedding_constant(cfg.p, cfg.q, cfg.r)
    return None


def _derived_kappa(cfg: SearchConfig) -> float:
    # kappa of the target space from (1 - kappa) q = (1 - kappa_star) p
    k = 1.0 - (1.0 - cfg.kappa) * cfg.q / cfg.p
    if not 0 < k < 1:
        raise InvalidIndices(f"derived kappa {k:g} lies outside (0, 1) for p={cfg.p:g}, q={cfg.q:g}, kappa*={cfg.kappa:g}")
    return k


def _profile_ratio(cfg: SearchConfig, x: np.ndarray) -> float:
    k = x.size // 2
    rp = rearrange(StepProfile(x[:k], x[k:]))
    p, r, q = cfg.p, cfg.r, cfg.q
    return lp_norm(rp, q) / (lorentz_norm(rp, LorentzIndices(p, r)) ** (p / q) * lp_norm(rp, INFINITY) ** (1 - p / q))


def _grid_ratio(cfg: SearchConfig, x: np.ndarray) -> float:
    f = GridFunction(1, ((0.0, 1.0),), x)
    sf = SortedFamily(f, all_cubes(f))
    p, r, q, kap = cfg.p, cfg.r, cfg.q, cfg.kappa
    if cfg.objective is Objective.MORREY_INTERP:
        lhs = sf.norm(MorreyIndices(q, kap), Flavor.MORREY)
        lm = sf.norm(MorreyIndices(p, kap, r), Flavor.LORENTZ_MORREY)
        return lhs / (lm ** (p / q) * f.sup_norm() ** (1 - p / q))
    if cfg.objective is Objective.APPENDIX:
        k = _derived_kappa(cfg)
        flavor = Flavor.MORREY if r == q else Flavor.LORENTZ_MORREY
        lhs = sf.norm(MorreyIndices(q, k, None if flavor is Flavor.MORREY else r), flavor)
        return lhs / sf.norm(MorreyIndices(p, kap), Flavor.WEAK_MORREY)
    bmo = bmo_norm(f, sf.fam)
    if bmo == 0:
        return 0.0
    rp = rearrange(global_profile(f))
    return lp_norm(rp, q) / (q * lp_norm(rp, p) ** (p / q) * bmo ** (1 - p / q))


def seed_candidate(cfg: SearchConfig) -> np.ndarray:
    """Indicator start: equal atoms of value and mass 1, or the middle half of the cells."""
    if cfg.objective is Objective.LORENTZ_INTERP:
        return np.ones(2 * cfg.atoms)
    x = np.zeros(cfg.cells)
    x[cfg.cells // 4: cfg.cells // 4 + max(1, cfg.cells // 2)] = 1.0
    return x


def _random_candidate(cfg: SearchConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.objective is Objective.LORENTZ_INTERP:
        v = np.exp(rng.uniform(*np.log(cfg.value_bounds), cfg.atoms))
        m = np.exp(rng.uniform(*np.log(cfg.mass_bounds), cfg.atoms))
        return np.concatenate((v, m))
    return np.exp(rng.uniform(*np.log(cfg.value_bounds), cfg.cells)) * (rng.random(cfg.cells) < 0.7)


def _clip(cfg: SearchConfig, x: np.ndarray) -> np.ndarray:
    if cfg.objective is Objective.LORENTZ_INTERP:
        k = x.size // 2
        return np.concatenate((np.clip(x[:k], *cfg.value_bounds), np.clip(x[k:], *cfg.mass_bounds)))
    out = np.where(x > 0, np.clip(x, *cfg.value_bounds), 0.0)
    return out


def extremal_search(cfg: SearchConfig) -> SearchResult:
    """Random-restart coordinate search maximising the objective ratio.

    Each step rescales one coordinate by a log-normal factor (a zero grid cell
    is switched on instead) and keeps the move if the ratio does not drop.
    The first restart starts from the indicator; the rest start at random.
    ``trajectory[i]`` is the best ratio after ``i`` steps, so it never decreases.
    """
    cfg.validate()
    ratio_of = _profile_ratio if cfg.objective is Objective.LORENTZ_INTERP else _grid_ratio
    bound = objective_bound(cfg)
    rng = np.random.default_rng(cfg.seed)
    start = seed_candidate(cfg)
    best_x, best = start, ratio_of(cfg, start)
    trajectory = [best]
    evaluations = 1
    if cfg.iterations:
        for restart in range(cfg.restarts):
            x = start.copy() if restart == 0 else _random_candidate(cfg, rng)
            if not np.any(x > 0):
                x[rng.integers(x.size)] = 1.0
            cur = ratio_of(cfg, x)
            evaluations += 1
            if cur > best:
                best_x, best = x, cur
            for _ in range(cfg.iterations):
                i = int(rng.integers(x.size))
                y = x.copy()
                y[i] = y[i] * math.exp(cfg.scale * rng.standard_normal()) if y[i] > 0 else float(np.max(x))
                y = _clip(cfg, y)
                val = ratio_of(cfg, y)
                evaluations += 1
                if val >= cur:
                    x, cur = y, val
                    if cur > best:
                        best_x, best = x, cur
                trajectory.append(best)
    rep = CheckReport(f"search.{cfg.objective.value}", {
        "p": cfg.p, "r": cfg.r, "q": cfg.q, "kappa": cfg.kappa, "restarts": cfg.restarts,
        "iterations": cfg.iterations, "scale": cfg.scale, "seed": cfg.seed, "constant": bound},
        kind=Kind.EXPLICIT if bound is not None else Kind.INFO)
    rep.cases = evaluations
    rep.worst_ratio = best
    rep.constant_estimate = best
    if bound is not None:
        if best > bound * (1 + BOUND_SLACK):
            raise AssertionError(
                f"search found ratio {best!r} above the proven constant {bound!r}; this is a bug in the norms"
            )
        rep.add_note(f"best ratio {best:.12g} against the proven constant {bound:.12g}; no sharpness is claimed")
    else:
        rep.add_note(f"best ratio {best:.12g}; the constant is not numeric")
    if cfg.objective is Objective.LORENTZ_INTERP:
        k = best_x.size // 2
        best_item = StepProfile(best_x[:k], best_x[k:])
    else:
        best_item = GridFunction(1, ((0.0, 1.0),), best_x)
    return SearchResult(best_item, best, rep, trajectory)


def trajectory_csv(trajectory: list[float]) -> str:
    lines = ["iteration,best_ratio"] + [f"{i},{v:.11e}" for i, v in enumerate(trajectory)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- growth order


GROWTH_SLOPE_RANGE = (0.85, 1.15)
CONTRAST_SLOPE_LIMIT = 0.1


def growth_ratios(f: GridFunction, p: float, qs) -> tuple[list[float], float]:
    """``||f||_q / (||f||_p^{p/q} BMO^{1-p/q})`` for each ``q``, and the BMO used."""
    if not p > 1:
        raise InvalidIndices("the growth experiment needs p > 1")
    qs = [float(q) for q in qs]
    if len(qs) < 2 or any(not (p < q < INFINITY) for q in qs) or sorted(set(qs)) != qs:
        raise InvalidIndices("the q-grid must be at least two increasing values with p < q < inf")
    bmo = bmo_norm(f, all_cubes(f))
    if bmo == 0:
        raise GridError("BMO seminorm is zero (constant function); the growth ratio is undefined")
    rp = rearrange(global_profile(f))
    lp = lp_norm(rp, p)
    return [lp_norm(rp, q) / (lp ** (p / q) * bmo ** (1 - p / q)) for q in qs], bmo


def growth_fit(family: str = "trunc_log", p: float = 2.0, qs=Q_GRID, M: float = 12.0, N: int = 8192,
               dim: int = 1) -> CheckReport:
    """Fitted slope of ``log r(q)`` against ``log q``.

    The truncated logarithm passes when the slope lies in [0.85, 1.15]; the
    indicator is the bounded contrast and passes when the slope is below 0.1.
    """
    fam = Family(family)
    if fam is Family.TRUNC_LOG:
        f = canonical_family(fam, form="grid", M=M, N=N, dim=dim)
        params = {"family": fam.value, "M": M, "N": N, "dim": dim, "p": p}
    elif fam is Family.INDICATOR:
        f = canonical_family(fam, form="grid", N=N, dim=dim)
        params = {"family": fam.value, "N": N, "dim": dim, "p": p}
    else:
        raise InvalidIndices(f"growth experiment supports trunc_log and indicator, not {fam.value}")
    qs = [float(q) for q in qs]
    ratios, bmo = growth_ratios(f, p, qs)
    params["q"] = qs
    rep = CheckReport(f"growth.{fam.value}", params, kind=Kind.INFO)
    rep.cases = len(qs)
    rep.worst_ratio = max(ratios)
    rep.constant_estimate = max(ratios)
    rep.curve = list(zip(qs, ratios))
    rep.slope = fit_slope(qs, ratios)
    if fam is Family.TRUNC_LOG:
        lo, hi = GROWTH_SLOPE_RANGE
        rep.passed = lo <= rep.slope <= hi
        rep.add_note(f"slope {rep.slope:.6f}, target [{lo:g}, {hi:g}]; grid BMO {bmo:.6g}")
    else:
        rep.passed = rep.slope < CONTRAST_SLOPE_LIMIT
        rep.add_note(f"contrast slope {rep.slope:.6f}, target < {CONTRAST_SLOPE_LIMIT:g}; grid BMO {bmo:.6g}")
    return rep


def with_objective(cfg: SearchConfig, **changes) -> SearchConfig:
    return replace(cfg, **changes)
