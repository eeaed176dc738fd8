"""Named verification suites: corpus sizes, default indices and verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import checks
from .corpus import CorpusConfig, generate_corpus, grid_tuples
from .report import CheckReport, Kind

SUITES = ("identities", "keys", "lorentz-interp", "morrey-interp", "embeddings", "bilinear", "jn", "special")
STABILITY_SEEDS = 3
STABILITY_TOL = 0.10


@dataclass(frozen=True)
class SuiteParams:
    p: float = 2.0
    r: float = 3.0
    implicit_r: float | None = None
    kappa: float = 0.5
    qs: tuple[float, ...] = checks.Q_GRID
    profiles: int = 500
    grids: int = 20
    pairs: int = 50
    # padded grids stay at or below 64 cells: resolution n plus a zero border of n//4 per side
    resolution: tuple[int, int] = (8, 42)
    stability_seeds: int = STABILITY_SEEDS
    extra: dict = field(default_factory=dict)


def _corpus(seed: int, sp: SuiteParams, profiles: bool, grids: bool, dims=(1,)):
    cfg = CorpusConfig(profiles=sp.profiles if profiles else 0, grids=sp.grids if grids else 0,
                       grid_dims=dims, resolution=sp.resolution)
    return generate_corpus(cfg, seed)


def run_suite(name: str, seed: int, sp: SuiteParams) -> list[CheckReport]:
    """All reports of one suite for one seed (no stability pass)."""
    if name == "identities":
        c = _corpus(seed, sp, True, True, dims=(1, 2))
        return checks.check_identities(c) + checks.check_structure(c, p=sp.p, r=sp.r, kappa=sp.kappa, seed=seed)
    if name == "keys":
        return checks.check_pointwise_keys(_corpus(seed, sp, True, False), p=sp.p, r=sp.r)
    if name == "lorentz-interp":
        c = _corpus(seed, sp, True, True)
        out = checks.check_lorentz_interpolation(c, p=sp.p, r=sp.r, qs=sp.qs, implicit_r=sp.implicit_r)
        return out + checks.estimate_w_vs_bmo(_corpus(seed, sp, False, True, dims=(1, 2)))
    if name == "morrey-interp":
        return checks.check_morrey_interpolation(_corpus(seed, sp, False, True), p=sp.p, r=sp.r, kappa=sp.kappa,
                                                 qs=sp.qs, implicit_r=sp.implicit_r)
    if name == "embeddings":
        return checks.check_embeddings(_corpus(seed, sp, True, True), kappa_star=sp.kappa, kappa=sp.kappa)
    if name == "bilinear":
        return checks.check_bilinear(grid_tuples(seed, sp.pairs, k=3, cfg=CorpusConfig(resolution=sp.resolution)),
                                     p=sp.p, r=sp.implicit_r)
    if name == "jn":
        c = _corpus(seed, sp, False, True)
        glob = checks.check_john_nirenberg(c, p=1, setting="GLOBAL")
        morrey = checks.check_john_nirenberg(c, p=1, setting="MORREY", kappa=sp.kappa)
        return glob + [r for r in morrey if r.check_id != "jn.gamma_ratio"]
    if name == "special":
        return checks.special_function_checks(seed=seed)
    raise KeyError(name)


def spread(values: list[float]) -> float:
    """Relative spread ``(max - min) / max`` of positive estimates."""
    hi, lo = max(values), min(values)
    return 0.0 if hi == 0 else (hi - lo) / hi


def apply_stability(primary: list[CheckReport], others: list[list[CheckReport]]) -> None:
    """Fold the seed-stability criterion into every implicit report of ``primary``."""
    by_id = [{r.check_id: r for r in reps} for reps in others]
    for rep in primary:
        if rep.kind is not Kind.IMPLICIT or rep.constant_estimate is None:
            continue
        ests = [rep.constant_estimate]
        for table in by_id:
            other = table.get(rep.check_id)
            if other is not None and other.constant_estimate is not None:
                ests.append(other.constant_estimate)
        if len(ests) < 2:
            continue
        s = spread(ests)
        rep.add_note(f"seed spread {s:.4f} over {len(ests)} seeds (limit {STABILITY_TOL:g})")
        stable = math.isfinite(s) and s < STABILITY_TOL
        rep.passed = bool(rep.ok() and stable)


def verify(names: list[str], seed: int, sp: SuiteParams) -> list[CheckReport]:
    reports: list[CheckReport] = []
    for name in names:
        primary = run_suite(name, seed, sp)
        if sp.stability_seeds > 1 and any(r.kind is Kind.IMPLICIT for r in primary):
            others = [run_suite(name, seed + k, sp) for k in range(1, sp.stability_seeds)]
            apply_stability(primary, others)
        reports += primary
    return reports
