import numpy as np
import pytest

from lmcheck.corpus import Family, canonical_family
from lmcheck.grid import GridError, GridFunction
from lmcheck.rearrangement import InvalidIndices, StepProfile
from lmcheck.search import (
    Objective,
    SearchConfig,
    extremal_search,
    growth_fit,
    growth_ratios,
    objective_bound,
    seed_candidate,
    trajectory_csv,
)

BASELINE = 1.5 ** (1 / 6)


def test_indicator_baseline_ratio():
    res = extremal_search(SearchConfig(p=2, r=3, q=4, iterations=0))
    assert res.ratio == pytest.approx(BASELINE, rel=1e-12)
    assert res.ratio == pytest.approx(1.070, abs=1e-3)


@pytest.mark.parametrize("obj", list(Objective))
def test_zero_iterations_returns_seed(obj):
    kw = dict(p=2, q=1, r=1) if obj is Objective.APPENDIX else {}
    cfg = SearchConfig(objective=obj, iterations=0, **kw)
    res = extremal_search(cfg)
    x = seed_candidate(cfg)
    if obj is Objective.LORENTZ_INTERP:
        assert isinstance(res.best, StepProfile)
        assert np.array_equal(np.concatenate((res.best.values, res.best.masses)), x)
    else:
        assert isinstance(res.best, GridFunction) and np.array_equal(res.best.cells, x)
    assert res.trajectory == [res.ratio]


def test_long_search_is_monotone_and_bounded():
    res = extremal_search(SearchConfig(iterations=2500, restarts=4, seed=7))
    traj = np.array(res.trajectory)
    assert traj.size == 1 + 4 * 2500
    assert np.all(np.diff(traj) >= 0)
    assert 1 < res.ratio <= 2
    assert res.report.ok() and res.report.cases > 10_000


def test_search_is_deterministic():
    cfg = SearchConfig(objective=Objective.MORREY_INTERP, iterations=150, restarts=2, seed=3)
    a, b = extremal_search(cfg), extremal_search(cfg)
    assert a.trajectory == b.trajectory
    assert trajectory_csv(a.trajectory) == trajectory_csv(b.trajectory)


@pytest.mark.parametrize("obj,kw", [(Objective.MORREY_INTERP, {}), (Objective.APPENDIX, dict(p=2, q=1, r=1)),
                                    (Objective.APPENDIX, dict(p=3, q=2, r=2)), (Objective.BMO_GROWTH, {})])
def test_grid_objectives_respect_bounds(obj, kw):
    cfg = SearchConfig(objective=obj, iterations=120, restarts=2, seed=1, **kw)
    res = extremal_search(cfg)
    bound = objective_bound(cfg)
    assert np.isfinite(res.ratio)
    if bound is not None:
        assert res.ratio <= bound * (1 + 1e-9)


def test_objective_parsing():
    assert Objective.parse("THM31_RATIO") is Objective.LORENTZ_INTERP
    assert Objective.parse("appendix") is Objective.APPENDIX
    with pytest.raises(InvalidIndices, match="unknown objective"):
        Objective.parse("thm99")


@pytest.mark.parametrize("kw", [dict(p=2, r=3, q=3), dict(iterations=-1), dict(restarts=0),
                                dict(objective=Objective.APPENDIX, p=1, q=2),
                                dict(objective=Objective.MORREY_INTERP, kappa=1.0)])
def test_invalid_search_configs(kw):
    with pytest.raises(InvalidIndices):
        extremal_search(SearchConfig(**kw))


def test_growth_rejects_constant_family():
    with pytest.raises(GridError, match="BMO"):
        growth_ratios(GridFunction(1, ((0.0, 1.0),), np.full(16, 2.0)), 2, (4, 8))


def test_growth_indicator_contrast_is_flat_ratio_curve():
    rep = growth_fit("indicator", p=2, N=256)
    assert len(rep.curve) == 5 and abs(rep.slope) < 0.2


def test_growth_rejects_bad_q_grid():
    f = canonical_family(Family.TRUNC_LOG, N=64, M=4)
    with pytest.raises(InvalidIndices):
        growth_ratios(f, 2, (8, 4))
    with pytest.raises(InvalidIndices):
        growth_ratios(f, 2, (1.5, 4))
