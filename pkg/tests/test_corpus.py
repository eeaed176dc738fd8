import math

import numpy as np
import pytest

from lmcheck.corpus import (
    CorpusConfig,
    CorpusError,
    Family,
    canonical_family,
    generate_corpus,
    grid_tuples,
)
from lmcheck.checks import check_identities
from lmcheck.grid import GridFunction, all_cubes, bmo_norm, global_profile
from lmcheck.rearrangement import StepProfile, rearrange, weak_lp_norm


def _same(a, b):
    if isinstance(a, StepProfile):
        return np.array_equal(a.values, b.values) and np.array_equal(a.masses, b.masses)
    return a.box == b.box and np.array_equal(a.cells, b.cells)


def test_corpus_is_deterministic():
    cfg = CorpusConfig(profiles=100)
    a, b = generate_corpus(cfg, 42), generate_corpus(cfg, 42)
    assert len(a) == len(b) >= 100
    assert all(x.name == y.name and _same(x.item, y.item) for x, y in zip(a.entries, b.entries))
    c = generate_corpus(cfg, 43)
    assert not all(_same(x.item, y.item) for x, y in zip(a.profiles()[3:], c.profiles()[3:]))


def test_empty_request_gives_empty_corpus_and_zero_cases():
    c = generate_corpus(CorpusConfig(), 0)
    assert len(c) == 0
    assert all(r.cases == 0 for r in check_identities(c))


def test_two_dimensional_grids():
    c = generate_corpus(CorpusConfig(grids=10, grid_dims=(2,), canonical=False), 1)
    assert len(c.grids()) == 10
    for e in c.grids():
        assert isinstance(e.item, GridFunction) and e.item.dim == 2
        assert np.all(np.isfinite(e.item.cells))


def test_grids_vanish_on_the_border():
    for e in generate_corpus(CorpusConfig(grids=6, canonical=False), 3).grids():
        assert e.item.cells[0] == 0 and e.item.cells[-1] == 0


@pytest.mark.parametrize("bad", [CorpusConfig(profiles=-1), CorpusConfig(atoms=(0, 3)),
                                 CorpusConfig(values=(2.0, 1.0)), CorpusConfig(grids=1, grid_dims=(3,))])
def test_bad_configs_rejected(bad):
    with pytest.raises(CorpusError):
        generate_corpus(bad, 0)


def test_power_weak_norm_is_sqrt2():
    f = canonical_family(Family.POWER, p=2, dim=1, N=4096)
    assert weak_lp_norm(rearrange(global_profile(f)), 2) == pytest.approx(math.sqrt(2), rel=0.02)


def test_power_is_minorant_of_the_singular_function():
    n = 64
    f = canonical_family("power", p=2, dim=1, N=n)
    edges = np.linspace(-1, 1, n + 1)
    inf_on_cell = np.minimum(np.abs(edges[:-1]), np.abs(edges[1:]))
    sup_abs = np.maximum(np.abs(edges[:-1]), np.abs(edges[1:]))
    np.testing.assert_allclose(f.cells, sup_abs ** -0.5, rtol=1e-12)
    assert np.all(f.cells <= np.where(inf_on_cell > 0, inf_on_cell, 1e-300) ** -0.5)


def test_trunc_log_bmo_in_range():
    f = canonical_family(Family.TRUNC_LOG, M=8, N=4096)
    b = bmo_norm(f, all_cubes(f))
    assert math.isfinite(b) and 0.1 <= b <= 10


def test_trunc_log_profile_preserves_l1_mass():
    m = 6.0
    prof = canonical_family(Family.TRUNC_LOG, form="profile", M=m)
    # int_0^2 min(M, log(2/t)) dt = 2 - 2 e^{-M}
    assert float(np.sum(prof.values * prof.masses)) == pytest.approx(2.0 - 2.0 * math.exp(-m), rel=1e-12)


def test_indicator_and_two_step():
    assert canonical_family(Family.INDICATOR, c=1, m=1).atoms == [(1.0, 1.0)]
    assert canonical_family("two_step", a=3, b=1, m1=0.5, m2=2).atoms == [(3.0, 0.5), (1.0, 2.0)]
    g = canonical_family(Family.INDICATOR, form="grid", N=64)
    assert global_profile(g).atoms == [(1.0, 1.0)]
    with pytest.raises(CorpusError):
        canonical_family(Family.TWO_STEP, a=1, b=2)
    with pytest.raises(CorpusError):
        canonical_family(Family.POWER, N=63)


def test_grid_tuples_share_resolution():
    tuples = grid_tuples(5, 8, k=3)
    assert len(tuples) == 9
    for _, members in tuples:
        assert len(members) == 3 and len({m.resolution for m in members}) == 1
    assert [np.array_equal(a.cells, b.cells) for (_, (a, *_)), (_, (b, *_)) in
            zip(tuples, grid_tuples(5, 8, k=3))] == [True] * 9
    with pytest.raises(CorpusError):
        grid_tuples(0, 2, k=1)
