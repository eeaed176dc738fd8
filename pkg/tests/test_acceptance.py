"""Acceptance criteria, one test and one PASS/FAIL line each.

Tolerances are pinned here; they are not read from the library so a change
in a library default cannot loosen a criterion.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from lmcheck import checks, special
from lmcheck.corpus import CorpusConfig, Family, canonical_family, generate_corpus, grid_tuples
from lmcheck.grid import global_profile
from lmcheck.rearrangement import (
    LorentzIndices,
    StepProfile,
    hardy_average,
    lorentz_norm,
    rearrange,
    weak_lp_norm,
)
from lmcheck.report import Kind
from lmcheck.search import growth_fit
from lmcheck.suites import SuiteParams, run_suite, spread

SEED = 42
IDENTITY_RTOL = 1e-9
SLACK = 1e-9
Q_GRID = (4.0, 8.0, 16.0, 32.0, 64.0)
SLOPE_LIMIT = 0.1
STABILITY_LIMIT = 0.10
SUITE_RESOLUTION = (8, 42)  # padded 1-d grids stay at or below 64 cells


def _corpus(profiles, grids, dims=(1,)):
    return generate_corpus(CorpusConfig(profiles=profiles, grids=grids, grid_dims=dims,
                                        resolution=SUITE_RESOLUTION), SEED)


def _reds(reports):
    return [f"{r.check_id}({len(r.violations)}/{r.cases})" for r in reports if r.violations or r.cases == 0]


def test_criterion_1_identities(acceptance):
    corpus = _corpus(500, 20, dims=(1, 2))
    assert len(corpus.profiles()) >= 500 and len(corpus.grids()) >= 20
    t0 = time.perf_counter()
    reports = checks.check_identities(corpus)
    elapsed = time.perf_counter() - t0
    worst = max(r.worst_ratio for r in reports)  # |a - b| / (rtol * scale)
    reds = _reds(reports)
    ok = not reds and elapsed < 10.0 and all(r.params.get("rtol", IDENTITY_RTOL) <= IDENTITY_RTOL for r in reports)
    cases = sum(r.cases for r in reports)
    acceptance("1", ok, f"{cases} identity comparisons, worst |a-b|/(1e-9 scale) = {worst:.3g}, "
                        f"runtime {elapsed:.2f}s (< 10s), failing: {reds or 'none'}")
    assert ok


def test_criterion_2_explicit_constants(acceptance):
    t0 = time.perf_counter()
    profiles = _corpus(500, 0)
    grids = _corpus(0, 20)
    assert all(e.item.cells.size <= 64 for e in grids.grids() if not e.name.startswith(("indicator", "two_step",
                                                                                          "trunc_log")))
    lor = {r.check_id: r for r in checks.check_lorentz_interpolation(profiles, p=2, r=3, qs=Q_GRID)}
    mor = {r.check_id: r for r in checks.check_morrey_interpolation(grids, p=2, r=3, kappa=0.5, qs=Q_GRID)}
    emb = {r.check_id: r for r in checks.check_embeddings(grids, cases=((2, 1, 1), (3, 2, 2), (4, 2, 1)))}
    bil = {r.check_id: r for r in checks.check_bilinear(
        grid_tuples(SEED, 50, k=2, cfg=CorpusConfig(resolution=SUITE_RESOLUTION)))}
    keys = {r.check_id: r for r in checks.check_pointwise_keys(profiles, p=2, r=3)}
    elapsed = time.perf_counter() - t0
    wanted = [lor["lorentz.strong_type"], lor["lorentz.weak_type"], mor["morrey.strong_type"],
              mor["morrey.weak_type"], emb["embeddings.appendix"], mor["morrey.diff"],
              bil["bilinear.holdermorrey"], keys["keys.geq"], keys["keys.extend"], keys["keys.key1"],
              keys["keys.key2"]]
    assert emb["embeddings.appendix"].params["constant"] == pytest.approx([2.0, math.sqrt(3.0), 4.0], rel=1e-15)
    reds = _reds(wanted)
    worst = {r.check_id: round(r.worst_ratio, 4) for r in wanted if r.violations}
    ok = not reds and elapsed < 60.0
    acceptance("2", ok, f"{sum(r.cases for r in wanted)} comparisons at slack 1e-9, runtime {elapsed:.1f}s (< 60s), "
                        f"failing: {reds or 'none'}" + (f", worst lhs/rhs {worst}" if worst else ""))
    assert ok


def test_criterion_3_known_values(acceptance):
    ind = rearrange(StepProfile.from_atoms([(1.0, 1.0)]))
    l21 = lorentz_norm(ind, LorentzIndices(2, 1))
    power = canonical_family(Family.POWER, p=2, dim=1, N=4096)
    weak = weak_lp_norm(rearrange(global_profile(power)), 2)
    # 1/(t+1) sampled at piece midpoints, 10^4 pieces on (0, 10)
    edges = np.linspace(0.0, 10.0, 10_001)
    mid = 0.5 * (edges[1:] + edges[:-1])
    recip = hardy_average(rearrange(StepProfile(1.0 / (mid + 1.0), np.diff(edges))), 1.0)
    logmom = special.log_moment_quadrature(1.0, 2.0)
    parts = [
        (abs(l21 - 2.0) <= 1e-12, f"L^(2,1) of indicator {l21!r}"),
        (abs(weak / math.sqrt(2.0) - 1.0) <= 0.02, f"weak-L^2 of |x|^(-1/2) grid {weak:.6f} vs sqrt2 (2%)"),
        (abs(recip - math.log(2.0)) <= 1e-3, f"f**(1) of 1/(t+1) {recip:.6f} vs ln2 (1e-3)"),
        (abs(logmom - 2.0) <= 1e-6, f"int_0^1 log(1/s)^2 ds {logmom:.9f} (1e-6)"),
    ]
    ok = all(p for p, _ in parts)
    acceptance("3", ok, "; ".join(d for _, d in parts))
    assert ok


def test_criterion_4_limits(acceptance):
    factor = checks.weak_type_factor(2.0, 1e4)
    g100 = special.gamma_root_ratio(100.0) * math.e - 1.0
    g1000 = special.gamma_root_ratio(1000.0) * math.e - 1.0
    ok = abs(factor - 2.0) < 0.01 and abs(g100) < 0.04 and abs(g1000) < 0.01
    acceptance("4", ok, f"|factor(2,1e4) - 2| = {abs(factor - 2):.2e} (< 0.01); Gamma(q+1)^(1/q)/q vs 1/e: "
                        f"{g100:+.4f} at q=100 (4%), {g1000:+.4f} at q=1000 (1%)")
    assert ok


IMPLICIT_SUITES = ("lorentz-interp", "morrey-interp", "bilinear", "jn")


def test_criterion_5_implicit_constants(acceptance):
    sp = SuiteParams(qs=Q_GRID, resolution=SUITE_RESOLUTION)
    runs = [[r for name in IMPLICIT_SUITES for r in run_suite(name, SEED + k, sp)] for k in range(3)]
    tables = [{r.check_id: r for r in reps} for reps in runs]
    problems, summary = [], []
    for rep in runs[0]:
        if rep.kind is not Kind.IMPLICIT:
            continue
        ests = [t[rep.check_id].constant_estimate for t in tables if rep.check_id in t]
        finite = all(e is not None and math.isfinite(e) for e in ests) and len(ests) == 3
        s = spread(ests) if finite else math.inf
        flat = rep.slope is None or abs(rep.slope) < SLOPE_LIMIT
        slope_txt = "n/a" if rep.slope is None else f"{rep.slope:+.3f}"
        summary.append(f"{rep.check_id} C={rep.constant_estimate if rep.constant_estimate is None else round(rep.constant_estimate, 4)} "
                       f"slope={slope_txt} spread={s:.3f}")
        if not (finite and flat and s < STABILITY_LIMIT):
            problems.append(rep.check_id)
    ok = not problems
    acceptance("5", ok, f"{len(summary)} implicit reports over seeds 42-44, |slope| < 0.1, spread < 10%; "
                        f"failing: {problems or 'none'} | " + "; ".join(summary))
    assert ok


def test_criterion_6_growth_order(acceptance):
    t0 = time.perf_counter()
    log_rep = growth_fit("trunc_log", p=2.0, qs=Q_GRID, M=12.0, N=8192)
    ind_rep = growth_fit("indicator", p=2.0, qs=Q_GRID, N=8192)
    elapsed = time.perf_counter() - t0
    ok_log = 0.85 <= log_rep.slope <= 1.15
    ok_ind = ind_rep.slope < 0.1
    ok = ok_log and ok_ind and elapsed < 30.0
    acceptance("6", ok, f"trunc_log slope {log_rep.slope:.4f} (target [0.85, 1.15]), indicator contrast slope "
                        f"{ind_rep.slope:.4f} (target < 0.1), runtime {elapsed:.1f}s (< 30s)")
    assert ok


def test_criterion_7_determinism(acceptance, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"report{k}.json"
        proc = subprocess.run([sys.executable, "-m", "lmcheck.cli", "verify", "--suite", "all", "--seed", str(SEED),
                               "--out", str(path)], capture_output=True, text=True)
        assert proc.returncode in (0, 1), proc.stderr
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    acceptance("7", ok, f"two runs of verify --suite all --seed 42: {len(outs[0])} bytes, "
                        f"{'byte-identical' if ok else 'DIFFERENT'}")
    assert ok
