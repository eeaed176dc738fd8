import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from lmcheck.rearrangement import (
    INFINITY,
    InvalidIndices,
    LorentzIndices,
    Method,
    ProfileError,
    StepProfile,
    distribution,
    evaluate_star,
    hardy_average,
    hardy_derivative,
    lorentz_norm,
    lp_norm,
    lp_norm_layer_cake,
    normalize,
    parse_step_profile,
    rearrange,
    star_lorentz_norm,
    w_functional,
    weak_lp_norm,
    weak_lp_norm_levels,
)


def rp_of(*atoms):
    return rearrange(StepProfile.from_atoms(atoms))


ONE = rp_of((1, 1))
TWO = rp_of((2, 1), (1, 1))

atoms_st = st.lists(
    st.tuples(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3)), min_size=1, max_size=12
)


# ---- oracles that never look at breakpoints ---------------------------------


def star_on_grid(profile: StepProfile, s: np.ndarray) -> np.ndarray:
    """f*(s) = inf{lam : d(lam) <= s}, evaluated by brute force over the values."""
    vals = np.asarray(profile.values)
    masses = np.asarray(profile.masses)
    out = np.zeros_like(s)
    for k, x in enumerate(s):
        ok = [lam for lam in np.concatenate(([0.0], vals)) if masses[vals > lam].sum() <= x]
        out[k] = min(ok)
    return out


def lorentz_quadrature(rp, p, r):
    """(∫ (s^{1/p} f*(s))^r ds/s)^{1/r} by adaptive quadrature piece by piece."""
    total = 0.0
    for a, b, v in zip(rp.breakpoints[:-1], rp.breakpoints[1:], rp.values):
        val, _ = integrate.quad(lambda s: (s ** (1 / p) * v) ** r / s, a, b, epsrel=1e-12, limit=200)
        total += val
    return total ** (1 / r)


# ---- normalize / distribution / rearrange ------------------------------------


def test_normalize_coalesces_equal_values():
    assert normalize(StepProfile.from_atoms([(1, 0.5), (1, 0.5)])).atoms == [(1.0, 1.0)]


def test_normalize_sorts_and_keeps_zero_value_atom():
    got = normalize(StepProfile.from_atoms([(2, 1), (0, 3), (1, 1)])).atoms
    assert got == [(2.0, 1.0), (1.0, 1.0), (0.0, 3.0)]


def test_normalize_empty_profile():
    assert normalize(StepProfile.from_atoms([])).atoms == []


@pytest.mark.parametrize("atoms", [[(1, -1)], [(-1, 1)]])
def test_negative_atoms_rejected(atoms):
    with pytest.raises(ProfileError, match="negative"):
        StepProfile.from_atoms(atoms)


def test_distribution_examples():
    two = StepProfile.from_atoms([(2, 1), (1, 1)])
    assert distribution(StepProfile.from_atoms([(1, 1)]), 0.5) == 1
    assert distribution(two, 1.5) == 1
    assert distribution(two, 0.5) == 2
    assert distribution(two, 1.0) == 1  # strict super-level set
    with pytest.raises(ProfileError):
        distribution(two, 0.0)


def test_rearrange_examples():
    assert list(TWO.breakpoints) == [0, 1, 2]
    assert list(TWO.values) == [2, 1]
    assert rp_of().is_zero()
    assert evaluate_star(ONE, 0.999) == 1
    assert evaluate_star(ONE, 1.0) == 0


def test_evaluate_star_examples():
    assert evaluate_star(TWO, 1.5) == 1
    assert evaluate_star(TWO, 50.0) == 0
    with pytest.raises(ProfileError):
        evaluate_star(TWO, 0.0)


@given(atoms_st)
@settings(max_examples=60, deadline=None)
def test_star_matches_distribution_inverse(atoms):
    prof = StepProfile.from_atoms(atoms)
    rp = rearrange(prof)
    s = np.linspace(1e-3, 1.2 * rp.support, 37)
    # keep clear of breakpoints, where the two definitions meet only in the limit
    s = s[np.min(np.abs(s[:, None] - rp.breakpoints[None, :]), axis=1) > 1e-9 * rp.support]
    np.testing.assert_array_equal(evaluate_star(rp, s), star_on_grid(prof, s))


# ---- Hardy average -------------------------------------------------------------


def test_hardy_average_examples():
    assert hardy_average(ONE, 2.0) == 0.5
    assert hardy_average(TWO, 2.0) == 1.5
    with pytest.raises(ProfileError):
        hardy_average(ONE, -1.0)


def test_hardy_average_of_discretized_reciprocal():
    # f*(t) = 1/(t+1) on (0, T) with exact piece averages; f**(1) = ln 2
    edges = np.linspace(0.0, 50.0, 10_001)
    a, b = edges[:-1], edges[1:]
    prof = StepProfile(np.log((b + 1) / (a + 1)) / (b - a), b - a)
    assert abs(hardy_average(rearrange(prof), 1.0) - math.log(2)) < 1e-3


def test_hardy_derivative_examples():
    assert hardy_derivative(ONE, 2.0) == pytest.approx(-0.25, abs=1e-15)
    assert hardy_derivative(ONE, 0.5) == 0.0
    assert hardy_derivative(TWO, 1.5) == pytest.approx(-4 / 9, rel=1e-14)
    with pytest.raises(ProfileError, match="breakpoint"):
        hardy_derivative(TWO, 1.0)


# ---- norms ----------------------------------------------------------------------


def test_lp_examples():
    assert lp_norm(ONE, 3.3) == 1
    assert lp_norm(TWO, 2) == pytest.approx(math.sqrt(5), rel=1e-15)
    assert lp_norm(TWO, INFINITY) == 2
    with pytest.raises(InvalidIndices):
        lp_norm(TWO, 0.5)


def test_lp_large_exponent_stays_finite():
    rp = rp_of((1e3, 1e3), (1.0, 1.0))
    # 1e3**1e4 overflows a double; the scaled sum does not
    assert lp_norm(rp, 1e4) == pytest.approx(1e3 * 1e3 ** (1e-4), rel=1e-12)


def test_weak_examples():
    assert weak_lp_norm(ONE, 2) == 1
    assert weak_lp_norm(TWO, 2) == 2
    with pytest.raises(InvalidIndices):
        weak_lp_norm(TWO, 0.9)


def test_lorentz_examples():
    assert lorentz_norm(ONE, LorentzIndices(2, 1)) == pytest.approx(2.0, abs=1e-12)
    for p in (1.0, 1.5, 2.0, 7.0):
        assert lorentz_norm(ONE, LorentzIndices(p, p)) == pytest.approx(1.0, abs=1e-15)
    assert lorentz_norm(TWO, LorentzIndices(2, 2)) == pytest.approx(math.sqrt(5), rel=1e-14)
    assert lorentz_norm(TWO, LorentzIndices(2, INFINITY)) == weak_lp_norm(TWO, 2)


@pytest.mark.parametrize("bad", [(0.5, 1), (2, 0.5), (INFINITY, 2)])
def test_lorentz_rejects_bad_indices(bad):
    with pytest.raises(InvalidIndices):
        LorentzIndices(*bad)


@given(atoms_st, st.sampled_from([1.5, 2.0, 4.0]), st.sampled_from([1.0, 1.7, 3.0, 8.0]))
@settings(max_examples=40, deadline=None)
def test_lorentz_closed_form_matches_quadrature(atoms, p, r):
    rp = rearrange(StepProfile.from_atoms(atoms))
    assert lorentz_norm(rp, LorentzIndices(p, r)) == pytest.approx(lorentz_quadrature(rp, p, r), rel=1e-8)


@given(atoms_st, st.sampled_from([1.5, 2.0, 4.0]))
@settings(max_examples=60, deadline=None)
def test_lorentz_methods_agree(atoms, p):
    rp = rearrange(StepProfile.from_atoms(atoms))
    for r in (1.0, p, 2 * p):
        idx = LorentzIndices(p, r)
        a = lorentz_norm(rp, idx, Method.CLOSED_FORM)
        b = lorentz_norm(rp, idx, Method.LAYER_CAKE)
        assert a == pytest.approx(b, rel=1e-9)


@given(atoms_st, st.sampled_from([1.0, 1.5, 2.0, 3.0]))
@settings(max_examples=60, deadline=None)
def test_lp_layer_cake(atoms, p):
    rp = rearrange(StepProfile.from_atoms(atoms))
    assert lp_norm_layer_cake(rp, p) == pytest.approx(lp_norm(rp, p), rel=1e-12)


@given(atoms_st, st.sampled_from([1.0, 1.5, 2.0, 4.0]))
@settings(max_examples=60, deadline=None)
def test_weak_norm_both_sides(atoms, p):
    prof = StepProfile.from_atoms(atoms)
    assert weak_lp_norm(rearrange(prof), p) == pytest.approx(weak_lp_norm_levels(prof, p), rel=1e-12)


def test_weak_norm_of_truncated_power_on_fine_grid():
    # |x|^{-1/2} on [-1, 1], 4096 cells, each holding the infimum over the cell
    n = 4096
    h = 2 / n
    x = (np.arange(n // 2) + 1) * h
    prof = StepProfile(x**-0.5, np.full(x.size, 2 * h))
    assert weak_lp_norm(rearrange(prof), 2) == pytest.approx(math.sqrt(2), rel=0.02)


def test_centre_sampling_overshoots_the_weak_norm():
    # sampling at cell centres lifts the first level set: sqrt(2h) (h/2)^{-1/2} = 2
    n = 4096
    h = 2 / n
    x = (np.arange(n // 2) + 0.5) * h
    prof = StepProfile(x**-0.5, np.full(x.size, 2 * h))
    assert weak_lp_norm(rearrange(prof), 2) == pytest.approx(2.0, rel=1e-12)


@given(atoms_st, st.sampled_from([1.0, 2.0, 3.0]), st.sampled_from([1.0, 2.0, 5.0]))
@settings(max_examples=40, deadline=None)
def test_lorentz_nesting_constant(atoms, p, r):
    # ||f||_{p,s} <= (r/p)^{1/r - 1/s} ||f||_{p,r} for r < s, equality on indicators
    rp = rearrange(StepProfile.from_atoms(atoms))
    s = 2 * r
    a = lorentz_norm(rp, LorentzIndices(p, r))
    b = lorentz_norm(rp, LorentzIndices(p, s))
    assert b <= (r / p) ** (1 / r - 1 / s) * a * (1 + 1e-12)


def test_lorentz_nesting_is_not_monotone_with_constant_one():
    # indicator: (p/r)^{1/r} grows from r = 5 to r = 10 when p = 1
    assert lorentz_norm(ONE, LorentzIndices(1, 10)) > lorentz_norm(ONE, LorentzIndices(1, 5))


# ---- W functional --------------------------------------------------------------


def w_dense(rp):
    ts = np.concatenate([np.linspace(a, b, 400)[1:] for a, b in zip(rp.breakpoints[:-1], rp.breakpoints[1:])])
    ts = np.concatenate((ts, ts * (1 + 1e-12)))
    return float(np.max(hardy_average(rp, ts) - evaluate_star(rp, ts)))


def test_w_examples():
    assert w_functional(ONE) == 1
    assert w_functional(TWO) == 1.5
    assert w_functional(rp_of((3.5, 1))) == 3.5


@given(atoms_st)
@settings(max_examples=40, deadline=None)
def test_w_dense_sampling_oracle(atoms):
    rp = rearrange(StepProfile.from_atoms(atoms))
    assert w_functional(rp) == pytest.approx(w_dense(rp), rel=1e-9)


@given(atoms_st, st.floats(0.01, 100.0))
@settings(max_examples=40, deadline=None)
def test_homogeneity(atoms, c):
    rp = rearrange(StepProfile.from_atoms(atoms))
    big = rp.scaled(c)
    for fn in (lambda x: lp_norm(x, 2.5), lambda x: weak_lp_norm(x, 2), w_functional,
               lambda x: lorentz_norm(x, LorentzIndices(2, 3))):
        assert fn(big) == pytest.approx(c * fn(rp), rel=1e-12)


# ---- starred functional ------------------------------------------------------------


def star_quadrature(rp, p, r):
    def piece(a, b):
        f = lambda s: (s ** (1 / p) * hardy_average(rp, s)) ** r / s
        return integrate.quad(f, a, b, epsrel=1e-11, limit=200)[0]

    total = sum(piece(a, b) for a, b in zip(rp.breakpoints[:-1], rp.breakpoints[1:]))
    total += integrate.quad(lambda s: (s ** (1 / p) * hardy_average(rp, s)) ** r / s,
                            rp.support, INFINITY, epsrel=1e-11, limit=200)[0]
    return total ** (1 / r)


@pytest.mark.parametrize("p,r", [(2.0, 2.0), (2.0, 3.0), (3.0, 1.5), (1.5, 2.5), (4.0, 7.0)])
def test_star_matches_quadrature(p, r):
    rng = np.random.default_rng(3)
    rp = rearrange(StepProfile(np.exp(rng.uniform(-2, 2, 7)), np.exp(rng.uniform(-2, 2, 7))))
    assert star_lorentz_norm(rp, LorentzIndices(p, r)) == pytest.approx(star_quadrature(rp, p, r), rel=1e-7)


@given(atoms_st, st.sampled_from([1.5, 2.0, 3.0]), st.sampled_from([1.0, 2.0, 3.5, INFINITY]))
@settings(max_examples=40, deadline=None)
def test_star_sandwich(atoms, p, r):
    rp = rearrange(StepProfile.from_atoms(atoms))
    idx = LorentzIndices(p, r)
    plain = lorentz_norm(rp, idx)
    star = star_lorentz_norm(rp, idx)
    assert plain <= star * (1 + 1e-9)
    assert star <= p / (p - 1) * plain * (1 + 1e-9)


def test_star_needs_p_above_one():
    with pytest.raises(InvalidIndices):
        star_lorentz_norm(ONE, LorentzIndices(1, 2))


def test_hardy_constant():
    assert LorentzIndices(2, 2).hardy_constant() == pytest.approx(1.0)
    assert LorentzIndices(2, INFINITY).hardy_constant() == 2.0  # r' = 1 gives p'
    assert LorentzIndices(2, 3).hardy_constant() == pytest.approx((2 / 1.5) ** (2 / 3))


# ---- parsing -----------------------------------------------------------------------


def test_parse_step_profile():
    assert parse_step_profile('{"type": "step", "atoms": [[2, 1], [1, 1]]}').atoms == [(2.0, 1.0), (1.0, 1.0)]
    for bad in ('{"type": "grid"}', '{"type": "step", "atoms": [[1]]}', "nope",
                '{"type": "step", "atoms": [[NaN, 1]]}'):
        with pytest.raises(ProfileError):
            parse_step_profile(bad)


def test_w_functional_on_a_finite_domain():
    rp = rearrange(StepProfile.from_atoms([(1.0, 2.0)]))
    # on the real line the zero tail after t = 2 contributes f**(2+) = 1
    assert w_functional(rp) == 1.0
    assert w_functional(rp, domain=2.0) == 0.0
    assert w_functional(rp, domain=4.0) == 1.0
    two = rearrange(StepProfile.from_atoms([(3.0, 1.0), (1.0, 1.0)]))
    assert w_functional(two, domain=2.0) == 2.0
    with pytest.raises(ProfileError):
        w_functional(two, domain=1.0)
