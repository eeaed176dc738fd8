"""Distribution functions, rearrangements and rearrangement-invariant norms.

Everything here works on non-negative simple functions described by their
value distribution: a finite list of ``(value, mass)`` atoms.  The
non-increasing rearrangement of such a function is a right-continuous step
function on ``(0, total_mass)``, so every norm below reduces to a finite sum
of closed-form power integrals over its pieces.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

INFINITY = math.inf


class ProfileError(ValueError):
    """Raised for malformed step profiles or invalid evaluation points."""


class InvalidIndices(ValueError):
    """Raised for exponent combinations outside a formula's range."""


def _as_exponent(x, name: str) -> float:
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity", "∞"):
            return INFINITY
        x = float(x)
    x = float(x)
    if math.isnan(x):
        raise InvalidIndices(f"{name} is NaN")
    return x


@dataclass(frozen=True)
class StepProfile:
    """Value distribution of a non-negative simple function.

    ``values[i]`` is attained on a set of measure ``masses[i]``.  Use
    :func:`normalize` to coalesce, sort and drop empty atoms.
    """

    values: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        m = np.asarray(self.masses, dtype=float).reshape(-1)
        if v.shape != m.shape:
            raise ProfileError("values and masses differ in length")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(m))):
            raise ProfileError("atoms must be finite")
        bad = np.flatnonzero(m < 0)
        if bad.size:
            raise ProfileError(f"negative mass at atom {int(bad[0])}: {m[bad[0]]!r}")
        bad = np.flatnonzero(v < 0)
        if bad.size:
            raise ProfileError(f"negative value at atom {int(bad[0])}: {v[bad[0]]!r}")
        v.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "masses", m)

    @classmethod
    def from_atoms(cls, atoms: Iterable[Sequence[float]]) -> "StepProfile":
        atoms = [tuple(a) for a in atoms]
        for i, a in enumerate(atoms):
            if len(a) != 2:
                raise ProfileError(f"atom {i} is not a (value, mass) pair")
        if not atoms:
            return cls(np.zeros(0), np.zeros(0))
        v, m = zip(*atoms)
        return cls(np.array(v, dtype=float), np.array(m, dtype=float))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.values, self.masses)]

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    def __len__(self) -> int:
        return self.values.size

    def scaled(self, c: float) -> "StepProfile":
        if c < 0:
            raise ProfileError("scale factor must be non-negative")
        return StepProfile(self.values * c, self.masses)

    def to_json(self) -> dict:
        return {"type": "step", "atoms": [[a, b] for a, b in self.atoms]}


def normalize(profile: StepProfile) -> StepProfile:
    """Drop zero-mass atoms, merge equal values and sort values decreasingly."""
    keep = profile.masses > 0
    v = profile.values[keep]
    m = profile.masses[keep]
    if v.size == 0:
        return StepProfile(np.zeros(0), np.zeros(0))
    uniq, inverse = np.unique(v, return_inverse=True)
    if uniq.size == v.size:
        order = np.argsort(-v, kind="stable")
        return StepProfile(v[order], m[order])
    merged = np.array([math.fsum(m[inverse == k]) for k in range(uniq.size)])
    return StepProfile(uniq[::-1].copy(), merged[::-1].copy())


def distribution(profile: StepProfile, lam: float) -> float:
    """Measure of ``{|f| > lam}``."""
    if not lam > 0:
        raise ProfileError(f"level must be positive, got {lam!r}")
    return math.fsum(profile.masses[profile.values > lam])


@dataclass(frozen=True)
class RearrangementProfile:
    """Step form of the decreasing rearrangement ``f*``.

    ``f*(t) = values[i]`` for ``breakpoints[i] <= t < breakpoints[i+1]`` and
    ``f*(t) = 0`` beyond the last breakpoint.  ``cumulative[i]`` is the
    integral of ``f*`` over ``(0, breakpoints[i])``.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    cumulative: np.ndarray = field(repr=False)

    @property
    def pieces(self) -> int:
        return self.values.size

    @property
    def support(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def is_zero(self) -> bool:
        return self.values.size == 0

    def scaled(self, c: float) -> "RearrangementProfile":
        if c <= 0:
            raise ProfileError("scale factor must be positive")
        return RearrangementProfile(self.breakpoints, self.values * c, self.cumulative * c)


def rearrange(profile: StepProfile) -> RearrangementProfile:
    """Decreasing rearrangement of a step profile (zero-valued atoms are dropped)."""
    p = normalize(profile)
    keep = p.values > 0
    v = p.values[keep]
    m = p.masses[keep]
    t = np.concatenate(([0.0], np.cumsum(m)))
    c = np.concatenate(([0.0], np.cumsum(v * m)))
    for a in (t, v, c):
        a.setflags(write=False)
    return RearrangementProfile(t, v, c)


def from_decreasing(values: Sequence[float], breakpoints: Sequence[float]) -> RearrangementProfile:
    """Build a rearrangement directly from piece values and breakpoints ``0 < t1 < ...``."""
    v = np.asarray(values, dtype=float)
    t = np.asarray(breakpoints, dtype=float)
    if t.size != v.size:
        raise ProfileError("need one right breakpoint per piece")
    widths = np.diff(np.concatenate(([0.0], t)))
    return rearrange(StepProfile(v, widths))


def _check_t(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise ProfileError("evaluation points must be positive")
    return arr


def _piece_index(rp: RearrangementProfile, t: np.ndarray) -> np.ndarray:
    # index i with breakpoints[i] <= t < breakpoints[i+1]; i == pieces means tail
    return np.searchsorted(rp.breakpoints, t, side="right") - 1


def evaluate_star(rp: RearrangementProfile, t):
    """``f*(t)``; accepts scalars or arrays."""
    arr = _check_t(t)
    idx = _piece_index(rp, arr)
    vals = np.concatenate((rp.values, [0.0]))
    out = vals[np.minimum(idx, rp.pieces)]
    return float(out) if np.ndim(out) == 0 else out


def integral_star(rp: RearrangementProfile, t):
    """``∫_0^t f*``, exact for the step profile."""
    arr = np.asarray(t, dtype=float)
    idx = np.minimum(_piece_index(rp, arr), rp.pieces)
    vals = np.concatenate((rp.values, [0.0]))
    out = rp.cumulative[idx] + vals[idx] * (arr - rp.breakpoints[idx])
    return float(out) if np.ndim(out) == 0 else out


def hardy_average(rp: RearrangementProfile, t):
    """``f**(t) = (1/t) ∫_0^t f*``."""
    arr = _check_t(t)
    out = integral_star(rp, arr) / arr
    return float(out) if np.ndim(out) == 0 else out


def hardy_derivative(rp: RearrangementProfile, t: float) -> float:
    """Derivative of ``f**`` at a non-breakpoint ``t``: ``(f*(t) - f**(t)) / t``."""
    t = float(_check_t(t))
    if rp.pieces and np.any(rp.breakpoints[1:] == t):
        raise ProfileError(f"f** is not differentiable at the breakpoint t={t!r}")
    return (evaluate_star(rp, t) - hardy_average(rp, t)) / t


def _scaled_power_sum(values: np.ndarray, weights: np.ndarray, r: float) -> tuple[float, float]:
    """Return ``(top, S)`` with ``sum(weights * values**r) == top**r * S``.

    Factoring out the largest value keeps ``values**r`` finite for large ``r``.
    """
    top = float(values[0])
    return top, float(np.sum(weights * (values / top) ** r))


def lp_norm(rp: RearrangementProfile, p) -> float:
    p = _as_exponent(p, "p")
    if p < 1:
        raise InvalidIndices(f"p must be >= 1, got {p}")
    if rp.is_zero():
        return 0.0
    if math.isinf(p):
        return float(rp.values[0])
    top, s = _scaled_power_sum(rp.values, rp.widths, p)
    return top * s ** (1.0 / p)


def weak_lp_norm(rp: RearrangementProfile, p) -> float:
    """``sup_s s^{1/p} f*(s)``; the sup is the limit at a right breakpoint."""
    p = _as_exponent(p, "p")
    if not 1 <= p < INFINITY:
        raise InvalidIndices(f"weak L^p needs 1 <= p < inf, got {p}")
    if rp.is_zero():
        return 0.0
    return float(np.max(rp.values * rp.breakpoints[1:] ** (1.0 / p)))


def weak_lp_norm_levels(profile: StepProfile, p) -> float:
    """``sup_λ λ d(λ)^{1/p}`` evaluated from the distribution function alone."""
    p = _as_exponent(p, "p")
    if not 1 <= p < INFINITY:
        raise InvalidIndices(f"weak L^p needs 1 <= p < inf, got {p}")
    levels = np.unique(profile.values[(profile.values > 0) & (profile.masses > 0)])
    best = 0.0
    for lam in levels:
        # sup over λ in [next level, lam) is the left limit at lam
        d = math.fsum(profile.masses[profile.values >= lam])
        best = max(best, float(lam) * d ** (1.0 / p))
    return best


@dataclass(frozen=True)
class LorentzIndices:
    p: float
    r: float = None

    def __post_init__(self):
        p = _as_exponent(self.p, "p")
        r = p if self.r is None else _as_exponent(self.r, "r")
        if not 1 <= p < INFINITY:
            raise InvalidIndices(f"p must lie in [1, inf), got {p}")
        if not r >= 1:
            raise InvalidIndices(f"r must lie in [1, inf], got {r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)

    @property
    def p_conj(self) -> float:
        if self.p == 1:
            raise InvalidIndices("p' is undefined for p = 1")
        return self.p / (self.p - 1)

    @property
    def r_conj(self) -> float:
        if math.isinf(self.r):
            return 1.0
        if self.r == 1:
            return INFINITY
        return self.r / (self.r - 1)

    def hardy_constant(self) -> float:
        """``(p'/r')^{1/r'}``, the constant bounding ``t^{1/p} f**(t)`` by the L^{p,r} norm."""
        rc = self.r_conj
        if math.isinf(rc):
            return 1.0
        return (self.p_conj / rc) ** (1.0 / rc)


class Method(enum.Enum):
    CLOSED_FORM = "closed_form"
    LAYER_CAKE = "layer_cake"


def lorentz_norm(rp: RearrangementProfile, idx: LorentzIndices, method: Method = Method.CLOSED_FORM) -> float:
    p, r = idx.p, idx.r
    if math.isinf(r):
        return weak_lp_norm(rp, p)
    if rp.is_zero():
        return 0.0
    t = rp.breakpoints
    if method is Method.CLOSED_FORM:
        # ∫ [s^{1/p} v]^r ds/s over a piece = v^r (p/r)(t_i^{r/p} - t_{i-1}^{r/p})
        w = (p / r) * np.diff(t ** (r / p))
        top, s = _scaled_power_sum(rp.values, w, r)
    else:
        # p ∫ λ^{r-1} d(λ)^{r/p} dλ with d = t_i on [v_{i+1}, v_i)
        v = rp.values
        top = float(v[0])
        u = v / top
        nxt = np.concatenate((u[1:], [0.0]))
        s = float(np.sum((p / r) * t[1:] ** (r / p) * (u**r - nxt**r)))
    return top * s ** (1.0 / r)


def lp_norm_layer_cake(rp: RearrangementProfile, p: float) -> float:
    """``(p ∫ λ^{p-1} d(λ) dλ)^{1/p}`` evaluated level by level."""
    if p < 1 or math.isinf(p):
        raise InvalidIndices(f"layer cake needs 1 <= p < inf, got {p}")
    if rp.is_zero():
        return 0.0
    v = rp.values
    top = float(v[0])
    u = v / top
    nxt = np.concatenate((u[1:], [0.0]))
    return top * float(np.sum(rp.breakpoints[1:] * (u**p - nxt**p))) ** (1.0 / p)


def w_functional(rp: RearrangementProfile, domain: float | None = None) -> float:
    """``sup_t [f**(t) - f*(t)]``, over ``0 < t < domain`` when a finite
    domain measure is given (a grid function living on its box).

    On a piece the gap is ``(C_{i-1} - v_i t_{i-1}) / t``, decreasing in
    ``t``, so the sup is the right limit at some breakpoint ``t_i``:
    ``C_i / t_i - v_{i+1}`` with ``v_{k+1} = 0``.
    """
    if rp.is_zero():
        return 0.0
    t = rp.breakpoints[1:]
    nxt = np.concatenate((rp.values[1:], [0.0]))
    gap = rp.cumulative[1:] / t - nxt
    if domain is not None:
        if not domain > 0:
            raise ProfileError(f"domain measure must be positive, got {domain!r}")
        if domain < rp.support * (1 - 1e-12):
            raise ProfileError("profile support exceeds the domain measure")
        # the right limit at t_i only exists inside the domain
        gap = gap[t < domain * (1 - 1e-12)]
        if gap.size == 0:
            return 0.0
    return float(np.max(gap))


def star_lorentz_norm(rp: RearrangementProfile, idx: LorentzIndices) -> float:
    """Lorentz functional with ``f**`` in place of ``f*``; needs ``p > 1``."""
    if idx.p <= 1:
        raise InvalidIndices("the f**-based functional is infinite unless p > 1")
    from .kernels import star_lorentz_rows

    if rp.is_zero():
        return 0.0
    return float(star_lorentz_rows(rp.values[None, :], rp.breakpoints[None, :], idx.p, idx.r)[0])


def _reject_constant(name: str):
    raise ProfileError(f"non-finite number {name!r} in profile file")


def parse_step_profile(text: str) -> StepProfile:
    """Parse ``{"type": "step", "atoms": [[value, mass], ...]}``."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") != "step":
        raise ProfileError('expected an object with "type": "step"')
    atoms = doc.get("atoms")
    if not isinstance(atoms, list):
        raise ProfileError('"atoms" must be a list of [value, mass] pairs')
    for i, a in enumerate(atoms):
        if not (isinstance(a, list) and len(a) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in a)):
            raise ProfileError(f"atom {i} is not a numeric [value, mass] pair")
    return StepProfile.from_atoms(atoms)
