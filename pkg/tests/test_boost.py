import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import bisect_root
from dwm.boost import (
    BeyondCriticalVelocity,
    boosted_initial_state,
    comoving_boost,
    dispersion,
    effective_depth,
    momentum_potential,
    momentum_potential_extrema,
    solve_boost,
)
from dwm.core import LatticeModel, gaussian_state, participation_ratio

def test_rest_frame():
    bp = solve_boost(0.0)
    assert (bp.qa, bp.gamma, bp.mass_ratio) == (0.0, 0.0, 1.0)


def test_fig4_boost():
    bp = solve_boost(1.5)
    assert math.sin(bp.qa) == 0.75
    assert bp.sin_qa == 0.75
    assert bp.mass_ratio == pytest.approx(1 / math.sqrt(1 - 0.5625), rel=1e-15)
    assert bp.mass_ratio == pytest.approx(1.5119, abs=1e-3)


def test_beyond_critical_velocity():
    with pytest.raises(BeyondCriticalVelocity):
        solve_boost(2.2)
    with pytest.raises(BeyondCriticalVelocity):
        solve_boost(-2.0000001)
    assert math.isinf(solve_boost(2.0).mass_ratio)


@given(v=st.floats(-1.999, 1.999))
def test_boost_invariants(v):
    bp = solve_boost(v)
    assert abs(bp.qa) <= math.pi / 2
    assert math.sin(bp.qa) == pytest.approx(v / 2, abs=1e-15)
    assert bp.mass_ratio * math.cos(bp.qa) == pytest.approx(1.0, rel=1e-9)
    assert bp.mass_ratio >= 1.0
    assert bp.gamma == pytest.approx(-v * bp.qa + 2 * (1 - math.cos(bp.qa)), abs=1e-12)
    neg = solve_boost(-v)
    assert neg.qa == -bp.qa
    assert neg.mass_ratio == bp.mass_ratio


def test_comoving_boost_is_reversed_velocity():
    assert comoving_boost(1.5).qa == -solve_boost(1.5).qa


def test_continuum_limit_of_boost():
    # small v: q ~ m v = v/2, gamma ~ -m v^2 / 2 = -v^2/4
    v = 1e-4
    bp = solve_boost(v)
    assert bp.qa == pytest.approx(v / 2, rel=1e-8)
    assert bp.gamma == pytest.approx(-v * v / 4, rel=1e-6)


# ---- effective depth

def test_effective_depth_examples():
    assert effective_depth(0.97, 1.0) == pytest.approx(0.97, rel=1e-14)
    assert effective_depth(0.97, 1.5119) == pytest.approx(1.27, abs=0.01)
    assert effective_depth(1.0, 3.0) == pytest.approx(2.0, rel=1e-14)


@given(nu=st.floats(0.01, 10), r1=st.floats(1, 5), r2=st.floats(1, 5))
def test_effective_depth_monotone(nu, r1, r2):
    lo, hi = sorted((r1, r2))
    a, b = effective_depth(nu, lo), effective_depth(nu, hi)
    assert nu * (1 - 1e-12) <= a <= b * (1 + 1e-12)
    assert a * (a + 1) == pytest.approx(lo * nu * (nu + 1), rel=1e-12)


@given(n1=st.floats(0.01, 10), n2=st.floats(0.01, 10), r=st.floats(1, 5))
def test_effective_depth_monotone_in_nu(n1, n2, r):
    lo, hi = sorted((n1, n2))
    assert effective_depth(lo, r) <= effective_depth(hi, r) * (1 + 1e-12)


# ---- dispersion and W(k)

def test_dispersion_examples():
    bp = solve_boost(1.2)
    assert dispersion(0.0, bp) == 0.0
    assert dispersion(-2 * bp.qa, bp) == pytest.approx(2 * 1.2 * bp.qa, abs=1e-14)


@given(k=st.floats(-20, 20))
def test_rest_dispersion_is_tight_binding_band(k):
    e = dispersion(k, solve_boost(0.0))
    assert e == pytest.approx(2 * (1 - math.cos(k)), abs=1e-13)
    assert -1e-15 <= e <= 4 + 1e-13


def test_dispersion_unbounded_when_drifting():
    bp = solve_boost(0.4)
    k = np.linspace(-200, 200, 4001)
    e = dispersion(k, bp)
    assert e.min() < -70 and e.max() > 70


def test_momentum_potential_examples():
    assert momentum_potential(0.0, 0.7) == 0.0
    k = np.linspace(-10, 10, 101)
    w = momentum_potential(k, 0.0)
    assert np.all((w >= 0) & (w <= 4 + 1e-15))
    assert momentum_potential(2 * math.pi, 0.3) == pytest.approx(-2 * math.pi * 0.3, abs=1e-14)


def test_extrema_at_rest():
    ext = momentum_potential_extrema(0.0)
    mins = sorted(e.k for e in ext if e.kind == "min")
    maxs = sorted(e.k for e in ext if e.kind == "max")
    assert np.allclose(mins, [-2 * math.pi, 0.0, 2 * math.pi], atol=1e-12)
    assert np.allclose(maxs, [-math.pi, math.pi], atol=1e-12)
    assert all(abs(e.w) < 1e-12 for e in ext if e.kind == "min")
    assert all(e.w == pytest.approx(4.0) for e in ext if e.kind == "max")


def test_extrema_degenerate_at_critical_velocity():
    ext = momentum_potential_extrema(2.0)
    assert ext
    assert all(e.kind == "inflection" for e in ext)
    assert any(abs(e.k - math.pi / 2) < 1e-12 for e in ext)
    assert momentum_potential_extrema(2.0001) == []


def test_extremum_location_matches_bisection_oracle():
    k0 = bisect_root(lambda k: 2 * math.sin(k) - 0.4, -0.5, 1.0)
    assert k0 == pytest.approx(0.2014, abs=1e-4)
    mins = [e for e in momentum_potential_extrema(0.4) if e.kind == "min" and abs(e.k) < 1]
    assert len(mins) == 1
    assert mins[0].k == pytest.approx(k0, abs=1e-11)


@given(v=st.floats(0.01, 1.99))
def test_one_min_one_max_per_period(v):
    ext = momentum_potential_extrema(v)
    in_period = [e for e in ext if 0 <= e.k < 2 * math.pi]
    assert sorted(e.kind for e in in_period) == ["max", "min"]


def test_well_gap_shrinks_towards_critical_velocity():
    gaps = []
    for v in (0.2, 0.8, 1.4, 1.9, 1.99):
        ext = [e for e in momentum_potential_extrema(v) if 0 <= e.k < 2 * math.pi]
        w = {e.kind: e.w for e in ext}
        gaps.append(w["max"] - w["min"])
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


# ---- boosted states

def test_boosted_state_is_pure_phase():
    m = LatticeModel(60)
    phi = gaussian_state(m, 4.0, 5.0)
    assert np.array_equal(boosted_initial_state(phi, solve_boost(0.0)).amplitudes, phi.amplitudes)
    out = boosted_initial_state(phi, solve_boost(1.5))
    assert np.allclose(np.abs(out.amplitudes), np.abs(phi.amplitudes), rtol=0, atol=1e-16)
    assert participation_ratio(out) == pytest.approx(participation_ratio(phi), rel=1e-14)
    k = np.angle(out.amplitudes[61] / out.amplitudes[60])
    assert k == pytest.approx(math.asin(0.75))
