import math

import mpmath
import numpy as np
import pytest

from core.limit_laws import arcsine_law
from core.params import TelegraphParams, V0
from core.simulator import (
    EmpiricalSummary,
    PathRecord,
    ProbeFunction,
    ks_statistic,
    occupation,
    replica_stream,
    sample_path,
    simulate_occupations,
)
from core.telegraph_laws import (
    box_probability,
    hitting_law,
    offset_law,
    origin_law,
    phi,
    phi_integral_oracle,
    psi,
    telegraph_expectation,
)
from utils.validators import DomainError


def _phi_mp(z):
    z = mpmath.mpf(z)
    return float(0.5 * mpmath.exp(-z) * (mpmath.besseli(0, z) + mpmath.besseli(1, z)))


def test_phi_at_origin_and_against_mpmath():
    assert phi(3.0, 0.0) == pytest.approx(0.5, abs=1e-15)
    for lambda_T, t in [(0.1, 0.3), (1.0, 1.0), (50.0, 0.7), (1000.0, 1.0)]:
        assert phi(lambda_T, t) == pytest.approx(_phi_mp(lambda_T * t), rel=1e-12)


@pytest.mark.parametrize("lambda_T", [0.1, 1.0, 10.0, 1000.0])
def test_phi_matches_integral_representation(lambda_T):
    for t in (0.25, 1.0):
        assert phi_integral_oracle(lambda_T, t) == pytest.approx(phi(lambda_T, t), abs=1e-8)


def test_phi_rejects_bad_arguments():
    with pytest.raises(DomainError):
        phi(0.0, 0.5)
    with pytest.raises(DomainError):
        phi(1.0, -0.5)


def test_psi_is_symmetric():
    for y in (0.0, 0.1, 0.37):
        assert psi(20.0, y) == pytest.approx(psi(20.0, 1.0 - y), rel=1e-14)


def test_origin_atoms_at_long_horizons():
    # λ = c = 1: l'atome 2φ_T(1) vaut 0.025 (T = 1000) et 0.008 (T = 10000)
    law_1000 = origin_law(TelegraphParams(lam=1.0, c=1.0, T=1000.0, v0=V0.PLUS))
    law_10000 = origin_law(TelegraphParams(lam=1.0, c=1.0, T=10000.0, v0=V0.PLUS))

    assert law_1000.atom_at(1.0) == pytest.approx(0.025, abs=5e-4)
    assert law_10000.atom_at(1.0) == pytest.approx(0.008, abs=5e-4)
    assert law_1000.atom_at(0.0) == 0.0


@pytest.mark.parametrize("T, first, last", [(1000.0, 0.052, 0.077), (10000.0, 0.060, 0.068)])
def test_origin_box_probabilities(T, first, last):
    law = origin_law(TelegraphParams(lam=1.0, c=1.0, T=T, v0=V0.PLUS))

    assert box_probability(law, 0.0, 0.01) == pytest.approx(first, abs=5e-4)
    assert box_probability(law, 0.99, 1.0) == pytest.approx(last, abs=5e-4)


def test_origin_minus_and_symmetric_atoms():
    p = TelegraphParams(lam=2.0, c=1.0, T=3.0, v0=V0.MINUS)
    atom = 2.0 * phi(6.0, 1.0)

    assert origin_law(p).atom_at(0.0) == pytest.approx(atom)
    symmetric = origin_law(p.with_v0(V0.SYMMETRIC))
    assert symmetric.atom_at(0.0) == pytest.approx(0.5 * atom)
    assert symmetric.atom_at(1.0) == pytest.approx(0.5 * atom)


@pytest.mark.parametrize("lambda_T", [0.5, 1.0, 10.0, 1000.0, 1e4])
def test_origin_law_normalized(lambda_T):
    law = origin_law(TelegraphParams(lam=lambda_T, c=1.0, T=1.0, v0=V0.PLUS))
    assert law.total_mass() == pytest.approx(1.0, abs=1e-6)


def test_box_probability_rejects_bad_box():
    law = origin_law(TelegraphParams(lam=1.0, c=1.0, T=1.0))
    with pytest.raises(DomainError):
        box_probability(law, 0.5, 0.5)
    with pytest.raises(DomainError):
        box_probability(law, -0.1, 0.5)


def _q_plus_mp(u, lam, t0):
    r = mpmath.sqrt(u * u - t0 * t0)
    return float(lam * t0 * mpmath.exp(-lam * u) * mpmath.besseli(1, lam * r) / r)


def _q_minus_mp(u, lam, t0):
    """Premier renversement en τ, puis départ + à distance T0 + τ"""
    u, lam, t0 = mpmath.mpf(u), mpmath.mpf(lam), mpmath.mpf(t0)

    def after_reversal(tau):
        w, s0 = u - tau, t0 + tau
        r = mpmath.sqrt(max((w - s0) * (w + s0), 0))
        if r == 0:
            q_plus = lam * lam * s0 * mpmath.exp(-lam * w) / 2
        else:
            q_plus = lam * s0 * mpmath.exp(-lam * w) * mpmath.besseli(1, lam * r) / r
        return lam * mpmath.exp(-lam * tau) * q_plus

    direct = lam / 2 * mpmath.exp(-lam * u)
    return float(direct + mpmath.quad(after_reversal, [0, (u - t0) / 2]))


def _first_passage(path, c, level):
    """Premier instant où la trajectoire atteint `level` > 0 (inf si jamais avant T)"""
    start, velocity, durations = path.segments(c)
    end = start + velocity * durations
    reached = np.flatnonzero(end >= level)
    if reached.size == 0:
        return math.inf
    k = reached[0]
    sigma = np.concatenate([[0.0], path.reversal_times])
    return float(sigma[k] + (level - start[k]) / velocity[k])


def test_hitting_density_against_mpmath():
    p = TelegraphParams(lam=1.3, c=2.0, T=1.0, v0=V0.PLUS)
    plus, minus = hitting_law(p, -2.0), hitting_law(p.with_v0(V0.MINUS), -2.0)

    assert plus.t0 == pytest.approx(1.0)
    for u in (1.5, 2.5, 40.0):
        assert plus.density(u) == pytest.approx(_q_plus_mp(u, 1.3, 1.0), rel=1e-10)
        assert minus.density(u) == pytest.approx(_q_minus_mp(u, 1.3, 1.0), rel=1e-8)


def test_hitting_density_continuous_at_threshold():
    p = TelegraphParams(lam=1.0, c=1.0, T=1.0, v0=V0.PLUS)
    for v0 in (V0.PLUS, V0.MINUS):
        law = hitting_law(p.with_v0(v0), -1.0)
        assert law.density(1.0) == pytest.approx(law.density(1.0 + 1e-6), rel=1e-4)
        assert law.density(0.5) == 0.0

    minus = hitting_law(p.with_v0(V0.MINUS), -1.0)
    assert minus.density(1.0) == pytest.approx(0.5 * math.exp(-1.0), rel=1e-14)


def test_minus_hitting_cdf_against_simulation():
    p = TelegraphParams(lam=1.0, c=1.0, T=3.0, v0=V0.MINUS)
    n = 20000
    times = np.array([_first_passage(sample_path(p, replica_stream(21, i)), p.c, 1.0) for i in range(n)])
    law = hitting_law(p, -1.0)

    for t in (1.5, 2.0, 3.0):
        expected = law.cdf(t)
        sd = math.sqrt(expected * (1.0 - expected) / n)
        assert np.mean(times <= t) == pytest.approx(expected, abs=4.0 * sd)


@pytest.mark.parametrize("v0", [V0.PLUS, V0.MINUS])
def test_hitting_law_is_proper(v0):
    law = hitting_law(TelegraphParams(lam=1.0, c=1.0, T=1.0, v0=v0), -1.0)

    assert law.total_mass() == pytest.approx(1.0, abs=1e-8)
    assert law.cdf(0.5) == 0.0
    assert law.cdf(1.0) == pytest.approx(law.atom_at_t0)


def test_hitting_law_rejects_bad_inputs():
    p = TelegraphParams(lam=1.0, c=1.0, T=1.0, v0=V0.PLUS)
    with pytest.raises(DomainError):
        hitting_law(p, 0.5)
    with pytest.raises(DomainError):
        hitting_law(p.with_v0(V0.SYMMETRIC), -0.5)


def test_offset_short_horizon_is_point_mass():
    p = TelegraphParams(lam=1.0, c=1.0, T=0.5, v0=V0.PLUS)

    assert offset_law(p, -1.0).atom_at(0.0) == pytest.approx(1.0)
    assert offset_law(p, 1.0).atom_at(1.0) == pytest.approx(1.0)


def test_offset_rejects_origin():
    with pytest.raises(DomainError):
        offset_law(TelegraphParams(lam=1.0, c=1.0, T=1.0), 0.0)


@pytest.mark.parametrize("x", [-1.0, -0.25, 1.0])
@pytest.mark.parametrize("T", [2.0, 5.0, 20.0])
def test_offset_law_normalized(x, T):
    law = offset_law(TelegraphParams(lam=1.0, c=1.0, T=T, v0=V0.SYMMETRIC), x)
    assert law.total_mass() == pytest.approx(1.0, abs=1e-6)


def test_offset_plus_has_ballistic_atom():
    p = TelegraphParams(lam=1.0, c=1.0, T=5.0, v0=V0.PLUS)
    law = offset_law(p, -1.0)

    assert law.atom_at(0.8) == pytest.approx(2.0 * math.exp(-1.0) * phi(1.0, 4.0), rel=1e-12)
    assert law.support[1] == pytest.approx(0.8)


def test_offset_duality_holds_pathwise():
    # Trajectoire miroir: 1 + X' > 0 exactement quand -1 + X < 0
    p = TelegraphParams(lam=1.0, c=1.0, T=5.0, v0=V0.PLUS)
    probe = ProbeFunction.heaviside()
    for index in range(200):
        times = sample_path(p, replica_stream(13, index)).reversal_times
        plus_left = occupation(PathRecord(1, times, p.T), p, -1.0, probe)
        minus_right = occupation(PathRecord(-1, times, p.T), p.with_v0(V0.MINUS), 1.0, probe)

        assert minus_right == pytest.approx(1.0 - plus_left, abs=1e-12)


def test_minus_origin_law_is_reflected_plus():
    p = TelegraphParams(lam=2.0, c=0.5, T=7.0, v0=V0.PLUS)
    plus = origin_law(p)
    minus = origin_law(p.with_v0(V0.MINUS))
    ys = np.linspace(0.0, 1.0, 41)

    assert minus.atom_at(0.0) == pytest.approx(plus.atom_at(1.0), rel=1e-14)
    assert np.allclose(minus.cdf(ys), 1.0 - plus.cdf(1.0 - ys, left=True), atol=1e-10)


@pytest.mark.parametrize("x, v0", [(-1.0, V0.MINUS), (-1.0, V0.PLUS), (1.0, V0.MINUS)])
def test_offset_atoms_against_simulation(x, v0):
    p = TelegraphParams(lam=1.0, c=1.0, T=5.0, v0=v0)
    n = 20000
    values = simulate_occupations(p, x, ProbeFunction.heaviside(), n, seed=17)
    law = offset_law(p, x)
    edge = 0.0 if x < 0 else 1.0

    expected = law.atom_at(edge)
    sd = math.sqrt(expected * (1.0 - expected) / n)
    assert np.mean(values == edge) == pytest.approx(expected, abs=4.0 * sd)


@pytest.mark.parametrize("x, v0", [(1.0, V0.PLUS), (-1.0, V0.MINUS), (-1.0, V0.PLUS), (1.0, V0.MINUS)])
def test_offset_law_against_simulation(x, v0):
    p = TelegraphParams(lam=1.0, c=1.0, T=5.0, v0=v0)
    values = simulate_occupations(p, x, ProbeFunction.heaviside(), 20000, seed=7)
    summary = EmpiricalSummary.from_values(values, seed=7)

    assert ks_statistic(summary, offset_law(p, x)) < 0.02


def test_telegraph_expectation_conserves_mass():
    p = TelegraphParams(lam=1.5, c=2.0, T=5.0)
    assert telegraph_expectation(p, lambda z: 1.0, 0.3, 2.0) == pytest.approx(1.0, abs=1e-8)


def test_telegraph_expectation_small_rate_is_dalembert():
    p = TelegraphParams(lam=1e-10, c=1.0, T=5.0)
    x, t = 0.4, 1.3
    expected = 0.5 * (math.cos(x + t) + math.cos(x - t))

    assert telegraph_expectation(p, math.cos, x, t) == pytest.approx(expected, abs=1e-6)


def test_telegraph_expectation_requires_symmetric_start():
    with pytest.raises(DomainError):
        telegraph_expectation(TelegraphParams(lam=1.0, c=1.0, T=1.0, v0=V0.PLUS), math.cos, 0.0, 0.5)
    assert telegraph_expectation(TelegraphParams(lam=1.0, c=1.0, T=1.0), math.cos, 0.2, 0.0) == math.cos(0.2)


def test_phi_scaling_and_psi_edge():
    assert phi(3.7 * 2.0, 0.4) == pytest.approx(phi(2.0, 3.7 * 0.4), rel=1e-13)
    assert psi(7.0, 0.0) == pytest.approx(7.0 * phi(7.0, 1.0), rel=1e-14)


@pytest.mark.parametrize("lam", [0.5, 1.0, 5.0])
@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("T", [1.0, 10.0, 100.0])
def test_origin_law_mass_over_parameter_grid(lam, c, T):
    law = origin_law(TelegraphParams(lam=lam, c=c, T=T, v0=V0.PLUS))
    assert law.total_mass() == pytest.approx(1.0, abs=1e-6)


def test_origin_law_approaches_arcsine():
    arcsine = arcsine_law()
    distances = [
        origin_law(TelegraphParams(lam=1.0, c=1.0, T=T, v0=V0.PLUS)).sup_distance(arcsine)
        for T in (10.0, 100.0, 1000.0, 10000.0)
    ]
    assert np.all(np.diff(distances) < 0)


@pytest.mark.parametrize("t0", [0.1, 1.0, 5.0])
@pytest.mark.parametrize("lam", [0.5, 1.0, 5.0])
@pytest.mark.parametrize("v0", [V0.PLUS, V0.MINUS])
def test_hitting_normalization_grid(t0, lam, v0):
    law = hitting_law(TelegraphParams(lam=lam, c=1.0, T=1.0, v0=v0), -t0)
    assert law.total_mass() == pytest.approx(1.0, abs=1e-6)
