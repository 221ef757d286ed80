import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.mixed_law import (
    MixedLaw,
    chebyshev_angles,
    chebyshev_nodes,
    fejer_weights,
    resolved_grid_size,
)
from utils.validators import DomainError


def _arcsine(grid_size=256):
    return MixedLaw.from_density(lambda y: 1.0 / (np.pi * np.sqrt(y * (1.0 - y))), (0.0, 1.0), grid_size, poles=True)


def test_nodes_are_increasing_and_interior():
    nodes = chebyshev_nodes(0.0, 1.0, 64)

    assert np.all(np.diff(nodes) > 0)
    assert nodes[0] > 0.0 and nodes[-1] < 1.0
    assert np.allclose(nodes + nodes[::-1], 1.0, atol=1e-15)


def test_fejer_weights_integrate_polynomials():
    n = 64
    x = -np.cos(chebyshev_angles(n))
    w = fejer_weights(n)

    assert w.sum() == pytest.approx(2.0, abs=1e-14)
    assert np.dot(w, x ** 2) == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert np.dot(w, x ** 7) == pytest.approx(0.0, abs=1e-14)
    assert np.all(w > 0)


def test_resolved_grid_size():
    assert resolved_grid_size(512, 1000.0) == 512
    assert resolved_grid_size(512, 1e4) == 1600
    assert resolved_grid_size(512, 1e12) == 8192
    assert resolved_grid_size(32) == 64


def test_uniform_density_is_exact():
    law = MixedLaw.from_density(np.ones_like, (0.0, 1.0), 64)

    assert law.total_mass() == pytest.approx(1.0, abs=1e-13)
    assert law.cdf(0.3) == pytest.approx(0.3, abs=1e-12)
    assert law.density_at(0.7)[0] == pytest.approx(1.0, abs=1e-12)


def test_linear_density_cdf():
    law = MixedLaw.from_density(lambda y: 2.0 * y, (0.0, 1.0), 64)
    ys = np.linspace(0.0, 1.0, 11)

    assert np.allclose(law.cdf(ys), ys ** 2, atol=1e-12)


def test_arcsine_cdf_exact_with_poles():
    law = _arcsine()
    ys = np.linspace(0.0, 1.0, 21)

    assert np.allclose(law.cdf(ys), 2.0 / np.pi * np.arcsin(np.sqrt(ys)), atol=1e-12)
    assert law.total_mass() == pytest.approx(1.0, abs=1e-13)


def test_atoms_left_and_right_limits():
    law = MixedLaw.from_density(lambda y: 0.5 * np.ones_like(y), (0.0, 1.0), 64,
                                atoms=((0.0, 0.25), (1.0, 0.25)))

    assert law.atom_at(0.0) == pytest.approx(0.25)
    assert law.cdf(0.0) == pytest.approx(0.25, abs=1e-12)
    assert law.cdf(0.0, left=True) == pytest.approx(0.0, abs=1e-12)
    assert law.cdf(1.0, left=True) == pytest.approx(0.75, abs=1e-12)
    assert law.probability(0.0, 0.5) == pytest.approx(0.5, abs=1e-12)


def test_atoms_are_merged():
    law = MixedLaw.point_mass(0.5)
    merged = MixedLaw(((0.5, 0.5), (0.5 + 1e-16, 0.5)), law.nodes, law.pdf, law.support)

    assert merged.atoms == ((0.5, 1.0),)


def test_quantile_of_arcsine():
    law = _arcsine(512)
    probs = np.linspace(0.05, 0.95, 19)

    assert np.allclose(law.quantile(probs), np.sin(np.pi * probs / 2.0) ** 2, atol=1e-5)


def test_point_mass_samples_exactly(rng):
    law = MixedLaw.point_mass(0.3)

    assert np.all(law.sample(rng, 100) == 0.3)


def test_sample_mean_of_arcsine(rng):
    samples = _arcsine().sample(rng, 20000)

    assert np.all((samples >= 0.0) & (samples <= 1.0))
    assert samples.mean() == pytest.approx(0.5, abs=0.01)


def test_reflect_identity():
    law = MixedLaw.from_density(lambda y: 1.2 * (1.0 - y), (0.0, 1.0), 64, atoms=((0.0, 0.4),))
    mirrored = law.reflect()
    ys = np.linspace(0.0, 1.0, 17)

    assert mirrored.atom_at(1.0) == pytest.approx(0.4)
    assert np.allclose(mirrored.cdf(1.0 - ys), 1.0 - law.cdf(ys, left=True), atol=1e-12)


def test_expectation_matches_moments():
    law = MixedLaw.from_density(lambda y: 2.0 * y, (0.0, 1.0), 64, atoms=())

    assert law.expectation(lambda y: y) == pytest.approx(2.0 / 3.0, abs=1e-13)


def test_mixture_and_incompatible_grids():
    a = MixedLaw.from_density(np.ones_like, (0.0, 1.0), 64)
    b = MixedLaw.point_mass(1.0, 64)
    mix = MixedLaw.mixture([a, b], [0.5, 0.5])

    assert mix.total_mass() == pytest.approx(1.0, abs=1e-13)
    assert mix.atom_at(1.0) == pytest.approx(0.5)

    with pytest.raises(DomainError):
        MixedLaw.mixture([a, MixedLaw.point_mass(1.0, 128)], [0.5, 0.5])
    with pytest.raises(DomainError):
        MixedLaw.mixture([a, _arcsine(64)], [0.5, 0.5])
    with pytest.raises(DomainError):
        MixedLaw.mixture([a, b], [0.7, 0.7])


def test_invalid_laws_are_rejected():
    nodes = chebyshev_nodes(0.0, 1.0, 64)

    with pytest.raises(DomainError):
        MixedLaw((), nodes, -np.ones(64), (0.0, 1.0))
    with pytest.raises(DomainError):
        MixedLaw((), nodes[:10], np.ones(10), (0.0, 1.0))
    with pytest.raises(DomainError):
        MixedLaw(((1.5, 0.1),), nodes, np.ones(64), (0.0, 1.0))


def test_sup_distance():
    law = _arcsine()

    assert law.sup_distance(law) == 0.0
    assert law.sup_distance(MixedLaw.point_mass(0.0)) > 0.9


def test_dict_round_trip():
    law = MixedLaw.from_density(lambda y: 1.25 * y, (0.2, 1.0), 64, atoms=((0.0, 0.4),), params={"law": "test"})
    restored = MixedLaw.from_dict(law.to_dict())

    assert restored.support == law.support
    assert restored.params == {"law": "test"}
    assert restored.sup_distance(law) < 1e-14


def test_dict_without_support_rebuilds_it():
    law = _arcsine(64)
    data = law.to_dict()
    data["params"].pop("support")
    restored = MixedLaw.from_dict(data)

    assert restored.poles
    assert np.allclose(restored.support, (0.0, 1.0), atol=1e-12)


def test_malformed_dict():
    with pytest.raises(DomainError):
        MixedLaw.from_dict({"atoms": [], "grid": [{"y": 0.5}]})


@given(st.floats(min_value=0.0, max_value=5.0))
@settings(max_examples=25, deadline=None)
def test_affine_densities(slope):
    norm = 1.0 + 0.5 * slope
    law = MixedLaw.from_density(lambda y: (1.0 + slope * y) / norm, (0.0, 1.0), 64)
    ys = np.linspace(0.0, 1.0, 9)
    exact = (ys + 0.5 * slope * ys ** 2) / norm

    assert law.total_mass() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(law.cdf(ys), exact, atol=1e-12)
    assert np.all(np.diff(law.cdf(ys)) >= 0)


def test_total_mass_is_checked_on_construction():
    nodes = chebyshev_nodes(0.0, 1.0, 64)

    with pytest.raises(DomainError):
        MixedLaw(((0.0, 0.5),), nodes, np.ones(64), (0.0, 1.0))
    with pytest.raises(DomainError):
        MixedLaw.from_density(lambda y: 0.9 * np.ones_like(y), (0.0, 1.0), 64)
    with pytest.raises(DomainError):
        MixedLaw.from_dict({"atoms": [{"y": 0.3, "mass": 0.7}],
                            "grid": [{"y": float(y), "pdf": 0.0} for y in nodes]})

    law = MixedLaw(((0.0, 0.5),), nodes, np.full(64, 0.5), (0.0, 1.0))
    assert law.total_mass() == pytest.approx(1.0, abs=1e-13)
