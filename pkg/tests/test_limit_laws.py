import math

import mpmath
import numpy as np
import pytest

from core.limit_laws import (
    LimitLawSpec,
    arcsine_cdf,
    arcsine_law,
    arcsine_pdf,
    limit_law,
    q_pdf,
    y_law,
)
from core.special_fn import gauss_tail, integrate
from utils.validators import DomainError


def test_arcsine_pdf_and_cdf():
    assert arcsine_pdf(0.5) == pytest.approx(2.0 / math.pi)
    assert arcsine_cdf(0.5) == pytest.approx(0.5, abs=1e-15)
    assert arcsine_cdf(1.0) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        arcsine_pdf(0.0)
    with pytest.raises(DomainError):
        arcsine_cdf(1.5)


def test_arcsine_boxes():
    # Boîtes extrêmes de largeur 0.01: 0.064 chacune
    law = arcsine_law()

    assert law.probability(0.0, 0.01) == pytest.approx(0.064, abs=5e-4)
    assert law.probability(0.99, 1.0) == pytest.approx(0.064, abs=5e-4)
    assert law.probability(0.0, 0.01) == pytest.approx(arcsine_cdf(0.01), abs=1e-12)


def test_q_pdf_against_mpmath():
    a, t = 0.7, 1.9
    expected = float(a / mpmath.sqrt(2 * mpmath.pi * t ** 3) * mpmath.exp(-a * a / (2 * t)))

    assert q_pdf(a, t) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(DomainError):
        q_pdf(0.0, 1.0)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_q_pdf_mass_with_gaussian_tail(a):
    upper = 50.0
    mass = integrate(lambda t: q_pdf(a, t), 0.0, upper)

    assert mass + gauss_tail(a / math.sqrt(upper)) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("a", [0.0, 0.5, 1.0, 2.0])
def test_y_law_normalized(a):
    law = y_law(a)

    assert law.atom_at(0.0) == pytest.approx(gauss_tail(a), abs=1e-15)
    assert law.total_mass() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_y_density_closed_form(a):
    law = y_law(a, grid_size=128)
    y = law.nodes
    closed = np.exp(-a * a / (2.0 * (1.0 - y))) / (np.pi * np.sqrt(y * (1.0 - y)))

    assert np.allclose(law.pdf, closed, rtol=1e-6, atol=1e-8)


def test_y_law_at_zero_is_arcsine():
    assert y_law(0.0).sup_distance(arcsine_law()) < 1e-12


@pytest.mark.parametrize("a", [0.0, -0.5, 0.5, -1.0, 1.0, -2.0, 2.0])
def test_limit_law_normalized(a):
    law = limit_law(LimitLawSpec(a=a))

    assert law.total_mass() == pytest.approx(1.0, abs=1e-6)
    assert law.params["a"] == a


def test_limit_law_reflection():
    left = limit_law(LimitLawSpec(a=-1.0))
    right = limit_law(LimitLawSpec(a=1.0))
    ys = np.linspace(0.0, 1.0, 41)

    assert left.atom_at(0.0) == pytest.approx(gauss_tail(1.0))
    assert right.atom_at(1.0) == pytest.approx(gauss_tail(1.0))
    assert np.allclose(right.cdf(ys), 1.0 - left.cdf(1.0 - ys, left=True), atol=1e-10)


def test_limit_spec_validation():
    with pytest.raises(ValueError):
        LimitLawSpec(a=math.inf)
    with pytest.raises(ValueError):
        LimitLawSpec(a=1.0, grid_size=8)


def test_arcsine_cdf_at_quarter():
    assert arcsine_cdf(0.25) == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_q_pdf_mode_and_laplace_transform():
    grid = np.linspace(0.01, 5.0, 4001)
    values = [q_pdf(2.0, t) for t in grid]
    assert grid[int(np.argmax(values))] == pytest.approx(4.0 / 3.0, abs=2e-3)

    transform = integrate(lambda t: math.exp(-2.0 * t) * q_pdf(1.0, t), 0.0, 50.0)
    assert transform == pytest.approx(math.exp(-2.0), abs=1e-6)


def test_small_level_is_close_to_arcsine():
    assert y_law(0.01).sup_distance(arcsine_law()) < 0.02


def test_limit_density_vanishes_near_one():
    density = y_law(1.0).density_at([0.999, 0.5])
    assert density[0] < density[1]
