"""
Lois limites (T → ∞): arcsinus, densité d'atteinte brownienne q_a, famille Y_a
"""

import math
from dataclasses import replace

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config.settings import settings
from core.mixed_law import MIN_GRID_SIZE, MixedLaw, resolved_grid_size
from core.special_fn import QuadSpec, gauss_tail, integrate
from utils.validators import FloatValidator, validate_params


class LimitLawSpec(BaseModel):
    """Paramètre limite a = lim (c²T/λ)^{-1/2} x et taille de grille"""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    a: float
    grid_size: int = Field(default_factory=lambda: settings.grid_size, ge=MIN_GRID_SIZE)


def _arcsine_pdf(y):
    return 1.0 / (np.pi * np.sqrt(y * (1.0 - y)))


@validate_params(y=FloatValidator(min_value=0.0, max_value=1.0, strict_min=True, strict_max=True))
def arcsine_pdf(y: float) -> float:
    """Densité 1/(π sqrt(y(1-y))) sur (0, 1)"""
    return float(_arcsine_pdf(y))


@validate_params(y=FloatValidator(min_value=0.0, max_value=1.0))
def arcsine_cdf(y: float) -> float:
    """Loi de l'arcsinus (2/π) arcsin sqrt(y)"""
    return 2.0 / math.pi * math.asin(math.sqrt(y))


def _q_pdf(a: float, t):
    return a / np.sqrt(2.0 * np.pi * t ** 3) * np.exp(-a * a / (2.0 * t))


@validate_params(a=FloatValidator(min_value=0.0, strict_min=True),
                 t=FloatValidator(min_value=0.0, strict_min=True))
def q_pdf(a: float, t: float) -> float:
    """Densité du temps d'atteinte du niveau a par le mouvement brownien"""
    return float(_q_pdf(a, t))


def _f_density(a: float, y: np.ndarray, spec: QuadSpec) -> np.ndarray:
    """f_a(y) par la forme intégrale explicite, avec u = (1 - y) v"""
    y = np.asarray(y, dtype=float)
    k = a * a / (2.0 * (1.0 - y))

    # Facteur e^{-k} sorti de l'intégrale: toutes les composantes restent d'ordre 1
    def integrand(v):
        return np.exp(-k * (1.0 - v) / v) / (v ** 1.5 * np.sqrt(1.0 - v))

    integral = integrate(integrand, 0.0, 1.0, spec, singular_endpoints=(False, True))
    return a * np.exp(-k) / (np.sqrt(2.0 * np.pi ** 3 * y) * (1.0 - y)) * integral


def arcsine_law(grid_size: int = None) -> MixedLaw:
    """Loi de l'arcsinus comme loi mixte sans atome"""
    return MixedLaw.from_density(_arcsine_pdf, (0.0, 1.0), grid_size or settings.grid_size,
                                 params={"law": "arcsine", "a": 0.0}, poles=True)


@validate_params(a=FloatValidator(min_value=0.0))
def y_law(a: float, grid_size: int = None, spec: QuadSpec = None) -> MixedLaw:
    """
    Loi de Y_a: atome m_a en 0 et densité f_a

    Args:
        a: Niveau, a >= 0
        grid_size: Taille minimale de grille
        spec: Tolérances de la quadrature de f_a

    Returns:
        Loi mixte sur [0, 1]
    """
    grid_size = grid_size or settings.grid_size
    if a == 0:
        return arcsine_law(grid_size)

    spec = spec or QuadSpec.for_laws()
    # La densité varie sur une échelle 1 - y ~ a² près de 1
    n = resolved_grid_size(grid_size, 1.0 / (a * a))
    return MixedLaw.from_density(
        lambda y: _f_density(a, y, spec), (0.0, 1.0), n,
        atoms=((0.0, gauss_tail(a)),), params={"law": "limit", "a": a}, poles=True,
    )


def limit_law(spec: LimitLawSpec, quad: QuadSpec = None) -> MixedLaw:
    """Loi limite du temps d'occupation: Y_{-a} si a <= 0, 1 - Y_a si a >= 0"""
    if spec.a <= 0:
        law = y_law(-spec.a, spec.grid_size, quad)
    else:
        law = y_law(spec.a, spec.grid_size, quad).reflect()
    return replace(law, params={"law": "limit", "a": spec.a})
