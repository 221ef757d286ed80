"""
Fonctions spéciales mises à l'échelle et primitives de quadrature
"""

import math
from typing import Callable, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate as sp_integrate
from scipy import special

from config.settings import settings
from utils.validators import DomainError, FloatValidator, QuadratureError, validate_params

Number = Union[float, np.ndarray]


class QuadSpec(BaseModel):
    """Contrôle des quadratures adaptatives"""

    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(default_factory=lambda: settings.quad_abs_tol, gt=0)
    rel_tol: float = Field(default_factory=lambda: settings.quad_rel_tol, gt=0)
    max_subdivisions: int = Field(default_factory=lambda: settings.quad_max_subdivisions, ge=1)

    @classmethod
    def for_laws(cls) -> "QuadSpec":
        """Réglage par défaut des intégrales vectorielles (une composante par nœud)"""
        return cls(max_subdivisions=settings.law_max_subdivisions)

    def loosened(self, factor: float) -> "QuadSpec":
        """Copie avec des tolérances multipliées par `factor`"""
        return self.model_copy(update={
            "abs_tol": self.abs_tol * factor,
            "rel_tol": self.rel_tol * factor,
        })


@validate_params(z=FloatValidator(min_value=0.0))
def bessel_i0_scaled(z: float) -> float:
    """Retourne e^{-z} I0(z) pour z >= 0"""
    return float(special.i0e(z))


@validate_params(z=FloatValidator(min_value=0.0))
def bessel_i1_scaled(z: float) -> float:
    """Retourne e^{-z} I1(z) pour z >= 0"""
    return float(special.i1e(z))


@validate_params(a=FloatValidator(min_value=0.0, allow_inf=True))
def gauss_tail(a: float) -> float:
    """
    Masse gaussienne centrée P(|Z| <= a)

    Args:
        a: Demi-largeur de l'intervalle

    Returns:
        Probabilité dans [0, 1]
    """
    return float(special.erf(a / math.sqrt(2.0)))


def _quad_vec(g: Callable, lo: float, hi: float, spec: QuadSpec) -> Tuple[Number, float]:
    """Gauss-Kronrod 15 points adaptatif; lève QuadratureError en cas d'échec"""
    res, err, info = sp_integrate.quad_vec(
        g, lo, hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        norm="max",
        limit=spec.max_subdivisions,
        quadrature="gk15",
        full_output=True,
    )
    if info.status != 0:
        raise QuadratureError(
            f"Quadrature non convergée sur [{lo}, {hi}]: {info.message}",
            estimate=res,
            error_bound=float(err),
            subdivisions=len(info.intervals),
        )
    return res, float(err)


def _as_result(value: Number) -> Number:
    arr = np.asarray(value)
    return float(arr) if arr.ndim == 0 else arr


def integrate(f: Callable[[float], Number], a: float, b: float, spec: QuadSpec = None,
              singular_endpoints: Tuple[bool, bool] = (False, False)) -> Number:
    """
    Intégrale adaptative de f sur [a, b]

    Une extrémité marquée singulière peut porter une singularité en
    (t - a)^{-1/2} ou (b - t)^{-1/2}; la substitution u = a + v^2
    (resp. u = b - v^2) la supprime. `f` peut renvoyer un scalaire ou
    un tableau numpy (intégrande vectorielle).

    Args:
        f: Intégrande
        a: Borne inférieure
        b: Borne supérieure, a < b
        spec: Tolérances (réglage global par défaut)
        singular_endpoints: Extrémités (gauche, droite) singulières

    Returns:
        Estimation de l'intégrale
    """
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise DomainError(f"Intervalle d'intégration invalide [{a}, {b}]", field="a")

    spec = spec or QuadSpec()
    left, right = singular_endpoints

    if not left and not right:
        res, _ = _quad_vec(f, a, b, spec)
        return _as_result(res)

    def from_left(v):
        return f(a + v * v) * (2.0 * v)

    def from_right(v):
        return f(b - v * v) * (2.0 * v)

    if left and right:
        mid = 0.5 * (a + b)
        res_l, _ = _quad_vec(from_left, 0.0, math.sqrt(mid - a), spec)
        res_r, _ = _quad_vec(from_right, 0.0, math.sqrt(b - mid), spec)
        return _as_result(res_l + res_r)

    if left:
        res, _ = _quad_vec(from_left, 0.0, math.sqrt(b - a), spec)
    else:
        res, _ = _quad_vec(from_right, 0.0, math.sqrt(b - a), spec)
    return _as_result(res)
