"""
Lois exactes à horizon fini du temps d'occupation du processus du télégraphe
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import special

from config.settings import settings
from core.mixed_law import MixedLaw, chebyshev_nodes, resolved_grid_size
from core.params import TelegraphParams, V0
from core.special_fn import QuadSpec, integrate
from utils.validators import DomainError, FloatValidator, validate_params

logger = logging.getLogger(__name__)

# Seuil relatif sous lequel Q± est remplacée par sa limite en u = T0
_NEAR_T0 = 1e-8


def _phi(z):
    """φ évaluée en z = λT·t (vectorisée, sans validation)"""
    return 0.5 * (special.i0e(z) + special.i1e(z))


def _psi(lambda_T: float, y):
    a = _phi(lambda_T * np.asarray(y, dtype=float))
    b = _phi(lambda_T * (1.0 - np.asarray(y, dtype=float)))
    return 2.0 * lambda_T * np.minimum(a, b) * np.maximum(a, b)


@validate_params(lambda_T=FloatValidator(min_value=0.0, strict_min=True),
                 t=FloatValidator(min_value=0.0))
def phi(lambda_T: float, t: float) -> float:
    """φ_T(t) = ½ e^{-λTt} (I0(λTt) + I1(λTt))"""
    return float(_phi(lambda_T * t))


@validate_params(lambda_T=FloatValidator(min_value=0.0, strict_min=True),
                 t=FloatValidator(min_value=0.0, strict_min=True))
def phi_integral_oracle(lambda_T: float, t: float, spec: QuadSpec = None) -> float:
    """
    φ_T(t) par quadrature directe de son intégrale de définition

    Args:
        lambda_T: Produit λ·T
        t: Point d'évaluation, t > 0
        spec: Tolérances

    Returns:
        (1/(4πλT)) ∫_0^t (1 - e^{-2λTu}) / (u^{3/2} sqrt(t - u)) du
    """
    two_lt = 2.0 * lambda_T

    def integrand(u):
        return -np.expm1(-two_lt * u) / (two_lt * u ** 1.5 * np.sqrt(t - u))

    value = integrate(integrand, 0.0, t, spec, singular_endpoints=(True, True))
    return value / (2.0 * math.pi)


@validate_params(lambda_T=FloatValidator(min_value=0.0, strict_min=True),
                 y=FloatValidator(min_value=0.0, max_value=1.0))
def psi(lambda_T: float, y: float) -> float:
    """ψ_T(y) = 2λT φ_T(y) φ_T(1 - y)"""
    return float(_psi(lambda_T, y))


def _describe(p: TelegraphParams, law: str, x: float) -> dict:
    return {**p.describe(), "law": law, "x": x}


def origin_law(p: TelegraphParams, grid_size: int = None) -> MixedLaw:
    """Loi de η_T(0): atome 2φ_T(1) à l'extrémité, densité ψ_T"""
    lambda_T = p.lambda_T
    n = resolved_grid_size(grid_size or settings.grid_size, lambda_T)
    atom = 2.0 * float(_phi(lambda_T))

    if p.v0 is V0.PLUS:
        atoms = ((1.0, atom),)
    elif p.v0 is V0.MINUS:
        atoms = ((0.0, atom),)
    else:
        atoms = ((0.0, 0.5 * atom), (1.0, 0.5 * atom))

    return MixedLaw.from_density(
        lambda y: _psi(lambda_T, y), (0.0, 1.0), n, atoms, _describe(p, "origin", 0.0)
    )


def box_probability(law: MixedLaw, a: float, b: float) -> float:
    """Probabilité de la boîte fermée [a, b] sous la loi exacte"""
    if not (0.0 <= a < b <= 1.0):
        raise DomainError(f"Boîte invalide [{a}, {b}]", field="a")
    return law.probability(a, b)


def _hitting_density(u, lam: float, t0: float, plus: bool):
    """Q±(u) en formes de Bessel mises à l'échelle (nulle avant T0)"""
    u = np.asarray(u, dtype=float)
    gap = np.maximum(u - t0, 0.0)
    total = u + t0
    r = np.sqrt(gap * total)
    near = gap < _NEAR_T0 * t0
    safe_r = np.where(near, 1.0, r)
    z = lam * safe_r
    # e^{-λu} I_n(λr) = ie_n(λr) e^{-λ(u - r)} avec u - r = T0² / (u + r)
    decay = np.exp(-lam * t0 * t0 / (u + r))

    if plus:
        body = lam * t0 * decay * special.i1e(z) / safe_r
        limit = 0.5 * lam * lam * t0 * math.exp(-lam * t0)
    else:
        # Départ -: Q- = e^{-λu} (λT0 I0(λr)/(u + T0) + r I1(λr)/(u + T0)²),
        # transformée ((λ + s - κ)/λ) e^{-κT0}
        body = decay * (lam * t0 * special.i0e(z) / total + safe_r * special.i1e(z) / (total * total))
        limit = 0.5 * lam * math.exp(-lam * t0)

    values = np.where(near, limit, body)
    return np.where(u < t0, 0.0, values)


@dataclass(frozen=True)
class HittingLaw:
    """Loi du premier passage: atome e^{-λT0} en T0 (départ +) et densité Q±"""

    t0: float
    atom_at_t0: float
    lam: float
    sign: int

    def density(self, u):
        values = _hitting_density(u, self.lam, self.t0, self.sign > 0)
        return float(values) if np.ndim(u) == 0 else values

    def density_mass(self, upper: float = math.inf, spec: QuadSpec = None) -> float:
        """∫_{T0}^{upper} Q(u) du; pour upper infini on pose u = T0 / w²"""
        if upper <= self.t0:
            return 0.0
        plus = self.sign > 0
        if math.isinf(upper):
            t0 = self.t0

            def mapped(w):
                return _hitting_density(t0 / (w * w), self.lam, t0, plus) * (2.0 * t0 / w ** 3)

            return integrate(mapped, 0.0, 1.0, spec)

        return integrate(lambda u: _hitting_density(u, self.lam, self.t0, plus),
                         self.t0, upper, spec, singular_endpoints=(True, False))

    def total_mass(self, spec: QuadSpec = None) -> float:
        return self.atom_at_t0 + self.density_mass(math.inf, spec)

    def cdf(self, t: float, spec: QuadSpec = None) -> float:
        if t < self.t0:
            return 0.0
        return self.atom_at_t0 + self.density_mass(t, spec)


def hitting_law(p: TelegraphParams, x: float) -> HittingLaw:
    """Loi du temps d'atteinte du niveau -x > 0 depuis l'origine"""
    if not (np.isfinite(x) and x < 0):
        raise DomainError(f"hitting_law attend x < 0 (reçu {x})", field="x")
    if p.v0 is V0.SYMMETRIC:
        raise DomainError("hitting_law attend une vitesse initiale + ou -", field="v0")

    t0 = p.hitting_threshold(x)
    plus = p.v0 is V0.PLUS
    atom = math.exp(-p.lam * t0) if plus else 0.0
    return HittingLaw(t0=t0, atom_at_t0=atom, lam=p.lam, sign=1 if plus else -1)


def _offset_negative(p: TelegraphParams, x: float, grid_size: int, spec: QuadSpec) -> MixedLaw:
    """Loi de η±_T(x) pour x < 0 et v0 = ±"""
    lam, T = p.lam, p.T
    t0 = p.hitting_threshold(x)
    params = _describe(p, "offset", x)

    # Horizon trop court: le niveau n'est jamais atteint
    if T <= t0:
        return MixedLaw.point_mass(0.0, grid_size, params)

    plus = p.v0 is V0.PLUS
    b = 1.0 - t0 / T
    n = resolved_grid_size(grid_size, p.lambda_T, b)
    nodes = chebyshev_nodes(0.0, b, n)
    horizon_left = (1.0 - nodes) * T  # L = (1 - y)T > T0
    span = horizon_left - t0

    def convolution(v):
        u = t0 + v * span
        return _hitting_density(u, lam, t0, plus) * _phi(lam * (horizon_left - u)) * span

    conv = integrate(convolution, 0.0, 1.0, spec, singular_endpoints=(True, False))

    bracket = _hitting_density(horizon_left, lam, t0, plus) + lam * conv
    if plus:
        bracket = bracket + lam * math.exp(-lam * t0) * _phi(lam * span)
    pdf = np.clip(2.0 * T * _phi(p.lambda_T * nodes) * bracket, 0.0, None)

    hit_mass = integrate(lambda u: _hitting_density(u, lam, t0, plus), t0, T, spec,
                         singular_endpoints=(True, False))
    atoms = []
    if plus:
        ballistic = math.exp(-lam * t0)
        atoms.append((b, 2.0 * ballistic * float(_phi(lam * (T - t0)))))
        hit_mass += ballistic
    atoms.append((0.0, max(1.0 - hit_mass, 0.0)))

    return MixedLaw(tuple(atoms), nodes, pdf, (0.0, b), params)


def offset_law(p: TelegraphParams, x: float, grid_size: int = None, spec: QuadSpec = None) -> MixedLaw:
    """
    Loi de η_T(x) pour un départ décalé x ≠ 0

    Pour x > 0 on utilise la dualité η±_T(x) = 1 - η∓_T(-x) en loi;
    le départ symétrique est le mélange ½-½ des deux signes.

    Args:
        p: Paramètres du processus
        x: Point de départ, non nul
        grid_size: Taille minimale de la grille de densité
        spec: Tolérances des quadratures

    Returns:
        Loi mixte sur [0, 1]
    """
    if not np.isfinite(x) or x == 0:
        raise DomainError("offset_law attend x ≠ 0 (utiliser origin_law en 0)", field="x")

    grid_size = grid_size or settings.grid_size
    spec = spec or QuadSpec.for_laws()

    if p.v0 is V0.SYMMETRIC:
        plus = offset_law(p.with_v0(V0.PLUS), x, grid_size, spec)
        minus = offset_law(p.with_v0(V0.MINUS), x, grid_size, spec)
        return MixedLaw.mixture([plus, minus], [0.5, 0.5], _describe(p, "offset", x))

    logger.debug(f"🔍 Loi décalée x={x}, λ={p.lam}, c={p.c}, T={p.T}, v0={p.v0.value}")

    if x > 0:
        mirrored = _offset_negative(p.with_v0(p.v0.opposite()), -x, grid_size, spec).reflect()
        return replace(mirrored, params=_describe(p, "offset", x))

    return _offset_negative(p, x, grid_size, spec)


def telegraph_expectation(p: TelegraphParams, g0: Callable[[float], float], x: float, t: float,
                          spec: QuadSpec = None) -> float:
    """
    v(x, t) = E[g0(x + X_t)] par la solution explicite de l'équation du télégraphe

    Args:
        p: Paramètres (v0 symétrique)
        g0: Donnée initiale bornée continue
        x: Position
        t: Temps, t >= 0
        spec: Tolérances

    Returns:
        Valeur de v(x, t)
    """
    if p.v0 is not V0.SYMMETRIC:
        raise DomainError("La solution explicite concerne le départ symétrique", field="v0")
    if not (np.isfinite(t) and t >= 0):
        raise DomainError(f"Temps invalide {t}", field="t")
    if t == 0:
        return float(g0(x))

    lam, c = p.lam, p.c
    front = 0.5 * math.exp(-lam * t) * (g0(x + c * t) + g0(x - c * t))

    def kernel(u):
        r = math.sqrt((t - u) * (t + u))
        z = lam * r
        decay = math.exp(-lam * u * u / (t + r))  # e^{-λt} e^{λr}
        ratio = 0.5 * lam if r == 0.0 else float(special.i1e(z)) / r
        return lam * decay * (float(special.i0e(z)) + t * ratio)

    body = integrate(lambda u: g0(x + c * u) * kernel(u), -t, t, spec)
    return float(front + 0.5 * body)
