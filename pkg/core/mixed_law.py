"""
Lois mixtes sur [0, 1]: atomes + densité échantillonnée

La partie continue est portée par les nœuds de Tchebychev de première
espèce de son support [lo, hi], avec y = lo + (hi - lo)(1 - cos θ)/2 et
dy = sqrt((y - lo)(hi - y)) dθ. Deux régimes:

- densité à pôles en 1/sqrt aux extrémités (arcsinus, f_a): g = pdf·sqrt((y - lo)(hi - y))
  est régulière en θ, masses et répartition par sa série en cosinus
  (trapèzes en θ);
- densité finie aux extrémités (lois exactes à horizon fini): pdf est
  développée en polynômes de Tchebychev, masses par la règle de Fejér.

Les extrémités ne sont jamais évaluées.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft

from config.settings import settings
from utils.validators import DomainError

MIN_GRID_SIZE = 64
_ATOM_MERGE_TOL = 1e-14
_LOC_TOL = 1e-12
_CHUNK = 2_000_000


def chebyshev_angles(n: int) -> np.ndarray:
    """Angles θ_k = π(k + 1/2)/n"""
    return np.pi * (np.arange(n) + 0.5) / n


def chebyshev_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    """Nœuds de Tchebychev de première espèce, croissants, regroupés aux bords"""
    return lo + (hi - lo) * 0.5 * (1.0 - np.cos(chebyshev_angles(n)))


def fejer_weights(n: int) -> np.ndarray:
    """Poids de la première règle de Fejér sur [-1, 1] aux nœuds chebyshev_angles(n)"""
    moments = np.zeros(n)
    moments[0] = 1.0
    j = np.arange(2, n, 2)
    moments[j] = -1.0 / (j * j - 1.0)
    return fft.dct(moments, type=3) * (2.0 / n)


def resolved_grid_size(grid_size: int, lambda_T: float = 0.0, width: float = 1.0) -> int:
    """
    Taille de grille effective pour une couche limite de largeur 1/(λT)

    Args:
        grid_size: Taille demandée
        lambda_T: Produit λ·T de la loi
        width: Longueur du support de la partie continue

    Returns:
        max(grid_size, ⌈16·sqrt(λT/width)⌉), bornée par settings.max_grid_size
    """
    needed = grid_size
    if lambda_T > 0 and width > 0:
        needed = max(grid_size, math.ceil(16.0 * math.sqrt(lambda_T / width)))
    return int(min(max(needed, MIN_GRID_SIZE), max(settings.max_grid_size, grid_size)))


def _merge_atoms(atoms: Iterable[Tuple[float, float]]) -> Tuple[Tuple[float, float], ...]:
    merged: List[List[float]] = []
    for loc, mass in sorted((float(l), float(m)) for l, m in atoms):
        if mass <= 0.0:
            continue
        if merged and abs(merged[-1][0] - loc) < _ATOM_MERGE_TOL:
            merged[-1][1] += mass
        else:
            merged.append([loc, mass])
    return tuple((loc, mass) for loc, mass in merged)


@dataclass(frozen=True)
class MixedLaw:
    """Loi de probabilité sur [0, 1]: atomes + densité sur grille"""

    atoms: Tuple[Tuple[float, float], ...]
    nodes: np.ndarray
    pdf: np.ndarray
    support: Tuple[float, float]
    params: Dict[str, Any] = field(default_factory=dict)
    poles: bool = False

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        pdf = np.array(self.pdf, dtype=float)
        lo, hi = (float(v) for v in self.support)

        if nodes.ndim != 1 or nodes.shape != pdf.shape:
            raise DomainError("Grille et densité de tailles différentes", field="nodes")
        if nodes.size < MIN_GRID_SIZE:
            raise DomainError(f"La grille doit contenir au moins {MIN_GRID_SIZE} nœuds", field="nodes")
        if not (-_LOC_TOL <= lo < hi <= 1.0 + _LOC_TOL):
            raise DomainError(f"Support invalide [{lo}, {hi}]", field="support")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("La grille doit être strictement croissante", field="nodes")
        if not np.all(np.isfinite(pdf)) or np.any(pdf < 0):
            raise DomainError("La densité doit être finie et positive", field="pdf")

        atoms = _merge_atoms(self.atoms)
        for loc, mass in atoms:
            if not (-_LOC_TOL <= loc <= 1.0 + _LOC_TOL) or mass > 1.0 + 1e-12:
                raise DomainError(f"Atome invalide ({loc}, {mass})", field="atoms")

        nodes.setflags(write=False)
        pdf.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "pdf", pdf)
        object.__setattr__(self, "support", (lo, hi))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "poles", bool(self.poles))

        mass = self.total_mass()
        if abs(mass - 1.0) > settings.mass_tol:
            raise DomainError(f"Masse totale {mass:.8f} au lieu de 1", field="pdf")

    # Constructeurs

    @classmethod
    def from_density(cls, density: Callable[[np.ndarray], np.ndarray], support: Tuple[float, float],
                     grid_size: int, atoms: Sequence[Tuple[float, float]] = (),
                     params: Optional[Dict[str, Any]] = None, poles: bool = False) -> "MixedLaw":
        """Échantillonner une densité vectorisée sur les nœuds du support"""
        lo, hi = support
        nodes = chebyshev_nodes(lo, hi, grid_size)
        pdf = np.clip(np.asarray(density(nodes), dtype=float), 0.0, None)
        return cls(tuple(atoms), nodes, pdf, (lo, hi), params or {}, poles)

    @classmethod
    def point_mass(cls, loc: float, grid_size: int = MIN_GRID_SIZE,
                   params: Optional[Dict[str, Any]] = None) -> "MixedLaw":
        """Masse unité en `loc`, densité nulle"""
        nodes = chebyshev_nodes(0.0, 1.0, grid_size)
        return cls(((loc, 1.0),), nodes, np.zeros_like(nodes), (0.0, 1.0), params or {})

    @classmethod
    def mixture(cls, laws: Sequence["MixedLaw"], weights: Sequence[float],
                params: Optional[Dict[str, Any]] = None) -> "MixedLaw":
        """Mélange de lois partageant la même grille"""
        if len(laws) != len(weights) or not laws:
            raise DomainError("Autant de poids que de lois sont requis", field="weights")
        if abs(sum(weights) - 1.0) > 1e-12 or min(weights) < 0:
            raise DomainError("Les poids doivent être positifs et de somme 1", field="weights")

        first = laws[0]
        for law in laws[1:]:
            if law.grid_size != first.grid_size or not np.allclose(law.support, first.support, rtol=0, atol=1e-14):
                raise DomainError("Les lois mélangées doivent partager leur grille", field="laws")
            if law.poles != first.poles:
                raise DomainError("Les lois mélangées doivent partager leur régime aux extrémités", field="laws")

        pdf = sum(w * law.pdf for w, law in zip(weights, laws))
        atoms = [(loc, w * mass) for w, law in zip(weights, laws) for loc, mass in law.atoms]
        return cls(tuple(atoms), first.nodes, pdf, first.support, params or dict(first.params), first.poles)

    # Quantités dérivées

    @property
    def grid_size(self) -> int:
        return int(self.nodes.size)

    @property
    def atom_total(self) -> float:
        return float(sum(mass for _, mass in self.atoms))

    def atom_at(self, loc: float, tol: float = 1e-12) -> float:
        """Masse de l'atome en `loc` (0 s'il n'existe pas)"""
        return float(sum(mass for l, mass in self.atoms if abs(l - loc) <= tol))

    @cached_property
    def _angles(self) -> np.ndarray:
        return chebyshev_angles(self.grid_size)

    @cached_property
    def _half_width(self) -> float:
        lo, hi = self.support
        return 0.5 * (hi - lo)

    @cached_property
    def _weights(self) -> np.ndarray:
        if self.poles:
            # dy = demi-largeur · sin θ dθ, trapèzes en θ de pas π/n
            return (np.pi / self.grid_size) * self._half_width * np.sin(self._angles)
        return self._half_width * fejer_weights(self.grid_size)

    @cached_property
    def _cosine_coefficients(self) -> np.ndarray:
        # Série en cos(jθ) de g (pôles) ou de pdf (densité finie)
        values = self.pdf * self._half_width * np.sin(self._angles) if self.poles else self.pdf
        coeffs = fft.dct(values, type=2) / self.grid_size
        coeffs[0] *= 0.5
        return coeffs

    @cached_property
    def _primitive_coefficients(self) -> np.ndarray:
        """b_m tels que la répartition continue vaille Σ b_m (1 - cos mθ)"""
        a = self._cosine_coefficients * self._half_width
        n = a.size
        b = np.zeros(n + 1)
        b[1] += a[0]
        if n > 1:
            b[2] += 0.25 * a[1]
        j = np.arange(2, n)
        np.add.at(b, j + 1, a[2:] / (2.0 * (j + 1)))
        np.add.at(b, j - 1, -a[2:] / (2.0 * (j - 1)))
        return b

    def continuous_mass(self) -> float:
        """Masse de la partie absolument continue"""
        return float(np.dot(self._weights, self.pdf))

    def total_mass(self) -> float:
        return self.atom_total + self.continuous_mass()

    def _theta_of(self, y: np.ndarray) -> np.ndarray:
        lo, hi = self.support
        ratio = 1.0 - 2.0 * (y - lo) / (hi - lo)
        return np.arccos(np.clip(ratio, -1.0, 1.0))

    def _continuous_cdf(self, y: np.ndarray) -> np.ndarray:
        theta = self._theta_of(y)
        out = np.empty_like(theta)
        if self.poles:
            coeffs = self._cosine_coefficients
            j = np.arange(1, coeffs.size)
            step = max(1, _CHUNK // coeffs.size)
            for start in range(0, theta.size, step):
                th = theta[start:start + step]
                out[start:start + step] = coeffs[0] * th + np.sin(np.outer(th, j)) @ (coeffs[1:] / j)
        else:
            b = self._primitive_coefficients
            m = np.arange(b.size)
            step = max(1, _CHUNK // b.size)
            for start in range(0, theta.size, step):
                th = theta[start:start + step]
                out[start:start + step] = b.sum() - np.cos(np.outer(th, m)) @ b
        return np.clip(out, 0.0, self.continuous_mass())

    def cdf(self, y, left: bool = False):
        """
        Fonction de répartition P(Y <= y), ou P(Y < y) si `left`

        Args:
            y: Point ou tableau de points
            left: Limite à gauche (atomes en y exclus)

        Returns:
            Valeur(s) de la fonction de répartition
        """
        arr = np.atleast_1d(np.asarray(y, dtype=float))
        flat = arr.ravel()
        values = self._continuous_cdf(flat)
        for loc, mass in self.atoms:
            hit = flat > loc if left else flat >= loc
            values = values + mass * hit
        values = values.reshape(arr.shape)
        return float(values[0]) if np.ndim(y) == 0 else values

    def probability(self, a: float, b: float) -> float:
        """Masse de l'intervalle fermé [a, b]"""
        return float(self.cdf(b) - self.cdf(a, left=True))

    def expectation(self, h: Callable[[np.ndarray], np.ndarray]) -> float:
        """E[h(Y)] par la même règle que la masse continue"""
        value = float(np.dot(self._weights * self.pdf, h(self.nodes)))
        if self.atoms:
            locs = np.array([loc for loc, _ in self.atoms])
            masses = np.array([mass for _, mass in self.atoms])
            value += float(np.dot(masses, h(locs)))
        return value

    def density_at(self, y) -> np.ndarray:
        """Densité interpolée par la série en cosinus (nulle hors support)"""
        arr = np.atleast_1d(np.asarray(y, dtype=float))
        lo, hi = self.support
        theta = self._theta_of(arr)
        coeffs = self._cosine_coefficients
        series = np.cos(np.outer(theta, np.arange(coeffs.size))) @ coeffs
        if self.poles:
            scale = self._half_width * np.sin(theta)
            nearest = self.pdf[np.clip(np.searchsorted(self.nodes, arr), 0, self.grid_size - 1)]
            with np.errstate(divide="ignore", invalid="ignore"):
                values = np.where(scale > 0, series / np.where(scale > 0, scale, 1.0), nearest)
        else:
            values = series
        values = np.where((arr < lo) | (arr > hi), 0.0, np.clip(values, 0.0, None))
        return values

    def _cdf_table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        lo, hi = self.support
        theta = np.linspace(0.0, np.pi, 8 * self.grid_size + 1)
        ys = lo + (hi - lo) * 0.5 * (1.0 - np.cos(theta))
        extra = [loc for loc, _ in self.atoms] + [0.0, 1.0]
        ys = np.unique(np.concatenate([ys, extra]))
        right = np.maximum.accumulate(self.cdf(ys))
        left = np.minimum(np.maximum.accumulate(self.cdf(ys, left=True)), right)
        return ys, left, right

    @cached_property
    def _quantile_table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._cdf_table()

    def quantile(self, p):
        """Quantile inf{y : F(y) >= p}"""
        probs = np.atleast_1d(np.asarray(p, dtype=float))
        ys, left, right = self._quantile_table
        idx = np.clip(np.searchsorted(right, probs, side="left"), 0, ys.size - 1)
        prev = np.maximum(idx - 1, 0)
        span = left[idx] - right[prev]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(span > 0, (probs - right[prev]) / np.where(span > 0, span, 1.0), 1.0)
        inside = probs <= left[idx]
        out = np.where(inside, ys[prev] + np.clip(frac, 0.0, 1.0) * (ys[idx] - ys[prev]), ys[idx])
        return float(out[0]) if np.ndim(p) == 0 else out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Échantillonnage par inversion de la fonction de répartition"""
        return self.quantile(rng.random(size))

    def reflect(self) -> "MixedLaw":
        """Loi de 1 - Y"""
        lo, hi = self.support
        atoms = tuple((1.0 - loc, mass) for loc, mass in self.atoms)
        return MixedLaw(atoms, 1.0 - self.nodes[::-1], self.pdf[::-1], (1.0 - hi, 1.0 - lo), dict(self.params), self.poles)

    def sup_distance(self, other: "MixedLaw", n_points: int = 2001) -> float:
        """Distance uniforme entre fonctions de répartition (limites à gauche incluses)"""
        points = np.concatenate([
            np.linspace(0.0, 1.0, n_points),
            [loc for loc, _ in self.atoms],
            [loc for loc, _ in other.atoms],
        ])
        right = np.abs(self.cdf(points) - other.cdf(points))
        left = np.abs(self.cdf(points, left=True) - other.cdf(points, left=True))
        return float(max(right.max(), left.max()))

    # Sérialisation

    def to_dict(self) -> Dict[str, Any]:
        params = dict(self.params)
        params["support"] = list(self.support)
        params["poles"] = self.poles
        return {
            "atoms": [{"y": loc, "mass": mass} for loc, mass in self.atoms],
            "grid": [{"y": float(y), "pdf": float(v)} for y, v in zip(self.nodes, self.pdf)],
            "params": params,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MixedLaw":
        """Relire une loi sérialisée par to_dict"""
        try:
            atoms = tuple((float(a["y"]), float(a["mass"])) for a in data["atoms"])
            nodes = np.array([float(p["y"]) for p in data["grid"]])
            pdf = np.array([float(p["pdf"]) for p in data["grid"]])
        except (KeyError, TypeError, ValueError) as e:
            raise DomainError(f"Loi sérialisée invalide: {e}", field="grid") from e

        params = dict(data.get("params", {}))
        support = params.pop("support", None)
        poles = bool(params.pop("poles", False))
        if support is None:
            # Reconstruire [lo, hi] depuis les nœuds extrêmes
            cos_edge = math.cos(math.pi / (2 * nodes.size))
            total, spread = nodes[0] + nodes[-1], (nodes[-1] - nodes[0]) / cos_edge
            support = (0.5 * (total - spread), 0.5 * (total + spread))
        return cls(atoms, nodes, pdf, tuple(support), params, poles)
