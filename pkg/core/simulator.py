"""
Simulation événementielle du processus du télégraphe et de ses temps d'occupation
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from config.settings import settings
from core.mixed_law import MixedLaw
from core.params import TelegraphParams
from utils.helpers import load_csv_file, load_json_file, save_csv_file, save_json_file, sidecar_path
from utils.validators import ConfigError, DomainError, IntegerValidator, validate_data, validate_params

logger = logging.getLogger(__name__)

GAUSS_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)
_EDGE_TOL = 1e-9

# Domaines de flux indépendants
_REPLICA_DOMAIN = 0
_ENDPOINT_DOMAIN = 1

_SIDECAR_COUNTS = ("n_runs", "seed", "exact_zero", "exact_one")


def replica_stream(seed: int, index: int, domain: int = _REPLICA_DOMAIN) -> np.random.Generator:
    """Flux aléatoire déterministe de la réplique `index` (clé (seed, index))"""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(domain, index)))


class ProbeKind(str, Enum):
    HEAVISIDE = "heaviside"
    ATAN_HALF = "atan"
    ATAN_COS_HALF = "atan-cos"
    CUSTOM = "custom"


def _atan_half(z):
    return np.arctan(z) / np.pi + 0.5


def _atan_half_primitive(z):
    return (z * np.arctan(z) - 0.5 * np.log1p(z * z)) / np.pi + 0.5 * z


@dataclass(frozen=True)
class ProbeFunction:
    """Fonction test f bornée de limites f± en ±∞"""

    kind: ProbeKind
    f_minus: float = 0.0
    f_plus: float = 1.0
    custom: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.f_minus == self.f_plus:
            raise DomainError("Les limites f- et f+ doivent différer", field="f_plus")
        if self.kind is ProbeKind.CUSTOM and self.custom is None:
            raise DomainError("Une fonction test personnalisée est requise", field="custom")

    @classmethod
    def heaviside(cls) -> "ProbeFunction":
        return cls(ProbeKind.HEAVISIDE)

    @classmethod
    def atan_half(cls) -> "ProbeFunction":
        return cls(ProbeKind.ATAN_HALF)

    @classmethod
    def atan_cos_half(cls) -> "ProbeFunction":
        return cls(ProbeKind.ATAN_COS_HALF)

    @classmethod
    def from_name(cls, name: str) -> "ProbeFunction":
        """Construire une fonction test intégrée à partir de son nom"""
        try:
            kind = ProbeKind(name)
        except ValueError as e:
            raise DomainError(f"Fonction test inconnue {name}", field="probe") from e
        if kind is ProbeKind.CUSTOM:
            raise DomainError("Une fonction test personnalisée ne se construit pas par son nom", field="probe")
        return cls(kind)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind is ProbeKind.HEAVISIDE:
            return (z > 0).astype(float)
        if self.kind is ProbeKind.ATAN_HALF:
            return _atan_half(z)
        if self.kind is ProbeKind.ATAN_COS_HALF:
            return _atan_half(z) + np.cos(z)
        return np.asarray(self.custom(z), dtype=float)

    def primitive(self, z):
        """Primitive exacte des fonctions test lisses intégrées"""
        if self.kind is ProbeKind.ATAN_HALF:
            return _atan_half_primitive(z)
        if self.kind is ProbeKind.ATAN_COS_HALF:
            return _atan_half_primitive(z) + np.sin(z)
        return None

    def describe(self) -> Dict[str, Any]:
        return {"probe": self.kind.value, "f_minus": self.f_minus, "f_plus": self.f_plus}


@dataclass(frozen=True)
class PathRecord:
    """Trajectoire simulée: signe initial et instants de renversement dans (0, T]"""

    v0_sign: int
    reversal_times: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.array(self.reversal_times, dtype=float)
        times.setflags(write=False)
        object.__setattr__(self, "reversal_times", times)

    def segments(self, c: float, x: float = 0.0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(position initiale, vitesse, durée) de chaque segment linéaire"""
        sigma = np.concatenate([[0.0], self.reversal_times, [self.horizon]])
        durations = np.diff(sigma)
        velocity = self.v0_sign * c * np.where(np.arange(durations.size) % 2 == 0, 1.0, -1.0)
        moves = velocity * durations
        start = x + np.concatenate([[0.0], np.cumsum(moves)[:-1]])
        return start, velocity, durations


def sample_path(p: TelegraphParams, rng: np.random.Generator) -> PathRecord:
    """Renversements aux instants d'un processus de Poisson(λ) sur (0, T]"""
    sign = p.v0.sign or (1 if rng.random() < 0.5 else -1)
    expected = p.lambda_T
    batch = int(expected + 5.0 * math.sqrt(expected) + 16)

    chunks = []
    elapsed = 0.0
    while True:
        times = elapsed + np.cumsum(rng.exponential(1.0 / p.lam, size=batch))
        if times[-1] > p.T:
            chunks.append(times[times <= p.T])
            break
        chunks.append(times)
        elapsed = times[-1]

    return PathRecord(sign, np.concatenate(chunks), p.T)


def _heaviside_fraction(start, velocity, durations, c) -> np.ndarray:
    """Part de chaque segment passée sur (0, ∞), exacte pour un mouvement linéaire"""
    end = start + velocity * durations
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.maximum(start, end) / (c * durations)
    return np.where(durations > 0, np.clip(frac, 0.0, 1.0), 0.0)


def _gauss_integral(f: Callable, start, velocity, durations, lam: float) -> float:
    """Gauss-Legendre d'ordre 16 par sous-segment de longueur <= 1/(1 + |λ|)"""
    h = 1.0 / (1.0 + abs(lam))
    pieces = np.maximum(1, np.ceil(durations / h)).astype(int)
    seg = np.repeat(np.arange(durations.size), pieces)
    offset = np.arange(seg.size) - np.repeat(np.cumsum(pieces) - pieces, pieces)
    width = durations[seg] / pieces[seg]
    t0 = offset * width
    times = t0[:, None] + 0.5 * (_GL_NODES[None, :] + 1.0) * width[:, None]
    z = start[seg][:, None] + velocity[seg][:, None] * times
    return float(np.sum(0.5 * width * (f(z) @ _GL_WEIGHTS)))


def occupation(path: PathRecord, p: TelegraphParams, x: float, f: ProbeFunction,
               method: str = "auto") -> float:
    """
    Temps d'occupation normalisé η_T(x; f)

    Args:
        path: Trajectoire simulée
        p: Paramètres du processus
        x: Point de départ
        f: Fonction test
        method: "auto" (primitive exacte si disponible) ou "gauss"

    Returns:
        ((1/T) ∫_0^T f(x + X_t) dt - f-) / (f+ - f-)
    """
    start, velocity, durations = path.segments(p.c, x)

    if f.kind is ProbeKind.HEAVISIDE:
        frac = _heaviside_fraction(start, velocity, durations, p.c)
        live = durations > 0
        if np.all(frac[live] == 1.0):
            return 1.0
        if np.all(frac[live] == 0.0):
            return 0.0
        return float(np.dot(frac, durations) / path.horizon)

    if method == "auto" and f.primitive(0.0) is not None:
        live = durations > 0
        end = start + velocity * durations
        total = float(np.sum((f.primitive(end[live]) - f.primitive(start[live])) / velocity[live]))
    else:
        total = _gauss_integral(f, start, velocity, durations, p.lam)

    return (total / path.horizon - f.f_minus) / (f.f_plus - f.f_minus)


@dataclass(frozen=True)
class EmpiricalSummary:
    """Histogramme à boîtes de largeur Δ avec compteurs dédiés des valeurs 0 et 1"""

    n_runs: int
    bin_width: float
    bin_start: int
    bin_counts: np.ndarray
    exact_zero_count: int
    exact_one_count: int
    seed: int
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        counts = np.array(self.bin_counts, dtype=np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "bin_counts", counts)
        if int(counts.sum()) + self.exact_zero_count + self.exact_one_count != self.n_runs:
            raise DomainError("Les effectifs doivent totaliser n_runs", field="bin_counts")

    @classmethod
    def from_values(cls, values: np.ndarray, seed: int, bin_width: float = None,
                    params: Optional[Dict[str, Any]] = None) -> "EmpiricalSummary":
        """Résumer des valeurs η simulées"""
        w = bin_width or settings.bin_width
        values = np.asarray(values, dtype=float)
        zero = values == 0.0
        one = values == 1.0
        rest = values[~zero & ~one]

        first = 0
        last = int(round(1.0 / w))
        if rest.size:
            first = min(first, int(math.floor(rest.min() / w + _EDGE_TOL)))
            last = max(last, int(math.floor(rest.max() / w + _EDGE_TOL)) + 1)
        n_bins = last - first

        idx = np.clip(np.floor(rest / w + _EDGE_TOL).astype(int) - first, 0, n_bins - 1)
        counts = np.bincount(idx, minlength=n_bins)
        return cls(int(values.size), w, first, counts, int(zero.sum()), int(one.sum()), seed, params or {})

    @property
    def bin_edges(self) -> np.ndarray:
        return (self.bin_start + np.arange(self.bin_counts.size + 1)) * self.bin_width

    def box_frequency(self, a: float, b: float) -> float:
        """Fréquence de la boîte fermée [a, b], boîtes d'histogramme et atomes"""
        edges = self.bin_edges
        inside = (edges[:-1] >= a - _EDGE_TOL) & (edges[1:] <= b + _EDGE_TOL)
        count = int(self.bin_counts[inside].sum())
        if a <= 0.0 <= b:
            count += self.exact_zero_count
        if a <= 1.0 <= b:
            count += self.exact_one_count
        return count / self.n_runs

    def outside_unit_fraction(self) -> float:
        """Part des valeurs hors de [0, 1]"""
        edges = self.bin_edges
        outside = (edges[1:] <= _EDGE_TOL) | (edges[:-1] >= 1.0 - _EDGE_TOL)
        return int(self.bin_counts[outside].sum()) / self.n_runs

    def below_edges(self) -> np.ndarray:
        """Part des valeurs strictement sous chaque bord de boîte"""
        edges = self.bin_edges
        cumulative = np.concatenate([[0], np.cumsum(self.bin_counts)])
        counts = (cumulative + self.exact_zero_count * (edges > _EDGE_TOL)
                  + self.exact_one_count * (edges > 1.0 + _EDGE_TOL))
        return counts / self.n_runs

    def cdf(self, y, left: bool = False) -> np.ndarray:
        """
        Fonction de répartition empirique, linéaire dans chaque boîte

        Une valeur posée sur un bord intérieur compte dans la boîte qui y
        commence; seuls 0 et 1 distinguent limites à droite et à gauche.
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        edges = self.bin_edges
        cumulative = np.concatenate([[0], np.cumsum(self.bin_counts)])
        position = np.clip((y / self.bin_width) - self.bin_start, 0.0, self.bin_counts.size)
        whole = np.floor(position + _EDGE_TOL).astype(int)
        whole = np.clip(whole, 0, self.bin_counts.size)
        partial = np.clip(position - whole, 0.0, 1.0)
        inner = cumulative[whole] + partial * np.append(self.bin_counts, 0)[whole]
        inner = np.where(y >= edges[-1], cumulative[-1], inner)

        zero = (y > 0.0) if left else (y >= 0.0)
        one = (y > 1.0) if left else (y >= 1.0)
        counts = inner + self.exact_zero_count * zero + self.exact_one_count * one
        return counts / self.n_runs

    def to_frame(self):
        """Tableau (bin_left, bin_right, count)"""
        edges = self.bin_edges
        return pd.DataFrame({"bin_left": edges[:-1], "bin_right": edges[1:], "count": self.bin_counts})

    def sidecar(self) -> Dict[str, Any]:
        return {
            "n_runs": self.n_runs,
            "seed": self.seed,
            "exact_zero": self.exact_zero_count,
            "exact_one": self.exact_one_count,
            "params": {**self.params, "bin_width": self.bin_width},
        }


def _simulate_block(p: TelegraphParams, x: float, f: ProbeFunction, seed: int, start: int, stop: int) -> np.ndarray:
    return np.array([occupation(sample_path(p, replica_stream(seed, i)), p, x, f) for i in range(start, stop)])


@validate_params(n_runs=IntegerValidator(min_value=1), seed=IntegerValidator(min_value=0))
def simulate_occupations(p: TelegraphParams, x: float, f: ProbeFunction, n_runs: int, seed: int,
                         workers: int = None) -> np.ndarray:
    """Valeurs η des répliques 0..n_runs-1, ordonnées par indice"""
    workers = workers or settings.workers
    if workers <= 1:
        return _simulate_block(p, x, f, seed, 0, n_runs)

    bounds = np.linspace(0, n_runs, min(n_runs, 4 * workers) + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [
            executor.submit(_simulate_block, p, x, f, seed, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
        ]
        blocks = [future.result() for future in futures]
    return np.concatenate(blocks)


def run_experiment(p: TelegraphParams, x: float, f: ProbeFunction, n_runs: int, seed: int,
                   workers: int = None, bin_width: float = None) -> EmpiricalSummary:
    """
    n_runs répliques indépendantes résumées en histogramme

    Le résultat ne dépend pas du nombre de processus: chaque réplique
    tire son flux de (seed, indice) et la réduction suit l'ordre des indices.
    """
    logger.info(f"🚀 Simulation de {n_runs} trajectoires (T={p.T}, x={x}, sonde={f.kind.value})")
    values = simulate_occupations(p, x, f, n_runs, seed, workers)
    params = {**p.describe(), "x": x, **f.describe()}
    summary = EmpiricalSummary.from_values(values, seed, bin_width, params)
    logger.info(f"✅ Simulation terminée: {summary.exact_zero_count} zéros, {summary.exact_one_count} uns exacts")
    return summary


def ks_statistic(emp: EmpiricalSummary, law: MixedLaw) -> float:
    """
    Écart maximal entre répartitions empirique et exacte

    Les boîtes étant semi-ouvertes [e_k, e_{k+1}), la part empirique
    strictement sous chaque bord est comparée à la limite à gauche de la loi;
    les limites à droite ne sont comparées qu'en 0 et 1, où les atomes ont
    leurs compteurs dédiés. Un atome intérieur à (0, 1) tombe ainsi du même
    côté de chaque bord pour les deux répartitions.
    """
    # Même tolérance que le rangement en boîtes: v compte dans [e, ...) dès v >= e - Δ·1e-9
    shifted = emp.bin_edges - _EDGE_TOL * emp.bin_width
    below = np.abs(emp.below_edges() - law.cdf(shifted, left=True))
    ends = np.array([0.0, 1.0])
    at_ends = np.abs(emp.cdf(ends) - law.cdf(ends))
    return float(min(1.0, max(below.max(), at_ends.max())))


def sample_endpoints(p: TelegraphParams, t: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Positions X_t de `size` trajectoires indépendantes, simulées en bloc"""
    if p.v0.sign:
        velocity = np.full(size, p.v0.sign * p.c)
    else:
        velocity = np.where(rng.random(size) < 0.5, p.c, -p.c)
    position = np.zeros(size)
    remaining = np.full(size, float(t))
    active = np.arange(size)

    while active.size:
        gaps = rng.exponential(1.0 / p.lam, size=active.size)
        left = remaining[active]
        step = np.minimum(gaps, left)
        position[active] += velocity[active] * step
        remaining[active] = left - step
        flipped = gaps < left
        velocity[active[flipped]] *= -1.0
        active = active[flipped]

    return position


@validate_params(n_runs=IntegerValidator(min_value=1), seed=IntegerValidator(min_value=0))
def mc_expectation(p: TelegraphParams, g0: Callable[[np.ndarray], np.ndarray], x: float, t: float,
                   n_runs: int, seed: int) -> Tuple[float, float]:
    """Moyenne de g0(x + X_t) et son erreur standard"""
    if not (0.0 <= t <= p.T):
        raise DomainError(f"Il faut 0 <= t <= T (t={t}, T={p.T})", field="t")

    block = settings.chunk_size
    values = []
    for index, lo in enumerate(range(0, n_runs, block)):
        size = min(block, n_runs - lo)
        rng = replica_stream(seed, index, _ENDPOINT_DOMAIN)
        values.append(np.asarray(g0(x + sample_endpoints(p, t, rng, size)), dtype=float) * np.ones(size))
    values = np.concatenate(values)

    mean = float(values.mean())
    std_err = float(values.std(ddof=1) / math.sqrt(n_runs)) if n_runs > 1 else 0.0
    return mean, std_err


def save_summary(summary: EmpiricalSummary, file_path) -> Path:
    """Écrire l'histogramme CSV et son fichier JSON compagnon"""
    path = save_csv_file(summary.to_frame(), file_path)
    save_json_file(summary.sidecar(), sidecar_path(path))
    return path


def load_summary(file_path) -> EmpiricalSummary:
    """Relire un histogramme écrit par save_summary"""
    frame = load_csv_file(file_path)
    meta = load_json_file(sidecar_path(file_path))
    missing = {"bin_left", "bin_right", "count"} - set(frame.columns)
    if missing:
        raise ConfigError(f"Colonnes manquantes dans {file_path}: {', '.join(sorted(missing))}", field="input")

    checked = validate_data(meta, {name: IntegerValidator(min_value=0) for name in _SIDECAR_COUNTS})
    if not checked.is_valid:
        raise ConfigError(f"Fichier compagnon invalide: {'; '.join(checked.errors)}", field="input")

    params = dict(meta.get("params", {}))
    width = float(params.pop("bin_width", frame["bin_right"].iloc[0] - frame["bin_left"].iloc[0]))
    try:
        return EmpiricalSummary(
            n_runs=meta["n_runs"],
            bin_width=width,
            bin_start=int(round(frame["bin_left"].iloc[0] / width)),
            bin_counts=frame["count"].to_numpy(dtype=np.int64),
            exact_zero_count=meta["exact_zero"],
            exact_one_count=meta["exact_one"],
            seed=meta["seed"],
            params=params,
        )
    except DomainError as e:
        raise ConfigError(f"Histogramme incohérent dans {file_path}: {e.message}", field="input") from e
