"""
Orchestration des commandes: configuration, calcul et fichiers de sortie
"""

import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import create_directories, settings
from core.laplace_oracles import SUITES, TransformPoint, hitting_laplace, hitting_transform_numeric, run_verification
from core.limit_laws import LimitLawSpec, limit_law
from core.mixed_law import MIN_GRID_SIZE, MixedLaw
from core.params import TelegraphParams, V0
from core.simulator import ProbeFunction, ProbeKind, ks_statistic, load_summary, run_experiment, save_summary
from core.telegraph_laws import hitting_law, offset_law, origin_law, telegraph_expectation
from utils.helpers import build_model, save_csv_file, save_json_file, sidecar_path
from utils.validators import ConfigError, QuadratureError, ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class Command(str, Enum):
    LAW = "law"
    LIMIT = "limit"
    HITTING = "hitting"
    SIMULATE = "simulate"
    VERIFY = "verify"
    SOLVE_TE = "solve-te"
    COMPARE = "compare"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


INITIAL_DATA: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "cos": np.cos,
    "one": np.ones_like,
    "identity": lambda z: np.asarray(z, dtype=float),
    "gauss": lambda z: np.exp(-np.square(z)),
}

_NEEDS_PARAMS = {Command.LAW, Command.HITTING, Command.SIMULATE, Command.SOLVE_TE}

# Options de ligne de commande / clés du fichier de configuration -> champs de RunConfig
_OPTION_FIELDS = {
    "n": "n_runs",
    "output": "output_path",
    "input": "input_path",
}
_PARAM_KEYS = {"lambda": "lambda", "c": "c", "t": "T", "v0": "v0"}


class RunConfig(BaseModel):
    """Configuration complète d'une commande"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    params: Optional[TelegraphParams] = None
    x: float = 0.0
    probe: ProbeKind = ProbeKind.HEAVISIDE
    n_runs: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)
    grid_size: Optional[int] = Field(default=None, ge=MIN_GRID_SIZE)
    output_path: Optional[Path] = None
    format: OutputFormat = OutputFormat.JSON
    workers: Optional[int] = Field(default=None, ge=1)

    # Transformées de Laplace
    beta: Optional[float] = None
    s: Optional[float] = Field(default=None, gt=0)
    suite: str = "all"

    # Loi limite et comparaison
    a: Optional[float] = None
    input_path: Optional[Path] = None

    # Grilles de sortie
    x_min: float = -2.0
    x_max: float = 2.0
    nx: int = Field(default=41, ge=2)
    nt: int = Field(default=11, ge=2)
    g0: Literal["cos", "one", "identity", "gauss"] = "cos"
    u_max: Optional[float] = None
    points: int = Field(default=201, ge=2)

    @field_validator("probe")
    @classmethod
    def builtin_probe(cls, value: ProbeKind) -> ProbeKind:
        if value is ProbeKind.CUSTOM:
            raise ValueError("Seules les fonctions test intégrées sont disponibles en ligne de commande")
        return value

    @model_validator(mode="after")
    def command_fields(self) -> "RunConfig":
        """Champs requis propres à chaque commande"""
        if self.command in _NEEDS_PARAMS and self.params is None:
            raise ValueError(f"--lambda, --c et --T sont requis pour {self.command.value}")
        if self.command is Command.SIMULATE:
            if self.seed is None:
                raise ValueError("--seed est obligatoire pour simulate")
            if self.n_runs is None:
                raise ValueError("--n est obligatoire pour simulate")
        if self.command is Command.LIMIT and self.a is None and self.params is None:
            raise ValueError("limit attend --a ou bien --lambda, --c, --T et --x")
        if self.command is Command.COMPARE and self.input_path is None:
            raise ValueError("--input est obligatoire pour compare")
        if self.command is Command.VERIFY and self.suite not in ("all", *SUITES):
            raise ValueError(f"Suite inconnue {self.suite} (choix: all, {', '.join(SUITES)})")
        if self.command is Command.SOLVE_TE:
            if self.x_min >= self.x_max:
                raise ValueError("Il faut x_min < x_max")
            if self.params.v0 is not V0.SYMMETRIC:
                raise ValueError("solve-te concerne la vitesse initiale symétrique")
        return self

    @property
    def probe_function(self) -> ProbeFunction:
        return ProbeFunction.from_name(self.probe.value)

    def limit_level(self) -> float:
        """a donné, ou a = x (c²T/λ)^{-1/2}"""
        if self.a is not None:
            return self.a
        p = self.params
        return self.x / math.sqrt(p.c * p.c * p.T / p.lam)

    def resolved_output(self, suffix: str) -> Path:
        if self.output_path is not None:
            return self.output_path
        create_directories()
        folder = settings.reports_dir if self.command is Command.VERIFY else settings.output_dir
        return folder / f"{self.command.value}{suffix}"


def build_run_config(command: str, file_values: Optional[Dict[str, Any]] = None,
                     flags: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Fusionner fichier de configuration et options (les options l'emportent)

    Args:
        command: Nom de la commande
        file_values: Valeurs lues dans le fichier clé=valeur
        flags: Options de ligne de commande (None = non fournie)

    Returns:
        Configuration validée

    Raises:
        ConfigError: Configuration invalide
    """
    merged: Dict[str, Any] = dict(file_values or {})
    merged.update({key: value for key, value in (flags or {}).items() if value is not None})

    data: Dict[str, Any] = {"command": command}
    params = {_PARAM_KEYS[key]: merged.pop(key) for key in list(merged) if key in _PARAM_KEYS}
    if params:
        data["params"] = params
    for key, value in merged.items():
        data[_OPTION_FIELDS.get(key, key)] = value

    return build_model(RunConfig, data)


def _law_for(cfg: RunConfig) -> MixedLaw:
    if cfg.x == 0:
        return origin_law(cfg.params, cfg.grid_size)
    return offset_law(cfg.params, cfg.x, cfg.grid_size)


def _with_tilt(law: MixedLaw, beta: Optional[float]) -> Dict[str, Any]:
    data = law.to_dict()
    if beta is not None:
        data["params"]["tilt"] = {"beta": beta, "expectation": law.expectation(lambda y: np.exp(-beta * y))}
    return data


def _write_law(cfg: RunConfig, law: MixedLaw) -> Path:
    data = _with_tilt(law, cfg.beta)
    if cfg.format is OutputFormat.CSV:
        path = save_csv_file(pd.DataFrame({"y": law.nodes, "pdf": law.pdf}), cfg.resolved_output(".csv"))
        save_json_file({"atoms": data["atoms"], "params": data["params"]}, sidecar_path(path))
        return path
    return save_json_file(data, cfg.resolved_output(".json"))


def _run_law(cfg: RunConfig) -> int:
    law = _law_for(cfg)
    path = _write_law(cfg, law)
    logger.info(f"✅ Loi écrite dans {path} (masse totale {law.total_mass():.10f})")
    return EXIT_OK


def _run_limit(cfg: RunConfig) -> int:
    spec = LimitLawSpec(a=cfg.limit_level(), **({"grid_size": cfg.grid_size} if cfg.grid_size else {}))
    law = limit_law(spec)
    path = _write_law(cfg, law)
    logger.info(f"✅ Loi limite a={spec.a} écrite dans {path}")
    return EXIT_OK


def _run_hitting(cfg: RunConfig) -> int:
    p = cfg.params
    law = hitting_law(p, cfg.x)
    u_max = cfg.u_max or law.t0 + 20.0 / p.lam
    if u_max <= law.t0:
        raise ConfigError(f"u_max doit dépasser T0 = {law.t0}", field="u_max")

    u = np.linspace(law.t0, u_max, cfg.points)
    path = save_csv_file(pd.DataFrame({"u": u, "density": law.density(u)}), cfg.resolved_output(".csv"))

    meta: Dict[str, Any] = {
        "params": {**p.describe(), "x": cfg.x},
        "t0": law.t0,
        "atom": law.atom_at_t0,
        "total_mass": law.total_mass(),
    }
    if cfg.s is not None:
        # Transformée en unités réduites (T = 1, λ -> λT, ξ = x / (cT))
        lambda_T, xi = p.lambda_T, cfg.x / (p.c * p.T)
        tp = TransformPoint(s=cfg.s)
        meta["laplace"] = {
            "s": cfg.s,
            "closed_form": hitting_laplace(tp, lambda_T, xi, p.v0),
            "numeric": hitting_transform_numeric(tp, lambda_T, xi, p.v0),
        }
    save_json_file(meta, sidecar_path(path))
    logger.info(f"✅ Densité d'atteinte écrite dans {path}")
    return EXIT_OK


def _run_simulate(cfg: RunConfig) -> int:
    summary = run_experiment(cfg.params, cfg.x, cfg.probe_function, cfg.n_runs, cfg.seed, cfg.workers)
    path = save_summary(summary, cfg.resolved_output(".csv"))
    logger.info(f"📊 Histogramme écrit dans {path}")
    return EXIT_OK


def _run_verify(cfg: RunConfig) -> int:
    checks = run_verification(cfg.suite)
    report = [check.model_dump(by_alias=True) for check in checks]
    path = save_json_file(report, cfg.resolved_output(".json"))

    failed = [check for check in checks if not check.passed]
    if failed:
        for check in failed:
            logger.error(f"❌ {check.check} {check.params}: écart {check.abs_err:.3e} > {check.tol:.0e}")
        logger.error(f"❌ {len(failed)}/{len(checks)} contrôles en échec, rapport {path}")
        return EXIT_FAILURE
    logger.info(f"✅ {len(checks)} contrôles réussis, rapport {path}")
    return EXIT_OK


def _run_solve_te(cfg: RunConfig) -> int:
    p = cfg.params
    g0 = INITIAL_DATA[cfg.g0]
    xs = np.linspace(cfg.x_min, cfg.x_max, cfg.nx)
    ts = np.linspace(0.0, p.T, cfg.nt)
    rows = [
        {"x": x, "t": t, "value": telegraph_expectation(p, g0, float(x), float(t))}
        for t in ts for x in xs
    ]
    path = save_csv_file(pd.DataFrame(rows), cfg.resolved_output(".csv"))
    logger.info(f"✅ Solution de l'équation du télégraphe écrite dans {path}")
    return EXIT_OK


def _comparison_law(cfg: RunConfig, meta: Dict[str, Any]) -> MixedLaw:
    """Loi exacte si possible (sonde H), sinon loi limite"""
    if cfg.a is not None:
        return limit_law(LimitLawSpec(a=cfg.a))
    try:
        p = TelegraphParams(**{key: meta[key] for key in ("lambda", "c", "T", "v0")})
        x, probe = float(meta.get("x", 0.0)), meta.get("probe", ProbeKind.HEAVISIDE.value)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Paramètres de simulation illisibles: {e}", field="input") from e

    if probe == ProbeKind.HEAVISIDE.value:
        return origin_law(p, cfg.grid_size) if x == 0 else offset_law(p, x, cfg.grid_size)
    return limit_law(LimitLawSpec(a=x / math.sqrt(p.c * p.c * p.T / p.lam)))


def _run_compare(cfg: RunConfig) -> int:
    summary = load_summary(cfg.input_path)
    law = _comparison_law(cfg, summary.params)

    edges = summary.bin_edges
    left, right = edges[:-1], edges[1:]
    scale = summary.n_runs * summary.bin_width
    counts = summary.bin_counts.astype(float)
    with_atoms = counts.copy()
    with_atoms[np.isclose(left, 0.0)] += summary.exact_zero_count
    with_atoms[np.isclose(right, 1.0)] += summary.exact_one_count

    frame = pd.DataFrame({
        "bin_left": left,
        "bin_right": right,
        "count": summary.bin_counts,
        "count_with_atoms": with_atoms,
        "density_scaled": law.density_at(0.5 * (left + right)) * scale,
        "expected_count": [summary.n_runs * law.probability(lo, hi) if 0 <= lo and hi <= 1 else 0.0
                           for lo, hi in zip(left, right)],
    })
    path = save_csv_file(frame, cfg.resolved_output(".csv"))
    ks = ks_statistic(summary, law)
    save_json_file({"n_runs": summary.n_runs, "scale": scale, "ks": ks, "law": law.params}, sidecar_path(path))
    logger.info(f"📊 Superposition écrite dans {path} (KS = {ks:.4f})")
    return EXIT_OK


_HANDLERS: Dict[Command, Callable[[RunConfig], int]] = {
    Command.LAW: _run_law,
    Command.LIMIT: _run_limit,
    Command.HITTING: _run_hitting,
    Command.SIMULATE: _run_simulate,
    Command.VERIFY: _run_verify,
    Command.SOLVE_TE: _run_solve_te,
    Command.COMPARE: _run_compare,
}


def dispatch(cfg: RunConfig) -> int:
    """
    Exécuter une commande

    Returns:
        Code de sortie: 0 succès, 1 échec numérique ou contrôle raté, 2 configuration invalide
    """
    logger.debug(f"🔍 Commande {cfg.command.value}: {cfg.model_dump(exclude_none=True)}")
    try:
        return _HANDLERS[cfg.command](cfg)
    except QuadratureError as e:
        logger.error(f"❌ Échec numérique: {e.message} (estimation {e.estimate}, borne {e.error_bound})")
        return EXIT_FAILURE
    except ValidationError as e:
        logger.error(f"❌ {e.message}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"❌ Écriture impossible: {e}")
        return EXIT_USAGE
