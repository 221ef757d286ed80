"""
Fonctions utilitaires: logging, fichiers JSON/CSV, configuration
"""

import logging
import time
from functools import wraps
from pathlib import Path
from typing import Any, Dict, Optional, Type, TypeVar, Union

import numpy as np
import orjson
import pandas as pd
from dotenv import dotenv_values
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError
from rich.logging import RichHandler

from config.settings import settings
from utils.validators import ConfigError

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

_JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """
    Configurer le logging de l'application

    Args:
        level: Niveau (par défaut settings.log_level, DEBUG en mode debug)
        log_file: Fichier de log optionnel (par défaut settings.log_file)
    """
    level = level or ("DEBUG" if settings.debug else settings.log_level)
    handlers: list = [RichHandler(rich_tracebacks=settings.debug, show_path=False)]

    log_file = log_file or settings.log_file
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
        handlers.append(file_handler)

    logging.basicConfig(level=level.upper(), format="%(message)s", datefmt="[%X]", handlers=handlers, force=True)


def _default(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Type non sérialisable: {type(value).__name__}")


def dumps_json(data: Any) -> bytes:
    return orjson.dumps(data, default=_default, option=_JSON_OPTIONS)


def load_json_file(file_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Charger un fichier JSON

    Args:
        file_path: Chemin du fichier

    Returns:
        Contenu du fichier

    Raises:
        ConfigError: Fichier absent ou illisible
    """
    try:
        return orjson.loads(Path(file_path).read_bytes())
    except FileNotFoundError as e:
        raise ConfigError(f"Fichier introuvable: {file_path}", field="input") from e
    except orjson.JSONDecodeError as e:
        raise ConfigError(f"JSON invalide dans {file_path}: {e}", field="input") from e


def save_json_file(data: Any, file_path: Union[str, Path]) -> Path:
    """Sauvegarder un fichier JSON (dossier parent créé au besoin)"""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_json(data))
    logger.debug(f"💾 JSON écrit: {path}")
    return path


def save_csv_file(frame: pd.DataFrame, file_path: Union[str, Path]) -> Path:
    """Sauvegarder un tableau CSV sans index"""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.12g")
    logger.debug(f"💾 CSV écrit: {path}")
    return path


def load_csv_file(file_path: Union[str, Path]) -> pd.DataFrame:
    try:
        return pd.read_csv(file_path)
    except FileNotFoundError as e:
        raise ConfigError(f"Fichier introuvable: {file_path}", field="input") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigError(f"CSV invalide dans {file_path}: {e}", field="input") from e


def sidecar_path(file_path: Union[str, Path]) -> Path:
    """Fichier JSON compagnon d'un CSV: out.csv -> out.json"""
    return Path(file_path).with_suffix(".json")


def load_config_file(file_path: Union[str, Path]) -> Dict[str, str]:
    """
    Lire un fichier de configuration clé=valeur

    Les clés sont normalisées en minuscules avec '-' remplacé par '_';
    les clés sans valeur sont ignorées.
    """
    path = Path(file_path)
    if not path.is_file():
        raise ConfigError(f"Fichier de configuration introuvable: {path}", field="config")
    values = dotenv_values(path, encoding="utf-8")
    return {key.strip().lower().replace("-", "_"): value for key, value in values.items() if value not in (None, "")}


def build_model(model: Type[ModelT], data: Dict[str, Any]) -> ModelT:
    """Construire un modèle pydantic, erreurs converties en ConfigError"""
    try:
        return model.model_validate(data)
    except PydanticValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ())) or None
        raise ConfigError(f"Configuration invalide ({location}): {first['msg']}", field=location) from e


def log_performance(func):
    """
    Décorateur pour logger la durée d'exécution

    Args:
        func: Fonction à décorer

    Returns:
        Fonction décorée
    """

    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        logger.info(f"⏱️ {func.__name__} exécutée en {time.perf_counter() - start_time:.3f}s")
        return result

    return wrapper
