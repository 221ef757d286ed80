import logging
import sys
from typing import Any, Dict, Optional

import click

from cli.runner import EXIT_USAGE, build_run_config, dispatch
from config.settings import settings
from core.laplace_oracles import SUITES
from utils.helpers import load_config_file, setup_logging
from utils.validators import ConfigError

logger = logging.getLogger("telegraph")

V0_CHOICES = click.Choice(["plus", "minus", "symmetric"])
PROBE_CHOICES = click.Choice(["heaviside", "atan", "atan-cos"])


def common_options(func):
    """Options partagées: fichier de configuration et sortie"""
    func = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                        help="Fichier clé=valeur (les options l'emportent)")(func)
    func = click.option("--output", type=click.Path(dir_okay=False), help="Fichier de sortie")(func)
    return func


def process_options(func):
    """Paramètres du processus, noms calqués sur les symboles λ, c, T, x, v0"""
    for decorator in reversed((
        click.option("--lambda", "lam", type=float, help="Taux de renversement λ"),
        click.option("--c", type=float, help="Vitesse c"),
        click.option("--T", "horizon", type=float, help="Horizon T"),
        click.option("--x", type=float, help="Point de départ x"),
        click.option("--v0", type=V0_CHOICES, help="Vitesse initiale"),
        click.option("--grid-size", type=int, help="Taille minimale de grille"),
    )):
        func = decorator(func)
    return func


def _flags(values: Dict[str, Any]) -> Dict[str, Any]:
    """Renommer les options click en clés de configuration"""
    renamed = {"lam": "lambda", "horizon": "t"}
    return {renamed.get(key, key): value for key, value in values.items()}


def _execute(command: str, config_path: Optional[str], **options) -> None:
    try:
        file_values = load_config_file(config_path) if config_path else {}
        cfg = build_run_config(command, file_values, _flags(options))
    except ConfigError as e:
        logger.error(f"❌ {e.message}")
        sys.exit(EXIT_USAGE)
    sys.exit(dispatch(cfg))


@click.group()
@click.version_option(settings.app_version, prog_name=settings.app_name)
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"]), default=None)
def cli(log_level: Optional[str]):
    """Temps d'occupation du processus du télégraphe: lois exactes, limites et simulation"""
    setup_logging(log_level)


@cli.command()
@common_options
@process_options
@click.option("--beta", type=float, help="Inclinaison β: ajoute E[e^{-βη}] aux métadonnées")
@click.option("--format", type=click.Choice(["json", "csv"]), help="Format de sortie")
def law(config_path, **options):
    """Loi exacte de η_T(x) (origine si x = 0)"""
    _execute("law", config_path, **options)


@cli.command()
@common_options
@process_options
@click.option("--a", type=float, help="Niveau limite a (sinon déduit de x, λ, c, T)")
@click.option("--beta", type=float, help="Inclinaison β")
@click.option("--format", type=click.Choice(["json", "csv"]), help="Format de sortie")
def limit(config_path, **options):
    """Loi limite T → ∞"""
    _execute("limit", config_path, **options)


@cli.command()
@common_options
@process_options
@click.option("--s", type=float, help="Ajoute la transformée de Laplace en s")
@click.option("--u-max", type=float, help="Borne de la grille en u")
@click.option("--points", type=int, help="Nombre de points de la grille")
def hitting(config_path, **options):
    """Densité du premier passage au niveau -x > 0"""
    _execute("hitting", config_path, **options)


@cli.command()
@common_options
@process_options
@click.option("--probe", type=PROBE_CHOICES, help="Fonction test")
@click.option("--n", type=int, help="Nombre de trajectoires")
@click.option("--seed", type=int, help="Graine (obligatoire)")
@click.option("--workers", type=int, help="Nombre de processus")
def simulate(config_path, **options):
    """Histogramme Monte Carlo du temps d'occupation"""
    _execute("simulate", config_path, **options)


@cli.command()
@common_options
@click.option("--suite", type=click.Choice(["all", *SUITES]), help="Suite de vérification")
def verify(config_path, **options):
    """Rapport des identités de Laplace (code 1 si un contrôle échoue)"""
    _execute("verify", config_path, **options)


@cli.command("solve-te")
@common_options
@process_options
@click.option("--x-min", type=float)
@click.option("--x-max", type=float)
@click.option("--nx", type=int)
@click.option("--nt", type=int)
@click.option("--g0", type=click.Choice(["cos", "one", "identity", "gauss"]), help="Donnée initiale")
def solve_te(config_path, **options):
    """Grille (x, t) de la solution de l'équation du télégraphe"""
    _execute("solve-te", config_path, **options)


@cli.command()
@common_options
@click.option("--input", type=click.Path(exists=True, dir_okay=False), help="Histogramme produit par simulate")
@click.option("--a", type=float, help="Comparer à la loi limite de niveau a")
@click.option("--grid-size", type=int)
def compare(config_path, **options):
    """Superposition histogramme / densité exacte multipliée par NΔ"""
    _execute("compare", config_path, **options)


if __name__ == "__main__":
    cli()
