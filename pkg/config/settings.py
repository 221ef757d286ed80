from pydantic_settings import BaseSettings
from typing import Optional
from pathlib import Path


class Settings(BaseSettings):
    """Configuration de l'application"""

    # Application
    app_name: str = "TelegraphOT"
    app_version: str = "1.0.0"
    debug: bool = False

    # Quadrature
    quad_abs_tol: float = 1e-10
    quad_rel_tol: float = 1e-8
    quad_max_subdivisions: int = 200
    law_max_subdivisions: int = 2000  # intégrales vectorielles des lois

    # Grilles des lois
    grid_size: int = 512
    max_grid_size: int = 8192
    mass_tol: float = 1e-4  # écart toléré sur la masse totale à la construction

    # Monte Carlo
    bin_width: float = 0.01  # largeur des boîtes des histogrammes
    workers: int = 1
    chunk_size: int = 10000

    # Chemins
    base_dir: Path = Path(__file__).parent.parent
    output_dir: Path = base_dir / "output"
    reports_dir: Path = base_dir / "output" / "reports"

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        env_prefix = "TELEGRAPH_"
        case_sensitive = False


# Instance globale des paramètres
settings = Settings()


def create_directories():
    """Créer les dossiers de sortie s'ils n'existent pas"""
    for directory in (settings.output_dir, settings.reports_dir):
        directory.mkdir(parents=True, exist_ok=True)


if __name__ == "__main__":
    create_directories()
    print(f"✅ Dossiers créés dans {settings.output_dir}")
