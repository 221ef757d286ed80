#!/usr/bin/env python3
"""
Reproduction des histogrammes de temps d'occupation et de leurs superpositions
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

# Ajouter le répertoire parent au path pour importer les modules
sys.path.append(str(Path(__file__).parent.parent))

from cli.runner import EXIT_OK, build_run_config, dispatch
from config.settings import settings
from core.simulator import load_summary
from utils.helpers import load_config_file, setup_logging

logger = logging.getLogger(__name__)


class FigureReproducer:
    """Exécute simulate puis compare pour chaque configuration de figure"""

    def __init__(self, figures_dir: Path = None, output_dir: Path = None):
        self.figures_dir = figures_dir or Path(__file__).parent / "figures"
        self.output_dir = output_dir or settings.output_dir / "figures"

    def list_figures(self) -> List[str]:
        return sorted(path.stem for path in self.figures_dir.glob("*.env"))

    def run_figure(self, name: str, workers: Optional[int] = None, seed: Optional[int] = None) -> int:
        """
        Simuler une figure et écrire sa superposition avec l'arcsinus

        Args:
            name: Nom du fichier de configuration (sans .env)
            workers: Nombre de processus
            seed: Graine remplaçant celle du fichier

        Returns:
            Code de sortie
        """
        values = load_config_file(self.figures_dir / f"{name}.env")
        histogram = self.output_dir / f"{name}.csv"

        cfg = build_run_config("simulate", values, {"output": histogram, "workers": workers, "seed": seed})
        code = dispatch(cfg)
        if code != EXIT_OK:
            return code

        overlay = self.output_dir / f"{name}_overlay.csv"
        # Courbe de référence: densité de l'arcsinus multipliée par NΔ
        code = dispatch(build_run_config("compare", flags={"input": histogram, "a": 0.0, "output": overlay}))
        if code == EXIT_OK:
            self.report(name, histogram)
        return code

    def report(self, name: str, histogram: Path) -> Dict[str, float]:
        """Fréquences des boîtes extrêmes et part hors de [0, 1]"""
        summary = load_summary(histogram)
        width = summary.bin_width
        stats = {
            "first_box": summary.box_frequency(0.0, width),
            "last_box": summary.box_frequency(1.0 - width, 1.0),
            "outside": summary.outside_unit_fraction(),
        }
        print(f"📊 {name}: première boîte = {stats['first_box']:.3f}, dernière boîte = {stats['last_box']:.3f}, "
              f"hors [0, 1] = {stats['outside']:.4f}")
        return stats


def main():
    """Fonction principale"""
    parser = argparse.ArgumentParser(description="Reproduction des histogrammes de temps d'occupation")
    parser.add_argument('--list', action='store_true', help="Lister les configurations disponibles")
    parser.add_argument('--figure', type=str, help="Reproduire une seule figure")
    parser.add_argument('--workers', type=int, help="Nombre de processus")
    parser.add_argument('--seed', type=int, help="Graine remplaçant celle des fichiers")

    args = parser.parse_args()
    setup_logging()
    tools = FigureReproducer()

    if args.list:
        for name in tools.list_figures():
            print(f"  - {name}")
        return 0

    names = [args.figure] if args.figure else tools.list_figures()
    failures = 0
    for name in names:
        print(f"🚀 Figure {name}...")
        if tools.run_figure(name, args.workers, args.seed) != EXIT_OK:
            print(f"❌ Échec de la figure {name}")
            failures += 1

    if failures == 0:
        print(f"✅ {len(names)} figure(s) reproduite(s) dans {tools.output_dir}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
