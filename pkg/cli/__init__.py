"""
Interface en ligne de commande
"""

from cli.runner import Command, RunConfig, build_run_config, dispatch

__all__ = ["Command", "RunConfig", "build_run_config", "dispatch"]
