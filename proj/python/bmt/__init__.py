"""Brownian transport maps: Follmer process simulation, Malliavin norms and contraction bounds."""

from ._bmt import *  # noqa: F401,F403
from ._bmt import run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]


def run(experiment, **keys):
    """Run an experiment from keyword config keys; a double underscore stands for '.', as in measure__kind."""
    config = {"experiment": experiment}
    for key, value in keys.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        config[key.replace("__", ".")] = str(value)
    return run_experiment(config)
