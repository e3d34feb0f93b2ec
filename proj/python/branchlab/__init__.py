"""Branching-diffusion control laboratory."""

from ._core import (
    AtomicMeasure,
    ConfigError,
    Experiment,
    ValueSurface,
    atoms,
    evaluate_cost,
    load_experiment,
    oracles,
    simulate_terminal_masses,
    solve_hjb,
)

__all__ = [
    "AtomicMeasure",
    "ConfigError",
    "Experiment",
    "ValueSurface",
    "atoms",
    "evaluate_cost",
    "load_experiment",
    "oracles",
    "simulate_terminal_masses",
    "solve_hjb",
]
