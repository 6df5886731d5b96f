"""Extreme value laws for observables built on fractal sets."""

import json
import os

from ._core import (
    FractalEvtError,
    ball_asymptotic,
    ball_measure,
    distance_to_cantor,
    gap_order,
    harmonic_neighborhood,
    harmonic_series_measure,
    interval_measure,
    lebesgue_neighborhood_exact,
    list_scenarios,
    qmark_cantor_neighborhood,
    qmark_eval,
    qmark_inverse,
    saddle_point_constants,
    scenarios,
)
from ._core import run_scenario_json as _run_scenario_json

__all__ = [
    "FractalEvtError",
    "ball_asymptotic",
    "ball_measure",
    "distance_to_cantor",
    "gap_order",
    "harmonic_neighborhood",
    "harmonic_series_measure",
    "interval_measure",
    "lebesgue_neighborhood_exact",
    "list_scenarios",
    "qmark_cantor_neighborhood",
    "qmark_eval",
    "qmark_inverse",
    "run_scenario",
    "saddle_point_constants",
    "scenarios",
]


def run_scenario(name, seed=1, workers=1, out=".", **params):
    """Run a scenario, write its CSVs and summary.json to `out`, return the summary.

    Keyword arguments override scenario parameters; dotted keys can be passed
    as a dict, e.g. run_scenario("ladder-tent", **{"tent.p": 0.4}).
    """
    values = {k: v if isinstance(v, str) else _text(v) for k, v in params.items()}
    return json.loads(_run_scenario_json(name, seed, workers, os.fspath(out), values))


def _text(value):
    if isinstance(value, (list, tuple)):
        return ",".join(_text(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)
