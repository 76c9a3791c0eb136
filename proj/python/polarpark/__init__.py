"""Polar-coordinate unicycle parking controllers and CLF certification."""

import json as _json

from ._polarpark import *  # noqa: F401,F403
from ._polarpark import check_lemma1 as _check_lemma1, run_battery as _run_battery

__version__ = "0.1.0"


def check_lemma1(ks, gammas):
    """Lemma-style inequality check; returns the report as a dict."""
    return _json.loads(_check_lemma1(list(ks), list(gammas)))


def run_battery(suite="all", seed=1):
    """Runs a certification suite and returns a list of report dicts."""
    return [_json.loads(r) for r in _run_battery(suite, seed)]
