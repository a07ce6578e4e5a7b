"""Python bindings for the pdswitch library."""

import json as _json

from . import _core
from ._core import ConfigError, __version__, model_names, run_cli, spectral_summary, stationary

__all__ = [
    "ConfigError",
    "certify",
    "hitting_time",
    "model_names",
    "run_cli",
    "search_gain",
    "simulate",
    "spectral_summary",
    "stationary",
]


def _params(params):
    return _json.dumps(params or {})


def certify(name, params=None, N=30, form="thm37", tail_mass=None, margin=0.1):
    return _core.certify(name, _params(params), N, form, tail_mass, margin)


def search_gain(name, params=None, N=30):
    return _core.search_gain(name, _params(params), N)


def simulate(name, x0, params=None, i0=1, T=10.0, dt=0.0, seed=1, path=0, scheme="thinning"):
    return _core.simulate(name, _params(params), list(map(float, x0)), i0, T, dt, seed, path, scheme)


def hitting_time(name, x0, params=None, i0=1, H=1.0, k0=1, T=100.0, dt=0.0, paths=1000, seed=1, segment_norm=True):
    return _core.hitting_time(name, _params(params), list(map(float, x0)), i0, H, k0, T, dt, paths, seed, segment_norm)
