# -*- coding: utf-8 -*-
'''

Config - Experiment configuration.

An experiment is described by a single JSON document:

    {
        "d": 10, "r": 2.0, "p": 0.5, "S": 2,
        "epsilon": 0.1, "delta": 0.05, "mode": "randomized",
        "seeds": [1, 2, 3],
        "budget_grid": [40, 400, 4000],
        "profile_family": "sine",
        "output_path": "sweep.csv",
        "error_grid_resolution": 200
    }

Missing keys take the values in DEFAULTS. The document is validated with a JSON
schema before any cross-field checks run.

'''
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import List, Optional

from ridgerecover.core import PROFILE_FAMILIES
from ridgerecover.recovery import MODES
from ridgerecover.schemautil import ConfigError, check_schema

log = logging.getLogger(__name__)

# Environment variable holding the default config path.
CONFIG_ENV = 'RIDGE_CONFIG'

DEFAULTS = {
    'd': 10,
    'r': 2.0,
    'p': 1.0,
    'S': 1,
    'epsilon': 0.1,
    'delta': 0.05,
    'mode': 'randomized',
    'seeds': [0],
    'budget_grid': [1000],
    'profile_family': 'sine',
    'output_path': 'sweep.csv',
    'error_grid_resolution': 200,
    'C_r': None,
    'c_r_spline': None,
    'r0': None,
    'random_probes': 500,
    'epsilon_ladder': [0.9, 0.7, 0.5, 0.35, 0.25, 0.18, 0.12, 0.08, 0.05],
}

_SEED = {'type': 'integer', 'minimum': 0, 'maximum': 2 ** 64 - 1}
_NULLABLE_POSITIVE = {'oneOf': [{'type': 'null'}, {'type': 'number', 'exclusiveMinimum': 0}]}

EXPERIMENT_SCHEMA = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'additionalProperties': False,
    'properties': {
        'd': {'type': 'integer', 'minimum': 2},
        'r': {'type': 'number', 'exclusiveMinimum': 1},
        'p': {'type': 'number', 'exclusiveMinimum': 0, 'maximum': 1},
        'S': {'type': 'integer', 'minimum': 1},
        'epsilon': {'type': 'number', 'exclusiveMinimum': 0, 'exclusiveMaximum': 1},
        'delta': {'type': 'number', 'exclusiveMinimum': 0, 'exclusiveMaximum': 1},
        'mode': {'type': 'string', 'enum': list(MODES)},
        'seeds': {'type': 'array', 'items': _SEED, 'minItems': 1},
        'budget_grid': {'type': 'array', 'items': {'type': 'integer', 'minimum': 0}, 'minItems': 1},
        'profile_family': {'type': 'string', 'minLength': 1},
        'output_path': {'type': 'string'},
        'error_grid_resolution': {'type': 'integer', 'minimum': 2},
        'C_r': _NULLABLE_POSITIVE,
        'c_r_spline': _NULLABLE_POSITIVE,
        'r0': {'oneOf': [{'type': 'null'}, {'type': 'integer', 'minimum': 2}]},
        'random_probes': {'type': 'integer', 'minimum': 0},
        'epsilon_ladder': {
            'type': 'array', 'minItems': 1,
            'items': {'type': 'number', 'exclusiveMinimum': 0, 'exclusiveMaximum': 1},
        },
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    d: int
    r: float
    p: float
    S: int
    epsilon: float
    delta: float
    mode: str
    seeds: List[int]
    budget_grid: List[int]
    profile_family: str
    output_path: str
    error_grid_resolution: int
    C_r: Optional[float] = None
    c_r_spline: Optional[float] = None
    r0: Optional[int] = None
    random_probes: int = 500
    epsilon_ladder: List[float] = field(default_factory=lambda: list(DEFAULTS['epsilon_ladder']))

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        document = self.to_dict()
        document.update(changes)
        return make_config(document)


def make_config(document=None, **overrides):
    """Merge 'document' and 'overrides' over DEFAULTS, validate and build the config."""
    merged = dict(DEFAULTS)
    merged.update(document or {})
    merged.update(overrides)
    check_schema(merged, EXPERIMENT_SCHEMA, title='experiment config')
    if not merged['S'] < merged['d']:
        raise ConfigError("S={} must be below d={}.".format(merged['S'], merged['d']))
    family = merged['profile_family']
    if family != 'mixed' and family not in PROFILE_FAMILIES:
        raise ConfigError("Unknown profile family {!r}. Registered: {}.".format(
            family, ', '.join(sorted(PROFILE_FAMILIES))))
    return ExperimentConfig(**merged)


def load_config(path=None):
    """Read a config from 'path', the RIDGE_CONFIG environment variable, or defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        log.info("No config given, using defaults.")
        return make_config()
    try:
        with open(path, 'r') as f:
            document = json.load(f)
    except (IOError, OSError) as e:
        raise ConfigError("Can't read config {!r}: {}".format(path, e))
    except ValueError as e:
        raise ConfigError("Config {!r} is not valid JSON: {}".format(path, e))
    if not isinstance(document, dict):
        raise ConfigError("Config {!r} must hold a JSON object.".format(path))
    return make_config(document)


def save_config(config, path):
    with open(path, 'w') as f:
        json.dump(config.to_dict(), f, indent=4, sort_keys=True)
        f.write('\n')
