# -*- coding: utf-8 -*-
'''

Schema Util - JSON schema checks with a report pointing at the offending line.

'''
import copy
import json
import logging

import jsonschema

from ridgerecover.core import RidgeError

log = logging.getLogger(__name__)

LINES_BEFORE = 5
LINES_AFTER = 5


class ConfigError(RidgeError):
    """A configuration document failed validation."""
    category = 'config'

    def __init__(self, message, report=None):
        super(ConfigError, self).__init__(message)
        self.report = report or message


def check_schema(document, schema, title=None):
    """Validate 'document' against 'schema', raising ConfigError with a line-marked report."""
    validator = jsonschema.Draft7Validator(schema, format_checker=jsonschema.FormatChecker())
    error = jsonschema.exceptions.best_match(validator.iter_errors(document))
    if error is None:
        return document
    report = validation_report(error, document)
    if title:
        report = "Schema check failed: {}\n{}".format(title, report)
    log.debug(report)
    raise ConfigError("{} (at '{}')".format(error.message, '/'.join(str(p) for p in error.path)), report)


def validation_report(error, document):
    """
    Render 'document' as indented JSON and mark the line holding the value that
    'error' refers to. The value is located by swapping in a unique marker.
    """
    if not error.path:
        return error.message
    marker = "<<schema-error-marker>>"
    marked = copy.deepcopy(document)
    node = marked
    for key in list(error.path)[:-1]:
        node = node[key]
    try:
        node[error.path[-1]] = marker
    except (KeyError, IndexError, TypeError):
        return error.message

    lines = json.dumps(marked, indent=4).splitlines()
    errline = next((i for i, text in enumerate(lines) if marker in text), None)
    if errline is None:
        return error.message

    original = json.dumps(document, indent=4).splitlines()
    report = []
    for lineno in range(max(0, errline - LINES_BEFORE), min(len(original), errline + 1 + LINES_AFTER)):
        prefix = "{:4}: >>>" if lineno == errline else "{:4}:    "
        report.append(prefix.format(lineno + 1) + original[lineno])
    return "{}\nError in line {}:\n{}".format(error.message, errline + 1, "\n".join(report))
