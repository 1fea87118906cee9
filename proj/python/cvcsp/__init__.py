"""Dict-level wrapper around the _cvcsp extension module.

The extension speaks canonical JSON documents; this package converts to and
from plain dicts. Set CVCSP_EXT_DIR to load the extension from a build tree.
"""

import json
import os
import sys

_ext_dir = os.environ.get("CVCSP_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    sys.path.insert(0, _ext_dir)

import _cvcsp

StructuralError = _cvcsp.StructuralError
BudgetError = _cvcsp.BudgetError


def classify(language, max_nodes=0, time_ms=0, reverse_order=False):
    return json.loads(
        _cvcsp.classify(json.dumps(language), max_nodes, time_ms, reverse_order)
    )


def solve(instance, backend="auto", verbose=False):
    return json.loads(_cvcsp.solve(json.dumps(instance), backend, verbose))


def brute_force(instance):
    return json.loads(_cvcsp.brute_force(json.dumps(instance)))


def check(language, witness):
    return json.loads(_cvcsp.check(json.dumps(language), json.dumps(witness)))


def graph(language, depth=2, cap=10_000):
    return json.loads(_cvcsp.graph(json.dumps(language), depth, cap))


def gadget_xor():
    return json.loads(_cvcsp.gadget_xor())


def gadget_mis(edge_list):
    return json.loads(_cvcsp.gadget_mis(edge_list))


def generate(language, vars, terms, seed):
    return json.loads(_cvcsp.generate(json.dumps(language), vars, terms, seed))


def eval_cost(instance, assignment):
    return _cvcsp.eval(json.dumps(instance), list(assignment))
