"""Python bindings for the chmc contract model checker."""
import json

from ._chmc import ReplayResult, ChmcError, default_solver, replay
from . import _chmc

__all__ = ["verify", "bench", "replay", "ReplayResult", "ChmcError", "default_solver"]


def verify(contract, props, engine="all", max_depth=None, max_k=10, timeout=1000.0,
           solver="", addresses=("A", "B", "M"), bound_ints=None, property=""):
    """Check the properties in `props` against `contract`; returns the report as a dict."""
    return json.loads(_chmc.verify_json(str(contract), str(props), engine, max_depth, max_k,
                                        float(timeout), solver, list(addresses),
                                        tuple(bound_ints) if bound_ints else None, property))


def bench(corpus, timeout=1000.0, workers=0, solver=""):
    """Run the corpus against its ground truth; returns the table as a dict."""
    return json.loads(_chmc.bench_json(str(corpus), float(timeout), workers, solver))
