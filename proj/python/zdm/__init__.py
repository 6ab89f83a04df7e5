"""Python access to the zdm core.

Command functions mirror the CLI subcommands and return the decoded artifact
dict, with the run report under ``"report"``. Errors raise ``ZdmError``; its
``kind`` attribute names the failure (``NotFound``, ``NotDense``, ...).
"""

import json

from ._zdm import ZdmError, __version__
from . import _zdm

__all__ = [
    "ZdmError",
    "__version__",
    "language",
    "find_marker",
    "array_name",
    "barycentric",
    "nearest_point",
    "retract",
    "marker",
    "embed_dense",
    "encode",
    "selector",
    "simplex_retract",
    "glue",
]


def _spec(system):
    return system if isinstance(system, str) else json.dumps(system)


def _run(command, seed, **options):
    options = {k: str(v) if hasattr(v, "__fspath__") else v for k, v in options.items()}
    return json.loads(_zdm.run_command(command, json.dumps(options), seed))


def language(system, length):
    return _zdm.language(_spec(system), length)


def find_marker(system, n, max_word_len=16, cover_cap=None):
    return json.loads(_zdm.find_marker(_spec(system), n, max_word_len, cover_cap))


def array_name(system, t, x, levels=3, window=8, slack=0.2):
    return json.loads(_zdm.array_name(_spec(system), t, x, levels, window, slack))


barycentric = _zdm.barycentric
nearest_point = _zdm.nearest_point
retract = _zdm.retract


def marker(system, n=2, max_word_len=16, cover_cap=None, seed=1):
    return _run("marker", seed, system=system, n=n, max_word_len=max_word_len, cover_cap=cover_cap)


def embed_dense(host, target, eps=0.25, shapes="1x1,1x2", window=4096, samples=5, seed=1, **extra):
    return _run("embed-dense", seed, host=host, target=target, eps=eps, shapes=shapes,
                window=window, samples=samples, **extra)


def encode(system, seed=1, **options):
    return _run("encode", seed, system=system, **options)


def selector(measures, stages=6, seed=1, **options):
    return _run("selector", seed, measures=measures, stages=stages, **options)


def simplex_retract(simplex, face, eps=0.1, seed=1, **options):
    if not isinstance(face, str):
        face = ",".join(str(i) for i in face)
    return _run("simplex-retract", seed, simplex=simplex, face=face, eps=eps, **options)


def glue(simplex, groups, schedule="geometric:0.5", stages=5, seed=1, **options):
    return _run("glue", seed, simplex=simplex, groups=groups, schedule=schedule, stages=stages, **options)
