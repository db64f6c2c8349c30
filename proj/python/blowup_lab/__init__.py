"""Comparison solutions and existence classification for the radial blow-up
problem  laplace(u) + |grad u| = p(x) f(u).

The heavy lifting lives in the compiled extension ``_core``; this package
adds a dict-friendly wrapper around the job runner.
"""

import json as _json

from ._core import (
    ModelError,
    eval_expression,
    fixture_listing,
    fixture_tags,
    kernel_check,
    run_job_json,
)

__version__ = "1.0.0"

__all__ = [
    "ModelError",
    "eval_expression",
    "fixture_listing",
    "fixture_tags",
    "kernel_check",
    "run_job",
    "run_job_json",
]


def run_job(job):
    """Run a job given as a dict or JSON text.

    Returns a dict with keys ``report`` (parsed report document),
    ``exit_code`` (0 ok, 1 failed mathematical check, 2 bad input,
    3 numerical failure), and ``csv`` (export name -> file contents).
    """
    text = job if isinstance(job, str) else _json.dumps(job)
    raw = run_job_json(text)
    return {
        "report": _json.loads(raw["report_json"]),
        "exit_code": raw["exit_code"],
        "csv": dict(raw["csv"]),
    }
