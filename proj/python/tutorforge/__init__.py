"""TutorForge: coverage, concept-gap feedback and grading for TutorLang test suites."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import _core
from ._core import Bundle, BundleError, DataError, ParseError, SubmissionError

__all__ = [
    "Analysis",
    "Bundle",
    "BundleError",
    "DataError",
    "ParseError",
    "SubmissionError",
    "analyze",
    "compute_grade",
    "group_summary",
    "load_bundle",
    "parse_bundle",
    "survey_summary",
    "welch_test",
]

__version__ = "0.1.0"


@dataclass(frozen=True)
class Analysis:
    metrics: dict
    gap: dict
    feedback: dict
    grade: float
    results: list
    html: str
    text: str


def load_bundle(path: str | os.PathLike) -> Bundle:
    """Load and validate an assignment bundle directory. Raises BundleError."""
    return _core.load_bundle(os.fspath(path))


def parse_bundle(files: Mapping[str, str]) -> Bundle:
    """Validate a bundle given as {relative path: text}."""
    return _core.parse_bundle(dict(files))


def _sources(suite) -> list[tuple[str, str]]:
    if isinstance(suite, str):
        return [("submission_test.tl", suite)]
    return [(str(path), str(text)) for path, text in dict(suite).items()]


def analyze(
    bundle: Bundle,
    suite: str | Mapping[str, str],
    program: str | None = None,
    *,
    mode: str | None = None,
    weights: tuple[float, float] = (0.7, 0.3),
    max_steps: int = 1_000_000,
    max_depth: int = 256,
) -> Analysis:
    """Run a student suite through the same pipeline the web service uses.

    `suite` is test source text, or {file name: text} for several files.
    `program` is required for Development-mode bundles. `mode` overrides the
    bundle's feedback mode (NONE, DETAILED or CONCEPTUAL).
    """
    prog = ("submission.tl", program) if program is not None else None
    raw = _core.run(bundle, _sources(suite), prog, mode, weights[0], weights[1], max_steps, max_depth)
    return Analysis(**json.loads(raw))


def compute_grade(metrics: Mapping, weights: tuple[float, float] = (0.7, 0.3)) -> float:
    """Grade from a metrics dict as returned in Analysis.metrics."""
    return _core.compute_grade(json.dumps(dict(metrics)), weights[0], weights[1])


def welch_test(a: Sequence[float], b: Sequence[float]) -> dict:
    """Welch two-sample t-test, two-sided."""
    return _core.welch_test(list(a), list(b))


def group_summary(records_csv: str, phase: str, format: str = "text") -> str:
    """Group A vs B table for one phase (PRETEST, TREATMENT, POSTTEST)."""
    return _core.group_summary(records_csv, phase.upper(), format)


def survey_summary(survey_csv: str, format: str = "text") -> str:
    return _core.survey_summary(survey_csv, format)
