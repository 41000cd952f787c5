"""Challenge descriptions for highway scenarios via set-based reachability analysis."""

from .challenge import ChallengeCase, ChallengeDescription, analyze, describe
from .scenario import AnalysisTask, builtin_task, load_task

__all__ = [
    "AnalysisTask",
    "ChallengeCase",
    "ChallengeDescription",
    "analyze",
    "builtin_task",
    "describe",
    "load_task",
]
