"""Normalized score: mean percentage of each metric relative to a baseline."""

from __future__ import annotations

import math
from collections.abc import Mapping

import numpy as np

from ._validation import InputError

__all__ = [
    "METRICS",
    "TASKS",
    "ScoreTable",
    "task_members",
    "normalized_score",
    "multi_seed_summary",
    "format_score",
]

METRICS = ("Ac25", "Ac50", "F1_25", "F1_50", "B4_50", "C50", "C", "EM_ScanQA", "EM_SQA3D")

TASKS = {
    "3DVG": ("Ac25", "Ac50", "F1_25", "F1_50"),
    "3DCap": ("B4_50", "C50"),
    "3DQA": ("C", "EM_ScanQA", "EM_SQA3D"),
}
TASKS["All"] = TASKS["3DVG"] + TASKS["3DCap"] + TASKS["3DQA"]


class ScoreTable(Mapping):
    """Read-only mapping of metric name to a finite, non-negative value.

    Metrics may be absent (unreported); tasks needing them then reject
    the table.
    """

    def __init__(self, entries=(), **kwargs):
        data = dict(entries, **kwargs)
        clean = {}
        for name, value in data.items():
            if name not in METRICS:
                raise InputError(f"unknown metric {name!r}")
            value = float(value)
            if not math.isfinite(value) or value < 0:
                raise InputError(f"metric {name} must be finite and >= 0, got {value}")
            clean[name] = value
        self._entries = {m: clean[m] for m in METRICS if m in clean}

    @classmethod
    def from_row(cls, values, names=METRICS) -> "ScoreTable":
        return cls(zip(names, values))

    def __getitem__(self, key):
        return self._entries[key]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"ScoreTable({self._entries!r})"


def task_members(task) -> tuple[str, ...]:
    if isinstance(task, (tuple, list)):
        return tuple(task)
    for name, members in TASKS.items():
        if name.lower() == str(task).lower():
            return members
    raise InputError(f"unknown task {task!r}; expected one of {sorted(TASKS)}")


def normalized_score(scores, baseline, task="All") -> float:
    """``mean over m of 100 * scores[m] / baseline[m]`` for the task's metrics."""
    members = task_members(task)
    ratios = []
    for m in members:
        if m not in scores:
            raise InputError(f"scores lack metric {m} required by task")
        if m not in baseline:
            raise InputError(f"baseline lacks metric {m} required by task")
        if not baseline[m] > 0:
            raise InputError(f"baseline metric {m} must be positive")
        ratios.append(100.0 * scores[m] / baseline[m])
    return math.fsum(ratios) / len(ratios)


def multi_seed_summary(runs, baseline, task="All") -> tuple[float, float]:
    """Mean and population std of per-run normalized scores."""
    runs = list(runs)
    if not runs:
        raise InputError("no runs given")
    values = np.array([normalized_score(r, baseline, task) for r in runs])
    return float(values.mean()), float(values.std())


def format_score(value: float) -> str:
    """One decimal, round half to even."""
    return f"{round(value, 1):.1f}"
