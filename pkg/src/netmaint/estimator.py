"""Estimator-style wrapper around the master solver.

``MaintenanceScheduler(mode="main").fit(instance)`` solves the instance and
stores the result in trailing-underscore attributes, in the manner of
scikit-learn estimators. There is no ``predict``: a fitted scheduler's
output is the schedule itself.
"""

from __future__ import annotations

import inspect

from .instance import Instance, Schedule, evaluate_schedule
from .master import SolverConfig, solve_instance


class MaintenanceScheduler:
    """Schedule maintenance requests to maximise total network throughput.

    Parameters mirror :class:`~netmaint.master.SolverConfig`.

    Attributes set by :meth:`fit`: ``schedule_`` (best schedule found or
    ``None``), ``report_`` (:class:`~netmaint.master.SolveReport`) and
    ``model_`` (the master model with its cut pool and flow cache).
    """

    def __init__(self, mode="main", time_limit=300.0, abs_gap=0.999, lpr_max_iters=20,
                 branch_priority=True, backend="highs"):
        self.mode = mode
        self.time_limit = time_limit
        self.abs_gap = abs_gap
        self.lpr_max_iters = lpr_max_iters
        self.branch_priority = branch_priority
        self.backend = backend

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self, deep=True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "MaintenanceScheduler":
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def config(self) -> SolverConfig:
        return SolverConfig(**self.get_params())

    def fit(self, instance: Instance, y=None) -> "MaintenanceScheduler":
        self.schedule_, self.report_, self.model_ = solve_instance(instance, self.config())
        self.instance_ = instance
        return self

    def score(self, instance: Instance | None = None, schedule: Schedule | None = None) -> int:
        """Total throughput of ``schedule`` (default: the fitted one)."""
        instance = self.instance_ if instance is None else instance
        schedule = self.schedule_ if schedule is None else schedule
        if schedule is None:
            raise ValueError("no schedule to score; fit found none")
        return evaluate_schedule(instance, schedule)

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"
