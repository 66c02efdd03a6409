"""Minimal time-series container shared by scenarios and analyses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TimeSeries:
    """Strictly increasing times plus named scalar columns of equal length."""

    t: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1:
            raise ValueError("t must be one-dimensional")
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("times must be strictly increasing")
        for name, col in self.columns.items():
            col = np.asarray(col)
            if col.shape[0] != self.t.shape[0]:
                raise ValueError(f"column {name!r} length does not match t")
            self.columns[name] = col

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def at_time(self, t: float, name: str) -> float:
        """Value of a column at the recorded time closest to t."""
        idx = int(np.argmin(np.abs(self.t - t)))
        return float(self.columns[name][idx])

    def window(self, t0: float, t1: float) -> "TimeSeries":
        mask = (self.t >= t0) & (self.t <= t1)
        return TimeSeries(
            t=self.t[mask], columns={k: v[mask] for k, v in self.columns.items()}
        )
