from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("real", "integer", "vector")


@dataclass(frozen=True)
class SequenceSample:
    """One realization of a discrete-time process.

    ``values`` is a 1-d array (real or integer kind) or a 2-d array whose rows
    are fixed-width integer vectors.
    """

    values: np.ndarray
    model_id: str
    kind: str = "real"

    def __post_init__(self):
        vals = np.asarray(self.values)
        if self.kind not in KINDS:
            raise ValueError(f"unknown outcome kind {self.kind!r}")
        if self.kind == "vector":
            if vals.ndim != 2 and not (vals.ndim == 1 and vals.size == 0):
                raise ValueError("vector-valued samples need a 2-d array")
        elif vals.ndim != 1:
            raise ValueError("scalar samples need a 1-d array")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.n

    def tolist(self) -> list:
        return self.values.tolist()
