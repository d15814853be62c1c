"""Data-file parsing and the two bundled lifetime datasets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np


class DataFileError(ValueError):
    """A data file could not be parsed; the message names the offending lines."""


# Feigl and Zelen (1965) leukemia survival times, days
SURVIVAL = (
    65, 156, 100, 134, 16, 108, 121, 4, 39, 143, 56, 26, 22, 1, 1, 5, 65,
    56, 65, 17, 7, 16, 22, 3, 4, 2, 3, 8, 4, 3, 30, 4, 43,
)

# Murthy, Xie and Jiang (2004) component failure times
FAILURE = (
    0.0003, 0.0298, 0.1648, 0.3529, 0.4044, 0.5712, 0.5808, 0.7607, 0.8188,
    1.1296, 1.2228, 1.2773, 1.9115, 2.2333, 2.3791, 3.0916, 3.4999, 3.7744,
    7.4339, 13.6866,
)


@dataclass(frozen=True)
class Sample:
    """
    Sorted, strictly positive observations with a provenance string.

    ``values`` is a read-only float array in ascending order.
    """

    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())
        if v.size == 0:
            raise ValueError("a sample needs at least one observation")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample contains non-finite values")
        if v[0] <= 0:
            raise ValueError(f"sample values must be strictly positive; smallest is {v[0]!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def has_ties(self) -> bool:
        return bool(np.any(np.diff(self.values) == 0))

    def scaled(self, c: float) -> "Sample":
        return Sample(self.values * c, f"{self.source}*{c:g}")

    def __len__(self):
        return self.n


def parse_values(lines: Iterable[str], origin: str = "<input>") -> np.ndarray:
    """
    One decimal value per line; ``#`` starts a comment, blank lines are
    skipped. Every problem line is reported, not just the first.
    """
    out = []
    errors = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            v = float(text)
        except ValueError:
            errors.append(f"{origin}:{lineno}: not a number: {text!r}")
            continue
        if not math.isfinite(v) or v <= 0:
            errors.append(f"{origin}:{lineno}: value must be finite and > 0, got {text!r}")
            continue
        out.append(v)
    if errors:
        raise DataFileError("\n".join(errors))
    if not out:
        raise DataFileError(f"{origin}: no data values found")
    return np.asarray(out)


def read_sample(path: Union[str, Path]) -> Sample:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFileError(f"{path}: {exc.strerror or exc}") from exc
    return Sample(parse_values(text.splitlines(), str(path)), source=str(path))


def survival_sample() -> Sample:
    return Sample(np.asarray(SURVIVAL, dtype=float), "survival")


def failure_sample() -> Sample:
    return Sample(np.asarray(FAILURE, dtype=float), "failure")
