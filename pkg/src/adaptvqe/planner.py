"""Hardware planning arithmetic: qubit-window quality and job splitting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class QubitCalibration:
    index: int
    t1_us: float
    t2_us: float
    readout_error: float
    eps2: float


@dataclass(frozen=True)
class CalibrationSnapshot:
    qubits: tuple[QubitCalibration, ...]
    chain: tuple[int, ...]
    timestamp: str = ""

    def __post_init__(self):
        known = {q.index for q in self.qubits}
        if len(known) != len(self.qubits):
            raise ValueError("duplicate qubit index in snapshot")
        for q in self.qubits:
            if q.t1_us <= 0 or q.t2_us <= 0:
                raise ValueError(f"qubit {q.index}: coherence times must be positive")
            for name in ("readout_error", "eps2"):
                v = getattr(q, name)
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"qubit {q.index}: {name}={v} outside [0, 1]")
        if any(i not in known for i in self.chain):
            raise ValueError("chain references an unknown qubit")
        if len(set(self.chain)) != len(self.chain):
            raise ValueError("chain visits a qubit twice")

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationSnapshot":
        try:
            qubits = tuple(
                QubitCalibration(int(q["index"]), float(q["t1_us"]), float(q["t2_us"]),
                                 float(q["readout_error"]), float(q["eps2"]))
                for q in d["qubits"]
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"calibration record missing field {exc}") from None
        chain = tuple(int(i) for i in d.get("chain", [q.index for q in qubits]))
        return cls(qubits, chain, str(d.get("timestamp", "")))

    @classmethod
    def from_json(cls, text: str) -> "CalibrationSnapshot":
        return cls.from_dict(json.loads(text))

    def arrays(self):
        by_index = {q.index: q for q in self.qubits}
        return by_index, (
            np.mean([q.t1_us for q in self.qubits]),
            np.mean([q.t2_us for q in self.qubits]),
            np.mean([q.eps2 for q in self.qubits]),
        )


def qubit_scores(snapshot: CalibrationSnapshot) -> dict[int, float]:
    """Per-qubit summand ``(1 - eps2)/(1 - mean eps2) + T1/mean T1 + T2/mean T2``."""
    by_index, (t1m, t2m, e2m) = snapshot.arrays()
    if e2m >= 1.0:
        raise ValueError("average two-qubit error of 1 leaves the fidelity ratio undefined")
    return {
        i: (1.0 - q.eps2) / (1.0 - e2m) + q.t1_us / t1m + q.t2_us / t2m for i, q in by_index.items()
    }


def layout_quality(window: Sequence[int], snapshot: CalibrationSnapshot) -> float:
    if len(window) == 0:
        raise ValueError("empty qubit window")
    scores = qubit_scores(snapshot)
    missing = [i for i in window if i not in scores]
    if missing:
        raise ValueError(f"qubits {missing} not in snapshot")
    return float(sum(scores[i] for i in window))


def select_layout(n_needed: int, snapshot: CalibrationSnapshot) -> list[int]:
    """Contiguous chain window of ``n_needed`` qubits with the largest quality (first on ties)."""
    chain = snapshot.chain
    if n_needed < 1 or n_needed > len(chain):
        raise ValueError(f"cannot place {n_needed} qubits on a chain of {len(chain)}")
    scores = qubit_scores(snapshot)
    # same summation order as layout_quality so ties resolve identically
    sums = [float(sum(scores[i] for i in chain[k : k + n_needed])) for k in range(len(chain) - n_needed + 1)]
    start = int(np.argmax(sums))
    return list(chain[start : start + n_needed])


@dataclass(frozen=True)
class JobPlan:
    n_jobs: int
    ranges: tuple[tuple[int, int], ...]
    depth: int
    n_terms: int
    limit: int

    def to_dict(self):
        return {"n_jobs": self.n_jobs, "ranges": [list(r) for r in self.ranges],
                "depth": self.depth, "n_terms": self.n_terms, "limit": self.limit}


def n_jobs(depth: int, n_terms: int, limit: int) -> int:
    return max(1, math.ceil(depth * n_terms / limit))


def job_split(depth: int, n_terms: int, limit: int = 33000) -> JobPlan:
    if depth < 0 or n_terms < 1 or limit < 1:
        raise ValueError("need depth >= 0, n_terms >= 1, limit >= 1")
    nj = n_jobs(depth, n_terms, limit)
    edges = np.linspace(0, n_terms, nj + 1).round().astype(int)
    ranges = tuple((int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]))
    return JobPlan(nj, ranges, depth, n_terms, limit)
