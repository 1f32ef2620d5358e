"""Synchronous median-consensus rounds with Byzantine presentation strategies.

Each legitimate agent u updates as

    x_u(t+1) = alpha * x_u(t) + (1 - alpha) * median(values presented by u's neighbors)

with 0 < alpha < 1.  The agent's own value is not part of the median input.
Malicious agents follow no update rule: a strategy decides what they present,
and their stored trace value tracks what they present.  Rounds are
synchronous: every round-t+1 value is computed from round-t values only.

run() is a vectorized engine; step() is the plain reference it must agree
with exactly, which the test suite checks bitwise.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar, Iterable, Mapping, Sequence

import numpy as np

from .graph import CommunityLayout, Graph


class ConfigError(ValueError):
    """Simulation configuration rejected; problems lists every failure."""

    def __init__(self, problems: Sequence[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


def median(values: Iterable[float]) -> float:
    """Median of the values: middle element when odd, mean of the two middle
    elements when even."""
    vals = sorted(float(v) for v in values)
    d = len(vals)
    if d == 0:
        raise ValueError("median of an empty value list")
    mid = d // 2
    if d % 2:
        return vals[mid]
    return (vals[mid - 1] + vals[mid]) / 2.0


class AdversaryStrategy(ABC):
    """Decides the values malicious agents present to their neighbors."""

    # True when an agent may present different values to different neighbors;
    # such strategies force the engine onto its per-edge path.
    per_neighbor: ClassVar[bool] = False

    @abstractmethod
    def present(self, agent: int, neighbor: int, t: int) -> float:
        """Value `agent` presents to `neighbor` at round t."""

    @abstractmethod
    def displayed(self, agent: int, t: int) -> float:
        """Value recorded in the trace for `agent` at round t >= 1."""


@dataclass(frozen=True)
class ConstantValue(AdversaryStrategy):
    """Every malicious agent presents one fixed value forever."""

    value: float

    def present(self, agent: int, neighbor: int, t: int) -> float:
        return self.value

    def displayed(self, agent: int, t: int) -> float:
        return self.value


@dataclass(frozen=True)
class RoundScript(AdversaryStrategy):
    """Presented value follows a per-round script, holding its last entry."""

    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("script needs at least one value")

    def _at(self, t: int) -> float:
        return self.values[min(t, len(self.values) - 1)]

    def present(self, agent: int, neighbor: int, t: int) -> float:
        return self._at(t)

    def displayed(self, agent: int, t: int) -> float:
        return self._at(t)


@dataclass(frozen=True, eq=True)
class PerNeighborTable(AdversaryStrategy):
    """Equivocation: (agent, neighbor) pairs map to presented values.

    Pairs missing from the table fall back to `default`, which is also the
    value recorded in the trace for table-driven agents.
    """

    entries: Mapping[tuple[int, int], float]
    default: float

    per_neighbor: ClassVar[bool] = True

    def present(self, agent: int, neighbor: int, t: int) -> float:
        return self.entries.get((agent, neighbor), self.default)

    def displayed(self, agent: int, t: int) -> float:
        return self.default


@dataclass(frozen=True)
class PresetValues:
    """Initializer that assigns one explicit value per agent, id order."""

    values: tuple[float, ...]

    def initial_values(self, graph: Graph, layout: CommunityLayout, seed: int) -> np.ndarray:
        if len(self.values) != graph.n:
            raise ValueError(
                f"{len(self.values)} preset values for {graph.n} agents"
            )
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class StateVector:
    """All agent values at one synchronous round."""

    values: tuple[float, ...]
    round: int = 0


@dataclass(frozen=True)
class SimulationConfig:
    """Complete, reproducible description of one simulation run."""

    graph: Graph
    layout: CommunityLayout
    initializer: Any
    adversary: AdversaryStrategy | None
    alpha: float
    rounds: int
    seed: int

    def validation_problems(self) -> list[str]:
        problems = []
        if not (0.0 < self.alpha < 1.0):
            problems.append(f"alpha must lie strictly between 0 and 1, got {self.alpha}")
        if self.rounds < 1:
            problems.append(f"round count must be at least 1, got {self.rounds}")
        try:
            self.layout.require_covering(self.graph)
        except ValueError as exc:
            problems.append(str(exc))
        else:
            isolated = [
                u for u in sorted(self.layout.legitimate) if self.graph.degree(u) == 0
            ]
            if isolated:
                problems.append(f"legitimate agents with no neighbors: {isolated}")
        if self.layout.malicious and self.adversary is None:
            problems.append("malicious agents present but no adversary strategy given")
        if self.initializer is None:
            problems.append("no initializer given")
        return problems

    def validate(self) -> None:
        problems = self.validation_problems()
        if problems:
            raise ConfigError(problems)


def step(
    state: StateVector,
    g: Graph,
    layout: CommunityLayout,
    alpha: float,
    adversary: AdversaryStrategy | None,
) -> StateVector:
    """One synchronous round, computed agent by agent from round-t values.

    This is the reference semantics; its result does not depend on the agent
    iteration order because it only reads `state`.
    """
    t = state.round
    vals = state.values
    malicious = layout.malicious
    out = []
    for u in range(g.n):
        if u in malicious:
            out.append(adversary.displayed(u, t + 1))
            continue
        presented = [
            vals[v] if v not in malicious else adversary.present(v, u, t)
            for v in g.neighbors(u)
        ]
        out.append(alpha * vals[u] + (1.0 - alpha) * median(presented))
    return StateVector(tuple(out), t + 1)


@dataclass
class IsolationReport:
    """Runtime isolation bookkeeping for one community.

    Counts the (round, agent) events where a legitimate member's median input
    fell outside the community's initial legitimate value interval, and keeps
    the first such event as (round, agent, median).
    """

    community: int
    violations: int
    first: tuple[int, int, float] | None

    @property
    def ok(self) -> bool:
        return self.violations == 0


@dataclass
class Trace:
    """values[t, u] is agent u's stored value at round t (row 0 is initial)."""

    values: np.ndarray
    config: SimulationConfig
    legitimate_intervals: tuple[tuple[float, float] | None, ...]
    isolation: tuple[IsolationReport, ...]

    @property
    def rounds(self) -> int:
        return self.values.shape[0] - 1

    def value(self, t: int, agent: int) -> float:
        return float(self.values[t, agent])

    def final_values(self) -> np.ndarray:
        return self.values[-1]

    def initial_interval(
        self, community: int, legitimate_only: bool = True
    ) -> tuple[float, float] | None:
        """Min/max initial value over the community's members.

        With legitimate_only the malicious members' initial values are
        ignored; a community with no legitimate members then has no interval.
        """
        if legitimate_only:
            return self.legitimate_intervals[community]
        members = sorted(self.config.layout.subsets[community])
        row = self.values[0, members]
        return float(row.min()), float(row.max())

    def to_csv_text(self) -> str:
        layout = self.config.layout
        community = [layout.community_of(u) + 1 for u in range(self.values.shape[1])]
        role = [
            "malicious" if layout.is_malicious(u) else "legitimate"
            for u in range(self.values.shape[1])
        ]
        lines = ["round,agent,community,role,value"]
        for t in range(self.values.shape[0]):
            row = self.values[t]
            lines.extend(
                f"{t},{u},{community[u]},{role[u]},{float(row[u])!r}"
                for u in range(self.values.shape[1])
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())


def run(config: SimulationConfig) -> Trace:
    """Run the full simulation and collect the trace.

    Equivalent to iterating step() from the initial values; vectorized over
    agents grouped by degree so large dense graphs stay fast.  Medians of
    legitimate members are checked against each community's initial
    legitimate interval every round (isolation bookkeeping).
    """
    config.validate()
    g, layout = config.graph, config.layout
    n, T, alpha = g.n, config.rounds, config.alpha
    adversary = config.adversary

    x0 = np.array(
        config.initializer.initial_values(g, layout, config.seed), dtype=np.float64
    )
    if x0.shape != (n,):
        raise ConfigError([f"initializer produced shape {x0.shape}, expected ({n},)"])
    if not np.isfinite(x0).all():
        bad = sorted(int(u) for u in np.flatnonzero(~np.isfinite(x0)))
        raise ConfigError([f"non-finite initial values for agents {bad}"])

    malicious_ids = sorted(layout.malicious)
    legit_ids = sorted(layout.legitimate)
    legit_arr = np.array(legit_ids, dtype=np.intp)
    per_edge = adversary is not None and adversary.per_neighbor

    by_degree: dict[int, list[int]] = {}
    for u in legit_ids:
        by_degree.setdefault(g.degree(u), []).append(u)
    groups = []
    for d, agents in sorted(by_degree.items()):
        ids_arr = np.array(agents, dtype=np.intp)
        idx = np.array([g.neighbors(u) for u in agents], dtype=np.intp)
        groups.append((ids_arr, idx))

    c = len(layout)
    comm_legit = [
        np.array(sorted(layout.legitimate_in(i)), dtype=np.intp) for i in range(c)
    ]
    intervals: list[tuple[float, float] | None] = []
    for arr in comm_legit:
        if arr.size:
            intervals.append((float(x0[arr].min()), float(x0[arr].max())))
        else:
            intervals.append(None)
    iso_count = [0] * c
    iso_first: list[tuple[int, int, float] | None] = [None] * c

    rows = np.empty((T + 1, n), dtype=np.float64)
    rows[0] = x0
    x = x0.copy()
    medians = np.full(n, np.nan)

    for t in range(T):
        if per_edge:
            for u in legit_ids:
                presented = [
                    x[v] if v not in layout.malicious else adversary.present(v, u, t)
                    for v in g.neighbors(u)
                ]
                medians[u] = median(presented)
        else:
            p = x.copy()
            for m in malicious_ids:
                p[m] = adversary.displayed(m, t)
            for ids_arr, idx in groups:
                block = np.sort(p[idx], axis=1)
                d = idx.shape[1]
                mid = d // 2
                if d % 2:
                    medians[ids_arr] = block[:, mid]
                else:
                    medians[ids_arr] = (block[:, mid - 1] + block[:, mid]) / 2.0

        for i in range(c):
            arr = comm_legit[i]
            if arr.size == 0:
                continue
            lo, hi = intervals[i]
            m_i = medians[arr]
            bad = (m_i < lo) | (m_i > hi)
            if bad.any():
                iso_count[i] += int(bad.sum())
                if iso_first[i] is None:
                    j = int(np.argmax(bad))
                    iso_first[i] = (t, int(arr[j]), float(m_i[j]))

        nxt = x.copy()
        if legit_arr.size:
            nxt[legit_arr] = alpha * x[legit_arr] + (1.0 - alpha) * medians[legit_arr]
        for m in malicious_ids:
            nxt[m] = adversary.displayed(m, t + 1)
        rows[t + 1] = nxt
        x = nxt

    rows.setflags(write=False)
    reports = tuple(
        IsolationReport(i, iso_count[i], iso_first[i]) for i in range(c)
    )
    return Trace(rows, config, tuple(intervals), reports)
