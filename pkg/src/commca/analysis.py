"""Trace analysis: per-community agreement, safety, and cluster verdicts.

A community reaches agreement when the spread of its legitimate members'
values stays below epsilon over the final window of rounds.  It is safe when
every legitimate member's value stays, at every round, inside the community's
initial value interval widened by tau.  The interval defaults to the
legitimate members' initial min/max; hull="all" switches to the interval over
all members, malicious included.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .protocol import Trace


@dataclass(frozen=True)
class Cluster:
    """Group of legitimate agents whose final values sit within delta."""

    limit: float
    members: tuple[int, ...]


@dataclass(frozen=True)
class CommunityOutcome:
    """Agreement and safety result for one community (0-based index)."""

    community: int
    agreement: bool
    limit: float | None
    safety: bool
    first_violation: tuple[int, int] | None
    clusters: tuple[Cluster, ...]


@dataclass(frozen=True)
class RacVerdict:
    """Resilient asymptotic consensus verdict: one outcome per community."""

    outcomes: tuple[CommunityOutcome, ...]
    epsilon: float
    delta: float
    window: int
    tau: float
    hull: str

    def outcome(self, community: int) -> CommunityOutcome:
        return self.outcomes[community]

    @property
    def all_pass(self) -> bool:
        return all(o.agreement and o.safety for o in self.outcomes)


def spread(trace: Trace, community: int, t: int) -> float:
    """Max minus min over the community's legitimate values at round t."""
    members = sorted(trace.config.layout.legitimate_in(community))
    if not members:
        return 0.0
    row = trace.values[t, members]
    return float(row.max() - row.min())


def _clusters(ids: list[int], finals: np.ndarray, delta: float) -> tuple[Cluster, ...]:
    # Greedy grouping over value-sorted agents, anchored at each cluster's
    # smallest value so intra-cluster spread stays below delta.
    order = sorted(range(len(ids)), key=lambda j: (finals[j], ids[j]))
    groups: list[list[int]] = []
    anchor = 0.0
    for j in order:
        v = float(finals[j])
        if groups and v - anchor < delta:
            groups[-1].append(j)
        else:
            groups.append([j])
            anchor = v
    return tuple(
        Cluster(
            limit=float(np.mean([finals[j] for j in grp])),
            members=tuple(sorted(ids[j] for j in grp)),
        )
        for grp in groups
    )


def rac_verdict(
    trace: Trace,
    epsilon: float = 1e-6,
    delta: float = 1e-3,
    window: int = 50,
    tau: float = 1e-9,
    hull: str = "legitimate",
) -> RacVerdict:
    """Classify every community of the trace for agreement and safety."""
    if epsilon <= 0 or delta <= 0 or tau < 0:
        raise ValueError("epsilon and delta must be positive and tau non-negative")
    if window < 1:
        raise ValueError("agreement window must be at least 1")
    if hull not in ("legitimate", "all"):
        raise ValueError(f"hull must be 'legitimate' or 'all', got {hull!r}")
    rows = trace.values
    if rows.shape[0] < window:
        raise ValueError(
            f"trace has {rows.shape[0]} rows, fewer than the agreement window {window}"
        )
    layout = trace.config.layout
    outcomes = []
    for i in range(len(layout)):
        members = sorted(layout.legitimate_in(i))
        if not members:
            outcomes.append(
                CommunityOutcome(i, True, None, True, None, ())
            )
            continue
        tail = rows[-window:, members]
        agreement = bool((tail.max(axis=1) - tail.min(axis=1) < epsilon).all())
        finals = rows[-1, members]
        clusters = _clusters(members, finals, delta)
        limit = float(finals.mean()) if agreement else None
        lo, hi = trace.initial_interval(i, legitimate_only=(hull == "legitimate"))
        block = rows[:, members]
        inside = (block >= lo - tau) & (block <= hi + tau)
        safety = bool(inside.all())
        first_violation = None
        if not safety:
            bad = ~inside
            t_first = int(np.argmax(bad.any(axis=1)))
            a_first = members[int(np.argmax(bad[t_first]))]
            first_violation = (t_first, a_first)
        outcomes.append(
            CommunityOutcome(i, agreement, limit, safety, first_violation, clusters)
        )
    return RacVerdict(tuple(outcomes), epsilon, delta, window, tau, hull)


def summary_lines(verdict: RacVerdict) -> list[str]:
    """One line per community, 1-based labels for human output."""
    lines = []
    for o in verdict.outcomes:
        parts = [
            f"community {o.community + 1}:",
            f"agreement={'yes' if o.agreement else 'no'}",
            f"safety={'yes' if o.safety else 'no'}",
        ]
        if o.limit is not None:
            parts.append(f"limit={o.limit:.6g}")
        parts.append(f"clusters={len(o.clusters)}")
        lines.append(" ".join(parts))
    return lines


def format_verdict(verdict: RacVerdict) -> str:
    """Full structured text report for a verdict."""
    lines = [
        "parameters: "
        f"epsilon={verdict.epsilon!r} delta={verdict.delta!r} "
        f"window={verdict.window} tau={verdict.tau!r} hull={verdict.hull}"
    ]
    for o in verdict.outcomes:
        lines.append(f"community {o.community + 1}")
        lines.append(f"  agreement: {'yes' if o.agreement else 'no'}")
        if o.limit is not None:
            lines.append(f"  limit: {o.limit!r}")
        if o.safety:
            lines.append("  safety: yes")
        else:
            t, a = o.first_violation
            lines.append(f"  safety: no (first violation: round {t}, agent {a})")
        lines.append(f"  clusters: {len(o.clusters)}")
        for k, cl in enumerate(o.clusters, start=1):
            ids = " ".join(str(u) for u in cl.members)
            lines.append(f"    cluster {k}: limit {cl.limit!r}, members {ids}")
    return "\n".join(lines) + "\n"
