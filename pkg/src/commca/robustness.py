"""Exact checkers for excess-reachability and excess-robustness predicates.

The excess of an agent u with respect to a set S containing it is the number
of u's neighbors outside S minus the number inside S.  A set is r-excess
reachable when some member has excess at least r.  A graph is (r, s)-excess
robust when for every pair of non-empty disjoint agent subsets (S1, S2), with
X_i the members of S_i whose excess is at least r, at least one of the
following holds: |X1| + |X2| >= s, X1 = S1, or X2 = S2.  The plain r-excess
robust predicate asks instead that at least one of the two subsets be
r-excess reachable; it coincides with the s = 1 variant.

All verdicts here come from exhaustive enumeration of subset pairs (roughly
3^n / 2 configurations, capped by default at n = 15) except for complete
graphs, where a closed form decides the predicate at any size.  Negative
verdicts carry a machine-checkable witness pair.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .graph import Graph

DEFAULT_ENUMERATION_CAP = 15


class EnumerationCapExceeded(RuntimeError):
    """Raised when an exhaustive check would enumerate beyond the size cap."""

    def __init__(self, size: int, cap: int, what: str = "agents"):
        super().__init__(
            f"exhaustive enumeration over {size} {what} exceeds the cap of {cap}; "
            f"raise the cap (COMMCA_CAP) or force the check to proceed"
        )
        self.size = size
        self.cap = cap


@dataclass(frozen=True, eq=True)
class ReachabilityReport:
    """Excess bookkeeping for one subset at one threshold.

    reachable holds the members whose excess meets the threshold, and
    excess_by_agent records the excess of every member.
    """

    subset: frozenset[int]
    threshold: int
    reachable: frozenset[int]
    excess_by_agent: Mapping[int, int]

    @property
    def is_reachable(self) -> bool:
        return bool(self.reachable)

    @property
    def is_full(self) -> bool:
        return self.reachable == self.subset


@dataclass(frozen=True, eq=True)
class PairEvaluation:
    """Clause-by-clause evaluation of one disjoint subset pair at (r, s)."""

    first: ReachabilityReport
    second: ReachabilityReport
    s: int

    @property
    def reachable_total(self) -> int:
        return len(self.first.reachable) + len(self.second.reachable)

    @property
    def count_clause(self) -> bool:
        return self.reachable_total >= self.s

    @property
    def satisfied(self) -> bool:
        return self.count_clause or self.first.is_full or self.second.is_full


@dataclass(frozen=True, eq=True)
class RobustnessWitness:
    """Outcome of a robustness check.

    When robust is False, pair and reports describe one violating disjoint
    subset pair; re-evaluating the clauses on that pair reproduces the
    violation.  s is None for the plain r-excess robust predicate.
    """

    robust: bool
    r: int
    s: int | None
    pair: tuple[frozenset[int], frozenset[int]] | None = None
    reports: tuple[ReachabilityReport, ReachabilityReport] | None = None


@dataclass(frozen=True, eq=True)
class CommunityCheck:
    """Outcome of the community predicate for one candidate member set.

    A set V with f malicious members and external degree bound k (the largest
    number of edges a member has to the outside) qualifies when its induced
    subgraph is (k, f+1)-excess robust and its induced minimum degree is at
    least 2f + k + 1.  reasons lists the failed clauses, drawn from
    {"robustness", "degree"}.
    """

    members: frozenset[int]
    malicious_count: int
    external_degree: int
    robust: bool
    min_degree: int
    required_degree: int
    reasons: tuple[str, ...]
    witness: RobustnessWitness | None
    certified_analytically: bool

    @property
    def is_community(self) -> bool:
        return not self.reasons


@dataclass(frozen=True, eq=True)
class PreservationCounterexample:
    """A subset and agent violating reachability preservation.

    The agent's excess inside the community subgraph meets the community's
    external degree bound, yet adding the listed external neighbors to the
    subset drops its whole-graph excess below zero.
    """

    subset: frozenset[int]
    agent: int
    externals: frozenset[int]
    excess_in_subgraph: int
    excess_in_graph: int


@dataclass(frozen=True, eq=True)
class PreservationResult:
    ok: bool
    mode: str
    threshold: int
    subsets_checked: int
    counterexample: PreservationCounterexample | None = None


def excess(g: Graph, u: int, inside: Iterable[int]) -> int:
    """Neighbors of u outside `inside` minus neighbors inside.  u must be a member."""
    members = frozenset(int(x) for x in inside)
    bad = [x for x in members if not (0 <= x < g.n)]
    if bad:
        raise ValueError(f"member ids outside 0..{g.n - 1}: {sorted(bad)}")
    if u not in members:
        raise ValueError(f"agent {u} is not a member of the set")
    nbrs = g.neighbors(u)
    inside_count = sum(1 for v in nbrs if v in members)
    return (len(nbrs) - inside_count) - inside_count


def reachable_set(g: Graph, members: Iterable[int], threshold: int) -> ReachabilityReport:
    """Members whose excess with respect to the member set meets `threshold`."""
    subset = frozenset(int(x) for x in members)
    if not subset:
        raise ValueError("member set must be non-empty")
    by_agent = {u: excess(g, u, subset) for u in sorted(subset)}
    reach = frozenset(u for u, e in by_agent.items() if e >= threshold)
    return ReachabilityReport(subset, threshold, reach, by_agent)


def evaluate_pair(
    g: Graph, first: Iterable[int], second: Iterable[int], r: int, s: int
) -> PairEvaluation:
    """Evaluate the (r, s) clauses on one explicit pair of disjoint subsets.

    This is the re-checking path for witnesses: it shares no state with the
    enumerating checkers.
    """
    a = frozenset(int(x) for x in first)
    b = frozenset(int(x) for x in second)
    if not a or not b:
        raise ValueError("both subsets must be non-empty")
    if a & b:
        raise ValueError(f"subsets are not disjoint: share {sorted(a & b)}")
    if s < 1:
        raise ValueError("s must be at least 1")
    return PairEvaluation(reachable_set(g, a, r), reachable_set(g, b, r), s)


def _disjoint_pairs(n: int) -> Iterator[tuple[int, int]]:
    # Every unordered pair of non-empty disjoint subsets is produced exactly
    # once, as bitmasks, by requiring the lowest agent id of the union to sit
    # in the first subset.
    full = (1 << n) - 1
    for first in range(1, full + 1):
        low = first & -first
        allowed = full & ~first & ~((low << 1) - 1)
        second = allowed
        while second:
            yield first, second
            second = (second - 1) & allowed


def _pair_passes_rs(masks: tuple[int, ...], first: int, second: int, r: int, s: int) -> bool:
    # Early exits: the count clause is monotone while scanning, and a fully
    # reachable side settles the pair on its own.
    count = 0
    size_first = first.bit_count()
    mm = first
    while mm:
        low = mm & -mm
        mm ^= low
        nb = masks[low.bit_length() - 1]
        inside = (nb & first).bit_count()
        if nb.bit_count() - 2 * inside >= r:
            count += 1
            if count >= s:
                return True
    if count == size_first:
        return True
    size_second = second.bit_count()
    reach_second = 0
    mm = second
    while mm:
        low = mm & -mm
        mm ^= low
        nb = masks[low.bit_length() - 1]
        inside = (nb & second).bit_count()
        if nb.bit_count() - 2 * inside >= r:
            reach_second += 1
            if count + reach_second >= s:
                return True
    return reach_second == size_second


def _pair_passes_r(masks: tuple[int, ...], first: int, second: int, r: int) -> bool:
    for mask in (first, second):
        mm = mask
        while mm:
            low = mm & -mm
            mm ^= low
            nb = masks[low.bit_length() - 1]
            inside = (nb & mask).bit_count()
            if nb.bit_count() - 2 * inside >= r:
                return True
    return False


def _mask_ids(mask: int) -> frozenset[int]:
    ids = []
    while mask:
        low = mask & -mask
        mask ^= low
        ids.append(low.bit_length() - 1)
    return frozenset(ids)


def _check_size(g: Graph, cap: int | None) -> None:
    if cap is not None and g.n > cap:
        raise EnumerationCapExceeded(g.n, cap)


def is_rs_excess_robust(
    g: Graph, r: int, s: int, cap: int | None = DEFAULT_ENUMERATION_CAP
) -> RobustnessWitness:
    """Decide (r, s)-excess robustness by exhaustive pair enumeration.

    Empty and singleton graphs are vacuously robust (no disjoint pair
    exists).  Pass cap=None to lift the size cap.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if s < 1:
        raise ValueError("s must be at least 1")
    _check_size(g, cap)
    masks = g.neighbor_masks()
    for first, second in _disjoint_pairs(g.n):
        if not _pair_passes_rs(masks, first, second, r, s):
            a, b = _mask_ids(first), _mask_ids(second)
            ev = evaluate_pair(g, a, b, r, s)
            return RobustnessWitness(False, r, s, (a, b), (ev.first, ev.second))
    return RobustnessWitness(True, r, s)


def is_r_excess_robust(
    g: Graph, r: int, cap: int | None = DEFAULT_ENUMERATION_CAP
) -> RobustnessWitness:
    """Decide r-excess robustness: every disjoint pair must have a reachable side."""
    if r < 0:
        raise ValueError("r must be non-negative")
    _check_size(g, cap)
    masks = g.neighbor_masks()
    for first, second in _disjoint_pairs(g.n):
        if not _pair_passes_r(masks, first, second, r):
            a, b = _mask_ids(first), _mask_ids(second)
            ra = reachable_set(g, a, r)
            rb = reachable_set(g, b, r)
            return RobustnessWitness(False, r, None, (a, b), (ra, rb))
    return RobustnessWitness(True, r, None)


def complete_rs_certificate(n: int, r: int, s: int) -> bool:
    """Closed-form (r, s)-excess robustness verdict for the complete graph K_n.

    Every member of a k-subset of K_n has excess n - 2k + 1, so a subset's
    reachable set is either all of it or empty.  A pair therefore fails only
    when both subsets are entirely below the threshold, which requires two
    disjoint subsets of size k_min, the smallest k with n - 2k + 1 < r.  The
    verdict is consequently independent of s (any failing pair has a
    reachable count of zero, and s >= 1).
    """
    if n < 2:
        raise ValueError("the certificate applies to complete graphs on n >= 2 agents")
    if r < 0:
        raise ValueError("r must be non-negative")
    if s < 1:
        raise ValueError("s must be at least 1")
    k_min = max(1, (n + 1 - r) // 2 + 1)
    return 2 * k_min > n


def is_community(
    g: Graph,
    members: Iterable[int],
    malicious_count: int,
    cap: int | None = DEFAULT_ENUMERATION_CAP,
) -> CommunityCheck:
    """Community predicate: induced robustness plus the induced degree bound.

    The robustness clause runs on the induced subgraph at threshold equal to
    the member set's external degree bound, with required count
    malicious_count + 1.  When the induced subgraph is complete the closed
    form replaces enumeration, so large complete communities stay checkable.
    """
    if malicious_count < 0:
        raise ValueError("malicious count must be non-negative")
    ext = g.max_external_degree(members)
    sub, nodes = g.induced_subgraph(members)
    dmin = sub.min_degree()
    required = 2 * malicious_count + ext + 1
    witness: RobustnessWitness | None = None
    analytic = False
    if sub.n == 1:
        robust = True
    elif sub.is_complete():
        robust = complete_rs_certificate(sub.n, ext, malicious_count + 1)
        analytic = True
    else:
        witness = is_rs_excess_robust(sub, ext, malicious_count + 1, cap=cap)
        witness = _translate_witness(witness, nodes)
        robust = witness.robust
    reasons = []
    if not robust:
        reasons.append("robustness")
    if dmin < required:
        reasons.append("degree")
    return CommunityCheck(
        members=frozenset(nodes),
        malicious_count=malicious_count,
        external_degree=ext,
        robust=robust,
        min_degree=dmin,
        required_degree=required,
        reasons=tuple(reasons),
        witness=witness,
        certified_analytically=analytic,
    )


def _translate_witness(w: RobustnessWitness, nodes: tuple[int, ...]) -> RobustnessWitness:
    # Witnesses found on an induced subgraph are reported in original ids.
    if w.pair is None:
        return w
    def back(ids: frozenset[int]) -> frozenset[int]:
        return frozenset(nodes[i] for i in ids)
    reports = tuple(
        ReachabilityReport(
            subset=back(rep.subset),
            threshold=rep.threshold,
            reachable=back(rep.reachable),
            excess_by_agent={nodes[u]: e for u, e in rep.excess_by_agent.items()},
        )
        for rep in w.reports
    )
    return RobustnessWitness(
        w.robust, w.r, w.s, (back(w.pair[0]), back(w.pair[1])), reports
    )


def verify_reachability_preservation(
    g: Graph,
    members: Iterable[int],
    mode: str = "exhaustive",
    samples: int = 10_000,
    seed: int = 0,
    cap: int | None = DEFAULT_ENUMERATION_CAP,
) -> PreservationResult:
    """Check that community-level reachability survives external neighbors.

    For subsets S of the member set, every agent whose excess inside the
    community subgraph meets the external degree bound must keep non-negative
    whole-graph excess with respect to S extended by any subset of its
    external neighbors.  Exhaustive mode enumerates every non-empty S (member
    count limited by the cap); sampled mode draws `samples` non-empty subsets
    uniformly with a seeded generator.
    """
    member_list = sorted(frozenset(int(u) for u in members))
    if not member_list:
        raise ValueError("member set must be non-empty")
    k = len(member_list)
    threshold = g.max_external_degree(member_list)
    masks = g.neighbor_masks()
    member_mask = sum(1 << u for u in member_list)
    internal = {u: masks[u] & member_mask for u in member_list}
    external_ids = {u: _mask_ids(masks[u] & ~member_mask) for u in member_list}

    def violation(smask: int) -> PreservationCounterexample | None:
        mm = smask
        while mm:
            low = mm & -mm
            mm ^= low
            u = low.bit_length() - 1
            nb_in = internal[u]
            exc_in = (nb_in & ~smask & member_mask).bit_count() - (nb_in & smask).bit_count()
            if exc_in < threshold:
                continue
            ext = sorted(external_ids[u])
            for pick in range(1 << len(ext)):
                extended = smask
                chosen = []
                for j, v in enumerate(ext):
                    if pick >> j & 1:
                        extended |= 1 << v
                        chosen.append(v)
                nb = masks[u]
                exc_g = (nb & ~extended).bit_count() - (nb & extended).bit_count()
                if exc_g < 0:
                    return PreservationCounterexample(
                        subset=_mask_ids(smask),
                        agent=u,
                        externals=frozenset(chosen),
                        excess_in_subgraph=exc_in,
                        excess_in_graph=exc_g,
                    )
        return None

    checked = 0
    if mode == "exhaustive":
        if cap is not None and k > cap:
            raise EnumerationCapExceeded(k, cap, what="community members")
        sub = member_mask
        while sub:
            checked += 1
            bad = violation(sub)
            if bad is not None:
                return PreservationResult(False, mode, threshold, checked, bad)
            sub = (sub - 1) & member_mask
    elif mode == "sampled":
        if samples < 1:
            raise ValueError("sample count must be positive")
        rng = random.Random(seed)
        while checked < samples:
            bits = rng.getrandbits(k)
            if not bits:
                continue
            smask = 0
            for j in range(k):
                if bits >> j & 1:
                    smask |= 1 << member_list[j]
            checked += 1
            bad = violation(smask)
            if bad is not None:
                return PreservationResult(False, mode, threshold, checked, bad)
    else:
        raise ValueError(f"unknown mode {mode!r}; use 'exhaustive' or 'sampled'")
    return PreservationResult(True, mode, threshold, checked)


def format_witness(w: RobustnessWitness) -> str:
    """Structured text rendering of a robustness verdict and its witness."""
    kind = f"({w.r}, {w.s})-excess robust" if w.s is not None else f"{w.r}-excess robust"
    if w.robust:
        return f"robust: yes ({kind})\n"
    lines = [f"robust: no (not {kind})"]
    first, second = w.reports
    if w.s is not None:
        lines.append(
            f"violating pair: reachable {len(first.reachable)} + {len(second.reachable)}"
            f" < {w.s}, neither side fully reachable"
        )
    else:
        lines.append("violating pair: neither side has a reachable agent")
    for name, rep in (("first", first), ("second", second)):
        ids = " ".join(str(u) for u in sorted(rep.subset))
        lines.append(f"{name} subset: {ids}")
        table = ", ".join(
            f"{u}:{rep.excess_by_agent[u]}" for u in sorted(rep.subset)
        )
        lines.append(f"{name} excess (threshold {rep.threshold}): {table}")
    return "\n".join(lines) + "\n"
