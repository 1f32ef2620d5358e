"""Scenario builders and the scenario document format.

The three example builders construct the two-community benchmark setups:

  example1: two large complete communities that both satisfy the community
    predicate, so both reach agreement inside their own initial intervals.
  example2: the second community is a 9-agent graph (a 5-clique and a
    4-clique joined only through one cut agent) that misses the robustness
    clause; with the cut agent malicious the community splits into two
    clusters.
  example3: the first community misses the degree clause by one because its
    legitimate agents' external edges are routed to malicious agents of the
    other community; its values get dragged out of the initial interval.

Builders are self-certifying: they re-check every structural property they
claim (external degree bounds, community predicate outcomes) and raise if
construction ever drifts from the claim.

Normal initial values are drawn from a PCG64 generator seeded with the
config seed; agents are visited in ascending id order, legitimate agents draw
from their community's distribution (explicit lists are consumed in the same
order), malicious agents take the constant.  The second parameter of
`normal` is a variance, not a standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import (
    CommunityLayout,
    FormatError,
    Graph,
    add_cross_edges,
    complete_graph,
    disjoint_union,
    format_graph,
    parse_graph,
)
from .protocol import (
    AdversaryStrategy,
    ConfigError,
    ConstantValue,
    PerNeighborTable,
    RoundScript,
    SimulationConfig,
)
from . import robustness

DEFAULT_SEED = 42
DEFAULT_ALPHA = 0.9
DEFAULT_ROUNDS = 5000

# The canonical violating split of example2's second community, original ids:
# the 5-clique side and the 4-clique side.
EXAMPLE2_SPLIT = (frozenset(range(16, 21)), frozenset(range(21, 25)))


@dataclass(frozen=True)
class NormalDraw:
    """Normal distribution by mean and variance."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (self.variance >= 0 and math.isfinite(self.variance)):
            raise ValueError(f"variance must be finite and non-negative, got {self.variance}")


@dataclass(frozen=True)
class ExplicitValues:
    """Explicit per-agent values for one community's legitimate members."""

    values: tuple[float, ...]


@dataclass(frozen=True)
class InitializerSpec:
    """Per-community initial value distributions plus the malicious constant."""

    communities: tuple[NormalDraw | ExplicitValues, ...]
    malicious_value: float | None = None

    def problems(self, graph: Graph, layout: CommunityLayout) -> list[str]:
        out = []
        if len(self.communities) != len(layout):
            out.append(
                f"{len(self.communities)} init entries for {len(layout)} communities"
            )
            return out
        for i, entry in enumerate(self.communities):
            if isinstance(entry, ExplicitValues):
                want = len(layout.legitimate_in(i))
                if len(entry.values) != want:
                    out.append(
                        f"community {i + 1} lists {len(entry.values)} explicit values "
                        f"for {want} legitimate members"
                    )
        if layout.malicious and self.malicious_value is None:
            out.append("malicious agents present but no malicious init value")
        return out

    def initial_values(self, graph: Graph, layout: CommunityLayout, seed: int) -> np.ndarray:
        bad = self.problems(graph, layout)
        if bad:
            raise ValueError("; ".join(bad))
        rng = np.random.Generator(np.random.PCG64(seed))
        values = np.empty(graph.n, dtype=np.float64)
        consumed = [0] * len(layout)
        for u in range(graph.n):
            if layout.is_malicious(u):
                values[u] = self.malicious_value
                continue
            i = layout.community_of(u)
            entry = self.communities[i]
            if isinstance(entry, NormalDraw):
                values[u] = entry.mean + math.sqrt(entry.variance) * rng.standard_normal()
            else:
                values[u] = entry.values[consumed[i]]
                consumed[i] += 1
        return values


def _certify(condition: bool, claim: str) -> None:
    if not condition:
        raise RuntimeError(f"builder self-certification failed: {claim}")


def example1(
    seed: int = DEFAULT_SEED,
    rounds: int = DEFAULT_ROUNDS,
    alpha: float = DEFAULT_ALPHA,
) -> SimulationConfig:
    """Two complete communities, both passing the community predicate.

    Community 1 is complete on 123 agents with 20 malicious, community 2 is
    complete on 35 agents with 10 malicious.  26 cross edges between
    legitimate agents, assigned round-robin over seeded shufflings of each
    side with coprime periods (24 and 25), give every community an external
    degree bound of exactly 2.  Legitimate values start at normal(2, 1) and
    normal(30, 5); malicious agents hold 60.
    """
    f1, f2 = 20, 10
    n1, n2 = 123, 35
    g = disjoint_union(complete_graph(n1), complete_graph(n2))
    community1 = frozenset(range(n1))
    community2 = frozenset(range(n1, n1 + n2))
    malicious = frozenset(range(n1 - f1, n1)) | frozenset(range(n1 + n2 - f2, n1 + n2))
    legit1 = sorted(community1 - malicious)
    legit2 = sorted(community2 - malicious)

    rng = np.random.Generator(np.random.PCG64(seed))
    side1 = [int(u) for u in rng.permutation(legit1)]
    side2 = [int(u) for u in rng.permutation(legit2)]
    pairs = [(side1[i % 24], side2[i % 25]) for i in range(26)]
    g = add_cross_edges(g, pairs)

    _certify(g.max_external_degree(community1) == 2, "community 1 external degree is 2")
    _certify(g.max_external_degree(community2) == 2, "community 2 external degree is 2")
    check1 = robustness.is_community(g, community1, f1)
    check2 = robustness.is_community(g, community2, f2)
    _certify(check1.is_community, "community 1 passes the community predicate")
    _certify(check2.is_community, "community 2 passes the community predicate")

    layout = CommunityLayout([community1, community2], malicious)
    init = InitializerSpec((NormalDraw(2.0, 1.0), NormalDraw(30.0, 5.0)), 60.0)
    return SimulationConfig(
        graph=g,
        layout=layout,
        initializer=init,
        adversary=ConstantValue(60.0),
        alpha=alpha,
        rounds=rounds,
        seed=seed,
    )


def example2(
    seed: int = DEFAULT_SEED,
    rounds: int = DEFAULT_ROUNDS,
    alpha: float = DEFAULT_ALPHA,
) -> SimulationConfig:
    """A sound community next to one that fails the robustness clause.

    Community 1 is complete on 16 agents with 6 malicious.  Community 2 has 9
    agents: a complete graph on its first five, a complete graph on its last
    four, and the fifth agent joined to all of the last four, making it the
    only bridge between the sides.  That bridge agent is the community's one
    malicious member.  Every agent in community 2 has degree at least 4, so
    the degree clause holds, but the graph is not (1, 2)-excess robust: the
    split into the 5-clique and the 4-clique has no 1-excess reachable agent
    on either side.  One cross edge joins the first agents of the two
    communities.
    """
    f1, f2 = 6, 1
    n1, n2 = 16, 9
    base = list(complete_graph(n1).edges)
    # community 2, original ids 16..24: 5-clique, 4-clique, bridge edges
    five = list(range(16, 21))
    four = list(range(21, 25))
    edges = base
    edges += [(a, b) for i, a in enumerate(five) for b in five[i + 1 :]]
    edges += [(a, b) for i, a in enumerate(four) for b in four[i + 1 :]]
    edges += [(20, b) for b in four]
    g = Graph(n1 + n2, edges)
    g = add_cross_edges(g, [(0, 16)])

    community1 = frozenset(range(n1))
    community2 = frozenset(range(n1, n1 + n2))
    malicious = frozenset(range(n1 - f1, n1)) | {20}

    _certify(g.max_external_degree(community1) == 1, "community 1 external degree is 1")
    _certify(g.max_external_degree(community2) == 1, "community 2 external degree is 1")
    check1 = robustness.is_community(g, community1, f1)
    _certify(check1.is_community, "community 1 passes the community predicate")
    sub, nodes = g.induced_subgraph(community2)
    _certify(sub.min_degree() == 4, "community 2 induced minimum degree is 4")
    verdict = robustness.is_rs_excess_robust(sub, 1, 2)
    _certify(not verdict.robust, "community 2 is not (1, 2)-excess robust")
    split = tuple(frozenset(nodes.index(u) for u in side) for side in EXAMPLE2_SPLIT)
    ev = robustness.evaluate_pair(sub, split[0], split[1], 1, 2)
    _certify(not ev.satisfied, "the clique split violates the (1, 2) clauses")

    layout = CommunityLayout([community1, community2], malicious)
    init = InitializerSpec((NormalDraw(2.0, 1.0), NormalDraw(30.0, 5.0)), 60.0)
    return SimulationConfig(
        graph=g,
        layout=layout,
        initializer=init,
        adversary=ConstantValue(60.0),
        alpha=alpha,
        rounds=rounds,
        seed=seed,
    )


def example3(
    seed: int = DEFAULT_SEED,
    rounds: int = DEFAULT_ROUNDS,
    alpha: float = DEFAULT_ALPHA,
) -> SimulationConfig:
    """A community that misses the degree clause by a single edge.

    Community 1 is complete on 15 agents with 6 malicious, community 2
    complete on 11 with 3 malicious.  Six cross edges route three legitimate
    agents of community 1 (two edges each) to the three malicious agents of
    community 2 (two edges each), so both communities have external degree
    bound 2.  Community 1 then needs induced minimum degree 15 but only has
    14: the robustness clause holds, the degree clause fails, and the
    legitimate members with external edges face eight matching high values
    among sixteen neighbors, enough to drag the whole community out of its
    initial interval.  Community 2 still passes the predicate.
    """
    f1, f2 = 6, 3
    n1, n2 = 15, 11
    g = disjoint_union(complete_graph(n1), complete_graph(n2))
    community1 = frozenset(range(n1))
    community2 = frozenset(range(n1, n1 + n2))
    malicious = frozenset(range(n1 - f1, n1)) | frozenset(range(n1 + n2 - f2, n1 + n2))
    carriers = [0, 1, 2]
    targets = [23, 24, 25]
    pairs = [
        (carriers[0], targets[0]),
        (carriers[0], targets[1]),
        (carriers[1], targets[1]),
        (carriers[1], targets[2]),
        (carriers[2], targets[2]),
        (carriers[2], targets[0]),
    ]
    g = add_cross_edges(g, pairs)

    _certify(g.max_external_degree(community1) == 2, "community 1 external degree is 2")
    _certify(g.max_external_degree(community2) == 2, "community 2 external degree is 2")
    check1 = robustness.is_community(g, community1, f1)
    _certify(check1.robust, "community 1 passes the robustness clause")
    _certify(
        check1.reasons == ("degree",) and check1.min_degree == 14
        and check1.required_degree == 15,
        "community 1 fails the degree clause alone, 14 against 15",
    )
    check2 = robustness.is_community(g, community2, f2)
    _certify(check2.is_community, "community 2 passes the community predicate")

    layout = CommunityLayout([community1, community2], malicious)
    init = InitializerSpec((NormalDraw(2.0, 1.0), NormalDraw(30.0, 5.0)), 60.0)
    return SimulationConfig(
        graph=g,
        layout=layout,
        initializer=init,
        adversary=ConstantValue(60.0),
        alpha=alpha,
        rounds=rounds,
        seed=seed,
    )


EXAMPLES = {1: example1, 2: example2, 3: example3}


_SECTIONS = ("graph", "communities", "malicious", "init", "protocol", "adversary")


def _split_sections(text: str) -> dict[str, list[tuple[int, str]]]:
    sections: dict[str, list[tuple[int, str]]] = {}
    current: list[tuple[int, str]] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line in _SECTIONS:
            if line in sections:
                raise FormatError(f"line {lineno}: repeated section {line!r}")
            current = sections.setdefault(line, [])
            continue
        if current is None:
            raise FormatError(f"line {lineno}: content before any section header")
        current.append((lineno, line))
    return sections


def _parse_ids(lineno: int, tokens: list[str]) -> list[int]:
    try:
        return [int(tok) for tok in tokens]
    except ValueError:
        raise FormatError(f"line {lineno}: bad id list {' '.join(tokens)!r}") from None


def _parse_float(lineno: int, token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"line {lineno}: bad number {token!r}") from None


def _parse_communities_section(
    lines: list[tuple[int, str]]
) -> tuple[dict[int, list[int]], dict[int, int]]:
    listed: dict[int, list[int]] = {}
    bounds: dict[int, int] = {}
    for lineno, line in lines:
        if line.startswith("external"):
            tokens = line.split()
            if len(tokens) != 3:
                raise FormatError(f"line {lineno}: expected 'external <i> <bound>'")
            idx = int(_parse_float(lineno, tokens[1]))
            bounds[idx] = int(_parse_float(lineno, tokens[2]))
            continue
        head, sep, rest = line.partition(":")
        tokens = head.split()
        if not sep or len(tokens) != 2 or tokens[0] != "community":
            raise FormatError(f"line {lineno}: unrecognized community line {line!r}")
        try:
            idx = int(tokens[1])
        except ValueError:
            raise FormatError(f"line {lineno}: bad community index {tokens[1]!r}") from None
        if idx in listed:
            raise FormatError(f"line {lineno}: community {idx} listed twice")
        listed[idx] = _parse_ids(lineno, rest.split())
    if not listed:
        raise FormatError("communities section lists no communities")
    if sorted(listed) != list(range(1, len(listed) + 1)):
        raise FormatError(
            f"community indices must be 1..{len(listed)}, got {sorted(listed)}"
        )
    return listed, bounds


def _parse_init_section(
    lines: list[tuple[int, str]], count: int
) -> tuple[dict[int, NormalDraw | ExplicitValues], float | None]:
    entries: dict[int, NormalDraw | ExplicitValues] = {}
    malicious_value: float | None = None
    for lineno, line in lines:
        head, sep, rest = line.partition(":")
        if not sep:
            raise FormatError(f"line {lineno}: unrecognized init line {line!r}")
        head = head.strip()
        tokens = rest.split()
        if head == "malicious":
            if len(tokens) != 2 or tokens[0] != "constant":
                raise FormatError(f"line {lineno}: expected 'malicious: constant <v>'")
            malicious_value = _parse_float(lineno, tokens[1])
            continue
        parts = head.split()
        if len(parts) != 2 or parts[0] != "community":
            raise FormatError(f"line {lineno}: unrecognized init line {line!r}")
        try:
            idx = int(parts[1])
        except ValueError:
            raise FormatError(f"line {lineno}: bad community index {parts[1]!r}") from None
        if not (1 <= idx <= count):
            raise FormatError(f"line {lineno}: init for unknown community {idx}")
        if idx in entries:
            raise FormatError(f"line {lineno}: repeated init for community {idx}")
        if not tokens:
            raise FormatError(f"line {lineno}: empty init entry")
        if tokens[0] == "normal":
            if len(tokens) != 3:
                raise FormatError(f"line {lineno}: expected 'normal <mean> <variance>'")
            entries[idx] = NormalDraw(
                _parse_float(lineno, tokens[1]), _parse_float(lineno, tokens[2])
            )
        elif tokens[0] == "explicit":
            entries[idx] = ExplicitValues(
                tuple(_parse_float(lineno, tok) for tok in tokens[1:])
            )
        else:
            raise FormatError(f"line {lineno}: unknown init kind {tokens[0]!r}")
    return entries, malicious_value


def _parse_protocol_section(lines: list[tuple[int, str]]) -> tuple[float, int, int]:
    seen: dict[str, float] = {}
    for lineno, line in lines:
        tokens = line.split()
        if len(tokens) != 2 or tokens[0] not in ("alpha", "rounds", "seed"):
            raise FormatError(f"line {lineno}: unrecognized protocol line {line!r}")
        if tokens[0] in seen:
            raise FormatError(f"line {lineno}: repeated protocol key {tokens[0]!r}")
        seen[tokens[0]] = _parse_float(lineno, tokens[1])
    missing = [k for k in ("alpha", "rounds", "seed") if k not in seen]
    if missing:
        raise FormatError(f"protocol section missing {missing}")
    return seen["alpha"], int(seen["rounds"]), int(seen["seed"])


def _parse_adversary_section(lines: list[tuple[int, str]]) -> AdversaryStrategy:
    if not lines:
        raise FormatError("adversary section is empty")
    lineno, first = lines[0]
    tokens = first.split()
    kind = tokens[0]
    if kind == "constant":
        if len(tokens) != 2 or len(lines) > 1:
            raise FormatError(f"line {lineno}: expected a single 'constant <v>' line")
        return ConstantValue(_parse_float(lineno, tokens[1]))
    if kind == "script":
        if len(tokens) < 2 or len(lines) > 1:
            raise FormatError(f"line {lineno}: expected a single 'script <v...>' line")
        return RoundScript(tuple(_parse_float(lineno, tok) for tok in tokens[1:]))
    if kind == "table":
        if len(tokens) != 2:
            raise FormatError(f"line {lineno}: expected 'table <default>'")
        default = _parse_float(lineno, tokens[1])
        entries: dict[tuple[int, int], float] = {}
        for entry_lineno, line in lines[1:]:
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(
                    f"line {entry_lineno}: expected '<agent> <neighbor> <value>'"
                )
            key = (int(_parse_float(entry_lineno, parts[0])),
                   int(_parse_float(entry_lineno, parts[1])))
            entries[key] = _parse_float(entry_lineno, parts[2])
        return PerNeighborTable(entries, default)
    raise FormatError(f"line {lineno}: unknown adversary kind {kind!r}")


def load_scenario(text: str) -> SimulationConfig:
    """Parse a scenario document into a validated SimulationConfig.

    Structural errors raise FormatError with a line number.  Semantic
    problems (overlapping communities, uncovered agents, violated external
    degree bounds, inconsistent init entries, isolated legitimate agents) are
    collected and raised together as ConfigError.
    """
    sections = _split_sections(text)
    missing = [s for s in ("graph", "communities", "init", "protocol") if s not in sections]
    if missing:
        raise FormatError(f"missing sections: {missing}")

    graph_text = "\n".join(line for _, line in sections["graph"])
    g = parse_graph(graph_text)
    listed, bounds = _parse_communities_section(sections["communities"])
    malicious: list[int] = []
    for lineno, line in sections.get("malicious", []):
        malicious.extend(_parse_ids(lineno, line.split()))
    entries, malicious_value = _parse_init_section(sections["init"], len(listed))
    alpha, rounds, seed = _parse_protocol_section(sections["protocol"])

    problems: list[str] = []
    try:
        layout = CommunityLayout([listed[i] for i in sorted(listed)], malicious)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None

    for idx in sorted(bounds):
        if not (1 <= idx <= len(layout)):
            problems.append(f"external bound for unknown community {idx}")
            continue
        actual = g.max_external_degree(layout.subsets[idx - 1])
        if actual > bounds[idx]:
            offenders = sorted(
                u for u in layout.subsets[idx - 1]
                if sum(1 for v in g.neighbors(u) if v not in layout.subsets[idx - 1])
                > bounds[idx]
            )
            problems.append(
                f"community {idx} declares external bound {bounds[idx]} but has "
                f"external degree {actual} (agents {offenders})"
            )

    missing_init = [i + 1 for i in range(len(layout)) if i + 1 not in entries]
    if missing_init:
        problems.append(f"init entries missing for communities {missing_init}")
        raise ConfigError(problems)
    init = InitializerSpec(
        tuple(entries[i + 1] for i in range(len(layout))), malicious_value
    )
    problems.extend(init.problems(g, layout))

    if "adversary" in sections:
        adversary: AdversaryStrategy | None = _parse_adversary_section(sections["adversary"])
    elif layout.malicious:
        # default: malicious agents hold their initial constant
        adversary = ConstantValue(malicious_value) if malicious_value is not None else None
    else:
        adversary = None

    config = SimulationConfig(
        graph=g,
        layout=layout,
        initializer=init,
        adversary=adversary,
        alpha=alpha,
        rounds=rounds,
        seed=seed,
    )
    problems.extend(config.validation_problems())
    if problems:
        raise ConfigError(problems)
    return config


def format_scenario(config: SimulationConfig) -> str:
    """Serialize a config as a scenario document; load_scenario inverts this."""
    g, layout = config.graph, config.layout
    lines = ["graph"]
    lines.extend(format_graph(g).splitlines())
    lines.append("communities")
    for i, subset in enumerate(layout.subsets, start=1):
        lines.append(f"community {i}: " + " ".join(str(u) for u in sorted(subset)))
    for i, subset in enumerate(layout.subsets, start=1):
        lines.append(f"external {i} {g.max_external_degree(subset)}")
    lines.append("malicious")
    if layout.malicious:
        lines.append(" ".join(str(u) for u in sorted(layout.malicious)))
    lines.append("init")
    init = config.initializer
    if not isinstance(init, InitializerSpec):
        raise ValueError(
            "only InitializerSpec-backed configs serialize to scenario documents"
        )
    for i, entry in enumerate(init.communities, start=1):
        if isinstance(entry, NormalDraw):
            lines.append(f"community {i}: normal {entry.mean!r} {entry.variance!r}")
        else:
            vals = " ".join(repr(v) for v in entry.values)
            lines.append(f"community {i}: explicit {vals}".rstrip())
    if init.malicious_value is not None:
        lines.append(f"malicious: constant {init.malicious_value!r}")
    lines.append("protocol")
    lines.append(f"alpha {config.alpha!r}")
    lines.append(f"rounds {config.rounds}")
    lines.append(f"seed {config.seed}")
    adversary = config.adversary
    if adversary is not None:
        lines.append("adversary")
        if isinstance(adversary, ConstantValue):
            lines.append(f"constant {adversary.value!r}")
        elif isinstance(adversary, RoundScript):
            lines.append("script " + " ".join(repr(v) for v in adversary.values))
        elif isinstance(adversary, PerNeighborTable):
            lines.append(f"table {adversary.default!r}")
            for (agent, neighbor), value in sorted(adversary.entries.items()):
                lines.append(f"{agent} {neighbor} {value!r}")
        else:
            raise ValueError(f"cannot serialize adversary {type(adversary).__name__}")
    return "\n".join(lines) + "\n"
