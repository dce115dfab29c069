"""Round graphs, SCC/root decomposition, and the causal-distance oracle.

Everything here is computed directly from a graph sequence, independently of
the per-process protocol code, so it can serve as ground truth for the
checkers.  All reachability results are relative to the finite horizon T:
a causal chain that does not complete by round T is reported as INFINITY.
Rounds are 1-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

INFINITY = math.inf


class OutOfRangeError(ValueError):
    """Round index outside the sequence horizon."""


class NotVertexStableError(ValueError):
    """The given members do not form the same SCC in every round of the interval."""


class MultipleRootsError(ValueError):
    """An operation requiring a unique root component hit a multi-root round."""


def _bits(mask):
    """Yield the set bit positions of a non-negative int, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class RoundGraph:
    """One round's communication graph: edge (p, q) means q receives p's message.

    Simple directed graph, no self-loops.  Immutable; adjacency bitmasks are
    cached lazily.
    """

    __slots__ = ("n", "edges", "_out_masks", "_in_masks")

    def __init__(self, n, edges=()):
        if n < 1:
            raise ValueError("n must be >= 1")
        edges = frozenset((int(p), int(q)) for p, q in edges)
        for p, q in edges:
            if p == q:
                raise ValueError(f"self-loop {p}->{q}")
            if not (0 <= p < n and 0 <= q < n):
                raise ValueError(f"edge {p}->{q} out of range for n={n}")
        self.n = n
        self.edges = edges
        self._out_masks = None
        self._in_masks = None

    def out_masks(self):
        if self._out_masks is None:
            masks = [0] * self.n
            for p, q in self.edges:
                masks[p] |= 1 << q
            self._out_masks = masks
        return self._out_masks

    def in_masks(self):
        if self._in_masks is None:
            masks = [0] * self.n
            for p, q in self.edges:
                masks[q] |= 1 << p
            self._in_masks = masks
        return self._in_masks

    def in_neighbors(self, q):
        return frozenset(_bits(self.in_masks()[q]))

    def out_neighbors(self, p):
        return frozenset(_bits(self.out_masks()[p]))

    def sorted_edges(self):
        return sorted(self.edges)

    def __eq__(self, other):
        return (
            isinstance(other, RoundGraph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"RoundGraph(n={self.n}, edges={self.sorted_edges()})"


class GraphSequence:
    """A finite prefix G^1..G^T of a round-graph sequence."""

    __slots__ = ("n", "rounds")

    def __init__(self, n, rounds):
        rounds = tuple(rounds)
        if not rounds:
            raise ValueError("a sequence needs at least one round")
        for g in rounds:
            if g.n != n:
                raise ValueError("all round graphs must share the same n")
        self.n = n
        self.rounds = rounds

    @property
    def horizon(self):
        return len(self.rounds)

    def round(self, r):
        """The round-r graph, 1-based."""
        if not 1 <= r <= len(self.rounds):
            raise OutOfRangeError(f"round {r} outside [1, {len(self.rounds)}]")
        return self.rounds[r - 1]

    def __eq__(self, other):
        return (
            isinstance(other, GraphSequence)
            and self.n == other.n
            and self.rounds == other.rounds
        )

    def __hash__(self):
        return hash((self.n, self.rounds))

    def __repr__(self):
        return f"GraphSequence(n={self.n}, T={self.horizon})"


@dataclass(frozen=True)
class RootReport:
    """Root components of one round graph."""

    roots: tuple
    is_single: bool


@dataclass
class StableIntervalReport:
    """A maximal interval over which the root component's vertex set is constant.

    Diameter fields stay None unless explicitly requested; multi_root marks a
    run of rounds with more than one root component (vertex_set is None then).
    """

    interval: tuple
    vertex_set: frozenset | None
    per_round_diameter: dict | None = None
    interval_diameter: float | None = None
    d_bounded_for: int | None = None
    multi_root: bool = False


@dataclass
class StabilityReport:
    """Outcome of the r_ST search, including assumption-clause violations."""

    r_st: int | None
    window: tuple | None
    multi_root_rounds: list = field(default_factory=list)
    unbounded_intervals: list = field(default_factory=list)

    @property
    def assumption_holds(self):
        return (
            self.r_st is not None
            and not self.multi_root_rounds
            and not self.unbounded_intervals
        )


def scc_decompose(g):
    """Maximal strongly connected components of one round graph.

    Iterative Tarjan; output sorted by smallest member id, components as
    frozensets.
    """
    n = g.n
    adj = [sorted(_bits(m)) for m in g.out_masks()]
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack = []
    sccs = []
    counter = 0

    for start in range(n):
        if index[start] != -1:
            continue
        # Explicit DFS stack of (vertex, iterator position).
        work = [(start, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for i in range(pi, len(adj[v])):
                w = adj[v][i]
                if index[w] == -1:
                    work.append((v, i + 1))
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            if lowlink[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.add(w)
                    if w == v:
                        break
                sccs.append(frozenset(comp))
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])

    return sorted(sccs, key=min)


def root_components(g):
    """The SCCs with no incoming edge from outside; always 1..n of them."""
    sccs = scc_decompose(g)
    comp_of = {}
    for i, comp in enumerate(sccs):
        for v in comp:
            comp_of[v] = i
    has_external_in = [False] * len(sccs)
    for p, q in g.edges:
        if comp_of[p] != comp_of[q]:
            has_external_in[comp_of[q]] = True
    roots = tuple(c for i, c in enumerate(sccs) if not has_external_in[i])
    return RootReport(roots=roots, is_single=len(roots) == 1)


def causal_reach(seq, r, p, max_steps=None):
    """First-influence times from p starting at round r.

    Returns a list d with d[q] = cd_r(p, q) (INFINITY if no chain completes
    within max_steps, default the remaining horizon).  cd_r(p, p) = 1.
    """
    n = seq.n
    limit = seq.horizon - r + 1
    if max_steps is not None:
        limit = min(limit, max_steps)
    dist = [INFINITY] * n
    dist[p] = 1
    frontier = 1 << p
    full = (1 << n) - 1
    for k in range(1, limit + 1):
        if frontier == full:
            break
        out = seq.round(r + k - 1).out_masks()
        new = frontier
        for v in _bits(frontier):
            new |= out[v]
        for q in _bits(new & ~frontier):
            dist[q] = k
        frontier = new
    return dist


def causal_distance(seq, r, p, q):
    """cd_r(p, q): shortest causal chain from p (round r) to q, or INFINITY."""
    if not 1 <= r <= seq.horizon:
        raise OutOfRangeError(f"round {r} outside [1, {seq.horizon}]")
    for v in (p, q):
        if not 0 <= v < seq.n:
            raise ValueError(f"process {v} out of range")
    if p == q:
        return 1
    return causal_reach(seq, r, p)[q]


def component_round_diameter(seq, x, members, max_steps=None):
    """Largest cd_x(p, q) over p, q in members (chains may leave the set)."""
    worst = 0
    for p in members:
        dist = causal_reach(seq, x, p, max_steps=max_steps)
        for q in members:
            d = dist[q]
            if d == INFINITY:
                return INFINITY
            if d > worst:
                worst = d
    return worst


def network_round_diameter(seq, x, root_members, max_steps=None):
    """Largest cd_x(p, q) over p in the round-x root and all q."""
    worst = 0
    for p in root_members:
        dist = causal_reach(seq, x, p, max_steps=max_steps)
        for d in dist:
            if d == INFINITY:
                return INFINITY
            if d > worst:
                worst = d
    return worst


def _interval_diameter(per_round, s):
    """max of the per-round diameters whose propagation completes by round s."""
    vals = [
        v for x, v in per_round.items() if v != INFINITY and x + v - 1 <= s
    ]
    return max(vals) if vals else INFINITY


def _scc_containing(g, v):
    for comp in scc_decompose(g):
        if v in comp:
            return comp
    raise AssertionError("unreachable")


def scc_causal_diameter(seq, interval, members):
    """Per-round and interval causal diameters of a vertex-stable SCC."""
    r, s = interval
    if not 1 <= r <= s <= seq.horizon:
        raise OutOfRangeError(f"interval {interval} outside [1, {seq.horizon}]")
    members = frozenset(members)
    if not members:
        raise ValueError("members must be nonempty")
    anchor = min(members)
    for x in range(r, s + 1):
        if _scc_containing(seq.round(x), anchor) != members:
            raise NotVertexStableError(
                f"members are not a vertex-stable SCC at round {x}"
            )
    per_round = {
        x: component_round_diameter(seq, x, members) for x in range(r, s + 1)
    }
    return StableIntervalReport(
        interval=(r, s),
        vertex_set=members,
        per_round_diameter=per_round,
        interval_diameter=_interval_diameter(per_round, s),
    )


def network_causal_diameter(seq, interval):
    """Interval network causal diameter; requires a single root per round."""
    r, s = interval
    if not 1 <= r <= s <= seq.horizon:
        raise OutOfRangeError(f"interval {interval} outside [1, {seq.horizon}]")
    per_round = {}
    for x in range(r, s + 1):
        report = root_components(seq.round(x))
        if not report.is_single:
            raise MultipleRootsError(
                f"round {x} has {len(report.roots)} root components"
            )
        # Diameters larger than the remaining window cannot qualify anyway,
        # so the reachability search is capped at s - x + 1 steps.
        per_round[x] = network_round_diameter(
            seq, x, report.roots[0], max_steps=s - x + 1
        )
    return _interval_diameter(per_round, s)


def vertex_stable_intervals(seq):
    """Maximal intervals with a constant single-root vertex set.

    Runs of multi-root rounds are reported separately with multi_root=True.
    """
    reports = []
    current_set = None
    current_multi = None
    start = None
    for x in range(1, seq.horizon + 1):
        rr = root_components(seq.round(x))
        vset = rr.roots[0] if rr.is_single else None
        multi = not rr.is_single
        if start is not None and vset == current_set and multi == current_multi:
            continue
        if start is not None:
            reports.append(
                StableIntervalReport(
                    interval=(start, x - 1),
                    vertex_set=current_set,
                    multi_root=current_multi,
                )
            )
        start, current_set, current_multi = x, vset, multi
    reports.append(
        StableIntervalReport(
            interval=(start, seq.horizon),
            vertex_set=current_set,
            multi_root=current_multi,
        )
    )
    return reports


def check_d_bounded(seq, interval, members, d_bound):
    """D-boundedness of a vertex-stable SCC: interval diameter and the
    late-start diameter at round s - D + 1 both at most D."""
    if d_bound < 1:
        raise ValueError("D must be >= 1")
    r, s = interval
    report = scc_causal_diameter(seq, interval, members)
    if report.interval_diameter > d_bound:
        return False
    x0 = s - d_bound + 1
    if x0 < 1:
        return False
    late = component_round_diameter(seq, x0, frozenset(members))
    return late <= d_bound


def _root_window_bounded(per_round, a, b, d_bound):
    """D-boundedness of the root component over [a, b] from per-round network
    diameters (values may be INFINITY when capped past the enclosing run)."""
    di = _interval_diameter({x: per_round[x] for x in range(a, b + 1)}, b)
    if di > d_bound:
        return False
    x0 = b - d_bound + 1
    if x0 < a:
        return False
    return per_round[x0] <= d_bound


def find_r_st(seq, d_bound, window_len=None):
    """Search for the earliest stability window of Assumption-1 shape.

    Returns a StabilityReport with the smallest r such that
    [r, r + window_len - 1] lies within the horizon and hosts a D-bounded
    vertex-stable root component (window_len defaults to 4D + 2, the minimum
    satisfying d > 4D).  Violations of the single-root clause and of
    "every stable root interval of length >= D is D-bounded" are reported as
    fields, not errors.
    """
    if d_bound < 1:
        raise ValueError("D must be >= 1")
    if window_len is None:
        window_len = 4 * d_bound + 2

    intervals = vertex_stable_intervals(seq)
    multi_root_rounds = []
    for rep in intervals:
        if rep.multi_root:
            multi_root_rounds.extend(range(rep.interval[0], rep.interval[1] + 1))

    unbounded = []
    r_st = None
    window = None
    for rep in intervals:
        if rep.multi_root:
            continue
        a0, b0 = rep.interval
        length = b0 - a0 + 1
        if length < d_bound and length < window_len:
            continue
        members = rep.vertex_set
        # Capped at the end of this stable run: any propagation that
        # qualifies for a sub-interval must finish inside it.
        per_round = {
            x: network_round_diameter(seq, x, members, max_steps=b0 - x + 1)
            for x in range(a0, b0 + 1)
        }
        # Global clause: every stable root interval of length >= D must be
        # D-bounded.  For a fixed end b, extend the start leftwards keeping a
        # running max of the qualifying per-round diameters.
        for b in range(a0 + d_bound - 1, b0 + 1):
            best = 0
            for a in range(b, a0 - 1, -1):
                v = per_round[a]
                if v != INFINITY and a + v - 1 <= b and v > best:
                    best = v
                if b - a + 1 >= d_bound:
                    di = best if best > 0 else INFINITY
                    if di > d_bound or per_round[b - d_bound + 1] > d_bound:
                        unbounded.append((a, b))
        # Smallest window start hosting a D-bounded stable root.
        if r_st is None:
            for a in range(a0, b0 - window_len + 2):
                b = a + window_len - 1
                if _root_window_bounded(per_round, a, b, d_bound):
                    r_st = a
                    window = (a, b)
                    break

    return StabilityReport(
        r_st=r_st,
        window=window,
        multi_root_rounds=multi_root_rounds,
        unbounded_intervals=unbounded,
    )
