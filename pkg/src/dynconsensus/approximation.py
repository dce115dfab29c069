"""Per-process network approximation: the labeled digraph A_p.

Edge labels are sets of round numbers, stored as int bitmasks (bit r set
means the edge was present in round r).  States are immutable values; every
operation returns a fresh state, so states can be snapshotted into messages
by reference.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import _bits


class MalformedMessageError(ValueError):
    """A received approximation snapshot violates its structural invariants."""


class ApproxState:
    """Process p's approximation digraph: vertices, labeled edges, owner.

    _comp_cache memoizes detected components per round slice; it is derived
    data, carried across absorb calls for slices whose labels did not change,
    and excluded from equality.
    """

    __slots__ = ("owner", "vertices", "edges", "pruned_before", "_comp_cache")

    def __init__(self, owner, vertices, edges, pruned_before=0, _cache=None):
        self.owner = owner
        self.vertices = frozenset(vertices)
        self.edges = edges  # dict (from, to) -> label bitmask
        self.pruned_before = pruned_before
        self._comp_cache = {} if _cache is None else _cache

    def labels(self, edge):
        """The label set of an edge as a sorted tuple of rounds."""
        return tuple(_bits(self.edges.get(edge, 0)))

    def sorted_edges(self):
        return sorted(
            (u, v, tuple(_bits(m))) for (u, v), m in self.edges.items()
        )

    def __eq__(self, other):
        return (
            isinstance(other, ApproxState)
            and self.owner == other.owner
            and self.vertices == other.vertices
            and self.edges == other.edges
            and self.pruned_before == other.pruned_before
        )

    def __repr__(self):
        return (
            f"ApproxState(owner={self.owner}, vertices={sorted(self.vertices)}, "
            f"edges={self.sorted_edges()})"
        )


@dataclass(frozen=True)
class ApproxMessage:
    """A full snapshot of the sender's approximation state."""

    sender: int
    graph: ApproxState


def approx_init(p):
    """Fresh state: the singleton graph ({p}, no edges)."""
    return ApproxState(owner=p, vertices=(p,), edges={})


def approx_emit(state):
    """Snapshot message for the current round; does not mutate the state."""
    return ApproxMessage(sender=state.owner, graph=state)


def _validate_snapshot(msg, r):
    g = msg.graph
    if msg.sender != g.owner or g.owner not in g.vertices:
        raise MalformedMessageError(f"snapshot owner mismatch from {msg.sender}")
    for (u, v), mask in g.edges.items():
        if u == v:
            raise MalformedMessageError(f"self-loop {u}->{v} from {msg.sender}")
        if u not in g.vertices or v not in g.vertices:
            raise MalformedMessageError(
                f"edge {u}->{v} with unknown endpoint from {msg.sender}"
            )
        if mask <= 0 or mask >> r:
            raise MalformedMessageError(
                f"edge {u}->{v} carries labels outside [1, {r - 1}]"
            )


def approx_absorb(state, r, received):
    """Round-r update: record direct in-edges with label r, then take the
    label-set union with every received snapshot.  Monotone: nothing is
    ever removed."""
    for msg in received:
        _validate_snapshot(msg, r)

    vertices = set(state.vertices)
    edges = dict(state.edges)
    changed = 0
    bit_r = 1 << r
    for msg in received:
        q = msg.sender
        e = (q, state.owner)
        old = edges.get(e, 0)
        if not old & bit_r:
            edges[e] = old | bit_r
            changed |= bit_r
        vertices |= msg.graph.vertices
        for e, mask in msg.graph.edges.items():
            old = edges.get(e, 0)
            add = mask & ~old
            if add:
                edges[e] = old | mask
                changed |= add

    if not received:
        return state
    cache = {
        s: comp
        for s, comp in state._comp_cache.items()
        if not (changed >> s) & 1
    }
    return ApproxState(
        owner=state.owner,
        vertices=vertices,
        edges=edges,
        pruned_before=state.pruned_before,
        _cache=cache,
    )


def approx_restrict(state, s):
    """The round-s slice A_p|s: edges labeled s, plus the owner vertex.

    Returns (vertices, edges) as frozensets.
    """
    if s < 1:
        raise ValueError("rounds are 1-based")
    edges = frozenset(
        e for e, mask in state.edges.items() if (mask >> s) & 1
    )
    vertices = {state.owner}
    for u, v in edges:
        vertices.add(u)
        vertices.add(v)
    return frozenset(vertices), edges


def _strongly_connected(vertices, edges):
    """True iff the digraph on `vertices` is strongly connected; a single
    vertex with no edges counts as strongly connected."""
    if len(vertices) == 1:
        return not edges
    fwd = {}
    bwd = {}
    for u, v in edges:
        fwd.setdefault(u, []).append(v)
        bwd.setdefault(v, []).append(u)
    start = next(iter(vertices))
    for adj in (fwd, bwd):
        seen = {start}
        stack = [start]
        while stack:
            for w in adj.get(stack.pop(), ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != vertices:
            return False
    return True


def detected_component(state, s):
    """C_p|s: the vertex set of A_p|s if strongly connected, else empty.

    Slices older than the pruning cutoff report empty (no data).
    """
    if s < 1:
        raise ValueError("rounds are 1-based")
    if s < state.pruned_before:
        return frozenset()
    cached = state._comp_cache.get(s)
    if cached is not None:
        return cached
    vertices, edges = approx_restrict(state, s)
    comp = vertices if _strongly_connected(vertices, edges) else frozenset()
    state._comp_cache[s] = comp
    return comp


def in_stable_root(state, interval, current_round):
    """True iff all detected components over the interval are equal and
    nonempty; rounds outside [1, current_round) make it false."""
    a, b = interval
    if a < 1 or b >= current_round or a > b:
        return False
    first = detected_component(state, a)
    if not first:
        return False
    for s in range(a + 1, b + 1):
        if detected_component(state, s) != first:
            return False
    return True


def approx_prune(state, keep_after):
    """Drop all labels < keep_after and edges whose label set empties.

    Vertices are retained.  Slices below the cutoff subsequently report no
    data rather than a spuriously empty-looking graph.
    """
    if keep_after < 0:
        raise ValueError("keep_after must be >= 0")
    if keep_after <= state.pruned_before:
        return state
    keep_mask = ~((1 << keep_after) - 1)
    edges = {}
    for e, mask in state.edges.items():
        kept = mask & keep_mask
        if kept:
            edges[e] = kept
    cache = {s: c for s, c in state._comp_cache.items() if s >= keep_after}
    return ApproxState(
        owner=state.owner,
        vertices=state.vertices,
        edges=edges,
        pruned_before=keep_after,
        _cache=cache,
    )
