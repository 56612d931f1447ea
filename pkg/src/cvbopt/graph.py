"""Directed graphical models and the d-separation collapsibility test.

A model declares which variables are observed, which keep an explicit
variational factor (parameterized), and which are marginalised out
(collapsed). Marginalising is valid when the collapsed variables are
mutually independent conditioned on the observed and parameterized
ones, which reduces to pairwise d-separation queries on the DAG. The
test uses the reachability form of the Bayes-ball algorithm.

References
----------
R. D. Shachter, "Bayes-Ball: The Rational Pastime", UAI 1998.
D. Koller and N. Friedman, "Probabilistic Graphical Models", 2009,
Algorithm 3.1 (Reachable).
"""

from collections import deque
from dataclasses import dataclass, field

__all__ = [
    "Dag",
    "CollapsibilityReport",
    "d_separated",
    "check_collapsible",
    "parse_graph_file",
]

_UP = 0  # trail arrives from a child
_DOWN = 1  # trail arrives from a parent


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named vertices."""

    nodes: tuple
    edges: tuple
    _parents: dict = field(init=False, repr=False, compare=False)
    _children: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        edges = tuple((str(p), str(c)) for p, c in self.edges)
        node_set = set(nodes)
        if len(node_set) != len(nodes):
            raise ValueError("duplicate node names")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")
        parents = {n: [] for n in nodes}
        children = {n: [] for n in nodes}
        for p, c in edges:
            for end in (p, c):
                if end not in node_set:
                    raise ValueError(f"edge endpoint {end!r} is not a declared node")
            parents[c].append(p)
            children[p].append(c)
        # Kahn's algorithm; leftovers mean a directed cycle
        indeg = {n: len(parents[n]) for n in nodes}
        queue = deque(n for n in nodes if indeg[n] == 0)
        seen = 0
        while queue:
            n = queue.popleft()
            seen += 1
            for c in children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if seen != len(nodes):
            raise ValueError("graph contains a directed cycle")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)

    def parents(self, node):
        return tuple(self._parents[node])

    def children(self, node):
        return tuple(self._children[node])

    def ancestors(self, seed):
        """seed plus every node with a directed path into seed."""
        out = set()
        stack = list(seed)
        while stack:
            n = stack.pop()
            if n in out:
                continue
            out.add(n)
            stack.extend(self._parents[n])
        return out


def _check_nodes(g, names, label):
    unknown = set(names) - set(g.nodes)
    if unknown:
        raise ValueError(f"{label} contains unknown nodes: {sorted(unknown)}")


def _reachable(g, sources, given):
    """Nodes d-connected to `sources` given `given` (Bayes-ball)."""
    given = set(given)
    blocked_ancestors = g.ancestors(given)
    visited = set()
    reached = set()
    queue = deque((s, _UP) for s in sources)
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in given:
            reached.add(node)
        if direction == _UP and node not in given:
            for p in g.parents(node):
                queue.append((p, _UP))
            for c in g.children(node):
                queue.append((c, _DOWN))
        elif direction == _DOWN:
            if node not in given:
                for c in g.children(node):
                    queue.append((c, _DOWN))
            if node in blocked_ancestors:
                # v-structure: an observed descendant activates the collider
                for p in g.parents(node):
                    queue.append((p, _UP))
    return reached


def d_separated(g, a, b, given):
    """True iff every node of `a` is d-separated from every node of `b`.

    The three sets must be pairwise disjoint subsets of g's nodes.
    """
    a, b, given = set(a), set(b), set(given)
    for label, s in (("a", a), ("b", b), ("given", given)):
        _check_nodes(g, s, label)
    if a & b or a & given or b & given:
        raise ValueError("a, b and given must be pairwise disjoint")
    if not a or not b:
        raise ValueError("a and b must be non-empty")
    return not (_reachable(g, a, given) & b)


@dataclass(frozen=True)
class CollapsibilityReport:
    """Outcome of a collapsed-set validity check."""

    collapsible: bool
    failing_pairs: tuple


def check_collapsible(g, observed, parameterized, collapsed):
    """Test whether `collapsed` may be marginalised out jointly.

    Valid iff the collapsed nodes are pairwise d-separated given
    observed plus parameterized. Returns a report listing every
    failing pair; the verdict is collapsible iff that list is empty.
    """
    observed, parameterized = set(observed), set(parameterized)
    collapsed = set(collapsed)
    for label, s in (
        ("observed", observed),
        ("parameterized", parameterized),
        ("collapsed", collapsed),
    ):
        _check_nodes(g, s, label)
    if (observed & parameterized) or (observed & collapsed) or (
        parameterized & collapsed
    ):
        raise ValueError("observed, parameterized and collapsed must be disjoint")
    evidence = observed | parameterized
    order = sorted(collapsed)
    failing = []
    for i, u in enumerate(order):
        reach = _reachable(g, {u}, evidence)
        for v in order[i + 1 :]:
            if v in reach:
                failing.append((u, v))
    return CollapsibilityReport(
        collapsible=not failing, failing_pairs=tuple(sorted(failing))
    )


def parse_graph_file(path):
    """Parse a plain-text graph description.

    One ``parent -> child`` edge per line, plus ``observe:``,
    ``parameterize:`` and ``collapse:`` directives taking
    comma-separated node lists. Blank lines and ``#`` comments are
    skipped. Nodes are declared implicitly by appearing anywhere.

    Returns
    -------
    (Dag, observed, parameterized, collapsed)

    Raises
    ------
    ValueError
        On malformed lines, with the file path and line number.
    """
    edges = []
    nodes = []
    seen = set()
    sets = {"observe": set(), "parameterize": set(), "collapse": set()}

    def declare(name):
        if name not in seen:
            seen.add(name)
            nodes.append(name)

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" in line and not "->" in line:
                key, _, rest = line.partition(":")
                key = key.strip().lower()
                if key not in sets:
                    raise ValueError(
                        f"{path}:{lineno}: unknown directive {key!r}"
                    )
                names = [t.strip() for t in rest.split(",") if t.strip()]
                if not names:
                    raise ValueError(f"{path}:{lineno}: empty {key} directive")
                for n in names:
                    declare(n)
                sets[key].update(names)
            elif "->" in line:
                left, _, right = line.partition("->")
                p, c = left.strip(), right.strip()
                if not p or not c or "->" in right:
                    raise ValueError(f"{path}:{lineno}: malformed edge {raw!r}")
                declare(p)
                declare(c)
                edges.append((p, c))
            else:
                raise ValueError(f"{path}:{lineno}: unrecognized line {raw!r}")
    try:
        g = Dag(tuple(nodes), tuple(edges))
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from e
    return g, sets["observe"], sets["parameterize"], sets["collapse"]
