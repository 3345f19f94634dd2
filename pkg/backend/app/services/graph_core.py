"""n-graphs, line forests and the cycle relations.

The line forests of ``enumerate_line_forests`` form a basis of the graph space modulo the cycle
relations. ``decompose_to_lines`` finds the coordinates by iterated residues, and
``rewrite_to_lines`` reaches the same answer by rewriting edges.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from ..core.cache import cached
from ..core.errors import ArityMismatchError, FormatError, InconsistentResidueError, IndexOutOfRangeError
from .exact_algebra import DiagRat, MPoly, SparseVector, as_scalar

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
Line = Tuple[int, ...]

_GRAPH_RE = re.compile(r"^\s*n\s*=\s*(\d+)\s*;\s*edges\s*=\s*(.*?)\s*$")
_EDGE_RE = re.compile(r"^\s*(\d+)\s*->\s*(\d+)\s*$")


@dataclass(frozen=True, order=True)
class DiGraph:
    """Digraph on vertices 1..n; edges form a sorted multiset without tadpoles"""

    n: int
    edges: Tuple[Edge, ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise FormatError("vertex count must be non-negative")
        edges = tuple(sorted((int(i), int(j)) for i, j in self.edges))
        for i, j in edges:
            if i == j:
                raise FormatError(f"tadpole {i}->{j} is not allowed")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise IndexOutOfRangeError(f"edge {i}->{j} outside vertices 1..{self.n}")
        object.__setattr__(self, "edges", edges)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def without_edge(self, edge: Edge) -> "DiGraph":
        edges = list(self.edges)
        edges.remove(edge)
        return DiGraph(self.n, tuple(edges))

    def with_edge(self, edge: Edge) -> "DiGraph":
        return DiGraph(self.n, self.edges + (edge,))

    def successors(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {v: [] for v in range(1, self.n + 1)}
        for i, j in self.edges:
            if j not in adj[i]:
                adj[i].append(j)
        for targets in adj.values():
            targets.sort()
        return adj

    def __str__(self) -> str:
        return f"n={self.n}; edges=" + ",".join(f"{i}->{j}" for i, j in self.edges)

    @classmethod
    def parse(cls, text: str) -> "DiGraph":
        """Parse ``n=<int>; edges=<i>-><j>,...``"""
        match = _GRAPH_RE.match(text)
        if not match:
            raise FormatError(f"malformed graph text: {text!r}")
        n = int(match.group(1))
        body = match.group(2)
        edges = []
        if body:
            for chunk in body.split(","):
                edge = _EDGE_RE.match(chunk)
                if not edge:
                    raise FormatError(f"malformed edge {chunk!r}")
                edges.append((int(edge.group(1)), int(edge.group(2))))
        return cls(n, tuple(edges))


@dataclass(frozen=True, order=True)
class LineForest:
    """Canonical disjoint union of lines covering 1..n.

    Each line starts at its minimum and lines are ordered by their first vertex.
    """

    n: int
    lines: Tuple[Line, ...] = field(default=())

    def __post_init__(self):
        lines = tuple(tuple(int(v) for v in line) for line in self.lines)
        object.__setattr__(self, "lines", lines)
        seen = sorted(v for line in lines for v in line)
        if seen != list(range(1, self.n + 1)):
            raise FormatError(f"lines {lines} do not partition 1..{self.n}")
        firsts = []
        for line in lines:
            if not line:
                raise FormatError("empty line")
            if line[0] != min(line):
                raise FormatError(f"line {line} must start at its minimal vertex")
            firsts.append(line[0])
        if any(a >= b for a, b in zip(firsts, firsts[1:])):
            raise FormatError(f"lines {lines} are not ordered by first vertex")

    @property
    def p(self) -> int:
        return len(self.lines)

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return tuple(sorted((a, b) for line in self.lines for a, b in zip(line, line[1:])))

    @property
    def edge_count(self) -> int:
        return self.n - self.p

    @property
    def last_vertices(self) -> Tuple[int, ...]:
        return tuple(line[-1] for line in self.lines)

    def line_index(self) -> Dict[int, int]:
        """Map each vertex to the 1-based number of its line"""
        return {v: ell for ell, line in enumerate(self.lines, start=1) for v in line}

    def is_connected(self) -> bool:
        return self.p == 1

    def to_graph(self) -> DiGraph:
        return DiGraph(self.n, self.edges)

    def __str__(self) -> str:
        if not self.lines:
            return "()"
        return " | ".join(">".join(map(str, line)) for line in self.lines)

    @classmethod
    def parse(cls, text: str) -> "LineForest":
        """Parse ``1>2>3 | 4>5``; ``()`` is the empty forest"""
        text = text.strip()
        if text in ("", "()"):
            return cls(0, ())
        lines = []
        try:
            for chunk in text.split("|"):
                lines.append(tuple(int(v) for v in chunk.strip().split(">")))
        except ValueError:
            raise FormatError(f"malformed forest text: {text!r}")
        n = sum(len(line) for line in lines)
        return cls(n, tuple(sorted(lines)))

    @classmethod
    def from_lines(cls, lines: Iterable[Sequence[int]]) -> "LineForest":
        lines = tuple(sorted(tuple(line) for line in lines))
        return cls(sum(len(line) for line in lines), lines)


class LineCombo(SparseVector):
    """Rational combination of line forests on a common vertex count"""

    __slots__ = ("n",)

    def __init__(self, n: int, terms=None):
        super().__init__(terms)
        self.n = n
        for forest in self.terms:
            if forest.n != n:
                raise FormatError(f"forest {forest} does not have {n} vertices")

    def _identity(self) -> Tuple:
        return (self.n,)

    def _check_compatible(self, other: SparseVector):
        super()._check_compatible(other)
        if other.n != self.n:
            raise ArityMismatchError(f"line combinations on {self.n} and {other.n} vertices")

    def _format_key(self, key: LineForest) -> str:
        return f"[{key}]"


_COMBO_TERM_RE = re.compile(r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*\s*)?\[([^\]]*)\]\s*")


def format_line_combo(combo: LineCombo) -> str:
    return str(combo)


def parse_line_combo(text: str, n: int) -> LineCombo:
    """Inverse of ``format_line_combo``"""
    text = text.strip()
    if text == "0":
        return LineCombo(n)
    terms: Dict[LineForest, Fraction] = {}
    pos = 0
    while pos < len(text):
        match = _COMBO_TERM_RE.match(text, pos)
        if not match or match.end() == pos:
            raise FormatError(f"malformed line combination at position {pos}: {text!r}")
        if pos and not match.group(1):
            raise FormatError(f"missing sign before term at position {pos}")
        coeff = as_scalar(match.group(2) or 1)
        if match.group(1) == "-":
            coeff = -coeff
        forest = LineForest.parse(match.group(3))
        terms[forest] = terms.get(forest, 0) + coeff
        pos = match.end()
    return LineCombo(n, terms)


def _check_perm(sigma: Sequence[int], n: int):
    if sorted(sigma) != list(range(1, n + 1)):
        raise IndexOutOfRangeError(f"{tuple(sigma)} is not a permutation of 1..{n}")


def apply_perm(sigma: Sequence[int], g: DiGraph) -> DiGraph:
    """Relabel vertex i as sigma[i-1]"""
    _check_perm(sigma, g.n)
    return DiGraph(g.n, tuple((sigma[i - 1], sigma[j - 1]) for i, j in g.edges))


def compose_perms(sigma: Sequence[int], tau: Sequence[int]) -> Tuple[int, ...]:
    """(sigma tau)(i) = sigma(tau(i))"""
    return tuple(sigma[t - 1] for t in tau)


def find_cycle(g: DiGraph) -> Optional[List[Edge]]:
    """Oriented cycle from the least start vertex, preferring least successors, or None"""
    adj = g.successors()
    for start in range(1, g.n + 1):
        path = [start]
        cycle = _cycle_from(start, start, adj, path, {start})
        if cycle:
            return cycle
    return None


def _cycle_from(start: int, v: int, adj, path: List[int], visited) -> Optional[List[Edge]]:
    for u in adj[v]:
        if u == start:
            return [(a, b) for a, b in zip(path, path[1:] + [start])]
        if u > start and u not in visited:
            visited.add(u)
            path.append(u)
            found = _cycle_from(start, u, adj, path, visited)
            if found:
                return found
            path.pop()
            visited.discard(u)
    return None


def simple_cycles(g: DiGraph) -> List[List[Edge]]:
    """All oriented simple cycles, each listed once from its least vertex"""
    adj = g.successors()
    cycles: List[List[Edge]] = []

    def walk(start: int, v: int, path: List[int]):
        for u in adj[v]:
            if u == start:
                cycles.append([(a, b) for a, b in zip(path, path[1:] + [start])])
            elif u > start and u not in path:
                path.append(u)
                walk(start, u, path)
                path.pop()

    for start in range(1, g.n + 1):
        walk(start, start, [start])
    return cycles


def has_cycle(g: DiGraph) -> bool:
    return find_cycle(g) is not None


def p_gamma(g: DiGraph) -> DiagRat:
    """Product over edges i->j of 1/(z_i - z_j)"""
    poles: Dict[Tuple[int, int], int] = {}
    sign = 1
    for i, j in g.edges:
        key = (min(i, j), max(i, j))
        poles[key] = poles.get(key, 0) + 1
        if i > j:
            sign = -sign
    return DiagRat(MPoly.const(sign), poles, g.n)


def enumerate_line_forests(n: int, p: int) -> List[LineForest]:
    """All canonical forests with p lines on 1..n, sorted"""
    if n == 0:
        return [LineForest(0, ())] if p == 0 else []
    if not 1 <= p <= n:
        return []
    forests = []
    for blocks in _set_partitions(list(range(1, n + 1)), p):
        orderings = [
            [(block[0],) + tail for tail in itertools.permutations(block[1:])] for block in blocks
        ]
        for lines in itertools.product(*orderings):
            forests.append(LineForest(n, tuple(lines)))
    forests.sort()
    return forests


def all_line_forests(n: int) -> List[LineForest]:
    """The whole basis, ordered by number of lines then lexicographically"""
    if n == 0:
        return enumerate_line_forests(0, 0)
    return [forest for p in range(1, n + 1) for forest in enumerate_line_forests(n, p)]


def _set_partitions(items: List[int], k: int) -> Iterable[List[Tuple[int, ...]]]:
    """Partitions of ascending ``items`` into k blocks, blocks ordered by minimum"""

    def grow(index: int, blocks: List[List[int]]):
        if len(blocks) > k or len(blocks) + len(items) - index < k:
            return
        if index == len(items):
            yield [tuple(block) for block in blocks]
            return
        item = items[index]
        for block in blocks:
            block.append(item)
            yield from grow(index + 1, blocks)
            block.pop()
        blocks.append([item])
        yield from grow(index + 1, blocks)
        blocks.pop()

    yield from grow(0, [])


@cached("decompose_to_lines")
def decompose_to_lines(g: DiGraph) -> LineCombo:
    """Coordinates of g in the line basis, read off as forest residues of p_g"""
    from .residue_fourier import gamma_residue

    if g.n == 0:
        return LineCombo(0, {LineForest(0, ()): 1})
    p = g.n - g.edge_count
    if p < 1:
        return LineCombo(g.n)
    f = p_gamma(g)
    terms: Dict[LineForest, Fraction] = {}
    for forest in enumerate_line_forests(g.n, p):
        value = gamma_residue(f, forest)
        if not value.is_constant():
            logger.error(f"Non-constant residue of {g} along {forest}: {value}")
            raise InconsistentResidueError(f"residue of {g} along [{forest}] is not constant: {value}")
        coeff = value.constant_value()
        if coeff:
            terms[forest] = coeff
    return LineCombo(g.n, terms)


def rewrite_to_lines(g: DiGraph) -> LineCombo:
    """Line-basis coordinates by edge splitting and leaf peeling"""
    result = _rewrite(g.edges, tuple(range(1, g.n + 1)))
    return LineCombo(g.n, {LineForest(g.n, lines): coeff for lines, coeff in result.items()})


@lru_cache(maxsize=65536)
def _rewrite(edges: Tuple[Edge, ...], order: Tuple[int, ...]) -> Dict[Tuple[Line, ...], Fraction]:
    # order[0] is the root: its line must start at the root; other lines start at their minimum
    if not order:
        return {(): Fraction(1)}
    pairs = [frozenset(edge) for edge in edges]
    if len(set(pairs)) < len(pairs) or _has_undirected_cycle(order, edges):
        return {}
    root = order[0]
    incident = sorted((e for e in edges if root in e), key=lambda e: e[0] + e[1] - root)
    result: Dict[Tuple[Line, ...], Fraction] = {}

    if len(incident) >= 2:
        e_a, e_b = incident[0], incident[1]
        a = e_a[0] + e_a[1] - root
        b = e_b[0] + e_b[1] - root
        sign = 1
        if e_a != (a, root):
            sign = -sign
        if e_b != (root, b):
            sign = -sign
        others = [e for e in edges if e not in (e_a, e_b)]
        # the cycle a->root->b->a with one edge dropped each time
        for graph in (others + [(root, b), (b, a)], others + [(a, root), (b, a)]):
            for lines, coeff in _rewrite(tuple(sorted(graph)), order).items():
                _accumulate(result, lines, -sign * coeff)
        return result

    rest = order[1:]
    if len(incident) == 1:
        edge = incident[0]
        i = edge[0] + edge[1] - root
        sign = 1 if edge == (root, i) else -1
        remaining = tuple(e for e in edges if e != edge)
        sub_order = (i,) + tuple(sorted(v for v in rest if v != i))
        for lines, coeff in _rewrite(remaining, sub_order).items():
            grown = tuple(sorted((root,) + line if line[0] == i else line for line in lines))
            _accumulate(result, grown, sign * coeff)
        return result

    for lines, coeff in _rewrite(edges, tuple(sorted(rest))).items():
        _accumulate(result, tuple(sorted(((root,),) + lines)), coeff)
    return result


def _accumulate(target: Dict, key, coeff: Fraction):
    total = target.get(key, 0) + coeff
    if total:
        target[key] = total
    else:
        target.pop(key, None)


def _has_undirected_cycle(vertices: Sequence[int], edges: Sequence[Edge]) -> bool:
    parent = {v: v for v in vertices}

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri == rj:
            return True
        parent[ri] = rj
    return False


@dataclass
class RelationSpan:
    """Cycle relations as sparse rows over an enumerated graph basis"""

    n: int
    max_multiplicity: int
    graphs: List[DiGraph]
    index: Dict[DiGraph, int]
    relations: List[Dict[int, int]]
    kinds: List[str]

    @property
    def cyclic(self) -> List[int]:
        """Indices of graphs that contain an oriented cycle"""
        return [next(iter(row)) for row, kind in zip(self.relations, self.kinds) if kind == "cycle"]


def enumerate_graphs(n: int, max_multiplicity: int = 1) -> List[DiGraph]:
    """Every n-graph whose ordered pairs repeat at most ``max_multiplicity`` times"""
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    graphs = []
    for mults in itertools.product(range(max_multiplicity + 1), repeat=len(pairs)):
        edges = tuple(pair for pair, m in zip(pairs, mults) for _ in range(m))
        graphs.append(DiGraph(n, edges))
    graphs.sort(key=lambda g: (g.edge_count, g.edges))
    return graphs


def cycle_relation_span(n: int, max_multiplicity: int = 1) -> RelationSpan:
    """Generators of the cycle relations among graphs of bounded multiplicity"""
    graphs = enumerate_graphs(n, max_multiplicity)
    index = {g: k for k, g in enumerate(graphs)}
    relations: List[Dict[int, int]] = []
    kinds: List[str] = []
    seen = set()
    for g in graphs:
        cycles = simple_cycles(g)
        if not cycles:
            continue
        relations.append({index[g]: 1})
        kinds.append("cycle")
        for cycle in cycles:
            row: Dict[int, int] = {}
            for edge in cycle:
                k = index[g.without_edge(edge)]
                row[k] = row.get(k, 0) + 1
            row = {k: c for k, c in row.items() if c}
            key = frozenset(row.items())
            if row and key not in seen:
                seen.add(key)
                relations.append(row)
                kinds.append("cycle-sum")
    logger.debug(f"n={n}: {len(graphs)} graphs, {len(relations)} relation generators")
    return RelationSpan(n, max_multiplicity, graphs, index, relations, kinds)


def quotient_dimension(n: int, max_multiplicity: int = 1) -> int:
    """dim of the graph space modulo cycle relations, by exact rank per edge count"""
    span = cycle_relation_span(n, max_multiplicity)
    cyclic = set(span.cyclic)
    # cyclic graphs are killed outright; the remaining rows are restricted to acyclic columns
    blocks: Dict[int, List[Dict[int, int]]] = {}
    for row, kind in zip(span.relations, span.kinds):
        if kind != "cycle-sum":
            continue
        projected = {k: c for k, c in row.items() if k not in cyclic}
        if projected:
            s = span.graphs[next(iter(projected))].edge_count
            blocks.setdefault(s, []).append(projected)
    acyclic_count = len(span.graphs) - len(cyclic)
    rank = 0
    for s, rows in sorted(blocks.items()):
        columns = sorted({k for row in rows for k in row})
        position = {k: c for c, k in enumerate(columns)}
        unique = {frozenset(row.items()): row for row in rows}
        sparse = {
            r: {position[k]: QQ(c) for k, c in row.items()} for r, row in enumerate(unique.values())
        }
        matrix = DomainMatrix(sparse, (len(sparse), len(columns)), QQ)
        block_rank = matrix.rank()
        logger.debug(f"n={n}, {s} edges: {len(sparse)}x{len(columns)} relation block of rank {block_rank}")
        rank += block_rank
    return acyclic_count - rank
