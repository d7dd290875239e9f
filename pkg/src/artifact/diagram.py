"""Stationary Bratteli diagrams and finite/eventually-periodic paths.

A diagram has one vertex set ``V`` and one edge set ``E`` repeated on every
level.  A level-n path is a tuple of n edge names, level-1 edge first, with
consecutive edges composable (``range`` of one equals ``source`` of the next).
The path "ends" at the range of its deepest edge.

Canonical text for a path writes the deepest edge first, so the level-1 edge
is the rightmost symbol.  Pass ``render="level1-first"`` to get the opposite
order.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Edge:
    name: str
    source: str
    range: str


class DiagramError(ValueError):
    pass


class BratteliDiagram:
    """A stationary Bratteli diagram given by vertex names and edges."""

    def __init__(self, vertices, edges):
        self.vertices = tuple(vertices)
        self.edges = tuple(
            e if isinstance(e, Edge) else Edge(*e) for e in edges
        )
        self.edge_by_name = {e.name: e for e in self.edges}
        self._out = {v: [] for v in self.vertices}
        self._in = {v: [] for v in self.vertices}
        for e in self.edges:
            if e.source in self._out:
                self._out[e.source].append(e)
            if e.range in self._in:
                self._in[e.range].append(e)

    def edges_from(self, v):
        return tuple(self._out[v])

    def edges_into(self, v):
        return tuple(self._in[v])

    def source_of(self, edge_name):
        return self.edge_by_name[edge_name].source

    def range_of(self, edge_name):
        return self.edge_by_name[edge_name].range

    # -- path helpers ----------------------------------------------------

    def path_end(self, path):
        """Vertex the path ends at (range of the deepest edge)."""
        if not path:
            raise DiagramError("empty path has no end vertex")
        return self.range_of(path[-1])

    def path_start(self, path):
        if not path:
            raise DiagramError("empty path has no start vertex")
        return self.source_of(path[0])

    def is_path(self, path):
        try:
            edges = [self.edge_by_name[n] for n in path]
        except KeyError:
            return False
        return all(
            edges[i].range == edges[i + 1].source for i in range(len(edges) - 1)
        )

    def extensions(self, path):
        """Edges that may be appended at the next level."""
        if not path:
            return self.edges
        return self.edges_from(self.path_end(path))


def validate_diagram(d: BratteliDiagram):
    """Return a list of problems; empty means valid."""
    problems = []
    if not d.vertices:
        problems.append("no vertices")
    if len(set(d.vertices)) != len(d.vertices):
        problems.append("duplicate vertex names")
    seen = set()
    for e in d.edges:
        if e.name in seen:
            problems.append(f"duplicate edge name {e.name!r}")
        seen.add(e.name)
        if e.source not in d.vertices:
            problems.append(f"edge {e.name!r}: unknown source {e.source!r}")
        if e.range not in d.vertices:
            problems.append(f"edge {e.name!r}: unknown range {e.range!r}")
    for v in d.vertices:
        if v in d._out and not d._out[v]:
            problems.append(f"vertex {v!r} has no outgoing edge")
        if v in d._in and not d._in[v]:
            problems.append(f"vertex {v!r} has no incoming edge")
    return problems


def enumerate_paths(d: BratteliDiagram, n: int, end=None):
    """All level-n paths, optionally only those ending at ``end``. Sorted."""
    if n < 0:
        raise DiagramError("negative level")
    if n == 0:
        return [()]
    paths = [(e.name,) for e in d.edges]
    for _ in range(n - 1):
        paths = [
            p + (e.name,) for p in paths for e in d.edges_from(d.path_end(p))
        ]
    if end is not None:
        paths = [p for p in paths if d.path_end(p) == end]
    return sorted(paths)


def count_paths(d: BratteliDiagram, n: int, end=None):
    """Path counts by dynamic programming; cross-checks enumerate_paths."""
    counts = {v: sum(1 for e in d.edges if e.range == v) for v in d.vertices}
    for _ in range(n - 1):
        counts = {
            v: sum(counts[e.source] for e in d.edges_into(v))
            for v in d.vertices
        }
    if n == 0:
        return 1 if end is None else 1
    if end is None:
        return sum(counts.values())
    return counts[end]


def is_simple(d: BratteliDiagram, horizon=16):
    """Full connectivity between some pair of levels within the horizon.

    For a stationary diagram this means some power of the adjacency matrix is
    strictly positive.  Returns ``(True, k)`` with the witness gap, or
    ``(False, None)`` if no gap up to ``horizon`` works (not a disproof).
    """
    reach = {
        v: {e.range for e in d.edges_from(v)} for v in d.vertices
    }
    cur = reach
    for k in range(1, horizon + 1):
        if all(len(cur[v]) == len(d.vertices) for v in d.vertices):
            return True, k
        cur = {
            v: {w for u in cur[v] for w in reach[u]} for v in d.vertices
        }
    return False, None


def shift(path):
    """Delete the level-1 edge; levels move down by one."""
    return tuple(path[1:])


def prefix_switch(d: BratteliDiagram, path, old_prefix, new_prefix):
    """Replace the shallow prefix ``old_prefix`` by ``new_prefix``.

    Both prefixes must end at the same vertex so that the remainder stays
    composable.
    """
    old_prefix, new_prefix, path = tuple(old_prefix), tuple(new_prefix), tuple(path)
    if path[: len(old_prefix)] != old_prefix:
        raise DiagramError("path does not begin with the prefix being replaced")
    if old_prefix and new_prefix:
        if d.path_end(old_prefix) != d.path_end(new_prefix):
            raise DiagramError("replacement prefix ends at a different vertex")
    out = new_prefix + path[len(old_prefix):]
    if not d.is_path(out):
        raise DiagramError("replacement does not yield a path")
    return out


def path_text(path, render="leveln-first"):
    """Canonical text of a finite path (deepest edge written first)."""
    if render == "leveln-first":
        return "".join(reversed(path))
    if render == "level1-first":
        return "".join(path)
    raise DiagramError(f"unknown render order {render!r}")


@dataclass(frozen=True)
class InfPath:
    """Eventually periodic infinite path: preperiod then period repeated."""

    preperiod: tuple
    period: tuple

    def truncate(self, n):
        if n <= len(self.preperiod):
            return tuple(self.preperiod[:n])
        out = list(self.preperiod)
        i = 0
        while len(out) < n:
            out.append(self.period[i % len(self.period)])
            i += 1
        return tuple(out)

    def shifted(self):
        if self.preperiod:
            return InfPath(self.preperiod[1:], self.period)
        p = self.period
        return InfPath((), p[1:] + p[:1])

    def text(self, render="leveln-first"):
        if render == "level1-first":
            pre = "".join(self.preperiod)
            per = "".join(self.period)
            return f"{pre} ({per})^w" if pre else f"({per})^w"
        pre = "".join(reversed(self.preperiod))
        per = "".join(reversed(self.period))
        return f"({per})^w {pre}" if pre else f"({per})^w"

    def normalized(self):
        """Smallest preperiod and primitive period representing the same path."""
        per = self.period
        for k in range(1, len(per)):
            if len(per) % k == 0 and per == per[:k] * (len(per) // k):
                per = per[:k]
                break
        pre = self.preperiod
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        return InfPath(tuple(pre), tuple(per))


def validate_inf_path(d: BratteliDiagram, p: InfPath):
    if not p.period:
        raise DiagramError("empty period")
    joined = p.preperiod + p.period + p.period
    if not d.is_path(joined):
        raise DiagramError("preperiod+period is not composable")
    if d.path_end(p.period) != d.path_start(p.period):
        raise DiagramError("period does not loop")
    return True


def inf_paths_equal(a: InfPath, b: InfPath):
    n = len(a.preperiod) + len(b.preperiod) + 2 * len(a.period) * len(b.period)
    return a.truncate(n) == b.truncate(n)
