"""Labeled graphs with boundary and the tile inflation engine.

A level-n tile collects all level-n paths of a Bratteli diagram that end at
a fixed vertex.  Edges are two-sided arrows carrying labels from a finite
alphabet closed under formal inversion; boundary points carry dangling
half-edges that deeper levels either complete with connector edges or renew.

Tiles are produced two ways:

* from a self-similar group action (``build_group_tiles``): the edge rule is
  exact, an edge ``w --F--> F(w)`` exists precisely when the section of F at
  w is the identity and F moves w, and F dangles at w when the section is
  nontrivial;
* from a declarative inflation rule (``inflate_level`` / ``build_rule_tiles``):
  each new tile is a disjoint union of copies of previous-level tiles, one
  per incoming diagram edge, plus declared connector edges between copied
  boundary points.

Both routes record, per level, which edges were newly added (connectors)
and which points are boundary, so later stages can reason about bridges
between copies without re-deriving them.
"""

from dataclasses import dataclass, field

from .diagram import enumerate_paths, path_text
from .wreath import inverse_name


class TileError(ValueError):
    pass


class LabelSet:
    """Finite edge alphabet with an involution label -> label^-1."""

    def __init__(self, involution):
        self.inv = dict(involution)
        for k, v in list(self.inv.items()):
            self.inv.setdefault(v, k)
        for k, v in self.inv.items():
            if self.inv[v] != k:
                raise TileError(f"label involution not involutive at {k!r}")

    @classmethod
    def self_inverse(cls, names):
        return cls({x: x for x in names})

    @classmethod
    def free(cls, names):
        """Each name paired with a distinct formal inverse."""
        return cls({x: inverse_name(x) for x in names})

    def inverse(self, label):
        return self.inv[label]

    def is_self_inverse(self, label):
        return self.inv[label] == label

    @property
    def names(self):
        return sorted(self.inv)

    def __contains__(self, label):
        return label in self.inv

    def __iter__(self):
        return iter(self.names)

    def __eq__(self, other):
        return isinstance(other, LabelSet) and self.inv == other.inv


@dataclass(frozen=True)
class Connector:
    """A newly installed edge: arrow point1 --label--> point2 at `level`."""

    point1: tuple
    point2: tuple
    label: str
    level: int


def labeling_violations(nodes, arrows, dangling, labels: LabelSet):
    """Well-labeledness defects of a raw arrow list.

    `arrows` holds (u, label, v) with the inverse arrow implied; `dangling`
    maps node -> outgoing dangling labels.  A defect is more than one
    outgoing or incoming arrow with one label at one node; dangling
    half-edges occupy slots like real arrows.
    """
    out = {}
    inc = {}

    def bump(table, node, label, desc):
        table.setdefault((node, label), []).append(desc)

    for u, lab, v in arrows:
        bump(out, u, lab, f"{path_text(u)} -{lab}-> {path_text(v)}")
        bump(inc, v, lab, f"{path_text(u)} -{lab}-> {path_text(v)}")
        bump(out, v, labels.inverse(lab), f"{path_text(v)} -{labels.inverse(lab)}-> {path_text(u)}")
        bump(inc, u, labels.inverse(lab), f"{path_text(v)} -{labels.inverse(lab)}-> {path_text(u)}")
    for u, labs in dangling.items():
        for lab in labs:
            bump(out, u, lab, f"{path_text(u)} -{lab}-> (dangling)")
            bump(inc, u, labels.inverse(lab), f"(dangling) -{labels.inverse(lab)}-> {path_text(u)}")

    problems = []
    for table, direction in ((out, "outgoing"), (inc, "incoming")):
        for (node, lab), entries in sorted(table.items()):
            if len(entries) > 1:
                problems.append(
                    f"{len(entries)} {direction} {lab!r} arrows at {path_text(node)}: "
                    + "; ".join(entries)
                )
    return problems


class Tile:
    """Connected labeled graph on the level-n paths ending at one vertex."""

    def __init__(self, level, vertex, nodes, arrows, dangling, boundary,
                 labels: LabelSet, connectors=(), check=True):
        self.level = level
        self.vertex = vertex
        self.nodes = tuple(sorted(nodes))
        self.arrows = tuple(arrows)
        self.dangling = {u: tuple(sorted(ls)) for u, ls in dangling.items() if ls}
        self.boundary = dict(boundary)
        self.labels = labels
        self.connectors = tuple(connectors)
        self._index = {w: i for i, w in enumerate(self.nodes)}
        self.adj = {w: {} for w in self.nodes}
        for u, lab, v in self.arrows:
            self._install(u, lab, v)
            self._install(v, labels.inverse(lab), u)
        self._nbrs = None
        if check:
            self._validate()

    def _install(self, u, lab, v):
        if self.adj[u].get(lab, v) != v:
            raise TileError(
                f"two {lab!r} arrows out of {path_text(u)} (level {self.level})"
            )
        self.adj[u][lab] = v

    def _validate(self):
        node_set = set(self.nodes)
        for u, lab, v in self.arrows:
            if u not in node_set or v not in node_set:
                raise TileError(f"arrow endpoint outside tile at level {self.level}")
            if lab not in self.labels:
                raise TileError(f"unknown label {lab!r}")
        for name, p in self.boundary.items():
            if p not in node_set:
                raise TileError(f"boundary point {name!r} = {path_text(p)} not a tile node")
        for p in self.dangling:
            if p not in node_set:
                raise TileError(f"dangling point {path_text(p)} not a tile node")
        if len(self.nodes) > 1 and not self.is_connected():
            raise TileError(f"tile at level {self.level} ({self.vertex}) is disconnected")

    @property
    def size(self):
        return len(self.nodes)

    def simple_neighbors(self, u):
        """Neighbors in the underlying undirected simple graph."""
        if self._nbrs is None:
            self._nbrs = {
                w: tuple(sorted({v for v in self.adj[w].values() if v != w}))
                for w in self.nodes
            }
        return self._nbrs[u]

    def is_connected(self):
        if not self.nodes:
            return True
        seen = {self.nodes[0]}
        queue = [self.nodes[0]]
        while queue:
            u = queue.pop()
            for v in self.simple_neighbors(u):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == len(self.nodes)

    def distances_from(self, start):
        self.simple_neighbors(start)
        nbrs = self._nbrs
        dist = {start: 0}
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for v in nbrs[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        return dist

    def distance(self, u, v):
        d = self.distances_from(u).get(v)
        if d is None:
            raise TileError("nodes in different components")
        return d

    def boundary_points(self):
        """Dangling points; equals the named boundary set when names exist."""
        return sorted(self.dangling)


def check_labeling(tile_or_graph):
    """Classify a labeled graph: ('perfect'|'well'|'violations', details).

    Well-labeled: at most one outgoing and one incoming arrow per label per
    node, dangling half-edges included.  Perfect: additionally every label
    slot is filled by a real arrow (loops count; danglings do not fill).
    """
    g = tile_or_graph
    problems = labeling_violations(g.nodes, g.arrows, g.dangling, g.labels)
    if problems:
        return "violations", problems
    filled_out = {(u, lab) for u, lab, v in g.arrows} | {
        (v, g.labels.inverse(lab)) for u, lab, v in g.arrows
    }
    for u in g.nodes:
        for lab in g.labels:
            if (u, lab) not in filled_out:
                return "well", []
    return "perfect", []


def exact_diameter(tile: Tile):
    """Exact diameter by iterative fringe refutation.

    Double sweep gives a lower bound and a midpoint; eccentricities are then
    checked only for nodes deeper (from the midpoint) than half the bound.
    Linear time on trees, exact on any connected graph.
    """
    if tile.size <= 1:
        return 0
    d0 = tile.distances_from(tile.nodes[0])
    a = max(d0, key=d0.get)
    da = tile.distances_from(a)
    b = max(da, key=da.get)
    lb = da[b]
    db = tile.distances_from(b)
    half = lb // 2
    mid = next(u for u in tile.nodes if da[u] + db[u] == lb and da[u] == half)
    dm = tile.distances_from(mid)
    levels = {}
    for u, d in dm.items():
        levels.setdefault(d, []).append(u)
    for i in sorted(levels, reverse=True):
        if lb >= 2 * i:
            break
        for u in levels[i]:
            ecc = max(tile.distances_from(u).values())
            if ecc > lb:
                lb = ecc
    return lb


def tile_metrics(tile: Tile):
    """Exact size, diameter, and pairwise boundary distances (BFS)."""
    if not tile.is_connected():
        raise TileError("metrics need a connected tile")
    diameter = exact_diameter(tile)
    names = sorted(tile.boundary)
    bd = {}
    for i, n1 in enumerate(names):
        dist = tile.distances_from(tile.boundary[n1])
        for n2 in names[i + 1:]:
            bd[(n1, n2)] = dist[tile.boundary[n2]]
    return {"size": tile.size, "diameter": diameter, "boundary_distances": bd}


# ---------------------------------------------------------------------------
# Group route: tiles from an exact self-similar action.


def build_group_tiles(group, generators, labels, diagram, vertex, n_max,
                      boundary_names=None):
    """Tiles of the partial action of `generators` on finite levels.

    Edge rule at level n: for a generator F and a path w, install
    w --F--> F(w) when the section F|_w is trivial (exact check) and F
    moves w; record F as dangling at w when F|_w is nontrivial.  Edges
    whose level-(n-1) truncation was not an edge are the connectors of
    level n.

    `boundary_names`: optional callable level -> {name: path}; the named
    set must coincide with the dangling point set (cross-check).
    """
    positive = tuple(generators)
    out_labels = []
    for g in positive:
        out_labels.append(g)
        if not labels.is_self_inverse(g):
            out_labels.append(labels.inverse(g))

    tiles = {}
    prev_edges = set()
    for n in range(1, n_max + 1):
        nodes = enumerate_paths(diagram, n, end=vertex)
        arrows = []
        dangling = {}
        connectors = []
        for w in nodes:
            for g in out_labels:
                word = (g,)
                sec = group.section_along(word, w)
                if not group.is_identity(sec):
                    dangling.setdefault(w, []).append(g)
                    continue
                img = group.word_apply(word, w)
                if img == w:
                    continue
                if g not in positive:
                    continue  # the implied reverse of a stored arrow
                if labels.is_self_inverse(g) and img < w:
                    continue  # stored when visiting the other endpoint
                arrows.append((w, g, img))
                if n == 1 or (w[:-1], g) not in prev_edges:
                    connectors.append(Connector(w, img, g, n))
        prev_edges = {(w, g) for w, g, img in arrows}
        prev_edges |= {(img, labels.inverse(g)) for w, g, img in arrows}

        boundary = {}
        if boundary_names is not None:
            boundary = boundary_names(n)
            named = sorted(boundary.values())
            if named != sorted(dangling):
                raise TileError(
                    f"declared boundary names at level {n} do not match the "
                    f"dangling set: {named} vs {sorted(dangling)}"
                )
        tiles[n] = Tile(n, vertex, nodes, arrows, dangling, boundary, labels,
                        connectors)
    return tiles


# ---------------------------------------------------------------------------
# Rule route: declarative inflation.


@dataclass(frozen=True)
class ConnectorRule:
    """Connector for the tile at `vertex`: arrow end1 --labels--> end2.

    Ends are (copy edge, boundary name of the copied tile).  `labels` is a
    tuple, or a dict residue -> tuple keyed by new level % label_modulus.
    """

    vertex: str
    end1: tuple
    end2: tuple
    labels: object


@dataclass(frozen=True)
class BoundaryRule:
    """New boundary point `name` of the tile at `vertex`.

    The point is the copy along `parent` = (copy edge, parent name); it
    dangles `dangling` (tuple, or dict residue -> tuple).
    """

    vertex: str
    name: str
    parent: tuple
    dangling: object


@dataclass(frozen=True)
class LevelRule:
    copies: dict          # vertex -> tuple of copy edges (range = vertex)
    connectors: tuple     # ConnectorRule
    boundary: tuple       # BoundaryRule


@dataclass(frozen=True)
class InflationRule:
    """Level rules keyed by (new level) % modulus, label schedules by
    (new level) % label_modulus."""

    modulus: int
    per_level: dict
    label_modulus: int = 1

    def rule_for(self, new_level):
        return self.per_level[new_level % self.modulus]

    def resolve(self, spec, new_level):
        if isinstance(spec, dict):
            return tuple(spec[new_level % self.label_modulus])
        return tuple(spec)


def inflate_level(rule: InflationRule, tiles_n, *, diagram, labels):
    """One inflation step: level-n tiles per vertex -> level-(n+1) tiles.

    Copies append the copy edge at the deep end; connectors join copied
    boundary points; the new boundary is exactly the declared continuation
    set with its declared dangling labels.
    """
    some = next(iter(tiles_n.values()))
    new_level = some.level + 1
    lvl = rule.rule_for(new_level)
    out = {}
    for vertex, copy_edges in lvl.copies.items():
        nodes = []
        arrows = []
        dangling = {}
        connectors = []
        for e in copy_edges:
            edge = diagram.edge_by_name[e]
            if edge.range != vertex:
                raise TileError(f"copy edge {e!r} does not end at {vertex!r}")
            src = tiles_n[edge.source]
            nodes.extend(w + (e,) for w in src.nodes)
            arrows.extend((u + (e,), lab, v + (e,)) for u, lab, v in src.arrows)
        node_set = set(nodes)

        for c in lvl.connectors:
            if c.vertex != vertex:
                continue
            labs = rule.resolve(c.labels, new_level)
            p1 = _copied_point(tiles_n, diagram, c.end1)
            p2 = _copied_point(tiles_n, diagram, c.end2)
            for p in (p1, p2):
                if p not in node_set:
                    raise TileError(
                        f"connector point {path_text(p)} missing from level "
                        f"{new_level} tile at {vertex!r}"
                    )
            d1 = _parent_dangling(tiles_n, diagram, c.end1)
            d2 = _parent_dangling(tiles_n, diagram, c.end2)
            for lab in labs:
                if lab not in labels:
                    raise TileError(f"connector label {lab!r} unknown")
                # a connector consumes a dangling half-edge at each end
                if lab not in d1 or labels.inverse(lab) not in d2:
                    raise TileError(
                        f"level-{new_level} connector label {lab!r} not dangling "
                        f"at its parent boundary points ({c.end1} / {c.end2})"
                    )
                arrows.append((p1, lab, p2))
                connectors.append(Connector(p1, p2, lab, new_level))

        boundary = {}
        for b in lvl.boundary:
            if b.vertex != vertex:
                continue
            p = _copied_point(tiles_n, diagram, b.parent)
            if p not in node_set:
                raise TileError(
                    f"boundary continuation {b.name!r} -> {path_text(p)} missing "
                    f"at level {new_level}"
                )
            boundary[b.name] = p
            dangling[p] = rule.resolve(b.dangling, new_level)

        out[vertex] = Tile(new_level, vertex, nodes, arrows, dangling, boundary,
                           labels, connectors)
    return out


def _copied_point(tiles_n, diagram, end):
    e, name = end
    src = tiles_n[diagram.edge_by_name[e].source]
    if name not in src.boundary:
        raise TileError(
            f"connector references {name!r}, not a boundary point of the "
            f"level-{src.level} tile at {src.vertex!r}"
        )
    return src.boundary[name] + (e,)


def _parent_dangling(tiles_n, diagram, end):
    e, name = end
    src = tiles_n[diagram.edge_by_name[e].source]
    return src.dangling.get(src.boundary[name], ())


def build_rule_tiles(base_tiles, rule: InflationRule, n_max, *, diagram, labels):
    """Iterate inflate_level from declared base tiles up to n_max.

    `base_tiles`: dict level -> dict vertex -> Tile (all declared levels).
    Returns dict level -> dict vertex -> Tile.
    """
    levels = dict(base_tiles)
    top = max(levels)
    for n in range(top + 1, n_max + 1):
        levels[n] = inflate_level(rule, levels[n - 1], diagram=diagram, labels=labels)
    for n, per_vertex in levels.items():
        for v, t in per_vertex.items():
            expect = enumerate_paths(diagram, n, end=v)
            if t.nodes != tuple(expect):
                raise TileError(
                    f"level-{n} tile at {v!r} has {len(t.nodes)} nodes, "
                    f"expected all {len(expect)} paths ending there"
                )
    return levels


# ---------------------------------------------------------------------------
# Embeddings via the copy structure.


def find_embeddings(tower_tiles, small, big, *, diagram):
    """Occurrences of tile `small` = (vertex, n) inside `big` = (vertex, m).

    Occurrences are inflation copies: one per diagram path of length m - n
    from small's vertex to big's vertex (deep-edge suffix).  Reports the
    covering radius (max distance from any node of the big tile to the
    nearest occurrence node) and the residual component sizes after
    removing all occurrence nodes.
    """
    (sv, sn), (bv, bn) = small, big
    if bn < sn:
        raise TileError("small tile must be at most as deep as big")
    small_tile = tower_tiles[sn][sv]
    big_tile = tower_tiles[bn][bv]
    suffixes = [
        p for p in enumerate_paths(diagram, bn - sn, end=bv)
        if diagram.path_start(p) == sv
    ] if bn > sn else ([()] if sv == bv else [])

    occ_nodes = set()
    occurrences = []
    for s in suffixes:
        occurrences.append(s)
        occ_nodes.update(w + s for w in small_tile.nodes)

    max_gap = 0
    if occurrences:
        dist = {u: 0 for u in occ_nodes}
        frontier = sorted(occ_nodes)
        while frontier:
            nxt = []
            for u in frontier:
                for v in big_tile.simple_neighbors(u):
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        max_gap = max(dist.values(), default=0)

    residue = [u for u in big_tile.nodes if u not in occ_nodes]
    comp_sizes = []
    seen = set()
    res_set = set(residue)
    for u in residue:
        if u in seen:
            continue
        comp = 0
        stack = [u]
        seen.add(u)
        while stack:
            x = stack.pop()
            comp += 1
            for y in big_tile.simple_neighbors(x):
                if y in res_set and y not in seen:
                    seen.add(y)
                    stack.append(y)
        comp_sizes.append(comp)
    return {
        "occurrences": occurrences,
        "count": len(occurrences),
        "max_gap": max_gap,
        "sieve_components": sorted(comp_sizes, reverse=True),
    }
