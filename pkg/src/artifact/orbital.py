"""Finite-level actions on path spaces: balls, minimality, fragmentation, germs.

A tile tower induces, at every level n, a partial action of the labels on
level-n paths: a label moves a path along its tile edge and is undefined
where it dangles (the deeper sections are nontrivial) or, for inflation
models, where the tile carries no edge at all.  Promotion closes the
dangling half-edges: models backed by an exact self-similar action close
them with the genuine group images, inflation models close them by identity
extension (or by the unique cross pairing when exactly one source faces
exactly one target).  A closure that would have to merge two sources into
one target is refused with a witness, since no injective extension exists.

On top of the raw or promoted action the module builds rooted balls with
canonical codes, censuses ball shapes over a whole level, decides
minimality at a finite horizon, cuts the path space into marker/tail
pieces, fragments a finite-order generator into a subdirect family of new
generators, and assembles bridge graphs whose walks carry cumulative germ
values in a finite abelian group.
"""

from dataclasses import dataclass, field, replace
from itertools import product
from math import gcd

from .diagram import InfPath, enumerate_paths
from .tiles import LabelSet, Tile, build_group_tiles, build_rule_tiles
from .wreath import SelfSimilar


class OrbitalError(ValueError):
    pass


class PromotionError(OrbitalError):
    """No injective closure of the dangling half-edges exists (or none is
    canonical).  Carries the offending label and the point families."""

    def __init__(self, label, sources, targets, names=None):
        self.label = label
        self.sources = tuple(sources)
        self.targets = tuple(targets)
        names = names or {}

        def show(p):
            return names.get(p, "".join(reversed(p)))

        src = " = ".join(f"{label}({show(p)})" for p in self.sources)
        tgt = ", ".join(show(p) for p in self.targets) or "(no target)"
        super().__init__(
            f"cannot close {label!r}: {src} would all have to land in "
            f"{{{tgt}}}"
        )


class FragmentError(OrbitalError):
    def __init__(self, reason, counterexample=None):
        self.counterexample = counterexample
        if counterexample is not None:
            reason = f"{reason} (counterexample path {counterexample})"
        super().__init__(reason)


class _Sentinel:
    def __init__(self, name):
        self._name = name

    def __repr__(self):
        return self._name

    def __bool__(self):
        return False


UNDEFINED = _Sentinel("Undefined")
UNRECOGNIZED = _Sentinel("Unrecognized")


# ---------------------------------------------------------------------------
# Models: a diagram plus one of the two tile routes, grown on demand.


@dataclass
class ActionModel:
    """A tile tower with enough context to deepen it.

    Exactly one of ``group`` (exact self-similar action, single-vertex
    diagram) and ``rule`` (declarative inflation from ``base_tiles``) is
    set.  ``period`` is the level period of the inflation data; stability
    of limit statements is always checked one period apart.
    """

    name: str
    diagram: object
    labels: LabelSet
    group: SelfSimilar = None
    generators: tuple = ()
    vertex: str = "v"
    boundary_names: object = None
    base_tiles: dict = None
    rule: object = None
    period: int = 1
    germs: object = None
    piece_spec: object = None
    singularity: object = None
    _tiles: dict = field(default_factory=dict, repr=False)
    _actions: dict = field(default_factory=dict, repr=False)
    _promotion_veto: object = field(default=None, repr=False)

    def __post_init__(self):
        if (self.group is None) == (self.rule is None and self.base_tiles is None):
            raise OrbitalError("a model needs either a group or inflation data")
        if self.base_tiles:
            self._tiles.update(self.base_tiles)

    @property
    def min_level(self):
        return min(self._tiles) if self._tiles else 1

    def tiles_to(self, n):
        """Per-vertex tiles for every built level, grown to n if needed."""
        if n > max(self._tiles, default=0):
            if self.group is not None:
                grown = build_group_tiles(
                    self.group, self.generators, self.labels, self.diagram,
                    self.vertex, n, boundary_names=self.boundary_names)
                self._tiles = {k: {self.vertex: t} for k, t in grown.items()}
            else:
                self._tiles = build_rule_tiles(
                    self._tiles, self.rule, n,
                    diagram=self.diagram, labels=self.labels)
        return self._tiles

    def tile(self, n, vertex=None):
        per_vertex = self.tiles_to(n)[n]
        if vertex is None:
            if len(per_vertex) != 1:
                raise OrbitalError(f"level-{n} has tiles at {sorted(per_vertex)}; "
                                   "say which vertex")
            return next(iter(per_vertex.values()))
        return per_vertex[vertex]


# ---------------------------------------------------------------------------
# The partial action of the labels at one level, and its promotion.


@dataclass
class PartialAction:
    """Per-label transformations of the level-n paths.

    ``moves`` are the tile edges; ``dangling`` the points whose deeper
    sections are nontrivial; ``closures`` the promoted images of dangling
    points (empty before promotion).  ``total_off_edges`` marks the exact
    route, where a label with trivial section acts (identically or not)
    even without a tile edge; on the rule route such points enter the
    domain only through promotion, as identity.
    """

    level: int
    labels: LabelSet
    points: tuple
    moves: dict
    dangling: dict
    closures: dict
    promoted: bool
    total_off_edges: bool
    point_set: frozenset = field(default=None, repr=False)

    def apply_label(self, lab, p):
        if lab not in self.labels:
            raise OrbitalError(f"unknown label {lab!r}")
        q = self.moves.get(lab, {}).get(p)
        if q is not None:
            return q
        if p in self.dangling.get(lab, ()):
            q = self.closures.get(lab, {}).get(p)
            return UNDEFINED if q is None else q
        if self.total_off_edges or self.promoted:
            return p
        return UNDEFINED

    def apply(self, word, p):
        if isinstance(word, str):
            word = (word,)
        for lab in word:
            p = self.apply_label(lab, p)
            if p is UNDEFINED:
                return UNDEFINED
        return p

    def domain(self, lab):
        return tuple(p for p in self.points
                     if self.apply_label(lab, p) is not UNDEFINED)

    def injectivity_defects(self, lab):
        """Pairs of domain points sharing an image (empty means injective)."""
        seen = {}
        bad = []
        for p in self.points:
            q = self.apply_label(lab, p)
            if q is UNDEFINED:
                continue
            if q in seen:
                bad.append((seen[q], p, q))
            else:
                seen[q] = p
        return bad

    def bijection_defects(self, lab):
        """Defects of a full permutation: undefined points, missed images."""
        images = []
        bad = []
        for p in self.points:
            q = self.apply_label(lab, p)
            if q is UNDEFINED:
                bad.append(("undefined", p))
            else:
                images.append(q)
        missed = set(self.points) - set(images)
        bad.extend(("missed", q) for q in sorted(missed))
        bad.extend(self.injectivity_defects(lab))
        return bad


def partial_action(model, n):
    key = (n, False)
    if key in model._actions:
        return model._actions[key]
    per_vertex = model.tiles_to(n)[n]
    points = []
    moves = {}
    dangling = {}
    for v in sorted(per_vertex):
        t = per_vertex[v]
        points.extend(t.nodes)
        for u, nbrs in t.adj.items():
            for lab, w in nbrs.items():
                moves.setdefault(lab, {})[u] = w
        for u, labs in t.dangling.items():
            for lab in labs:
                dangling.setdefault(lab, set()).add(u)
    points = tuple(sorted(points))
    act = PartialAction(
        level=n, labels=model.labels, points=points,
        moves=moves, dangling={k: frozenset(v) for k, v in dangling.items()},
        closures={}, promoted=False, total_off_edges=model.group is not None,
        point_set=frozenset(points))
    model._actions[key] = act
    return act


def _boundary_point_names(model, n):
    names = {}
    for v, t in model.tiles_to(n)[n].items():
        for name, p in t.boundary.items():
            names[p] = name
    return names


def promote(model, n):
    """Close the dangling half-edges into genuine moves.

    Exact route: the group image is the closure (a fixed point becomes a
    loop, a genuine move becomes a cross edge).  Rule route: matching
    source/target families close as identity loops; a lone source facing a
    lone target closes as the cross edge; anything else has no injective
    closure and raises with the witness.
    """
    key = (n, True)
    if key in model._actions:
        return model._actions[key]
    if model._promotion_veto is not None:
        raise model._promotion_veto
    act = partial_action(model, n)
    closures = {}
    if model.group is not None:
        for lab, pts in act.dangling.items():
            closures[lab] = {p: model.group.word_apply((lab,), p) for p in pts}
    else:
        done = set()
        for lab in sorted(act.dangling):
            if lab in done:
                continue
            inv = model.labels.inverse(lab)
            done.update((lab, inv))
            out = sorted(act.dangling.get(lab, ()))
            inn = sorted(act.dangling.get(inv, ()))
            if set(out) == set(inn):
                closures[lab] = {p: p for p in out}
                if inv != lab:
                    closures[inv] = dict(closures[lab])
            elif len(out) == 1 and len(inn) == 1:
                closures[lab] = {out[0]: inn[0]}
                if inv != lab:
                    closures[inv] = {inn[0]: out[0]}
            else:
                err = PromotionError(lab, out, inn,
                                     _boundary_point_names(model, n))
                model._promotion_veto = err
                raise err
    promoted = replace(act, closures=closures, promoted=True)
    model._actions[key] = promoted
    return promoted


def apply(model, word, p, *, promoted=False):
    """Run a word of labels on a finite path; Undefined is a value."""
    act = promote(model, len(p)) if promoted else partial_action(model, len(p))
    return act.apply(word, p)


def labeling_defects(act):
    """Obstructions to a perfect labeling of the action graph.

    Perfect means every label acts as a bijection of all level-n paths
    whose inverse is the inverse label's action (loops allowed).  Empty
    on a promoted action of a group of bounded type.
    """
    problems = []
    for lab in act.labels:
        inv = act.labels.inverse(lab)
        for p in act.points:
            q = act.apply_label(lab, p)
            if q is UNDEFINED:
                problems.append(("undefined", lab, p))
            elif act.apply_label(inv, q) != p:
                problems.append(("no return", lab, p))
        for p1, p2, q in act.injectivity_defects(lab):
            problems.append(("collision", lab, (p1, p2, q)))
    return problems


# ---------------------------------------------------------------------------
# Rooted balls and their canonical codes.


@dataclass(frozen=True)
class Ball:
    root: tuple
    level: int
    radius: int
    nodes: tuple
    arrows: tuple
    labels: LabelSet

    def code(self):
        """Canonical form under root- and label-preserving isomorphism.

        BFS from the root, expanding neighbors in label order; well-labeled
        graphs leave no ties to break.  Two balls are isomorphic exactly
        when their codes coincide.
        """
        adj = {p: {} for p in self.nodes}
        for u, lab, v in self.arrows:
            adj[u][lab] = v
        index = {self.root: 0}
        order = [self.root]
        i = 0
        while i < len(order):
            u = order[i]
            i += 1
            for lab in sorted(adj[u]):
                v = adj[u][lab]
                if v not in index:
                    index[v] = len(order)
                    order.append(v)
        if len(order) != len(self.nodes):
            raise OrbitalError("ball is not connected from its root")
        return tuple(
            tuple(sorted((lab, index[v]) for lab, v in adj[u].items()))
            for u in order
        )


def _ball_at(act, root, radius, *, edges_only):
    members = act.point_set if act.point_set is not None else act.points
    if root not in members:
        raise OrbitalError(f"{root} is not a level-{act.level} path")
    dist = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for p in frontier:
            if dist[p] == radius:
                continue
            for lab in act.labels:
                q = (act.moves.get(lab, {}).get(p) if edges_only
                     else act.apply_label(lab, p))
                if q is UNDEFINED or q is None or q == p or q in dist:
                    continue
                dist[q] = dist[p] + 1
                nxt.append(q)
        frontier = nxt
    nodes = tuple(sorted(dist))
    inside = set(nodes)
    arrows = []
    for p in nodes:
        for lab in sorted(act.labels):
            q = (act.moves.get(lab, {}).get(p) if edges_only
                 else act.apply_label(lab, p))
            if q is UNDEFINED or q is None or q not in inside:
                continue
            arrows.append((p, lab, q))
    return Ball(root=root, level=act.level, radius=radius, nodes=nodes,
                arrows=tuple(arrows), labels=act.labels)


def _level_action(model, n, promoted):
    if promoted == "auto":
        if model.group is not None:
            return promote(model, n)
        try:
            return promote(model, n)
        except PromotionError:
            return partial_action(model, n)
    return promote(model, n) if promoted else partial_action(model, n)


def orbital_ball(model, base, radius, *, promoted="auto", depth_cap=60):
    """Ball of the given radius around a base point in the level action.

    A finite tuple is used at its own level.  An eventually periodic point
    is truncated ever deeper until the ball looks the same one period
    later (canonical codes equal); failing that within ``depth_cap`` is an
    error.
    """
    if not isinstance(base, InfPath):
        act = _level_action(model, len(base), promoted)
        return _ball_at(act, base, radius,
                        edges_only=not act.promoted)
    step = len(base.period) * model.period // gcd(len(base.period), model.period)
    n = max(len(base.preperiod) + len(base.period), model.min_level, radius + 1)
    while n + step <= depth_cap:
        act1 = _level_action(model, n, promoted)
        act2 = _level_action(model, n + step, promoted)
        b1 = _ball_at(act1, base.truncate(n), radius,
                      edges_only=not act1.promoted)
        b2 = _ball_at(act2, base.truncate(n + step), radius,
                      edges_only=not act2.promoted)
        if b1.code() == b2.code():
            return b1
        n += step
    raise OrbitalError(
        f"ball of radius {radius} around {base.text()} did not stabilize "
        f"within depth cap {depth_cap}")


def _orientation_blind_code(ball):
    """Ball code ignoring the orientation of free label pairs.

    A segment read left to right and its mirror are the same rooted shape;
    minimizing the code over global swaps lab <-> lab^-1 identifies them.
    Self-inverse labels are untouched.
    """
    pairs = sorted({tuple(sorted((lab, ball.labels.inverse(lab))))
                    for lab in ball.labels
                    if not ball.labels.is_self_inverse(lab)})
    best = ball.code()
    for mask in range(1, 1 << len(pairs)):
        swap = {}
        for i, (g, ginv) in enumerate(pairs):
            if mask >> i & 1:
                swap[g], swap[ginv] = ginv, g
        flipped = replace(ball, arrows=tuple(
            (u, swap.get(lab, lab), v) for u, lab, v in ball.arrows))
        best = min(best, flipped.code())
    return best


def ball_census(model, n, radius):
    """Size extremes and shape count of the level-n balls of one radius.

    Uses the raw tile edges (the inverse-semigroup graphs), so balls near
    the boundary are cut and counted as their own shapes.  Returns the
    maximal ball size ``gamma`` and the number of isomorphism classes of
    rooted balls ``delta`` (orientation-blind for free label pairs, so a
    ball and its mirror image count once).
    """
    act = partial_action(model, n)
    gamma = 0
    codes = set()
    for p in act.points:
        ball = _ball_at(act, p, radius, edges_only=True)
        gamma = max(gamma, len(ball.nodes))
        codes.add(_orientation_blind_code(ball))
    return {"level": n, "radius": radius, "gamma": gamma, "delta": len(codes)}


# ---------------------------------------------------------------------------
# Minimality at a finite horizon.


def check_minimality(model, n, horizon=None):
    """Decide the finite-level minimality criterion.

    Single-vertex diagrams: the action is minimal iff it is level
    transitive, so the check is that every tile up to level n spans all
    paths of its level and is connected.  Several vertices: for every pair
    of end vertices, search for equal-length continuations meeting at a
    common vertex by some level <= horizon, which places continuations of
    the two tiles inside one deeper tile.
    """
    if len(model.diagram.vertices) == 1:
        checked = []
        for k in range(model.min_level, n + 1):
            t = model.tile(k)
            full = len(enumerate_paths(model.diagram, k))
            if len(t.nodes) != full or not t.is_connected():
                return {"route": "level-transitive", "established": False,
                        "levels": checked, "failure": k}
            checked.append(k)
        return {"route": "level-transitive", "established": True,
                "levels": checked}

    if horizon is None:
        horizon = n + len(model.diagram.vertices) ** 2 + 1
    witnesses = {}
    failures = []
    for u1, u2 in product(model.diagram.vertices, repeat=2):
        frontier = {(u1, u2): ((), ())}
        found = None
        for steps in range(1, horizon - n + 1):
            nxt = {}
            for (x, y), (d1, d2) in frontier.items():
                for e1 in model.diagram.edges_from(x):
                    for e2 in model.diagram.edges_from(y):
                        pair = (e1.range, e2.range)
                        if pair not in nxt:
                            nxt[pair] = (d1 + (e1.name,), d2 + (e2.name,))
            frontier = nxt
            meet = next(((x, y) for (x, y) in frontier if x == y), None)
            if meet is not None:
                d1, d2 = frontier[meet]
                found = {"level": n + steps, "vertex": meet[0],
                         "continuations": (d1, d2)}
                break
        if found is None:
            failures.append((u1, u2))
        else:
            witnesses[(u1, u2)] = found
    return {"route": "co-continuation", "established": not failures,
            "horizon": horizon, "witnesses": witnesses, "failures": failures}


# ---------------------------------------------------------------------------
# Marker/tail pieces of the path space.


@dataclass(frozen=True)
class PieceSpec:
    """Pieces of the complement of the singular ray (tail edge repeated).

    A path is recognized when, read from the shallow end, a run of tail
    edges is followed by the marker edge; the run length mod ``modulus``
    selects the piece through ``residues`` (a partition of the residues,
    one set per piece; singletons when omitted).
    """

    marker: str
    tail: str
    modulus: int
    residues: tuple = None

    def __post_init__(self):
        if self.marker == self.tail:
            raise OrbitalError("marker and tail edges must differ")
        if self.modulus < 1:
            raise OrbitalError("modulus must be positive")
        if self.residues is None:
            object.__setattr__(
                self, "residues",
                tuple(frozenset({i}) for i in range(self.modulus)))
        else:
            object.__setattr__(
                self, "residues", tuple(frozenset(r) for r in self.residues))
        flat = sorted(x for r in self.residues for x in r)
        if flat != list(range(self.modulus)):
            raise OrbitalError("residue sets must partition the residues")

    def piece_count(self):
        return len(self.residues)

    def piece_of_residue(self, r):
        for i, s in enumerate(self.residues):
            if r % self.modulus in s:
                return i
        raise OrbitalError("unreachable: residues partition the range")


def piece_of(p, spec):
    """Piece index of a finite path, or Unrecognized on the singular tail
    (or any path whose first non-tail edge is not the marker)."""
    k = 0
    while k < len(p) and p[k] == spec.tail:
        k += 1
    if k == len(p) or p[k] != spec.marker:
        return UNRECOGNIZED
    return spec.piece_of_residue(k)


# ---------------------------------------------------------------------------
# Finite abelian germ groups as exponent vectors.


@dataclass(frozen=True)
class GermGroup:
    """Subgroup of a product of cyclic groups, given by generator images.

    Elements are exponent vectors reduced modulo the per-coordinate
    orders; the named generators are the fragmentation images.
    """

    orders: tuple
    images: tuple

    @classmethod
    def from_images(cls, orders, images):
        orders = tuple(int(d) for d in orders)
        items = []
        for name in sorted(images):
            if len(images[name]) != len(orders):
                raise OrbitalError(f"image of {name!r} has the wrong length")
            vec = tuple(v % d for v, d in zip(images[name], orders))
            items.append((name, vec))
        return cls(orders=orders, images=tuple(items))

    def vector(self, name):
        for n, v in self.images:
            if n == name:
                return v
        raise OrbitalError(f"no generator named {name!r}")

    def identity(self):
        return (0,) * len(self.orders)

    def mul(self, u, v):
        return tuple((a + b) % d for a, b, d in zip(u, v, self.orders))

    def inv(self, u):
        return tuple((-a) % d for a, d in zip(u, self.orders))

    def power(self, u, k):
        return tuple((a * k) % d for a, d in zip(u, self.orders))

    def elements(self):
        seen = {self.identity()}
        frontier = [self.identity()]
        while frontier:
            u = frontier.pop()
            for _, g in self.images:
                w = self.mul(u, g)
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return tuple(sorted(seen))

    def order(self):
        return len(self.elements())

    def element_order(self, u):
        k = 1
        w = u
        while w != self.identity():
            w = self.mul(w, u)
            k += 1
        return k

    def exponent(self):
        out = 1
        for u in self.elements():
            o = self.element_order(u)
            out = out * o // gcd(out, o)
        return out

    def coordinate_zero_violations(self):
        """Elements with no zero coordinate (empty when the subdirect
        family leaves every element trivial somewhere)."""
        return [u for u in self.elements() if all(a != 0 for a in u)]


# ---------------------------------------------------------------------------
# Fragmentation of a finite-order generator along a piece spec.


def _rotate(vec):
    return vec[1:] + vec[:1]


def fragment(model, h, spec, images, *, depth=8):
    """Replace generator h by a subdirect family acting piecewise as h^k.

    ``images`` maps each new generator name to its exponent vector over
    the pieces.  Emits the wreath recursion of the new generators: the
    section at the tail edge advances the piece phase (rotating the
    vector), the section at the marker edge is h's marker section raised
    to the piece-0 exponent.  The new model carries the germ group, the
    spec, and the singular point.
    """
    if model.group is None:
        raise OrbitalError("fragmentation needs a model with an exact action")
    g = model.group
    if h not in g.perm:
        raise OrbitalError(f"no generator named {h!r}")
    ord_h = g.element_order((h,))
    if ord_h is None:
        raise OrbitalError(f"order of {h!r} did not settle; cannot fragment")
    d = spec.modulus
    images = {name: tuple(v % ord_h for v in vec)
              for name, vec in images.items()}
    for name, vec in images.items():
        if len(vec) != d:
            raise FragmentError(
                f"image of {name!r} has {len(vec)} coordinates, spec has {d}")

    if any(g.perm[h].get(x, x) != x for x in g.alphabet):
        raise FragmentError(f"{h!r} permutes level 1; pieces cannot be "
                            "invariant", counterexample=(spec.marker,))
    for x in g.alphabet:
        if x in (spec.marker, spec.tail):
            continue
        if not g.is_identity(g.section_word((h,), x)):
            raise FragmentError(
                f"{h!r} acts below {x!r}, outside the recognized pieces",
                counterexample=(x,))

    for lvl in range(1, depth + 1):
        for p in product(g.alphabet, repeat=lvl):
            r = piece_of(p, spec)
            q = g.word_apply((h,), p)
            if r is UNRECOGNIZED:
                if q != p:
                    raise FragmentError(
                        f"{h!r} moves an unrecognized point", counterexample=p)
            elif piece_of(q, spec) != r:
                raise FragmentError(
                    f"piece {r} is not invariant under {h!r}",
                    counterexample=p)

    for j in range(d):
        vals = [vec[j] for vec in images.values()]
        acc = ord_h
        for v in vals:
            acc = gcd(acc, v)
        if acc != 1:
            raise FragmentError(
                f"coordinate {j} is not surjective: images "
                f"{sorted(set(vals))} do not generate order {ord_h}")

    marker_word = g.section_word((h,), spec.marker)
    if any(s in (h, g.inv[h]) for s in marker_word):
        raise FragmentError(
            f"marker section of {h!r} passes through {h!r} itself")

    zero = (0,) * d
    named = {}
    for name in sorted(images):
        named.setdefault(images[name], name)
    state_vec = {}
    for name in sorted(images):
        vec = images[name]
        if named[vec] != name:
            continue  # alias of an identical image
        cur, cur_vec, k = name, vec, 1
        while cur not in state_vec:
            state_vec[cur] = cur_vec
            nxt_vec = _rotate(cur_vec)
            if nxt_vec not in named:
                k += 1
                named[nxt_vec] = f"{name}_{k}"
            cur, cur_vec = named[nxt_vec], nxt_vec

    defs = {}
    for old in g.perm:
        if old in (h, g.inv[h]) or old.endswith("^-1"):
            continue
        secs = g.sections[old]
        for x, word in secs.items():
            if any(s in (h, g.inv[h]) for s in word):
                raise FragmentError(
                    f"generator {old!r} has sections through {h!r}; "
                    "it cannot survive the fragmentation unchanged")
        defs[old] = (dict(g.perm[old]), {x: w for x, w in secs.items() if w})
    for name, vec in state_vec.items():
        if name in defs or name in g.perm:
            raise FragmentError(f"fragment state name {name!r} collides")
        secs = {}
        if vec != zero:
            tail_name = named[_rotate(vec)]
            if state_vec[tail_name] != zero:
                secs[spec.tail] = (tail_name,)
            if vec[0]:
                secs[spec.marker] = marker_word * vec[0]
        defs[name] = ({}, secs)
    for name in images:
        if name not in state_vec:  # alias: same element, second name
            defs[name] = ({}, dict(defs[named[images[name]]][1]))

    new_group = SelfSimilar(g.alphabet, defs)
    new_group.involution_fold()

    kept = [s for s in model.generators if s not in (h, g.inv[h])]
    gen_names = tuple(kept) + tuple(sorted(images))
    labels = LabelSet({s: new_group.inv[s] for s in gen_names})
    germs = GermGroup.from_images((ord_h,) * d, images)
    period = model.period * d // gcd(model.period, d)
    return ActionModel(
        name=f"{model.name}/frag-{h}",
        diagram=model.diagram, labels=labels, group=new_group,
        generators=gen_names, vertex=model.vertex, period=period,
        germs=germs, piece_spec=spec,
        singularity=InfPath((), (spec.tail,)))


# ---------------------------------------------------------------------------
# Bridges: copies of a tile joined at a singular point, with germ tracking.


@dataclass
class BridgeGraph:
    """Copies of one tile joined at a boundary point by germ connectors.

    Copies are indexed by the connector values; consecutive copies (in a
    ring) are joined at the point by the corresponding connector, and the
    remaining nonidentity germs are loops there on every copy.  Walks
    carry a cumulative germ value: every boundary arrow multiplies it by
    the arrow's germ (inverse when crossed backward), and only connector
    arrows change the copy.
    """

    tile: Tile
    point: tuple
    germs: GermGroup
    connectors: tuple
    loops: tuple

    @property
    def copy_count(self):
        return max(1, len(self.connectors))

    def nodes(self):
        return tuple((i, u) for i in range(self.copy_count)
                     for u in self.tile.nodes)

    def tile_arrows(self):
        return tuple(((i, u), lab, (i, v))
                     for i in range(self.copy_count)
                     for u, lab, v in self.tile.arrows)

    def germ_arrows(self):
        out = []
        k = self.copy_count
        for i, hvec in enumerate(self.connectors):
            out.append(((i, self.point), hvec, ((i + 1) % k, self.point)))
        for i in range(k):
            for hvec in self.loops:
                out.append(((i, self.point), hvec, (i, self.point)))
        return tuple(out)

    def germ_of(self, steps):
        """Cumulative germ of a walk, multiplying over boundary arrows."""
        total = self.germs.identity()
        for step in steps:
            if step[0] != "germ":
                continue
            _, hvec, direction = step
            if direction < 0:
                hvec = self.germs.inv(hvec)
            total = self.germs.mul(total, hvec)
        return total

    def walk(self, start_copy, steps):
        """Run a walk; returns (copy, node, germ).  Steps are
        ("move", label) inside the current copy or ("germ", h, +1|-1) at
        the junction point."""
        copy, node = start_copy, self.point
        germ = self.germs.identity()
        k = self.copy_count
        conn = {h: i for i, h in enumerate(self.connectors)}
        for step in steps:
            if step[0] == "move":
                _, lab = step
                nxt = self.tile.adj[node].get(lab)
                if nxt is None:
                    raise OrbitalError(f"no {lab!r} arrow at {node}")
                node = nxt
            elif step[0] == "germ":
                _, hvec, direction = step
                if node != self.point:
                    raise OrbitalError("germ arrows live at the junction point")
                value = hvec if direction > 0 else self.germs.inv(hvec)
                germ = self.germs.mul(germ, value)
                if hvec in conn:
                    i = conn[hvec]
                    if copy == i:
                        copy = (i + 1) % k
                    elif copy == (i + 1) % k:
                        copy = i
                    else:
                        raise OrbitalError(
                            f"connector {hvec} is not incident to copy {copy}")
                elif hvec not in self.loops:
                    raise OrbitalError(f"{hvec} is not a germ at the point")
            else:
                raise OrbitalError(f"unknown walk step {step!r}")
        return copy, node, germ

    def quotient(self):
        """Collapse the copies; the tile comes back, plus germ loops."""
        nodes = self.tile.nodes
        arrows = sorted(set(self.tile.arrows))
        loops = sorted({(self.point, hvec, self.point)
                        for _, hvec, _ in self.germ_arrows()})
        return {"nodes": nodes, "arrows": tuple(arrows),
                "germ_loops": tuple(loops)}


def germ_graph(model, xi, n, connectors, germs=None):
    """Bridge of rank n at an eventually periodic boundary point.

    ``connectors`` is a set of nonidentity germ values (vectors, or
    generator names resolved through the germ group); the other
    nonidentity germs become loops.  The point must dangle at level n and
    one period deeper, else it is not a boundary point of the tower.
    """
    germs = germs if germs is not None else model.germs
    if germs is None:
        raise OrbitalError("no germ group on this model; pass one explicitly")
    if not isinstance(xi, InfPath):
        raise OrbitalError("the singular point must be eventually periodic")

    vecs = []
    for c in connectors:
        vec = germs.vector(c) if isinstance(c, str) else tuple(c)
        if vec == germs.identity():
            raise OrbitalError("connector sets exclude the identity germ")
        if vec not in germs.elements():
            raise OrbitalError(f"{c} is not a germ value")
        vecs.append(vec)
    vecs = tuple(sorted(set(vecs)))

    for level in (n, n + model.period):
        p = xi.truncate(level)
        t = model.tile(level, model.diagram.path_end(p))
        if p not in t.dangling:
            raise OrbitalError(
                f"{xi.text()} is not a boundary point: its level-{level} "
                "truncation does not dangle")

    point = xi.truncate(n)
    tile = model.tile(n, model.diagram.path_end(point))
    loops = tuple(u for u in germs.elements()
                  if u != germs.identity() and u not in vecs)
    return BridgeGraph(tile=tile, point=point, germs=germs,
                       connectors=vecs, loops=loops)
