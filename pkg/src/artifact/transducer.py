"""Boundary-connection automata over tile towers.

States at level n are the trivial states 1_v plus the boundary connections
(F, g1, g2): F sticks out at g1 and points into g2.  Reading one more edge
either keeps the connection pending, or switches to a trivial state when
the action of F on the extended path becomes determined and lands in the
declared image cylinder.  Finite-step branching is allowed; on infinite
inputs at most one branch survives, so the automaton is deterministic in
the limit.  Branches that die without switching are garbage and are pruned
by reachability analysis before minimization.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagram import InfPath, path_text


class TransducerError(ValueError):
    pass


@dataclass(frozen=True)
class Trivial:
    level: int
    vertex: str

    def name(self):
        return f"1_{self.vertex}@{self.level}"


@dataclass(frozen=True)
class Pending:
    label: str
    gamma1: tuple
    gamma2: tuple
    v1: str
    v2: str

    @property
    def level(self):
        return len(self.gamma1)

    def name(self):
        if not self.gamma1:
            return f"({self.label},{self.v1},{self.v2})@0"
        return (f"({self.label},{path_text(self.gamma1)},"
                f"{path_text(self.gamma2)})@{self.level}")


@dataclass(frozen=True)
class Transition:
    src: object
    e_in: str
    e_out: str
    dst: object
    switch: bool


def _as_tower(tiles):
    """Accept level->Tile (single vertex) or level->vertex->Tile."""
    out = {}
    for n, v in tiles.items():
        out[n] = v if isinstance(v, dict) else {v.vertex: v}
    return out


class Transducer:
    def __init__(self, diagram, labels, depth, total, states, transitions,
                 initial):
        self.diagram = diagram
        self.labels = labels
        self.depth = depth
        self.total = total
        self.states = states            # level -> tuple of states
        self.transitions = transitions  # state -> tuple of Transition
        self.initial = tuple(initial)
        self._alive = None
        self._productive = None

    # -- liveness ----------------------------------------------------------

    def _flow(self):
        """Backward-propagate 'reaches a switch' and 'reaches the horizon'."""
        productive = set()
        persistent = set(self.states.get(self.depth, ()))
        for n in range(self.depth - 1, -1, -1):
            for s in self.states[n]:
                for t in self.transitions.get(s, ()):
                    if t.switch:
                        productive.add(s)
                    elif t.dst in productive:
                        productive.add(s)
                    if not t.switch and (t.dst in persistent):
                        persistent.add(s)
        self._productive = productive
        self._alive = productive | persistent

    @property
    def productive(self):
        """States from which some run completes with a switch."""
        if self._productive is None:
            self._flow()
        return self._productive

    @property
    def alive(self):
        """Productive states plus pending chains that reach the horizon."""
        if self._alive is None:
            self._flow()
        return self._alive

    def alive_transitions(self, s):
        return tuple(t for t in self.transitions.get(s, ())
                     if t.switch or t.dst in self.alive)

    def nontrivial_states(self):
        for n in range(self.depth + 1):
            for s in self.states[n]:
                if isinstance(s, Pending):
                    yield s

    # -- section of a word of labels along a path --------------------------

    def run(self, label, gamma):
        """All surviving runs of `label` consuming `gamma`: (state, output)."""
        start_v = (self.diagram.edge_by_name[gamma[0]].source if gamma
                   else None)
        branches = []
        for s in self.initial:
            if isinstance(s, Pending) and s.label == label:
                if start_v is None or s.v1 == start_v:
                    branches.append((s, ()))
        for e in gamma:
            nxt = []
            for s, out in branches:
                for t in self.transitions.get(s, ()):
                    if t.e_in == e:
                        nxt.append((t.dst, out + (t.e_out,)))
            branches = nxt
        seen = set()
        final = []
        for s, out in branches:
            if isinstance(s, Pending) and s not in self.alive:
                continue
            if (s, out) not in seen:
                seen.add((s, out))
                final.append((s, out))
        return final

    def section(self, word, gamma, group=None):
        """Per-factor automaton states of `word` along `gamma`.

        Returns {"states": [...], "image": path}.  For total models pass the
        wreath recursion as `group` and the result is exact; otherwise the
        unique surviving run is used and an undefined factor raises
        TransducerError naming its index.
        """
        states = []
        cur = tuple(gamma)
        for i, f in enumerate(word):
            if group is not None:
                sec = group.section_along((f,), cur)
                img = group.word_apply((f,), cur)
                if group.is_identity(sec):
                    v = self.diagram.path_end(cur) if cur else None
                    states.append(Trivial(len(cur), v or self._any_vertex()))
                else:
                    v1 = self.diagram.path_end(cur) if cur else self._any_vertex()
                    v2 = self.diagram.path_end(img) if img else self._any_vertex()
                    states.append(Pending(f, cur, img, v1, v2))
                cur = img
                continue
            runs = self.run(f, cur)
            if not runs:
                raise TransducerError(f"undefined action at factor {i}")
            if len(runs) > 1:
                trivs = [r for r in runs if isinstance(r[0], Trivial)]
                prods = [r for r in runs if r[0] in self.productive]
                runs = trivs or prods or runs[:1]
            s, out = runs[0]
            states.append(s)
            cur = out
        return {"states": states, "image": cur}

    def _any_vertex(self):
        return self.diagram.vertices[0]


def synthesize(tiles, diagram, labels, depth, total=False):
    """Build the boundary-connection automaton from a tile tower.

    Transitions: 1_v --e|e--> 1_r(e); a connection extends to a connection
    when the label still sticks out on both sides; it switches to trivial
    when the extended action is determined and its image extends g2.  For
    `total` models an absent edge with no dangling means the cylinder is
    fixed pointwise, so the identity image is used for the switch test.
    """
    tower = _as_tower(tiles)
    for n in range(1, depth + 1):
        if n not in tower:
            raise TransducerError(f"tiles missing at level {n}")
    states = {0: []}
    transitions = {}
    verts = diagram.vertices
    for v in verts:
        states[0].append(Trivial(0, v))
    for lab in sorted(labels):
        for v1 in verts:
            for v2 in verts:
                states[0].append(Pending(lab, (), (), v1, v2))
    initial = tuple(states[0])

    def dangling(n, p):
        t = tower[n].get(diagram.path_end(p))
        return t.dangling.get(p, ()) if t is not None else ()

    def edge_image(n, p, lab):
        t = tower[n].get(diagram.path_end(p))
        if t is None:
            return None
        return t.adj.get(p, {}).get(lab)

    for n in range(depth):
        nxt = []
        for s in states[n]:
            outs = []
            if isinstance(s, Trivial):
                for e in diagram.edges_from(s.vertex):
                    dst = Trivial(n + 1, e.range)
                    outs.append(Transition(s, e.name, e.name, dst, False))
                    nxt.append(dst)
                transitions[s] = tuple(outs)
                continue
            for e1 in diagram.edges_from(s.v1):
                w1 = s.gamma1 + (e1.name,)
                if s.label in dangling(n + 1, w1):
                    for e2 in diagram.edges_from(s.v2):
                        w2 = s.gamma2 + (e2.name,)
                        if labels.inverse(s.label) in dangling(n + 1, w2):
                            dst = Pending(s.label, w1, w2, e1.range, e2.range)
                            outs.append(Transition(s, e1.name, e2.name, dst,
                                                   False))
                            nxt.append(dst)
                    continue
                img = edge_image(n + 1, w1, s.label)
                if img is None and total:
                    img = w1  # fixed cylinder: trivial section, no move
                if img is None:
                    continue
                ok = (img[:-1] == s.gamma2 if s.gamma2 else
                      diagram.edge_by_name[img[0]].source == s.v2)
                if ok:
                    dst = Trivial(n + 1, diagram.path_end(img))
                    outs.append(Transition(s, e1.name, img[-1], dst, True))
            transitions[s] = tuple(outs)
        seen = set()
        uniq = []
        for s in nxt:
            if s not in seen:
                seen.add(s)
                uniq.append(s)
        states[n + 1] = uniq
    for s in states[depth]:
        transitions.setdefault(s, ())
    return Transducer(diagram, labels, depth, total, states, transitions,
                      initial)


def incoming_counts(t: Transducer):
    """Incoming-transition count per non-initial pending state."""
    counts = {}
    for n in range(t.depth + 1):
        for s in t.states[n]:
            if isinstance(s, Pending) and s.level >= 1:
                counts[s] = 0
    for src, ts in t.transitions.items():
        for tr in ts:
            if tr.dst in counts:
                counts[tr.dst] += 1
    return counts


# ---------------------------------------------------------------------------
# minimization


class MinimizedTransducer:
    def __init__(self, transducer, class_of, classes, quotient, report_depth,
                 period):
        self.transducer = transducer
        self.class_of = class_of        # state -> class id (report levels only)
        self.classes = classes          # class id -> tuple of states
        self.quotient = quotient        # class id -> {(e_in, e_out, class id)}
        self.report_depth = report_depth
        self.period = period

    def nontrivial_classes(self):
        return [c for c, members in self.classes.items()
                if isinstance(members[0], Pending)]

    def trivial_class(self):
        for c, members in self.classes.items():
            if isinstance(members[0], Trivial):
                return c
        return None

    def class_name(self, c):
        reps = [s for s in self.classes[c] if isinstance(s, Pending)]
        if not reps:
            return "1"
        rep = min(reps, key=lambda s: (s.level, s.name()))
        return rep.name()

    def initial_class(self, label, v1=None, v2=None):
        for s in self.transducer.initial:
            if isinstance(s, Pending) and s.label == label:
                if v1 is not None and s.v1 != v1:
                    continue
                if v2 is not None and s.v2 != v2:
                    continue
                c = self.class_of.get(s)
                if c is not None:
                    return c
        return None

    def section_set(self, c):
        """All nontrivial classes reachable from c, c included."""
        seen = {c}
        stack = [c]
        while stack:
            cur = stack.pop()
            for _, _, dst in self.quotient.get(cur, ()):
                if dst not in seen and isinstance(self.classes[dst][0],
                                                 Pending):
                    seen.add(dst)
                    stack.append(dst)
        return seen

    def state_count(self):
        return len(self.classes)


def minimize(t, rounds=3, slack=3, max_period=4):
    """Partition refinement over alive states, horizon margin excluded.

    Dead branches are invisible only once they have died: a garbage pair
    born near the synthesis depth still counts as alive, so signatures
    within `slack` levels of the horizon are polluted, and each refinement
    round drags the pollution one level lower.  Classes are therefore
    reported only up to depth - rounds - slack.  Stabilization requires the
    per-level class census to repeat with some period <= max_period;
    otherwise the depth was too shallow and a TransducerError asks for
    more.
    """
    if isinstance(t, MinimizedTransducer):
        return t
    margin = rounds + slack
    report_depth = t.depth - margin
    if report_depth < 2:
        raise TransducerError("increase depth: horizon margin leaves nothing")
    domain = []
    for n in range(t.depth + 1):
        for s in t.states[n]:
            if isinstance(s, Trivial) or s in t.alive:
                domain.append(s)
    def canonical(part):
        ids = {}
        out = {}
        for s in domain:
            k = part[s]
            if k not in ids:
                ids[k] = len(ids)
            out[s] = ids[k]
        return out

    # Rounds are capped at `margin`: round k separates behavior visible
    # within k steps, while horizon artifacts creep one level per round and
    # stay above the report window.  Inequivalent states that agree through
    # `margin` steps would merge; the census certificate and the soundness
    # check are the guards.
    # Trivial states are pinned per vertex: identity behaves identically at
    # every level, and letting them refine would leak horizon noise through
    # switch targets.  Switches are recorded as terminal events.
    block = {s: ("triv", s.vertex) if isinstance(s, Trivial) else ("pend",)
             for s in domain}
    numbered = canonical(block)
    for _ in range(rounds):
        sig = {}
        for s in domain:
            if isinstance(s, Trivial):
                sig[s] = ("triv", s.vertex)
                continue
            outs = []
            for tr in t.alive_transitions(s):
                if tr.switch:
                    outs.append((tr.e_in, tr.e_out, ("!", tr.dst.vertex),
                                 True))
                elif tr.dst in numbered:
                    outs.append((tr.e_in, tr.e_out, numbered[tr.dst], False))
            sig[s] = (numbered[s], tuple(sorted(outs)))
        renum = canonical(sig)
        if renum == numbered:
            break
        numbered = renum
    block = numbered
    # keep only the trustworthy window
    kept = [s for s in domain if s.level <= report_depth]
    ids = {}
    class_of = {}
    members = {}
    for s in kept:
        key = block[s]
        if key not in ids:
            ids[key] = len(ids)
        c = ids[key]
        class_of[s] = c
        members.setdefault(c, []).append(s)
    classes = {c: tuple(sorted(ms, key=lambda s: (s.level, s.name())))
               for c, ms in members.items()}
    quotient = {}
    for s in kept:
        c = class_of[s]
        for tr in t.alive_transitions(s):
            if tr.dst in class_of:
                quotient.setdefault(c, set()).add(
                    (tr.e_in, tr.e_out, class_of[tr.dst]))
    # stabilization: census per level repeats with some small period
    census = {}
    for s in kept:
        census.setdefault(s.level, set()).add(class_of[s])
    period = None
    for p in range(1, max_period + 1):
        top = report_depth
        if top < 2 * p - 1:
            continue
        if all(census.get(n, set()) == census.get(n - p, set())
               for n in range(top - p + 1, top + 1)):
            period = p
            break
    if period is None:
        raise TransducerError(
            "increase depth: class census still drifting at the horizon")
    return MinimizedTransducer(t, class_of, classes, quotient, report_depth,
                               period)


def behavior_tree(t: Transducer, s, lookahead):
    """Alive behavior of `s` to `lookahead` steps, as a comparable value."""
    if lookahead == 0:
        return "?"
    out = []
    for tr in t.alive_transitions(s):
        sub = ("!" if tr.switch else
               behavior_tree(t, tr.dst, lookahead - 1))
        out.append((tr.e_in, tr.e_out, tr.switch, sub))
    return tuple(sorted(out))


def soundness_check(mt: MinimizedTransducer, cap=4):
    """Exhaustively compare merged states' behavior within available depth."""
    t = mt.transducer
    bad = []
    for c, members in mt.classes.items():
        look = min(cap, min(t.depth - s.level for s in members))
        if look <= 0 or len(members) < 2:
            continue
        ref = behavior_tree(t, members[0], look)
        for s in members[1:]:
            if behavior_tree(t, s, look) != ref:
                bad.append((mt.class_name(c), members[0].name(), s.name()))
    return bad


# ---------------------------------------------------------------------------
# classification


def classify(mt: MinimizedTransducer):
    """Finitary/directed split, directed cycles, periodic boundary points."""
    nontriv = set(mt.nontrivial_classes())
    succ = {c: sorted({dst for _, _, dst in mt.quotient.get(c, ())
                       if dst in nontriv}) for c in nontriv}
    # Tarjan: classes on cycles = members of cyclic strongly connected parts
    index = {}
    low = {}
    stack = []
    onstack = set()
    sccs = []
    counter = [0]

    def strongconnect(root):
        work = [(root, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                onstack.add(node)
            recurse = False
            for d in succ[node][pi:]:
                pi += 1
                if d not in index:
                    work[-1] = (node, pi)
                    work.append((d, 0))
                    recurse = True
                    break
                if d in onstack:
                    low[node] = min(low[node], index[d])
            if recurse:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    for c in sorted(nontriv):
        if c not in index:
            strongconnect(c)
    problems = []
    directed = set()
    cycles = []
    for comp in sccs:
        cyclic = len(comp) > 1 or comp[0] in succ[comp[0]]
        if not cyclic:
            continue
        directed.update(comp)
        # a bounded-type cycle is simple: one in-component successor each
        cyc = [min(comp)]
        while True:
            steps = [d for d in succ[cyc[-1]] if d in comp]
            if len(steps) != 1:
                problems.append("cyclic component is not a simple cycle: "
                                "not bounded type")
                break
            if steps[0] == cyc[0]:
                break
            cyc.append(steps[0])
        cycles.append(cyc)
    finitary = nontriv - directed
    # disjointness and no cross-cycle paths
    for i, c1 in enumerate(cycles):
        for c2 in cycles[i + 1:]:
            if set(c1) & set(c2):
                problems.append("cycles share a state: not bounded type")
            reach = set()
            stack = list(c1)
            while stack:
                x = stack.pop()
                for d in succ[x]:
                    if d not in reach:
                        reach.add(d)
                        stack.append(d)
            if reach & set(c2):
                problems.append("path between distinct cycles: not bounded type")
    # periodic boundary points: input word around each cycle
    points = []
    for cyc in cycles:
        word_in = []
        word_out = []
        cur = cyc[0]
        for k in range(len(cyc)):
            nxt = cyc[(k + 1) % len(cyc)]
            moves = sorted((e1, e2) for e1, e2, dst in mt.quotient.get(cur, ())
                           if dst == nxt)
            if not moves:
                break
            word_in.append(moves[0][0])
            word_out.append(moves[0][1])
            cur = nxt
        points.append({"cycle": list(cyc), "input_period": tuple(word_in),
                       "output_period": tuple(word_out)})
    # boundary points the automaton determines: the eventually periodic
    # input path of each directed cycle (preperiod = entry from level 0)
    roots = sorted(c for c in mt.classes
                   if any(s.level == 0 for s in mt.classes[c]))
    entry = {c: ((), c) for c in roots}  # class -> (letters from a root, via)
    frontier = list(roots)
    while frontier:
        nxt = []
        for c in frontier:
            pre, _ = entry[c]
            for e1, e2, dst in mt.quotient.get(c, ()):
                if dst not in entry:
                    entry[dst] = (pre + (e1,), c)
                    nxt.append(dst)
        frontier = nxt
    bpoints = []
    for p in points:
        cyc, word_in = p["cycle"], p["input_period"]
        if not word_in:
            continue
        best = None
        for k, c in enumerate(cyc):
            if c not in entry:
                continue
            pre = entry[c][0]
            if best is None or len(pre) < len(best[0]):
                best = (pre, word_in[k:] + word_in[:k])
        if best is None:
            problems.append("directed cycle unreachable from level 0")
            continue
        bpoints.append(InfPath(best[0], best[1]).normalized())
    seen_pts = []
    for ip in sorted(bpoints, key=lambda x: (x.preperiod, x.period)):
        if ip not in seen_pts:
            seen_pts.append(ip)
    # sanity: every finitary class reaches the switch side
    for c in finitary:
        if not any(True for _ in mt.quotient.get(c, ())):
            problems.append(f"finitary class {mt.class_name(c)} has no "
                            "outgoing behavior")
    return {"finitary": sorted(finitary), "directed": sorted(directed),
            "cycles": cycles, "periodic_points": points,
            "boundary_points": seen_pts, "problems": problems}


# ---------------------------------------------------------------------------
# stationarity of the boundary/connecting structure


@dataclass(frozen=True)
class Tail:
    """Right-infinite eventually periodic family of points, deepest first."""

    deep: tuple
    period: tuple

    def text(self):
        per = "".join(self.period)
        pre = "".join(self.deep)
        return f"{pre}({per})^w" if pre else f"({per})^w"

    def at_level(self, n):
        """The level-n point of the family (shallow-first tuple)."""
        need = n - len(self.deep)
        if need < 0:
            raise TransducerError("level shorter than the fixed deep part")
        word = []
        while len(word) < need:
            word.extend(self.period)
        shallowpart = tuple(reversed(word[:need]))  # period runs shallow-ward
        return shallowpart + tuple(reversed(self.deep))


def _family_tail(seq, max_period=6):
    """Detect preperiod/period of a deepest-first word within the window."""
    n = len(seq)
    for p in range(1, max_period + 1):
        for k in range(0, n - 2 * p + 1):
            if all(seq[i] == seq[i + p] for i in range(k, n - p)):
                return Tail(tuple(seq[:k]), tuple(seq[k:k + p]))
    return None


def _label_bijection(universe, constraints, labels=None):
    """A bijection rho on `universe` with rho(A) = B for each (A, B) pair.

    Identity is preferred.  With a label set given, rho must commute with
    inversion.  Returns a dict or None.
    """
    for a, b in constraints:
        if len(a) != len(b):
            return None
    if all(set(a) == set(b) for a, b in constraints):
        return {l: l for l in universe}
    cand = {l: set(universe) for l in universe}
    for a, b in constraints:
        sa, sb = set(a), set(b)
        for l in universe:
            cand[l] &= sb if l in sa else set(universe) - sb
    order = sorted(universe, key=lambda l: len(cand[l]))

    def assign(i, rho, used):
        if i == len(order):
            return dict(rho)
        l = order[i]
        if l in rho:
            return assign(i + 1, rho, used)
        for m in sorted(cand[l] - used):
            added = [(l, m)]
            if labels is not None:
                li, mi = labels.inverse(l), labels.inverse(m)
                if li in cand and li != l:
                    if rho.get(li, mi) != mi or mi in used or mi == m:
                        continue
                    if li not in rho and mi not in cand[li]:
                        continue
                    if li not in rho:
                        added.append((li, mi))
            for k, v in added:
                rho[k] = v
                used.add(v)
            got = assign(i + 1, rho, used)
            if got is not None:
                return got
            for k, v in added:
                rho.pop(k)
                used.discard(v)
        return None

    return assign(0, {}, set())


def check_stationary(tiles, diagram, levels, max_period=4, labels=None):
    """Shift-compatibility of boundary and connecting points over `levels`.

    The shift drops the shallowest edge.  Point sets must map bijectively
    level to level.  Stationary means one label bijection carries each
    level's dangling data onto the next level's (identity included); the
    exact repetition period of the raw labeled data is reported separately.
    Returns the relabeling, the detected period, the limit tails, and a
    witness on failure.
    """
    tower = _as_tower(tiles)
    lv = sorted(levels)
    bnd = {}
    con = {}
    for n in lv:
        b = {}
        c = {}
        for v, t in tower[n].items():
            for p, labs in t.dangling.items():
                b[p] = tuple(sorted(labs))
            for cn in t.connectors:
                c.setdefault(cn.point1, set()).add(cn.label)
                c.setdefault(cn.point2, set()).add(cn.label)
        bnd[n] = b
        con[n] = {p: tuple(sorted(s)) for p, s in c.items()}
    result = {"levels": (lv[0], lv[-1]), "boundary_sizes": {},
              "witness": None, "stationary": False, "relabeling": None,
              "period": None, "boundary_tails": [], "connecting_tails": []}
    for n in lv:
        result["boundary_sizes"][n] = len(bnd[n])
    # point-set bijections under the shift
    for n in lv[1:]:
        shifted = {p[1:] for p in bnd[n]}
        if shifted != set(bnd[n - 1]) or len(shifted) != len(bnd[n]):
            result["witness"] = (n, "boundary", sorted(map(path_text, shifted)))
            return result
        shiftedc = {p[1:] for p in con[n] if len(p) > 1}
        if n - 1 in con and not shiftedc <= set(con[n - 1]) | set(bnd[n - 1]):
            bad = sorted(map(path_text, shiftedc - set(con[n - 1])
                             - set(bnd[n - 1])))
            result["witness"] = (n, "connecting", bad)
            return result
    # stationary up to relabeling: one bijection rho on the dangling labels
    # with rho(labels at shift(q)) = labels at q for every step
    universe = sorted({l for n in lv for labs in bnd[n].values()
                       for l in labs})
    constraints = []
    for n in lv[1:]:
        for q, labs in bnd[n].items():
            constraints.append((bnd[n - 1][q[1:]], labs))
    rho = _label_bijection(universe, constraints, labels)
    if rho is not None:
        result["stationary"] = True
        if any(rho[l] != l for l in universe):
            result["relabeling"] = rho
    # exact labeled period: raw dangling labels repeat after p shifts
    period = None
    for p in range(1, max_period + 1):
        ok = True
        for n in lv:
            if n + p > lv[-1]:
                break
            shifted = {q[p:]: labs for q, labs in bnd[n + p].items()}
            if bnd[n] != shifted:
                ok = False
                break
        if ok:
            period = p
            break
    result["period"] = period
    if period is None:
        return result
    # tails: deepest-first words of each shift family
    top = lv[-1]
    for p in sorted(bnd[top]):
        tail = _family_tail(tuple(reversed(p)))
        if tail is not None:
            result["boundary_tails"].append(tail)
    for p in sorted(con[top]):
        tail = _family_tail(tuple(reversed(p)))
        if tail is not None and tail not in result["connecting_tails"]:
            result["connecting_tails"].append(tail)
    return result


# ---------------------------------------------------------------------------
# nucleus and the contraction audit (wreath models)


class BudgetExceeded(RuntimeError):
    pass


class NucleusSet:
    def __init__(self, elements, k, group):
        self.elements = elements  # tuple of reduced words, () = identity
        self.k = k                # word -> contraction depth (0 here)
        self.group = group

    @property
    def max_length(self):
        return max((len(w) for w in self.elements), default=0)

    def __len__(self):
        return len(self.elements)

    def contains(self, word):
        return any(self.group.equal(word, w) for w in self.elements)


def compute_nucleus(group, budget=10_000):
    """Minimal section-closed set of limit sections of pairwise products.

    An element belongs iff it occurs as a depth-k section of a product of
    two retained elements for arbitrarily large k.  Computed by iterating
    the depth-1 section map on the set of pairwise products until the set
    sequence cycles, taking the union over one full cycle, and repeating
    with the new core until it is a fixpoint.  Exceeding `budget` distinct
    elements raises BudgetExceeded; nothing is claimed about contraction in
    that case.
    """
    elems = []
    buckets = {}  # portrait fingerprint -> list of element indices

    def portrait(word, depth=6):
        perm = group.word_perm(word)
        key = tuple(perm[x] for x in group.alphabet)
        if depth == 0:
            return key
        return (key, tuple(portrait(group.section_word(word, x), depth - 1)
                           for x in group.alphabet))

    def canon(word):
        w = group.free_reduce(word)
        if not w:
            w = ()
        fp = portrait(w)
        for i in buckets.get(fp, ()):
            if elems[i] == w or group.equal(elems[i], w):
                return i, False
        if group.is_identity(w):
            w = ()
            fp0 = portrait(w)
            for i in buckets.get(fp0, ()):
                if elems[i] == ():
                    return i, False
            fp = fp0
        elems.append(w)
        buckets.setdefault(fp, []).append(len(elems) - 1)
        return len(elems) - 1, True

    sec1 = {}

    def sections_of(i):
        if i not in sec1:
            out = set()
            for x in group.alphabet:
                m, _ = canon(group.section_word(elems[i], x))
                out.add(m)
            sec1[i] = out
        return sec1[i]

    ident = canon(())[0]
    core = {ident}
    for g in group.generators:
        core.add(canon((g,))[0])
        core.add(canon((group.inv[g],))[0])
    # Outer loop: the nucleus is the limit set of depth-k sections of
    # pairwise products of the current core.  Iterating the section map on
    # the product set walks depth by depth; the set sequence over a finite
    # universe must cycle, and the union over one full cycle is the limit.
    # Transient shallow sections are never multiplied, so lengths stay
    # bounded by twice the core length.
    for _ in range(30):
        if len(elems) > budget:
            raise BudgetExceeded(f"nucleus closure passed {budget} elements")
        products = set()
        for i in core:
            for j in core:
                products.add(canon(elems[i] + elems[j])[0])
        occ = frozenset(products)
        seen = {}
        chain = []
        limit = None
        while occ not in seen:
            seen[occ] = len(chain)
            chain.append(occ)
            occ = frozenset(m for e in occ for m in sections_of(e))
            if len(elems) > budget:
                raise BudgetExceeded(
                    f"nucleus closure passed {budget} elements")
        start = seen[occ]
        limit = set()
        for part in chain[start:]:
            limit |= part
        if limit == core:
            break
        core = limit
    else:
        raise BudgetExceeded("nucleus iteration did not stabilize")
    kept_idx = sorted(core, key=lambda i: (len(elems[i]), elems[i]))
    # the limit is section-closed: its elements keep recurring
    for i in kept_idx:
        if not sections_of(i) <= core:
            raise TransducerError(
                f"nucleus candidate not section-closed at {elems[i]}")
    # k(g): depth by which every section of g*h, h in the set, is back in
    # the set.  Section-closedness makes containment persist once reached.
    cap = 4 * len(core) + 8
    kmap = {}
    for i in kept_idx:
        worst = 0
        for j in kept_idx:
            layer = {canon(elems[i] + elems[j])[0]}
            d = 0
            while not layer <= core:
                layer = {m for e in layer for m in sections_of(e)}
                d += 1
                if d > cap:
                    raise TransducerError(
                        "pair product sections failed to re-enter the set")
            worst = max(worst, d)
        kmap[elems[i]] = worst
    kept = tuple(elems[i] for i in kept_idx)
    return NucleusSet(kept, kmap, group)


def nucleus_boundary_points(nucleus: NucleusSet):
    """Boundary points read off the nucleus Moore diagram.

    Nontrivial elements with their nontrivial depth-1 sections form a
    digraph; each cycle determines one eventually periodic input path.
    """
    group = nucleus.group
    elems = [w for w in nucleus.elements if w != ()]

    def find(word):
        red = group.free_reduce(word)
        if not red or group.is_identity(red):
            return None
        for i, w in enumerate(elems):
            if w == red or group.equal(w, red):
                return i
        return None

    succ = {}
    for i, w in enumerate(elems):
        succ[i] = {}
        for x in group.alphabet:
            j = find(group.section_word(w, x))
            if j is not None:
                succ[i][x] = j
    points = []
    done = set()
    for start in succ:
        if start in done:
            continue
        # shortest cycle through `start`, if any: BFS back to start
        best = None
        queue = [(start, (), ())]
        seen = set()
        while queue and best is None:
            cur, nodes, letters = queue.pop(0)
            for x, nxt in sorted(succ[cur].items()):
                if nxt == start:
                    best = (nodes + (cur,), letters + (x,))
                    break
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append((nxt, nodes + (cur,), letters + (x,)))
        if best is not None:
            done.update(best[0])
            points.append(InfPath((), best[1]).normalized())
    out = []
    for ip in sorted(points, key=lambda p: (p.preperiod, p.period)):
        if ip not in out:
            out.append(ip)
    return out


def contraction_audit(group, nucleus: NucleusSet, words, depth):
    """Check every level-`depth` section length against l(g)/2 + M."""
    m = nucleus.max_length
    report = {"depth": depth, "bound_constant": m, "checked": 0,
              "violations": [], "max_ratio": 0.0}

    def paths(k):
        if k == 0:
            yield ()
            return
        for p in paths(k - 1):
            for x in group.alphabet:
                yield p + (x,)

    for w in words:
        w = group.free_reduce(w)
        bound = len(w) / 2 + m
        for p in paths(depth):
            s = group.free_reduce(group.section_along(w, p))
            report["checked"] += 1
            if len(w):
                report["max_ratio"] = max(report["max_ratio"],
                                          len(s) / max(bound, 1e-9))
            if len(s) > bound:
                report["violations"].append(
                    {"word": w, "path": p, "section_length": len(s),
                     "bound": bound})
    return report
