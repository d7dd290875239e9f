import pytest

from artifact.diagram import BratteliDiagram, Edge, path_text
from artifact.tiles import (
    BoundaryRule,
    ConnectorRule,
    InflationRule,
    LabelSet,
    LevelRule,
    Tile,
    TileError,
    build_group_tiles,
    build_rule_tiles,
    check_labeling,
    exact_diameter,
    find_embeddings,
    labeling_violations,
    tile_metrics,
)
from artifact.wreath import SelfSimilar


# ---------------------------------------------------------------------------
# shared structures


def binary_loop():
    return BratteliDiagram(("v",), (Edge("0", "v", "v"), Edge("1", "v", "v")))


def ternary_loop():
    return BratteliDiagram(("v",), (Edge("0", "v", "v"), Edge("1", "v", "v"),
                                    Edge("2", "v", "v")))


def odometer():
    return SelfSimilar("01", {"a": ({"0": "1", "1": "0"}, {"1": ("a",)})})


def k110():
    g = SelfSimilar(
        "01",
        {
            "a": ({"0": "1", "1": "0"}, {}),
            "b": ({}, {"1": ("a",)}),
            "c": ({}, {"0": ("c",), "1": ("b",)}),
        },
    )
    g.involution_fold()
    return g


def k110_fragmented():
    g = SelfSimilar(
        "01",
        {
            "a": ({"0": "1", "1": "0"}, {}),
            "b": ({}, {"1": ("a",)}),
            "c0": ({}, {"0": ("c1",), "1": ("b",)}),
            "c1": ({}, {"0": ("c2",), "1": ("b",)}),
            "c2": ({}, {"0": ("c0",)}),
        },
    )
    g.involution_fold()
    return g


def fabrykowski_gupta():
    return SelfSimilar(
        "012",
        {
            "a": ({"0": "1", "1": "2", "2": "0"}, {}),
            "b": ({}, {"0": ("a",), "2": ("b",)}),
        },
    )


def fibonacci_diagram():
    return BratteliDiagram(("v1", "v2"),
        (Edge("e", "v1", "v1"), Edge("e1", "v1", "v2"), Edge("e2", "v2", "v1")))


def fibonacci_setup():
    d = fibonacci_diagram()
    labels = LabelSet.free(["a"])
    t1_1 = Tile(1, "v1", [("e",), ("e2",)], [(("e",), "a", ("e2",))],
                {("e",): ("a^-1",), ("e2",): ("a",)},
                {"mu": ("e",), "lambda": ("e2",)}, labels)
    t2_1 = Tile(1, "v2", [("e1",)], [], {("e1",): ("a",)},
                {"sigma": ("e1",)}, labels)
    t1_2 = Tile(2, "v1", [("e", "e"), ("e2", "e"), ("e1", "e2")],
                [(("e", "e"), "a", ("e2", "e")), (("e2", "e"), "a", ("e1", "e2"))],
                {("e", "e"): ("a^-1",), ("e1", "e2"): ("a",)},
                {"mu": ("e", "e"), "sigma": ("e1", "e2")}, labels)
    t2_2 = Tile(2, "v2", [("e", "e1"), ("e2", "e1")],
                [(("e", "e1"), "a", ("e2", "e1"))],
                {("e", "e1"): ("a^-1",), ("e2", "e1"): ("a",)},
                {"mue1": ("e", "e1"), "lambda": ("e2", "e1")}, labels)
    odd = LevelRule(
        copies={"v1": ("e", "e2"), "v2": ("e1",)},
        connectors=(ConnectorRule("v1", ("e", "sigma"), ("e2", "mue1"), ("a",)),),
        boundary=(
            BoundaryRule("v1", "mu", ("e", "mu"), ("a^-1",)),
            BoundaryRule("v1", "lambda", ("e2", "lambda"), ("a",)),
            BoundaryRule("v2", "mue1", ("e1", "mu"), ("a^-1",)),
            BoundaryRule("v2", "sigma", ("e1", "sigma"), ("a",)),
        ))
    even = LevelRule(
        copies={"v1": ("e", "e2"), "v2": ("e1",)},
        connectors=(ConnectorRule("v1", ("e", "lambda"), ("e2", "mue1"), ("a",)),),
        boundary=(
            BoundaryRule("v1", "mu", ("e", "mu"), ("a^-1",)),
            BoundaryRule("v1", "sigma", ("e2", "sigma"), ("a",)),
            BoundaryRule("v2", "mue1", ("e1", "mu"), ("a^-1",)),
            BoundaryRule("v2", "lambda", ("e1", "lambda"), ("a",)),
        ))
    rule = InflationRule(modulus=2, per_level={1: odd, 0: even})
    base = {1: {"v1": t1_1, "v2": t2_1}, 2: {"v1": t1_2, "v2": t2_2}}
    return d, labels, base, rule


def penrose_diagram():
    return BratteliDiagram(("v1", "v2"),
        (Edge("a1", "v1", "v1"), Edge("a2", "v1", "v2"), Edge("c1", "v2", "v1"),
         Edge("b", "v2", "v2"), Edge("c2", "v2", "v2")))


def penrose_setup():
    d = penrose_diagram()
    labels = LabelSet.self_inverse(["L", "M", "S"])
    t1 = Tile(1, "v1", [("a1",), ("c1",)], [(("a1",), "S", ("c1",))],
              {("a1",): ("L",), ("c1",): ("L",)},
              {"lambda1": ("c1",), "sigma1": ("a1",)}, labels)
    t2 = Tile(1, "v2", [("a2",), ("b",), ("c2",)],
              [(("a2",), "S", ("c2",)), (("b",), "M", ("c2",))],
              {("a2",): ("L",), ("b",): ("L",), ("c2",): ("L",)},
              {"lambda2": ("c2",), "sigma2": ("b",), "mu2": ("a2",)}, labels)
    rule = InflationRule(modulus=1, per_level={0: LevelRule(
        copies={"v1": ("a1", "c1"), "v2": ("a2", "b", "c2")},
        connectors=(
            ConnectorRule("v1", ("a1", "sigma1"), ("c1", "sigma2"), ("L",)),
            ConnectorRule("v2", ("a2", "sigma1"), ("c2", "sigma2"), ("L",)),
            ConnectorRule("v2", ("b", "mu2"), ("c2", "mu2"), ("L",)),
        ),
        boundary=(
            BoundaryRule("v1", "lambda1", ("c1", "lambda2"), ("L",)),
            BoundaryRule("v1", "sigma1", ("a1", "lambda1"), ("L",)),
            BoundaryRule("v2", "lambda2", ("c2", "lambda2"), ("L",)),
            BoundaryRule("v2", "sigma2", ("b", "lambda2"), ("L",)),
            BoundaryRule("v2", "mu2", ("b", "sigma2"), ("L",)),
        ))})
    return d, labels, {1: {"v1": t1, "v2": t2}}, rule


FIB = [1, 1]
while len(FIB) < 40:
    FIB.append(FIB[-1] + FIB[-2])


# ---------------------------------------------------------------------------
# label sets and labeling checks


def test_label_set_free_and_self_inverse():
    free = LabelSet.free(["a", "b"])
    assert free.inverse("a") == "a^-1" and free.inverse("a^-1") == "a"
    assert not free.is_self_inverse("a")
    assert set(free) == {"a", "a^-1", "b", "b^-1"}
    inv = LabelSet.self_inverse(["L", "M"])
    assert inv.inverse("L") == "L" and inv.is_self_inverse("M")
    assert set(inv) == {"L", "M"}


def test_label_set_rejects_non_involution():
    with pytest.raises(Exception):
        LabelSet({"x": "y", "y": "z", "z": "x"})


def test_labeling_violations_flags_double_edge():
    labels = LabelSet.self_inverse(["L"])
    bad = labeling_violations(
        ["u", "v", "w"], [("u", "L", "v"), ("u", "L", "w")], {}, labels)
    assert bad and "2 outgoing" in bad[0]


def test_dangling_occupies_a_slot():
    labels = LabelSet.self_inverse(["L"])
    # an L edge plus an L dangling at the same node is a double slot
    bad = labeling_violations(["u", "v"], [("u", "L", "v")], {"u": ("L",)}, labels)
    assert bad
    ok = labeling_violations(["u", "v"], [("u", "L", "v")], {}, labels)
    assert not ok


def test_check_labeling_grades():
    labels = LabelSet.self_inverse(["L"])
    perfect = Tile(1, "v", [("0",), ("1",)], [(("0",), "L", ("1",))], {}, {}, labels)
    assert check_labeling(perfect)[0] == "perfect"
    well = Tile(1, "v", [("0",)], [], {("0",): ("L",)}, {}, labels)
    assert check_labeling(well)[0] == "well"


# ---------------------------------------------------------------------------
# diameters


def brute_diameter(tile):
    best = 0
    for u in tile.nodes:
        best = max(best, max(tile.distances_from(u).values()))
    return best


def test_exact_diameter_matches_brute_force():
    d, labels, base, rule = fibonacci_setup()
    tiles = build_rule_tiles(base, rule, 7, diagram=d, labels=labels)
    pd_, pl, pbase, prule = penrose_setup()
    ptiles = build_rule_tiles(pbase, prule, 5, diagram=pd_, labels=pl)
    fg_tiles = build_group_tiles(fabrykowski_gupta(), ("a", "b"),
                                 LabelSet.free(["a", "b"]), ternary_loop(),
                                 "v", 3)
    pool = [tiles[n][v] for n in range(1, 8) for v in ("v1", "v2")]
    pool += [ptiles[n][v] for n in range(1, 6) for v in ("v1", "v2")]
    pool += [fg_tiles[n] for n in range(1, 4)]
    for t in pool:
        assert exact_diameter(t) == brute_diameter(t)


# ---------------------------------------------------------------------------
# group route


def test_adding_machine_tiles_are_chains():
    g = odometer()
    labels = LabelSet.free(["a"])
    tiles = build_group_tiles(g, ("a",), labels, binary_loop(), "v", 6)
    for n in range(1, 7):
        t = tiles[n]
        assert t.size == 2 ** n
        assert len(t.arrows) == t.size - 1
        m = tile_metrics(t)
        assert m["diameter"] == t.size - 1
        # a sticks out at 1^n, a^-1 at 0^n
        assert t.dangling == {("0",) * n: ("a^-1",), ("1",) * n: ("a",)}
        assert [(c.label, c.level) for c in t.connectors] == [("a", n)]


def test_adding_machine_chain_orders_nodes_by_value():
    g = odometer()
    labels = LabelSet.free(["a"])
    t = build_group_tiles(g, ("a",), labels, binary_loop(), "v", 4)[4]
    # following a from 0000 walks the binary odometer through all values
    node = ("0",) * 4
    seen = [node]
    while node in t.adj and "a" in t.adj[node]:
        node = t.adj[node]["a"]
        seen.append(node)
    assert len(seen) == 16
    assert seen[-1] == ("1",) * 4


def test_k110_connector_schedule_and_boundary():
    g = k110()
    labels = LabelSet.self_inverse(["a", "b", "c"])

    def names(n):
        out = {"gamma": ("0",) * n, "beta": ("0",) * (n - 1) + ("1",)}
        if n >= 2:
            out["alpha"] = ("0",) * (n - 2) + ("1", "1")
        return out

    tiles = build_group_tiles(g, ("a", "b", "c"), labels, binary_loop(), "v",
                              8, boundary_names=names)
    sched = [sorted({c.label for c in tiles[n].connectors}) for n in range(1, 9)]
    assert sched == [["a"], ["b"], ["c"], ["c"], ["c"], ["c"], ["c"], ["c"]]
    for n in range(3, 9):
        t = tiles[n]
        assert t.dangling[t.boundary["gamma"]] == ("c",)
        assert t.dangling[t.boundary["beta"]] == ("c",)
        assert t.dangling[t.boundary["alpha"]] == ("c",)
        assert path_text(t.boundary["beta"]) == "1" + "0" * (n - 1)
        assert path_text(t.boundary["alpha"]) == "11" + "0" * (n - 2)


def test_k110_fragmented_schedule():
    g = k110_fragmented()
    labels = LabelSet.self_inverse(["a", "b", "c0", "c1", "c2"])
    tiles = build_group_tiles(g, ("a", "b", "c0", "c1", "c2"), labels,
                              binary_loop(), "v", 10)
    sched = [sorted({c.label for c in tiles[n].connectors}) for n in range(1, 11)]
    assert sched == [
        ["a"], ["b"],
        ["c0", "c1"], ["c0", "c2"], ["c1", "c2"],
        ["c0", "c1"], ["c0", "c2"], ["c1", "c2"],
        ["c0", "c1"], ["c0", "c2"],
    ]


def test_k110_fragmented_dangling_residues():
    g = k110_fragmented()
    labels = LabelSet.self_inverse(["a", "b", "c0", "c1", "c2"])
    tiles = build_group_tiles(g, ("a", "b", "c0", "c1", "c2"), labels,
                              binary_loop(), "v", 7)
    # which fragments stick out at gamma / beta / alpha cycles with level mod 3
    piece_beta = {0: ("c0", "c1"), 1: ("c0", "c2"), 2: ("c1", "c2")}
    for n in range(3, 8):
        t = tiles[n]
        gamma = ("0",) * n
        beta = ("0",) * (n - 1) + ("1",)
        alpha = ("0",) * (n - 2) + ("1", "1")
        assert t.dangling[gamma] == ("c0", "c1", "c2")
        assert t.dangling[beta] == piece_beta[(n - 1) % 3]
        assert t.dangling[alpha] == piece_beta[(n - 2) % 3]


def test_fg_tiles_triangle_connectors():
    g = fabrykowski_gupta()
    labels = LabelSet.free(["a", "b"])
    tiles = build_group_tiles(g, ("a", "b"), labels, ternary_loop(), "v", 5)
    for n in range(1, 6):
        t = tiles[n]
        assert t.size == 3 ** n
        assert len(t.connectors) == 3  # one directed triangle appears per level
        lab = {c.label for c in t.connectors}
        assert lab == ({"a"} if n == 1 else {"b"})
        # b and b^-1 stick out at 2^n and at 2^(n-1) 0
        xi = ("2",) * n
        eta = ("2",) * (n - 1) + ("0",)
        assert t.dangling[xi] == ("b", "b^-1")
        assert t.dangling[eta] == ("b", "b^-1")
        assert set(t.dangling) == {xi, eta}


def test_group_route_boundary_name_mismatch_raises():
    g = odometer()
    labels = LabelSet.free(["a"])
    with pytest.raises(TileError):
        build_group_tiles(g, ("a",), labels, binary_loop(), "v", 2,
                          boundary_names=lambda n: {"only": ("0",) * n})


# ---------------------------------------------------------------------------
# rule route


def test_fibonacci_tiles_are_linear_with_alternating_boundary():
    d, labels, base, rule = fibonacci_setup()
    tiles = build_rule_tiles(base, rule, 9, diagram=d, labels=labels)
    for n in range(1, 10):
        t1, t2 = tiles[n]["v1"], tiles[n]["v2"]
        assert (t1.size, t2.size) == (FIB[n + 1], FIB[n])
        assert len(t1.arrows) == t1.size - 1
        assert exact_diameter(t1) == t1.size - 1  # a path graph
        assert path_text(t1.boundary["mu"]) == "e" * n
        other = "lambda" if n % 2 else "sigma"
        assert set(t1.boundary) == {"mu", other}
        if n == 1:
            assert set(t2.boundary) == {"sigma"}
        else:
            assert set(t2.boundary) == {"mue1", "sigma" if n % 2 else "lambda"}
    # boundary words alternate e2 and e1 starting from the deep end
    assert path_text(tiles[5]["v1"].boundary["lambda"]) == "e2e1e2e1e2"
    assert path_text(tiles[6]["v1"].boundary["sigma"]) == "e2e1e2e1e2e1"


def test_fibonacci_connector_joins_the_two_copies():
    d, labels, base, rule = fibonacci_setup()
    tiles = build_rule_tiles(base, rule, 6, diagram=d, labels=labels)
    for n in range(3, 7):
        t1 = tiles[n]["v1"]
        assert len(t1.connectors) == 1
        c = t1.connectors[0]
        assert c.label == "a" and c.level == n
        assert c.point1[-1] == "e" and c.point2[-1] == "e2"
    assert not tiles[4]["v2"].connectors  # single-copy tiles get no connector


def test_penrose_sizes_and_boundary_formulas():
    d, labels, base, rule = penrose_setup()
    tiles = build_rule_tiles(base, rule, 9, diagram=d, labels=labels)
    for n in range(1, 10):
        t1, t2 = tiles[n]["v1"], tiles[n]["v2"]
        assert (t1.size, t2.size) == (FIB[2 * n], FIB[2 * n + 1])
        assert len(t1.arrows) == t1.size - 1  # loops only close after promotion
        assert len(t2.arrows) == t2.size - 1
        assert check_labeling(t1)[0] == "well"
        assert check_labeling(t2)[0] == "well"
    for n in range(2, 10):
        t1, t2 = tiles[n]["v1"], tiles[n]["v2"]
        assert path_text(t1.boundary["lambda1"]) == "c1" + "c2" * (n - 1)
        assert path_text(t1.boundary["sigma1"]) == "a1c1" + "c2" * (n - 2)
        assert path_text(t2.boundary["lambda2"]) == "c2" * n
        assert path_text(t2.boundary["sigma2"]) == "b" + "c2" * (n - 1)
        assert path_text(t2.boundary["mu2"]) == "bb" + "c2" * (n - 2)


def test_penrose_boundary_distance_recursion():
    d, labels, base, rule = penrose_setup()
    tiles = build_rule_tiles(base, rule, 9, diagram=d, labels=labels)
    ls = {}
    lm = {}
    for n in range(1, 10):
        t2 = tiles[n]["v2"]
        b = t2.boundary
        ls[n] = t2.distance(b["lambda2"], b["sigma2"])
        lm[n] = t2.distance(b["lambda2"], b["mu2"])
    assert [ls[n] for n in range(1, 10)] == [1, 3, 9, 13, 21, 41, 69, 113, 197]
    assert [lm[n] for n in range(1, 10)] == [1, 4, 6, 10, 20, 34, 56, 98, 168]
    for n in range(2, 10):
        assert ls[n] == 2 * lm[n - 1] + 1


def test_penrose_fragmented_connector_schedule():
    d = penrose_diagram()
    labels = LabelSet.self_inverse(["L0", "L1", "L2", "M", "S"])
    piece = {0: ("L0", "L1"), 1: ("L0", "L2"), 2: ("L1", "L2")}
    t1 = Tile(1, "v1", [("a1",), ("c1",)], [(("a1",), "S", ("c1",))],
              {("a1",): piece[0], ("c1",): piece[1]},
              {"lambda1": ("c1",), "sigma1": ("a1",)}, labels)
    t2 = Tile(1, "v2", [("a2",), ("b",), ("c2",)],
              [(("a2",), "S", ("c2",)), (("b",), "M", ("c2",))],
              {("a2",): piece[2], ("b",): piece[0], ("c2",): ("L0", "L1", "L2")},
              {"lambda2": ("c2",), "sigma2": ("b",), "mu2": ("a2",)}, labels)
    sig_lab = {0: piece[1], 1: piece[2], 2: piece[0]}
    mu_lab = {0: piece[0], 1: piece[1], 2: piece[2]}
    d_sig = {0: piece[2], 1: piece[0], 2: piece[1]}
    rule = InflationRule(modulus=1, label_modulus=3, per_level={0: LevelRule(
        copies={"v1": ("a1", "c1"), "v2": ("a2", "b", "c2")},
        connectors=(
            ConnectorRule("v1", ("a1", "sigma1"), ("c1", "sigma2"), sig_lab),
            ConnectorRule("v2", ("a2", "sigma1"), ("c2", "sigma2"), sig_lab),
            ConnectorRule("v2", ("b", "mu2"), ("c2", "mu2"), mu_lab),
        ),
        boundary=(
            BoundaryRule("v1", "lambda1", ("c1", "lambda2"), mu_lab),
            BoundaryRule("v1", "sigma1", ("a1", "lambda1"), d_sig),
            BoundaryRule("v2", "lambda2", ("c2", "lambda2"), ("L0", "L1", "L2")),
            BoundaryRule("v2", "sigma2", ("b", "lambda2"), d_sig),
            BoundaryRule("v2", "mu2", ("b", "sigma2"), sig_lab),
        ))})
    tiles = build_rule_tiles({1: {"v1": t1, "v2": t2}}, rule, 8,
                             diagram=d, labels=labels)
    for n in range(2, 9):
        t = tiles[n]["v2"]
        assert check_labeling(t)[0] == "well"
        sig = sorted({c.label for c in t.connectors if c.point1[-1] == "a2"})
        mu = sorted({c.label for c in t.connectors if c.point1[-1] == "b"})
        assert tuple(sig) == piece[(n - 2) % 3]
        assert tuple(mu) == piece[n % 3]


def test_connector_label_must_be_dangling_at_its_parents():
    d, labels, base, rule = penrose_setup()
    lvl = rule.per_level[0]
    bad = InflationRule(modulus=1, per_level={0: LevelRule(
        copies=lvl.copies,
        connectors=(ConnectorRule("v1", ("a1", "sigma1"), ("c1", "sigma2"),
                                  ("M",)),) + lvl.connectors[1:],
        boundary=lvl.boundary)})
    with pytest.raises(TileError, match="not dangling"):
        build_rule_tiles(base, bad, 2, diagram=d, labels=labels)


def test_rule_route_requires_full_path_coverage():
    d, labels, base, rule = penrose_setup()
    lvl = rule.per_level[0]
    partial = InflationRule(modulus=1, per_level={0: LevelRule(
        copies={"v1": ("a1", "c1"), "v2": ("b", "c2")},  # a2 copy missing
        connectors=(lvl.connectors[2],),
        boundary=lvl.boundary)})
    with pytest.raises(TileError):
        build_rule_tiles(base, partial, 3, diagram=d, labels=labels)


# ---------------------------------------------------------------------------
# embeddings


def test_adding_machine_embeddings_tile_the_big_tile():
    g = odometer()
    labels = LabelSet.free(["a"])
    tiles = build_group_tiles(g, ("a",), labels, binary_loop(), "v", 5)
    tower = {n: {"v": tiles[n]} for n in tiles}
    rep = find_embeddings(tower, ("v", 2), ("v", 5), diagram=binary_loop())
    assert rep["count"] == 8
    assert rep["max_gap"] == 0  # copies of the small tile cover everything
    assert rep["sieve_components"] == []


def test_penrose_embeddings_counts_match_path_counts():
    d, labels, base, rule = penrose_setup()
    tiles = build_rule_tiles(base, rule, 6, diagram=d, labels=labels)
    # one occurrence per length-2 path between the vertices
    rep = find_embeddings(tiles, ("v1", 1), ("v1", 3), diagram=d)
    assert rep["count"] == 2  # deep suffixes a1a1 and a2c1
    rep = find_embeddings(tiles, ("v2", 4), ("v2", 6), diagram=d)
    assert rep["count"] == 5  # c1a2, bb, bc2, c2b, c2c2
    assert rep["max_gap"] >= 1
