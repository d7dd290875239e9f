"""Independent incompressibility census used to freeze regression anchors.

Implements the binary and ternary fragmented actions directly from their
defining recursions (no imports from src/). Enumerates reduced words by
length, pruning any word one of whose subwords certifies as a return at a
persistent boundary family, and reports survivor counts per length plus
M_emp = the first length with no survivors.

Semantics mirrored by the library:
  * reduced: no letter followed by its inverse; no two finitary letters
    adjacent; two boundary letters adjacent only if they admit dangling
    points at two different families;
  * return: first and last letter dangle at the family point, middle
    letters either stall (act identically with trivial section), or move
    along an edge with trivial section; crossing a dangling half-edge
    mid-walk disqualifies; the walk must end back at the family point;
    the verdict must hold at the census level and one period deeper.
"""

import sys
from itertools import product

# --- binary model: a swaps, b = (1, a), c_i rotate with a shared b-leg ---

K_PERM = {"a": {"0": "1", "1": "0"}}
K_SECT = {
    "a": {},
    "b": {"1": "a"},
    "c0": {"0": "c1", "1": "b"},
    "c1": {"0": "c2", "1": "b"},
    "c2": {"0": "c0"},
}
K_LETTERS = ["a", "b", "c0", "c1", "c2"]
K_INV = {s: s for s in K_LETTERS}


def k_image(g, p):
    out = []
    for x in p:
        if g is None:
            out.append(x)
            continue
        out.append(K_PERM.get(g, {}).get(x, x))
        g = K_SECT[g].get(x)
    return tuple(out)


def k_section(g, p):
    for x in p:
        if g is None:
            return None
        g = K_SECT[g].get(x)
    return g


# --- ternary model: a 3-cycles, b-letters carried as exponent vectors ---
# vector u acts as: at 0 apply a^{u[0]} to the rest, at 1 fix, at 2 recurse
# with the rotated vector.  Generators are the two base vectors and their
# squares; deeper phases appear only as sections.

ROT3 = {"0": "1", "1": "2", "2": "0"}
ROT3_INV = {v: k for k, v in ROT3.items()}

U1 = (0, 1, 2, 1)
U2 = (1, 1, 1, 0)


def vneg(u):
    return tuple((2 * x) % 3 for x in u)


F_LETTERS = [("a", 1), ("a", 2), ("b", U1), ("b", vneg(U1)), ("b", U2), ("b", vneg(U2))]


def f_inv(s):
    kind, val = s
    if kind == "a":
        return ("a", 3 - val)
    return ("b", vneg(val))


def f_image(g, p):
    out = []
    for x in p:
        if g is None:
            out.append(x)
            continue
        kind, val = g
        if kind == "a":
            y = x
            for _ in range(val):
                y = ROT3[y]
            out.append(y)
            g = None
        else:
            out.append(x)
            if x == "0":
                g = ("a", val[0]) if val[0] else None
            elif x == "1":
                g = None
            else:
                g = ("b", val[1:] + val[:1])
    return tuple(out)


def f_section_iter(g, p):
    for x in p:
        if g is None:
            return None
        kind, val = g
        if kind == "a":
            g = None
        elif x == "0":
            g = ("a", val[0]) if val[0] else None
        elif x == "1":
            g = None
        else:
            g = ("b", val[1:] + val[:1])
    return g


class Model:
    def __init__(self, letters, inv, image, section, finitary, families):
        self.letters = letters
        self.inv = inv
        self.image = image
        self.section = section
        self.finitary = finitary
        # families: list of (point at level n, point at level n + period)
        self.families = families

    def dangling_labels(self, p):
        return {s for s in self.letters if self.section(s, p) is not None}


def certify(model, word, p):
    """Return verdict for word at one family point p (single level)."""
    if len(word) < 2:
        return False
    dang = model.dangling_labels(p)
    if word[0] not in dang or word[-1] not in dang:
        return False
    v = p
    for s in word[1:-1]:
        if model.section(s, v) is not None:
            return False  # would cross a dangling half-edge
        w = model.image(s, v)
        v = w  # stall when w == v is fine
    return v == p


def is_return(model, word):
    for pn, pdeep in model.families:
        if certify(model, word, pn) and certify(model, word, pdeep):
            return True
    return False


def census(model, max_len, verbose=True):
    boundary = {}
    for s in model.letters:
        pts = set()
        for pn, pdeep in model.families:
            if s in model.dangling_labels(pn) and s in model.dangling_labels(pdeep):
                pts.add(pn)
        if pts:
            boundary[s] = pts

    def pair_ok(x, y):
        if y == model.inv[x]:
            return False
        bx, by = x in boundary, y in boundary
        if not bx and not by:
            return False  # two finitary letters never merge into a return
        if bx and by:
            return any(p != q for p in boundary[x] for q in boundary[y])
        return True

    frontier = [(s,) for s in model.letters]
    counts = {1: len(frontier)}
    for length in range(2, max_len + 1):
        nxt = []
        for w in frontier:
            for s in model.letters:
                if not pair_ok(w[-1], s):
                    continue
                w2 = w + (s,)
                if any(is_return(model, w2[i:]) for i in range(length - 1)):
                    continue
                nxt.append(w2)
        counts[length] = len(nxt)
        if verbose:
            print(f"  len {length}: {len(nxt)} survivors")
        if not nxt:
            return counts, length
        frontier = nxt
    return counts, None


def build_k110(n=12, period=3):
    fam = []
    for tail in [(), ("1",), ("1", "1")]:
        pn = ("0",) * (n - len(tail)) + tail
        pd = ("0",) * (n + period - len(tail)) + tail
        fam.append((pn, pd))
    return Model(K_LETTERS, K_INV, k_image, k_section,
                 {"a", "b"}, fam)


def build_fg(n=12, period=4):
    fam = []
    for tail in [(), ("0",)]:
        pn = ("2",) * (n - len(tail)) + tail
        pd = ("2",) * (n + period - len(tail)) + tail
        fam.append((pn, pd))
    inv = {s: f_inv(s) for s in F_LETTERS}
    return Model(F_LETTERS, inv, f_image, f_section_iter,
                 {("a", 1), ("a", 2)}, fam)


if __name__ == "__main__":
    L = int(sys.argv[1]) if len(sys.argv) > 1 else 12
    print("binary fragmented model, level 9 then 12:")
    for n in (9, 12):
        counts, memp = census(build_k110(n=n), L)
        print(f"  n={n}: counts {dict(counts)}  M_emp = {memp}")
    # frozen: {1:5, 2:12, 3:21, 4:36, 5:36, 6:0}, M_emp = 6 at both levels
    print("ternary fragmented model, level 12:")
    counts, memp = census(build_fg(), min(L, 12))
    print(f"  counts {dict(counts)}  M_emp = {memp}")
    # frozen: 6,16,48,128,288,640,1152,2048,3392,5376,8448,12288 and no
    # M_emp: mixed boundary/rotation products have order >= 243 at level 8,
    # so return-free alternations persist to lengths in the hundreds and a
    # budgeted run must report exhaustion rather than a finite M_emp
