"""Wreath recursions: symbols acting on a fixed alphabet with sections.

A symbol is a permutation of the alphabet plus one section word per letter.
Words act left to right: ``(u v)(p)`` moves ``p`` by ``u`` first.  Sections
compose accordingly: ``(uv)|_x = u|_x · v|_{u(x)}``.

Inverses are materialized as derived symbols (name suffixed with ``^-1``)
unless the symbol is an involution, in which case it is its own inverse.

``is_identity`` is exact: a word acts trivially iff every iterated section
of it has the trivial root permutation.  Section words never grow longer
than the word itself here (every declared section is a single symbol or
empty), so the closure is finite and the answer is a decision, not a test
at finite depth.
"""

from __future__ import annotations

from math import gcd


class RecursionError_(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def inverse_name(name):
    return name[:-3] if name.endswith("^-1") else name + "^-1"


class SelfSimilar:
    def __init__(self, alphabet, symbols, generators=None):
        """``symbols``: name -> (perm dict letter->letter, sections dict letter->word tuple)."""
        self.alphabet = tuple(alphabet)
        self.perm = {}
        self.sections = {}
        for name, (perm, secs) in symbols.items():
            p = dict(perm)
            for x in self.alphabet:
                p.setdefault(x, x)
            self.perm[name] = p
            self.sections[name] = {x: tuple(secs.get(x, ())) for x in self.alphabet}
        self._close_under_inverses()
        self._validate()
        self.generators = tuple(generators) if generators else tuple(symbols)

    def _close_under_inverses(self):
        pending = list(self.perm)
        while pending:
            name = pending.pop()
            inv = inverse_name(name)
            perm = self.perm[name]
            if inv in self.perm:
                continue
            ip = {perm[x]: x for x in self.alphabet}
            isec = {}
            for x in self.alphabet:
                y = ip[x]
                isec[x] = tuple(inverse_name(s) for s in reversed(self.sections[name][y]))
            self.perm[inv] = ip
            self.sections[inv] = isec
            pending.append(inv)
        self.inv = {name: inverse_name(name) for name in self.perm}

    def _validate(self):
        for name, perm in self.perm.items():
            if sorted(perm) != sorted(self.alphabet) or sorted(perm.values()) != sorted(self.alphabet):
                raise RecursionError_(f"symbol {name!r}: permutation is not a bijection of the alphabet")
            for x, w in self.sections[name].items():
                for s in w:
                    if s not in self.perm:
                        raise RecursionError_(f"symbol {name!r}: section at {x!r} uses undeclared {s!r}")

    def involution_fold(self):
        """Identify g with g^-1 whenever g is an involution (drops the alias)."""
        for name in list(self.perm):
            if name.endswith("^-1"):
                base = name[:-3]
                if base in self.perm and self.equal((base,), (name,)):
                    for n2 in self.perm:
                        self.sections[n2] = {
                            x: tuple(base if s == name else s for s in w)
                            for x, w in self.sections[n2].items()
                        }
                    del self.perm[name]
                    del self.sections[name]
                    self.inv[base] = base
                    del self.inv[name]
        return self

    # -- word algebra ----------------------------------------------------

    def free_reduce(self, word):
        out = []
        for s in word:
            if out and out[-1] == self.inv[s]:
                out.pop()
            else:
                out.append(s)
        return tuple(out)

    def inverse_word(self, word):
        return tuple(self.inv[s] for s in reversed(word))

    def word_perm(self, word):
        f = {x: x for x in self.alphabet}
        for s in word:
            p = self.perm[s]
            f = {x: p[f[x]] for x in self.alphabet}
        return f

    def section_word(self, word, letter):
        out = []
        y = letter
        for s in word:
            out.extend(self.sections[s][y])
            y = self.perm[s][y]
        return tuple(out)

    def section_along(self, word, path):
        w = tuple(word)
        for x in path:
            w = self.section_word(w, x)
        return w

    def word_apply(self, word, path):
        out = []
        w = list(word)
        for x in path:
            y = x
            nxt = []
            for s in w:
                nxt.extend(self.sections[s][y])
                y = self.perm[s][y]
            out.append(y)
            w = nxt
        return tuple(out)

    # -- decisions -------------------------------------------------------

    def is_identity(self, word, budget=200_000):
        word = self.free_reduce(word)
        seen = set()
        stack = [word]
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            if len(seen) > budget:
                raise BudgetExceeded("section closure exceeded budget")
            perm = self.word_perm(w)
            if any(perm[x] != x for x in self.alphabet):
                return False
            for x in self.alphabet:
                sw = self.free_reduce(self.section_word(w, x))
                if sw and sw not in seen:
                    stack.append(sw)
        return True

    def equal(self, u, v):
        return self.is_identity(tuple(u) + self.inverse_word(v))

    def level_order(self, word, n):
        """Order of the induced permutation on level-n paths."""
        paths = [()]
        for _ in range(n):
            paths = [p + (x,) for p in paths for x in self.alphabet]
        image = {p: self.word_apply(word, p) for p in paths}
        order = 1
        seen = set()
        for p in paths:
            if p in seen:
                continue
            length = 0
            q = p
            while True:
                seen.add(q)
                q = image[q]
                length += 1
                if q == p:
                    break
            order = order * length // gcd(order, length)
        return order

    def element_order(self, word, budget=1000, stable_levels=2, max_level=14,
                      raise_on_budget=False):
        """Least k with word^k = Id, decided exactly; budget overrun gives None.

        Per-level orders are non-decreasing and reach the true order if it is
        finite; once they stabilize, the exact identity check confirms.
        """
        word = self.free_reduce(word)
        if not word:
            return 1
        prev = None
        run = 0
        for n in range(1, max_level + 1):
            o = self.level_order(word, n)
            if o > budget:
                break
            if o == prev:
                run += 1
                if run >= stable_levels and self.is_identity(word * o):
                    return o
            else:
                run = 0
            prev = o
        if raise_on_budget:
            raise BudgetExceeded(f"order of {''.join(word)} not settled within budget")
        return None
