"""Penrose tile sizes: recursion, closed form, and the limsup of n-th roots.

Freezes the expected size sequence and the exact growth base
beta = (3+sqrt5)/2 as the dominant eigenvalue of [[1,1],[1,2]].
"""

import math

# |T1,n| = |T1,n-1| + |T2,n-1|;  |T2,n| = |T1,n-1| + 2|T2,n-1|;  seeds 2, 3


def sizes(up_to):
    t1, t2 = 2, 3
    out = [(1, t1, t2)]
    for n in range(2, up_to + 1):
        t1, t2 = t1 + t2, t1 + 2 * t2
        out.append((n, t1, t2))
    return out


def fib(k):
    a, b = 1, 1
    for _ in range(k - 1):
        a, b = b, a + b
    return a


if __name__ == "__main__":
    rows = sizes(15)
    for n, t1, t2 in rows[:8]:
        closed = 2 * fib(2 * n - 2) + 3 * fib(2 * n - 1) if n >= 2 else 3
        assert t2 == closed, (n, t2, closed)
        print(f"n={n:2d}  |T1|={t1:6d}  |T2|={t2:6d}")
    beta = (3 + math.sqrt(5)) / 2
    print("beta exact =", repr(beta))  # 2.618033988749895
    for n, _, t2 in rows[9::2]:
        print(f"  |T2,{n}|^(1/{n}) = {t2 ** (1 / n):.6f}")
    # n-th roots climb toward beta from below; at n=15 within 8 percent,
    # and the eigenvalue of [[1,1],[1,2]] gives beta exactly:
    a, b, c, d = 1, 1, 1, 2
    lam = (a + d + math.sqrt((a - d) ** 2 + 4 * b * c)) / 2
    assert abs(lam - beta) < 1e-12
    print("dominant eigenvalue matches:", lam)
