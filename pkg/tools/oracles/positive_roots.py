"""High-precision positive roots and growth exponents, frozen as anchors.

Pure Decimal bisection, no imports from src/. Each polynomial below has
exactly one positive real root (one sign change in its coefficients).
"""

from decimal import Decimal, getcontext

getcontext().prec = 50


def poly(coeffs):
    # ascending coefficients c0 + c1 x + c2 x^2 + ...
    def f(x):
        acc = Decimal(0)
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc
    return f


def bisect_root(coeffs, lo="0", hi="10", steps=200):
    f = poly([Decimal(c) for c in coeffs])
    lo, hi = Decimal(lo), Decimal(hi)
    flo = f(lo)
    assert flo != 0 and f(hi) * flo < 0, "needs a sign change on (lo, hi]"
    for _ in range(steps):
        mid = (lo + hi) / 2
        if f(mid) * flo <= 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def ln(x, terms=200):
    # atanh series, fine for x near 1; reduce via sqrt for larger x
    x = Decimal(x)
    shifts = 0
    while abs(x - 1) > Decimal("0.1"):
        x = x.sqrt()
        shifts += 1
    t = (x - 1) / (x + 1)
    acc, p = Decimal(0), t
    for k in range(terms):
        acc += p / (2 * k + 1)
        p *= t * t
    return acc * 2 * (2 ** shifts)


if __name__ == "__main__":
    eta1 = bisect_root([-2, 0, 0, 1, 1, 1])          # x^5 + x^4 + x^3 - 2
    eta2 = bisect_root([-2, 1, 1, 1])                # x^3 + x^2 + x - 2
    eta3 = bisect_root([-3, 0, 0, 4])                # 4x^3 - 3
    print("eta1 =", str(eta1)[:20])   # 0.902815969426947637
    print("eta2 =", str(eta2)[:20])   # 0.810535713766136774
    print("eta3 =", str(eta3)[:20])   # 0.908560296416069829
    cube = (Decimal(3) / 4) ** (Decimal(1) / 3)
    print("eta3 - (3/4)^(1/3) =", float(eta3 - cube))  # < 1e-40

    log2, log3 = ln(2), ln(3)
    beta_p = (3 + Decimal(5).sqrt()) / 2
    table = {
        "binary fragmented  log2/(log2-log eta1)": log2 / (log2 - ln(eta1)),
        "penrose fragmented logB/(logB-log eta1)": ln(beta_p) / (ln(beta_p) - ln(eta1)),
        "ternary fragmented log3/(log3-log eta3)": log3 / (log3 - ln(eta3)),
        "torsion-free bound log2/log(2/eta2)    ": log2 / (log2 - ln(eta2)),
    }
    for name, val in table.items():
        print(name, "=", str(val)[:18])
    # frozen: 0.8714626134783329, 0.903972604735613,
    #         0.9197207891481876, 0.7674288817429359
