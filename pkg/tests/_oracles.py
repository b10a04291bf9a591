"""Independent restatements used as oracles by several test modules."""

from fractions import Fraction


def oracle(n, a, p):
    """Independent restatement of the precedence rules with plain fractions."""
    a, p = Fraction(a), Fraction(p)
    star = Fraction(2 * n, n - 2)
    ta = Fraction(2 * n) / (n - a) if a != n else None
    tas = Fraction(2 * (2 * n - 2 + a)) / (2 * n - 2 - a) if a != 2 * n - 2 else None
    if a == 2:
        return "ExistenceExplicit" if p == star else "Nonexistence"
    if p == star or (ta is not None and ta > 0 and p == ta):
        return "Nonexistence"
    if a < 2:
        if p > star or p < ta:
            return "Nonexistence"
        return "RadialNonexistence" if p <= tas else "ExistenceRadial"
    # alpha > 2
    if p < star:
        return "Nonexistence"
    if a < n and p > ta:
        return "Nonexistence"
    if a >= 2 * n - 2 or p < tas:
        return "ExistenceRadial"
    return "Open"
