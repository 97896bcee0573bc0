"""Brute-force rough set reference: every relation is decided by comparing
record pairs directly, with no grouping or hashing."""


def indiscernible(rows, i, j, cols):
    return all(rows[i][c] == rows[j][c] for c in cols)


def classes_of(rows, cols):
    """Per record position, the set of positions indiscernible from it."""
    n = len(rows)
    return [frozenset(j for j in range(n) if indiscernible(rows, i, j, cols)) for i in range(n)]


def lower(rows, cols, target):
    cls = classes_of(rows, cols)
    return frozenset(i for i in range(len(rows)) if cls[i] <= target)


def upper(rows, cols, target):
    cls = classes_of(rows, cols)
    return frozenset(i for i in range(len(rows)) if cls[i] & target)


def membership(rows, cols, target, i):
    cls = classes_of(rows, cols)[i]
    return len(cls & target) / len(cls)
