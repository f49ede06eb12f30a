"""Pure-Python pivot kernel.

The compiled twin lives in _pivot_cy.pyx; both implement the same
elimination step on a list-of-lists tableau of exact rationals.  Kept
free of any solver knowledge so the two stay interchangeable.
"""

KERNEL = "pure"


def eliminate(rows, r, c):
    """Pivot on (rows[r], column c): scale the pivot row to a unit pivot,
    then clear column c from every other row.  Mutates rows in place.
    Zero entries are skipped; exact arithmetic guarantees the cleared
    column is exactly zero afterwards."""
    prow = rows[r]
    piv = prow[c]
    if piv != 1:
        inv = 1 / piv
        for k, val in enumerate(prow):
            if val:
                prow[k] = val * inv
    nz = [k for k, val in enumerate(prow) if val]
    for idx, row in enumerate(rows):
        if idx == r:
            continue
        f = row[c]
        if f:
            if f == 1:
                for k in nz:
                    row[k] = row[k] - prow[k]
            else:
                for k in nz:
                    row[k] = row[k] - f * prow[k]
