"""Independent oracles shared by the test modules: a brute-force vertex
enumerator for tiny LPs, the discrete single-item virtual-value formula,
and an LP probe for the spread of one virtual value across the regular
optimal duals."""

from fractions import Fraction
from itertools import combinations

from auctionlp.auction import build_dual_dslp, profile_key
from auctionlp.lp import DANTZIG, MAX, MIN, OPTIMAL, make_lp, solve


def solve_square(rows, rhs):
    """Gaussian elimination over Fractions; None on a singular system."""
    n = len(rows)
    a = [list(row) + [rhs[i]] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [q * inv for q in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [q - f * p for q, p in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def brute_force_best(lp):
    """Best basic feasible point of {Ax <= b, x >= 0} by enumerating all
    choices of ncols tight constraints.  Returns the objective in the
    LP's own sense, or None when no feasible basic point exists.  Only
    sound on bounded feasible regions, so callers add a box row."""
    n = lp.ncols
    sign = 1 if lp.sense == MAX else -1
    tight = []
    for r, row in enumerate(lp.rows):
        dense = [Fraction(0)] * n
        for j, coef in row:
            dense[j] = coef
        tight.append((dense, lp.b[r]))
    for j in range(n):
        e = [Fraction(0)] * n
        e[j] = Fraction(1)
        tight.append((e, Fraction(0)))
    best = None
    for picks in combinations(range(len(tight)), n):
        point = solve_square(
            [tight[k][0] for k in picks], [tight[k][1] for k in picks]
        )
        if point is None:
            continue
        if any(x < 0 for x in point):
            continue
        if any(lp.row_dot(r, point) > lp.b[r] for r in range(lp.nrows)):
            continue
        obj = sum((lp.c[j] * point[j] for j in range(n)), Fraction(0))
        if best is None or sign * obj > sign * best:
            best = obj
    return best


def myerson_formula(values, masses):
    """The discrete virtual value v_k - (v_{k+1} - v_k)(1 - F(v_k))/f(v_k)
    on mass-bearing points of an ascending single-item support; the top
    point maps to its own value since 1 - F there is zero."""
    assert list(values) == sorted(values)
    cdf = []
    acc = Fraction(0)
    for q in masses:
        acc += q
        cdf.append(acc)
    out = {}
    for k, (v, f) in enumerate(zip(values, masses)):
        if f == 0:
            continue
        if k + 1 < len(values):
            out[k] = v - (values[k + 1] - v) * (1 - cdf[k]) / f
        else:
            out[k] = v
    return out


def regular_phi_range(instance, i, profile, revenue):
    """Minimum and maximum of the virtual value of buyer i at the given
    profile over every regular optimal dual of a single-item instance.

    The feasible set is the dual program restricted to objective value
    `revenue` with the three regularity conditions added as equalities;
    the virtual value is the linear expected-virtual-value functional
    divided by the profile mass.  Equal endpoints mean every regular
    optimal dual agrees at that entry."""
    assert instance.m == 1
    assert instance.mu(profile) > 0
    base = build_dual_dslp(instance)
    index = {label: k for k, label in enumerate(base.col_labels)}

    def phi_star_row(bi, prof):
        t = prof[bi]
        skey = profile_key(instance.drop(bi, prof))
        vt = instance.value(bi, t)[0]
        row = []
        if vt:
            row.append((index[f"eta:{bi}:{profile_key(prof)}"], vt))
        for t2 in range(instance.sizes[bi]):
            if t2 == t:
                continue
            if vt:
                row.append((index[f"zeta:{bi}:{t}:{t2}:{skey}"], vt))
            v2 = instance.value(bi, t2)[0]
            if v2:
                row.append((index[f"zeta:{bi}:{t2}:{t}:{skey}"], -v2))
        return row

    c = [Fraction(0)] * base.ncols
    for col, coef in phi_star_row(i, profile):
        c[col] += coef
    rows = list(base.rows)
    b = list(base.b)
    labels = list(base.row_labels)

    xi_cols = [k for k, lbl in enumerate(base.col_labels) if lbl.startswith("xi:")]
    rows.append(tuple((k, Fraction(1)) for k in xi_cols))
    b.append(revenue)
    labels.append("face:le")
    rows.append(tuple((k, Fraction(-1)) for k in xi_cols))
    b.append(-revenue)
    labels.append("face:ge")

    for bi in range(instance.n):
        t0 = instance.zero_index(bi)
        for rr, prof in enumerate(instance.profiles()):
            w = instance.mu_minus(bi, instance.drop(bi, prof))
            # source: eta sits only on the zero type, at the slice mass
            e = w if prof[bi] == t0 else Fraction(0)
            col = index[f"eta:{bi}:{profile_key(prof)}"]
            rows.append(((col, Fraction(1)),))
            b.append(e)
            labels.append(f"src:le:{bi}:{rr}")
            rows.append(((col, Fraction(-1)),))
            b.append(-e)
            labels.append(f"src:ge:{bi}:{rr}")
            # trans: the payment coefficient meets mu exactly (the base
            # dp row already forces it from below)
            t = prof[bi]
            skey = profile_key(instance.drop(bi, prof))
            row = [(col, Fraction(1))]
            for t2 in range(instance.sizes[bi]):
                if t2 == t:
                    continue
                row.append((index[f"zeta:{bi}:{t}:{t2}:{skey}"], Fraction(1)))
                row.append((index[f"zeta:{bi}:{t2}:{t}:{skey}"], Fraction(-1)))
            rows.append(tuple(row))
            b.append(instance.mu(prof))
            labels.append(f"trans:le:{bi}:{rr}")
            # virtual: expected virtual values vanish on zero-mass slices
            if w == 0:
                star = phi_star_row(bi, prof)
                if star:
                    rows.append(tuple(star))
                    b.append(Fraction(0))
                    labels.append(f"virt:le:{bi}:{rr}")
                    rows.append(tuple((cc, -qq) for cc, qq in star))
                    b.append(Fraction(0))
                    labels.append(f"virt:ge:{bi}:{rr}")

    out = []
    for sense in (MIN, MAX):
        cert = solve(make_lp(sense, c, rows, b, labels, base.col_labels), rule=DANTZIG)
        assert cert.status == OPTIMAL, cert.status
        out.append(cert.objective / instance.mu(profile))
    return tuple(out)
