"""Exact simplex: certificates, duals, pivot rules, and the kernel pair.

Optimal objectives are cross-checked against brute-force vertex
enumeration (helpers.brute_force_best), which shares no code with the
solver."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from auctionlp.lp import (
    BLAND,
    DANTZIG,
    INFEASIBLE,
    KERNEL,
    MAX,
    MIN,
    OPTIMAL,
    UNBOUNDED,
    CertificateError,
    LpCertificate,
    dual_of,
    export_lp_text,
    make_lp,
    recheck_certificate,
    solve,
)
from helpers import brute_force_best

F = Fraction


def lp_of(sense, c, dense_rows, b):
    rows = [
        [(j, F(q)) for j, q in enumerate(row) if q] for row in dense_rows
    ]
    return make_lp(
        sense,
        [F(q) for q in c],
        rows,
        [F(q) for q in b],
        [f"r{k}" for k in range(len(rows))],
        [f"x{j}" for j in range(len(c))],
    )


# -- construction -----------------------------------------------------------


def test_make_lp_rejects_malformed():
    with pytest.raises(ValueError):
        make_lp("maximize", [F(1)], [], [], [], ["x"])
    with pytest.raises(ValueError):
        make_lp(MAX, [F(1)], [], [], [], ["x", "y"])
    with pytest.raises(ValueError):
        make_lp(MAX, [F(1), F(1)], [], [], [], ["x", "x"])
    with pytest.raises(ValueError):
        make_lp(MAX, [F(1)], [[(0, F(1)), (0, F(2))]], [F(1)], ["r"], ["x"])
    with pytest.raises(ValueError):
        make_lp(MAX, [F(1)], [[(3, F(1))]], [F(1)], ["r"], ["x"])
    with pytest.raises(ValueError):
        make_lp(MAX, [F(1)], [[(0, F(1))]], [F(1), F(2)], ["r"], ["x"])


def test_make_lp_drops_zero_coefficients():
    lp = lp_of(MAX, [1], [[0]], [5])
    assert lp.rows == ((),)


# -- basic solves -----------------------------------------------------------


def test_single_bound():
    cert = solve(lp_of(MAX, [1], [[1]], [5]))
    assert cert.status == OPTIMAL
    assert cert.objective == 5
    assert cert.primal_map()["x0"] == 5
    assert cert.dual_map()["r0"] == 1


def test_min_sense_with_negative_rhs():
    # min x0 + x1 subject to x0 + x1 >= 2, written as -x0 - x1 <= -2
    cert = solve(lp_of(MIN, [1, 1], [[-1, -1]], [-2]))
    assert cert.status == OPTIMAL
    assert cert.objective == 2


def test_degenerate_rows():
    cert = solve(lp_of(MAX, [1, 0], [[1, 0], [1, 0], [1, 1]], [1, 1, 1]))
    assert cert.status == OPTIMAL
    assert cert.objective == 1


def test_unbounded():
    cert = solve(lp_of(MAX, [1, 1], [[1, -1]], [1]))
    assert cert.status == UNBOUNDED
    assert cert.witness is not None


def test_infeasible():
    cert = solve(lp_of(MAX, [1], [[1], [-1]], [-3, 2]))
    assert cert.status == INFEASIBLE
    assert cert.witness is not None


def test_zero_objective():
    cert = solve(lp_of(MAX, [0, 0], [[1, 1]], [4]))
    assert cert.status == OPTIMAL
    assert cert.objective == 0


def test_unknown_rule_rejected():
    with pytest.raises(ValueError):
        solve(lp_of(MAX, [1], [[1]], [1]), rule="steepest")


# -- certificates -----------------------------------------------------------


def test_recheck_accepts_and_tamper_detected():
    lp = lp_of(MAX, [2, 3], [[1, 1], [1, 3]], [4, 6])
    cert = solve(lp)
    recheck_certificate(lp, cert)
    forged = LpCertificate(
        status=cert.status,
        col_labels=cert.col_labels,
        row_labels=cert.row_labels,
        primal=cert.primal,
        dual=cert.dual,
        objective=cert.objective + 1,
    )
    with pytest.raises(CertificateError):
        recheck_certificate(lp, forged)


def test_recheck_rejects_unknown_status():
    lp = lp_of(MAX, [1], [[1]], [1])
    with pytest.raises(CertificateError):
        recheck_certificate(
            lp,
            LpCertificate(
                status="done",
                col_labels=lp.col_labels,
                row_labels=lp.row_labels,
            ),
        )


# -- symbolic dual ----------------------------------------------------------


def test_dual_of_round_trip():
    lp = lp_of(MAX, [2, -3], [[1, 1], [-1, 2]], [4, -1])
    assert dual_of(dual_of(lp)) == lp
    assert dual_of(lp).sense == MIN
    assert dual_of(lp).col_labels == lp.row_labels


def test_dual_objective_matches_primal():
    lp = lp_of(MAX, [2, 3], [[1, 1], [1, 3], [2, 1]], [4, 6, 5])
    a = solve(lp)
    d = solve(dual_of(lp))
    assert a.status == OPTIMAL and d.status == OPTIMAL
    assert a.objective == d.objective
    mn = lp_of(MIN, [3, 2], [[-1, -1], [-2, -1]], [-3, -4])
    a = solve(mn)
    d = solve(dual_of(mn))
    assert a.objective == d.objective


# -- pivot rules ------------------------------------------------------------


def beale_lp():
    return lp_of(
        MAX,
        [F(3, 4), -150, F(1, 50), -6],
        [
            [F(1, 4), -60, F(-1, 25), 9],
            [F(1, 2), -90, F(-1, 50), 3],
            [0, 0, 1, 0],
        ],
        [0, 0, 1],
    )


def test_beale_terminates_under_both_rules():
    lp = beale_lp()
    expected = brute_force_best(lp_of(
        MAX,
        [F(3, 4), -150, F(1, 50), -6],
        [
            [F(1, 4), -60, F(-1, 25), 9],
            [F(1, 2), -90, F(-1, 50), 3],
            [0, 0, 1, 0],
            [1, 1, 1, 1],
        ],
        [0, 0, 1, 100],
    ))
    assert expected == F(1, 20)
    for rule in (BLAND, DANTZIG):
        cert = solve(lp, rule=rule)
        assert cert.status == OPTIMAL
        assert cert.objective == F(1, 20)


# -- brute-force cross-check ------------------------------------------------

coef = st.fractions(min_value=-4, max_value=4, max_denominator=4)
rhs = st.fractions(min_value=-3, max_value=6, max_denominator=4)


@st.composite
def tiny_lps(draw):
    ncols = draw(st.integers(1, 3))
    nrows = draw(st.integers(0, 3))
    c = [draw(coef) for _ in range(ncols)]
    dense = [[draw(coef) for _ in range(ncols)] for _ in range(nrows)]
    b = [draw(rhs) for _ in range(nrows)]
    # box row keeps the region bounded, which the enumerator needs
    dense.append([1] * ncols)
    b.append(F(8))
    sense = draw(st.sampled_from([MAX, MIN]))
    return lp_of(sense, c, dense, b)


@settings(max_examples=120, deadline=None)
@given(tiny_lps())
def test_solver_matches_enumeration(lp):
    expected = brute_force_best(lp)
    for rule in (BLAND, DANTZIG):
        cert = solve(lp, rule=rule)
        if expected is None:
            assert cert.status == INFEASIBLE
        else:
            assert cert.status == OPTIMAL
            assert cert.objective == expected


@settings(max_examples=60, deadline=None)
@given(tiny_lps())
def test_strong_duality_on_random_lps(lp):
    cert = solve(lp)
    if cert.status != OPTIMAL:
        return
    dual_cert = solve(dual_of(lp))
    assert dual_cert.status == OPTIMAL
    assert dual_cert.objective == cert.objective


# -- pivot kernels ----------------------------------------------------------


def test_kernel_name_is_known():
    assert KERNEL in ("compiled", "pure")


def test_kernels_produce_identical_tableaus():
    from auctionlp.lp import _pivot_py

    cy = pytest.importorskip("auctionlp.lp._pivot_cy")
    rng = random.Random(7)

    def tableau():
        return [
            [F(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(8)]
            for _ in range(6)
        ]

    a = tableau()
    b = [row[:] for row in a]
    steps = [(0, 2), (3, 5), (1, 0), (4, 7), (2, 4)]
    for r, c in steps:
        if a[r][c] == 0:
            a[r][c] = b[r][c] = F(1, 3)
        _pivot_py.eliminate(a, r, c)
        cy.eliminate(b, r, c)
        assert a == b


def test_export_lp_text_scales_to_integers():
    lp = lp_of(MAX, [F(1, 2), F(1, 3)], [[F(1, 4), 1]], [F(3, 2)])
    text = export_lp_text(lp)
    assert "Maximize" in text
    assert "objective scale: 6" in text
    assert "+ 1 x0 + 4 x1 <= 6" in text
    assert text.endswith("End\n")
