"""The nine acceptance checks, one test per criterion.

Every comparison is exact rational equality; no tolerances anywhere.
The corpus is seeded, so the whole module is deterministic.  Solves and
derived objects are memoized per instance digest, letting each criterion
reuse the same optimal pairs."""

import random
import time
from fractions import Fraction

import pytest

from auctionlp.analysis import (
    bic_to_dsic_dual,
    characterize,
    check_agent_independence,
    dsic_to_bic_dual,
    srev,
    tight_downward_dual,
)
from auctionlp.auction import (
    BAYES,
    DS,
    build_dual_blp,
    build_dual_dslp,
    drev,
    extract_dual,
    extract_mechanism,
    solve_form,
)
from auctionlp.lp import DANTZIG, OPTIMAL, solve
from auctionlp.model import (
    bayes_dual_from_multipliers,
    ds_dual_from_multipliers,
    zero_mechanism,
)
from auctionlp.oracles import gen_instance, menu_grid_revenue, posted_price_revenue
from auctionlp.virtual import (
    bayes_regularity_witness,
    check_cs_bayes,
    check_cs_ds,
    check_ubvv,
    check_vwm,
    ds_regularity_witness,
    regularize_bayes,
    regularize_ds,
    virtual_values_bayes,
    virtual_values_ds,
)
from helpers import myerson_formula, regular_phi_range

F = Fraction

# Two-item buyers use joint vector sampling (the generator default);
# per-item product grids cannot stay within three types per buyer.
CORPUS_FAMILIES = (
    (50, lambda s: {"n": 1, "m": 1, "support": 1 + s % 2}),
    (30, lambda s: {"n": 1, "m": 2, "support": 1 + s % 2}),
    (40, lambda s: {"n": 2, "m": 1, "support": 2, "iid": s % 2 == 1}),
    (30, lambda s: {"n": 2, "m": 2, "support": 2}),
    (35, lambda s: {"n": 3, "m": 1, "support": 2, "iid": s % 2 == 0}),
    (20, lambda s: {"n": 3, "m": 2, "support": 1 + s % 2}),
)


@pytest.fixture(scope="module")
def corpus():
    instances = []
    for count, family in CORPUS_FAMILIES:
        for seed in range(count):
            instances.append(gen_instance(family(seed), seed))
    return instances


_STORE: dict[str, dict] = {}


def pipeline(instance):
    entry = _STORE.setdefault(instance.digest(), {})
    if "ds_cert" not in entry:
        entry["ds_cert"] = solve_form(instance, DS)
        entry["bayes_cert"] = solve_form(instance, BAYES)
        entry["ds_dual_cert"] = solve(build_dual_dslp(instance), rule=DANTZIG)
        entry["bayes_dual_cert"] = solve(build_dual_blp(instance), rule=DANTZIG)
    return entry


def stage(instance, key):
    entry = pipeline(instance)
    if key not in entry:
        if key == "mech_ds":
            entry[key] = extract_mechanism(instance, entry["ds_cert"], DS)
        elif key == "dual_ds":
            entry[key] = extract_dual(instance, entry["ds_cert"], DS)
        elif key == "reg_ds":
            entry[key] = regularize_ds(
                instance, stage(instance, "dual_ds"), revenue=entry["ds_cert"].objective
            )
        elif key == "table_ds":
            entry[key] = virtual_values_ds(instance, stage(instance, "reg_ds"))
        elif key == "mech_bayes":
            entry[key] = extract_mechanism(instance, entry["bayes_cert"], BAYES)
        elif key == "dual_bayes":
            entry[key] = extract_dual(instance, entry["bayes_cert"], BAYES)
        elif key == "reg_bayes":
            entry[key] = regularize_bayes(
                instance,
                stage(instance, "dual_bayes"),
                revenue=entry["bayes_cert"].objective,
            )
        elif key == "table_bayes":
            entry[key] = virtual_values_bayes(instance, stage(instance, "reg_bayes"))
        else:
            raise KeyError(key)
    return entry[key]


def dot(vec, alloc):
    return sum((w * x for w, x in zip(vec, alloc)), F(0))


# -- criterion 1 ------------------------------------------------------------


def test_c1_strong_duality(corpus):
    """All four programs solve to optimality on every corpus instance,
    with primal and explicit-dual objectives agreeing exactly, inside
    the time budget."""
    start = time.monotonic()
    assert len(corpus) >= 200
    for instance in corpus:
        assert instance.n <= 3
        assert instance.m <= 2
        assert max(instance.sizes) <= 3
        entry = pipeline(instance)
        for key in ("ds_cert", "bayes_cert", "ds_dual_cert", "bayes_dual_cert"):
            assert entry[key].status == OPTIMAL
        assert entry["ds_cert"].objective == entry["ds_dual_cert"].objective
        assert entry["bayes_cert"].objective == entry["bayes_dual_cert"].objective
        assert entry["bayes_cert"].objective >= entry["ds_cert"].objective >= 0
    assert time.monotonic() - start < 300


# -- criterion 2 ------------------------------------------------------------


def perturb_ds(instance, dual, rng, delta):
    """A feasible off-optimum dual: either one supply entry is raised,
    or one participation weight is raised with the supply entries at
    that profile compensating by the buyer's values."""
    eta = [list(row) for row in dual.eta]
    xi = [list(col) for col in dual.xi]
    profiles = list(instance.profiles())
    r = rng.randrange(instance.profile_count)
    if rng.random() < 1 / 2:
        xi[rng.randrange(instance.m)][r] += delta
    else:
        i = rng.randrange(instance.n)
        eta[i][r] += delta
        vec = instance.value(i, profiles[r][i])
        for j in range(instance.m):
            xi[j][r] += delta * vec[j]
    result = ds_dual_from_multipliers(
        instance, dual.zeta, tuple(tuple(row) for row in eta), tuple(tuple(c) for c in xi)
    )
    assert result.is_feasible()
    return result


def perturb_bayes(instance, dual, rng, delta):
    eta = [list(row) for row in dual.eta]
    xi = [list(col) for col in dual.xi]
    if rng.random() < 1 / 2:
        xi[rng.randrange(instance.m)][rng.randrange(instance.profile_count)] += delta
    else:
        i = rng.randrange(instance.n)
        t = rng.randrange(instance.sizes[i])
        eta[i][t] += delta
        vec = instance.value(i, t)
        for profile in instance.profiles():
            if profile[i] != t:
                continue
            w = instance.mu_minus(i, instance.drop(i, profile))
            r = instance.rank(profile)
            for j in range(instance.m):
                xi[j][r] += delta * w * vec[j]
    result = bayes_dual_from_multipliers(
        instance, dual.zeta, tuple(tuple(row) for row in eta), tuple(tuple(c) for c in xi)
    )
    assert result.is_feasible()
    return result


def test_c2_ledger_identity(corpus):
    """The five-family product sum reproduces obj(dual) - obj(primal)
    exactly for optimal pairs, the zero mechanism, and fifty feasible
    perturbed duals, in both forms."""
    for instance in corpus:
        mech = stage(instance, "mech_ds")
        dual = stage(instance, "dual_ds")
        ledger = check_cs_ds(instance, mech, dual)
        assert ledger.gap == 0
        assert (ledger.ic, ledger.ir, ledger.supply, ledger.alloc, ledger.pay) == (
            0, 0, 0, 0, 0,
        )
        bledger = check_cs_bayes(
            instance, stage(instance, "mech_bayes"), stage(instance, "dual_bayes")
        )
        assert bledger.gap == 0

        zledger = check_cs_ds(instance, zero_mechanism(instance, DS), dual)
        assert zledger.gap == dual.objective()
        bz = check_cs_bayes(
            instance, zero_mechanism(instance, BAYES), stage(instance, "dual_bayes")
        )
        assert bz.gap == stage(instance, "dual_bayes").objective()

    rng = random.Random(4202)
    for k in range(50):
        instance = corpus[(k * 7) % len(corpus)]
        delta = F(1 + k % 5, 7)
        if k % 2 == 0:
            mech = stage(instance, "mech_ds")
            dual2 = perturb_ds(instance, stage(instance, "dual_ds"), rng, delta)
            ledger = check_cs_ds(instance, mech, dual2)
            assert ledger.gap == dual2.objective() - mech.revenue(instance)
        else:
            mech = stage(instance, "mech_bayes")
            dual2 = perturb_bayes(instance, stage(instance, "dual_bayes"), rng, delta)
            ledger = check_cs_bayes(instance, mech, dual2)
            assert ledger.gap == dual2.objective() - mech.revenue(instance)


# -- criterion 3 ------------------------------------------------------------


def test_c3_oracle_anchors(u12, u123, items12):
    """Closed-form baselines pin the solver on three hand-checkable
    instances."""
    assert drev(u12) == 1
    assert solve_form(u12, BAYES).objective == 1
    assert posted_price_revenue([v[0] for v in u12.supports[0]], u12.probs[0]) == 1

    assert drev(u123) == F(4, 3)
    assert solve_form(u123, BAYES).objective == F(4, 3)
    assert posted_price_revenue([v[0] for v in u123.supports[0]], u123.probs[0]) == F(4, 3)

    assert srev(items12) == 2
    bundle_revenue = drev(items12)
    assert bundle_revenue >= F(9, 4)
    assert bundle_revenue >= srev(items12)
    assert menu_grid_revenue(items12, 4) <= bundle_revenue


# -- criterion 4 ------------------------------------------------------------


def test_c4_regularization(corpus):
    """Regularizing an optimal dual preserves objective and feasibility
    and lands on all three conditions, in both forms."""
    for instance in corpus:
        entry = pipeline(instance)
        reg = stage(instance, "reg_ds")
        assert reg.objective() == entry["ds_cert"].objective
        assert reg.is_feasible()
        assert ds_regularity_witness(instance, reg) is None
        for i in range(instance.n):
            for profile in instance.profiles():
                assert reg.psi(instance, i, profile) == instance.mu(profile)

        breg = stage(instance, "reg_bayes")
        assert breg.objective() == entry["bayes_cert"].objective
        assert breg.is_feasible()
        assert bayes_regularity_witness(instance, breg) is None
        for i in range(instance.n):
            assert breg.eta[i][instance.zero_index(i)] == 1
            for t in range(instance.sizes[i]):
                assert breg.psibar(instance, i, t) == instance.mu_i(i, t)


# -- criterion 5 ------------------------------------------------------------


def test_c5_virtual_welfare_maximization(corpus):
    """Optimal mechanisms maximize virtual welfare against the tables of
    their regularized duals: zero violations, both forms."""
    for instance in corpus:
        report = check_vwm(
            instance, stage(instance, "mech_ds"), stage(instance, "table_ds")
        )
        assert report.violations == ()
        breport = check_vwm(
            instance, stage(instance, "mech_bayes"), stage(instance, "table_bayes")
        )
        assert breport.violations == ()


# -- criterion 6 ------------------------------------------------------------


def test_c6_equivalence_maps(corpus):
    """Where the two optima agree, the Bayesian regular dual maps to an
    agent-independent dominant-strategy dual at the same objective, and
    maps back."""
    matched = 0
    for instance in corpus:
        entry = pipeline(instance)
        if entry["bayes_cert"].objective != entry["ds_cert"].objective:
            continue
        matched += 1
        witness = bic_to_dsic_dual(instance, stage(instance, "reg_bayes"))
        assert witness.is_feasible()
        assert witness.objective() == entry["ds_cert"].objective
        ok, detail = check_agent_independence(instance, witness)
        assert ok, detail
        back = dsic_to_bic_dual(instance, witness)
        assert back.is_feasible()
        assert back.objective() == entry["bayes_cert"].objective
    assert matched >= 50


# -- criterion 7 ------------------------------------------------------------


def test_c7_iid_equality_scan():
    """Over 100 seeded i.i.d. three-buyer instances, one revenue
    equality never holds without the other two.  A split would be
    archived below and fail the build."""
    splits = []
    checked = 0
    specs = [({"n": 3, "m": 1, "support": 2, "iid": True}, 300 + s) for s in range(60)]
    specs += [({"n": 3, "m": 2, "support": 1, "iid": True}, 500 + s) for s in range(40)]
    for spec, seed in specs:
        instance = gen_instance(spec, seed)
        report = characterize(instance)
        checked += 1
        flags = (report.brev_eq_drev, report.drev_eq_srev, report.srev_eq_brev)
        if any(flags) and not all(flags):
            assert any(f.startswith("iid-equality-split") for f in report.findings)
            splits.append(
                {
                    "seed": seed,
                    "digest": instance.digest(),
                    "findings": report.findings,
                }
            )
    assert checked >= 100
    assert splits == [], f"equality split on i.i.d. instances: {splits}"


# -- criterion 8 ------------------------------------------------------------


def test_c8_discrete_myerson_agreement(corpus, u12, u123, pair12):
    """Single-item virtual values from the regularized optimal dual
    agree with the closed-form discrete formula wherever the formula's
    point is the unique regular-optimal choice; the face probe excuses
    every disagreement.  The value upper bound holds on every entry."""
    singles = [inst for inst in corpus if inst.m == 1] + [u12, u123, pair12]
    assert len(singles) >= 100
    matched = 0
    probed = 0
    for instance in singles:
        revenue = pipeline(instance)["ds_cert"].objective
        dual, excess = tight_downward_dual(instance, revenue=revenue)
        assert excess == 0
        reg = regularize_ds(instance, dual, revenue=revenue)
        table = virtual_values_ds(instance, reg)
        assert check_ubvv(table, instance).ok
        for i in range(instance.n):
            formula = myerson_formula(
                [vec[0] for vec in instance.supports[i]], instance.probs[i]
            )
            ref = next(
                vm
                for vm in instance.others_profiles(i)
                if instance.mu_minus(i, vm) > 0
            )
            for t, want in formula.items():
                profile = instance.insert(i, t, ref)
                entry = table.values[i][0][instance.rank(profile)]
                if entry == want:
                    matched += 1
                    continue
                probed += 1
                lo, hi = regular_phi_range(instance, i, profile, revenue)
                assert lo <= entry <= hi
                assert (lo < hi) or not (lo <= want <= hi), (
                    f"formula disagrees at a uniquely determined point: "
                    f"digest={instance.digest()} buyer={i} type={t} "
                    f"entry={entry} formula={want}"
                )
    assert matched > probed


# -- criterion 9 ------------------------------------------------------------


def off_support_vector(instance, i, rng):
    support = set(instance.supports[i])
    while True:
        vec = tuple(
            F(rng.randint(0, 12), rng.randint(1, 4)) for _ in range(instance.m)
        )
        if vec not in support:
            return vec


def interim_rows(instance, mech):
    rows = []
    for i in range(instance.n):
        per_type = []
        for t in range(instance.sizes[i]):
            alloc = [F(0)] * instance.m
            pay = F(0)
            for vm in instance.others_profiles(i):
                w = instance.mu_minus(i, vm)
                if not w:
                    continue
                r = instance.rank(instance.insert(i, t, vm))
                for j in range(instance.m):
                    alloc[j] += w * mech.alloc[r][i][j]
                pay += w * mech.pay[r][i]
            per_type.append((tuple(alloc), pay))
        rows.append(per_type)
    return rows


def test_c9_extension_deviations(corpus):
    """Fifty off-support queries per instance: reporting any support
    type instead never profits, per profile for the dominant-strategy
    extension and in expectation for the Bayesian one."""
    from auctionlp.auction import extend_bayes, extend_ds

    for index, instance in enumerate(corpus):
        mech_d = stage(instance, "mech_ds")
        mech_b = stage(instance, "mech_bayes")
        bayes_menu = interim_rows(instance, mech_b)
        rng = random.Random(9000 + index)
        for q_index in range(50):
            off_count = 1
            if instance.n >= 2 and q_index % 3 == 0:
                off_count = 2
            off = set(rng.sample(range(instance.n), off_count))
            query = tuple(
                off_support_vector(instance, i, rng)
                if i in off
                else instance.supports[i][rng.randrange(instance.sizes[i])]
                for i in range(instance.n)
            )

            alloc, pay = extend_ds(instance, mech_d, query)
            for i in range(instance.n):
                truthful = dot(query[i], alloc[i]) - pay[i]
                for t2 in range(instance.sizes[i]):
                    deviated = list(query)
                    deviated[i] = instance.supports[i][t2]
                    a2, p2 = extend_ds(instance, mech_d, tuple(deviated))
                    assert truthful >= dot(query[i], a2[i]) - p2[i]

            balloc, bpay = extend_bayes(instance, mech_b, query)
            for i in range(instance.n):
                truthful = dot(query[i], balloc[i]) - bpay[i]
                for t2 in range(instance.sizes[i]):
                    ialloc, ipay = bayes_menu[i][t2]
                    assert truthful >= dot(query[i], ialloc) - ipay
