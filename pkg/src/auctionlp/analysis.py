"""Separate-selling revenue, independence checks, and the equivalence
engine connecting Bayesian and dominant-strategy optima."""

from __future__ import annotations

from fractions import Fraction

from .auction import (
    brev,
    build_dual_dslp,
    drev,
    extract_dual,
    extract_mechanism,
    solve_form,
)
from .errors import NotAgentIndependent, NotOptimal, NotRegular
from .lp import DANTZIG, MIN, OPTIMAL, make_lp, solve
from .model import (
    BAYES,
    DS,
    DualSolutionBayes,
    DualSolutionDS,
    Instance,
    RevenueReport,
    VirtualValueTable,
    bayes_dual_from_multipliers,
    ds_dual_from_multipliers,
    make_revenue_report,
    rat_str,
    validate_instance,
)
from .virtual import (
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

__all__ = [
    "srev",
    "srev_breakdown",
    "item_marginal",
    "tight_downward_dual",
    "check_agent_independence",
    "check_item_independence",
    "bic_to_dsic_dual",
    "dsic_to_bic_dual",
    "characterize",
    "is_iid",
    "iid_scan",
]


# ---------------------------------------------------------------------------
# Separate selling


def item_marginal(instance: Instance, j: int) -> Instance:
    """Single-item instance selling only coordinate j: per buyer, the
    marginal of that coordinate with masses summed over the others and
    values sorted ascending."""
    supports = []
    probs = []
    for i in range(instance.n):
        masses: dict[Fraction, Fraction] = {}
        for t in range(instance.sizes[i]):
            w = instance.value(i, t)[j]
            masses[w] = masses.get(w, Fraction(0)) + instance.mu_i(i, t)
        if Fraction(0) not in masses:
            masses[Fraction(0)] = Fraction(0)
        values = sorted(masses)
        supports.append([[rat_str(w)] for w in values])
        probs.append([rat_str(masses[w]) for w in values])
    return validate_instance(
        {
            "buyers": instance.n,
            "items": 1,
            "supports": supports,
            "probs": probs,
        }
    )


def srev_breakdown(instance: Instance) -> tuple[Fraction, ...]:
    return tuple(drev(item_marginal(instance, j)) for j in range(instance.m))


def srev(instance: Instance) -> Fraction:
    """Revenue of selling each item separately by its optimal
    single-item auction on the item's marginal distribution."""
    return sum(srev_breakdown(instance), Fraction(0))


# ---------------------------------------------------------------------------
# Dual selection


def tight_downward_dual(instance: Instance, revenue: Fraction | None = None):
    """Search the optimal dual face for a solution whose payment rows
    are all tight and whose deviation mass never runs from a lower
    value to a higher one on any item.

    Minimizes total participation mass plus the mass on raising pairs
    over the optimal face.  Returns (dual, excess): excess 0 means both
    goals were met exactly, and the regularized table then stays at or
    below the values entrywise.  Single-item instances always admit
    excess 0.
    """
    if revenue is None:
        revenue = drev(instance)
    base = build_dual_dslp(instance)
    xi_cols = []
    c = [Fraction(0)] * base.ncols
    for col, label in enumerate(base.col_labels):
        parts = label.split(":")
        if parts[0] == "xi":
            xi_cols.append(col)
        elif parts[0] == "eta":
            c[col] = Fraction(1)
        elif parts[0] == "zeta":
            i, a, b = int(parts[1]), int(parts[2]), int(parts[3])
            va = instance.value(i, a)
            vb = instance.value(i, b)
            if any(wb > wa for wa, wb in zip(va, vb)):
                c[col] = Fraction(1)
    rows = list(base.rows) + [
        tuple((col, Fraction(1)) for col in xi_cols),
        tuple((col, Fraction(-1)) for col in xi_cols),
    ]
    b = list(base.b) + [revenue, -revenue]
    row_labels = list(base.row_labels) + ["face:obj:le", "face:obj:ge"]
    lp = make_lp(MIN, c, rows, b, row_labels, base.col_labels)
    certificate = solve(lp, rule=DANTZIG)
    if certificate.status != OPTIMAL:
        raise NotOptimal(f"optimal-face search ended {certificate.status}")
    dual = extract_dual(instance, certificate, DS)
    # total participation mass alone already sums to at least one per buyer
    excess = certificate.objective - instance.n
    assert excess >= 0
    assert dual.objective() == revenue
    return dual, excess


# ---------------------------------------------------------------------------
# Agent and item independence


def _reference_slice(instance: Instance, i: int) -> int:
    for s, vm in enumerate(instance.others_profiles(i)):
        if instance.mu_minus(i, vm) > 0:
            return s
    raise AssertionError("opponent masses cannot all vanish")


def check_agent_independence(instance: Instance, dual: DualSolutionDS):
    """Check that buyer-level dual data does not depend on the others'
    values: virtual values agree across mass-bearing opponent slices,
    and eta and zeta agree across all slices after weighting by the
    opponent masses.  Returns (ok, witness)."""
    table = virtual_values_ds(instance, dual)
    for i in range(instance.n):
        slices = list(instance.others_profiles(i))
        weights = [instance.mu_minus(i, vm) for vm in slices]
        ref = _reference_slice(instance, i)
        wref = weights[ref]
        for t in range(instance.sizes[i]):
            base = instance.rank(instance.insert(i, t, slices[ref]))
            for s, vm in enumerate(slices):
                if s == ref:
                    continue
                r = instance.rank(instance.insert(i, t, vm))
                if weights[s] > 0:
                    for j in range(instance.m):
                        if table.values[i][j][r] != table.values[i][j][base]:
                            return False, ("phi", (i, j, t, s))
                if dual.eta[i][r] * wref != dual.eta[i][base] * weights[s]:
                    return False, ("eta", (i, t, s))
                for t2 in range(instance.sizes[i]):
                    if t2 == t:
                        continue
                    if (
                        dual.zeta[i][t][t2][s] * wref
                        != dual.zeta[i][t][t2][ref] * weights[s]
                    ):
                        return False, ("zeta", (i, t, t2, s))
    return True, None


def check_item_independence(instance: Instance, table: VirtualValueTable):
    """For each buyer and item, two types agreeing on that item's
    coordinate must have equal virtual values for it unless both are
    nonpositive.  Returns (ok, witness)."""
    for i in range(instance.n):
        ref = _reference_slice(instance, i)
        slices = list(instance.others_profiles(i))
        ranks = [
            instance.rank(instance.insert(i, t, slices[ref]))
            for t in range(instance.sizes[i])
        ]
        for j in range(instance.m):
            for t in range(instance.sizes[i]):
                for t2 in range(t + 1, instance.sizes[i]):
                    if instance.value(i, t)[j] != instance.value(i, t2)[j]:
                        continue
                    a = table.values[i][j][ranks[t]]
                    b = table.values[i][j][ranks[t2]]
                    if a == b:
                        continue
                    if (a <= 0) and (b <= 0):
                        continue
                    return False, (i, j, t, t2)
    return True, None


# ---------------------------------------------------------------------------
# The equivalence constructions


def bic_to_dsic_dual(
    instance: Instance, dual: DualSolutionBayes
) -> DualSolutionDS:
    """Spread a Bayesian dual across opponent slices by the opponent
    mass: the result is feasible for the dominant-strategy dual with
    the same objective, and is agent-independent by construction."""
    zeta = tuple(
        tuple(
            tuple(
                tuple(
                    dual.zeta[i][t][t2] * instance.mu_minus(i, vm)
                    for vm in instance.others_profiles(i)
                )
                for t2 in range(instance.sizes[i])
            )
            for t in range(instance.sizes[i])
        )
        for i in range(instance.n)
    )
    eta = tuple(
        tuple(
            dual.eta[i][profile[i]]
            * instance.mu_minus(i, instance.drop(i, profile))
            for profile in instance.profiles()
        )
        for i in range(instance.n)
    )
    result = ds_dual_from_multipliers(instance, zeta, eta, dual.xi)
    assert result.is_feasible(), "mapped dual lost feasibility"
    assert result.objective() == dual.objective()
    return result


def dsic_to_bic_dual(
    instance: Instance, dual: DualSolutionDS
) -> DualSolutionBayes:
    """Invert bic_to_dsic_dual on an agent-independent dual by reading
    each buyer's multipliers off a mass-bearing opponent slice."""
    zeta = []
    eta = []
    for i in range(instance.n):
        slices = list(instance.others_profiles(i))
        weights = [instance.mu_minus(i, vm) for vm in slices]
        ref = _reference_slice(instance, i)
        wref = weights[ref]
        zeta_i = tuple(
            tuple(
                Fraction(0) if t2 == t else dual.zeta[i][t][t2][ref] / wref
                for t2 in range(instance.sizes[i])
            )
            for t in range(instance.sizes[i])
        )
        eta_i = tuple(
            dual.eta[i][instance.rank(instance.insert(i, t, slices[ref]))] / wref
            for t in range(instance.sizes[i])
        )
        for t in range(instance.sizes[i]):
            for s, vm in enumerate(slices):
                if s == ref:
                    continue
                r = instance.rank(instance.insert(i, t, vm))
                if dual.eta[i][r] * wref != dual.eta[i][
                    instance.rank(instance.insert(i, t, slices[ref]))
                ] * weights[s]:
                    raise NotAgentIndependent(f"eta varies across slices: {(i, t, s)}")
                for t2 in range(instance.sizes[i]):
                    if t2 == t:
                        continue
                    if (
                        dual.zeta[i][t][t2][s] * wref
                        != dual.zeta[i][t][t2][ref] * weights[s]
                    ):
                        raise NotAgentIndependent(
                            f"zeta varies across slices: {(i, t, t2, s)}"
                        )
        zeta.append(zeta_i)
        eta.append(eta_i)
    result = bayes_dual_from_multipliers(
        instance, tuple(zeta), tuple(eta), dual.xi
    )
    assert result.is_feasible(), "mapped dual lost feasibility"
    assert result.objective() == dual.objective()
    return result


# ---------------------------------------------------------------------------
# Characterization


def is_iid(instance: Instance) -> bool:
    return all(
        instance.supports[i] == instance.supports[0]
        and instance.probs[i] == instance.probs[0]
        for i in range(instance.n)
    )


def characterize(instance: Instance) -> RevenueReport:
    """Compute the three revenues, and when the Bayesian and
    dominant-strategy optima agree, produce the agent-independent
    dominant-strategy dual witnessing the equality."""
    ds_cert = solve_form(instance, DS)
    bayes_cert = solve_form(instance, BAYES)
    drev_value = ds_cert.objective
    brev_value = bayes_cert.objective
    srev_value = srev(instance)

    ai_witness = None
    findings = []
    if brev_value == drev_value:
        bayes_dual = extract_dual(instance, bayes_cert, BAYES)
        regular = regularize_bayes(instance, bayes_dual, revenue=brev_value)
        ai_witness = bic_to_dsic_dual(instance, regular)
        mechanism = extract_mechanism(instance, ds_cert, DS)
        ledger = check_cs_ds(instance, mechanism, ai_witness)
        if not ledger.optimal:
            findings.append("witness-not-dsic-optimal")
        ok, witness = check_agent_independence(instance, ai_witness)
        if not ok:
            findings.append(f"witness-not-agent-independent:{witness}")

    if is_iid(instance) and instance.n >= 3:
        equalities = (
            brev_value == drev_value,
            drev_value == srev_value,
            srev_value == brev_value,
        )
        if any(equalities) and not all(equalities):
            findings.append(
                "iid-equality-split:"
                f"brev={rat_str(brev_value)},drev={rat_str(drev_value)},"
                f"srev={rat_str(srev_value)}"
            )

    return make_revenue_report(
        brev=brev_value,
        drev=drev_value,
        srev=srev_value,
        ai_witness=ai_witness,
        findings=tuple(findings),
    )


def iid_scan(family: dict, seed: int, count: int) -> list[dict]:
    """Characterize seeded i.i.d. instances and collect per-instance
    findings records; families below three buyers are excluded."""
    from .oracles import gen_instance

    n = int(family.get("n", 3))
    if n < 3:
        return [
            {
                "notice": "excluded",
                "reason": "the all-equal implication needs at least 3 buyers",
                "n": n,
            }
        ]
    records = []
    for index in range(count):
        spec = dict(family)
        spec["n"] = n
        spec["iid"] = True
        instance = gen_instance(spec, seed + index)
        report = characterize(instance)
        dual, excess = tight_downward_dual(instance, revenue=report.drev)
        regular = regularize_ds(instance, dual, revenue=report.drev)
        table = virtual_values_ds(instance, regular)
        ubvv = check_ubvv(table, instance)
        records.append(
            {
                "index": index,
                "seed": seed + index,
                "digest": instance.digest(),
                "brev": rat_str(report.brev),
                "drev": rat_str(report.drev),
                "srev": rat_str(report.srev),
                "brev_eq_drev": report.brev_eq_drev,
                "drev_eq_srev": report.drev_eq_srev,
                "srev_eq_brev": report.srev_eq_brev,
                "all_equal_consistent": not any(
                    f.startswith("iid-equality-split") for f in report.findings
                ),
                "bayes_gap": rat_str(report.brev - report.drev),
                "tight_excess": rat_str(excess),
                "ubvv_ok": ubvv.ok,
                "findings": list(report.findings),
            }
        )
    return records
