"""Complementary slackness ledgers, dual regularization, and virtual
values derived from regularized optimal duals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InfeasibleInput, MissingZeroType, NotOptimal, NotRegular
from .model import (
    BAYES,
    DS,
    DualSolutionBayes,
    DualSolutionDS,
    Instance,
    Mechanism,
    NEG_INF,
    PrimalSlacks,
    VirtualValueTable,
    bayes_dual_from_multipliers,
    ds_dual_from_multipliers,
    mechanism_slacks,
)

__all__ = [
    "GapLedger",
    "check_cs_ds",
    "check_cs_bayes",
    "regularize_ds",
    "regularize_bayes",
    "ds_regularity_witness",
    "bayes_regularity_witness",
    "virtual_values_ds",
    "virtual_values_bayes",
    "check_vwm",
    "VwmReport",
    "check_ubvv",
    "UbvvReport",
]


# ---------------------------------------------------------------------------
# Complementary slackness


@dataclass(frozen=True)
class GapLedger:
    """The objective gap split into the five product families."""

    ic: Fraction
    ir: Fraction
    supply: Fraction
    alloc: Fraction
    pay: Fraction

    @property
    def gap(self) -> Fraction:
        return self.ic + self.ir + self.supply + self.alloc + self.pay

    @property
    def optimal(self) -> bool:
        return self.gap == 0


def _require_feasible_pair(slacks: PrimalSlacks, dual) -> None:
    if slacks.min_entry() < 0:
        raise InfeasibleInput("primal slacks contain a negative entry")
    if not dual.is_feasible():
        raise InfeasibleInput("dual solution violates feasibility")


def check_cs_ds(
    instance: Instance,
    mechanism: Mechanism,
    dual: DualSolutionDS,
    slacks: PrimalSlacks | None = None,
) -> GapLedger:
    """Pair every slack with its multiplier; the five family sums add up
    to obj(dual) - obj(primal) exactly, and vanish iff both sides are
    optimal."""
    if slacks is None:
        slacks = mechanism_slacks(instance, mechanism)
    _require_feasible_pair(slacks, dual)
    ic = Fraction(0)
    for i in range(instance.n):
        for profile in instance.profiles():
            t = profile[i]
            s = instance.others_rank(i, instance.drop(i, profile))
            r = instance.rank(profile)
            for t2 in range(instance.sizes[i]):
                if t2 == t:
                    continue
                ic += slacks.a[i][r][t2] * dual.zeta[i][t][t2][s]
    ir = Fraction(0)
    for i in range(instance.n):
        for r in range(instance.profile_count):
            ir += slacks.b[i][r] * dual.eta[i][r]
    supply, alloc, pay = _shared_families(instance, mechanism, dual, slacks)
    ledger = GapLedger(ic=ic, ir=ir, supply=supply, alloc=alloc, pay=pay)
    gap = dual.objective() - mechanism.revenue(instance)
    assert ledger.gap == gap, "ledger does not reproduce the objective gap"
    return ledger


def check_cs_bayes(
    instance: Instance,
    mechanism: Mechanism,
    dual: DualSolutionBayes,
    slacks: PrimalSlacks | None = None,
) -> GapLedger:
    if slacks is None:
        slacks = mechanism_slacks(instance, mechanism)
    _require_feasible_pair(slacks, dual)
    ic = Fraction(0)
    for i in range(instance.n):
        for t in range(instance.sizes[i]):
            for t2 in range(instance.sizes[i]):
                if t2 == t:
                    continue
                ic += slacks.a[i][t][t2] * dual.zeta[i][t][t2]
    ir = Fraction(0)
    for i in range(instance.n):
        for t in range(instance.sizes[i]):
            ir += slacks.b[i][t] * dual.eta[i][t]
    supply, alloc, pay = _shared_families(instance, mechanism, dual, slacks)
    ledger = GapLedger(ic=ic, ir=ir, supply=supply, alloc=alloc, pay=pay)
    gap = dual.objective() - mechanism.revenue(instance)
    assert ledger.gap == gap, "ledger does not reproduce the objective gap"
    return ledger


def _shared_families(instance, mechanism, dual, slacks):
    supply = Fraction(0)
    for j in range(instance.m):
        for r in range(instance.profile_count):
            supply += slacks.c[j][r] * dual.xi[j][r]
    alloc = Fraction(0)
    pay = Fraction(0)
    for i in range(instance.n):
        for r in range(instance.profile_count):
            for j in range(instance.m):
                alloc += dual.alpha[i][j][r] * mechanism.alloc[r][i][j]
            pay += dual.beta[i][r] * mechanism.pay[r][i]
    return supply, alloc, pay


# ---------------------------------------------------------------------------
# Regularization


def _zero_indices(instance: Instance) -> list[int]:
    zeros = []
    for i in range(instance.n):
        t0 = instance.zero_index(i)
        if t0 is None:
            raise MissingZeroType(f"buyer {i} has no zero vector in support")
        zeros.append(t0)
    return zeros


def ds_regularity_witness(instance: Instance, dual: DualSolutionDS):
    """None if the dual satisfies all three regularity conditions, else
    a (condition, indices) witness."""
    zeros = _zero_indices(instance)
    for i in range(instance.n):
        for profile in instance.profiles():
            r = instance.rank(profile)
            vm = instance.drop(i, profile)
            if instance.mu_minus(i, vm) == 0:
                for j in range(instance.m):
                    if dual.phi_star(instance, i, j, profile) != 0:
                        return ("virtual", (i, j, profile))
            if profile[i] != zeros[i]:
                if dual.eta[i][r] != 0:
                    return ("source", (i, profile))
            elif dual.eta[i][r] != instance.mu_minus(i, vm):
                return ("source", (i, profile))
            if dual.psi(instance, i, profile) != instance.mu(profile):
                return ("trans", (i, profile))
    return None


def bayes_regularity_witness(instance: Instance, dual: DualSolutionBayes):
    zeros = _zero_indices(instance)
    for i in range(instance.n):
        for t in range(instance.sizes[i]):
            if t != zeros[i]:
                if dual.eta[i][t] != 0:
                    return ("source", (i, t))
            elif dual.eta[i][t] != 1:
                return ("source", (i, t))
            if dual.psibar(instance, i, t) != instance.mu_i(i, t):
                return ("trans", (i, t))
    return None


def _as_lists_ds(zeta):
    return [
        [[list(col) for col in row] for row in buyer] for buyer in zeta
    ]


def _freeze_ds(zeta):
    return tuple(
        tuple(tuple(tuple(col) for col in row) for row in buyer) for buyer in zeta
    )


def regularize_ds(
    instance: Instance, dual: DualSolutionDS, revenue: Fraction | None = None
) -> DualSolutionDS:
    """Rewrite an optimal dual so that participation weight sits only on
    the zero type and the payment coefficient meets mu(v) exactly.

    First every multiplier on opponent slices of zero mass is dropped;
    then, per buyer and slice, eta at a nonzero type moves onto
    zeta(t, 0) and the payment slack at t moves onto zeta(0, t), with
    eta reset to mu_{-i} at the zero type.  Objective and feasibility
    are preserved; all three regularity conditions are verified before
    returning.
    """
    if not dual.is_feasible():
        raise InfeasibleInput("dual solution violates feasibility")
    if revenue is None:
        from .auction import drev

        revenue = drev(instance)
    if dual.objective() != revenue:
        raise NotOptimal("dual objective does not match the optimal revenue")
    zeros = _zero_indices(instance)

    zeta = _as_lists_ds(dual.zeta)
    eta = [list(row) for row in dual.eta]
    for i in range(instance.n):
        for s, vm in enumerate(instance.others_profiles(i)):
            if instance.mu_minus(i, vm) != 0:
                continue
            for t in range(instance.sizes[i]):
                for t2 in range(instance.sizes[i]):
                    if t2 != t:
                        zeta[i][t][t2][s] = Fraction(0)
                eta[i][instance.rank(instance.insert(i, t, vm))] = Fraction(0)

    frozen = ds_dual_from_multipliers(
        instance, _freeze_ds(zeta), tuple(tuple(row) for row in eta), dual.xi
    )
    for i in range(instance.n):
        t0 = zeros[i]
        for s, vm in enumerate(instance.others_profiles(i)):
            for t in range(instance.sizes[i]):
                if t == t0:
                    continue
                profile = instance.insert(i, t, vm)
                r = instance.rank(profile)
                zeta[i][t][t0][s] = frozen.zeta[i][t][t0][s] + frozen.eta[i][r]
                zeta[i][t0][t][s] = frozen.zeta[i][t0][t][s] + frozen.beta[i][r]
                eta[i][r] = Fraction(0)
            zero_rank = instance.rank(instance.insert(i, t0, vm))
            eta[i][zero_rank] = instance.mu_minus(i, vm)

    result = ds_dual_from_multipliers(
        instance, _freeze_ds(zeta), tuple(tuple(row) for row in eta), dual.xi
    )
    if not result.is_feasible():
        raise NotRegular("regularized dual lost feasibility")
    if result.objective() != revenue:
        raise NotRegular("regularized dual changed the objective")
    witness = ds_regularity_witness(instance, result)
    if witness is not None:
        raise NotRegular(f"regularity condition failed: {witness}")
    return result


def regularize_bayes(
    instance: Instance, dual: DualSolutionBayes, revenue: Fraction | None = None
) -> DualSolutionBayes:
    """Bayesian mirror of regularize_ds: per buyer, eta at a nonzero
    type moves onto zeta(t, 0), the payment-coefficient surplus
    psibar(t) - mu_i(t) moves onto zeta(0, t), and eta becomes the unit
    mass at the zero type."""
    if not dual.is_feasible():
        raise InfeasibleInput("dual solution violates feasibility")
    if revenue is None:
        from .auction import brev

        revenue = brev(instance)
    if dual.objective() != revenue:
        raise NotOptimal("dual objective does not match the optimal revenue")
    zeros = _zero_indices(instance)

    zeta = [[list(row) for row in buyer] for buyer in dual.zeta]
    eta = [list(row) for row in dual.eta]
    for i in range(instance.n):
        t0 = zeros[i]
        for t in range(instance.sizes[i]):
            if t == t0:
                continue
            surplus = dual.psibar(instance, i, t) - instance.mu_i(i, t)
            zeta[i][t][t0] += dual.eta[i][t]
            zeta[i][t0][t] += surplus
            eta[i][t] = Fraction(0)
        eta[i][t0] = Fraction(1)

    result = bayes_dual_from_multipliers(
        instance,
        tuple(tuple(tuple(row) for row in buyer) for buyer in zeta),
        tuple(tuple(row) for row in eta),
        dual.xi,
    )
    if not result.is_feasible():
        raise NotRegular("regularized dual lost feasibility")
    if result.objective() != revenue:
        raise NotRegular("regularized dual changed the objective")
    witness = bayes_regularity_witness(instance, result)
    if witness is not None:
        raise NotRegular(f"regularity condition failed: {witness}")
    return result


# ---------------------------------------------------------------------------
# Virtual values


def virtual_values_ds(instance: Instance, dual: DualSolutionDS) -> VirtualValueTable:
    """Per-profile virtual values of a regular dual.

    On mass-bearing profiles the entry is the value corrected by the
    incoming zeta weights, and multiplying back by mu(v) reproduces the
    dual's expected virtual value.  Zero-mass opponent slices get 0 by
    convention, as do zero-mass nonzero own types; the zero type at
    zero mass against a mass-bearing slice is -inf.
    """
    witness = ds_regularity_witness(instance, dual)
    if witness is not None:
        raise NotRegular(f"dual is not regular: {witness}")
    zeros = _zero_indices(instance)
    values = []
    for i in range(instance.n):
        per_item = []
        for j in range(instance.m):
            col = []
            for profile in instance.profiles():
                t = profile[i]
                s = instance.others_rank(i, instance.drop(i, profile))
                w = instance.mu(profile)
                if w:
                    vt = instance.value(i, t)[j]
                    total = Fraction(0)
                    for t2 in range(instance.sizes[i]):
                        if t2 == t:
                            continue
                        total += dual.zeta[i][t2][t][s] * (
                            vt - instance.value(i, t2)[j]
                        )
                    phi = vt + total / w
                    assert phi * w == dual.phi_star(instance, i, j, profile)
                    col.append(phi)
                elif instance.mu_minus(i, instance.drop(i, profile)) == 0:
                    col.append(Fraction(0))
                elif t == zeros[i]:
                    col.append(NEG_INF)
                else:
                    col.append(Fraction(0))
            per_item.append(tuple(col))
        values.append(tuple(per_item))
    return VirtualValueTable(form=DS, values=tuple(values))


def virtual_values_bayes(
    instance: Instance, dual: DualSolutionBayes
) -> VirtualValueTable:
    """Per-type virtual values of a regular Bayesian dual, broadcast
    across opponent profiles so the table is constant in v_{-i}."""
    witness = bayes_regularity_witness(instance, dual)
    if witness is not None:
        raise NotRegular(f"dual is not regular: {witness}")
    zeros = _zero_indices(instance)
    values = []
    for i in range(instance.n):
        per_type = []
        for t in range(instance.sizes[i]):
            w = instance.mu_i(i, t)
            row = []
            for j in range(instance.m):
                if w:
                    vt = instance.value(i, t)[j]
                    total = Fraction(0)
                    for t2 in range(instance.sizes[i]):
                        if t2 == t:
                            continue
                        total += dual.zeta[i][t2][t] * (
                            vt - instance.value(i, t2)[j]
                        )
                    phi = vt + total / w
                    assert phi * w == dual.phibar_star(instance, i, j, t)
                    row.append(phi)
                elif t == zeros[i]:
                    row.append(NEG_INF)
                else:
                    row.append(Fraction(0))
            per_type.append(row)
        per_item = []
        for j in range(instance.m):
            col = tuple(
                per_type[profile[i]][j] for profile in instance.profiles()
            )
            per_item.append(col)
        values.append(tuple(per_item))
    return VirtualValueTable(form=BAYES, values=tuple(values))


# ---------------------------------------------------------------------------
# Virtual welfare maximization


@dataclass(frozen=True)
class VwmViolation:
    kind: str
    item: int
    rank: int
    buyer: int | None = None


@dataclass(frozen=True)
class VwmReport:
    checked: int
    violations: tuple[VwmViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_vwm(
    instance: Instance, mechanism: Mechanism, table: VirtualValueTable
) -> VwmReport:
    """Verify that on every mass-bearing profile each item goes only to
    buyers of maximal nonnegative virtual value, and that the item is
    fully allocated whenever the maximum is positive."""
    violations = []
    checked = 0
    for profile in instance.profiles():
        if instance.mu(profile) == 0:
            continue
        r = instance.rank(profile)
        checked += 1
        for j in range(instance.m):
            entries = [table.values[i][j][r] for i in range(instance.n)]
            best = max(entries)
            for i in range(instance.n):
                if mechanism.alloc[r][i][j] > 0:
                    if entries[i] != best:
                        violations.append(
                            VwmViolation("alloc-not-argmax", j, r, i)
                        )
                    if entries[i] is NEG_INF or entries[i] < 0:
                        violations.append(
                            VwmViolation("alloc-negative", j, r, i)
                        )
            sold = mechanism.sold(instance, j, profile)
            if sold < 1 and best is not NEG_INF and best > 0:
                violations.append(VwmViolation("unsold-max-positive", j, r))
            if 0 < sold < 1 and best != 0:
                violations.append(VwmViolation("partial-max-nonzero", j, r))
    return VwmReport(checked=checked, violations=tuple(violations))


@dataclass(frozen=True)
class UbvvReport:
    checked: int
    violations: tuple[tuple[int, int, int], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_ubvv(table: VirtualValueTable, instance: Instance) -> UbvvReport:
    """Report whether every finite entry on a mass-bearing profile stays
    at or below the corresponding value coordinate.  Violations are
    findings, not errors."""
    violations = []
    checked = 0
    for profile in instance.profiles():
        if instance.mu(profile) == 0:
            continue
        r = instance.rank(profile)
        for i in range(instance.n):
            vec = instance.value(i, profile[i])
            for j in range(instance.m):
                entry = table.values[i][j][r]
                if entry is NEG_INF:
                    continue
                checked += 1
                if entry > vec[j]:
                    violations.append((i, j, r))
    return UbvvReport(checked=checked, violations=tuple(violations))
