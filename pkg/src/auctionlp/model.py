"""Exact-rational domain types for auction instances, mechanisms, dual
solutions, and virtual-value tables.

All numbers are `fractions.Fraction`; nothing in the package touches
floating point.  Types are frozen dataclasses built from nested tuples,
immutable after construction.

Conventions used throughout:

* A *profile* is a tuple of per-buyer support indices, one per buyer.
  Profiles iterate row-major: buyer 0's index varies slowest.
* Buyer utility is u_i(v) = v_i . x_i(v) - p_i(v).
* An *opponent profile* for buyer i is the full profile with position i
  removed, in buyer order.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Iterator, Mapping, Sequence

from .errors import (
    DimensionMismatch,
    DuplicateSupportVector,
    MissingZeroType,
    NegativeValue,
    NonUnitMass,
    ZeroMassNonzeroType,
)

Profile = tuple[int, ...]

DS = "ds"
BAYES = "bayes"


def rat(x) -> Fraction:
    """Parse a rational from an int, Fraction, or 'p/q' / 'n' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"not a rational: {x!r}")


def rat_str(q: Fraction) -> str:
    """Render a rational as 'p/q', or bare 'p' when the denominator is 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class NegInfType:
    """Sentinel ordered below every rational; marks unbounded-below
    virtual values.  Compares equal only to itself."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "-inf"

    def __lt__(self, other):
        return not isinstance(other, NegInfType)

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return isinstance(other, NegInfType)

    def __eq__(self, other):
        return isinstance(other, NegInfType)

    def __hash__(self):
        return hash("NEG_INF")


NEG_INF = NegInfType()


# ---------------------------------------------------------------------------
# Instance


@dataclass(frozen=True)
class Instance:
    """A finite multi-item auction environment.

    supports[i][t][j] is buyer i's t-th value vector, coordinate j.
    probs[i][t] is the prior mass of that vector.  The prior is a product
    measure across buyers.  Construct through validate_instance; the
    constructor itself performs no checking.
    """

    n: int
    m: int
    supports: tuple[tuple[tuple[Fraction, ...], ...], ...]
    probs: tuple[tuple[Fraction, ...], ...]

    # -- sizes and iteration ------------------------------------------------

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.supports)

    @property
    def profile_count(self) -> int:
        return prod(self.sizes)

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(*(range(k) for k in self.sizes))

    def rank(self, profile: Profile) -> int:
        r = 0
        for k, t in zip(self.sizes, profile):
            r = r * k + t
        return r

    # -- per-buyer access ---------------------------------------------------

    def value(self, i: int, t: int) -> tuple[Fraction, ...]:
        return self.supports[i][t]

    def mu_i(self, i: int, t: int) -> Fraction:
        return self.probs[i][t]

    def zero_index(self, i: int) -> int | None:
        zero = (Fraction(0),) * self.m
        for t, vec in enumerate(self.supports[i]):
            if vec == zero:
                return t
        return None

    # -- opponent profiles --------------------------------------------------

    def others_sizes(self, i: int) -> tuple[int, ...]:
        return tuple(k for b, k in enumerate(self.sizes) if b != i)

    def others_count(self, i: int) -> int:
        return prod(self.others_sizes(i))

    def others_profiles(self, i: int) -> Iterator[Profile]:
        return itertools.product(*(range(k) for k in self.others_sizes(i)))

    def others_rank(self, i: int, vm: Profile) -> int:
        r = 0
        for k, t in zip(self.others_sizes(i), vm):
            r = r * k + t
        return r

    def drop(self, i: int, profile: Profile) -> Profile:
        return profile[:i] + profile[i + 1:]

    def insert(self, i: int, t: int, vm: Profile) -> Profile:
        return vm[:i] + (t,) + vm[i:]

    # -- measures -----------------------------------------------------------

    def mu(self, profile: Profile) -> Fraction:
        p = Fraction(1)
        for i, t in enumerate(profile):
            p *= self.probs[i][t]
        return p

    def mu_minus(self, i: int, vm: Profile) -> Fraction:
        p = Fraction(1)
        others = [b for b in range(self.n) if b != i]
        for b, t in zip(others, vm):
            p *= self.probs[b][t]
        return p

    # -- serialization ------------------------------------------------------

    def to_data(self) -> dict:
        return {
            "buyers": self.n,
            "items": self.m,
            "supports": [
                [[rat_str(c) for c in vec] for vec in sup] for sup in self.supports
            ],
            "probs": [[rat_str(q) for q in ps] for ps in self.probs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_data(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        canon = json.dumps(self.to_data(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def validate_instance(
    data: Mapping,
    *,
    augment_zero: bool | None = None,
    strict: bool = False,
) -> Instance:
    """Validate raw instance data and return an Instance.

    data carries 'buyers', 'items', 'supports', 'probs', and optionally
    'augment_zero'.  Rationals may be ints, Fractions, or 'p/q' strings.
    The keyword overrides the file's augment flag when not None.  With
    strict=True the standing assumption mu_i(v) > 0 for v != 0 is
    enforced.

    Every support must contain the all-zeros vector; with augmentation
    on, it is prepended at mass 0 where absent.
    """
    try:
        n = int(data["buyers"])
        m = int(data["items"])
        raw_supports = data["supports"]
        raw_probs = data["probs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatch(f"malformed instance data: {exc}") from exc
    if augment_zero is None:
        augment_zero = bool(data.get("augment_zero", False))
    if n < 1 or m < 1:
        raise DimensionMismatch("need at least one buyer and one item")
    if len(raw_supports) != n or len(raw_probs) != n:
        raise DimensionMismatch(
            f"expected {n} supports and prob lists, "
            f"got {len(raw_supports)} and {len(raw_probs)}"
        )

    supports: list[tuple[tuple[Fraction, ...], ...]] = []
    probs: list[tuple[Fraction, ...]] = []
    zero = (Fraction(0),) * m
    for i in range(n):
        sup = [tuple(rat(c) for c in vec) for vec in raw_supports[i]]
        ps = [rat(q) for q in raw_probs[i]]
        if len(sup) != len(ps):
            raise DimensionMismatch(
                f"buyer {i}: {len(sup)} support vectors but {len(ps)} masses"
            )
        if not sup:
            raise DimensionMismatch(f"buyer {i}: empty support")
        for vec in sup:
            if len(vec) != m:
                raise DimensionMismatch(
                    f"buyer {i}: value vector of length {len(vec)}, expected {m}"
                )
            for c in vec:
                if c < 0:
                    raise NegativeValue(f"buyer {i}: negative coordinate {rat_str(c)}")
        for q in ps:
            if q < 0:
                raise NegativeValue(f"buyer {i}: negative mass {rat_str(q)}")
        if len(set(sup)) != len(sup):
            raise DuplicateSupportVector(f"buyer {i}: repeated support vector")
        if sum(ps) != 1:
            raise NonUnitMass(
                f"buyer {i}: masses sum to {rat_str(sum(ps))}, expected 1"
            )
        if zero not in sup:
            if augment_zero:
                sup = [zero] + sup
                ps = [Fraction(0)] + ps
            else:
                raise MissingZeroType(
                    f"buyer {i}: support lacks the zero vector "
                    "(pass augment_zero to add it at mass 0)"
                )
        if strict:
            for vec, q in zip(sup, ps):
                if vec != zero and q == 0:
                    raise ZeroMassNonzeroType(
                        f"buyer {i}: nonzero vector at zero mass under strict validation"
                    )
        supports.append(tuple(sup))
        probs.append(tuple(ps))
    return Instance(n=n, m=m, supports=tuple(supports), probs=tuple(probs))


def load_instance(path, *, augment_zero: bool | None = None, strict: bool = False) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return validate_instance(data, augment_zero=augment_zero, strict=strict)


def profile_prob(instance: Instance, profile: Profile) -> Fraction:
    """mu(v): product of per-buyer masses at the profile."""
    if len(profile) != instance.n:
        raise DimensionMismatch("profile length != buyer count")
    for i, t in enumerate(profile):
        if not 0 <= t < instance.sizes[i]:
            raise DimensionMismatch(f"profile index {t} out of range for buyer {i}")
    return instance.mu(profile)


# ---------------------------------------------------------------------------
# Mechanism


@dataclass(frozen=True)
class Mechanism:
    """Allocation and payments indexed by full profile.

    alloc[r][i][j]: probability buyer i gets item j at the profile of
    rank r.  pay[r][i]: buyer i's payment there.  One structure serves
    both forms; form records which constraint family it targets.
    """

    form: str
    alloc: tuple[tuple[tuple[Fraction, ...], ...], ...]
    pay: tuple[tuple[Fraction, ...], ...]

    def x(self, instance: Instance, i: int, j: int, profile: Profile) -> Fraction:
        return self.alloc[instance.rank(profile)][i][j]

    def p(self, instance: Instance, i: int, profile: Profile) -> Fraction:
        return self.pay[instance.rank(profile)][i]

    def utility(self, instance: Instance, i: int, profile: Profile) -> Fraction:
        """u_i(v) = v_i . x_i(v) - p_i(v)."""
        r = instance.rank(profile)
        vec = instance.value(i, profile[i])
        return sum(
            (vec[j] * self.alloc[r][i][j] for j in range(instance.m)), Fraction(0)
        ) - self.pay[r][i]

    def deviation_utility(
        self, instance: Instance, i: int, profile: Profile, t_report: int
    ) -> Fraction:
        """Utility of buyer i whose true type is profile[i] reporting t_report."""
        lie = instance.insert(i, t_report, instance.drop(i, profile))
        r = instance.rank(lie)
        vec = instance.value(i, profile[i])
        return sum(
            (vec[j] * self.alloc[r][i][j] for j in range(instance.m)), Fraction(0)
        ) - self.pay[r][i]

    def sold(self, instance: Instance, j: int, profile: Profile) -> Fraction:
        """s^j(v) = sum_i x_i^j(v)."""
        r = instance.rank(profile)
        return sum((self.alloc[r][i][j] for i in range(instance.n)), Fraction(0))

    def interim_utility(self, instance: Instance, i: int, t: int) -> Fraction:
        """Expected utility over opponents' prior at true type t, truthful."""
        total = Fraction(0)
        for vm in instance.others_profiles(i):
            w = instance.mu_minus(i, vm)
            if w:
                total += w * self.utility(instance, i, instance.insert(i, t, vm))
        return total

    def interim_deviation_utility(
        self, instance: Instance, i: int, t: int, t_report: int
    ) -> Fraction:
        total = Fraction(0)
        for vm in instance.others_profiles(i):
            w = instance.mu_minus(i, vm)
            if w:
                total += w * self.deviation_utility(
                    instance, i, instance.insert(i, t, vm), t_report
                )
        return total

    def revenue(self, instance: Instance) -> Fraction:
        total = Fraction(0)
        for profile in instance.profiles():
            w = instance.mu(profile)
            if w:
                total += w * sum(self.pay[instance.rank(profile)], start=Fraction(0))
        return total


def zero_mechanism(instance: Instance, form: str = DS) -> Mechanism:
    zero_row = tuple(
        tuple(Fraction(0) for _ in range(instance.m)) for _ in range(instance.n)
    )
    zero_pay = tuple(Fraction(0) for _ in range(instance.n))
    count = instance.profile_count
    return Mechanism(
        form=form,
        alloc=tuple(zero_row for _ in range(count)),
        pay=tuple(zero_pay for _ in range(count)),
    )


# ---------------------------------------------------------------------------
# Primal slacks


@dataclass(frozen=True)
class PrimalSlacks:
    """Constraint gaps of a mechanism, reported even when negative.

    DS form: a[i][r][t'] is the truth-telling margin of buyer i at the
    profile of rank r against reporting t' (0 on the diagonal); b[i][r]
    is ex-post utility; c[j][r] is unsold supply.  Bayesian form: a and b
    are interim, indexed by own type instead of full profile.
    """

    form: str
    a: tuple
    b: tuple
    c: tuple

    def min_entry(self) -> Fraction:
        worst = Fraction(0)
        for fam in (self.a, self.b, self.c):
            for level in fam:
                for entry in level:
                    if isinstance(entry, tuple):
                        for e in entry:
                            worst = min(worst, e)
                    else:
                        worst = min(worst, entry)
        return worst

    @property
    def feasible(self) -> bool:
        return self.min_entry() >= 0


def _check_dims(instance: Instance, mechanism: Mechanism) -> None:
    count = instance.profile_count
    if len(mechanism.alloc) != count or len(mechanism.pay) != count:
        raise DimensionMismatch("mechanism profile count != instance profile count")
    for row, prow in zip(mechanism.alloc, mechanism.pay):
        if len(row) != instance.n or len(prow) != instance.n:
            raise DimensionMismatch("mechanism buyer dimension mismatch")
        for cell in row:
            if len(cell) != instance.m:
                raise DimensionMismatch("mechanism item dimension mismatch")


def mechanism_slacks(instance: Instance, mechanism: Mechanism) -> PrimalSlacks:
    """Evaluate every constraint gap of the mechanism.

    a entries are truth minus lie (the negated gain from deviating), b
    entries are (interim) utilities, c entries unsold supply.  Negative
    entries are reported as-is; feasibility is a separate question.
    """
    _check_dims(instance, mechanism)
    n, m = instance.n, instance.m
    c = tuple(
        tuple(
            Fraction(1) - mechanism.sold(instance, j, profile)
            for profile in instance.profiles()
        )
        for j in range(m)
    )
    if mechanism.form == BAYES:
        a = tuple(
            tuple(
                tuple(
                    (
                        mechanism.interim_utility(instance, i, t)
                        - mechanism.interim_deviation_utility(instance, i, t, t2)
                        if t2 != t
                        else Fraction(0)
                    )
                    for t2 in range(instance.sizes[i])
                )
                for t in range(instance.sizes[i])
            )
            for i in range(n)
        )
        b = tuple(
            tuple(
                mechanism.interim_utility(instance, i, t)
                for t in range(instance.sizes[i])
            )
            for i in range(n)
        )
    else:
        a = tuple(
            tuple(
                tuple(
                    (
                        mechanism.utility(instance, i, profile)
                        - mechanism.deviation_utility(instance, i, profile, t2)
                        if t2 != profile[i]
                        else Fraction(0)
                    )
                    for t2 in range(instance.sizes[i])
                )
                for profile in instance.profiles()
            )
            for i in range(n)
        )
        b = tuple(
            tuple(
                mechanism.utility(instance, i, profile)
                for profile in instance.profiles()
            )
            for i in range(n)
        )
    return PrimalSlacks(form=mechanism.form, a=a, b=b, c=c)


def mechanism_feasible(instance: Instance, mechanism: Mechanism) -> bool:
    """Bounds plus nonnegative slacks in the mechanism's own form."""
    for row in mechanism.alloc:
        for cell in row:
            for x in cell:
                if x < 0 or x > 1:
                    return False
    for prow in mechanism.pay:
        for p in prow:
            if p < 0:
                return False
    return mechanism_slacks(instance, mechanism).feasible


# ---------------------------------------------------------------------------
# Dual solutions


@dataclass(frozen=True)
class DualSolutionDS:
    """Multipliers of the dominant-strategy dual.

    zeta[i][t][t'][s]: weight on the constraint "true t, report t'" on
    the opponent slice of rank s (diagonal t==t' held at 0).
    eta[i][r]: participation weight at the profile of rank r.
    xi[j][r]: the per-(item, profile) dual objective terms.
    alpha[i][j][r] and beta[i][r] are the dual constraint slacks.
    """

    zeta: tuple
    eta: tuple
    xi: tuple
    alpha: tuple
    beta: tuple

    def phi_star(self, instance: Instance, i: int, j: int, profile: Profile) -> Fraction:
        """Expected virtual value: the dual coefficient facing x_i^j(v)."""
        t = profile[i]
        s = instance.others_rank(i, instance.drop(i, profile))
        r = instance.rank(profile)
        vt = instance.value(i, t)[j]
        total = self.eta[i][r] * vt
        for t2 in range(instance.sizes[i]):
            if t2 == t:
                continue
            total += self.zeta[i][t][t2][s] * vt
            total -= self.zeta[i][t2][t][s] * instance.value(i, t2)[j]
        return total

    def psi(self, instance: Instance, i: int, profile: Profile) -> Fraction:
        """The dual coefficient facing p_i(v)."""
        t = profile[i]
        s = instance.others_rank(i, instance.drop(i, profile))
        r = instance.rank(profile)
        total = self.eta[i][r]
        for t2 in range(instance.sizes[i]):
            if t2 == t:
                continue
            total += self.zeta[i][t][t2][s] - self.zeta[i][t2][t][s]
        return total

    def objective(self) -> Fraction:
        return sum((x for col in self.xi for x in col), Fraction(0))

    def is_feasible(self) -> bool:
        for fam in (self.zeta, self.eta, self.xi, self.alpha, self.beta):
            if _any_negative(fam):
                return False
        return True


@dataclass(frozen=True)
class DualSolutionBayes:
    """Multipliers of the Bayesian dual; zeta and eta are per-type."""

    zeta: tuple
    eta: tuple
    xi: tuple
    alpha: tuple
    beta: tuple

    def phibar_star(self, instance: Instance, i: int, j: int, t: int) -> Fraction:
        vt = instance.value(i, t)[j]
        total = self.eta[i][t] * vt
        for t2 in range(instance.sizes[i]):
            if t2 == t:
                continue
            total += self.zeta[i][t][t2] * vt
            total -= self.zeta[i][t2][t] * instance.value(i, t2)[j]
        return total

    def psibar(self, instance: Instance, i: int, t: int) -> Fraction:
        total = self.eta[i][t]
        for t2 in range(instance.sizes[i]):
            if t2 == t:
                continue
            total += self.zeta[i][t][t2] - self.zeta[i][t2][t]
        return total

    def objective(self) -> Fraction:
        return sum((x for col in self.xi for x in col), Fraction(0))

    def is_feasible(self) -> bool:
        for fam in (self.zeta, self.eta, self.xi, self.alpha, self.beta):
            if _any_negative(fam):
                return False
        return True


def _any_negative(nested) -> bool:
    if isinstance(nested, tuple):
        return any(_any_negative(x) for x in nested)
    return nested < 0


def ds_dual_from_multipliers(
    instance: Instance, zeta, eta, xi
) -> DualSolutionDS:
    """Assemble a DS dual solution, deriving the alpha/beta slacks."""
    stub = DualSolutionDS(zeta=zeta, eta=eta, xi=xi, alpha=(), beta=())
    alpha = tuple(
        tuple(
            tuple(
                xi[j][instance.rank(profile)]
                - stub.phi_star(instance, i, j, profile)
                for profile in instance.profiles()
            )
            for j in range(instance.m)
        )
        for i in range(instance.n)
    )
    beta = tuple(
        tuple(
            stub.psi(instance, i, profile) - instance.mu(profile)
            for profile in instance.profiles()
        )
        for i in range(instance.n)
    )
    return DualSolutionDS(zeta=zeta, eta=eta, xi=xi, alpha=alpha, beta=beta)


def bayes_dual_from_multipliers(
    instance: Instance, zeta, eta, xi
) -> DualSolutionBayes:
    """Assemble a Bayesian dual solution, deriving the alpha/beta slacks."""
    stub = DualSolutionBayes(zeta=zeta, eta=eta, xi=xi, alpha=(), beta=())
    alpha = tuple(
        tuple(
            tuple(
                xi[j][instance.rank(profile)]
                - instance.mu_minus(i, instance.drop(i, profile))
                * stub.phibar_star(instance, i, j, profile[i])
                for profile in instance.profiles()
            )
            for j in range(instance.m)
        )
        for i in range(instance.n)
    )
    beta = tuple(
        tuple(
            instance.mu_minus(i, instance.drop(i, profile))
            * stub.psibar(instance, i, profile[i])
            - instance.mu(profile)
            for profile in instance.profiles()
        )
        for i in range(instance.n)
    )
    return DualSolutionBayes(zeta=zeta, eta=eta, xi=xi, alpha=alpha, beta=beta)


# ---------------------------------------------------------------------------
# Virtual values and reports


@dataclass(frozen=True)
class VirtualValueTable:
    """Per (buyer, item, profile) virtual values.

    values[i][j][r] is a Fraction or NEG_INF.  Bayesian-form tables are
    constant across opponent indices by construction.
    """

    form: str
    values: tuple

    def entry(self, instance: Instance, i: int, j: int, profile: Profile):
        return self.values[i][j][instance.rank(profile)]


@dataclass(frozen=True)
class RevenueReport:
    """The three optimal revenues with exact equality flags."""

    brev: Fraction
    drev: Fraction
    srev: Fraction
    brev_eq_drev: bool
    drev_eq_srev: bool
    srev_eq_brev: bool
    ai_witness: DualSolutionDS | None = None
    findings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.brev >= self.drev >= self.srev):
            raise AssertionError(
                "revenue ordering violated: "
                f"brev={rat_str(self.brev)} drev={rat_str(self.drev)} "
                f"srev={rat_str(self.srev)}"
            )


def make_revenue_report(
    brev: Fraction,
    drev: Fraction,
    srev: Fraction,
    ai_witness: DualSolutionDS | None = None,
    findings: Sequence[str] = (),
) -> RevenueReport:
    return RevenueReport(
        brev=brev,
        drev=drev,
        srev=srev,
        brev_eq_drev=brev == drev,
        drev_eq_srev=drev == srev,
        srev_eq_brev=srev == brev,
        ai_witness=ai_witness,
        findings=tuple(findings),
    )
