"""Guaranteed length sets, the sufficient-condition ladder and oracle verification."""

from __future__ import annotations

import enum
from collections.abc import Iterable
from dataclasses import dataclass, field
from math import gcd

from .builder import GenSum
from .constructive import (
    ConstructionTrace,
    constructive_certificates,
    singular_families,
)
from .digraph import Cover, Cycle, Spectrum, cycle_cover, is_strong, validate_cycle
from .errors import NotStrongError, PreconditionError
from .structure import (
    CycleFound,
    Singularity,
    SingularityReport,
    has_good_cycle,
    has_good_pair,
    propagate_forbidden_length,
    singular_status,
    singularity_report,
)

SCHEMA = "gsl-report/1"
DEFAULT_BUDGET = 14


class Verdict(str, enum.Enum):
    VERTEX_PANCYCLIC = "VertexPancyclic"
    PANCYCLIC = "Pancyclic"
    GUARANTEED_ONLY = "GuaranteedOnly"


RUNGS = (
    "no-good-pair",
    "no-good-cycle",
    "singular",
    "d-in-1-2",
    "d-non-singular",
    "d*-singular",
    "none",
)


def guaranteed_lengths_pair(n: int, m: int) -> frozenset[int]:
    """Lengths present in every strong sum of two Hamiltonian digraphs of orders n, m.

    When gcd(n, m) <= 2 every such sum is pancyclic, so the whole range is
    guaranteed; otherwise the set is [3, n+1], the lengths n + i*d and n+m.
    """
    if n < m:
        n, m = m, n
    if m < 2:
        raise PreconditionError("summand orders must be at least 2")
    d = gcd(n, m)
    if d <= 2:
        return frozenset(range(3, n + m + 1))
    lengths = set(range(3, n + 2)) | {n + i * d for i in range(m // d)} | {n + m}
    return frozenset(ln for ln in lengths if ln >= 3)


def guaranteed_lengths_k(orders: Iterable[int]) -> frozenset[int]:
    orders = list(orders)
    if len(orders) < 2:
        raise PreconditionError("need at least two summands")
    if min(orders) < 2:
        raise PreconditionError("summand orders must be at least 2")
    total = sum(orders)
    return frozenset(range(3, total - min(orders) + 2)) | {total}


def guaranteed_lengths(g: GenSum) -> frozenset[int]:
    if g.k == 2:
        return guaranteed_lengths_pair(*g.orders)
    return guaranteed_lengths_k(g.orders)


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    rung: str
    guaranteed: frozenset[int]
    actual: Spectrum | None = None
    witnesses: dict[int, Cycle] = field(default_factory=dict)
    omissions: frozenset[tuple[int, int]] = frozenset()


def ladder(g: GenSum, sing: SingularityReport | None = None) -> str:
    """Name of the first sufficient condition that holds (``"none"`` if none does)."""
    if g.k == 2 and not has_good_pair(g, 0, 1):
        return "no-good-pair"
    if not has_good_cycle(g):
        return "no-good-cycle"
    if g.k != 2:
        return "none"
    report = sing or singularity_report(g)
    if report.has_singular:
        return "singular"
    if report.d <= 2:
        return "d-in-1-2"
    if report.has_d_nonsingular:
        return "d-non-singular"
    if report.has_dstar_singular:
        return "d*-singular"
    return "none"


def verdict_for(rung: str) -> Verdict:
    if rung in ("no-good-pair", "no-good-cycle"):
        return Verdict.VERTEX_PANCYCLIC
    if rung == "none":
        return Verdict.GUARANTEED_ONLY
    return Verdict.PANCYCLIC


def classify_fast(g: GenSum) -> Classification:
    """Ladder-only classification; never runs the exhaustive oracle."""
    if not is_strong(g.compiled):
        raise NotStrongError("the sum is not strong, so no classification theorem applies")
    rung = ladder(g)
    return Classification(verdict_for(rung), rung, guaranteed_lengths(g))


def classify(g: GenSum, budget: int = DEFAULT_BUDGET) -> Classification:
    """Ladder verdict plus the oracle spectrum, witnesses and omissions when within budget."""
    fast = classify_fast(g)
    if g.order > budget:
        return fast
    cover = cycle_cover(g.compiled)
    spectrum = cover.spectrum
    return Classification(
        fast.verdict, fast.rung, fast.guaranteed, spectrum, dict(spectrum.witnesses), cover.omissions
    )


# -- verification ----------------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    kind: str
    detail: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.detail}


VIOLATION = "THEOREM-VIOLATION"


@dataclass
class VerificationReport:
    instance: dict
    order: int
    guaranteed: frozenset[int]
    guaranteed_k: frozenset[int]
    verdict: Verdict
    rung: str
    oracle_skipped: bool
    spectrum: frozenset[int] | None = None
    vertex_pancyclic: bool | None = None
    omissions: frozenset[tuple[int, int]] = frozenset()
    witnesses: dict[int, Cycle] = field(default_factory=dict)
    certificates: dict[int, ConstructionTrace] = field(default_factory=dict)
    construction_path: list[str] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)
    violations: list[Finding] = field(default_factory=list)
    open_problem: Finding | None = None

    @property
    def flags(self) -> list[str]:
        return ["order-2 summand"] if 2 in self.instance["orders"] else []

    @property
    def pancyclic(self) -> bool | None:
        if self.spectrum is None:
            return None
        return self.spectrum == frozenset(range(3, self.order + 1))

    @property
    def missing(self) -> frozenset[int]:
        if self.spectrum is None:
            return frozenset()
        return frozenset(range(3, self.order + 1)) - self.spectrum

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "instance": self.instance,
            "order": self.order,
            "verdict": self.verdict.value,
            "rung": self.rung,
            "guaranteed": sorted(self.guaranteed),
            "guaranteed_k": sorted(self.guaranteed_k),
            "oracle_skipped": self.oracle_skipped,
            "flags": self.flags,
            "spectrum": None if self.spectrum is None else sorted(self.spectrum),
            "missing": sorted(self.missing),
            "pancyclic": self.pancyclic,
            "vertex_pancyclic": self.vertex_pancyclic,
            "omissions": sorted([list(o) for o in self.omissions]),
            "witnesses": {str(k): list(c) for k, c in sorted(self.witnesses.items())},
            "certificates": {str(k): t.to_dict() for k, t in sorted(self.certificates.items())},
            "construction_path": self.construction_path,
            "checks": dict(sorted(self.checks.items())),
            "violations": [f.to_dict() for f in self.violations],
            "open_problem": None if self.open_problem is None else self.open_problem.to_dict(),
        }




def verify_instance(
    g: GenSum,
    budget: int = DEFAULT_BUDGET,
    *,
    certificates: bool = True,
    propagation: bool = True,
) -> VerificationReport:
    """Adjudicate every applicable guarantee for ``g`` against the oracle.

    ``checks`` maps a check name to whether it was satisfied; only checks whose
    hypothesis holds for this instance appear.  A failed check also produces a
    THEOREM-VIOLATION finding.  Above ``budget`` vertices the oracle is skipped
    and only the constructive certificates are validated.
    """
    if not is_strong(g.compiled):
        raise NotStrongError("the sum is not strong, so no classification theorem applies")
    sing = singularity_report(g) if g.k == 2 else None
    rung = ladder(g, sing)
    report = VerificationReport(
        instance=g.instance_id(),
        order=g.order,
        guaranteed=guaranteed_lengths(g),
        guaranteed_k=guaranteed_lengths_k(g.orders),
        verdict=verdict_for(rung),
        rung=rung,
        oracle_skipped=g.order > budget,
    )

    def check(name: str, ok: bool, **detail) -> None:
        report.checks[name] = ok
        if not ok:
            report.violations.append(Finding(VIOLATION, {"check": name, **detail}))

    cover: Cover | None = None
    if not report.oracle_skipped:
        cover = cycle_cover(g.compiled)
        report.spectrum = cover.spectrum.lengths
        report.witnesses = dict(cover.witnesses)
        report.omissions = cover.omissions
        report.vertex_pancyclic = not report.omissions
        full = frozenset(range(3, g.order + 1))
        pancyclic = report.spectrum == full
        check("hamiltonian", g.order in report.spectrum)
        check(
            "guaranteed",
            report.guaranteed <= report.spectrum,
            missing=sorted(report.guaranteed - report.spectrum),
        )
        if report.verdict is Verdict.VERTEX_PANCYCLIC:
            check("ladder", report.vertex_pancyclic, rung=rung)
        elif report.verdict is Verdict.PANCYCLIC:
            check("ladder", pancyclic, rung=rung, missing=sorted(report.missing))
        _predicate_checks(g, report, check, pancyclic, sing)

    if certificates:
        run = constructive_certificates(g)
        report.certificates, report.construction_path = run.traces, run.cases
        bad = [ln for ln, t in report.certificates.items() if not t.is_valid(g)]
        check("certificates", not bad, lengths=bad)
        if g.k == 2:
            _singular_family_check(g, check)
    if propagation and g.k == 2:
        _propagation_check(g, report, check)
    report.open_problem = open_problem_scan(report)
    return report


def _predicate_checks(
    g: GenSum, report: VerificationReport, check, pancyclic: bool, sing: SingularityReport | None
) -> None:
    """Each sufficient condition checked on its own, not just the first rung that fires."""
    if g.k == 2 and not has_good_pair(g, 0, 1):
        check("no-good-pair", bool(report.vertex_pancyclic))
    if not has_good_cycle(g):
        check("no-good-cycle", bool(report.vertex_pancyclic))
    if sing is None:
        return
    if sing.has_singular:
        check("singular", pancyclic, missing=sorted(report.missing))
    if sing.d <= 2:
        check("d-in-1-2", pancyclic, missing=sorted(report.missing))
    if sing.has_d_nonsingular:
        check("d-non-singular", pancyclic, missing=sorted(report.missing))
    if sing.has_dstar_singular:
        check("d*-singular", pancyclic, missing=sorted(report.missing))


def _singular_family_check(g: GenSum, check) -> None:
    """alpha and beta families of every singular vertex cover their full ranges."""
    ok, failures = True, []
    for v in range(g.order):
        side = g.summand_of(v)
        if _status(g, v) is Singularity.NON:
            continue
        n, m = g.orders[side], g.orders[1 - side]
        wanted = set(range(3, m + 3)) | set(range(n + 1, n + m + 1))
        traces = [t for t in singular_families(g, v) if t.pattern in ("alpha", "beta")]
        got = {t.length for t in traces if t.is_valid(g)}
        valid = all(t.is_valid(g) for t in traces)
        if not valid or not wanted <= got:
            ok = False
            failures.append({"vertex": v, "uncovered": sorted(wanted - got)})
    if failures or any(_status(g, v) is not Singularity.NON for v in range(g.order)):
        check("singular-families", ok, failures=failures)


def _status(g: GenSum, v: int) -> Singularity:
    return singular_status(g, v, 1 - g.summand_of(v))


def _propagation_check(g: GenSum, report: VerificationReport, check) -> None:
    bad = []
    for length in range(3, g.order + 1):
        outcome = propagate_forbidden_length(g, length)
        if not isinstance(outcome, CycleFound):
            continue
        sound = len(outcome.cycle) == length and validate_cycle(g.compiled, outcome.cycle)
        if report.spectrum is not None and length not in report.spectrum:
            sound = False
        if not sound:
            bad.append(length)
    check("propagation", not bad, lengths=bad)


def open_problem_scan(report: VerificationReport) -> Finding | None:
    """Q1: pancyclic but not vertex-pancyclic.  Q2: guarantees met but not pancyclic."""
    if report.spectrum is None:
        return None
    instance = report.instance
    if report.pancyclic and not report.vertex_pancyclic:
        witness = min(report.omissions)
        return Finding(
            "Q1",
            {"instance": instance, "omission": list(witness), "omissions": len(report.omissions)},
        )
    hamiltonian = report.order in report.spectrum
    if hamiltonian and report.guaranteed <= report.spectrum and not report.pancyclic:
        return Finding("Q2", {"instance": instance, "missing": sorted(report.missing)})
    return None
