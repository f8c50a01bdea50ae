"""Structural template classification.

For a template pair (S, T) with S -> T, the test computes the set of binary
projections of the product of all relations of S and checks whether every
composition of two of them is the full square S x S.  If it is and T has no
reflexive point, the template cannot have sublinear width; if T has a
reflexive point the right-hand problem is trivial.  Anything else is
reported as inconclusive: the condition is sufficient, not necessary.
"""

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Optional, Tuple

from .core import Relation, Structure, compose, hom_search, product_relation, projection
from .polymorphisms import has_reflexive_tuple

TRIVIAL_RIGHT = "TrivialRight"
NO_SUBLINEAR_WIDTH = "NoSublinearWidth"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class TemplateReport:
    verdict: str
    condition_holds: bool
    right_reflexive: Optional[int]
    gset: Tuple[Relation, ...]
    failing_pair: Optional[Tuple[Relation, Relation]]
    degenerate: bool = False  # product arity < 2: no binary projections exist


def binary_projection_set(struct: Structure):
    """All pr_{i,j} of the product of the structure's relations, i != j.

    Returns (relations, degenerate); degenerate is True when the product
    arity is below 2, in which case the set is empty.
    """
    prod = product_relation(struct)
    if prod.arity < 2:
        return (), True
    out = []
    seen = set()
    for i in range(prod.arity):
        for j in range(prod.arity):
            if i == j:
                continue
            rel = projection(prod, (i, j))
            if rel.tuples not in seen:
                seen.add(rel.tuples)
                out.append(rel)
    return tuple(out), False


def composition_condition(struct: Structure):
    """Whether every U∘V over the binary projections is the full square.

    Returns (holds, first_failing_pair_or_None, gset, degenerate).
    """
    gset, degenerate = binary_projection_set(struct)
    full = set(iproduct(range(struct.n), repeat=2))
    for u, v in iproduct(gset, repeat=2):
        if set(compose(u, v).tuples) != full:
            return False, (u, v), gset, degenerate
    return True, None, gset, degenerate


def classify(left: Structure, right: Structure) -> TemplateReport:
    """Template verdict for a valid pair (a homomorphism left -> right)."""
    if left.signature != right.signature:
        raise ValueError("template sides must share a signature")
    if hom_search(left, right) is None:
        raise ValueError("not a valid template: no homomorphism to the right side")
    reflexive = has_reflexive_tuple(right)
    holds, failing, gset, degenerate = composition_condition(left)
    if reflexive is not None:
        verdict = TRIVIAL_RIGHT
    elif holds and not degenerate:
        verdict = NO_SUBLINEAR_WIDTH
    else:
        verdict = INCONCLUSIVE
    return TemplateReport(
        verdict=verdict,
        condition_holds=holds and not degenerate,
        right_reflexive=reflexive,
        gset=gset,
        failing_pair=failing,
        degenerate=degenerate,
    )


def report_dict(report: TemplateReport):
    """JSON-friendly rendering of a report."""
    out = {
        "verdict": report.verdict,
        "condition_holds": report.condition_holds,
        "right_reflexive": report.right_reflexive,
        "degenerate": report.degenerate,
        "gset": [sorted(r.tuples) for r in report.gset],
    }
    if report.failing_pair is not None:
        u, v = report.failing_pair
        out["failing_pair"] = [sorted(u.tuples), sorted(v.tuples)]
    return out
