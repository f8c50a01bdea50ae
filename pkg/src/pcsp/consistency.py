"""k-strategies and the local-consistency fixed-point algorithm.

A k-strategy on (I, S) is a nonempty family of partial homomorphisms that is
closed under restrictions and has the extension property up to domain size k.
``compute_strategy`` starts from all partial homomorphisms with domain of size
at most k and removes violating maps until a fixed point; the result, if
nonempty, is the unique maximal k-strategy.  The classical name for this
procedure is (k-1)-consistency; we index by the strategy domain size k.
"""

from itertools import combinations, product as iproduct
from typing import Optional

from .core import Structure
from .errors import BudgetExceededError

DEFAULT_MAP_BUDGET = 2_000_000

# A partial map is a sorted tuple of (element, value) pairs.


def partial_map(pairs):
    return tuple(sorted(pairs))


def map_dict(h):
    return dict(h)


def is_partial_hom(h, instance: Structure, template: Structure) -> bool:
    dom = dict(h)
    for sym, tups in instance.relations:
        target = set(template.rel(sym))
        for t in tups:
            if all(x in dom for x in t):
                if tuple(dom[x] for x in t) not in target:
                    return False
    return True


def all_partial_homs(instance: Structure, template: Structure, k: int,
                     budget: Optional[int] = None):
    """All partial homomorphisms with |dom| <= min(k, |I|), as a set."""
    budget = budget or DEFAULT_MAP_BUDGET
    k = min(k, instance.n)
    count = sum(
        _comb(instance.n, i) * template.n ** i for i in range(k + 1))
    if count > budget:
        raise BudgetExceededError(
            "partial-map space of size %d exceeds budget %d" % (count, budget))
    out = set()
    for size in range(k + 1):
        for dom in combinations(range(instance.n), size):
            for vals in iproduct(range(template.n), repeat=size):
                h = tuple(zip(dom, vals))
                if is_partial_hom(h, instance, template):
                    out.add(h)
    return out


def _comb(n, i):
    from math import comb
    return comb(n, i)


def _restrictions(h):
    """All co-dimension-1 restrictions of h."""
    return [h[:i] + h[i + 1:] for i in range(len(h))]


def _violates(h, k, family, instance_n, template_n):
    """True if h lacks a restriction or a required extension in family."""
    for r in _restrictions(h):
        if r not in family:
            return True
    if len(h) < k:
        dom = set(x for x, _ in h)
        for x in range(instance_n):
            if x in dom:
                continue
            if not any(partial_map(h + ((x, a),)) in family
                       for a in range(template_n)):
                return True
    return False


def compute_strategy(instance: Structure, template: Structure, k: int,
                     budget: Optional[int] = None):
    """The maximal k-strategy on (I, S), or None if none exists.

    Returns a frozenset of partial maps (sorted (element, value) pair tuples).
    The fixed point is independent of removal order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if instance.signature != template.signature:
        raise ValueError("strategy requires a common signature")
    k = min(k, instance.n)
    family = all_partial_homs(instance, template, k, budget)
    if instance.n == 0:
        return frozenset({()}) if () in family else None

    # worklist removal: when h is removed, only its restrictions (which lose
    # an extension) and extensions (which lose a restriction) can newly fail
    work = set(family)
    while work:
        h = work.pop()
        if h not in family:
            continue
        if _violates(h, k, family, instance.n, template.n):
            family.discard(h)
            work.update(r for r in _restrictions(h) if r in family)
            if len(h) < k:
                dom = set(x for x, _ in h)
                for x in range(instance.n):
                    if x in dom:
                        continue
                    for a in range(template.n):
                        ext = partial_map(h + ((x, a),))
                        if ext in family:
                            work.add(ext)
            else:
                # extensions do not exist at max size; restrictions handled
                pass
            # removing h can also strand extensions of its restrictions; the
            # restrictions re-enqueued above cover the cascade
    if not family:
        return None
    return frozenset(family)


def leq_k(instance: Structure, template: Structure, k: int,
          budget: Optional[int] = None) -> bool:
    return compute_strategy(instance, template, k, budget) is not None


def is_strategy(family, instance: Structure, template: Structure, k: int) -> bool:
    """Check the two defining conditions directly."""
    if not family:
        return False
    fam = set(family)
    for h in fam:
        if not is_partial_hom(h, instance, template):
            return False
        if len(h) > k:
            return False
        for r in _restrictions(h):
            if r not in fam:
                return False
        if len(h) < k:
            dom = set(x for x, _ in h)
            for x in range(instance.n):
                if x in dom:
                    continue
                if not any(partial_map(h + ((x, a),)) in fam
                           for a in range(template.n)):
                    return False
    return True


def width_counterexample_check(left: Structure, right: Structure, k: int,
                               instances):
    """For each instance record (I <=_k S, I -> T present); flag violations.

    Returns a list of dicts; an entry is a counterexample when the instance
    passes k-consistency against S but has no homomorphism to T.
    """
    from .core import hom_search

    report = []
    for inst in instances:
        accepted = leq_k(inst, left, k)
        hom = hom_search(inst, right) is not None
        report.append({
            "instance": inst.name,
            "n": inst.n,
            "leq_k": accepted,
            "hom_right": hom,
            "counterexample": accepted and not hom,
        })
    return report


def format_strategy(family) -> str:
    lines = []
    for h in sorted(family):
        lines.append(" ".join("%d:%d" % (x, a) for x, a in h))
    return "\n".join(lines) + "\n"


def parse_strategy(text: str):
    out = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            out.add(())
            continue
        pairs = []
        for part in line.split():
            x, a = part.split(":")
            pairs.append((int(x), int(a)))
        out.add(partial_map(pairs))
    return frozenset(out)
