"""Validity of a system as named, individually checkable clauses.

The well-formedness condition on states is a conjunction of clauses; each
clause is registered separately so the verifier can check exactly one
hypothesis per proof obligation instead of dragging the full conjunction
around.  The shipped registry carries two families:

* ``allMapsCorrect.<mapping>`` -- each of the five mapping components is a
  partial function;
* ``notDupPerm.{1,2,3}`` -- app-defined permissions are uniquely
  identified: two defined permissions with the same id are the same
  permission defined by the same app.  Split by defining source: both from
  the defPerms mapping (1), both from the system image (2), one from each (3).

The registry is open: callers may check any sequence of clauses, so models
extending this one can register more without touching this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .kernel import forall_in, is_pfun
from .model import System, get_component


@dataclass(frozen=True)
class InvariantClause:
    id: str
    eval: Callable[[System], bool]
    description: str


MAPPING_COMPONENTS = ("manifest", "cert", "defPerms", "grantedPermGroups", "perms")


def all_maps_correct_clauses() -> tuple[InvariantClause, ...]:
    """One partial-function clause per mapping component."""
    def make(name: str) -> InvariantClause:
        return InvariantClause(
            id=f"allMapsCorrect.{name}",
            eval=lambda sys, _n=name: is_pfun(get_component(sys, _n)),
            description=f"the {name} mapping has no repeated keys",
        )
    return tuple(make(n) for n in MAPPING_COMPONENTS)


# The notDupPerm clauses are written with the kernel's restricted
# quantifiers, nesting exactly as the per-source split reads: quantify the
# (app, perm-set) pairs over each source, then the permissions over the
# bound sets, with accessor bindings naming ids along the way.

def _not_dup_perm_1(sys: System) -> bool:
    dp = sys.environment.defPerms
    return forall_in(dp, lambda e1: forall_in(dp, lambda e2: forall_in(
        e1[1], lambda p1, ip1: forall_in(
            e2[1],
            lambda p2, ip2: ip1 != ip2 or (p1 == p2 and e1[0] == e2[0]),
            bindings=(lambda p: p.id,)),
        bindings=(lambda p: p.id,))))


def _not_dup_perm_2(sys: System) -> bool:
    si = sys.environment.systemImage
    return forall_in(
        si,
        lambda s1, id1, l1: forall_in(
            si,
            lambda s2, id2, l2: forall_in(
                l1, lambda p1, ip1: forall_in(
                    l2,
                    lambda p2, ip2: ip1 != ip2 or (p1 == p2 and id1 == id2),
                    bindings=(lambda p: p.id,)),
                bindings=(lambda p: p.id,)),
            bindings=(lambda s: s.idSI, lambda s: s.defPermsSI)),
        bindings=(lambda s: s.idSI, lambda s: s.defPermsSI))


def _not_dup_perm_3(sys: System) -> bool:
    dp = sys.environment.defPerms
    si = sys.environment.systemImage
    return forall_in(dp, lambda e1: forall_in(
        si,
        lambda s2, id2, l2: forall_in(
            e1[1], lambda p1, ip1: forall_in(
                l2,
                lambda p2, ip2: ip1 != ip2 or (p1 == p2 and e1[0] == id2),
                bindings=(lambda p: p.id,)),
            bindings=(lambda p: p.id,)),
        bindings=(lambda s: s.idSI, lambda s: s.defPermsSI)))


def not_dup_perm_clauses() -> tuple[InvariantClause, ...]:
    return (
        InvariantClause("notDupPerm.1", _not_dup_perm_1,
                        "defPerms-defined permissions are uniquely identified"),
        InvariantClause("notDupPerm.2", _not_dup_perm_2,
                        "system-image-defined permissions are uniquely identified"),
        InvariantClause("notDupPerm.3", _not_dup_perm_3,
                        "defPerms and system-image definitions agree on shared ids"),
    )


def standard_clauses() -> tuple[InvariantClause, ...]:
    return all_maps_correct_clauses() + not_dup_perm_clauses()


def check_clauses(sys: System,
                  clauses: Optional[Sequence[InvariantClause]] = None) -> list[str]:
    """Ids of every registered clause that fails on sys."""
    if clauses is None:
        clauses = standard_clauses()
    return [c.id for c in clauses if not c.eval(sys)]


def valid_state(sys: System,
                clauses: Optional[Sequence[InvariantClause]] = None) -> bool:
    """Conjunction of all registered clauses."""
    return not check_clauses(sys, clauses)
