"""State transitions of the permission model, as pre/post operations.

``grantAuto`` grants a dangerous permission without user interaction when
the user previously authorized the permission's group.  Its enabling
condition is five conjuncts, numbered in a fixed order so a failed
precondition always reports the first conjunct that broke:

1. the app's manifest lists the permission;
2. the permission is a system permission or is defined by some app;
3. the permission is not already granted to the app (and the app's entry
   in the granted-permissions mapping, if any, can be overridden, i.e. is
   not multiply keyed);
4. the protection level is dangerous;
5. the permission belongs to a group the user authorized for the app.

On success the only change is the granted-permissions mapping: the app's
image gains the permission (function override); every other state slot and
the whole environment stay untouched.

``grant``/``revoke``/``revokeGroup``/``hasPermission`` are named
counterparts whose behavior is only sketched by the platform description;
their exact semantics here is a design decision, flagged DESIGN DECISION in
each docstring so they can be re-aligned later:

* ``grant`` = conjuncts 1-4 (explicit user consent replaces the group
  authorization), and additionally records the permission's group, if any,
  as authorized for the app.
* ``revoke`` removes one *ungrouped* granted permission.
* ``revokeGroup`` withdraws a group authorization and removes every granted
  permission of that group.
* ``hasPermission`` is a read-only membership check.

Operations are total: preconditions that fail yield an error outcome
carrying the conjunct id, never an exception.  On relations that are not
partial functions at the relevant key, lookups read the union of images
(grantAuto's conjunct 3 instead blocks, because a multiply-keyed entry has
no functional override).  Valid states never hit these cases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .kernel import EMPTY, canonical_order, foplus, value_key
from .model import (
    DANGEROUS,
    Manifest,
    ParseError,
    Perm,
    State,
    System,
    _list,
    _need,
    _atom,
    perm_from_doc,
    perm_to_doc,
    state_from_doc,
    state_to_doc,
    system_perms_from_doc,
    usr_def_perm,
)

OP_NAMES = ("grantAuto", "grant", "revoke", "revokeGroup", "hasPermission")


@dataclass(frozen=True, slots=True)
class Action:
    """One requested transition, as it appears in scenario files."""

    op: str
    perm: Optional[Perm] = None
    app: Optional[str] = None
    group: Optional[str] = None


@dataclass(frozen=True, slots=True)
class Outcome:
    """Result of attempting an action: the next system, or the failed conjunct."""

    ok: bool
    system: Optional[System] = None
    failed_conjunct: Optional[int] = None
    result: Optional[bool] = None  # hasPermission answer


def _blocked(conjunct: int) -> Outcome:
    return Outcome(ok=False, failed_conjunct=conjunct)


def _images(rel, key) -> list:
    return [v for k, v in rel if k == key]


def _image_union(rel, key) -> frozenset:
    u = EMPTY
    for v in _images(rel, key):
        u = u | v
    return u


def _with_perms(sys: System, rel) -> System:
    st = sys.state
    return System(State(st.apps, st.alreadyVerified, st.grantedPermGroups, rel,
                        st.opaque5, st.opaque6, st.opaque7, st.opaque8,
                        st.opaque9),
                  sys.environment)


def _with_groups(sys: System, rel) -> System:
    st = sys.state
    return System(State(st.apps, st.alreadyVerified, rel, st.perms,
                        st.opaque5, st.opaque6, st.opaque7, st.opaque8,
                        st.opaque9),
                  sys.environment)


# -- grantAuto ----------------------------------------------------------------

GRANT_AUTO_CONJUNCTS = (1, 2, 3, 4, 5)


def pre_grant_auto(sp: frozenset, sys: System, p: Perm, a: str,
                   skip: tuple = ()) -> Optional[int]:
    """First failed conjunct id of grantAuto's enabling condition, or None.

    ``skip`` disables conjuncts by id; it exists for fault-injection
    experiments against the verifier and is never set in normal use.
    """
    st, env = sys.state, sys.environment
    if 1 not in skip:
        if not any(k == a and p in m.use for k, m in env.manifest):
            return 1
    if 2 not in skip:
        if p not in sp and not usr_def_perm(sys, p):
            return 2
    if 3 not in skip:
        granted = None
        for k, v in st.perms:
            if k == a:
                if granted is not None:  # multiply keyed: no functional override
                    return 3
                granted = v
        if granted is not None and p in granted:
            return 3
    if 4 not in skip:
        if p.level != DANGEROUS:
            return 4
    if 5 not in skip:
        if p.group is None:
            return 5
        if not any(k == a and p.group in gs for k, gs in st.grantedPermGroups):
            return 5
    return None


def _grant_perm(sys: System, p: Perm, a: str) -> System:
    new_image = _image_union(sys.state.perms, a) | {p}
    return _with_perms(sys, foplus(sys.state.perms, a, new_image))


def grant_auto(sp: frozenset, sys: System, p: Perm, a: str,
               skip: tuple = ()) -> Outcome:
    failed = pre_grant_auto(sp, sys, p, a, skip)
    if failed is not None:
        return _blocked(failed)
    return Outcome(ok=True, system=_grant_perm(sys, p, a))


# -- grant --------------------------------------------------------------------

def pre_grant(sp: frozenset, sys: System, p: Perm, a: str) -> Optional[int]:
    """DESIGN DECISION: grant requires conjuncts 1-4 of grantAuto only."""
    return pre_grant_auto(sp, sys, p, a, skip=(5,))


def grant(sp: frozenset, sys: System, p: Perm, a: str) -> Outcome:
    """Grant with explicit user consent.

    DESIGN DECISION: on success the permission is added to the app's
    granted set and, when grouped, the group is recorded as authorized so
    later requests from the same group auto-grant.
    """
    failed = pre_grant(sp, sys, p, a)
    if failed is not None:
        return _blocked(failed)
    nxt = _grant_perm(sys, p, a)
    if p.group is not None:
        groups = _image_union(nxt.state.grantedPermGroups, a) | {p.group}
        nxt = _with_groups(nxt, foplus(nxt.state.grantedPermGroups, a, groups))
    return Outcome(ok=True, system=nxt)


# -- revoke -------------------------------------------------------------------

def revoke(sys: System, p: Perm, a: str) -> Outcome:
    """Remove one ungrouped granted permission.

    DESIGN DECISION: conjunct 1 = the permission is ungrouped, conjunct 2 =
    it is currently granted to the app.  Grouped permissions can only be
    withdrawn through revokeGroup.
    """
    if p.group is not None:
        return _blocked(1)
    granted = _image_union(sys.state.perms, a)
    if p not in granted:
        return _blocked(2)
    nxt = _with_perms(sys, foplus(sys.state.perms, a, granted - {p}))
    return Outcome(ok=True, system=nxt)


# -- revokeGroup --------------------------------------------------------------

def revoke_group(sys: System, g: str, a: str) -> Outcome:
    """Withdraw a group authorization and all granted permissions of the group.

    DESIGN DECISION: conjunct 1 = the group is currently authorized for the
    app.  The app's granted set is rewritten only when it exists; revoking
    a group an app holds no permissions of leaves the mapping's keys alone.
    """
    if not any(k == a and g in gs for k, gs in sys.state.grantedPermGroups):
        return _blocked(1)
    groups = _image_union(sys.state.grantedPermGroups, a) - {g}
    nxt = _with_groups(sys, foplus(sys.state.grantedPermGroups, a, groups))
    granted = _images(sys.state.perms, a)
    if granted:
        kept = frozenset(q for q in _image_union(sys.state.perms, a) if q.group != g)
        nxt = _with_perms(nxt, foplus(nxt.state.perms, a, kept))
    return Outcome(ok=True, system=nxt)


# -- hasPermission ------------------------------------------------------------

def has_permission(sys: System, p: Perm, a: str) -> bool:
    """DESIGN DECISION: membership in the app's granted set; read-only."""
    return p in _image_union(sys.state.perms, a)


# -- dispatch -----------------------------------------------------------------

def step(sp: frozenset, sys: System, action: Action) -> Outcome:
    """Run one action against a system."""
    if action.op == "grantAuto":
        return grant_auto(sp, sys, action.perm, action.app)
    if action.op == "grant":
        return grant(sp, sys, action.perm, action.app)
    if action.op == "revoke":
        return revoke(sys, action.perm, action.app)
    if action.op == "revokeGroup":
        return revoke_group(sys, action.group, action.app)
    if action.op == "hasPermission":
        return Outcome(ok=True, system=sys,
                       result=has_permission(sys, action.perm, action.app))
    raise ValueError(f"unknown operation: {action.op!r}")


# -- operation registry --------------------------------------------------------
#
# The verifier works against Operation records rather than the functions
# above so externally defined operations (or deliberately broken variants)
# can be checked with the same machinery.  ``candidates`` enumerates, from a
# concrete system, every action parameterization that could possibly
# succeed; anything it omits is provably blocked by a precondition.

@dataclass(frozen=True)
class Operation:
    id: str
    mutating: bool
    uses_system_perms: bool
    apply: Callable[[frozenset, System, Action], Outcome]
    candidates: Callable[[System], Iterator[Action]]


def _manifest_candidates(op: str, sys: System,
                         dangerous_only: bool = True) -> Iterator[Action]:
    # conjunct 1 restricts (p, a) to manifest-listed pairs; conjunct 4
    # additionally blocks everything non-dangerous, so those pairs can be
    # pruned whenever conjunct 4 is active
    for a, m in sorted(sys.environment.manifest, key=value_key):
        if isinstance(m, Manifest):
            for p in canonical_order(m.use):
                if dangerous_only and p.level != DANGEROUS:
                    continue
                yield Action(op, perm=p, app=a)


def _revoke_candidates(sys: System) -> Iterator[Action]:
    for a, granted in sorted(sys.state.perms, key=value_key):
        for p in canonical_order(granted):
            if p.group is None:
                yield Action("revoke", perm=p, app=a)


def _revoke_group_candidates(sys: System) -> Iterator[Action]:
    for a, groups in sorted(sys.state.grantedPermGroups, key=value_key):
        for g in canonical_order(groups):
            yield Action("revokeGroup", group=g, app=a)


def grant_auto_operation(skip: tuple = ()) -> Operation:
    """The grantAuto registry entry; ``skip`` builds broken variants."""
    dangerous_only = 4 not in skip
    return Operation(
        id="grantAuto",
        mutating=True,
        uses_system_perms=True,
        apply=lambda sp, sys, act: grant_auto(sp, sys, act.perm, act.app, skip),
        candidates=lambda sys: _manifest_candidates("grantAuto", sys, dangerous_only),
    )


def default_operations() -> dict[str, Operation]:
    return {
        "grantAuto": grant_auto_operation(),
        "grant": Operation(
            "grant", True, True,
            lambda sp, sys, act: grant(sp, sys, act.perm, act.app),
            lambda sys: _manifest_candidates("grant", sys)),
        "revoke": Operation(
            "revoke", True, False,
            lambda sp, sys, act: revoke(sys, act.perm, act.app),
            _revoke_candidates),
        "revokeGroup": Operation(
            "revokeGroup", True, False,
            lambda sp, sys, act: revoke_group(sys, act.group, act.app),
            _revoke_group_candidates),
        "hasPermission": Operation(
            "hasPermission", False, False,
            lambda sp, sys, act: step(sp, sys, act),
            lambda sys: iter(())),
    }


# -- scenario documents ---------------------------------------------------------

def action_to_doc(action: Action) -> dict:
    doc = {"op": action.op}
    if action.perm is not None:
        doc["perm"] = perm_to_doc(action.perm)
    if action.app is not None:
        doc["app"] = action.app
    if action.group is not None:
        doc["group"] = action.group
    return doc


def action_from_doc(doc, path="action") -> Action:
    if not isinstance(doc, dict) or "op" not in doc:
        raise ParseError("expected an action object with an 'op' field", path)
    op = doc["op"]
    if op not in OP_NAMES:
        raise ParseError(f"op must be one of {OP_NAMES}", f"{path}.op")
    if op == "revokeGroup":
        _need(doc, ("op", "group", "app"), path)
        return Action(op, group=_atom(doc["group"], f"{path}.group"),
                      app=_atom(doc["app"], f"{path}.app"))
    _need(doc, ("op", "perm", "app"), path)
    return Action(op, perm=perm_from_doc(doc["perm"], f"{path}.perm"),
                  app=_atom(doc["app"], f"{path}.app"))


@dataclass(frozen=True)
class Scenario:
    system_perms: frozenset
    initial: System
    actions: tuple[Action, ...]


def scenario_from_doc(doc) -> Scenario:
    _need(doc, ("systemPerms", "initial", "actions"), "")
    sp = system_perms_from_doc({"systemPerms": doc["systemPerms"]})
    initial = state_from_doc(doc["initial"])
    actions = tuple(action_from_doc(x, f"actions[{i}]")
                    for i, x in enumerate(_list(doc["actions"], "actions")))
    return Scenario(sp, initial, actions)


def scenario_to_doc(sc: Scenario) -> dict:
    return {
        "systemPerms": [perm_to_doc(p) for p in canonical_order(sc.system_perms)],
        "initial": state_to_doc(sc.initial),
        "actions": [action_to_doc(a) for a in sc.actions],
    }
