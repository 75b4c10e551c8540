"""Bounded verification of the permission model.

Proof obligations come in three kinds:

* *invariance*: for one validity clause I and one mutating operation a,
  search for a system S with I(S), an enabled step S -a-> S', and not
  I(S').  One query per (clause, operation) pair -- the hypothesis is the
  single clause under test, never the whole validity conjunction, so a
  failure names exactly the clause an operation breaks.
* *universal*: search for a state satisfying the property's negated body
  (``cannotAutoGrantWithoutGroup``: a dangerous grouped permission whose
  group the user never authorized for the app, yet grantAuto succeeds).
* *existential*: search for a witness of the property's body
  (``execAutoGrantWithoutIndividualPerms``: a valid state where an app
  holds no permission of a group, yet grantAuto of a dangerous permission
  of that group is enabled).

Search is enumeration at small scope, never symbolic proof, so a clean
sweep reports ``holds-at-bounds`` (or ``no-witness-at-bounds``) -- a
deliberately weaker claim than "proved".  When the space exceeds the
budget, the stream is the targeted pre-satisfying family followed by
seeded uniform samples; if the budget cannot even cover the targeted
family the verdict is ``budget-exhausted`` (inconclusive).  Every emitted
counterexample or witness is re-evaluated from its concrete values before
being returned; an unsound hit raises instead of reporting.

Queries are independent and deterministic for a fixed seed (each derives
its own generator from seed and query id), so they may be distributed
across workers without changing any verdict.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .invariants import InvariantClause, standard_clauses, valid_state
from .kernel import EMPTY, canonical_order
from .model import DANGEROUS, System, perm_to_doc, state_to_doc
from .operations import (
    Action,
    Operation,
    action_to_doc,
    default_operations,
)
from .statespace import Bounds, Pools, SystemSpace, targeted_states


class VerifierError(Exception):
    """Internal soundness failure: an emitted hit did not re-evaluate."""


# -- security properties --------------------------------------------------------

class SecurityProperty:
    """A named universal or existential property over single steps."""

    id: str
    kind: str  # "universal" | "existential"

    def find(self, sys: System, pools: Pools, op: Operation) -> Optional[dict]:
        """Search one system; a hit is a payload for a verdict."""
        raise NotImplementedError

    def evaluate(self, sys: System, bindings: dict, sp: frozenset,
                 op: Operation) -> bool:
        """Re-evaluate the property body on concrete values."""
        raise NotImplementedError


def _group_authorized(sys: System, a: str, g: str) -> bool:
    return any(k == a and g in gs for k, gs in sys.state.grantedPermGroups)


class CannotAutoGrantWithoutGroup(SecurityProperty):
    """grantAuto never fires for a permission of an unauthorized group.

    A hit (counterexample) is a state plus (perm, app) where the permission
    is dangerous and grouped, the group is not authorized for the app, and
    grantAuto nevertheless succeeds.
    """

    id = "cannotAutoGrantWithoutGroup"
    kind = "universal"

    def find(self, sys, pools, op):
        for action in op.candidates(sys):
            p, a = action.perm, action.app
            if p.level != DANGEROUS or p.group is None:
                continue
            if _group_authorized(sys, a, p.group):
                continue
            for sp in (EMPTY, frozenset((p,))):
                out = op.apply(sp, sys, action)
                if out.ok:
                    return {"bindings": {"perm": p, "app": a, "group": p.group},
                            "system_perms": sp, "action": action,
                            "next": out.system}
        return None

    def evaluate(self, sys, bindings, sp, op):
        p, a, g = bindings["perm"], bindings["app"], bindings["group"]
        if p.level != DANGEROUS or p.group != g:
            return False
        if _group_authorized(sys, a, g):
            return False
        return op.apply(sp, sys, Action("grantAuto", perm=p, app=a)).ok


class ExecAutoGrantWithoutIndividualPerms(SecurityProperty):
    """grantAuto can fire for a group the app holds no permission of.

    A witness is a valid state where the app's granted set (present, single
    image) contains no permission of group g, yet grantAuto of a dangerous
    permission of g is enabled.  Such states exist because withdrawing the
    permissions of a group does not necessarily withdraw the group
    authorization itself.
    """

    id = "execAutoGrantWithoutIndividualPerms"
    kind = "existential"

    def __init__(self, clauses: Optional[Sequence[InvariantClause]] = None):
        self.clauses = tuple(clauses) if clauses is not None else standard_clauses()

    def find(self, sys, pools, op):
        for action in op.candidates(sys):
            p, a = action.perm, action.app
            if p.level != DANGEROUS or p.group is None:
                continue
            for sp in (EMPTY, frozenset((p,))):
                bindings = {"perm": p, "app": a, "group": p.group}
                if self.evaluate(sys, bindings, sp, op):
                    return {"bindings": bindings, "system_perms": sp,
                            "action": action, "next": None}
        return None

    def evaluate(self, sys, bindings, sp, op):
        p, a, g = bindings["perm"], bindings["app"], bindings["group"]
        if p.level != DANGEROUS or p.group != g:
            return False
        images = [v for k, v in sys.state.perms if k == a]
        if len(images) != 1 or any(q.group == g for q in images[0]):
            return False
        if not op.apply(sp, sys, Action("grantAuto", perm=p, app=a)).ok:
            return False
        return valid_state(sys, self.clauses)


def default_properties(clauses: Optional[Sequence[InvariantClause]] = None
                       ) -> tuple[SecurityProperty, ...]:
    return (CannotAutoGrantWithoutGroup(),
            ExecAutoGrantWithoutIndividualPerms(clauses))


# -- queries and verdicts --------------------------------------------------------

@dataclass(frozen=True)
class Query:
    id: str
    kind: str  # "invariance" | "universal" | "existential"
    op: Operation
    clause: Optional[InvariantClause] = None
    prop: Optional[SecurityProperty] = None
    tag: str = ""  # targeted-family selector


@dataclass(frozen=True)
class Verdict:
    query_id: str
    kind: str  # holds-at-bounds | counterexample | witness |
               # no-witness-at-bounds | budget-exhausted
    states_examined: int
    exhaustive: bool = False
    system: Optional[System] = None
    system_perms: Optional[frozenset] = None
    action: Optional[Action] = None
    next_system: Optional[System] = None
    bindings: Optional[dict] = None
    query: Optional[Query] = field(default=None, compare=False, repr=False)


def verdict_to_doc(v: Verdict) -> dict:
    doc = {"query": v.query_id, "verdict": v.kind,
           "statesExamined": v.states_examined, "exhaustive": v.exhaustive}
    if v.system is not None:
        doc["state"] = state_to_doc(v.system)
    if v.system_perms is not None:
        doc["systemPerms"] = [perm_to_doc(p)
                              for p in canonical_order(v.system_perms)]
    if v.action is not None:
        doc["action"] = action_to_doc(v.action)
    if v.next_system is not None:
        doc["next"] = state_to_doc(v.next_system)
    if v.bindings is not None:
        b = v.bindings
        doc["bindings"] = {"perm": perm_to_doc(b["perm"]), "app": b["app"],
                           "group": b["group"]}
    return doc


def gen_invariance_queries(operations: Optional[dict] = None,
                           clauses: Optional[Sequence[InvariantClause]] = None
                           ) -> list[Query]:
    """One query per (validity clause, mutating operation)."""
    ops = operations if operations is not None else default_operations()
    cls = tuple(clauses) if clauses is not None else standard_clauses()
    mutating = [op for op in ops.values() if op.mutating]
    return [Query(f"inv/{c.id}/{op.id}", "invariance", op=op, clause=c, tag=op.id)
            for c in cls for op in mutating]


def gen_security_queries(operations: Optional[dict] = None,
                         clauses: Optional[Sequence[InvariantClause]] = None
                         ) -> list[Query]:
    ops = operations if operations is not None else default_operations()
    return [Query(f"sec/{p.id}", p.kind, op=ops["grantAuto"], prop=p, tag=p.id)
            for p in default_properties(clauses)]


def _sp_variants(op: Operation, action: Action) -> tuple:
    # the step depends on the system-permission set only through membership
    # of the one permission being granted, so two variants cover all sets
    if op.uses_system_perms and action.perm is not None:
        return (EMPTY, frozenset((action.perm,)))
    return (EMPTY,)


def _search_state(q: Query, sys: System, pools: Pools) -> Optional[dict]:
    if q.kind == "invariance":
        if not q.clause.eval(sys):
            return None
        for action in q.op.candidates(sys):
            for sp in _sp_variants(q.op, action):
                out = q.op.apply(sp, sys, action)
                if out.ok:
                    if not q.clause.eval(out.system):
                        return {"bindings": None, "system_perms": sp,
                                "action": action, "next": out.system}
                    # the successor does not depend on the system-permission
                    # set, so the other variant would reach the same state
                    break
        return None
    return q.prop.find(sys, pools, q.op)


def recheck(v: Verdict) -> bool:
    """Re-evaluate a counterexample/witness from its embedded concrete values.

    Independent of the search that produced the verdict: the hypothesis,
    the step and the conclusion are recomputed from scratch.
    """
    q = v.query
    if v.kind == "counterexample" and q.kind == "invariance":
        if not q.clause.eval(v.system):
            return False
        out = q.op.apply(v.system_perms, v.system, v.action)
        return (out.ok and out.system == v.next_system
                and not q.clause.eval(v.next_system))
    if v.kind == "counterexample" and q.kind == "universal":
        if not q.prop.evaluate(v.system, v.bindings, v.system_perms, q.op):
            return False
        out = q.op.apply(v.system_perms, v.system, v.action)
        return out.ok and out.system == v.next_system
    if v.kind == "witness":
        return q.prop.evaluate(v.system, v.bindings, v.system_perms, q.op)
    raise ValueError("recheck applies to counterexample/witness verdicts only")


def check_query(q: Query, bounds: Bounds,
                space: Optional[SystemSpace] = None) -> Verdict:
    """Discharge one query at the given bounds.

    The examined stream is: the full space in rank order when it fits the
    budget; otherwise the targeted family for the query's tag followed by
    seeded uniform samples up to the budget.  A sampled sweep that could
    not fit the whole targeted family is inconclusive.

    ``space`` may carry a prebuilt (cache-warm) space for the same bounds;
    it never changes the verdict, only the decoding cost.
    """
    if space is None:
        space = SystemSpace(bounds)
    budget = bounds.budget
    targeted = targeted_states(bounds, q.tag)
    exhaustive = space.size <= budget
    conclusive = exhaustive or budget >= len(targeted)
    rng = random.Random(f"{bounds.seed}:{q.id}")

    def stream():
        if exhaustive:
            for i in range(space.size):
                yield space.unrank(i)
        else:
            yield from targeted[:budget]
            for _ in range(budget - min(len(targeted), budget)):
                yield space.unrank(rng.randrange(space.size))

    examined = 0
    for sys in stream():
        examined += 1
        hit = _search_state(q, sys, space.pools)
        if hit is None:
            continue
        v = Verdict(
            query_id=q.id,
            kind="witness" if q.kind == "existential" else "counterexample",
            states_examined=examined,
            exhaustive=False,
            system=sys,
            system_perms=hit["system_perms"],
            action=hit["action"],
            next_system=hit["next"],
            bindings=hit["bindings"],
            query=q,
        )
        if not recheck(v):
            raise VerifierError(f"unsound {v.kind} emitted for {q.id}")
        return v

    if not conclusive:
        kind = "budget-exhausted"
    elif q.kind == "existential":
        kind = "no-witness-at-bounds"
    else:
        kind = "holds-at-bounds"
    return Verdict(q.id, kind, examined, exhaustive, query=q)


# -- suites and reports -----------------------------------------------------------

SUITES = ("invariance", "security", "all")

INVARIANCE_ROW = "Valid-state invariance lemmas"
SECURITY_ROW = "Security properties"


@dataclass
class Report:
    suite: str
    bounds: Bounds
    rows: list[dict]
    verdicts: list[Verdict]

    @property
    def counterexamples(self) -> list[Verdict]:
        return [v for v in self.verdicts if v.kind == "counterexample"]

    @property
    def inconclusive(self) -> list[Verdict]:
        return [v for v in self.verdicts
                if v.kind in ("budget-exhausted", "no-witness-at-bounds")]

    def to_doc(self) -> dict:
        return {
            "suite": self.suite,
            "bounds": self.bounds.to_doc(),
            "rows": self.rows,
            "verdicts": [verdict_to_doc(v) for v in self.verdicts],
        }

    def text(self) -> str:
        lines = [f"suite: {self.suite}",
                 "bounds: " + " ".join(f"{k}={v}" for k, v in self.bounds.to_doc().items()),
                 "",
                 f"{'':40}{'lemmas':>8}{'queries':>9}{'cex':>6}{'seconds':>10}"]
        for row in self.rows:
            lines.append(f"{row['name']:40}{row['lemmas']:>8}{row['queries']:>9}"
                         f"{row['counterexamples']:>6}{row['seconds']:>10.2f}")
        lines.append("")
        for v in self.verdicts:
            mode = "exhaustive" if v.exhaustive else "sampled"
            lines.append(f"{v.query_id}: {v.kind} "
                         f"({v.states_examined} states, {mode})")
        return "\n".join(lines) + "\n"


def run_suite(suite: str, bounds: Bounds,
              operations: Optional[dict] = None,
              clauses: Optional[Sequence[InvariantClause]] = None) -> Report:
    """Run a verification suite and aggregate per-row counts and wall time."""
    if suite not in SUITES:
        raise ValueError(f"suite must be one of {SUITES}")
    groups = []
    if suite in ("invariance", "all"):
        groups.append((INVARIANCE_ROW, gen_invariance_queries(operations, clauses)))
    if suite in ("security", "all"):
        groups.append((SECURITY_ROW, gen_security_queries(operations, clauses)))

    space = SystemSpace(bounds)  # shared decode caches across queries
    rows, verdicts = [], []
    for name, queries in groups:
        start = time.perf_counter()
        vs = [check_query(q, bounds, space) for q in queries]
        elapsed = time.perf_counter() - start
        if name == INVARIANCE_ROW:
            lemmas = len({q.clause.id for q in queries})
        else:
            lemmas = len({q.prop.id for q in queries})
        rows.append({"name": name, "lemmas": lemmas, "queries": len(queries),
                     "counterexamples": sum(v.kind == "counterexample" for v in vs),
                     "seconds": round(elapsed, 3)})
        verdicts.extend(vs)
    rows.append({"name": "total",
                 "lemmas": sum(r["lemmas"] for r in rows),
                 "queries": sum(r["queries"] for r in rows),
                 "counterexamples": sum(r["counterexamples"] for r in rows),
                 "seconds": round(sum(r["seconds"] for r in rows), 3)})
    return Report(suite, bounds, rows, verdicts)
