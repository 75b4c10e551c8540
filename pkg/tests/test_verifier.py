import dataclasses
import json

import pytest

from permcheck.invariants import valid_state
from permcheck.kernel import foplus
from permcheck.model import DANGEROUS
from permcheck.operations import (
    default_operations,
    grant_auto_operation,
    pre_grant_auto,
)
from permcheck.statespace import Bounds, SystemSpace
from permcheck.verifier import (
    check_query,
    gen_invariance_queries,
    gen_security_queries,
    recheck,
    run_suite,
    verdict_to_doc,
)

TINY = Bounds(1, 1, 1, 1)           # exhaustive at default budget (98304 states)
SAMPLED = Bounds(1, 1, 1, 1, budget=3000, seed=5)


def mutated_operations():
    """grantAuto without the group-membership conjunct."""
    ops = default_operations()
    ops["grantAuto"] = grant_auto_operation(skip=(5,))
    return ops


class TestQueryGeneration:
    def test_cross_product_of_clauses_and_mutating_ops(self):
        qs = gen_invariance_queries()
        assert len(qs) == 8 * 4
        assert qs[0].id == "inv/allMapsCorrect.manifest/grantAuto"
        assert all(q.id.startswith("inv/") for q in qs)
        assert {q.op.id for q in qs} == {"grantAuto", "grant", "revoke",
                                         "revokeGroup"}

    def test_empty_registry_gives_no_queries(self):
        assert gen_invariance_queries(operations={}) == []

    def test_security_queries(self):
        qs = gen_security_queries()
        assert [q.id for q in qs] == ["sec/cannotAutoGrantWithoutGroup",
                                      "sec/execAutoGrantWithoutIndividualPerms"]
        assert [q.kind for q in qs] == ["universal", "existential"]


class TestUniversalProperty:
    def test_holds_exhaustively_at_tiny_bounds(self):
        q = gen_security_queries()[0]
        v = check_query(q, TINY)
        assert v.kind == "holds-at-bounds"
        assert v.exhaustive
        assert v.states_examined == SystemSpace(TINY).size

    def test_mutant_yields_counterexample(self):
        q = gen_security_queries(operations=mutated_operations())[0]
        v = check_query(q, Bounds(2, 2, 2, 2, budget=10_000))
        assert v.kind == "counterexample"
        assert recheck(v)
        # the state indeed lacks the group authorization
        b = v.bindings
        assert not any(k == b["app"] and b["group"] in gs
                       for k, gs in v.system.state.grantedPermGroups)

    def test_tampered_counterexample_fails_recheck(self):
        q = gen_security_queries(operations=mutated_operations())[0]
        v = check_query(q, Bounds(2, 2, 2, 2, budget=10_000))
        mg = v.system.state.grantedPermGroups
        authorized = foplus(mg, v.bindings["app"],
                            frozenset((v.bindings["group"],)))
        tampered_state = dataclasses.replace(v.system.state,
                                             grantedPermGroups=authorized)
        tampered = dataclasses.replace(
            v, system=dataclasses.replace(v.system, state=tampered_state))
        assert not recheck(tampered)


class TestExistentialProperty:
    def test_witness_at_tiny_bounds(self):
        q = gen_security_queries()[1]
        v = check_query(q, TINY)
        assert v.kind == "witness"
        assert recheck(v)
        p, a, g = v.bindings["perm"], v.bindings["app"], v.bindings["group"]
        assert valid_state(v.system)
        assert any(k == a and g in gs
                   for k, gs in v.system.state.grantedPermGroups)
        (image,) = [img for k, img in v.system.state.perms if k == a]
        assert not any(q2.group == g for q2 in image)
        assert p.level == DANGEROUS and p.group == g
        assert pre_grant_auto(v.system_perms, v.system, p, a) is None

    def test_no_witness_at_max_card_zero(self):
        q = gen_security_queries()[1]
        v = check_query(q, Bounds(1, 1, 1, 0))
        assert v.kind == "no-witness-at-bounds"
        assert v.exhaustive and v.states_examined == 1


class TestBudget:
    def test_budget_smaller_than_targeted_family_is_inconclusive(self):
        q = gen_invariance_queries()[0]
        v = check_query(q, Bounds(1, 1, 1, 1, budget=1))
        assert v.kind == "budget-exhausted"
        assert v.states_examined == 1

    def test_exhaustive_fit_is_conclusive_even_at_budget_one(self):
        q = gen_invariance_queries()[0]
        v = check_query(q, Bounds(1, 1, 1, 0, budget=1))
        assert v.kind == "holds-at-bounds" and v.exhaustive

    def test_sampled_run_examines_exactly_the_budget(self):
        q = gen_invariance_queries()[0]
        v = check_query(q, SAMPLED)
        assert v.kind == "holds-at-bounds"
        assert not v.exhaustive
        assert v.states_examined == 3000

    def test_holds_is_monotone_safe_under_sampling(self):
        # exhaustively true at these bounds, so any sampled subset also holds
        q = gen_security_queries()[0]
        v = check_query(q, Bounds(1, 1, 1, 1, budget=2500, seed=11))
        assert v.kind == "holds-at-bounds"


class TestRecheck:
    def test_rejects_conclusive_verdicts(self):
        q = gen_invariance_queries()[0]
        v = check_query(q, Bounds(1, 1, 1, 0))
        with pytest.raises(ValueError):
            recheck(v)


class TestRunSuite:
    def test_security_suite_shape(self):
        report = run_suite("security", TINY)
        assert len(report.verdicts) == 2
        (row, total) = report.rows
        assert row["name"] == "Security properties"
        assert row["lemmas"] == 2 and row["queries"] == 2
        assert row["counterexamples"] == 0
        assert total["name"] == "total"

    def test_all_suite_at_sampled_tiny_bounds(self):
        report = run_suite("all", SAMPLED)
        assert len(report.verdicts) == 34
        assert report.counterexamples == []
        names = [r["name"] for r in report.rows]
        assert names == ["Valid-state invariance lemmas", "Security properties",
                         "total"]
        assert report.rows[0]["lemmas"] == 8
        assert report.rows[0]["queries"] == 32

    def test_verdicts_are_deterministic_across_runs(self):
        a = run_suite("all", SAMPLED)
        b = run_suite("all", SAMPLED)
        va = json.dumps([verdict_to_doc(v) for v in a.verdicts])
        vb = json.dumps([verdict_to_doc(v) for v in b.verdicts])
        assert va == vb

    def test_mutant_counterexample_counted_in_rows(self):
        report = run_suite("security", Bounds(2, 2, 2, 2, budget=10_000),
                           operations=mutated_operations())
        assert report.rows[0]["counterexamples"] >= 1
        assert report.counterexamples

    def test_unknown_suite_rejected(self):
        with pytest.raises(ValueError):
            run_suite("everything", TINY)

    def test_report_doc_shape(self):
        report = run_suite("security", SAMPLED)
        doc = report.to_doc()
        assert set(doc) == {"suite", "bounds", "rows", "verdicts"}
        assert doc["bounds"]["maxcard"] == 1
        for v in doc["verdicts"]:
            assert v["verdict"] in ("holds-at-bounds", "counterexample", "witness",
                                    "no-witness-at-bounds", "budget-exhausted")

    def test_text_report_mentions_each_query(self):
        report = run_suite("security", SAMPLED)
        text = report.text()
        assert "Security properties" in text
        for v in report.verdicts:
            assert v.query_id in text
