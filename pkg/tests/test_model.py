import json

import pytest
from hypothesis import given, settings, strategies as st

import brute
from conftest import NET, READ, WRITE, make_system
from permcheck.kernel import EMPTY, AmbiguousApplication
from permcheck.model import (
    COMPONENTS,
    ConflictingDefPerms,
    Manifest,
    ParseError,
    Perm,
    SysImgApp,
    System,
    def_perms_for_app,
    differing_components,
    emit_state,
    empty_system,
    get_component,
    manifest_of_app,
    parse_state,
    parse_system_perms,
    system_perms_to_doc,
    usr_def_perm,
    with_component,
)
from permcheck.statespace import Bounds, SystemSpace

SPACE = SystemSpace(Bounds(2, 2, 2, 2))


class TestAccessors:
    @pytest.mark.parametrize("name", COMPONENTS)
    def test_get_after_set_and_frame(self, name):
        sys = empty_system()
        value = "probe" if name.startswith("opaque") else frozenset(("x",))
        updated = with_component(sys, name, value)
        assert get_component(updated, name) == value
        assert differing_components(sys, updated) == [name]

    def test_perms_of_empty_system(self):
        assert get_component(empty_system(), "perms") == EMPTY

    def test_set_then_get_granted_groups(self):
        rel = frozenset((("a1", frozenset(("g1",))),))
        sys = with_component(empty_system(), "grantedPermGroups", rel)
        assert sys.state.grantedPermGroups == rel

    def test_updating_perms_leaves_environment_equal(self):
        sys = make_system(manifest=frozenset((("a1", Manifest(frozenset((READ,)))),)))
        updated = with_component(sys, "perms", frozenset((("a1", frozenset((READ,))),)))
        assert updated.environment == sys.environment

    def test_unknown_component(self):
        with pytest.raises(KeyError):
            get_component(empty_system(), "nope")


class TestManifestOfApp:
    def test_absent(self):
        assert manifest_of_app(empty_system(), "a1") is None

    def test_present(self):
        m = Manifest(frozenset((READ,)))
        sys = make_system(manifest=frozenset((("a1", m),)))
        assert manifest_of_app(sys, "a1") == m

    def test_two_apps(self):
        m1, m2 = Manifest(frozenset((READ,))), Manifest(frozenset((WRITE,)))
        sys = make_system(manifest=frozenset((("a1", m1), ("a2", m2))))
        assert manifest_of_app(sys, "a2") == m2

    def test_non_functional_manifest_is_ambiguous(self):
        sys = make_system(manifest=frozenset((("a1", Manifest(frozenset((READ,)))),
                                              ("a1", Manifest(frozenset((WRITE,)))))))
        with pytest.raises(AmbiguousApplication):
            manifest_of_app(sys, "a1")


class TestDefPermsForApp:
    def test_from_def_perms(self):
        sys = make_system(def_perms=frozenset((("a1", frozenset((READ,))),)))
        assert def_perms_for_app(sys, "a1") == frozenset((READ,))

    def test_from_system_image(self):
        sys = make_system(system_image=frozenset((SysImgApp("a1", frozenset((WRITE,))),)))
        assert def_perms_for_app(sys, "a1") == frozenset((WRITE,))

    def test_absent(self):
        assert def_perms_for_app(empty_system(), "a1") is None

    def test_agreeing_sources(self):
        sys = make_system(def_perms=frozenset((("a1", frozenset((READ,))),)),
                          system_image=frozenset((SysImgApp("a1", frozenset((READ,))),)))
        assert def_perms_for_app(sys, "a1") == frozenset((READ,))

    def test_conflicting_sources_reported(self):
        sys = make_system(def_perms=frozenset((("a1", frozenset((READ,))),)),
                          system_image=frozenset((SysImgApp("a1", frozenset((WRITE,))),)))
        with pytest.raises(ConflictingDefPerms):
            def_perms_for_app(sys, "a1")

    @given(st.integers(0, SPACE.size - 1), st.sampled_from(["app1", "app2"]))
    @settings(max_examples=150, deadline=None)
    def test_agrees_with_brute_force(self, rank, app):
        sys = SPACE.unrank(rank)
        expected = brute.o_def_perms_for_app(sys, app)
        if expected == brute.AMBIGUOUS:
            with pytest.raises(ConflictingDefPerms):
                def_perms_for_app(sys, app)
        else:
            assert def_perms_for_app(sys, app) == expected


class TestUsrDefPerm:
    def test_empty_sources(self):
        assert not usr_def_perm(empty_system(), READ)

    def test_in_def_perms(self):
        sys = make_system(def_perms=frozenset((("a2", frozenset((READ, NET))),)))
        assert usr_def_perm(sys, READ)
        assert not usr_def_perm(sys, WRITE)

    def test_only_in_system_image(self):
        sys = make_system(system_image=frozenset((SysImgApp("a1", frozenset((WRITE,))),)))
        assert usr_def_perm(sys, WRITE)


class TestSerialization:
    def test_empty_state_document(self):
        doc = json.loads(emit_state(empty_system()))
        assert doc == {
            "state": {"apps": [], "alreadyVerified": [], "grantedPermGroups": [],
                      "perms": [], "opaque5": "unused", "opaque6": "unused",
                      "opaque7": "unused", "opaque8": "unused", "opaque9": "unused"},
            "environment": {"manifest": [], "cert": [], "defPerms": [],
                            "systemImage": []},
        }

    def test_round_trip_f1(self, f1):
        assert parse_state(emit_state(f1["sys"])) == f1["sys"]

    def test_emit_is_canonical_fixed_point(self, f1):
        text = emit_state(f1["sys"])
        assert emit_state(parse_state(text)) == text

    def test_non_canonical_input_is_accepted(self, f1):
        doc = json.loads(emit_state(f1["sys"]))
        doc["state"]["apps"] = ["a1"]
        doc["environment"]["manifest"][0][1]["use"].reverse()
        assert parse_state(json.dumps(doc)) == f1["sys"]

    def test_duplicate_pair_rejected(self):
        doc = json.loads(emit_state(empty_system()))
        perm = {"id": "p", "group": None, "level": "normal"}
        doc["state"]["perms"] = [["a1", [perm]], ["a1", [perm]]]
        with pytest.raises(ParseError):
            parse_state(json.dumps(doc))

    def test_duplicate_key_different_value_is_a_relation(self):
        # non-functional relations are representable; validity is checked
        # separately by the invariant clauses
        doc = json.loads(emit_state(empty_system()))
        doc["state"]["perms"] = [["a1", []],
                                 ["a1", [{"id": "p", "group": None, "level": "normal"}]]]
        sys = parse_state(json.dumps(doc))
        assert len(sys.state.perms) == 2

    def test_duplicate_set_element_rejected(self):
        doc = json.loads(emit_state(empty_system()))
        doc["state"]["apps"] = ["a1", "a1"]
        with pytest.raises(ParseError) as e:
            parse_state(json.dumps(doc))
        assert "apps" in str(e.value)

    def test_unknown_field_rejected(self):
        doc = json.loads(emit_state(empty_system()))
        doc["state"]["extra"] = []
        with pytest.raises(ParseError):
            parse_state(json.dumps(doc))

    def test_missing_field_rejected(self):
        doc = json.loads(emit_state(empty_system()))
        del doc["environment"]["cert"]
        with pytest.raises(ParseError):
            parse_state(json.dumps(doc))

    def test_bad_level_rejected(self):
        doc = json.loads(emit_state(empty_system()))
        doc["environment"]["defPerms"] = [["a1", [{"id": "p", "group": None,
                                                   "level": "critical"}]]]
        with pytest.raises(ParseError) as e:
            parse_state(json.dumps(doc))
        assert "level" in str(e.value)

    def test_invalid_json_has_diagnostics(self):
        with pytest.raises(ParseError):
            parse_state("{not json")

    def test_null_group_round_trips(self):
        sys = make_system(def_perms=frozenset((("a1", frozenset((NET,))),)))
        again = parse_state(emit_state(sys))
        (perm,) = next(l for a, l in again.environment.defPerms if a == "a1")
        assert perm.group is None

    def test_system_perms_round_trip(self):
        sp = frozenset((READ, NET))
        assert parse_system_perms(json.dumps(system_perms_to_doc(sp))) == sp

    @given(st.integers(0, SPACE.size - 1))
    @settings(max_examples=120, deadline=None)
    def test_round_trip_on_generated_states(self, rank):
        sys = SPACE.unrank(rank)
        assert parse_state(emit_state(sys)) == sys
