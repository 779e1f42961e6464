import itertools
import random

import pytest

from protobooth.model import (
    CAPTURE_ORDER,
    Annotation,
    CaptureRecord,
    ChronologyError,
    CodingScheme,
    ImageRef,
    LinkGraph,
    MembershipError,
    ModelError,
    NodeClass,
    UnknownCategoryError,
    ViewAngle,
    add_link,
    angle_from_name,
    assign_codes,
    builtin_schemes,
    canonical_order,
    reachability,
    validate_capture,
    validate_graph,
)
from support import make_capture


class TestViewAngle:
    def test_exactly_seven_stable_names(self):
        assert [a.value for a in ViewAngle] == [
            "front", "top", "right", "left", "rear_right", "rear_left", "rear",
        ]
        assert len(CAPTURE_ORDER) == 7
        assert CAPTURE_ORDER == tuple(ViewAngle)

    def test_angle_lookup(self):
        assert angle_from_name("rear_left") is ViewAngle.REAR_LEFT
        with pytest.raises(ModelError):
            angle_from_name("back")


class TestSerialization:
    def test_capture_record_roundtrip(self):
        record, _ = make_capture("cap-1", timestamp=1509532800, title="spring test")
        doc = record.to_doc()
        assert list(doc["views"]) == [a.value for a in CAPTURE_ORDER]
        assert CaptureRecord.from_doc(doc) == record

    def test_annotation_merge_keeps_unset_fields(self):
        note = Annotation(title="t", description="d")
        merged = note.merged_with(title="new")
        assert merged == Annotation(title="new", description="d")
        cleared = merged.merged_with(description=None)
        assert cleared.description is None and cleared.title == "new"

    def test_image_ref_roundtrip(self):
        ref = ImageRef("ab" * 32, "image/bmp", 123)
        assert ImageRef.from_doc(ref.to_doc()) == ref


class TestValidateCapture:
    def test_valid_record_ok(self):
        record, _ = make_capture("cap-1", timestamp=1509532800)
        assert validate_capture(record) == []

    def test_missing_rear_view(self):
        record, _ = make_capture("cap-1")
        views = dict(record.views)
        del views[ViewAngle.REAR]
        broken = CaptureRecord("cap-1", "b", "c", 100, views)
        assert "views incomplete: rear" in validate_capture(broken)

    def test_timestamp_nonpositive(self):
        record, _ = make_capture("cap-1", timestamp=0)
        assert "timestamp nonpositive" in validate_capture(record)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda r: CaptureRecord("", r.booth_id, r.card_id, r.timestamp, r.views),
            lambda r: CaptureRecord("a b", r.booth_id, r.card_id, r.timestamp, r.views),
            lambda r: CaptureRecord(r.capture_id, "", r.card_id, r.timestamp, r.views),
            lambda r: CaptureRecord(r.capture_id, r.booth_id, "../x", r.timestamp, r.views),
            lambda r: CaptureRecord(r.capture_id, r.booth_id, r.card_id, -5, r.views),
            lambda r: CaptureRecord(
                r.capture_id, r.booth_id, r.card_id, r.timestamp,
                {**r.views, ViewAngle.TOP: ImageRef("zz", "image/bmp", 10)},
            ),
            lambda r: CaptureRecord(
                r.capture_id, r.booth_id, r.card_id, r.timestamp,
                {**r.views, ViewAngle.TOP: ImageRef("ab" * 32, "image/bmp", 0)},
            ),
        ],
    )
    def test_each_mutation_detected(self, mutate):
        record, _ = make_capture("cap-1")
        assert validate_capture(record) == []
        assert validate_capture(mutate(record)) != []


class TestBuiltinSchemes:
    def test_exact_category_lists(self):
        materials, tools, disciplines = builtin_schemes()
        assert materials.scheme_id == "materials"
        assert list(materials.categories) == [
            "foam", "cardboard", "MDF", "wood", "hard plastics",
            "soft plastics", "metal", "electronics", "other",
        ]
        assert tools.scheme_id == "tools"
        assert list(tools.categories) == [
            "hand tools", "3D-printer", "laser cutter", "machining",
            "vacuum former", "computer",
        ]
        assert disciplines.scheme_id == "disciplines"
        assert list(disciplines.categories) == ["mechanics", "software", "electronics"]

    def test_scheme_rejects_empty_or_duplicate(self):
        with pytest.raises(ModelError):
            CodingScheme("s", "s", ())
        with pytest.raises(ModelError):
            CodingScheme("s", "s", ("a", "a"))


class TestAssignCodes:
    def test_three_categories_in_scheme_order(self):
        materials = builtin_schemes()[0]
        assignment = assign_codes("p37", materials, ["hard plastics", "electronics", "metal"])
        assert set(assignment.categories) == {"hard plastics", "electronics", "metal"}
        assert list(assignment.categories) == ["hard plastics", "metal", "electronics"]

    def test_empty_assignment_valid(self):
        materials = builtin_schemes()[0]
        assert assign_codes("p1", materials, []).categories == ()

    def test_unknown_category_named_in_error(self):
        materials = builtin_schemes()[0]
        with pytest.raises(UnknownCategoryError, match="titanium"):
            assign_codes("p1", materials, ["titanium"])

    def test_duplicates_collapse(self):
        tools = builtin_schemes()[1]
        assignment = assign_codes("p1", tools, ["computer", "computer"])
        assert assignment.categories == ("computer",)


class TestCanonicalOrder:
    def test_empty(self):
        assert canonical_order([]) == []

    def test_sorts_by_timestamp(self):
        a, _ = make_capture("a", timestamp=100)
        b, _ = make_capture("b", timestamp=50)
        assert [r.capture_id for r in canonical_order([a, b])] == ["b", "a"]

    def test_tie_break_by_id_all_permutations(self):
        records = [make_capture(cid, timestamp=500)[0] for cid in ("b", "a", "d", "c")]
        expected = ["a", "b", "c", "d"]
        for perm in itertools.permutations(records):
            assert [r.capture_id for r in canonical_order(perm)] == expected

    def test_permutation_invariant_total_order(self):
        rng = random.Random(7)
        records = [
            make_capture(f"r{i}", timestamp=rng.randint(1, 50))[0] for i in range(40)
        ]
        baseline = canonical_order(records)
        for _ in range(25):
            shuffled = records[:]
            rng.shuffle(shuffled)
            assert canonical_order(shuffled) == baseline


def _three_captures():
    p81, _ = make_capture("p81", timestamp=100)
    p82, _ = make_capture("p82", timestamp=200)
    p1, _ = make_capture("p1", timestamp=50)
    return {r.capture_id: r for r in (p1, p81, p82)}


class TestLinks:
    def test_forward_edge_added(self):
        captures = _three_captures()
        graph = LinkGraph("proj")
        add_link(graph, "p81", "p82", captures)
        assert ("p81", "p82") in graph.edges

    def test_reversed_edge_rejected(self):
        captures = _three_captures()
        with pytest.raises(ChronologyError, match="edge must point forward in time"):
            add_link(LinkGraph("proj"), "p82", "p81", captures)

    def test_self_loop_rejected(self):
        captures = _three_captures()
        with pytest.raises(ChronologyError):
            add_link(LinkGraph("proj"), "p1", "p1", captures)

    def test_non_member_rejected(self):
        captures = _three_captures()
        with pytest.raises(MembershipError):
            add_link(LinkGraph("proj"), "p81", "p99", captures)
        with pytest.raises(MembershipError):
            add_link(LinkGraph("proj"), "p81", "p82", captures, members={"p81"})

    def test_same_timestamp_uses_id_tie_break(self):
        a, _ = make_capture("a", timestamp=100)
        b, _ = make_capture("b", timestamp=100)
        captures = {"a": a, "b": b}
        graph = LinkGraph("proj")
        add_link(graph, "a", "b", captures)
        with pytest.raises(ChronologyError):
            add_link(graph, "b", "a", captures)

    def test_add_link_graphs_follow_canonical_topology(self):
        rng = random.Random(11)
        for _ in range(30):
            records = [
                make_capture(f"n{i:02d}", timestamp=rng.randint(1, 1000))[0]
                for i in range(12)
            ]
            captures = {r.capture_id: r for r in records}
            ordered = [r.capture_id for r in canonical_order(records)]
            rank = {cid: i for i, cid in enumerate(ordered)}
            graph = LinkGraph("proj")
            for _ in range(20):
                src, dst = rng.sample(ordered, 2)
                try:
                    add_link(graph, src, dst, captures)
                except ChronologyError:
                    continue
            for src, dst in graph.edges:
                assert rank[src] < rank[dst]
            assert validate_graph(graph, captures) == []


class TestValidateGraph:
    def test_flags_reversed_edge(self):
        captures = _three_captures()
        graph = LinkGraph("proj", edges={("p82", "p81")})
        violations = validate_graph(graph, captures)
        assert any("does not point forward" in v for v in violations)

    def test_flags_multiple_finals(self):
        captures = _three_captures()
        graph = LinkGraph(
            "proj",
            node_classes={
                "p81": NodeClass.FINAL_CONCEPT,
                "p82": NodeClass.FINAL_CONCEPT,
            },
        )
        violations = validate_graph(graph, captures)
        assert any("multiple final-concept nodes" in v for v in violations)

    def test_flags_unknown_member(self):
        captures = _three_captures()
        graph = LinkGraph("proj", edges={("p81", "p82")})
        violations = validate_graph(graph, captures, members={"p81"})
        assert any("not a project member" in v for v in violations)


def _forward_reachable(graph: LinkGraph, start: str, finals: set[str]) -> bool:
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        if node in finals:
            return True
        for src, dst in graph.edges:
            if src == node and dst not in seen:
                seen.add(dst)
                stack.append(dst)
    return False


class TestReachability:
    def test_empty_graph(self):
        assert reachability(LinkGraph("proj")) == {}

    def test_chain_all_reach(self):
        graph = LinkGraph(
            "proj",
            node_classes={"c": NodeClass.FINAL_CONCEPT},
            edges={("a", "b"), ("b", "c")},
        )
        assert reachability(graph) == {"a": True, "b": True, "c": True}

    def test_no_final_all_false(self):
        graph = LinkGraph("proj", edges={("a", "b")})
        assert reachability(graph) == {"a": False, "b": False}

    def test_matches_forward_search_oracle(self):
        rng = random.Random(3)
        for _ in range(40):
            n = rng.randint(1, 50)
            ids = [f"n{i:02d}" for i in range(n)]
            edges = set()
            for _ in range(rng.randint(0, 2 * n)):
                i = rng.randrange(0, n)
                j = rng.randrange(0, n)
                if i < j:
                    edges.add((ids[i], ids[j]))
            node_classes = {cid: NodeClass.INTERNAL for cid in ids}
            if rng.random() < 0.9:
                node_classes[rng.choice(ids)] = NodeClass.FINAL_CONCEPT
            graph = LinkGraph("proj", node_classes, edges)
            finals = set(graph.final_nodes())
            got = reachability(graph)
            want = {
                cid: bool(finals) and _forward_reachable(graph, cid, finals)
                for cid in graph.nodes()
            }
            assert got == want
