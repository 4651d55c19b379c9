import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from layoutedit.errors import GrammarError, SynthesisError
from layoutedit.ops import (
    ACTIONS,
    CompositeOperation,
    EditOperation,
    compose,
    operation_from_record,
    parse_operation,
    print_operation,
    synthesize_generalization_op,
    synthesize_reconstruction_op,
    validate_composite,
)
from layoutedit.solver import apply_operation_exact

from helpers import make_random_design

GOLDEN_STRINGS = [
    'move element 3 to {"x": 583, "y": 394}',
    'resize element 2 to {"width": 400, "height": 300}',
    "add element 5",
    "delete element 0",
]


class TestGrammar:
    def test_parse_appendix_move(self):
        op = parse_operation('move element 3 to {"x": 583, "y": 394}')
        assert (op.action, op.target, op.x, op.y) == ("move", 3, 583, 394)

    def test_parse_delete(self):
        op = parse_operation("delete element 0")
        assert (op.action, op.target, op.x, op.width) == ("delete", 0, None, None)

    def test_parse_resize_round_trip(self):
        text = 'resize element 2 to {"width": 400, "height": 300}'
        op = parse_operation(text)
        assert (op.action, op.target, op.width, op.height) == ("resize", 2, 400, 300)
        assert print_operation(op) == text

    def test_unknown_action_names_token(self):
        with pytest.raises(GrammarError) as err:
            parse_operation("rotate element 3")
        assert "rotate" in str(err.value)

    def test_missing_params_rejected(self):
        with pytest.raises(GrammarError):
            parse_operation("move element 3")

    def test_non_integer_params_rejected(self):
        with pytest.raises(GrammarError):
            parse_operation('move element 3 to {"x": 1.5, "y": 2}')

    def test_negative_move_params_allowed(self):
        op = parse_operation('move element 1 to {"x": -20, "y": -9}')
        assert (op.x, op.y) == (-20, -9)

    def test_whitespace_canonicalized(self):
        op = parse_operation('  move   element 3 to { "x" : 583 , "y" : 394 }  ')
        assert print_operation(op) == 'move element 3 to {"x": 583, "y": 394}'

    def test_print_parse_idempotent_on_goldens(self):
        for text in GOLDEN_STRINGS:
            assert print_operation(parse_operation(text)) == text

    def test_resize_to_zero_rejected(self):
        with pytest.raises(GrammarError):
            EditOperation("resize", 1, width=0, height=10)

    def test_structured_form(self):
        assert operation_from_record(
            {"action": "move", "target": 3, "params": {"x": 583, "y": 394}}
        ) == EditOperation("move", 3, x=583, y=394)
        # top-level params are accepted too
        assert operation_from_record(
            {"action": "resize", "target": 2, "width": 400, "height": 300}
        ) == EditOperation("resize", 2, width=400, height=300)
        with pytest.raises(GrammarError):
            operation_from_record({"action": "move", "target": 1, "x": 1.5, "y": 2})
        with pytest.raises(GrammarError):
            operation_from_record({"target": 1})

    @given(
        action=st.sampled_from(ACTIONS),
        target=st.integers(0, 10**6),
        a=st.integers(-10**6, 10**6),
        b=st.integers(1, 10**6),
    )
    def test_round_trip_property(self, action, target, a, b):
        if action == "move":
            op = EditOperation(action, target, x=a, y=-a)
        elif action == "resize":
            op = EditOperation(action, target, width=b, height=b + 1)
        else:
            op = EditOperation(action, target)
        assert parse_operation(print_operation(op)) == op


class TestReconstructionSynthesis:
    def test_deterministic(self, appendix_design):
        pool = list(appendix_design.elements)
        a = synthesize_reconstruction_op(appendix_design, pool, seed=11)
        b = synthesize_reconstruction_op(appendix_design, pool, seed=11)
        assert a == b

    def test_move_uses_real_rounded_coordinates(self, appendix_design):
        pool = list(appendix_design.elements)
        for seed in range(200):
            prep = synthesize_reconstruction_op(appendix_design, pool, seed=seed)
            if prep.operation.action == "move" and prep.operation.target == 3:
                assert print_operation(prep.operation) == 'move element 3 to {"x": 583, "y": 394}'
                break
        else:
            pytest.fail("no move draw on element 3 in 200 seeds")

    def test_single_element_move_targets_it(self):
        d = make_random_design(random.Random(0), 1)
        pool = list(d.elements)
        for seed in range(60):
            prep = synthesize_reconstruction_op(d, pool, seed=seed)
            if prep.operation.action == "move":
                el = d.elements[0]
                assert prep.operation.target == 0
                assert prep.operation.x == round(el.geom.cx)
                return
        pytest.fail("no move draw in 60 seeds")

    def test_pruned_graph_never_mentions_target(self, appendix_design):
        pool = list(appendix_design.elements)
        for seed in range(40):
            prep = synthesize_reconstruction_op(appendix_design, pool, seed=seed)
            assert all(not e.touches(prep.operation.target) for e in prep.graph.edges)

    def test_delete_appends_donor_with_fresh_id(self, appendix_design):
        donor_src = make_random_design(random.Random(9), 3)
        pool = list(donor_src.elements)
        for seed in range(200):
            prep = synthesize_reconstruction_op(appendix_design, pool, seed=seed)
            if prep.operation.action == "delete":
                assert prep.operation.target == appendix_design.n
                assert prep.design.n == appendix_design.n + 1
                assert prep.ground_truth == appendix_design
                donor_payloads = {el.content.payload for el in pool}
                assert prep.design.elements[-1].content.payload in donor_payloads
                return
        pytest.fail("no delete draw in 200 seeds")

    def test_move_resize_are_noops_on_ground_truth(self, appendix_design):
        pool = list(appendix_design.elements)
        seen = set()
        for seed in range(120):
            prep = synthesize_reconstruction_op(appendix_design, pool, seed=seed)
            if prep.operation.action not in ("move", "resize"):
                continue
            seen.add(prep.operation.action)
            applied = apply_operation_exact(prep.ground_truth, prep.operation)
            for el, orig in zip(applied.elements, appendix_design.elements):
                assert abs(el.geom.cx - orig.geom.cx) <= 1.0
                assert abs(el.geom.cy - orig.geom.cy) <= 1.0
                assert abs(el.geom.w - orig.geom.w) <= 1.0
                assert abs(el.geom.h - orig.geom.h) <= 1.0
        assert seen == {"move", "resize"}

    def test_empty_design_rejected(self):
        d = make_random_design(random.Random(0), 2)
        empty = d.with_elements(())
        with pytest.raises(SynthesisError):
            synthesize_reconstruction_op(empty, list(d.elements), seed=0)

    def test_empty_pool_fails_only_when_delete_drawn(self, appendix_design):
        failures, successes = 0, 0
        for seed in range(60):
            try:
                prep = synthesize_reconstruction_op(appendix_design, [], seed=seed)
                assert prep.operation.action != "delete"
                successes += 1
            except SynthesisError:
                failures += 1
        assert failures and successes


class TestGeneralizationSynthesis:
    def test_move_params_within_canvas(self, appendix_design):
        pool = list(appendix_design.elements)
        for seed in range(400):
            prep = synthesize_generalization_op(appendix_design, pool, seed=seed)
            if prep.operation.action == "move":
                assert 0 <= prep.operation.x <= 940
                assert 0 <= prep.operation.y <= 788
            assert prep.ground_truth is None

    def test_resize_factor_bounds(self, appendix_design):
        pool = list(appendix_design.elements)
        for seed in range(400):
            prep = synthesize_generalization_op(appendix_design, pool, seed=seed)
            if prep.operation.action == "resize":
                el = appendix_design.elements[prep.operation.target]
                factor = prep.operation.width / el.geom.w
                assert 0.5 - 1e-3 <= factor <= 2.0 + 1e-3

    def test_boundary_factor_two(self):
        d = make_random_design(random.Random(3), 2)
        el = d.elements[0]
        op = EditOperation("resize", 0, width=round(el.geom.w * 2.0), height=round(el.geom.h * 2.0))
        applied = apply_operation_exact(d, op)
        assert applied.elements[0].geom.w == round(el.geom.w * 2.0)

    def test_add_introduces_donor_content_at_fresh_id(self, appendix_design):
        donor_src = make_random_design(random.Random(4), 5)
        pool = list(donor_src.elements)
        for seed in range(200):
            prep = synthesize_generalization_op(appendix_design, pool, seed=seed)
            if prep.operation.action == "add":
                assert prep.operation.target == appendix_design.n
                assert prep.add_content is not None
                assert prep.add_size_hint is not None
                return
        pytest.fail("no add draw in 200 seeds")

    def test_action_frequencies_roughly_uniform(self, appendix_design):
        pool = list(appendix_design.elements)
        counts = Counter(
            synthesize_generalization_op(appendix_design, pool, seed=s).operation.action
            for s in range(2000)
        )
        for action in ACTIONS:
            assert 0.25 - 0.04 <= counts[action] / 2000 <= 0.25 + 0.04


class TestComposites:
    def test_replace_shape(self):
        steps = [EditOperation("delete", 2), EditOperation("add", 5)]
        comp = compose(steps)
        assert isinstance(comp, CompositeOperation)
        assert len(comp.steps) == 2

    def test_empty_composite_rejected(self):
        with pytest.raises(GrammarError):
            compose([])

    def test_validate_replace_against_design(self):
        d = make_random_design(random.Random(0), 6)
        validate_composite(d, compose([EditOperation("delete", 2), EditOperation("add", 5)]))

    def test_validate_rejects_dangling_step(self):
        d = make_random_design(random.Random(0), 3)
        with pytest.raises(SynthesisError) as err:
            validate_composite(d, compose([EditOperation("delete", 2), EditOperation("move", 2, x=1, y=1)]))
        assert "step 1" in str(err.value)

    def test_move_resize_sequential_application(self):
        d = make_random_design(random.Random(8), 4)
        steps = [
            EditOperation("move", 3, x=100, y=100),
            EditOperation("resize", 3, width=50, height=50),
        ]
        validate_composite(d, compose(steps))
        out = d
        for step in steps:
            out = apply_operation_exact(out, step)
        assert (out.elements[3].geom.cx, out.elements[3].geom.cy) == (100, 100)
        assert (out.elements[3].geom.w, out.elements[3].geom.h) == (50, 50)

    def test_single_step_composite_equals_step(self):
        d = make_random_design(random.Random(2), 3)
        step = EditOperation("move", 1, x=10, y=20)
        via_composite = d
        for s in compose([step]).steps:
            via_composite = apply_operation_exact(via_composite, s)
        assert via_composite == apply_operation_exact(d, step)
