import json
import random
from dataclasses import replace

import pytest

from layoutedit.errors import SolverError
from layoutedit.metrics import original_id_view, relation_satisfaction
from layoutedit.model import ElementContent, TextAttrs, bounding_box
from layoutedit.ops import (
    EditOperation,
    synthesize_generalization_op,
    synthesize_reconstruction_op,
)
from layoutedit.relations import Edge, RelationGraph, build_relation_graph, remove_node_edges
from layoutedit.solver import (
    NewElementSpec,
    SolverConfig,
    apply_operation_exact,
    place_new_element,
    residuals,
    solve,
    solve_prepared,
)

from helpers import make_boxes_design, make_random_design


class TestApplyExact:
    def test_appendix_move(self, appendix_design):
        out = apply_operation_exact(appendix_design, EditOperation("move", 3, x=583, y=394))
        assert (out.elements[3].geom.cx, out.elements[3].geom.cy) == (583, 394)

    def test_delete_shrinks_and_renumbers(self, appendix_design):
        out = apply_operation_exact(appendix_design, EditOperation("delete", 1))
        assert out.n == appendix_design.n - 1
        assert [el.id for el in out.elements] == [0, 1, 2]
        assert out.elements[1].content.payload == "badge.png"  # old element 2

    def test_resize_keeps_center(self, appendix_design):
        out = apply_operation_exact(appendix_design, EditOperation("resize", 2, width=400, height=300))
        box = bounding_box(out.elements[2].geom)
        assert (box.x_left, box.y_top, box.x_right, box.y_bottom) == (398, -3, 798, 297)
        assert (out.elements[2].geom.cx, out.elements[2].geom.cy) == (598, 147)

    def test_resize_scales_text_font(self, appendix_design):
        out = apply_operation_exact(appendix_design, EditOperation("resize", 3, width=882, height=672))
        assert out.elements[3].text_attrs.font_size == pytest.approx(140.0)

    def test_unknown_target(self, appendix_design):
        with pytest.raises(SolverError):
            apply_operation_exact(appendix_design, EditOperation("move", 9, x=1, y=1))

    def test_add_requires_content(self, appendix_design):
        with pytest.raises(SolverError):
            apply_operation_exact(appendix_design, EditOperation("add", 4))

    def test_add_appends_at_next_free_id(self, appendix_design):
        spec = NewElementSpec(content=ElementContent("image", "sticker.png"), size_hint=(100, 80))
        out = apply_operation_exact(appendix_design, EditOperation("add", 4), new_element=spec)
        assert out.n == 5
        assert out.elements[4].content.payload == "sticker.png"

    def test_other_elements_untouched(self, appendix_design):
        out = apply_operation_exact(appendix_design, EditOperation("move", 3, x=10, y=10))
        assert out.elements[:3] == appendix_design.elements[:3]


class TestResiduals:
    def test_ground_truth_fixpoint(self, appendix_design):
        g = build_relation_graph(appendix_design, 0.1, seed=1)
        op = EditOperation("move", 3, x=583, y=394)
        res = residuals(appendix_design, remove_node_edges(g, 3), op)
        assert all(r.raw == 0 for r in res.edge_residuals)
        assert res.total == 0 and res.op_residual == 0 and res.overlap_penalty == 0

    def test_size_hinge_value(self):
        # 'large' edge observed at AR exactly 1.0: hinge reaches (1.1 + 0.02) - 1.0
        d = make_boxes_design((1000, 1000), [(200, 200, 100, 100), (600, 600, 100, 100)])
        g = RelationGraph(
            nodes=frozenset({0, 1, "canvas"}),
            edges=(Edge(0, 1, "size", "large"),),
            alpha=0.1,
        )
        res = residuals(d, g, EditOperation("move", 0, x=200, y=200), SolverConfig())
        (edge_res,) = res.edge_residuals
        assert edge_res.raw == pytest.approx(0.12)
        assert not edge_res.satisfied

    def test_position_residual_distance_to_band(self):
        # 'top canvas' edge with the source dropped into the bottom row
        d = make_boxes_design((900, 900), [(450, 800, 50, 50)])
        g = RelationGraph(
            nodes=frozenset({0, "canvas"}),
            edges=(Edge(0, "canvas", "position", "top"),),
            alpha=0.1,
        )
        cfg = SolverConfig()
        res = residuals(d, g, EditOperation("resize", 0, width=50, height=50), cfg)
        (edge_res,) = res.edge_residuals
        diag = (900**2 + 900**2) ** 0.5
        expected = (800 - (900 / 3 - cfg.margin_px)) / diag  # vertical gap to the inset top band
        assert edge_res.normalized == pytest.approx(expected)

    def test_op_residual_for_unapplied_move(self, appendix_design):
        g = remove_node_edges(build_relation_graph(appendix_design, 0.1, seed=1), 3)
        res = residuals(appendix_design, g, EditOperation("move", 3, x=100, y=100))
        assert res.op_residual > 0

    def test_overlap_penalty_beyond_original(self, appendix_design):
        g = remove_node_edges(build_relation_graph(appendix_design, 0.1, seed=1), 3)
        op = EditOperation("move", 3, x=583, y=394)
        # the design overlaps itself exactly as much as the original: no penalty
        res = residuals(appendix_design, g, op, original=appendix_design)
        assert res.overlap_penalty == 0


class TestSolve:
    def test_reconstruction_fixpoint(self, appendix_design):
        pool = list(appendix_design.elements)
        for seed in range(30):
            prep = synthesize_reconstruction_op(appendix_design, pool, seed=seed)
            result = solve_prepared(prep)
            if prep.operation.action == "delete":
                assert result.design == appendix_design
            elif prep.operation.action in ("move", "resize"):
                # params were rounded: the hard apply may shift by < 1 px
                for el, orig in zip(result.design.elements, appendix_design.elements):
                    assert abs(el.geom.cx - orig.geom.cx) <= 0.5
                    assert abs(el.geom.w - orig.geom.w) <= 0.5
            assert result.residuals.total <= 1e-9

    def test_corner_move_leaves_other_element_alone(self):
        d = make_boxes_design((1000, 800), [(500, 100, 300, 80), (500, 400, 200, 100)])
        g = remove_node_edges(build_relation_graph(d, 0.1, seed=0), 0)
        result = solve(d, g, EditOperation("move", 0, x=900, y=700))
        assert (result.design.elements[0].geom.cx, result.design.elements[0].geom.cy) == (900, 700)
        assert result.design.elements[1] == d.elements[1]
        assert relation_satisfaction(g, result.design) == (1.0, 1.0)

    def test_overlap_repair_moves_occluded_element(self):
        d = make_boxes_design((1000, 800), [(500, 100, 300, 80), (500, 400, 200, 100)])
        g = remove_node_edges(build_relation_graph(d, 0.1, seed=0), 0)
        op = EditOperation("move", 0, x=500, y=400)  # drop element 0 onto element 1
        result = solve(d, g, op)
        # hard constraint holds, and repair cleared the introduced overlap
        assert (result.design.elements[0].geom.cx, result.design.elements[0].geom.cy) == (500, 400)
        assert result.residuals.overlap_penalty < 1e-9
        assert relation_satisfaction(g, result.design) == (1.0, 1.0)
        assert result.design.elements[1].geom != d.elements[1].geom

    def test_monotone_repair_small_corpus(self):
        rng = random.Random(21)
        pool = [make_random_design(rng, 3).elements[i] for i in range(3)]
        cfg = SolverConfig()
        for i in range(25):
            d = make_random_design(rng, rng.randint(3, 9))
            prep = synthesize_generalization_op(d, pool, seed=500 + i)
            result = solve_prepared(prep, cfg)
            exact = apply_operation_exact(
                prep.design,
                prep.operation,
                new_element=NewElementSpec(prep.add_content, prep.add_text_attrs, prep.add_size_hint)
                if prep.add_content
                else None,
                graph=prep.graph,
                cfg=cfg,
            )
            base = residuals(exact, prep.graph, prep.operation, cfg, original=prep.design)
            assert result.residuals.total <= base.total + 1e-9

    def test_solver_never_scores_below_exact_apply(self):
        # paired comparison over 50 generalization draws
        rng = random.Random(77)
        pool = [make_random_design(rng, 2).elements[0] for _ in range(4)]
        solver_cases, exact_cases = [], []
        from layoutedit.metrics import EvalCase, evaluate_corpus

        for i in range(50):
            d = make_random_design(rng, rng.randint(3, 8))
            prep = synthesize_generalization_op(d, pool, seed=9000 + i)
            spec = (
                NewElementSpec(prep.add_content, prep.add_text_attrs, prep.add_size_hint)
                if prep.add_content
                else None
            )
            solved = solve_prepared(prep).design
            exact = apply_operation_exact(
                prep.design, prep.operation, new_element=spec, graph=prep.graph
            )
            solver_cases.append(EvalCase(prep.design, prep.graph, prep.operation, solved))
            exact_cases.append(EvalCase(prep.design, prep.graph, prep.operation, exact))
        solver_report = evaluate_corpus(solver_cases)
        exact_report = evaluate_corpus(exact_cases)
        assert solver_report.pos_rel >= exact_report.pos_rel
        assert solver_report.size_rel >= exact_report.size_rel

    def test_config_loadable_from_file(self, tmp_path):
        path = tmp_path / "solver.json"
        path.write_text(json.dumps({"alpha": 0.2, "restarts": 1, "w_ove": 2.5}), encoding="utf-8")
        cfg = SolverConfig.from_file(str(path))
        assert (cfg.alpha, cfg.restarts, cfg.w_ove) == (0.2, 1, 2.5)
        assert cfg.max_iters == SolverConfig().max_iters  # defaults preserved

    def test_determinism(self):
        d = make_boxes_design((1000, 800), [(500, 100, 300, 80), (500, 400, 200, 100), (200, 600, 150, 150)])
        g = remove_node_edges(build_relation_graph(d, 0.1, seed=3), 0)
        op = EditOperation("move", 0, x=500, y=400)
        a = solve(d, g, op, SolverConfig(seed=5))
        b = solve(d, g, op, SolverConfig(seed=5))
        assert a.design == b.design

    def test_canvas_unchanged(self, appendix_design):
        g = remove_node_edges(build_relation_graph(appendix_design, 0.1, seed=1), 2)
        result = solve(appendix_design, g, EditOperation("resize", 2, width=100, height=100))
        assert result.design.canvas == appendix_design.canvas

    def test_delete_id_map(self, appendix_design):
        g = remove_node_edges(build_relation_graph(appendix_design, 0.1, seed=1), 1)
        result = solve(appendix_design, g, EditOperation("delete", 1))
        assert result.id_map == {0: 0, 2: 1, 3: 2}
        view = original_id_view(result.design, EditOperation("delete", 1), appendix_design.n)
        assert set(view) == {0, 2, 3}

    def test_user_add_yields_exactly_one_new_element(self, appendix_design):
        g = build_relation_graph(appendix_design, 0.1, seed=1)
        spec = NewElementSpec(content=ElementContent("image", "sticker.png"), size_hint=(120, 90))
        result = solve(appendix_design, g, EditOperation("add", 4), new_element=spec)
        assert result.design.n == 5

    def test_infeasible_resize_rejected(self, appendix_design):
        g = build_relation_graph(appendix_design, 0.1, seed=1)
        with pytest.raises(Exception):
            solve(appendix_design, g, EditOperation("resize", 2, width=0, height=10))


class TestPlaceNewElement:
    def test_empty_canvas_placement_inside(self):
        d = make_boxes_design((1000, 1000), [(500, 500, 1000, 1000)])  # backdrop only
        geom = place_new_element(d, None, ElementContent("image", "new.png"), size_hint=(100, 100))
        box = bounding_box(geom)
        assert box.x_left >= 0 and box.y_top >= 0
        assert box.x_right <= 1000 and box.y_bottom <= 1000

    def test_prefers_whitespace_half(self):
        # one element filling the left half: the pick must land on the right
        d = make_boxes_design((1000, 1000), [(250, 500, 500, 1000)])
        geom = place_new_element(d, None, ElementContent("image", "new.png"), size_hint=(120, 100))
        assert geom.cx > 500
        box = bounding_box(geom)
        assert box.x_left >= 500  # zero overlap with the left block

    def test_oversized_donor_scaled_to_fit_aspect_preserved(self):
        d = make_boxes_design((400, 300), [(200, 150, 50, 50)])
        geom = place_new_element(d, None, ElementContent("image", "big.png"), size_hint=(800, 300))
        assert geom.w <= 400 and geom.h <= 300
        assert geom.w / geom.h == pytest.approx(800 / 300)

    def test_deterministic(self):
        d = make_boxes_design((1000, 1000), [(250, 500, 500, 1000)])
        a = place_new_element(d, None, ElementContent("image", "n.png"), size_hint=(70, 70))
        b = place_new_element(d, None, ElementContent("image", "n.png"), size_hint=(70, 70))
        assert a == b


class TestTextRepair:
    def test_repair_scaling_carries_font(self):
        # force a text element to shrink away from an overlap
        text = TextAttrs(font_size=40.0)
        d = make_boxes_design((600, 600), [(300, 300, 200, 100), (300, 300, 150, 80)])
        elements = list(d.elements)
        elements[1] = replace(
            elements[1],
            content=ElementContent("text", "SALE"),
            text_attrs=text,
        )
        d = d.with_elements(elements)
        g = remove_node_edges(build_relation_graph(d, 0.1, seed=2), 0)
        result = solve(d, g, EditOperation("move", 0, x=300, y=300))
        out = result.design.elements[1]
        scale = out.geom.w / d.elements[1].geom.w
        assert out.text_attrs.font_size == pytest.approx(max(1.0, 40.0 * scale))
