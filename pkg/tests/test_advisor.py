"""Speed-grid scanning, advisory outcomes, and their renderings."""
import math

import pytest
from hypothesis import given, settings, strategies as st

from pickline.advisor import (
    BATH_FIELDS,
    Infeasible,
    MaxSpeed,
    ScanGrid,
    SpeedRange,
    advice_to_dict,
    advise,
    bath_inputs,
    class_bounds_text,
    parse_advice,
    render_advice,
    scan_speeds,
    summary_line,
)
from pickline.errors import (
    ConfigurationError,
    InvalidInputError,
    RecordValidationError,
)
from pickline.records import DEFECT, NO_DEFECT, SpeedClass
from pickline.recbfn import RecBFNetwork
from pickline.tree import DecisionTree, Leaf

from .conftest import _leaf_tree, _network, _box_unit
from .test_records import make_record

TEN_GRID = ScanGrid(100.0, 500.0, 10.0)


class TestScanGrid:
    def test_default_grid_has_81_points(self):
        points = ScanGrid().points()
        assert len(points) == 81
        assert points[0] == 100.0
        assert points[-1] == 500.0

    def test_step_ten_grid_has_41_points(self):
        points = TEN_GRID.points()
        assert len(points) == 41
        assert points[20] == 300.0

    def test_ragged_top_edge_is_dropped(self):
        points = ScanGrid(100.0, 112.0, 5.0).points()
        assert list(points) == [100.0, 105.0, 110.0]

    @pytest.mark.parametrize("kwargs", [
        {"v_min": 0.0},
        {"v_min": -5.0},
        {"v_min": 500.0, "v_max": 100.0},
        {"step": 0.0},
        {"step": -1.0},
        {"v_min": 100.0, "v_max": 102.0, "step": 5.0},
        {"step": float("nan")},
        {"v_max": float("inf")},
    ])
    def test_bad_grids_rejected(self, kwargs):
        with pytest.raises(InvalidInputError):
            ScanGrid(**kwargs)


class TestBathInputs:
    def test_record_fields_in_network_order(self):
        record = make_record()
        vec = bath_inputs(record)
        assert list(vec) == [record.value(name) for name in BATH_FIELDS]

    def test_mapping_fields(self, advisory_inputs):
        vec = bath_inputs(advisory_inputs)
        assert list(vec) == [advisory_inputs[name] for name in BATH_FIELDS]

    def test_missing_field_named(self, advisory_inputs):
        del advisory_inputs["HCl_2"]
        with pytest.raises(InvalidInputError, match="HCl_2"):
            bath_inputs(advisory_inputs)


class TestScanSpeeds:
    def test_flip_network_trace(self, flip_network, advisory_inputs):
        trace = scan_speeds(flip_network, advisory_inputs)
        assert len(trace) == 81
        assert trace[39].v == 295.0 and trace[39].prediction == NO_DEFECT
        assert trace[40].v == 300.0 and trace[40].prediction == DEFECT
        assert all(t.prediction == DEFECT for t in trace[40:])

    def test_record_bath_accepted(self, flip_network):
        trace = scan_speeds(flip_network, make_record(), TEN_GRID)
        assert len(trace) == 41

    def test_out_of_bound_bath_rejected(self, flip_network, advisory_inputs):
        advisory_inputs["HCl_2"] = 35.0
        with pytest.raises(RecordValidationError) as err:
            scan_speeds(flip_network, advisory_inputs)
        assert any(v.field == "HCl_2" for v in err.value.violations)

    def test_oracle_trace_is_monotone(self, oracle, advisory_inputs):
        trace = scan_speeds(oracle, advisory_inputs,
                            ScanGrid(100.0, 500.0, 2.0))
        labels = [t.prediction for t in trace]
        if DEFECT in labels:
            first = labels.index(DEFECT)
            assert all(lbl == NO_DEFECT for lbl in labels[:first])
            assert all(lbl == DEFECT for lbl in labels[first:])


class TestAdvise:
    def test_max_speed_outcome(self, flip_network, leaf_tree_b, advisory_inputs):
        advice = advise(leaf_tree_b, flip_network, advisory_inputs, TEN_GRID)
        assert isinstance(advice, MaxSpeed)
        assert advice.v_star == 290.0
        assert advice.first_defect_speed == 300.0
        assert len(advice.trace) == 41

    def test_max_speed_is_sound_against_its_own_trace(
            self, flip_network, leaf_tree_b, advisory_inputs):
        advice = advise(leaf_tree_b, flip_network, advisory_inputs, TEN_GRID)
        by_speed = {t.v: t.prediction for t in advice.trace}
        assert by_speed[advice.v_star] == NO_DEFECT
        assert by_speed[advice.first_defect_speed] == DEFECT

    def test_clear_grid_falls_back_to_tree_class(
            self, clear_network, leaf_tree_b, advisory_inputs):
        advice = advise(leaf_tree_b, clear_network, advisory_inputs)
        assert isinstance(advice, SpeedRange)
        assert advice.speed_class is SpeedClass.B
        assert advice.bounds == (245.0, 385.0)
        assert all(t.prediction == NO_DEFECT for t in advice.trace)

    def test_defect_at_lowest_speed_is_infeasible(
            self, defect_network, leaf_tree_b, advisory_inputs):
        advice = advise(leaf_tree_b, defect_network, advisory_inputs)
        assert isinstance(advice, Infeasible)
        assert advice.trace[0].prediction == DEFECT

    def test_class_u_tree_is_infeasible(
            self, clear_network, leaf_tree_u, advisory_inputs):
        advice = advise(leaf_tree_u, clear_network, advisory_inputs)
        assert isinstance(advice, Infeasible)
        assert "U" in advice.reason

    def test_defect_band_stops_the_scan(
            self, midband_network, leaf_tree_b, advisory_inputs):
        """Clear speeds above a defective band are never recommended."""
        advice = advise(leaf_tree_b, midband_network, advisory_inputs, TEN_GRID)
        assert isinstance(advice, MaxSpeed)
        assert advice.v_star == 230.0
        assert advice.first_defect_speed == 240.0
        assert advice.trace[-1].prediction == NO_DEFECT

    def test_missing_input_rejected(self, flip_network, leaf_tree_b,
                                    advisory_inputs):
        del advisory_inputs["T_rinse"]
        with pytest.raises(RecordValidationError) as err:
            advise(leaf_tree_b, flip_network, advisory_inputs)
        assert [v.field for v in err.value.violations] == ["T_rinse"]

    def test_out_of_bound_input_rejected(self, flip_network, leaf_tree_b,
                                         advisory_inputs):
        advisory_inputs["T_3"] = 150.0
        with pytest.raises(RecordValidationError):
            advise(leaf_tree_b, flip_network, advisory_inputs)

    def test_mismatched_network_features_rejected(self, flip_network,
                                                  leaf_tree_b, advisory_inputs):
        wrong = RecBFNetwork.from_units(list(flip_network.units()),
                                        flip_network.scaler,
                                        feature_names=tuple("abcdefgh"))
        with pytest.raises(ConfigurationError):
            advise(leaf_tree_b, wrong, advisory_inputs)

    def test_mismatched_tree_features_rejected(self, flip_network,
                                               advisory_inputs):
        wrong = DecisionTree(root=Leaf(SpeedClass.B, (0, 5, 0, 0)),
                             feature_names=("a", "b"), seed=0, sample_count=5)
        with pytest.raises(ConfigurationError):
            advise(wrong, flip_network, advisory_inputs)

    @pytest.mark.parametrize("coarse,fine", [(40.0, 20.0), (20.0, 10.0),
                                             (10.0, 5.0)])
    def test_halving_the_step_never_lowers_v_star(
            self, flip_network, leaf_tree_b, advisory_inputs, coarse, fine):
        low = advise(leaf_tree_b, flip_network, advisory_inputs,
                     ScanGrid(100.0, 500.0, coarse))
        high = advise(leaf_tree_b, flip_network, advisory_inputs,
                      ScanGrid(100.0, 500.0, fine))
        assert low.v_star <= high.v_star
        assert high.v_star - low.v_star < coarse

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from([50.0, 40.0, 25.0, 20.0, 10.0, 8.0, 4.0]),
           st.floats(min_value=110.0, max_value=490.0))
    def test_refinement_bound_holds_for_any_flip_point(self, step, flip_raw):
        scaled = (flip_raw - 100.0) / 400.0
        network = _network([
            _box_unit(NO_DEFECT, 1),
            _box_unit(DEFECT, 2, v_interval=(scaled, 1.25)),
        ])
        tree = _leaf_tree(SpeedClass.B)
        inputs = {"t_s": 3.0, "W": 25.0, "T_1": 74.0, "T_2": 80.0,
                  "T_3": 85.0, "T_rinse": 60.0, "HCl_1": 5.0, "Fe2_1": 5.0,
                  "HCl_2": 10.0, "Fe2_2": 5.0, "HCl_3": 15.0, "Fe2_3": 5.0}
        coarse = advise(tree, network, inputs, ScanGrid(100.0, 500.0, step))
        fine = advise(tree, network, inputs, ScanGrid(100.0, 500.0, step / 2))
        if isinstance(coarse, MaxSpeed) and isinstance(fine, MaxSpeed):
            assert coarse.v_star <= fine.v_star
            assert fine.v_star - coarse.v_star < step


class TestRenderings:
    def advice_of_each_kind(self, flip_network, clear_network, defect_network,
                            leaf_tree_b, advisory_inputs):
        return [
            advise(leaf_tree_b, flip_network, advisory_inputs, TEN_GRID),
            advise(leaf_tree_b, clear_network, advisory_inputs, TEN_GRID),
            advise(leaf_tree_b, defect_network, advisory_inputs, TEN_GRID),
        ]

    def test_text_round_trip_every_kind(self, flip_network, clear_network,
                                        defect_network, leaf_tree_b,
                                        advisory_inputs):
        for advice in self.advice_of_each_kind(
                flip_network, clear_network, defect_network, leaf_tree_b,
                advisory_inputs):
            assert parse_advice(render_advice(advice)) == advice

    def test_unbounded_class_round_trips(self, advisory_inputs, clear_network):
        advice = advise(_leaf_tree(SpeedClass.C), clear_network,
                        advisory_inputs, TEN_GRID)
        assert advice.bounds == (385.0, math.inf)
        assert parse_advice(render_advice(advice)) == advice

    def test_parse_rejects_garbage(self):
        with pytest.raises(InvalidInputError):
            parse_advice("nonsense\n")
        with pytest.raises(InvalidInputError):
            parse_advice("advice teleport\ntrace\n")

    def test_class_bounds_text(self):
        assert class_bounds_text(SpeedClass.A) == "(0,245)"
        assert class_bounds_text(SpeedClass.B) == "[245,385)"
        assert class_bounds_text(SpeedClass.C) == "[385,inf)"

    def test_summary_lines(self, flip_network, clear_network, defect_network,
                           leaf_tree_b, advisory_inputs):
        max_speed, speed_range, infeasible = self.advice_of_each_kind(
            flip_network, clear_network, defect_network, leaf_tree_b,
            advisory_inputs)
        assert summary_line(max_speed) == "MAX_SPEED 290 (first defect at 300)"
        assert summary_line(speed_range) == "RANGE B [245,385)"
        assert summary_line(infeasible).startswith("INFEASIBLE ")

    def test_dict_rendering(self, flip_network, leaf_tree_b, advisory_inputs,
                            clear_network):
        payload = advice_to_dict(
            advise(leaf_tree_b, flip_network, advisory_inputs, TEN_GRID))
        assert payload["kind"] == "max_speed"
        assert payload["v_star"] == 290.0
        assert payload["first_defect_speed"] == 300.0
        assert payload["trace"][20] == {"v": 300.0, "prediction": DEFECT}

        unbounded = advice_to_dict(
            advise(_leaf_tree(SpeedClass.C), clear_network, advisory_inputs,
                   TEN_GRID))
        assert unbounded["bounds"] == [385.0, None]
