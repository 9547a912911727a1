"""
Correction policy and loop.
"""
import json
import math
from fractions import Fraction

import pytest
from pydantic import ValidationError

from src.correct.loop import TERMINATIONS, CorrectionTrace, correct_loop
from src.correct.policy import CorrectionConfig, adjust_omrt, bump_center, describe_config
from src.cta.ledger import ledger
from src.morphology.motion import as_manufactured, family
from src.morphology.omrt import OmrtField
from src.orchestration.run_correct import load_config
from src.voxel.mmn import MmnSpec, make_mmn
from src.voxel.scenes import notched_bar, slotted_frame, solid_box

CUBE = make_mmn(MmnSpec(shape="cube", radius=1))


def config(**kwargs) -> CorrectionConfig:
    base = {"initial_lambda": "0.95", "step": "1/16", "max_iters": 20, "deviation_budget": 0.25}
    return CorrectionConfig(**(base | kwargs))


# ==================== config ====================

def test_config_keeps_exact_rationals():
    cfg = config()
    assert cfg.initial_lambda == Fraction(19, 20)
    assert cfg.step == Fraction(1, 16)
    dumped = cfg.model_dump(mode="json")
    assert dumped["initial_lambda"] == "19/20"
    assert dumped["step"] == "1/16"
    assert CorrectionConfig(**dumped) == cfg
    assert config(initial_lambda=0.95).initial_lambda == Fraction(19, 20)


@pytest.mark.parametrize("bad", [{"step": "0"}, {"step": "-1/16"}, {"max_iters": -1},
                                 {"deviation_budget": -0.1}, {"initial_lambda": "1"}])
def test_config_rejects(bad):
    with pytest.raises(ValidationError):
        config(**bad)


def test_config_defaults_follow_settings():
    described = describe_config(None)
    assert described["initial_lambda"] == "19/20"
    assert described["step"] == "1/16"
    assert described["max_iters"] == 20


def test_load_config_layers_overrides(tmp_path):
    path = tmp_path / "correct.json"
    path.write_text(json.dumps({"initial_lambda": "3/4", "step": "1/8", "max_iters": 5}))
    cfg = load_config(path, {"max_iters": 2, "step": None})
    assert cfg.initial_lambda == Fraction(3, 4)
    assert cfg.step == Fraction(1, 8)
    assert cfg.max_iters == 2


# ==================== policy ====================

def test_bump_center_rounds_half_up():
    assert bump_center((1.5, 2.49, -0.5)) == (2, 2, 0)


def test_adjust_omrt_bumps_each_nonsimple_feature():
    design = notched_bar()
    report = ledger(design, as_manufactured(design, CUBE, "0.95"))
    assert len(report.nonsimple_ud) == 1 and not report.nonsimple_od

    cfg = config()
    omrt = adjust_omrt(OmrtField.uniform("0.95"), report, cfg, CUBE)
    (bump,) = omrt.bumps
    assert bump.center == (5, 2, 2)
    assert bump.coefficient == Fraction(-1, 16)
    assert bump.radius == pytest.approx(2 * math.sqrt(3))

    again = adjust_omrt(omrt, report, cfg, CUBE)
    assert again.term_count == 2
    assert again.bumps[0].coefficient == Fraction(-1, 8)

    padded = adjust_omrt(OmrtField.uniform("0.95"), report, config(radius_padding=1.0), CUBE)
    assert padded.bumps[0].radius == pytest.approx(2 * math.sqrt(3) + 1.0)


# ==================== loop ====================

def test_notched_bar_is_repaired():
    design = notched_bar()
    shape, trace = correct_loop(design, CUBE, config(), workers=1)
    first = trace.iterations[0]
    assert (first.nonsimple_ud, first.nonsimple_od, first.delta_chi) == (1, 0, 1)
    assert first.omrt.bumps == ()

    assert trace.clean and trace.terminated_by == "clean"
    # the bump must bring lambda* at the notch below 19/27
    assert len(trace.iterations) == 5
    assert trace.final_report.is_clean
    assert shape == solid_box((11, 5, 5), (1, 1, 1), (9, 3, 3))
    assert [r.iteration for r in trace.iterations] == list(range(5))
    increase = trace.iterations[-1].deviation_volume - trace.iterations[0].deviation_volume
    assert increase == 7
    assert increase <= config().deviation_budget * design.volume


def test_iteration_cap_zero_gives_one_record():
    _, trace = correct_loop(notched_bar(), CUBE, config(max_iters=0))
    assert len(trace.iterations) == 1
    assert trace.terminated_by == "iter-cap"
    assert not trace.clean


def test_clean_design_stops_immediately():
    design = solid_box((7, 7, 7), (1, 1, 1), (5, 5, 5))
    shape, trace = correct_loop(design, CUBE, config())
    assert trace.terminated_by == "clean"
    assert len(trace.iterations) == 1
    assert shape == design


def test_slotted_frame_cannot_be_cleaned():
    cfg = config()
    _, trace = correct_loop(slotted_frame(), CUBE, cfg, workers=1)
    assert not trace.clean
    # iteration 4 half-restores the beam, iteration 6 fills the slot,
    # iteration 7 falls back to the iteration-4 feature set
    assert trace.terminated_by == "oscillation"
    assert len(trace.iterations) == 8
    last = trace.iterations[-1]
    assert (last.nonsimple_ud, last.nonsimple_od) == (1, 0)
    assert trace.iterations[6].nonsimple_od == 1


def test_no_uniform_threshold_fixes_the_slotted_frame():
    design = slotted_frame()
    # motion sets only change where floor(lambda * 27) does
    lambdas = [Fraction(k, 27) for k in range(27)]
    for lam, member in family(design, CUBE, lambdas, workers=2):
        report = ledger(design, member, workers=1)
        assert not report.is_clean, f"lambda={lam} kept the slot and the beam"


def test_clean_but_over_budget_stops_on_budget():
    design = notched_bar()
    _, trace = correct_loop(design, CUBE, config(deviation_budget=0.05), workers=1)
    assert trace.terminated_by == "budget"
    assert len(trace.iterations) == 5
    assert trace.final_report.is_clean



def test_trace_exports():
    _, trace = correct_loop(notched_bar(), CUBE, config(max_iters=2))
    data = trace.to_dict()
    assert data["terminated_by"] == "iter-cap"
    assert len(data["iterations"]) == 3
    assert data["iterations"][2]["omrt"]["bumps"][0]["coefficient"] == "-1/8"
    frame = trace.frame()
    assert frame["bumps"].tolist() == [0, 1, 1]
    assert "omrt" not in frame.columns


def test_trace_rejects_unknown_termination():
    assert CorrectionTrace([], "clean").clean
    with pytest.raises(ValueError):
        CorrectionTrace([], "gave-up")
    assert set(TERMINATIONS) == {"clean", "iter-cap", "budget", "oscillation"}
