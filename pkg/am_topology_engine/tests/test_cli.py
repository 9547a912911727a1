"""
End-to-end runs through main(): exit codes, output files and manifests.
"""
import json

import pandas as pd
import pytest

from main import main
from src.storage.runs import recent_runs
from src.voxel.grid import VoxelGrid
from src.voxel.io import load_grid, save_grid
from src.voxel.scenes import bridge_pair, notched_bar, slotted_frame


@pytest.fixture
def bridge_files(tmp_path):
    design, manufactured = bridge_pair()
    return (save_grid(design, tmp_path / "bridge_design.binvox"),
            save_grid(manufactured, tmp_path / "bridge_manufactured.binvox"))


@pytest.fixture
def notched_file(tmp_path):
    return save_grid(notched_bar(), tmp_path / "notched.binvox")


def read_json(path):
    return json.loads(path.read_text())


# ==================== family ====================

def test_family_writes_members_and_table(notched_file, tmp_path):
    out = tmp_path / "family"
    code = main(["-q", "family", "--design", str(notched_file), "--mmn", "cube:1",
                 "--lambdas", "0,1/2,0.95", "--out", str(out), "--dump-field"])
    assert code == 0
    for i in range(3):
        assert load_grid(out / f"family_{i:03d}.binvox").dims == (11, 5, 5)
    table = pd.read_csv(out / "family.csv")
    assert len(table) == 1 + 3 + 2
    assert table["lambda"].tolist()[0] == "design"
    assert table["lambda"].tolist()[-2:] == ["->1", "0"]
    assert (out / "overlap_field.vtk").exists() and (out / "omr_field.vtk").exists()
    manifest = read_json(out / "manifest.json")
    assert manifest["schema_version"] == "1.0"
    assert manifest["lambdas"] == ["0/1", "1/2", "19/20"]
    assert manifest["summary"]["mmn_measure"] == 27
    members = manifest["summary"]["members"]
    assert manifest["summary"]["member_count"] == 3
    assert [m["lambda"] for m in members] == ["design", "0/1", "1/2", "19/20", "->1", "0"]
    assert [m["volume"] for m in members] == table["volume"].tolist()
    assert members[0]["ud_volume_fraction"] == members[0]["od_volume_fraction"] == 0
    assert all(set(m) >= {"volume", "chi", "ud_volume_fraction", "od_volume_fraction"} for m in members)
    assert [m["chi"] for m in members] == table["chi"].tolist()


def test_family_rejects_unsorted_lambdas(notched_file, tmp_path):
    code = main(["-q", "family", "--design", str(notched_file), "--mmn", "cube:1",
                 "--lambdas", "0.9,0.5", "--out", str(tmp_path / "bad")])
    assert code == 2


# ==================== cta ====================

def test_cta_on_a_grid_pair(bridge_files, tmp_path):
    design, manufactured = bridge_files
    out = tmp_path / "cta"
    code = main(["-q", "cta", "--design", str(design), "--manufactured", str(manufactured),
                 "--out", str(out), "--vtk"])
    assert code == 0
    report = read_json(out / "report.json")
    assert report["schema_version"] == "1.0"
    assert report["delta_chi"] == 1 == report["signed_ecc_sum"]
    assert report["global"]["changed"] is True
    features = pd.read_csv(out / "features.csv")
    assert features["kind"].tolist() == ["UD"]
    assert features["ecc"].tolist() == [-1]
    assert (out / "ecc_field.vtk").exists() and (out / "label_field.vtk").exists()
    manifest = read_json(out / "manifest.json")
    assert set(manifest["input_hashes"]) == {str(design), str(manufactured)}
    assert manifest["summary"]["clean"] is False


def test_cta_accepts_a_report_path(bridge_files, tmp_path):
    design, manufactured = bridge_files
    target = tmp_path / "reports" / "bridge.json"
    code = main(["-q", "cta", "--design", str(design), "--manufactured", str(manufactured),
                 "--out", str(target)])
    assert code == 0
    assert read_json(target)["delta_chi"] == 1
    assert not (target.parent / "report.json").exists()
    manifest = read_json(target.parent / "manifest.json")
    assert manifest["outputs"]["report"] == str(target)
    assert (target.parent / "features.csv").exists()


def test_cta_computes_the_manufactured_shape(notched_file, tmp_path):
    out = tmp_path / "cta"
    code = main(["-q", "cta", "--design", str(notched_file), "--mmn", "cube:1",
                 "--lambda", "0.95", "--out", str(out), "--no-global"])
    assert code == 0
    assert load_grid(out / "manufactured.binvox").volume == notched_bar().volume - 1
    report = read_json(out / "report.json")
    assert "global" not in report
    assert report["aggregates"]["ud_nonsimple"] == 1
    assert read_json(out / "manifest.json")["lam"] == "19/20"


def test_cta_output_is_deterministic(bridge_files, tmp_path):
    design, manufactured = bridge_files
    reports = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["-q", "--workers", "3" if name == "a" else "1", "cta", "--design", str(design),
                     "--manufactured", str(manufactured), "--out", str(out)]) == 0
        report = read_json(out / "report.json")
        report.pop("timings")
        reports.append(report)
        assert (out / "features.csv").read_text() == (tmp_path / "a" / "features.csv").read_text()
    assert reports[0] == reports[1]


def test_cta_needs_a_manufactured_source(bridge_files, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["-q", "cta", "--design", str(bridge_files[0]), "--mmn", "cube:1",
              "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


@pytest.mark.parametrize("case", ["frame", "missing", "garbage", "mmn", "lambda"])
def test_input_errors_exit_2(case, bridge_files, tmp_path):
    design, manufactured = bridge_files
    args = ["-q", "cta", "--design", str(design), "--out", str(tmp_path / "out")]
    if case == "frame":
        other = save_grid(VoxelGrid.empty((9, 5, 6)), tmp_path / "other.binvox")
        args += ["--manufactured", str(other)]
    elif case == "missing":
        args += ["--manufactured", str(tmp_path / "nope.binvox")]
    elif case == "garbage":
        junk = tmp_path / "junk.binvox"
        junk.write_bytes(b"not a grid")
        args += ["--manufactured", str(junk)]
    elif case == "mmn":
        args += ["--mmn", "blob:2", "--lambda", "0.5"]
    else:
        args += ["--mmn", "cube:1", "--lambda", "1.5"]
    assert main(args) == 2


# ==================== correct ====================

def test_correct_clean_run(notched_file, tmp_path):
    out = tmp_path / "correct"
    code = main(["-q", "correct", "--design", str(notched_file), "--mmn", "cube:1",
                 "--lambda", "0.95", "--step", "1/16", "--out", str(out)])
    assert code == 0
    trace = read_json(out / "trace.json")
    assert trace["terminated_by"] == "clean"
    assert len(pd.read_csv(out / "trace.csv")) == len(trace["iterations"])
    assert load_grid(out / "corrected.binvox").volume == 9 * 3 * 3
    manifest = read_json(out / "manifest.json")
    assert manifest["exit_code"] == 0
    assert manifest["config"]["step"] == "1/16"
    assert manifest["omrt"]["bumps"][0]["center"] == [5, 2, 2]


def test_correct_not_clean_exits_5(tmp_path):
    design = save_grid(slotted_frame(), tmp_path / "slotted.binvox")
    out = tmp_path / "correct"
    code = main(["-q", "correct", "--design", str(design), "--mmn", "cube:1",
                 "--lambda", "0.95", "--out", str(out)])
    assert code == 5
    assert read_json(out / "manifest.json")["exit_code"] == 5
    assert (out / "corrected.binvox").exists()


def test_correct_reads_a_config_file(notched_file, tmp_path):
    cfg = tmp_path / "correct.json"
    cfg.write_text(json.dumps({"initial_lambda": "0.95", "step": "1/16", "max_iters": 0}))
    out = tmp_path / "correct"
    code = main(["-q", "correct", "--design", str(notched_file), "--mmn", "cube:1",
                 "--config", str(cfg), "--out", str(out)])
    assert code == 5
    assert read_json(out / "trace.json")["terminated_by"] == "iter-cap"


def test_correct_bad_step_exits_2(notched_file, tmp_path):
    assert main(["-q", "correct", "--design", str(notched_file), "--mmn", "cube:1",
                 "--step", "0", "--out", str(tmp_path / "c")]) == 2


# ==================== slice ====================

def test_slice_pipeline(notched_file, tmp_path):
    out = tmp_path / "slices"
    code = main(["-q", "slice", "--design", str(notched_file), "--axis", "z", "--mmn", "cube:1",
                 "--lambda", "0.95", "--out", str(out)])
    assert code == 0
    data = read_json(out / "slices.json")
    assert data["axis"] == "z"
    assert "stacked 3D part" in data["caveat"]
    assert data["summary"] == {
        "layers": 5, "empty_layers": 2, "clean_layers": 2,
        "layers_with_chi_change": 1, "nonsimple_features": 1,
    }
    assert data["slices"][0] == {"layer": 0, "empty": True}
    assert data["slices"][2]["delta_chi"] == 1
    assert load_grid(out / "manufactured.binvox").dims == (11, 5, 5)


# ==================== registry ====================

def test_record_and_list_runs(bridge_files, tmp_path, capsys):
    design, manufactured = bridge_files
    before = len(recent_runs(limit=1000))
    out = tmp_path / "recorded"
    assert main(["-q", "--record", "cta", "--design", str(design),
                 "--manufactured", str(manufactured), "--out", str(out)]) == 0
    runs = recent_runs(limit=1000)
    assert len(runs) == before + 1
    latest = runs[0]
    assert latest.command == "cta"
    assert latest.status == "OK"
    assert latest.output_dir == str(out)

    capsys.readouterr()
    assert main(["-q", "runs", "--limit", "5"]) == 0
    assert latest.run_id in capsys.readouterr().out
