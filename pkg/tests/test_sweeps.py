import json
import math

import numpy as np
import pytest

from splab.domains import DomainSpec
from splab.errors import SplabError
from splab.sweeps import SweepConfig, SweepRecord, run_sweep, write_csvs


def small_config(**overrides):
    base = dict(
        omega=DomainSpec.box(lo=(-1, -1, -1), hi=(1, 1, 1)),
        r=0.5, R=4.0, p=2.5,
        rho_list=(0.5,),
        lambda_list=(2.0,),
        radial_lambda_list=(2.0, 4.0),
        annulus_lambda_list=(2.0,),
        annulus_R=1.5,
        cells_per_unit=4.0,
        radial_points_per_unit=96,
        truncation_radius=12.0,
        max_iters=6000,
    )
    base.update(overrides)
    return SweepConfig(**base)


def test_config_validation():
    with pytest.raises(SplabError):
        small_config(omega=DomainSpec.box(lo=(1, 1, 1), hi=(2, 2, 2)))  # 0 outside
    with pytest.raises(SplabError):
        small_config(r=1.5)  # B_r not inside Omega
    with pytest.raises(SplabError):
        small_config(R=1.0)  # R below diam Omega
    with pytest.raises(SplabError):
        small_config(quantities=("nonsense",))


def test_config_json_round_trip():
    cfg = small_config()
    blob = json.dumps(cfg.to_json(), sort_keys=True)
    back = SweepConfig.from_json(json.loads(blob))
    assert back == cfg
    assert back.config_hash() == cfg.config_hash()


def test_run_sweep_records_and_determinism(tmp_path):
    cfg = small_config()
    rec1, rep1 = run_sweep(cfg, workers=1, out_dir=str(tmp_path / "a"))
    rec2, rep2 = run_sweep(cfg, workers=1, out_dir=str(tmp_path / "b"))
    assert [r.as_dict() for r in rec1] == [r.as_dict() for r in rec2]
    quantities = {r.quantity for r in rec1}
    assert {"c_inf", "b_star", "b_lambda", "c_lambda", "a", "l"} <= quantities
    ci = [r for r in rec1 if r.quantity == "c_inf"][0]
    assert ci.value < 0
    assert any(f.startswith("truncation_radius") for f in ci.flags)
    ls = [r for r in rec1 if r.quantity == "l"]
    bs = {(r.lam, r.rho): r for r in rec1 if r.quantity == "b_star"}
    for l in ls:
        assert l.value > bs[(l.lam, l.rho)].value


def test_run_sweep_out_dirs(tmp_path):
    import os

    cfg = small_config(quantities=("c_inf", "b_star", "l"))
    out = tmp_path / "out"
    out.mkdir()
    records, _ = run_sweep(cfg, workers=1, out_dir=str(out))
    files = write_csvs(records, str(out), cfg)
    names = {os.path.basename(f) for f in files}
    assert {"c_inf.csv", "b_star.csv", "l.csv"} <= names
    header = open(files[0]).readline().strip().split(",")
    for col in ("kinetic", "nonlocal", "power", "total", "omega", "mass",
                "gap_to_c_inf", "flags"):
        assert col in header


def test_resume_skips_completed(tmp_path):
    import time

    cfg = small_config(quantities=("b_star",))
    out = str(tmp_path)
    rec1, _ = run_sweep(cfg, workers=1, out_dir=out)
    t0 = time.time()
    rec2, _ = run_sweep(cfg, workers=1, out_dir=out)
    assert time.time() - t0 < 1.0
    assert [r.as_dict() for r in rec1] == [r.as_dict() for r in rec2]


def test_workers_do_not_change_csv(tmp_path):
    cfg = small_config(quantities=("b_star", "c_inf", "l"))
    a, b = tmp_path / "w1", tmp_path / "w2"
    a.mkdir(), b.mkdir()
    rec1, _ = run_sweep(cfg, workers=1, out_dir=str(a))
    rec2, _ = run_sweep(cfg, workers=2, out_dir=str(b))
    f1 = write_csvs(rec1, str(a), cfg)
    f2 = write_csvs(rec2, str(b), cfg)
    for pa, pb in zip(sorted(f1), sorted(f2)):
        assert open(pa, "rb").read() == open(pb, "rb").read()


def test_record_round_trip():
    rec = SweepRecord(quantity="b_star", lam=2.0, rho=0.5, p=2.5, value=-0.1,
                      omega=-0.05, iterations=100, h=0.01, kinetic=1.0,
                      nonlocal_=0.1, power=1.2, mass=0.25,
                      flags=("stagnation",))
    back = SweepRecord.from_dict(rec.as_dict())
    assert back == rec


def test_failed_task_becomes_flagged_row(tmp_path, monkeypatch):
    # a cells_per_unit far beyond the cap turns c_lambda into a flagged row
    cfg = small_config(quantities=("c_lambda",), cells_per_unit=300.0)
    records, _ = run_sweep(cfg, workers=1, out_dir=str(tmp_path))
    assert len(records) == 1
    assert math.isnan(records[0].value)
    assert any(f.startswith("error:") for f in records[0].flags)
