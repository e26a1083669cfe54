import json

import numpy as np
import pytest

from anisofit.cli import main
from anisofit.datasets import save_dataset, synth_dataset
from anisofit.errors import DomainError
from anisofit.io import RunConfig, load_config, reports_from_json, run_eval, run_fit, run_polar
from anisofit.optimize import GAConfig

from conftest import AAA, aaa_spec

SMALL_GA = GAConfig(population=16, generations=6, n_refine=2)


@pytest.fixture
def hgo_files(tmp_path):
    spec = aaa_spec("HGO")
    a = save_dataset(synth_dataset(spec, "UT1", 1.2, 10), tmp_path / "ut1.csv")
    b = save_dataset(synth_dataset(spec, "UT2", 1.2, 10), tmp_path / "ut2.csv")
    return str(a), str(b)


def test_load_config(tmp_path, hgo_files):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[run]\nmodels = GOH, HGO\ndata = ut1.csv, ut2.csv\nseed = 7\nphi_deg = 26\nfix_weights = 0.4, 0.6\n"
        "[ga]\npopulation = 12\nmutation_rate = 0.3\n"
        "[GOH]\nkappa = 0, 0.3 ; bounds\nk2 = 161.392\n"
    )
    cfg = load_config(ini).validate()
    assert cfg.models == ("GOH", "HGO") and cfg.seed == 7 and cfg.phi_deg == 26.0
    assert cfg.fixed_weights == (0.4, 0.6)
    assert cfg.ga.population == 12 and cfg.ga.mutation_rate == 0.3
    assert cfg.values == {"GOH": {"k2": 161.392}} and cfg.bounds == {"GOH": {"kappa": (0.0, 0.3)}}
    assert cfg.data[0].endswith("ut1.csv")


def test_config_errors(tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[XYZ]\na = 1\n")
    with pytest.raises(DomainError):
        load_config(ini)
    ini.write_text("[ga]\nspeed = 1\n")
    with pytest.raises(DomainError):
        load_config(ini)
    with pytest.raises(FileNotFoundError):
        RunConfig(models=("HGO",), data=(str(tmp_path / "missing.csv"),)).validate()


def test_config_hash_ignores_output(hgo_files):
    a = RunConfig(models=("HGO",), data=hgo_files, out="x")
    assert a.hash() == RunConfig(models=("HGO",), data=hgo_files, out="y").hash()
    assert a.hash() != RunConfig(models=("HGO",), data=hgo_files, seed=1).hash()


def test_run_fit_outputs(tmp_path, hgo_files):
    out = tmp_path / "res"
    cfg = RunConfig(models=("HGO",), data=hgo_files, phi_deg=26.0, out=str(out), ga=SMALL_GA)
    summary = run_fit(cfg)
    res, q = summary["HGO"]
    assert q.chi2_total < 1e-6
    doc = json.loads((out / "HGO.json").read_text())
    assert doc["fit"]["params"]["k2"] == pytest.approx(AAA["HGO"]["k2"], rel=1e-3)
    assert sum(doc["fit"]["weights"]) == pytest.approx(1.0)
    assert "runtime" not in (out / "HGO.json").read_text()
    assert "runtime" in (out / "HGO.txt").read_text()
    curves = (out / "HGO_curves.csv").read_text().splitlines()
    assert len(curves) == 21
    assert (out / "ranking.csv").read_text().startswith("rank,model")
    assert reports_from_json([out / "HGO.json"])[0].chi2_total == pytest.approx(q.chi2_total)


def test_run_eval_and_polar(tmp_path, hgo_files):
    cfg = RunConfig(models=("HGO", "GOH"), data=hgo_files, phi_deg=26.0, out=str(tmp_path),
                    values={"HGO": AAA["HGO"], "GOH": AAA["GOH"]})
    reps = run_eval(cfg)
    assert reps[0].chi2_total == pytest.approx(0.0, abs=1e-20)
    assert reps[1].chi2_total > 0
    paths = run_polar(cfg)
    hgo = paths[0].read_text().splitlines()
    goh = paths[1].read_text().splitlines()
    assert hgo[0] == "alpha_deg,ds" and goh[0] == "alpha_deg,ds,density"
    assert len(hgo) == 362
    vals = np.array([float(r.split(",")[1]) for r in goh[1:]])
    assert vals[0] == pytest.approx(vals[180], rel=1e-6)


def test_cli_pipeline(tmp_path, capsys):
    csv = tmp_path / "goh.csv"
    p = [f"--param={k}={v}" for k, v in AAA["HGO"].items()]
    assert main(["synth", "--model", "HGO", "--phi-deg", "26", *p, "--mode", "UT1",
                 "--lambda-max", "1.2", "--n", "8", "--out", str(csv)]) == 0
    assert csv.is_file()
    assert main(["eval", "--model", "HGO", "--data", str(csv), "--phi-deg", "26", *p, "--out", str(tmp_path)]) == 0
    assert main(["rank", str(tmp_path / "HGO_quality.json")]) == 0
    assert "HGO" in capsys.readouterr().out


def test_cli_errors(tmp_path, capsys):
    assert main(["fit", "--model", "HGO", "--data", str(tmp_path / "nope.csv")]) == 2
    assert "dataset not found" in capsys.readouterr().err
    assert main(["synth", "--model", "HGO", "--model", "GOH", "--param", "mu=1", "--mode", "UT1",
                 "--lambda-max", "1.2"]) == 1
    with pytest.raises(SystemExit):
        main(["fit", "--model", "NOPE"])
