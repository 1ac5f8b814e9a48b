import json
import math
import os

import numpy as np
import pytest
from scipy.stats import kstest

from graphwhittle.cli import main as cli_main
from graphwhittle.config import (ExperimentConfig, config_from_dict, config_from_json,
                                 config_json, load_config)
from graphwhittle.errors import ConfigError
from graphwhittle.experiments import (emit_report, parse_replicates_csv,
                                      run_monte_carlo)


SMALL_MC = dict(graph_size=60, target_volume=100, proxy_size=2000, replicates=6,
                kinds=("tilde", "unbiased"), seed=99, workers=2)


def test_config_defaults_validate():
    ExperimentConfig().validate()


def test_config_round_trip_through_json():
    cfg = ExperimentConfig(**SMALL_MC).validate()
    again = config_from_json(config_json(cfg))
    assert again == cfg


def test_config_unknown_section_and_key_rejected():
    with pytest.raises(ConfigError):
        config_from_dict({"graphs": {"kind": "path"}})
    with pytest.raises(ConfigError):
        config_from_dict({"graph": {"kind": "path", "bogus": 1}})


def test_config_toml_parsing(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(
        "[graph]\nkind = \"rhombus_chain\"\nsize = 60\n"
        "[subgraphs]\ntarget_volume = 100\n"
        "[estimation]\nkinds = [\"tilde\"]\n"
        "[monte_carlo]\nreplicates = 3\nseed = 7\n")
    cfg = load_config(path)
    assert cfg.graph_size == 60 and cfg.replicates == 3 and cfg.kinds == ("tilde",)


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        ExperimentConfig(theta0=0.9).validate()  # outside the interval
    with pytest.raises(ConfigError):
        ExperimentConfig(kinds=("nope",)).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(graph_kind="hypercube").validate()


def test_run_monte_carlo_small_end_to_end(tmp_path):
    cfg = ExperimentConfig(out_dir=str(tmp_path), **SMALL_MC).validate()
    report = run_monte_carlo(cfg)
    assert len(report.rows) == cfg.replicates * len(cfg.kinds)
    for kind in cfg.kinds:
        s = report.summary[kind]
        assert s["n_ok"] == cfg.replicates and s["n_failed"] == 0
        assert 0.0 <= s["ks_z"] <= 1.0
        hist_mass = sum(c for (_, _, c, _) in report.histograms[kind])
        assert hist_mass == cfg.replicates
    paths = emit_report(report, "csv", str(tmp_path))
    names = {os.path.basename(p) for p in paths}
    assert names == {"replicates.csv", "summary.json", "histogram.csv",
                     "histogram_unbiased.csv", "config.json"}


def test_replicates_csv_round_trip(tmp_path):
    cfg = ExperimentConfig(out_dir=str(tmp_path), **SMALL_MC).validate()
    report = run_monte_carlo(cfg)
    emit_report(report, "csv", str(tmp_path))
    rows = parse_replicates_csv(tmp_path / "replicates.csv")
    assert len(rows) == len(report.rows)
    for parsed, orig in zip(rows, report.rows):
        assert parsed["replicate"] == orig["replicate"]
        assert parsed["kind"] == orig["kind"]
        assert parsed["theta_hat"] == pytest.approx(orig["theta_hat"], abs=1e-15)
        assert parsed["status"] == orig["status"]


def test_histogram_density_integrates_to_replicates(tmp_path):
    cfg = ExperimentConfig(out_dir=str(tmp_path), replicates=40, graph_size=60,
                           target_volume=100, proxy_size=2000,
                           kinds=("unbiased",), seed=5).validate()
    report = run_monte_carlo(cfg)
    emit_report(report, "csv", str(tmp_path))
    total = 0.0
    with open(tmp_path / "histogram.csv") as fh:
        fh.readline()
        for line in fh:
            lo, hi, count, dens = line.strip().split(",")
            lo, hi, dens = float(lo), float(hi), float(dens)
            if math.isfinite(lo) and math.isfinite(hi):
                total += dens * (hi - lo) * cfg.replicates
    assert total == pytest.approx(cfg.replicates, rel=0.02)


def test_empty_report_files_are_valid(tmp_path):
    cfg = ExperimentConfig(out_dir=str(tmp_path), replicates=0, graph_size=60,
                           target_volume=60, proxy_size=2000,
                           kinds=("tilde",), seed=5).validate()
    report = run_monte_carlo(cfg)
    emit_report(report, "csv", str(tmp_path))
    lines = (tmp_path / "replicates.csv").read_text().strip().split("\n")
    assert lines == ["replicate,seed,kind,theta_hat,std_error,z,status"]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["replicates"] == 0


def test_config_echo_reruns_identically(tmp_path):
    cfg = ExperimentConfig(out_dir=str(tmp_path), **SMALL_MC).validate()
    report = run_monte_carlo(cfg)
    emit_report(report, "csv", str(tmp_path))
    echoed = config_from_json((tmp_path / "config.json").read_text())
    report2 = run_monte_carlo(echoed)
    assert [r["theta_hat"] for r in report2.rows] == \
        [r["theta_hat"] for r in report.rows]


def test_worker_count_does_not_change_bytes(tmp_path):
    outs = []
    for workers, sub in ((1, "a"), (3, "b")):
        out = tmp_path / sub
        cfg = ExperimentConfig(out_dir=str(out),
                               **{**SMALL_MC, "workers": workers}).validate()
        emit_report(run_monte_carlo(cfg), "csv", str(out))
        outs.append((out / "replicates.csv").read_bytes())
    assert outs[0] == outs[1]


def test_white_noise_z_is_asymptotically_normal():
    # closed-form estimator theta_hat = X'X/m is scaled chi-square; the
    # normalized statistic must look standard normal at R = 200
    cfg = ExperimentConfig(graph_kind="path", graph_size=320, subgraph_kind="ball",
                           center=160, radii=(128,), family_kind="constant",
                           theta_min=0.2, theta_max=3.0, theta0=1.0,
                           truncation_order=0, proxy_size=2000,
                           kinds=("tilde",), replicates=200, seed=13).validate()
    report = run_monte_carlo(cfg)
    z = report.z_values("tilde")
    assert z.size == 200
    ks = kstest(z, "norm").statistic
    assert ks < 0.12
    # closed form check on one replicate
    from graphwhittle.experiments import monte_carlo_context
    from graphwhittle.sampling import standard_normals
    (_, window, _, _, _, _, _, factor, _, _, _) = monte_carlo_context(cfg)
    x = factor.lower @ standard_normals(cfg.seed, 0, window.size)
    closed = float(x @ x) / window.size
    row = next(r for r in report.rows if r["replicate"] == 0)
    assert row["theta_hat"] == pytest.approx(closed, abs=1e-4)


def test_legacy_normalization_scales_z_by_sqrt2(tmp_path):
    base = ExperimentConfig(out_dir=str(tmp_path), **SMALL_MC).validate()
    legacy = ExperimentConfig(out_dir=str(tmp_path),
                              **{**SMALL_MC, "legacy_section6_normalization": True}
                              ).validate()
    r1 = run_monte_carlo(base)
    r2 = run_monte_carlo(legacy)
    z1 = r1.z_values("tilde")
    z2 = r2.z_values("tilde")
    assert np.allclose(z2, z1 * math.sqrt(2.0), rtol=1e-12)


# -- CLI ---------------------------------------------------------------------

def _write_small_config(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text(
        "[graph]\nkind = \"rhombus_chain\"\nsize = 60\n"
        "[subgraphs]\ntarget_volume = 100\n"
        "[spectral_measure]\nproxy_size = 2000\n"
        "[estimation]\nkinds = [\"unbiased\"]\n"
        "[monte_carlo]\nreplicates = 2\nseed = 4\n")
    return path


def test_cli_mc_smoke(tmp_path, capsys):
    cfg_path = _write_small_config(tmp_path)
    code = cli_main(["mc", "--config", str(cfg_path), "--out", str(tmp_path / "o")])
    assert code == 0
    assert (tmp_path / "o" / "replicates.csv").exists()
    assert (tmp_path / "o" / "summary.json").exists()
    assert (tmp_path / "o" / "histogram.csv").exists()
    assert (tmp_path / "o" / "config.json").exists()


def test_cli_graph_and_simulate_and_estimate(tmp_path):
    cfg_path = _write_small_config(tmp_path)
    out = str(tmp_path / "g")
    assert cli_main(["graph", "--config", str(cfg_path), "--out", out]) == 0
    assert (tmp_path / "g" / "graph.txt").exists()
    mu = np.loadtxt(tmp_path / "g" / "spectral_measure.csv", delimiter=",",
                    skiprows=1)
    assert abs(mu[:, 1].sum() - 1.0) < 1e-9
    assert cli_main(["simulate", "--config", str(cfg_path), "--out", out,
                     "--replicates", "3"]) == 0
    samples = (tmp_path / "g" / "samples.csv").read_text().strip().split("\n")
    assert len(samples) == 4  # header + 3 rows
    assert cli_main(["estimate", "--config", str(cfg_path), "--out", out,
                     "--samples", str(tmp_path / "g" / "samples.csv")]) == 0
    lines = (tmp_path / "g" / "estimates.jsonl").read_text().strip().split("\n")
    assert len(lines) == 3
    rec = json.loads(lines[0])
    assert set(rec) == {"replicate", "kind", "theta_hat", "std_error", "loglik",
                        "n_evals", "bracket_lo", "bracket_hi", "jitter", "warnings"}


def test_cli_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[graph]\nkind = \"dodecahedron\"\n")
    code = cli_main(["mc", "--config", str(bad)])
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("error[config]:")


def test_cli_unknown_key_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[graph]\nkinnd = \"path\"\n")
    assert cli_main(["mc", "--config", str(bad)]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_cli_missing_config_exits_4(tmp_path, capsys):
    code = cli_main(["mc", "--config", str(tmp_path / "nope.toml")])
    assert code == 4
    assert capsys.readouterr().err.startswith("error[io]:")
