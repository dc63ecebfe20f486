import json

import numpy as np
import pytest

from blockscale.cli import main
from blockscale.evolve_ed import TransferSupermatrix, transfer_supermatrix
from blockscale.qmat import ChainSpec


def test_family_writes_csv_and_sidecar(tmp_path):
    out = tmp_path / "fam.csv"
    assert main(["family", "--case", "I", "--n", "6", "--grid", "11", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "c1,c2,C_S,C_R"
    assert len(lines) == 12
    meta = json.loads((tmp_path / "fam.csv.meta.json").read_text())
    assert meta["case"] == "I"
    assert meta["c2_max"] == pytest.approx(0.3479, abs=2e-3)


def test_family_json_format(tmp_path):
    out = tmp_path / "fam.json"
    assert main(
        ["family", "--case", "II", "--n", "6", "--grid", "5", "--out", str(out), "--format", "json"]
    ) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 5
    assert set(rows[0]) == {"c1", "c2", "C_S", "C_R"}


def test_verify_passes(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--case", "I", "--n", "6", "--backend", "ed", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["ok"]
    assert report["blocks"]["2"]["fitted"] == pytest.approx(0.89602, abs=1e-3)


def test_transfer_roundtrip(tmp_path):
    out = tmp_path / "t.json"
    assert main(
        ["transfer", "--n", "5", "--t", "1.5", "--b", "4.0", "--backend", "ff", "--out", str(out)]
    ) == 0
    loaded = TransferSupermatrix.from_json(out.read_text())
    direct = transfer_supermatrix(ChainSpec(n_sites=5, b_field=4.0, transfer_time=1.5))
    assert np.abs(loaded.entries - direct.entries).max() < 1e-10
    checks = json.loads((tmp_path / "t.json.checks.json").read_text())
    assert checks["ok"]


def test_perturb_outputs(tmp_path):
    out = tmp_path / "mc"
    code = main(
        [
            "perturb", "--case", "I", "--n", "6", "--grid", "4",
            "--eps", "0.0", "0.05", "--samples", "10", "--seed", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    csv0 = (tmp_path / "mc_eps0.csv").read_text().splitlines()
    assert csv0[0] == "c1,c2,C_S_mean,C_S_stderr,C_R_mean,C_R_stderr,rejections"
    manifest = json.loads((tmp_path / "mc_manifest.json").read_text())
    assert manifest["seed"] == 3
    assert manifest["epsilons"] == [0.0, 0.05]
    assert len(manifest["files"]) == 2


def test_missing_case_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["family"])
    assert exc.value.code == 2


def test_unknown_family_exits_2(tmp_path, capsys):
    code = main(["family", "--case", "I", "--n", "8", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"case": "I", "n": 6, "grid": 5, "out": str(tmp_path / "c.csv")}))
    assert main(["--config", str(cfg), "family"]) == 0
    assert (tmp_path / "c.csv").exists()


def test_verify_failure_exits_1(tmp_path, monkeypatch):
    import blockscale.cli as cli

    # an off-time transfer map cannot reproduce the published scale factors
    def wrong_transfer(spec, backend):
        bad = ChainSpec(
            n_sites=spec.n_sites, b_field=spec.b_field, transfer_time=spec.transfer_time / 2
        )
        return transfer_supermatrix(bad)

    monkeypatch.setattr(cli, "_transfer_for", wrong_transfer)
    assert main(["verify", "--case", "I", "--n", "6", "--backend", "ed"]) == 1
