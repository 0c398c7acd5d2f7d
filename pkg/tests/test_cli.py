import json
import math

import numpy as np
import pytest

from hitrun import cli, io
from hitrun import quantum as qc
from hitrun.errors import NumericalError


def run(*args):
    return cli.main([str(a) for a in args])


def read_json_out(capsys):
    return json.loads(capsys.readouterr().out)


class TestSample:
    def test_square(self, tmp_path):
        out = tmp_path / "sq.csv"
        assert run("sample", "--body", "square", "--steps", 1000, "--burnin", 0, "--seed", 1, "--out", out) == 0
        f = io.read_samples_csv(out)
        assert f.header == ["sample", "x0", "x1"]
        assert f.data.shape == (1000, 2)
        assert np.all((f.data >= 0) & (f.data <= 1))
        m = io.RunManifest.read(io.manifest_path(out))
        assert m.outputs == {"sq.csv": io.sha256_file(out)}
        assert m.body == {"kind": "cube", "d": 2}
        assert m.config["burn_in"] == 0 and m.extra["burn_in_is_default"] is False

    def test_default_burn_in_is_recorded(self, tmp_path):
        out = tmp_path / "d.csv"
        assert run("sample", "--body", "disk", "--steps", 100, "--out", out) == 0
        assert len(io.read_samples_csv(out).data) == 80
        assert io.RunManifest.read(io.manifest_path(out)).extra["burn_in_is_default"] is True

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run("sample", "--body", "simplex", "--n", 4, "--steps", 300, "--thin", 2, "--seed", 3, "--out", p) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_quantum_chains(self, tmp_path):
        out = tmp_path / "q.csv"
        assert run("sample", "--body", "quantum", "--n", 3, "--steps", 60, "--burnin", 20, "--thin", 4,
                   "--chains", 3, "--seed", 2, "--out", out) == 0
        f = io.read_samples_csv(out)
        assert f.kind == "matrix" and len(f.data) == 30
        assert f.data[:, 0].size == 30
        for rho in f.matrices:
            qc.check_density_matrix(rho)
        assert not list(tmp_path.glob("*.part*")) and not list(tmp_path.glob("*.checkpoint.json"))

    @pytest.mark.parametrize("body_args,chains", [(["--body", "cube", "--dim", "3"], 1),
                                                  (["--body", "ppt", "--k", "2"], 2)])
    def test_resume_after_interruption(self, tmp_path, monkeypatch, body_args, chains):
        common = [*body_args, "--steps", 400, "--burnin", 20, "--thin", 3, "--seed", 8, "--chains", chains,
                  "--checkpoint-every", 100]
        ref = tmp_path / "ref.csv"
        assert run("sample", *common, "--out", ref) == 0

        real = cli._iter_chains

        def crashing(body, config, chains, first, resume, every, saver):
            # die one block after the second checkpoint, leaving extra rows in the part files
            saves = []

            def spy(ck):
                saves.append(ck["step"])
                saver(ck)

            for block in real(body, config, chains, first, resume, every, spy):
                yield block
                if len(saves) == 2:
                    raise RuntimeError("simulated crash")

        out = tmp_path / "run.csv"
        monkeypatch.setattr(cli, "_iter_chains", crashing)
        with pytest.raises(RuntimeError):
            run("sample", *common, "--out", out)
        monkeypatch.setattr(cli, "_iter_chains", real)
        ck = tmp_path / "run.csv.checkpoint.json"
        assert ck.exists() and json.loads(ck.read_text())["step"] == 200
        assert run("sample", *common, "--out", out, "--resume", ck) == 0
        assert out.read_bytes() == ref.read_bytes()

    def test_bad_flags(self, tmp_path, capsys):
        assert run("sample", "--body", "ball", "--steps", 10, "--out", tmp_path / "x.csv") == 1
        assert run("sample", "--body", "cube", "--dim", 2, "--steps", 10, "--burnin", 10, "--out", tmp_path / "x.csv") == 1
        assert run("sample", "--body", "cube", "--dim", 2, "--steps", 10, "--start", "2,2", "--out", tmp_path / "x.csv") == 1
        assert run("sample", "--body", "ppt", "--steps", 10, "--out", tmp_path / "x.csv") == 1
        assert run("sample", "--steps", 10) == 1
        assert run("nonsense") == 1
        assert "error" in capsys.readouterr().err

    def test_unwritable_output(self, tmp_path):
        assert run("sample", "--body", "square", "--steps", 30, "--out", tmp_path / "missing" / "x.csv") == 1


class TestSpectra:
    def test_maximally_mixed_fixture(self, tmp_path):
        src, out = tmp_path / "m.csv", tmp_path / "s.csv"
        io.write_samples_csv(src, np.stack([np.eye(4) / 4] * 2), kind="matrix")
        for t in ("none", "partial"):
            assert run("spectra", "--in", src, "--out", out, "--transpose", t) == 0
            assert np.allclose(io.read_column(out), 1.0, atol=1e-15)
        assert io.RunManifest.read(io.manifest_path(out)).extra["input_sha256"] == io.sha256_file(src)

    def test_two_qubit_ginibre_partial(self, tmp_path):
        src, out = tmp_path / "g.csv", tmp_path / "s.csv"
        assert run("ginibre", "--n", 4, "--samples", 2000, "--seed", 1, "--out", src) == 0
        assert run("spectra", "--in", src, "--out", out, "--transpose", "partial", "--k", 2) == 0
        v = io.read_column(out)
        assert v.min() < 0 and v.min() >= -2 - 1e-9

    def test_k_mismatch(self, tmp_path):
        src = tmp_path / "g.csv"
        io.write_samples_csv(src, np.stack([np.eye(4) / 4]), kind="matrix")
        assert run("spectra", "--in", src, "--out", tmp_path / "s.csv", "--k", 3) == 1

    def test_rejects_vector_file(self, tmp_path):
        src = tmp_path / "v.csv"
        io.write_samples_csv(src, np.zeros((2, 2)))
        assert run("spectra", "--in", src, "--out", tmp_path / "s.csv") == 1

    def test_missing_input(self, tmp_path):
        assert run("spectra", "--in", tmp_path / "nope.csv", "--out", tmp_path / "s.csv") == 1


class TestGinibre:
    def test_empty(self, tmp_path, capsys):
        out = tmp_path / "e.csv"
        assert run("ginibre", "--n", 3, "--samples", 0, "--out", out) == 0
        assert out.read_text().strip() == ",".join(io.matrix_header(3))

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run("ginibre", "--n", 3, "--samples", 50, "--seed", 4, "--out", p) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_ppt_filter(self, tmp_path, capsys):
        out = tmp_path / "p.csv"
        assert run("ginibre", "--n", 4, "--samples", 20_000, "--seed", 5, "--filter", "ppt", "--out", out) == 0
        rep = read_json_out(capsys)
        assert rep["draws"] == 20_000
        assert abs(rep["acceptance_fraction"] - 8 / 33) < 0.02
        f = io.read_samples_csv(out)
        assert len(f.data) == rep["kept"]
        assert all(qc.is_ppt(f.matrices, 2))

    def test_npt_filter_complements(self, tmp_path, capsys):
        assert run("ginibre", "--n", 4, "--samples", 3000, "--seed", 6, "--filter", "ppt", "--out", tmp_path / "a.csv") == 0
        a = read_json_out(capsys)["kept"]
        assert run("ginibre", "--n", 4, "--samples", 3000, "--seed", 6, "--filter", "npt", "--out", tmp_path / "b.csv") == 0
        assert a + read_json_out(capsys)["kept"] == 3000

    def test_filter_needs_square_dimension(self, tmp_path):
        assert run("ginibre", "--n", 6, "--samples", 10, "--filter", "ppt", "--out", tmp_path / "x.csv") == 1

    def test_numerical_failure_exit_code(self, tmp_path, monkeypatch, capsys):
        def boom(*a, **k):
            raise NumericalError("zero matrix")

        monkeypatch.setattr(cli, "ginibre_batch", boom)
        assert run("ginibre", "--n", 3, "--samples", 10, "--out", tmp_path / "x.csv") == 2
        assert "numerical" in capsys.readouterr().err


class TestDensity:
    def test_g_grid(self, tmp_path):
        out = tmp_path / "g.csv"
        assert run("density", "--law", "g", "--grid", "0:3:301", "--out", out) == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "x,density" and len(rows) == 302
        assert float(rows[1].split(",")[1]) == 0.0 and float(rows[-1].split(",")[1]) == 0.0

    def test_mp_at_two(self, capsys):
        assert run("density", "--law", "mp", "--grid", "2:2:1") == 0
        x, y = capsys.readouterr().out.splitlines()[1].split(",")
        assert float(y) == pytest.approx(0.1591549, abs=5e-8)

    def test_hz_edge(self, capsys):
        assert run("density", "--law", "hz", "--z", 0) == 0
        cap = capsys.readouterr()
        assert "1.63299" in cap.err
        last = cap.out.splitlines()[-1].split(",")
        assert float(last[0]) == pytest.approx(2 * math.sqrt(6) / 3) and float(last[1]) == 0.0

    def test_pn_coefficients(self, tmp_path, capsys):
        table = tmp_path / "a.json"
        table.write_text(json.dumps({"2": 3, "3": -6, "4": 3}))
        assert run("density", "--law", "pn", "--n", 2, "--grid", "0:2:5", "--coefficients", table) == 0
        ys = [float(r.split(",")[1]) for r in capsys.readouterr().out.splitlines()[1:]]
        assert ys == pytest.approx([1.5, 0.375, 0.0, 0.375, 1.5])

    def test_bad_grid(self):
        assert run("density", "--law", "mp", "--grid", "0:4") == 1
        assert run("density", "--law", "pn") == 1


class TestGofCommand:
    def test_square_run_not_rejected(self, tmp_path, capsys):
        pts = tmp_path / "sq.csv"
        assert run("sample", "--body", "square", "--steps", 60_020, "--burnin", 20, "--thin", 3, "--seed", 2,
                   "--out", pts) == 0
        rep_path = tmp_path / "rep.json"
        assert run("test", "--test", "chi2-uniform", "--in", pts, "--bin-side", 0.1, "--out", rep_path) == 0
        rep = json.loads(rep_path.read_text())
        assert rep["reject"] is False and rep["n"] == 20_000

    def test_degenerate_rejected(self, tmp_path, capsys):
        pts = tmp_path / "one.csv"
        io.write_samples_csv(pts, np.full((5000, 2), 0.52))
        assert run("test", "--test", "chi2-uniform", "--in", pts) == 0
        assert read_json_out(capsys)["reject"] is True

    def test_self_ks(self, tmp_path, capsys):
        s = tmp_path / "s.csv"
        io.write_spectra_csv(s, np.random.default_rng(0).random((100, 4)))
        assert run("test", "--test", "ks", "--in", s, "--in2", s) == 0
        rep = read_json_out(capsys)
        assert rep["statistic"] == 0.0 and rep["reject"] is False

    def test_ks_needs_second_input(self, tmp_path):
        s = tmp_path / "s.csv"
        io.write_spectra_csv(s, np.ones((2, 2)))
        assert run("test", "--test", "ks", "--in", s) == 1


class TestTheta:
    def test_r_equals_r(self, capsys):
        assert run("theta", "--r", 1, "--R", 1, "--d", 2, "--n-steps", 0) == 0
        rep = read_json_out(capsys)
        assert rep["theta"] == 0.5 and rep["tv_bound"] == 1.0

    def test_quantum_body(self, capsys):
        assert run("theta", "--body", "quantum", "--n", 4) == 0
        rep = read_json_out(capsys)
        assert rep["d"] == 15 and rep["kappa"] == pytest.approx(1 / 3)
        assert rep["theta"] == pytest.approx((2 / 15) / (4.0**14 * 3), rel=1e-12)

    def test_omega25(self, capsys):
        assert run("theta", "--body", "quantum", "--n", 25, "--eps", 0.01, "--n-steps", 10) == 0
        rep = read_json_out(capsys)
        assert rep["theta"] == 0.0 and rep["log_theta"] < -2000
        assert rep["theta_decimal"].startswith("1.618") and "E-875" in rep["theta_decimal"]
        assert rep["steps_for_eps"].endswith("e+875")

    def test_missing_args(self):
        assert run("theta", "--r", 1) == 1
        assert run("theta", "--r", 2, "--R", 1, "--d", 2) == 1
