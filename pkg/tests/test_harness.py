import json

import numpy as np
import pytest

from pdwg.catalog import catalog, get_experiment
from pdwg.cli import load_experiment_config, main
from pdwg.study import CSV_HEADER, emit_csv, emit_plot_data, run_study


class TestCatalog:
    def test_required_entries_present(self):
        names = set(catalog())
        assert {f"table{i}" for i in range(1, 25)} <= names
        assert {"fig1_tau0", "fig1_tau1", "fig1_tau10000"} <= names
        assert {"fig2_tau0", "fig2_tau1", "fig3_tau0", "fig3_tau1"} <= names
        assert {"fig4_tau0", "fig4_tau1", "fig5_tau0", "fig5_tau1"} <= names
        assert {"fig6", "fig7_f1", "fig7_f0", "fig8_f10000", "fig8_f0"} <= names
        assert {"fig9_f10000", "fig9_f0", "fig10_f10000", "fig10_f0"} <= names

    def test_table5_configuration(self):
        exp = get_experiment("table5")
        spec = exp.spec
        assert spec.domain_tag == "unit_square"
        assert spec.tau == 1.0
        bx, by = spec.beta(np.array([0.3]), np.array([0.4]))
        assert (bx[0], by[0]) == (1.0, -1.0)
        assert spec.c(np.array([0.1]), np.array([0.2]))[0] == 1.0
        x = np.array([0.3])
        y = np.array([0.7])
        assert spec.exact_u(x, y)[0] == pytest.approx(np.sin(0.3) * np.cos(0.7))

    def test_table1_is_constant_solution(self):
        exp = get_experiment("table1")
        x = np.array([0.2, 0.8])
        assert np.allclose(exp.spec.exact_u(x, x), 1.0)
        assert exp.spec.tau == 1.0

    def test_table12_large_tau(self):
        assert get_experiment("table12").spec.tau == 1000.0

    def test_expected_order_annotations_present(self):
        assert get_experiment("table5").expected_orders
        assert get_experiment("fig1_tau0").expected_orders

    def test_unknown_name_lists_available(self):
        with pytest.raises(KeyError, match="table1"):
            get_experiment("table99")

    def test_demo_entries_have_no_exact_solution(self):
        for name in ("fig6", "fig7_f1", "fig8_f0", "fig9_f10000", "fig10_f0"):
            assert get_experiment(name).spec.exact_u is None

    def test_manufactured_load_matches_equation(self):
        # f = beta . grad u + c u for table5 (divergence-free beta)
        from pdwg.assembly import build_contexts
        from pdwg.mesh import build_coarse_mesh

        exp = get_experiment("table5")
        mesh = build_coarse_mesh("unit_square")
        ctx = build_contexts(mesh, exp.spec)[0]
        x = np.array([0.31, 0.62])
        y = np.array([0.17, 0.48])
        got = ctx.f(x, y)
        expected = np.cos(x) * np.cos(y) - (-np.sin(x) * np.sin(y)) + np.sin(x) * np.cos(y)
        assert np.allclose(got, expected, atol=1e-14)


@pytest.mark.parametrize("name", sorted(catalog()))
def test_every_catalog_entry_runs_levels_0_to_3(name):
    import time

    start = time.perf_counter()
    rep = run_study(get_experiment(name), levels=(0, 3))
    elapsed = time.perf_counter() - start
    assert len(rep.rows) == 4
    assert all(r.solver_residual <= 1e-11 for r in rep.rows)
    assert elapsed < 60.0


class TestRunStudy:
    def test_row_structure(self):
        rep = run_study(get_experiment("table1"), levels=(0, 2))
        assert [r.inv_h for r in rep.rows] == [1, 2, 4]
        assert [r.level for r in rep.rows] == [0, 1, 2]
        assert all(r.err_u is not None for r in rep.rows)

    def test_tau_override_changes_solution(self):
        a = run_study(get_experiment("table5"), levels=(2, 2))
        b = run_study(get_experiment("table5"), levels=(2, 2), tau=0.0)
        assert a.rows[0].err_u != b.rows[0].err_u

    def test_j_override_runs_lowest_trace_degree(self):
        rep = run_study(get_experiment("table5"), levels=(0, 2), j=0)
        errs = [r.err_u for r in rep.rows]
        assert errs[2] < errs[0]

    def test_demo_without_exact_solution(self):
        rep = run_study(get_experiment("fig6"), levels=(0, 2), collect_field=True)
        assert all(r.err_u is None for r in rep.rows)
        assert rep.field_points is not None

    def test_bad_levels_rejected(self):
        with pytest.raises(ValueError):
            run_study(get_experiment("table1"), levels=(2, 1))


class TestEmission:
    def test_csv_shape(self, tmp_path):
        rep = run_study(get_experiment("table5"), levels=(0, 2))
        path = tmp_path / "out.csv"
        emit_csv(rep, path)
        lines = path.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[0] == "1"
        assert first[2] == "" and first[4] == "" and first[6] == ""
        second = lines[2].split(",")
        assert float(second[2]) != 0.0

    def test_csv_identical_on_rerun(self, tmp_path):
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        emit_csv(run_study(get_experiment("table5"), levels=(0, 2)), p1)
        emit_csv(run_study(get_experiment("table5"), levels=(0, 2)), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_field_emission_unit_solution(self, tmp_path):
        rep = run_study(get_experiment("table1"), levels=(0, 1), collect_field=True)
        path = tmp_path / "field.csv"
        emit_plot_data(rep, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,value"
        vals = np.array([float(l.split(",")[2]) for l in lines[1:]])
        assert np.max(np.abs(vals - 1.0)) < 1e-8

    def test_field_emission_requires_field(self, tmp_path):
        rep = run_study(get_experiment("table1"), levels=(0, 0))
        with pytest.raises(ValueError):
            emit_plot_data(rep, tmp_path / "nope.csv")


class TestCli:
    def test_list(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        assert "table5" in out and "fig6" in out

    def test_run_writes_csv(self, tmp_path, capsys):
        rc = main(
            ["run", "--experiment", "table1", "--levels", "2", "--out", str(tmp_path)]
        )
        assert rc == 0
        assert (tmp_path / "table1.csv").exists()
        lines = (tmp_path / "table1.csv").read_text().splitlines()
        assert len(lines) == 3

    def test_run_demo_emits_field(self, tmp_path):
        rc = main(["run", "--experiment", "fig6", "--levels", "2", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "fig6.csv").exists()
        assert (tmp_path / "fig6_field.csv").exists()

    def test_run_with_overrides(self, tmp_path):
        rc = main(
            [
                "run", "--experiment", "table5", "--levels", "2",
                "--tau", "0.5", "--j", "k-1", "--tol", "1e-10",
                "--out", str(tmp_path),
            ]
        )
        assert rc == 0

    def test_unknown_experiment_exits_3(self, tmp_path, capsys):
        rc = main(["run", "--experiment", "nope", "--out", str(tmp_path)])
        assert rc == 3
        assert "unknown experiment" in capsys.readouterr().err

    def test_requires_exactly_one_source(self, tmp_path):
        assert main(["run", "--out", str(tmp_path)]) == 3

    def test_verify_passes_table1(self, capsys):
        assert main(["verify", "--experiment", "table1", "--levels", "3"]) == 0
        assert "PASS table1" in capsys.readouterr().out

    def test_verify_demo_runs(self, capsys):
        assert main(["verify", "--experiment", "fig6", "--levels", "2"]) == 0


class TestConfigFile:
    def write_config(self, tmp_path, **overrides):
        cfg = {
            "name": "custom",
            "domain": "unit_square",
            "beta": {
                "piecewise": [
                    {"where": [1.0, 1.0, 1.0], "field": {"const": [1.0, -1.0]}}
                ],
                "else": {"const": [-1.0, 1.0]},
            },
            "c": 1.0,
            "exact_u": {"name": "sin_pix_cos_piy"},
            "tau": 1.0,
            "levels": [0, 2],
        }
        cfg.update(overrides)
        path = tmp_path / "problem.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_load_and_run(self, tmp_path):
        path = self.write_config(tmp_path)
        exp = load_experiment_config(path)
        assert exp.name == "custom"
        rep = run_study(exp, levels=(0, 2))
        assert rep.rows[-1].err_u < rep.rows[0].err_u

    def test_cli_config_run(self, tmp_path):
        path = self.write_config(tmp_path)
        rc = main(["run", "--config", str(path), "--levels", "2", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "custom.csv").exists()

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"name": "x", "domain": "unit_square"}))
        with pytest.raises(ValueError, match="beta"):
            load_experiment_config(path)

    def test_demo_config_without_exact(self, tmp_path):
        cfg = {
            "name": "inflow_demo",
            "domain": "cracked_square",
            "beta": {"rotation": [0.0, 0.0]},
            "c": 0.0,
            "f": 0.0,
            "g": {"name": "sin_x"},
            "tau": 0.0,
            "levels": [0, 1],
        }
        path = tmp_path / "demo.json"
        path.write_text(json.dumps(cfg))
        exp = load_experiment_config(path)
        rep = run_study(exp, levels=(0, 1))
        assert all(r.err_u is None for r in rep.rows)

    def test_unknown_field_name_lists_registry(self, tmp_path):
        cfg = {
            "name": "x",
            "domain": "unit_square",
            "beta": {"const": [1.0, 0.0]},
            "tau": 0.0,
            "f": 0.0,
            "g": {"name": "no_such_field"},
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(cfg))
        with pytest.raises(ValueError, match="sin_x"):
            load_experiment_config(path)
