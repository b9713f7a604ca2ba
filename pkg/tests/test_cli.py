import json
import os

from dcquad import benchgen as bg
from dcquad import cli


def run(argv):
    return cli.main(argv)


def test_construct_success_json(tmp_path, capsys):
    code = run(["construct", "--fn", "zy2", "--x0", "5.24", "--method", "S",
                "--seed", "1"])
    out = capsys.readouterr().out
    assert code == 0
    rec = json.loads(out)
    assert rec["function"] == "zy2"
    assert rec["converged"] is True
    assert rec["report"]["iterations"] > 0
    assert "curvature" in rec and "gamma" in rec


def test_construct_shift_required_exit_code(capsys):
    code = run(["construct", "--fn", "ex4_1_6", "--x0", "-0.125",
                "--method", "S", "--seed", "1"])
    capsys.readouterr()
    assert code == 3


def test_construct_shifted_method_succeeds(capsys):
    code = run(["construct", "--fn", "ex4_1_6", "--x0", "-0.125",
                "--method", "UDS", "--seed", "1"])
    out = capsys.readouterr().out
    assert code == 0
    assert json.loads(out)["gamma"] > 0.0


def test_construct_not_locally_convex_exit_code(capsys):
    code = run(["construct", "--fn", "zy2", "--x0", "1.0", "--method", "S",
                "--seed", "1"])
    capsys.readouterr()
    assert code == 2


def test_construct_usage_errors(capsys):
    assert run(["construct", "--fn", "nosuch", "--x0", "0", "--method", "S",
                "--seed", "1"]) == 1
    capsys.readouterr()
    assert run(["bogus"]) == 1
    capsys.readouterr()
    assert run(["construct", "--fn", "zy2", "--x0", "5.24",
                "--method", "S"]) == 1          # --seed is required
    capsys.readouterr()


def test_construct_surface_and_lp_dump(tmp_path, capsys):
    out_dir = tmp_path / "out"
    lp_dir = tmp_path / "lps"
    code = run(["construct", "--fn", "dipigri", "--x0", "1.84,-1.04",
                "--method", "DS", "--seed", "3", "--out", str(out_dir),
                "--surface", "21", "--dump-lps", str(lp_dir)])
    capsys.readouterr()
    assert code == 0
    files = sorted(os.listdir(out_dir))
    assert "dipigri_DS.json" in files
    assert "dipigri_DS_surface.csv" in files
    surface = (out_dir / "dipigri_DS_surface.csv").read_text().splitlines()
    assert surface[0] == "x1,x2,f,l,q"
    assert len(surface) == 1 + 21 * 21
    for line in surface[1:][:50]:
        x1, x2, fv, lv, qv = map(float, line.split(","))
        assert qv <= fv + 2e-3 and lv <= qv + 1e-9
    lp_files = sorted(os.listdir(lp_dir))
    assert lp_files and lp_files[0].startswith("lp_")


def test_gen_problems_writes_parseable_files(tmp_path, capsys):
    out = tmp_path / "probs"
    code = run(["gen-problems", "--out", str(out), "--seed", "9",
                "--dims", "1"])
    capsys.readouterr()
    assert code == 0
    files = sorted(os.listdir(out))
    assert len(files) == 6              # (m_c, m_dc) in {1,2} x {1,2,3}
    p = bg.read_problem_file(out / files[0])
    assert p.n == 1


def test_gen_problems_bundled(tmp_path, capsys):
    out = tmp_path / "bundled"
    code = run(["gen-problems", "--out", str(out), "--seed", "0",
                "--bundled"])
    capsys.readouterr()
    assert code == 0
    assert len(os.listdir(out)) == 24


def test_hierarchy_study_smoke(tmp_path, capsys):
    out = tmp_path / "study"
    code = run(["hierarchy-study", "--out", str(out), "--seed", "5",
                "--functions", "zy2", "--points", "2", "--methods", "S,SS,DS",
                "--jobs", "1"])
    capsys.readouterr()
    assert code == 0
    names = sorted(os.listdir(out))
    assert "hierarchy_group1_details.csv" in names
    assert "hierarchy_group1_summary.csv" in names
    assert "hierarchy_timings.csv" in names
    detail = (out / "hierarchy_group1_details.csv").read_text().splitlines()
    assert detail[0].startswith("function,n,point,x0,method")


def test_hierarchy_study_deterministic_csv(tmp_path, capsys):
    args = ["hierarchy-study", "--seed", "5", "--functions", "zy2",
            "--points", "2", "--methods", "S,DS", "--jobs", "1"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(args + ["--out", str(out1)]) == 0
    assert run(args + ["--out", str(out2)]) == 0
    capsys.readouterr()
    for name in ("hierarchy_group1_details.csv", "hierarchy_group1_summary.csv",
                 "hierarchy_group2_details.csv", "hierarchy_group2_summary.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_bound_study_smoke(tmp_path, capsys):
    src = tmp_path / "probs"
    os.makedirs(src)
    bg.write_problem_file(src / "p1.txt",
                          bg.generate_problem(bg.ProblemSpec(1, 0, 1, 1, seed=3)))
    out = tmp_path / "bounds"
    code = run(["bound-study", "--out", str(out), "--seed", "2",
                "--problems", str(src), "--per-dim", "2", "--jobs", "1"])
    capsys.readouterr()
    assert code == 0
    body = (out / "bound_study.csv").read_text().splitlines()
    assert body[0].startswith("problem,n,lower_bound")
    row = body[1].split(",")
    assert float(row[2]) <= float(row[4]) + 1e-6        # lb <= reference
    assert body[-1].split(",")[0] == "aggregate-1d"


def test_bound_study_requires_source(capsys):
    assert run(["bound-study", "--out", "/tmp/x", "--seed", "1"]) == 1
    capsys.readouterr()
