import re

import pytest
from click.testing import CliRunner

from tworoute import formats
from tworoute.cli import main


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def invoke(*args, env=None):
        return runner.invoke(main, [str(a) for a in args], env=env, catch_exceptions=False)

    return invoke


def cost_of(output):
    return float(re.search(r"cost=(\S+)", output).group(1))


def test_gen_and_exact(run, tmp_path):
    res = run("gen", "--n", 12, "--fixed", 4, "--count", 2, "--seed", 3, "--out", tmp_path)
    assert res.exit_code == 0
    paths = res.output.split()
    assert len(paths) == 2
    for mode in ("2tsp-exact", "2tsp-lowmem", "2vrp-exact"):
        out = run("solve", mode, paths[0])
        assert out.exit_code == 0, out.output
        assert "gap=0.000%" in out.output


def test_all_fixed_gen_doubles_master_tour(run, tmp_path):
    run("gen", "--n", 4, "--fixed", 4, "--seed", 0, "--out", tmp_path)
    bundle = formats.read_2tsp(tmp_path / "k4_4_0.tsp2")
    c, order = bundle.instance.matrix, list(bundle.hidden_order)
    master = sum(c[a, b] for a, b in zip(order, order[1:] + order[:1]))
    assert bundle.optimum == pytest.approx(2 * master)


def test_ks_on_blind_bundle(run, tmp_path):
    run("gen", "--n", 14, "--fixed", 6, "--seed", 1, "--out", tmp_path / "full")
    run("gen", "--n", 14, "--fixed", 6, "--seed", 1, "--blind", "--out", tmp_path / "blind")
    blind = run("solve", "ks", tmp_path / "blind" / "k14_6_1.tsp2", "--out", tmp_path / "t.txt")
    assert blind.exit_code == 0 and "gap" not in blind.output
    optimum = formats.read_2tsp(tmp_path / "full" / "k14_6_1.tsp2").optimum
    assert cost_of(blind.output) == pytest.approx(optimum, rel=1e-9)
    ver = run("verify", tmp_path / "full" / "k14_6_1.tsp2", tmp_path / "t.txt")
    assert ver.exit_code == 0 and "gap=0.000%" in ver.output


def test_vrp_exact_matches_oracle(run, tmp_path):
    run("gen", "--family", "random-2vrp", "--n", 8, "--seed", 2, "--out", tmp_path)
    path = tmp_path / "r8_2.vrp2"
    exact = run("solve", "2vrp-exact", path, "--out", tmp_path / "s.txt")
    oracle = run("solve", "2vrp-oracle", path)
    assert cost_of(exact.output) == cost_of(oracle.output)
    assert run("verify", path, tmp_path / "s.txt").exit_code == 0


def test_heuristic_needs_seed(run, tmp_path):
    run("gen", "--n", 12, "--fixed", 4, "--seed", 3, "--out", tmp_path)
    path = tmp_path / "k12_4_3.tsp2"
    assert run("solve", "heuristic", path).exit_code == 2
    res = run("solve", "heuristic", path, "--seed", 1, "--s", 2, "--repetitions", 2)
    assert res.exit_code == 0 and "gap=" in res.output


def test_exit_codes(run, tmp_path):
    assert run("solve", "2vrp-exact", tmp_path / "missing.vrp2").exit_code == 4
    run("gen", "--family", "random-2vrp", "--n", 8, "--seed", 2, "--out", tmp_path)
    path = tmp_path / "r8_2.vrp2"
    guard = run("solve", "2vrp-exact", path, env={"TWOROUTE_MAX_SUBSET_BITS": "4"})
    assert guard.exit_code == 3
    inst = formats.read_2vrp(path)
    bad = tmp_path / "bad.txt"
    bad.write_text("route1 1L\nroute2\ncost 1.0\n")
    res = run("verify", path, bad)
    assert res.exit_code == 2 and "coverage" in res.output
    assert inst.n == 8


def test_infeasible_instance_exit_code(run, tmp_path):
    run("gen", "--family", "random-2vrp", "--n", 6, "--seed", 0, "--out", tmp_path)
    inst = formats.read_2vrp(tmp_path / "r6_0.vrp2")
    from dataclasses import replace

    formats.write_2vrp(tmp_path / "tight.vrp2", replace(inst, cap1=0.0, cap2=0.0))
    assert run("solve", "2vrp-exact", tmp_path / "tight.vrp2").exit_code == 2


def test_experiment(run, tmp_path):
    res = run("experiment", "--count", 2, "--n", 12, "--fixed", 4, "--s", 2,
              "--repetitions", 2, "--checkpoints", "1,2", "--seed", 0, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    assert "count_optimal" in res.output
    assert (tmp_path / "checkpoints.csv").exists()
    bad = run("experiment", "--checkpoints", "", "--seed", 0, "--out", tmp_path)
    assert bad.exit_code == 2 and "no checkpoints" in bad.output
