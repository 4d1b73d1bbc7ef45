import math

import numpy as np
import pytest

from tworoute import formats
from tworoute.bench import random_2vrp_instance
from tworoute.two_tsp import solve_balanced_2tsp
from tworoute.twovrp import solve_2vrp_exact

from helpers import kalmanson_2tsp, ordered_2tsp, random_2vrp


def test_matrix_round_trip(tmp_path):
    c = np.array([[0, 0.1, math.inf], [1 / 3, 0, 2], [5e-17, 7, 0]])
    formats.write_matrix(tmp_path / "m.txt", c)
    np.testing.assert_array_equal(formats.read_matrix(tmp_path / "m.txt"), c)


def test_2tsp_bundle_round_trip(tmp_path):
    g = kalmanson_2tsp(10, 4, 3)
    path = tmp_path / "a.tsp2"
    formats.write_2tsp(path, g.instance, g.optimum, g.hidden_order)
    b = formats.read_2tsp(path)
    np.testing.assert_array_equal(b.instance.matrix, g.instance.matrix)
    assert b.instance.fixed == g.instance.fixed
    assert b.optimum == g.optimum
    np.testing.assert_array_equal(b.hidden_order, g.hidden_order)
    formats.write_2tsp(path, g.instance)
    blind = formats.read_2tsp(path)
    assert blind.optimum is None and blind.hidden_order is None


def test_tours_round_trip(tmp_path):
    sol = solve_balanced_2tsp(ordered_2tsp(kalmanson_2tsp(8, 4, 1)))
    formats.write_tours(tmp_path / "t.txt", sol)
    assert formats.read_tours(tmp_path / "t.txt") == sol


def test_2vrp_round_trip(tmp_path):
    inst = random_2vrp(6, np.random.default_rng(2))
    path = tmp_path / "v.vrp2"
    formats.write_2vrp(path, inst)
    back = formats.read_2vrp(path)
    assert back.customers == inst.customers
    assert (back.cap1, back.cap2, back.d1_start, back.d2_end) == (inst.cap1, inst.cap2, 0, 3)
    np.testing.assert_array_equal(back.c1, inst.c1)
    np.testing.assert_array_equal(back.c2, inst.c2)
    sol = solve_2vrp_exact(back)
    formats.write_vrp_solution(tmp_path / "s.txt", sol)
    assert formats.read_vrp_solution(tmp_path / "s.txt", back) == sol


def test_csv_round_trip(tmp_path):
    rows = [{"a": 1, "b": "x"}, {"a": 2, "b": "y"}]
    formats.write_csv(tmp_path / "r.csv", rows)
    assert formats.read_csv(tmp_path / "r.csv") == [{"a": "1", "b": "x"}, {"a": "2", "b": "y"}]


def test_format_errors(tmp_path):
    bad = tmp_path / "bad.tsp2"
    bad.write_text("# tworoute 2tsp\nn 3\nfixed 1\nmatrix\n0 1\n")
    with pytest.raises(formats.FormatError):
        formats.read_2tsp(bad)
    with pytest.raises(formats.FormatError):
        formats.read_2vrp(bad)
    with pytest.raises(formats.FormatError):
        formats.read_2tsp(tmp_path / "missing.tsp2")


def test_random_family_file(tmp_path):
    inst = random_2vrp_instance(5, 1)
    formats.write_2vrp(tmp_path / "r.vrp2", inst)
    assert formats.read_2vrp(tmp_path / "r.vrp2").customers == inst.customers
