"""Plain-text instance and solution files.

Node labels and customer ids in files are 1-based; the library is 0-based
for nodes. Floats are written with ``repr`` so reading them back gives the
identical value, and ``inf`` marks forbidden arcs or traversals.

2TSP bundle::

    # tworoute 2tsp
    n 5
    fixed 1 3
    near_balanced 0
    optimum 7.5            (optional)
    hidden_order 3 2 4 1 5 (optional)
    matrix
    <n rows>

2VRP instance::

    # tworoute 2vrp
    customers 4
    capacities 3.0 3.0
    depots 1 2 3 4          (d1_start d1_end d2_start d2_end)
    allow_empty_vehicle1 0
    size 12
    left right l1_left l1_right l2_left l2_right demand fixed_to
    <one line per customer>
    matrix1
    <size rows>
    matrix2
    <size rows>
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .two_tsp import TwoTourSolution, TwoTspInstance
from .twovrp import Customer, TwoVrpInstance, TwoVrpSolution, make_solution

TSP_HEADER = "# tworoute 2tsp"
VRP_HEADER = "# tworoute 2vrp"


class FormatError(ValueError):
    pass


def _num(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf"
    return repr(x)


def format_matrix(c) -> list:
    return [" ".join(_num(v) for v in row) for row in np.asarray(c)]


def parse_matrix(lines: list, n: int) -> np.ndarray:
    if len(lines) < n:
        raise FormatError(f"expected {n} matrix rows, got {len(lines)}")
    rows = [[float(t) for t in line.split()] for line in lines[:n]]
    if any(len(r) != n for r in rows):
        raise FormatError(f"every matrix row needs {n} entries")
    return np.array(rows)


def write_matrix(path, c) -> None:
    c = np.asarray(c)
    Path(path).write_text("\n".join([str(len(c))] + format_matrix(c)) + "\n")


def read_matrix(path) -> np.ndarray:
    lines = _lines(path)
    n = int(lines[0])
    return parse_matrix(lines[1:], n)


def _lines(path) -> list:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(str(exc)) from exc
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def _keyed(lines: list, stop: str) -> tuple[dict, int]:
    meta = {}
    for k, line in enumerate(lines):
        if line.startswith("#"):
            continue
        if line == stop:
            return meta, k + 1
        key, _, rest = line.partition(" ")
        meta[key] = rest.strip()
    raise FormatError(f"missing '{stop}' section")


# --------------------------------------------------------------------------
# balanced 2TSP


@dataclass
class TspBundle:
    instance: TwoTspInstance
    optimum: Optional[float] = None
    hidden_order: Optional[np.ndarray] = None  # 0-based


def write_2tsp(path, inst: TwoTspInstance, optimum: Optional[float] = None,
               hidden_order=None) -> None:
    out = [TSP_HEADER, f"n {inst.n}",
           "fixed " + " ".join(str(x + 1) for x in sorted(inst.fixed)),
           f"near_balanced {int(inst.near_balanced)}"]
    if optimum is not None:
        out.append(f"optimum {_num(optimum)}")
    if hidden_order is not None:
        out.append("hidden_order " + " ".join(str(int(x) + 1) for x in hidden_order))
    out.append("matrix")
    out += format_matrix(inst.matrix)
    Path(path).write_text("\n".join(out) + "\n")


def read_2tsp(path) -> TspBundle:
    lines = _lines(path)
    if not lines or lines[0] != TSP_HEADER:
        raise FormatError(f"{path}: not a 2TSP bundle")
    meta, k = _keyed(lines, "matrix")
    try:
        n = int(meta["n"])
        fixed = frozenset(int(t) - 1 for t in meta["fixed"].split())
        c = parse_matrix(lines[k:], n)
        inst = TwoTspInstance(c, fixed, near_balanced=bool(int(meta.get("near_balanced", "0"))))
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from exc
    optimum = float(meta["optimum"]) if "optimum" in meta else None
    hidden = (np.array([int(t) - 1 for t in meta["hidden_order"].split()])
              if "hidden_order" in meta else None)
    return TspBundle(inst, optimum, hidden)


def write_tours(path, sol: TwoTourSolution) -> None:
    lines = [" ".join(str(x + 1) for x in sol.tour1),
             " ".join(str(x + 1) for x in sol.tour2),
             _num(sol.total)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_tours(path) -> TwoTourSolution:
    lines = _lines(path)
    if len(lines) < 3:
        raise FormatError(f"{path}: expected two tours and a total")
    t1 = tuple(int(t) - 1 for t in lines[0].split())
    t2 = tuple(int(t) - 1 for t in lines[1].split())
    return TwoTourSolution(t1, t2, float(lines[2]))


# --------------------------------------------------------------------------
# 2VRP

_CUSTOMER_COLUMNS = "left right l1_left l1_right l2_left l2_right demand fixed_to"


def write_2vrp(path, inst: TwoVrpInstance) -> None:
    out = [VRP_HEADER, f"customers {inst.n}",
           f"capacities {_num(inst.cap1)} {_num(inst.cap2)}",
           "depots " + " ".join(str(x + 1) for x in
                                (inst.d1_start, inst.d1_end, inst.d2_start, inst.d2_end)),
           f"allow_empty_vehicle1 {int(inst.allow_empty_vehicle1)}",
           f"size {len(inst.c1)}",
           _CUSTOMER_COLUMNS]
    for cu in inst.customers:
        out.append(" ".join([str(cu.left + 1), str(cu.right + 1),
                             *(_num(v) for v in (cu.l1_left, cu.l1_right, cu.l2_left,
                                                 cu.l2_right, cu.demand)),
                             str(cu.fixed_to)]))
    out.append("matrix1")
    out += format_matrix(inst.c1)
    out.append("matrix2")
    out += format_matrix(inst.c2)
    Path(path).write_text("\n".join(out) + "\n")


def read_2vrp(path) -> TwoVrpInstance:
    lines = _lines(path)
    if not lines or lines[0] != VRP_HEADER:
        raise FormatError(f"{path}: not a 2VRP instance")
    meta, k = _keyed(lines, _CUSTOMER_COLUMNS)
    try:
        n = int(meta["customers"])
        size = int(meta["size"])
        cap1, cap2 = (float(t) for t in meta["capacities"].split())
        depots = [int(t) - 1 for t in meta["depots"].split()]
        allow = bool(int(meta.get("allow_empty_vehicle1", "0")))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad header ({exc})") from exc
    customers = []
    for line in lines[k:k + n]:
        t = line.split()
        if len(t) != 8:
            raise FormatError(f"{path}: customer lines need 8 fields")
        customers.append(Customer(int(t[0]) - 1, int(t[1]) - 1, *(float(x) for x in t[2:7]),
                                  fixed_to=int(t[7])))
    k += n
    if lines[k] != "matrix1":
        raise FormatError(f"{path}: missing matrix1")
    c1 = parse_matrix(lines[k + 1:], size)
    k += 1 + size
    if lines[k] != "matrix2":
        raise FormatError(f"{path}: missing matrix2")
    c2 = parse_matrix(lines[k + 1:], size)
    return TwoVrpInstance(tuple(customers), *depots, cap1, cap2, c1, c2,
                          allow_empty_vehicle1=allow)


def _format_route(route) -> str:
    return " ".join(f"{cid}{d}" for cid, d in route)


def _parse_route(text: str) -> list:
    return [(int(tok[:-1]), tok[-1]) for tok in text.split()]


def write_vrp_solution(path, sol: TwoVrpSolution) -> None:
    lines = ["route1 " + _format_route(sol.route1), "route2 " + _format_route(sol.route2),
             f"cost {_num(sol.cost)}"]
    Path(path).write_text("\n".join(lines) + "\n")


def read_vrp_solution(path, inst: Optional[TwoVrpInstance] = None) -> TwoVrpSolution:
    """Read routes and cost; with ``inst`` the loads are filled in as well."""
    raw = Path(path).read_text().splitlines()
    fields = {}
    for line in raw:
        key, _, rest = line.partition(" ")
        fields[key] = rest
    try:
        r1, r2 = _parse_route(fields["route1"]), _parse_route(fields["route2"])
        cost = float(fields["cost"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad solution file ({exc})") from exc
    if inst is None:
        return TwoVrpSolution(tuple(r1), tuple(r2), cost)
    sol = make_solution(inst, r1, r2)
    return TwoVrpSolution(sol.route1, sol.route2, cost, sol.loads)


# --------------------------------------------------------------------------
# CSV


def write_csv(path, rows: Iterable, fields: Optional[list] = None) -> None:
    rows = [asdict(r) if hasattr(r, "__dataclass_fields__") else dict(r) for r in rows]
    if fields is None:
        fields = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
