"""Regenerate the shipped fixtures: ``python3 fixtures/generate.py``."""
import json
from pathlib import Path

import numpy as np

from harmonia.axiom_verifier import inject_fault
from harmonia.graph_dirichlet import harmonic_kernel, kernel_to_csv
from harmonia.weighted_graph import graph_to_dict, grid_graph, load_graph, path_graph

HERE = Path(__file__).parent


def dump(name, obj):
    (HERE / name).write_text(json.dumps(obj, indent=2) + "\n")


def main():
    dump("path3_graph.json", graph_to_dict(path_graph(["b0", "x", "b1"], [1.0, 1.0])))
    dump("path3_domain.json", {"interior": ["x"]})
    dump("path3_boundary.json", {"b0": 0.0, "b1": 1.0})

    dump("path5_graph.json", graph_to_dict(path_graph(["b0", "x1", "x2", "x3", "b4"], [1.0, 1.0, 1.0, 1.0])))
    dump("path5_domain.json", {"interior": ["x1", "x2", "x3"]})
    dump("path5_boundary.json", {"b0": 0.0, "b4": 1.0})
    dump("path5_union_d1.json", {"interior": ["x1", "x2"]})
    dump("path5_union_d2.json", {"interior": ["x2", "x3"]})

    g = grid_graph(7, 7)
    data = graph_to_dict(g)
    data["vertices"] = [f"{i}:{j}" for i, j in g.ordered_vertices]
    data["edges"] = [{"u": f"{u[0]}:{u[1]}", "v": f"{v[0]}:{v[1]}", "w": w} for u, v, w in g.edges()]
    dump("grid_graph.json", data)
    dump("grid_domain.json", {"interior": [f"{i}:{j}" for i in range(1, 6) for j in range(1, 6)]})
    dump("grid_union_d1.json", {"interior": [f"{i}:{j}" for i in range(1, 4) for j in range(1, 6)]})
    dump("grid_union_d2.json", {"interior": [f"{i}:{j}" for i in range(3, 6) for j in range(1, 6)]})
    dump("grid_subset.json", ["2:2", "2:4", "4:2", "4:4"])

    gl = load_graph(HERE / "grid_graph.json")
    d = gl.subdomain({f"{i}:{j}" for i in range(1, 6) for j in range(1, 6)})
    k = harmonic_kernel(gl, d)
    (HERE / "grid_kernel.csv").write_text(kernel_to_csv(k))
    bad, _ = inject_fault(k, np.random.default_rng(7))
    (HERE / "grid_kernel_fault.csv").write_text(kernel_to_csv(bad))

    dump("square.json", {"polygon": [[0, 0], [1, 0], [1, 1], [0, 1]], "origin": [0.5, 0.5], "h": 0.0625})
    dump("lshape.json", {"polygon": [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]],
                         "origin": [0.75, 0.75], "h": 0.125})


if __name__ == "__main__":
    main()
