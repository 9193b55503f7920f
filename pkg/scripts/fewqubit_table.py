"""Tree sizes of the few-qubit classes, with numerically fitted minimal trees."""

import time

import numpy as np

from tscomplex.core import StateVector, ghz_state, product_state, w_state
from tscomplex.fewqubit import build_psi4, fit_tree, shape, slocc_classify3, ts_from_class3, ts_two_qubit
from tscomplex.tree import expansion_tree, serialize_tree, tree_size

PLUS = np.array([1, 1]) / np.sqrt(2)
BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)


def main():
    print(f"{'state':<10}{'class':<8}{'TS':>4}")
    print(f"{'|00>':<10}{'P':<8}{ts_two_qubit(product_state([[1, 0], [1, 0]])):>4}")
    print(f"{'Bell':<10}{'E':<8}{ts_two_qubit(StateVector(2, BELL)):>4}")
    three = {
        "|+0+>": product_state([PLUS, [1, 0], PLUS]),
        "|+>Bell": StateVector(3, np.kron(PLUS, BELL)),
        "GHZ3": ghz_state(3),
        "W3": w_state(3),
    }
    for name, s in three.items():
        c = slocc_classify3(s)
        print(f"{name:<10}{c.value:<8}{ts_from_class3(c):>4}")

    print()
    for name, target, shp in (
        ("GHZ3", ghz_state(3), "ghz3"),
        ("W3", w_state(3), "w3"),
        ("psi4", build_psi4(), "psi4"),
    ):
        t0 = time.perf_counter()
        res = fit_tree(target, shape(shp), rng=0)
        dt = time.perf_counter() - t0
        print(f"{name}: size {res.size}, residual {res.residual:.2e}, {res.restarts_used} restarts, {dt:.2f}s")
        print(f"  {serialize_tree(res.tree)}")
    print(f"psi4 computational-basis tree size: {tree_size(expansion_tree(build_psi4()))}")


if __name__ == "__main__":
    main()
