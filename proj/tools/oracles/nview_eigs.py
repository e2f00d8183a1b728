#!/usr/bin/env python3
"""Reference eigenvalues for the 3-view fixture used in the test suite.

Assembles the 9x9 matrix blockwise from first principles (no library code
under test) for poses R_i = I, centers e_1, e_2, e_3, and prints the
sorted spectrum at full precision.
"""
import numpy as np


def skew(v):
    return np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]], dtype=float)


def main():
    centers = [np.eye(3)[i] for i in range(3)]
    E = np.zeros((9, 9))
    for i in range(3):
        for j in range(3):
            if i != j:
                E[3 * i:3 * i + 3, 3 * j:3 * j + 3] = skew(centers[i]) - skew(centers[j])
    lam = np.sort(np.linalg.eigvalsh(E))
    np.set_printoptions(precision=17, floatmode="fixed", suppress=False)
    print("eigenvalues (ascending):")
    for v in lam:
        print(f"  {v:+.17e}")
    print("sqrt(6) =", f"{np.sqrt(6):.17e}")
    print("sqrt(3) =", f"{np.sqrt(3):.17e}")


if __name__ == "__main__":
    main()
