"""Independent reference computations used only by the tests.

None of these share code paths with the package: the matrix exponential
works on the non-symmetric generator with Pade approximants and repeated
squaring, the Taylor series is summed term by term, and the bilinear form is
evaluated from its jump/killing representation by explicit double loops.
"""

import math

import numpy as np

# Pade(13) coefficients, Higham (2005)
_B13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0, 10559470521600.0, 670442572800.0, 33522128640.0,
    1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm_pade(X):
    """exp(X) by scaling and squaring with a [13/13] Pade approximant."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    norm = np.linalg.norm(X, 1)
    s = max(0, int(math.ceil(math.log2(norm / _THETA13)))) if norm > 0 else 0
    X = X / 2.0**s
    b = _B13
    I = np.eye(n)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * I)
    V = X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * I
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def semigroup_oracle(A, mass, t, pinned=()):
    """exp(-t M^{-1} A) on free nodes, zero elsewhere, via :func:`expm_pade`."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    free = [k for k in range(n) if k not in set(pinned)]
    L = A[np.ix_(free, free)] / np.asarray(mass, dtype=float)[free][:, None]
    S = np.zeros((n, n))
    S[np.ix_(free, free)] = expm_pade(-t * L)
    return S


def taylor_exp(X, terms=40):
    """Plain power series; only for small ||X||."""
    X = np.asarray(X, dtype=float)
    out = np.eye(X.shape[0])
    term = np.eye(X.shape[0])
    for k in range(1, terms):
        term = term @ X / k
        out = out + term
    return out


def energy_from_parts(u, v, killing, jumps):
    """sum_x k_x u_x v_x + sum_{x<y} J_xy (u_x - u_y)(v_x - v_y), looped."""
    total = 0.0
    for x, k in enumerate(killing):
        total += k * u[x] * v[x]
    for (x, y), J in jumps.items():
        total += J * (u[x] - u[y]) * (v[x] - v[y])
    return total


def bisect_root(f, a, b, tol=1e-13):
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
        if b - a < tol:
            break
    return 0.5 * (a + b)
