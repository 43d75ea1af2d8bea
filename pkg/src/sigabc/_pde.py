"""Finite-difference sweep for the Goursat problem behind the signature kernel.

The solver advances u over a rectangular grid with unit boundary data,
u(0,.) = u(.,0) = 1, using the second-order explicit update

    u[i+1,j+1] = (u[i+1,j] + u[i,j+1]) * (1 + a/2 + a^2/12)
                 - u[i,j] * (1 - a^2/12)

where ``a`` is the (dyadically scaled) cross-increment of the static kernel
on the cell. Kept in a private module so the scalar loop can be jitted once
and shared by every kernel evaluation.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def goursat_corner(c1, c2, f):
    """Solve the Goursat recursion and return the far-corner value.

    c1, c2: per-cell update coefficients (1 + a/2 + a^2/12) and
        (1 - a^2/12) on the coarse (n-1, m-1) cell grid, with the dyadic
        1/4^lambda rescaling already applied.
    f: dyadic subdivision factor 2^lambda; each coarse cell is swept as an
        f x f block of sub-cells sharing its coefficients.

    Only two grid rows are kept; cells are visited in a fixed row-major
    order so results are identical for any caller-side parallelism.
    """
    n1, m1 = c1.shape
    rows = n1 * f
    cols = m1 * f
    prev = np.ones(cols + 1)
    cur = np.empty(cols + 1)
    for i in range(1, rows + 1):
        cur[0] = 1.0
        ai = (i - 1) // f
        for j in range(1, cols + 1):
            aj = (j - 1) // f
            cur[j] = (cur[j - 1] + prev[j]) * c1[ai, aj] - prev[j - 1] * c2[ai, aj]
        prev, cur = cur, prev
    return prev[cols]
