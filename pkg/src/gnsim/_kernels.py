"""JIT statevector kernels for flat complex128 amplitude arrays.

Each kernel makes one pass over the array, pairing amplitudes by bit
arithmetic, so the cost is independent of which qubit is addressed.  The
``_expand`` pattern inserts zero bits at the target positions to enumerate a
half / quarter of the index space.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def apply_1q(a, q, u00, u01, u10, u11):
    half = a.size >> 1
    low = (1 << q) - 1
    bit = 1 << q
    for i in range(half):
        i0 = ((i >> q) << (q + 1)) | (i & low)
        i1 = i0 | bit
        x0 = a[i0]
        x1 = a[i1]
        a[i0] = u00 * x0 + u01 * x1
        a[i1] = u10 * x0 + u11 * x1


@njit(cache=True)
def scale_1q(a, q, w0, w1):
    half = a.size >> 1
    low = (1 << q) - 1
    bit = 1 << q
    for i in range(half):
        i0 = ((i >> q) << (q + 1)) | (i & low)
        a[i0] *= w0
        a[i0 | bit] *= w1


@njit(cache=True)
def scale_11(a, p, q, w):
    quarter = a.size >> 2
    pl, ph = (p, q) if p < q else (q, p)
    lowl = (1 << pl) - 1
    lowh = (1 << ph) - 1
    bits = (1 << p) | (1 << q)
    for i in range(quarter):
        j = ((i >> pl) << (pl + 1)) | (i & lowl)
        j = ((j >> ph) << (ph + 1)) | (j & lowh)
        a[j | bits] *= w


@njit(cache=True)
def scale_zz(a, p, q, w_equal, w_differ):
    quarter = a.size >> 2
    pl, ph = (p, q) if p < q else (q, p)
    lowl = (1 << pl) - 1
    lowh = (1 << ph) - 1
    bl = 1 << pl
    bh = 1 << ph
    for i in range(quarter):
        j = ((i >> pl) << (pl + 1)) | (i & lowl)
        j = ((j >> ph) << (ph + 1)) | (j & lowh)
        a[j] *= w_equal
        a[j | bl | bh] *= w_equal
        a[j | bl] *= w_differ
        a[j | bh] *= w_differ


@njit(cache=True)
def apply_swap(a, p, q):
    quarter = a.size >> 2
    pl, ph = (p, q) if p < q else (q, p)
    lowl = (1 << pl) - 1
    lowh = (1 << ph) - 1
    bl = 1 << pl
    bh = 1 << ph
    for i in range(quarter):
        j = ((i >> pl) << (pl + 1)) | (i & lowl)
        j = ((j >> ph) << (ph + 1)) | (j & lowh)
        t = a[j | bl]
        a[j | bl] = a[j | bh]
        a[j | bh] = t


@njit(cache=True)
def apply_cx(a, control, target):
    quarter = a.size >> 2
    pl, ph = (control, target) if control < target else (target, control)
    lowl = (1 << pl) - 1
    lowh = (1 << ph) - 1
    cb = 1 << control
    tb = 1 << target
    for i in range(quarter):
        j = ((i >> pl) << (pl + 1)) | (i & lowl)
        j = ((j >> ph) << (ph + 1)) | (j & lowh)
        t = a[j | cb]
        a[j | cb] = a[j | cb | tb]
        a[j | cb | tb] = t


@njit(cache=True)
def add_hop(out, psi, p, q, c):
    """out += c * |b_p=0,b_q=1><b_p=1,b_q=0| - conj pattern: the action of a
    fused w (X_p Y_q - Y_p X_q) with c = 2i w."""
    quarter = out.size >> 2
    pl, ph = (p, q) if p < q else (q, p)
    lowl = (1 << pl) - 1
    lowh = (1 << ph) - 1
    pb = 1 << p
    qb = 1 << q
    for i in range(quarter):
        j = ((i >> pl) << (pl + 1)) | (i & lowl)
        j = ((j >> ph) << (ph + 1)) | (j & lowh)
        out[j | qb] += c * psi[j | pb]
        out[j | pb] -= c * psi[j | qb]


@njit(cache=True)
def warmup():
    a = np.zeros(8, dtype=np.complex128)
    a[0] = 1.0
    apply_1q(a, 0, 0.0j, 1.0 + 0.0j, 1.0 + 0.0j, 0.0j)
    scale_1q(a, 1, 1.0 + 0.0j, 1.0j)
    scale_11(a, 0, 1, 1.0j)
    scale_zz(a, 1, 2, 1.0j, -1.0j)
    apply_swap(a, 0, 2)
    apply_cx(a, 0, 1)
    b = np.zeros(8, dtype=np.complex128)
    add_hop(b, a, 0, 1, 2.0j)
