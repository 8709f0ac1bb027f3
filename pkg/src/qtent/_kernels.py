"""Numba kernels over flat complex128 amplitude arrays.

Every kernel works in place. Qubit ``j`` is bit ``j`` of the amplitude index,
so index ``p`` is the momentum value ``sum_j alpha_j 2**j``.
"""

import numpy as np
from numba import njit

# gate kind codes of the compiled stream
PHASE = 0
CPHASE = 1
CNOT = 2
HALF_TURN = 3
REVERSE = 4
U1 = 5
CU = 6

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@njit(cache=True)
def phase(amps, j, ph):
    step = 1 << j
    n = amps.size
    for base in range(0, n, step << 1):
        for i in range(base + step, base + (step << 1)):
            amps[i] *= ph


@njit(cache=True)
def cphase(amps, j, k, ph):
    mask = (1 << j) | (1 << k)
    for i in range(amps.size):
        if (i & mask) == mask:
            amps[i] *= ph


@njit(cache=True)
def cnot(amps, target, control):
    tmask = 1 << target
    cmask = 1 << control
    for i in range(amps.size):
        if (i & cmask) and not (i & tmask):
            i1 = i | tmask
            tmp = amps[i]
            amps[i] = amps[i1]
            amps[i1] = tmp


@njit(cache=True)
def half_turn(amps, j):
    step = 1 << j
    n = amps.size
    for base in range(0, n, step << 1):
        for i in range(base, base + step):
            a = amps[i]
            b = amps[i + step]
            amps[i] = (a + b) * _INV_SQRT2
            amps[i + step] = (a - b) * _INV_SQRT2


@njit(cache=True)
def unitary1(amps, j, u):
    step = 1 << j
    n = amps.size
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for base in range(0, n, step << 1):
        for i in range(base, base + step):
            a = amps[i]
            b = amps[i + step]
            amps[i] = u00 * a + u01 * b
            amps[i + step] = u10 * a + u11 * b


@njit(cache=True)
def controlled_unitary1(amps, target, control, u):
    tmask = 1 << target
    cmask = 1 << control
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for i in range(amps.size):
        if (i & cmask) and not (i & tmask):
            i1 = i | tmask
            a = amps[i]
            b = amps[i1]
            amps[i] = u00 * a + u01 * b
            amps[i1] = u10 * a + u11 * b


@njit(cache=True)
def reversal_permutation(n_q, width):
    """Index map reversing the lowest ``width`` bits, higher bits untouched."""
    n = 1 << n_q
    perm = np.empty(n, dtype=np.int64)
    low = (1 << width) - 1
    for i in range(n):
        r = 0
        x = i & low
        for _ in range(width):
            r = (r << 1) | (x & 1)
            x >>= 1
        perm[i] = (i & ~low) | r
    return perm


@njit(cache=True)
def permute(amps, perm, buf):
    for i in range(amps.size):
        buf[i] = amps[perm[i]]
    amps[:] = buf


@njit(cache=True)
def xx_chain(amps, cos_, sin_):
    """prod_j exp(i * 2J_j * X_j X_{j+1}) with cos_/sin_ of 2J_j precomputed."""
    n = amps.size
    v = amps.view(np.float64)
    for j in range(cos_.size):
        c = cos_[j]
        s = sin_[j]
        mask = (1 << j) | (1 << (j + 1))
        hi = 1 << (j + 1)
        # every index with bit j+1 clear pairs with its partner above it
        for base in range(0, n, hi << 1):
            for i in range(base, base + hi):
                i0 = 2 * i
                i1 = 2 * (i ^ mask)
                ar, ai, br, bi = v[i0], v[i0 + 1], v[i1], v[i1 + 1]
                v[i0] = c * ar - s * bi
                v[i0 + 1] = c * ai + s * br
                v[i1] = c * br - s * ai
                v[i1 + 1] = c * bi + s * ar


@njit(cache=True)
def static_kick(amps, diag_half, cos_, sin_):
    """Symmetric split exp(iA/2) exp(iB) exp(iA/2) of exp(i dH)."""
    for i in range(amps.size):
        amps[i] *= diag_half[i]
    xx_chain(amps, cos_, sin_)
    for i in range(amps.size):
        amps[i] *= diag_half[i]


@njit(cache=True)
def run_stream(amps, kinds, js, ks, angles, mats, n_q, kick, diag_half, cos_, sin_, counter):
    """Apply a compiled gate stream once.

    When ``kick`` is set the static kick is applied before every gate except
    REVERSE and ``counter[0]`` accumulates the number of kicks applied.
    """
    buf = np.empty_like(amps)
    for g in range(kinds.size):
        kind = kinds[g]
        if kind == REVERSE:
            permute(amps, reversal_permutation(n_q, js[g]), buf)
            continue
        if kick:
            static_kick(amps, diag_half, cos_, sin_)
            counter[0] += 1
        if kind == PHASE:
            phase(amps, js[g], np.exp(1j * angles[g]))
        elif kind == CPHASE:
            cphase(amps, js[g], ks[g], np.exp(1j * angles[g]))
        elif kind == CNOT:
            cnot(amps, js[g], ks[g])
        elif kind == HALF_TURN:
            half_turn(amps, js[g])
        elif kind == U1:
            unitary1(amps, js[g], mats[g])
        elif kind == CU:
            controlled_unitary1(amps, js[g], ks[g], mats[g])
