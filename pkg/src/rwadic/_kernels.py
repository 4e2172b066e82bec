"""Compiled inner loops for iterating the random walk adic transformation.

Each orbit keeps its coordinates in one row of a 2-D buffer.  A step that
would read past the end of the buffer returns ``NEED_MORE`` without touching
any state, so the caller can append coordinates and resume.  Orbits never
share state, so ``prange`` scheduling cannot change any result.

Per-orbit progress lives in a small integer vector: ``state[0]`` counts skew
steps taken, ``state[1]`` counts positions (or returns) recorded and
``state[2]`` is the index of the next checkpoint.

The skew step is written out inside the orbit loop on purpose: a compiled
call per step costs several times the step itself.
"""
from __future__ import annotations

from numba import njit, prange

NEED_MORE = -1
RUNNING = 0
DONE = 1

OCCUPATION = 0
CYLINDERS = 1
RETURNS = 2


@njit(cache=True)
def _run_orbit(
    mode, row, width, nl, mp, d, r, lat_tab, real_tab,
    pts, npts, lo, hi, depth, code, cps, budget,
    lat, real, state, counts, out,
):
    n_max = cps[-1]
    k = lat.shape[0]
    kr = real.shape[0]
    if mode == CYLINDERS:
        for q in range(depth.shape[0]):
            if depth[q] >= width:
                return NEED_MORE
    while True:
        # ---- record the current position
        if mode != RETURNS and state[1] == state[0]:
            if mode == OCCUPATION:
                for w in range(npts.shape[0]):
                    hit = False
                    for p in range(npts[w]):
                        same = True
                        for j in range(k):
                            if lat[j] != pts[w, p, j]:
                                same = False
                                break
                        if same:
                            hit = True
                            break
                    if hit:
                        for j in range(kr):
                            if real[j] < lo[w, j] or real[j] >= hi[w, j]:
                                hit = False
                                break
                    if hit:
                        counts[w] += 1
            else:
                for q in range(depth.shape[0]):
                    c = 0
                    for i in range(depth[q]):
                        c = c * d + row[i]
                    if c == code[q]:
                        counts[q] += 1
            state[1] += 1
            if state[1] == cps[state[2]]:
                for w in range(counts.shape[0]):
                    out[w, state[2]] = counts[w]
                state[2] += 1
        if state[1] == n_max:
            return DONE
        if mode == RETURNS and state[0] >= budget:
            return DONE
        # ---- one skew step
        n = 0
        s = -1
        while True:
            if n + r >= width:
                return NEED_MORE
            s = nl[row[n], row[n + 1]]
            if s >= 0:
                break
            n += 1
        for w0 in range(n + 1):
            c = 0
            for i in range(r):
                c = c * d + row[w0 + i]
            for j in range(k):
                lat[j] -= lat_tab[c, j]
            for j in range(kr):
                real[j] -= real_tab[c, j]
        row[n] = s
        for j in range(n - 1, -1, -1):
            row[j] = mp[row[j + 1]]
        for w0 in range(n + 1):
            c = 0
            for i in range(r):
                c = c * d + row[w0 + i]
            for j in range(k):
                lat[j] += lat_tab[c, j]
            for j in range(kr):
                real[j] += real_tab[c, j]
        state[0] += 1
        if mode == RETURNS:
            zero = True
            for j in range(k):
                if lat[j] != 0:
                    zero = False
                    break
            if zero:
                state[1] += 1
                if state[1] == cps[state[2]]:
                    out[0, state[2]] = state[0]
                    state[2] += 1


@njit(parallel=True, cache=True)
def run_orbits(
    mode, buf, width, nl, mp, d, r, lat_tab, real_tab,
    pts, npts, lo, hi, depth, code, cps, budget,
    pos_lat, pos_real, state, counts, out, status,
):
    """Advance every unfinished orbit until it is done or needs more coordinates.

    ``mode`` selects what is recorded at checkpoints ``cps``:

    * ``OCCUPATION``: ``out[i, w, j]`` is the number of the first ``cps[j]``
      positions lying in window ``w``;
    * ``CYLINDERS``: ``out[i, q, j]`` counts base points in cylinder ``q``;
    * ``RETURNS``: ``out[i, 0, j]`` is the step at which the ``cps[j]``-th
      return to lattice position 0 happens, or stays ``-1`` if ``budget``
      steps run out first.
    """
    for i in prange(buf.shape[0]):
        if status[i] != DONE:
            status[i] = _run_orbit(
                mode, buf[i], width, nl, mp, d, r, lat_tab, real_tab,
                pts, npts, lo, hi, depth, code, cps, budget,
                pos_lat[i], pos_real[i], state[i], counts[i], out[i],
            )
