"""Pure-numpy reference implementation of the collision quadrature kernels.

This is the fallback backend: same entry points as the compiled extension
``kinhydro._kernels``, vectorized over velocity nodes instead of compiled
loops.  It is the correctness reference; the compiled kernels are checked
against it in the test suite.

The gain term interpolates the ratio f/M multilinearly and carries the
Maxwellian factor exactly through the collisional energy identity
M(v') M(v'_*) = M(v) M(v_*).  Near-Maxwellian states then see quadrature
errors on the smooth ratio only, which is what keeps Q(M, M) at the
truncation level instead of the interpolation level.
"""

import numpy as np

HAVE_COMPILED = False

MODE_FULL = 0
MODE_A_DELTA = 1
MODE_B_BAR = 2
MODE_B_TILDE = 3


def _stencil(points, x0, dv, n_axis):
    """Multilinear interpolation stencil for a batch of points.

    Returns (base multi-index, fractional coordinates, inside-hull mask).
    A point is usable only when its full 2^d corner stencil lies on the
    grid; outside points are treated as zero (zero extension).
    """
    t = (points - x0) / dv
    i0 = np.floor(t).astype(np.int64)
    frac = t - i0
    inside = np.all((i0 >= 0) & (i0 <= n_axis - 2), axis=-1)
    return i0, frac, inside


def _corner_data(i0, frac, n_axis, d):
    """Flat corner indices (m, 2^d) and weights (m, 2^d) for a stencil batch."""
    m = i0.shape[0]
    n_c = 1 << d
    idx = np.zeros((m, n_c), dtype=np.int64)
    wgt = np.ones((m, n_c))
    for c in range(n_c):
        flat = np.zeros(m, dtype=np.int64)
        for ax in range(d):
            bit = (c >> (d - 1 - ax)) & 1
            flat = flat * n_axis + (i0[:, ax] + bit)
            wgt[:, c] = wgt[:, c] * (frac[:, ax] if bit else 1.0 - frac[:, ax])
        idx[:, c] = flat
    return idx, wgt


def _interp(field_t, idx, wgt):
    """Evaluate interpolants: field_t (nvt, nxc), idx/wgt (m, 2^d) -> (m, nxc)."""
    out = wgt[:, 0, None] * field_t[idx[:, 0]]
    for c in range(1, idx.shape[1]):
        out += wgt[:, c, None] * field_t[idx[:, c]]
    return out


def smoothstep(t):
    """Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 in between."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def theta_weight(v, v_star, sigma, delta):
    """Smooth collision-kernel cutoff, vectorized over leading axes.

    Equals 1 on {|v| <= 1/delta, 2*delta <= |v-v_star| <= 1/delta,
    |cos| <= 1-2*delta} and 0 outside {|v| <= 2/delta,
    delta <= |v-v_star| <= 2/delta, |cos| <= 1-delta}.
    """
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    w = v - v_star
    wn = np.linalg.norm(w, axis=-1)
    vn = np.linalg.norm(v, axis=-1)
    safe = np.where(wn > 0.0, wn, 1.0)
    cos = np.abs(np.sum(sigma * w, axis=-1)) / safe
    inv = 1.0 / delta
    f_v = 1.0 - smoothstep((vn - inv) / inv)
    f_lo = smoothstep((wn - delta) / delta)
    f_hi = 1.0 - smoothstep((wn - inv) / inv)
    f_cos = 1.0 - smoothstep((cos - (1.0 - 2.0 * delta)) / delta)
    return np.where(wn > 0.0, f_v * f_lo * f_hi * f_cos, 0.0)


def q_bilinear(nodes, x0, dv, n_axis, d, w_cell, sig, wsig2, m_vec, f_t, g_t,
               same, n_threads=1):
    """Symmetrized hard-sphere collision operator, gain minus loss.

    Parameters
    ----------
    nodes : (nvt, d) velocity nodes, w_cell their common cell volume.
    sig, wsig2 : half of a centrally symmetric sphere quadrature and the
        correspondingly doubled weights (the integrand is even in sigma).
    m_vec : Maxwellian samples used for the weighted interpolation.
    f_t, g_t : (nvt, nxc) fields, velocity index first.
    same : True when f_t is g_t (skips the redundant symmetrization).

    Returns the (nvt, nxc) array of Q(f, g) values.
    """
    nvt, nxc = f_t.shape
    out = np.zeros((nvt, nxc))
    fr = f_t / m_vec[:, None]
    gr = fr if same else g_t / m_vec[:, None]

    # loss part, chunked distance matrix
    wg = w_cell * g_t
    wf = w_cell * f_t
    chunk = max(1, int(2**22 // max(nvt, 1)))
    for a in range(0, nvt, chunk):
        b = min(a + chunk, nvt)
        dist = np.linalg.norm(nodes[a:b, None, :] - nodes[None, :, :], axis=2)
        if same:
            out[a:b] -= f_t[a:b] * (dist @ wf)
        else:
            out[a:b] -= 0.5 * (f_t[a:b] * (dist @ wg) + g_t[a:b] * (dist @ wf))

    # gain part: quadrature over (v_*, sigma), ratio interpolation at v', v'_*
    for j in range(nvt):
        diff = nodes - nodes[j]
        dij = np.linalg.norm(diff, axis=1)
        mid = 0.5 * (nodes + nodes[j])
        r = 0.5 * dij
        mm = m_vec * m_vec[j]
        for k in range(sig.shape[0]):
            vp = mid + r[:, None] * sig[k]
            vps = mid - r[:, None] * sig[k]
            i0p, frp, okp = _stencil(vp, x0, dv, n_axis)
            i0q, frq, okq = _stencil(vps, x0, dv, n_axis)
            ok = okp & okq & (dij > 0.0)
            if not ok.any():
                continue
            sel = np.nonzero(ok)[0]
            idxp, wp = _corner_data(i0p[sel], frp[sel], n_axis, d)
            idxq, wq = _corner_data(i0q[sel], frq[sel], n_axis, d)
            c = (w_cell * wsig2[k]) * dij[sel] * mm[sel]
            fp = _interp(fr, idxp, wp)
            gq = _interp(gr, idxq, wq)
            if same:
                out[sel] += c[:, None] * fp * gq
            else:
                gp = _interp(gr, idxp, wp)
                fq = _interp(fr, idxq, wq)
                out[sel] += c[:, None] * 0.5 * (fp * gq + gp * fq)
    return out


def assemble_linear(nodes, x0, dv, n_axis, d, w_cell, sig, wsig2, m_vec, mode,
                    delta=0.0, n_threads=1):
    """Matrix of one linear collision-integral operator on the velocity grid.

    mode selects the smooth-cutoff weighting and the sign of the local
    M(v) f(v_*) term:

    ==========  ==================  ===========
    mode        sigma weighting     local sign
    ==========  ==================  ===========
    FULL        1                   -1
    A_DELTA     theta               -1
    B_BAR       1 - theta           -1
    B_TILDE     1 - theta           +1
    ==========  ==================  ===========

    Gain entries use the Maxwellian-weighted interpolation, so a stencil
    column n of the v' interpolant carries weight c M(v) M(v_*) w_n / M_n.
    The collision-frequency diagonal is never included here.
    """
    nvt = nodes.shape[0]
    mat = np.zeros((nvt, nvt))
    s3 = 1.0 if mode == MODE_B_TILDE else -1.0
    inv_m = 1.0 / m_vec
    for j in range(nvt):
        diff = nodes - nodes[j]
        dij = np.linalg.norm(diff, axis=1)
        mid = 0.5 * (nodes + nodes[j])
        r = 0.5 * dij
        mm = m_vec * m_vec[j]
        for k in range(sig.shape[0]):
            if mode == MODE_FULL:
                th = np.ones(nvt)
            else:
                th = theta_weight(nodes, nodes[j][None, :], sig[k][None, :],
                                  delta)
                if mode in (MODE_B_BAR, MODE_B_TILDE):
                    th = 1.0 - th
            c_all = (w_cell * wsig2[k]) * dij * th
            # local term: s3 * M(v) f(v_*), sigma-averaged through the k loop
            mat[:, j] += s3 * c_all * m_vec
            vp = mid + r[:, None] * sig[k]
            vps = mid - r[:, None] * sig[k]
            i0p, frp, okp = _stencil(vp, x0, dv, n_axis)
            i0q, frq, okq = _stencil(vps, x0, dv, n_axis)
            ok = okp & okq & (dij > 0.0) & (c_all != 0.0)
            if not ok.any():
                continue
            sel = np.nonzero(ok)[0]
            idxp, wp = _corner_data(i0p[sel], frp[sel], n_axis, d)
            idxq, wq = _corner_data(i0q[sel], frq[sel], n_axis, d)
            c = c_all[sel] * mm[sel]
            for corner in range(idxp.shape[1]):
                np.add.at(mat, (sel, idxp[:, corner]),
                          c * wp[:, corner] * inv_m[idxp[:, corner]])
                np.add.at(mat, (sel, idxq[:, corner]),
                          c * wq[:, corner] * inv_m[idxq[:, corner]])
    return mat
