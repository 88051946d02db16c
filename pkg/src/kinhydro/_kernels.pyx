# Compiled hot kernels: hard-sphere collision quadrature on the velocity grid.
# Mirrors kinhydro._py_kernels exactly; the test suite cross-checks both.

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport floor, sqrt, fabs

HAVE_COMPILED = True

MODE_FULL = 0
MODE_A_DELTA = 1
MODE_B_BAR = 2
MODE_B_TILDE = 3

cdef int C_MODE_FULL = 0
cdef int C_MODE_A_DELTA = 1
cdef int C_MODE_B_TILDE = 3


cdef inline double _smoothstep(double t) nogil:
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


cdef inline double _theta(double vn, double wn, double cosab, double delta) nogil:
    cdef double inv = 1.0 / delta
    cdef double f
    if wn <= 0.0:
        return 0.0
    f = (1.0 - _smoothstep((vn - inv) / inv)) * _smoothstep((wn - delta) / delta)
    f = f * (1.0 - _smoothstep((wn - inv) / inv))
    f = f * (1.0 - _smoothstep((cosab - (1.0 - 2.0 * delta)) / delta))
    return f


def q_bilinear(double[:, ::1] nodes, double x0, double dv, int n_axis, int d,
               double w_cell, double[:, ::1] sig, double[::1] wsig2,
               double[::1] m_vec, double[:, ::1] f_t, double[:, ::1] g_t,
               bint same, int n_threads):
    cdef int nvt = f_t.shape[0]
    cdef int nxc = f_t.shape[1]
    out_np = np.zeros((nvt, nxc))
    cdef double[:, ::1] out = out_np
    m_np = np.asarray(m_vec)
    fr_np = np.asarray(f_t) / m_np[:, None]
    gr_np = fr_np if same else np.asarray(g_t) / m_np[:, None]
    cdef double[:, ::1] fr = fr_np
    cdef double[:, ::1] gr = gr_np
    if n_threads < 1:
        n_threads = 1
    if d == 2:
        _q_d2(nodes, x0, dv, n_axis, w_cell, sig, wsig2, m_vec, fr, gr, same,
              n_threads, out)
    elif d == 3:
        _q_d3(nodes, x0, dv, n_axis, w_cell, sig, wsig2, m_vec, fr, gr, same,
              n_threads, out)
    else:
        raise ValueError("dimension must be 2 or 3")
    return out_np


cdef void _q_d2(double[:, ::1] nodes, double x0, double dv, int n_axis,
                double w_cell, double[:, ::1] sig, double[::1] wsig2,
                double[::1] m_vec, double[:, ::1] f_t, double[:, ::1] g_t,
                bint same, int n_threads, double[:, ::1] out) noexcept nogil:
    # f_t, g_t hold the M-ratio fields; the Maxwellian factor rides in
    # mm = M_i M_j which equals M(v') M(v'_*) exactly on collision pairs
    cdef int nvt = f_t.shape[0]
    cdef int nxc = f_t.shape[1]
    cdef int nh = sig.shape[0]
    cdef int i, j, k, x, ip0, ip1, iq0, iq1, bp, bq
    cdef double vi0, vi1, dx0, dx1, dij, cj, mid0, mid1, r, c, t, mm
    cdef double vp0, vp1, vq0, vq1, fp0, fp1, fq0, fq1
    cdef double wp00, wp01, wp10, wp11, wq00, wq01, wq10, wq11
    cdef double a, b, ag, bf

    for i in prange(nvt, num_threads=n_threads, schedule='dynamic'):
        vi0 = nodes[i, 0]
        vi1 = nodes[i, 1]
        for j in range(nvt):
            dx0 = vi0 - nodes[j, 0]
            dx1 = vi1 - nodes[j, 1]
            dij = sqrt(dx0 * dx0 + dx1 * dx1)
            if dij == 0.0:
                continue
            mm = m_vec[i] * m_vec[j]
            cj = w_cell * dij * mm
            if same:
                for x in range(nxc):
                    out[i, x] -= cj * f_t[i, x] * f_t[j, x]
            else:
                for x in range(nxc):
                    out[i, x] -= 0.5 * cj * (f_t[i, x] * g_t[j, x]
                                             + g_t[i, x] * f_t[j, x])
            mid0 = 0.5 * (vi0 + nodes[j, 0])
            mid1 = 0.5 * (vi1 + nodes[j, 1])
            r = 0.5 * dij
            for k in range(nh):
                vp0 = mid0 + r * sig[k, 0]
                vp1 = mid1 + r * sig[k, 1]
                vq0 = mid0 - r * sig[k, 0]
                vq1 = mid1 - r * sig[k, 1]
                t = (vp0 - x0) / dv
                ip0 = <int>floor(t)
                if ip0 < 0 or ip0 > n_axis - 2:
                    continue
                fp0 = t - ip0
                t = (vp1 - x0) / dv
                ip1 = <int>floor(t)
                if ip1 < 0 or ip1 > n_axis - 2:
                    continue
                fp1 = t - ip1
                t = (vq0 - x0) / dv
                iq0 = <int>floor(t)
                if iq0 < 0 or iq0 > n_axis - 2:
                    continue
                fq0 = t - iq0
                t = (vq1 - x0) / dv
                iq1 = <int>floor(t)
                if iq1 < 0 or iq1 > n_axis - 2:
                    continue
                fq1 = t - iq1
                c = cj * wsig2[k]
                bp = ip0 * n_axis + ip1
                bq = iq0 * n_axis + iq1
                wp00 = (1.0 - fp0) * (1.0 - fp1)
                wp01 = (1.0 - fp0) * fp1
                wp10 = fp0 * (1.0 - fp1)
                wp11 = fp0 * fp1
                wq00 = (1.0 - fq0) * (1.0 - fq1)
                wq01 = (1.0 - fq0) * fq1
                wq10 = fq0 * (1.0 - fq1)
                wq11 = fq0 * fq1
                if same:
                    for x in range(nxc):
                        a = (wp00 * f_t[bp, x] + wp01 * f_t[bp + 1, x]
                             + wp10 * f_t[bp + n_axis, x]
                             + wp11 * f_t[bp + n_axis + 1, x])
                        b = (wq00 * f_t[bq, x] + wq01 * f_t[bq + 1, x]
                             + wq10 * f_t[bq + n_axis, x]
                             + wq11 * f_t[bq + n_axis + 1, x])
                        out[i, x] += c * a * b
                else:
                    for x in range(nxc):
                        a = (wp00 * f_t[bp, x] + wp01 * f_t[bp + 1, x]
                             + wp10 * f_t[bp + n_axis, x]
                             + wp11 * f_t[bp + n_axis + 1, x])
                        b = (wq00 * g_t[bq, x] + wq01 * g_t[bq + 1, x]
                             + wq10 * g_t[bq + n_axis, x]
                             + wq11 * g_t[bq + n_axis + 1, x])
                        ag = (wp00 * g_t[bp, x] + wp01 * g_t[bp + 1, x]
                              + wp10 * g_t[bp + n_axis, x]
                              + wp11 * g_t[bp + n_axis + 1, x])
                        bf = (wq00 * f_t[bq, x] + wq01 * f_t[bq + 1, x]
                              + wq10 * f_t[bq + n_axis, x]
                              + wq11 * f_t[bq + n_axis + 1, x])
                        out[i, x] += 0.5 * c * (a * b + ag * bf)


cdef void _q_d3(double[:, ::1] nodes, double x0, double dv, int n_axis,
                double w_cell, double[:, ::1] sig, double[::1] wsig2,
                double[::1] m_vec, double[:, ::1] f_t, double[:, ::1] g_t,
                bint same, int n_threads, double[:, ::1] out) noexcept nogil:
    # f_t, g_t hold the M-ratio fields; see _q_d2
    cdef int nvt = f_t.shape[0]
    cdef int nxc = f_t.shape[1]
    cdef int nh = sig.shape[0]
    cdef int i, j, k, x, cnr, ax, bit, ok
    cdef int ip[3]
    cdef int iq[3]
    cdef int bpi[8]
    cdef int bqi[8]
    cdef double fp[3]
    cdef double fq[3]
    cdef double wpc[8]
    cdef double wqc[8]
    cdef double vi0, vi1, vi2, dx0, dx1, dx2, dij, cj, r, c, t, w, mm
    cdef double mid0, mid1, mid2, vp0, vp1, vp2, vq0, vq1, vq2
    cdef double a, b, ag, bf

    for i in prange(nvt, num_threads=n_threads, schedule='dynamic'):
        vi0 = nodes[i, 0]
        vi1 = nodes[i, 1]
        vi2 = nodes[i, 2]
        for j in range(nvt):
            dx0 = vi0 - nodes[j, 0]
            dx1 = vi1 - nodes[j, 1]
            dx2 = vi2 - nodes[j, 2]
            dij = sqrt(dx0 * dx0 + dx1 * dx1 + dx2 * dx2)
            if dij == 0.0:
                continue
            mm = m_vec[i] * m_vec[j]
            cj = w_cell * dij * mm
            if same:
                for x in range(nxc):
                    out[i, x] -= cj * f_t[i, x] * f_t[j, x]
            else:
                for x in range(nxc):
                    out[i, x] -= 0.5 * cj * (f_t[i, x] * g_t[j, x]
                                             + g_t[i, x] * f_t[j, x])
            mid0 = 0.5 * (vi0 + nodes[j, 0])
            mid1 = 0.5 * (vi1 + nodes[j, 1])
            mid2 = 0.5 * (vi2 + nodes[j, 2])
            r = 0.5 * dij
            for k in range(nh):
                vp0 = mid0 + r * sig[k, 0]
                vp1 = mid1 + r * sig[k, 1]
                vp2 = mid2 + r * sig[k, 2]
                vq0 = mid0 - r * sig[k, 0]
                vq1 = mid1 - r * sig[k, 1]
                vq2 = mid2 - r * sig[k, 2]
                ok = 1
                t = (vp0 - x0) / dv
                ip[0] = <int>floor(t)
                fp[0] = t - ip[0]
                t = (vp1 - x0) / dv
                ip[1] = <int>floor(t)
                fp[1] = t - ip[1]
                t = (vp2 - x0) / dv
                ip[2] = <int>floor(t)
                fp[2] = t - ip[2]
                t = (vq0 - x0) / dv
                iq[0] = <int>floor(t)
                fq[0] = t - iq[0]
                t = (vq1 - x0) / dv
                iq[1] = <int>floor(t)
                fq[1] = t - iq[1]
                t = (vq2 - x0) / dv
                iq[2] = <int>floor(t)
                fq[2] = t - iq[2]
                for ax in range(3):
                    if ip[ax] < 0 or ip[ax] > n_axis - 2:
                        ok = 0
                    if iq[ax] < 0 or iq[ax] > n_axis - 2:
                        ok = 0
                if ok == 0:
                    continue
                c = cj * wsig2[k]
                for cnr in range(8):
                    w = 1.0
                    bpi[cnr] = 0
                    bqi[cnr] = 0
                    for ax in range(3):
                        bit = (cnr >> (2 - ax)) & 1
                        bpi[cnr] = bpi[cnr] * n_axis + ip[ax] + bit
                        if bit:
                            w = w * fp[ax]
                        else:
                            w = w * (1.0 - fp[ax])
                    wpc[cnr] = w
                    w = 1.0
                    for ax in range(3):
                        bit = (cnr >> (2 - ax)) & 1
                        bqi[cnr] = bqi[cnr] * n_axis + iq[ax] + bit
                        if bit:
                            w = w * fq[ax]
                        else:
                            w = w * (1.0 - fq[ax])
                    wqc[cnr] = w
                if same:
                    for x in range(nxc):
                        a = 0.0
                        b = 0.0
                        for cnr in range(8):
                            a = a + wpc[cnr] * f_t[bpi[cnr], x]
                            b = b + wqc[cnr] * f_t[bqi[cnr], x]
                        out[i, x] += c * a * b
                else:
                    for x in range(nxc):
                        a = 0.0
                        b = 0.0
                        ag = 0.0
                        bf = 0.0
                        for cnr in range(8):
                            a = a + wpc[cnr] * f_t[bpi[cnr], x]
                            b = b + wqc[cnr] * g_t[bqi[cnr], x]
                            ag = ag + wpc[cnr] * g_t[bpi[cnr], x]
                            bf = bf + wqc[cnr] * f_t[bqi[cnr], x]
                        out[i, x] += 0.5 * c * (a * b + ag * bf)


def assemble_linear(double[:, ::1] nodes, double x0, double dv, int n_axis,
                    int d, double w_cell, double[:, ::1] sig,
                    double[::1] wsig2, double[::1] m_vec, int mode,
                    double delta=0.0, int n_threads=1):
    cdef int nvt = nodes.shape[0]
    mat_np = np.zeros((nvt, nvt))
    cdef double[:, ::1] mat = mat_np
    inv_np = 1.0 / np.asarray(m_vec)
    cdef double[::1] inv_m = inv_np
    if n_threads < 1:
        n_threads = 1
    if d == 2:
        _asm_d2(nodes, x0, dv, n_axis, w_cell, sig, wsig2, m_vec, inv_m, mode,
                delta, n_threads, mat)
    elif d == 3:
        _asm_d3(nodes, x0, dv, n_axis, w_cell, sig, wsig2, m_vec, inv_m, mode,
                delta, n_threads, mat)
    else:
        raise ValueError("dimension must be 2 or 3")
    return mat_np


cdef void _asm_d2(double[:, ::1] nodes, double x0, double dv, int n_axis,
                  double w_cell, double[:, ::1] sig, double[::1] wsig2,
                  double[::1] m_vec, double[::1] inv_m, int mode,
                  double delta, int n_threads,
                  double[:, ::1] mat) noexcept nogil:
    cdef int nvt = nodes.shape[0]
    cdef int nh = sig.shape[0]
    cdef int i, j, k, ip0, ip1, iq0, iq1, bp, bq
    cdef double vi0, vi1, vin, dx0, dx1, dij, cj, mid0, mid1, r, c, t, th
    cdef double vp0, vp1, vq0, vq1, fp0, fp1, fq0, fq1, cosab, mm, cg
    cdef double wp00, wp01, wp10, wp11, wq00, wq01, wq10, wq11, s3

    s3 = 1.0 if mode == C_MODE_B_TILDE else -1.0
    for i in prange(nvt, num_threads=n_threads, schedule='dynamic'):
        vi0 = nodes[i, 0]
        vi1 = nodes[i, 1]
        vin = sqrt(vi0 * vi0 + vi1 * vi1)
        for j in range(nvt):
            dx0 = vi0 - nodes[j, 0]
            dx1 = vi1 - nodes[j, 1]
            dij = sqrt(dx0 * dx0 + dx1 * dx1)
            if dij == 0.0:
                continue
            cj = w_cell * dij
            mid0 = 0.5 * (vi0 + nodes[j, 0])
            mid1 = 0.5 * (vi1 + nodes[j, 1])
            r = 0.5 * dij
            for k in range(nh):
                if mode == C_MODE_FULL:
                    th = 1.0
                else:
                    cosab = fabs(sig[k, 0] * dx0 + sig[k, 1] * dx1) / dij
                    th = _theta(vin, dij, cosab, delta)
                    if mode != C_MODE_A_DELTA:
                        th = 1.0 - th
                if th == 0.0:
                    continue
                c = cj * wsig2[k] * th
                # sigma-averaged local term s3 * M(v) f(v_*)
                mat[i, j] += s3 * c * m_vec[i]
                mm = m_vec[i] * m_vec[j]
                vp0 = mid0 + r * sig[k, 0]
                vp1 = mid1 + r * sig[k, 1]
                vq0 = mid0 - r * sig[k, 0]
                vq1 = mid1 - r * sig[k, 1]
                t = (vp0 - x0) / dv
                ip0 = <int>floor(t)
                if ip0 < 0 or ip0 > n_axis - 2:
                    continue
                fp0 = t - ip0
                t = (vp1 - x0) / dv
                ip1 = <int>floor(t)
                if ip1 < 0 or ip1 > n_axis - 2:
                    continue
                fp1 = t - ip1
                t = (vq0 - x0) / dv
                iq0 = <int>floor(t)
                if iq0 < 0 or iq0 > n_axis - 2:
                    continue
                fq0 = t - iq0
                t = (vq1 - x0) / dv
                iq1 = <int>floor(t)
                if iq1 < 0 or iq1 > n_axis - 2:
                    continue
                fq1 = t - iq1
                bp = ip0 * n_axis + ip1
                bq = iq0 * n_axis + iq1
                wp00 = (1.0 - fp0) * (1.0 - fp1)
                wp01 = (1.0 - fp0) * fp1
                wp10 = fp0 * (1.0 - fp1)
                wp11 = fp0 * fp1
                wq00 = (1.0 - fq0) * (1.0 - fq1)
                wq01 = (1.0 - fq0) * fq1
                wq10 = fq0 * (1.0 - fq1)
                wq11 = fq0 * fq1
                cg = c * mm
                # gain T1: M(v'_*) f(v') with the ratio interpolation,
                # column n of the v' stencil weighted by mm w_n / M_n
                mat[i, bp] += cg * wp00 * inv_m[bp]
                mat[i, bp + 1] += cg * wp01 * inv_m[bp + 1]
                mat[i, bp + n_axis] += cg * wp10 * inv_m[bp + n_axis]
                mat[i, bp + n_axis + 1] += cg * wp11 * inv_m[bp + n_axis + 1]
                # gain T2: M(v') f(v'_*), scatter over the v'_* stencil
                mat[i, bq] += cg * wq00 * inv_m[bq]
                mat[i, bq + 1] += cg * wq01 * inv_m[bq + 1]
                mat[i, bq + n_axis] += cg * wq10 * inv_m[bq + n_axis]
                mat[i, bq + n_axis + 1] += cg * wq11 * inv_m[bq + n_axis + 1]


cdef void _asm_d3(double[:, ::1] nodes, double x0, double dv, int n_axis,
                  double w_cell, double[:, ::1] sig, double[::1] wsig2,
                  double[::1] m_vec, double[::1] inv_m, int mode,
                  double delta, int n_threads,
                  double[:, ::1] mat) noexcept nogil:
    cdef int nvt = nodes.shape[0]
    cdef int nh = sig.shape[0]
    cdef int i, j, k, cnr, ax, bit, ok
    cdef int ip[3]
    cdef int iq[3]
    cdef int bpi[8]
    cdef int bqi[8]
    cdef double fp[3]
    cdef double fq[3]
    cdef double wpc[8]
    cdef double wqc[8]
    cdef double vi0, vi1, vi2, vin, dx0, dx1, dx2, dij, cj, r, c, t, th, w
    cdef double mid0, mid1, mid2, vp0, vp1, vp2, vq0, vq1, vq2, cosab
    cdef double mm, cg, s3

    s3 = 1.0 if mode == C_MODE_B_TILDE else -1.0
    for i in prange(nvt, num_threads=n_threads, schedule='dynamic'):
        vi0 = nodes[i, 0]
        vi1 = nodes[i, 1]
        vi2 = nodes[i, 2]
        vin = sqrt(vi0 * vi0 + vi1 * vi1 + vi2 * vi2)
        for j in range(nvt):
            dx0 = vi0 - nodes[j, 0]
            dx1 = vi1 - nodes[j, 1]
            dx2 = vi2 - nodes[j, 2]
            dij = sqrt(dx0 * dx0 + dx1 * dx1 + dx2 * dx2)
            if dij == 0.0:
                continue
            cj = w_cell * dij
            mid0 = 0.5 * (vi0 + nodes[j, 0])
            mid1 = 0.5 * (vi1 + nodes[j, 1])
            mid2 = 0.5 * (vi2 + nodes[j, 2])
            r = 0.5 * dij
            for k in range(nh):
                if mode == C_MODE_FULL:
                    th = 1.0
                else:
                    cosab = fabs(sig[k, 0] * dx0 + sig[k, 1] * dx1
                                 + sig[k, 2] * dx2) / dij
                    th = _theta(vin, dij, cosab, delta)
                    if mode != C_MODE_A_DELTA:
                        th = 1.0 - th
                if th == 0.0:
                    continue
                c = cj * wsig2[k] * th
                mat[i, j] += s3 * c * m_vec[i]
                mm = m_vec[i] * m_vec[j]
                vp0 = mid0 + r * sig[k, 0]
                vp1 = mid1 + r * sig[k, 1]
                vp2 = mid2 + r * sig[k, 2]
                vq0 = mid0 - r * sig[k, 0]
                vq1 = mid1 - r * sig[k, 1]
                vq2 = mid2 - r * sig[k, 2]
                ok = 1
                t = (vp0 - x0) / dv
                ip[0] = <int>floor(t)
                fp[0] = t - ip[0]
                t = (vp1 - x0) / dv
                ip[1] = <int>floor(t)
                fp[1] = t - ip[1]
                t = (vp2 - x0) / dv
                ip[2] = <int>floor(t)
                fp[2] = t - ip[2]
                t = (vq0 - x0) / dv
                iq[0] = <int>floor(t)
                fq[0] = t - iq[0]
                t = (vq1 - x0) / dv
                iq[1] = <int>floor(t)
                fq[1] = t - iq[1]
                t = (vq2 - x0) / dv
                iq[2] = <int>floor(t)
                fq[2] = t - iq[2]
                for ax in range(3):
                    if ip[ax] < 0 or ip[ax] > n_axis - 2:
                        ok = 0
                    if iq[ax] < 0 or iq[ax] > n_axis - 2:
                        ok = 0
                if ok == 0:
                    continue
                for cnr in range(8):
                    w = 1.0
                    bpi[cnr] = 0
                    bqi[cnr] = 0
                    for ax in range(3):
                        bit = (cnr >> (2 - ax)) & 1
                        bpi[cnr] = bpi[cnr] * n_axis + ip[ax] + bit
                        if bit:
                            w = w * fp[ax]
                        else:
                            w = w * (1.0 - fp[ax])
                    wpc[cnr] = w
                    w = 1.0
                    for ax in range(3):
                        bit = (cnr >> (2 - ax)) & 1
                        bqi[cnr] = bqi[cnr] * n_axis + iq[ax] + bit
                        if bit:
                            w = w * fq[ax]
                        else:
                            w = w * (1.0 - fq[ax])
                    wqc[cnr] = w
                cg = c * mm
                for cnr in range(8):
                    mat[i, bpi[cnr]] += cg * wpc[cnr] * inv_m[bpi[cnr]]
                    mat[i, bqi[cnr]] += cg * wqc[cnr] * inv_m[bqi[cnr]]
