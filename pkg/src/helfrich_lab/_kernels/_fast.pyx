# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""C implementations of the per-face mesh kernels.

Mirrors numpy_backend.py operation for operation; the conventions
(edge vectors, cotangents, obtuse-safe mixed areas, reverse-mode energy
gradient) are documented there.  Loops are plain serial C over faces.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, sqrt

cnp.import_array()

BACKEND_NAME = "cython"

cdef double TINY = 1e-300


cdef inline void _cross(double ax, double ay, double az,
                        double bx, double by, double bz,
                        double* ox, double* oy, double* oz) nogil:
    ox[0] = ay * bz - az * by
    oy[0] = az * bx - ax * bz
    oz[0] = ax * by - ay * bx


def vertex_geometry(X, F):
    """Per-vertex accumulators; see numpy_backend.vertex_geometry."""
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const long[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.int64)
    cdef Py_ssize_t n = Xv.shape[0], m = Fv.shape[0], t
    face_area_np = np.empty(m, dtype=np.float64)
    mixed_np = np.zeros(n, dtype=np.float64)
    agrad_np = np.zeros((n, 3), dtype=np.float64)
    nsum_np = np.zeros((n, 3), dtype=np.float64)
    asum_np = np.zeros(n, dtype=np.float64)
    cdef double[::1] face_area = face_area_np
    cdef double[::1] mixed = mixed_np
    cdef double[:, ::1] agrad = agrad_np
    cdef double[:, ::1] nsum = nsum_np
    cdef double[::1] asum = asum_np

    cdef Py_ssize_t ia, ib, ic
    cdef double ax, ay, az, bx, by, bz, cx, cy, cz
    cdef double eax, eay, eaz, ebx, eby, ebz, ecx, ecy, ecz
    cdef double nx, ny, nz, nrm, dab, dbc, dca, l2a, l2b, l2c
    cdef double cot_a, cot_b, cot_c, area, mix_a, mix_b, mix_c
    cdef double nhx, nhy, nhz, kx, ky, kz

    with nogil:
        for t in range(m):
            ia = Fv[t, 0]; ib = Fv[t, 1]; ic = Fv[t, 2]
            ax = Xv[ia, 0]; ay = Xv[ia, 1]; az = Xv[ia, 2]
            bx = Xv[ib, 0]; by = Xv[ib, 1]; bz = Xv[ib, 2]
            cx = Xv[ic, 0]; cy = Xv[ic, 1]; cz = Xv[ic, 2]
            eax = cx - bx; eay = cy - by; eaz = cz - bz
            ebx = ax - cx; eby = ay - cy; ebz = az - cz
            ecx = bx - ax; ecy = by - ay; ecz = bz - az
            _cross(eax, eay, eaz, ebx, eby, ebz, &nx, &ny, &nz)
            nrm = sqrt(nx * nx + ny * ny + nz * nz)
            if nrm < TINY:
                nrm = TINY
            dab = eax * ebx + eay * eby + eaz * ebz
            dbc = ebx * ecx + eby * ecy + ebz * ecz
            dca = ecx * eax + ecy * eay + ecz * eaz
            l2a = eax * eax + eay * eay + eaz * eaz
            l2b = ebx * ebx + eby * eby + ebz * ebz
            l2c = ecx * ecx + ecy * ecy + ecz * ecz
            cot_a = -dbc / nrm
            cot_b = -dca / nrm
            cot_c = -dab / nrm
            area = 0.5 * nrm
            face_area[t] = area

            if cot_a >= 0.0 and cot_b >= 0.0 and cot_c >= 0.0:
                mix_a = 0.125 * (l2b * cot_b + l2c * cot_c)
                mix_b = 0.125 * (l2c * cot_c + l2a * cot_a)
                mix_c = 0.125 * (l2a * cot_a + l2b * cot_b)
            else:
                mix_a = 0.5 * area if cot_a < 0.0 else 0.25 * area
                mix_b = 0.5 * area if cot_b < 0.0 else 0.25 * area
                mix_c = 0.5 * area if cot_c < 0.0 else 0.25 * area
            mixed[ia] += mix_a; mixed[ib] += mix_b; mixed[ic] += mix_c

            nhx = nx / nrm; nhy = ny / nrm; nhz = nz / nrm
            _cross(nhx, nhy, nhz, eax, eay, eaz, &kx, &ky, &kz)
            agrad[ia, 0] += 0.5 * kx; agrad[ia, 1] += 0.5 * ky; agrad[ia, 2] += 0.5 * kz
            _cross(nhx, nhy, nhz, ebx, eby, ebz, &kx, &ky, &kz)
            agrad[ib, 0] += 0.5 * kx; agrad[ib, 1] += 0.5 * ky; agrad[ib, 2] += 0.5 * kz
            _cross(nhx, nhy, nhz, ecx, ecy, ecz, &kx, &ky, &kz)
            agrad[ic, 0] += 0.5 * kx; agrad[ic, 1] += 0.5 * ky; agrad[ic, 2] += 0.5 * kz

            nsum[ia, 0] += nx; nsum[ia, 1] += ny; nsum[ia, 2] += nz
            nsum[ib, 0] += nx; nsum[ib, 1] += ny; nsum[ib, 2] += nz
            nsum[ic, 0] += nx; nsum[ic, 1] += ny; nsum[ic, 2] += nz

            asum[ia] += atan2(nrm, -dbc)
            asum[ib] += atan2(nrm, -dca)
            asum[ic] += atan2(nrm, -dab)

    return face_area_np, mixed_np, agrad_np, nsum_np, asum_np


def cot_accumulate(X, F, u):
    """(1/2) sum_j (cot + cot)(u_j - u_i); see numpy_backend.cot_accumulate."""
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const long[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.int64)
    u_arr = np.asarray(u, dtype=np.float64)
    squeeze = u_arr.ndim == 1
    if squeeze:
        u_arr = u_arr[:, None]
    cdef const double[:, ::1] uv = np.ascontiguousarray(u_arr)
    cdef Py_ssize_t n = Xv.shape[0], m = Fv.shape[0], k = uv.shape[1], t, col
    out_np = np.zeros((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_np

    cdef Py_ssize_t ia, ib, ic
    cdef double ax, ay, az, bx, by, bz, cx, cy, cz
    cdef double eax, eay, eaz, ebx, eby, ebz, ecx, ecy, ecz
    cdef double nx, ny, nz, nrm, cot_a, cot_b, cot_c, d

    with nogil:
        for t in range(m):
            ia = Fv[t, 0]; ib = Fv[t, 1]; ic = Fv[t, 2]
            ax = Xv[ia, 0]; ay = Xv[ia, 1]; az = Xv[ia, 2]
            bx = Xv[ib, 0]; by = Xv[ib, 1]; bz = Xv[ib, 2]
            cx = Xv[ic, 0]; cy = Xv[ic, 1]; cz = Xv[ic, 2]
            eax = cx - bx; eay = cy - by; eaz = cz - bz
            ebx = ax - cx; eby = ay - cy; ebz = az - cz
            ecx = bx - ax; ecy = by - ay; ecz = bz - az
            _cross(eax, eay, eaz, ebx, eby, ebz, &nx, &ny, &nz)
            nrm = sqrt(nx * nx + ny * ny + nz * nz)
            if nrm < TINY:
                nrm = TINY
            cot_a = -(ebx * ecx + eby * ecy + ebz * ecz) / nrm
            cot_b = -(ecx * eax + ecy * eay + ecz * eaz) / nrm
            cot_c = -(eax * ebx + eay * eby + eaz * ebz) / nrm
            # cot at a corner weights the opposite edge.
            for col in range(k):
                d = 0.5 * cot_a * (uv[ic, col] - uv[ib, col])
                out[ib, col] += d; out[ic, col] -= d
                d = 0.5 * cot_b * (uv[ia, col] - uv[ic, col])
                out[ic, col] += d; out[ia, col] -= d
                d = 0.5 * cot_c * (uv[ib, col] - uv[ia, col])
                out[ia, col] += d; out[ib, col] -= d

    return out_np[:, 0] if squeeze else out_np


def energy_value(X, F, double kc, double c0, double lam, double p):
    """Bending + area + volume energy (no topological constant)."""
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const long[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.int64)
    cdef Py_ssize_t n = Xv.shape[0], m = Fv.shape[0], t, i
    A_np = np.zeros(n, dtype=np.float64)
    K_np = np.zeros((n, 3), dtype=np.float64)
    N_np = np.zeros((n, 3), dtype=np.float64)
    cdef double[::1] A = A_np
    cdef double[:, ::1] K = K_np
    cdef double[:, ::1] N = N_np

    cdef Py_ssize_t ia, ib, ic
    cdef double ax, ay, az, bx, by, bz, cx, cy, cz
    cdef double eax, eay, eaz, ebx, eby, ebz, ecx, ecy, ecz
    cdef double nx, ny, nz, nrm, dab, dbc, dca, l2a, l2b, l2c
    cdef double cot_a, cot_b, cot_c, area, mix_a, mix_b, mix_c
    cdef double nhx, nhy, nhz, kx, ky, kz
    cdef double tot_area = 0.0, vol6 = 0.0
    cdef double Nn, nux, nuy, nuz, S, A_safe, H, dH, bending = 0.0

    with nogil:
        for t in range(m):
            ia = Fv[t, 0]; ib = Fv[t, 1]; ic = Fv[t, 2]
            ax = Xv[ia, 0]; ay = Xv[ia, 1]; az = Xv[ia, 2]
            bx = Xv[ib, 0]; by = Xv[ib, 1]; bz = Xv[ib, 2]
            cx = Xv[ic, 0]; cy = Xv[ic, 1]; cz = Xv[ic, 2]
            eax = cx - bx; eay = cy - by; eaz = cz - bz
            ebx = ax - cx; eby = ay - cy; ebz = az - cz
            ecx = bx - ax; ecy = by - ay; ecz = bz - az
            _cross(eax, eay, eaz, ebx, eby, ebz, &nx, &ny, &nz)
            nrm = sqrt(nx * nx + ny * ny + nz * nz)
            if nrm < TINY:
                nrm = TINY
            dab = eax * ebx + eay * eby + eaz * ebz
            dbc = ebx * ecx + eby * ecy + ebz * ecz
            dca = ecx * eax + ecy * eay + ecz * eaz
            l2a = eax * eax + eay * eay + eaz * eaz
            l2b = ebx * ebx + eby * eby + ebz * ebz
            l2c = ecx * ecx + ecy * ecy + ecz * ecz
            cot_a = -dbc / nrm
            cot_b = -dca / nrm
            cot_c = -dab / nrm
            area = 0.5 * nrm
            tot_area += area
            vol6 += ax * (by * cz - bz * cy) + ay * (bz * cx - bx * cz) + az * (bx * cy - by * cx)

            if cot_a >= 0.0 and cot_b >= 0.0 and cot_c >= 0.0:
                mix_a = 0.125 * (l2b * cot_b + l2c * cot_c)
                mix_b = 0.125 * (l2c * cot_c + l2a * cot_a)
                mix_c = 0.125 * (l2a * cot_a + l2b * cot_b)
            else:
                mix_a = 0.5 * area if cot_a < 0.0 else 0.25 * area
                mix_b = 0.5 * area if cot_b < 0.0 else 0.25 * area
                mix_c = 0.5 * area if cot_c < 0.0 else 0.25 * area
            A[ia] += mix_a; A[ib] += mix_b; A[ic] += mix_c

            nhx = nx / nrm; nhy = ny / nrm; nhz = nz / nrm
            _cross(nhx, nhy, nhz, eax, eay, eaz, &kx, &ky, &kz)
            K[ia, 0] += 0.5 * kx; K[ia, 1] += 0.5 * ky; K[ia, 2] += 0.5 * kz
            _cross(nhx, nhy, nhz, ebx, eby, ebz, &kx, &ky, &kz)
            K[ib, 0] += 0.5 * kx; K[ib, 1] += 0.5 * ky; K[ib, 2] += 0.5 * kz
            _cross(nhx, nhy, nhz, ecx, ecy, ecz, &kx, &ky, &kz)
            K[ic, 0] += 0.5 * kx; K[ic, 1] += 0.5 * ky; K[ic, 2] += 0.5 * kz

            N[ia, 0] += nx; N[ia, 1] += ny; N[ia, 2] += nz
            N[ib, 0] += nx; N[ib, 1] += ny; N[ib, 2] += nz
            N[ic, 0] += nx; N[ic, 1] += ny; N[ic, 2] += nz

        for i in range(n):
            Nn = sqrt(N[i, 0] * N[i, 0] + N[i, 1] * N[i, 1] + N[i, 2] * N[i, 2])
            if Nn < TINY:
                Nn = TINY
            nux = N[i, 0] / Nn; nuy = N[i, 1] / Nn; nuz = N[i, 2] / Nn
            S = K[i, 0] * nux + K[i, 1] * nuy + K[i, 2] * nuz
            A_safe = A[i] if A[i] > TINY else TINY
            H = S / A_safe
            dH = H - c0
            bending += 0.5 * kc * dH * dH * A[i]

    return bending + lam * tot_area + p * (vol6 / 6.0)


def gradient_with_areas(X, F, double kc, double c0, double lam, double p):
    """(exact energy gradient, mixed vertex areas) in one fused pass."""
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const long[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.int64)
    cdef Py_ssize_t n = Xv.shape[0], m = Fv.shape[0], t, i
    A_np = np.zeros(n, dtype=np.float64)
    K_np = np.zeros((n, 3), dtype=np.float64)
    N_np = np.zeros((n, 3), dtype=np.float64)
    gA_np = np.empty(n, dtype=np.float64)
    gK_np = np.empty((n, 3), dtype=np.float64)
    gN_np = np.empty((n, 3), dtype=np.float64)
    grad_np = np.zeros((n, 3), dtype=np.float64)
    cdef double[::1] A = A_np
    cdef double[:, ::1] K = K_np
    cdef double[:, ::1] N = N_np
    cdef double[::1] gA = gA_np
    cdef double[:, ::1] gK = gK_np
    cdef double[:, ::1] gN = gN_np
    cdef double[:, ::1] grad = grad_np

    cdef Py_ssize_t ia, ib, ic
    cdef double ax, ay, az, bx, by, bz, cx, cy, cz
    cdef double eax, eay, eaz, ebx, eby, ebz, ecx, ecy, ecz
    cdef double nx, ny, nz, nrm, dab, dbc, dca, l2a, l2b, l2c
    cdef double cot_a, cot_b, cot_c, area, mix_a, mix_b, mix_c
    cdef double nhx, nhy, nhz, kx, ky, kz
    cdef double Nn, nux, nuy, nuz, S, A_safe, H, gSv
    cdef double gnux, gnuy, gnuz, dot
    cdef double piece_a, piece_b, piece_c, sfac, ta, tb, tc
    cdef double Ga, Gb, Gc, fa, fb, fc, gnorm
    cdef double gKax, gKay, gKaz, gKbx, gKby, gKbz, gKcx, gKcy, gKcz
    cdef double gnx, gny, gnz, gnhx, gnhy, gnhz
    cdef double geax, geay, geaz, gebx, geby, gebz, gecx, gecy, gecz
    cdef double cxx, cxy, cxz, sixth = p / 6.0

    with nogil:
        # Pass 1: vertex accumulators A, K, N.
        for t in range(m):
            ia = Fv[t, 0]; ib = Fv[t, 1]; ic = Fv[t, 2]
            ax = Xv[ia, 0]; ay = Xv[ia, 1]; az = Xv[ia, 2]
            bx = Xv[ib, 0]; by = Xv[ib, 1]; bz = Xv[ib, 2]
            cx = Xv[ic, 0]; cy = Xv[ic, 1]; cz = Xv[ic, 2]
            eax = cx - bx; eay = cy - by; eaz = cz - bz
            ebx = ax - cx; eby = ay - cy; ebz = az - cz
            ecx = bx - ax; ecy = by - ay; ecz = bz - az
            _cross(eax, eay, eaz, ebx, eby, ebz, &nx, &ny, &nz)
            nrm = sqrt(nx * nx + ny * ny + nz * nz)
            if nrm < TINY:
                nrm = TINY
            dab = eax * ebx + eay * eby + eaz * ebz
            dbc = ebx * ecx + eby * ecy + ebz * ecz
            dca = ecx * eax + ecy * eay + ecz * eaz
            l2a = eax * eax + eay * eay + eaz * eaz
            l2b = ebx * ebx + eby * eby + ebz * ebz
            l2c = ecx * ecx + ecy * ecy + ecz * ecz
            cot_a = -dbc / nrm
            cot_b = -dca / nrm
            cot_c = -dab / nrm
            area = 0.5 * nrm

            if cot_a >= 0.0 and cot_b >= 0.0 and cot_c >= 0.0:
                mix_a = 0.125 * (l2b * cot_b + l2c * cot_c)
                mix_b = 0.125 * (l2c * cot_c + l2a * cot_a)
                mix_c = 0.125 * (l2a * cot_a + l2b * cot_b)
            else:
                mix_a = 0.5 * area if cot_a < 0.0 else 0.25 * area
                mix_b = 0.5 * area if cot_b < 0.0 else 0.25 * area
                mix_c = 0.5 * area if cot_c < 0.0 else 0.25 * area
            A[ia] += mix_a; A[ib] += mix_b; A[ic] += mix_c

            nhx = nx / nrm; nhy = ny / nrm; nhz = nz / nrm
            _cross(nhx, nhy, nhz, eax, eay, eaz, &kx, &ky, &kz)
            K[ia, 0] += 0.5 * kx; K[ia, 1] += 0.5 * ky; K[ia, 2] += 0.5 * kz
            _cross(nhx, nhy, nhz, ebx, eby, ebz, &kx, &ky, &kz)
            K[ib, 0] += 0.5 * kx; K[ib, 1] += 0.5 * ky; K[ib, 2] += 0.5 * kz
            _cross(nhx, nhy, nhz, ecx, ecy, ecz, &kx, &ky, &kz)
            K[ic, 0] += 0.5 * kx; K[ic, 1] += 0.5 * ky; K[ic, 2] += 0.5 * kz

            N[ia, 0] += nx; N[ia, 1] += ny; N[ia, 2] += nz
            N[ib, 0] += nx; N[ib, 1] += ny; N[ib, 2] += nz
            N[ic, 0] += nx; N[ic, 1] += ny; N[ic, 2] += nz

        # Vertex-wise adjoint seeds.
        for i in range(n):
            Nn = sqrt(N[i, 0] * N[i, 0] + N[i, 1] * N[i, 1] + N[i, 2] * N[i, 2])
            if Nn < TINY:
                Nn = TINY
            nux = N[i, 0] / Nn; nuy = N[i, 1] / Nn; nuz = N[i, 2] / Nn
            S = K[i, 0] * nux + K[i, 1] * nuy + K[i, 2] * nuz
            A_safe = A[i] if A[i] > TINY else TINY
            H = S / A_safe
            gSv = kc * (H - c0)
            gA[i] = -0.5 * kc * (H * H - c0 * c0)
            gK[i, 0] = gSv * nux; gK[i, 1] = gSv * nuy; gK[i, 2] = gSv * nuz
            gnux = gSv * K[i, 0]; gnuy = gSv * K[i, 1]; gnuz = gSv * K[i, 2]
            dot = nux * gnux + nuy * gnuy + nuz * gnuz
            gN[i, 0] = (gnux - nux * dot) / Nn
            gN[i, 1] = (gnuy - nuy * dot) / Nn
            gN[i, 2] = (gnuz - nuz * dot) / Nn

        # Pass 2: per-face adjoints back to vertex positions.
        for t in range(m):
            ia = Fv[t, 0]; ib = Fv[t, 1]; ic = Fv[t, 2]
            ax = Xv[ia, 0]; ay = Xv[ia, 1]; az = Xv[ia, 2]
            bx = Xv[ib, 0]; by = Xv[ib, 1]; bz = Xv[ib, 2]
            cx = Xv[ic, 0]; cy = Xv[ic, 1]; cz = Xv[ic, 2]
            eax = cx - bx; eay = cy - by; eaz = cz - bz
            ebx = ax - cx; eby = ay - cy; ebz = az - cz
            ecx = bx - ax; ecy = by - ay; ecz = bz - az
            _cross(eax, eay, eaz, ebx, eby, ebz, &nx, &ny, &nz)
            nrm = sqrt(nx * nx + ny * ny + nz * nz)
            if nrm < TINY:
                nrm = TINY
            dab = eax * ebx + eay * eby + eaz * ebz
            dbc = ebx * ecx + eby * ecy + ebz * ecz
            dca = ecx * eax + ecy * eay + ecz * eaz
            l2a = eax * eax + eay * eay + eaz * eaz
            l2b = ebx * ebx + eby * eby + ebz * ebz
            l2c = ecx * ecx + ecy * ecy + ecz * ecz
            cot_a = -dbc / nrm
            cot_b = -dca / nrm
            cot_c = -dab / nrm
            nhx = nx / nrm; nhy = ny / nrm; nhz = nz / nrm

            Ga = gA[ia]; Gb = gA[ib]; Gc = gA[ic]
            gKax = gK[ia, 0]; gKay = gK[ia, 1]; gKaz = gK[ia, 2]
            gKbx = gK[ib, 0]; gKby = gK[ib, 1]; gKbz = gK[ib, 2]
            gKcx = gK[ic, 0]; gKcy = gK[ic, 1]; gKcz = gK[ic, 2]
            gnx = gN[ia, 0] + gN[ib, 0] + gN[ic, 0]
            gny = gN[ia, 1] + gN[ib, 1] + gN[ic, 1]
            gnz = gN[ia, 2] + gN[ib, 2] + gN[ic, 2]

            # gnh = 0.5 (ea x gKa + eb x gKb + ec x gKc)
            _cross(eax, eay, eaz, gKax, gKay, gKaz, &cxx, &cxy, &cxz)
            gnhx = 0.5 * cxx; gnhy = 0.5 * cxy; gnhz = 0.5 * cxz
            _cross(ebx, eby, ebz, gKbx, gKby, gKbz, &cxx, &cxy, &cxz)
            gnhx += 0.5 * cxx; gnhy += 0.5 * cxy; gnhz += 0.5 * cxz
            _cross(ecx, ecy, ecz, gKcx, gKcy, gKcz, &cxx, &cxy, &cxz)
            gnhx += 0.5 * cxx; gnhy += 0.5 * cxy; gnhz += 0.5 * cxz

            _cross(gKax, gKay, gKaz, nhx, nhy, nhz, &geax, &geay, &geaz)
            geax *= 0.5; geay *= 0.5; geaz *= 0.5
            _cross(gKbx, gKby, gKbz, nhx, nhy, nhz, &gebx, &geby, &gebz)
            gebx *= 0.5; geby *= 0.5; gebz *= 0.5
            _cross(gKcx, gKcy, gKcz, nhx, nhy, nhz, &gecx, &gecy, &gecz)
            gecx *= 0.5; gecy *= 0.5; gecz *= 0.5

            if cot_a >= 0.0 and cot_b >= 0.0 and cot_c >= 0.0:
                piece_a = 0.125 * (l2b * cot_b + l2c * cot_c)
                piece_b = 0.125 * (l2c * cot_c + l2a * cot_a)
                piece_c = 0.125 * (l2a * cot_a + l2b * cot_b)
                sfac = -0.125 / nrm
                ta = sfac * Ga; tb = sfac * Gb; tc = sfac * Gc
                geax += ta * (l2b * ecx + l2c * ebx) + tb * (l2c * ebx + 2.0 * dbc * eax) + tc * (2.0 * dbc * eax + l2b * ecx)
                geay += ta * (l2b * ecy + l2c * eby) + tb * (l2c * eby + 2.0 * dbc * eay) + tc * (2.0 * dbc * eay + l2b * ecy)
                geaz += ta * (l2b * ecz + l2c * ebz) + tb * (l2c * ebz + 2.0 * dbc * eaz) + tc * (2.0 * dbc * eaz + l2b * ecz)
                gebx += ta * (2.0 * dca * ebx + l2c * eax) + tb * (l2c * eax + l2a * ecx) + tc * (l2a * ecx + 2.0 * dca * ebx)
                geby += ta * (2.0 * dca * eby + l2c * eay) + tb * (l2c * eay + l2a * ecy) + tc * (l2a * ecy + 2.0 * dca * eby)
                gebz += ta * (2.0 * dca * ebz + l2c * eaz) + tb * (l2c * eaz + l2a * ecz) + tc * (l2a * ecz + 2.0 * dca * ebz)
                gecx += ta * (l2b * eax + 2.0 * dab * ecx) + tb * (2.0 * dab * ecx + l2a * ebx) + tc * (l2a * ebx + l2b * eax)
                gecy += ta * (l2b * eay + 2.0 * dab * ecy) + tb * (2.0 * dab * ecy + l2a * eby) + tc * (l2a * eby + l2b * eay)
                gecz += ta * (l2b * eaz + 2.0 * dab * ecz) + tb * (2.0 * dab * ecz + l2a * ebz) + tc * (l2a * ebz + l2b * eaz)
                gnorm = -(Ga * piece_a + Gb * piece_b + Gc * piece_c) / nrm
            else:
                fa = 0.25 if cot_a < 0.0 else 0.125
                fb = 0.25 if cot_b < 0.0 else 0.125
                fc = 0.25 if cot_c < 0.0 else 0.125
                gnorm = Ga * fa + Gb * fb + Gc * fc

            gnorm += 0.5 * lam

            dot = nhx * gnhx + nhy * gnhy + nhz * gnhz
            gnx += (gnhx - nhx * dot) / nrm + gnorm * nhx
            gny += (gnhy - nhy * dot) / nrm + gnorm * nhy
            gnz += (gnhz - nhz * dot) / nrm + gnorm * nhz

            # dn = sum_v e_v x dx_v, so gx_v += gn x e_v.
            _cross(gnx, gny, gnz, eax, eay, eaz, &cxx, &cxy, &cxz)
            grad[ia, 0] += cxx + gebx - gecx
            grad[ia, 1] += cxy + geby - gecy
            grad[ia, 2] += cxz + gebz - gecz
            _cross(gnx, gny, gnz, ebx, eby, ebz, &cxx, &cxy, &cxz)
            grad[ib, 0] += cxx + gecx - geax
            grad[ib, 1] += cxy + gecy - geay
            grad[ib, 2] += cxz + gecz - geaz
            _cross(gnx, gny, gnz, ecx, ecy, ecz, &cxx, &cxy, &cxz)
            grad[ic, 0] += cxx + geax - gebx
            grad[ic, 1] += cxy + geay - geby
            grad[ic, 2] += cxz + geaz - gebz

            _cross(bx, by, bz, cx, cy, cz, &cxx, &cxy, &cxz)
            grad[ia, 0] += sixth * cxx; grad[ia, 1] += sixth * cxy; grad[ia, 2] += sixth * cxz
            _cross(cx, cy, cz, ax, ay, az, &cxx, &cxy, &cxz)
            grad[ib, 0] += sixth * cxx; grad[ib, 1] += sixth * cxy; grad[ib, 2] += sixth * cxz
            _cross(ax, ay, az, bx, by, bz, &cxx, &cxy, &cxz)
            grad[ic, 0] += sixth * cxx; grad[ic, 1] += sixth * cxy; grad[ic, 2] += sixth * cxz

    return grad_np, A_np


def energy_gradient(X, F, double kc, double c0, double lam, double p):
    """Exact gradient of the discrete energy w.r.t. vertex positions."""
    grad, _ = gradient_with_areas(X, F, kc, c0, lam, p)
    return grad
