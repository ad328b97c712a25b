"""Vectorized numpy implementation of the per-face mesh kernels.

Conventions shared by both backends (and relied on by the tests):

- Face corners (a, b, c) are counter-clockwise seen from outside.  Opposite
  edge vectors: ea = c - b, eb = a - c, ec = b - a, so ea + eb + ec = 0 and
  the (unnormalized, outward) face normal is n = ea x eb with |n| = 2*area.
- cot of the interior angle at a corner equals -<e_u, e_w>/|n| for the two
  edges opposite the *other* corners.
- Per-vertex accumulators:
    mixed_area   obtuse-safe Voronoi areas (area/2 at an obtuse corner,
                 area/4 at the other two corners of an obtuse face),
    area_grad    gradient of total area w.r.t. the vertex, equal to the
                 cotangent sum (1/2) sum_j (cot + cot) (x_i - x_j),
    normal_sum   sum of unnormalized face normals (area-weighted normal),
    angle_sum    sum of interior angles (for the angle-defect curvature).
- The discrete energy differentiated by :func:`energy_gradient` is

    E = (kc/2) * sum_i (H_i - c0)^2 A_i + lam * sum_T area_T + p * volume,

  with H_i = <area_grad_i, nu_i> / A_i, nu_i = normal_sum_i/|normal_sum_i|,
  A_i the mixed area.  The gradient is an exact reverse-mode differentiation
  of that expression (the topological term is constant and drops out).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"

_TINY = 1e-300


def _faces(X, F):
    ia, ib, ic = F[:, 0], F[:, 1], F[:, 2]
    a, b, c = X[ia], X[ib], X[ic]
    ea, eb, ec = c - b, a - c, b - a
    nvec = np.cross(ea, eb)
    nrm = np.maximum(np.linalg.norm(nvec, axis=1), _TINY)
    return ia, ib, ic, a, b, c, ea, eb, ec, nvec, nrm


def _scatter_vec(F, va, vb, vc, n):
    flat = F.T.ravel()
    vals = np.concatenate([va, vb, vc])
    out = np.empty((n, 3))
    for k in range(3):
        out[:, k] = np.bincount(flat, weights=vals[:, k], minlength=n)
    return out


def _scatter_scalar(F, sa, sb, sc, n):
    flat = F.T.ravel()
    vals = np.concatenate([sa, sb, sc])
    return np.bincount(flat, weights=vals, minlength=n)


def vertex_geometry(X, F):
    """Per-vertex accumulators of the cotangent discretization.

    Returns (face_area[m], mixed_area[n], area_grad[n,3], normal_sum[n,3],
    angle_sum[n]).
    """
    n = X.shape[0]
    ia, ib, ic, a, b, c, ea, eb, ec, nvec, nrm = _faces(X, F)

    dab = np.einsum("ij,ij->i", ea, eb)
    dbc = np.einsum("ij,ij->i", eb, ec)
    dca = np.einsum("ij,ij->i", ec, ea)
    l2a = np.einsum("ij,ij->i", ea, ea)
    l2b = np.einsum("ij,ij->i", eb, eb)
    l2c = np.einsum("ij,ij->i", ec, ec)

    cot_a = -dbc / nrm
    cot_b = -dca / nrm
    cot_c = -dab / nrm
    face_area = 0.5 * nrm

    # Obtuse-safe mixed areas.
    piece_a = 0.125 * (l2b * cot_b + l2c * cot_c)
    piece_b = 0.125 * (l2c * cot_c + l2a * cot_a)
    piece_c = 0.125 * (l2a * cot_a + l2b * cot_b)
    nonobtuse = (cot_a >= 0.0) & (cot_b >= 0.0) & (cot_c >= 0.0)
    half, quarter = 0.5 * face_area, 0.25 * face_area
    mix_a = np.where(nonobtuse, piece_a, np.where(cot_a < 0.0, half, quarter))
    mix_b = np.where(nonobtuse, piece_b, np.where(cot_b < 0.0, half, quarter))
    mix_c = np.where(nonobtuse, piece_c, np.where(cot_c < 0.0, half, quarter))

    nh = nvec / nrm[:, None]
    ka = 0.5 * np.cross(nh, ea)
    kb = 0.5 * np.cross(nh, eb)
    kc_ = 0.5 * np.cross(nh, ec)

    th_a = np.arctan2(nrm, -dbc)
    th_b = np.arctan2(nrm, -dca)
    th_c = np.arctan2(nrm, -dab)

    mixed_area = _scatter_scalar(F, mix_a, mix_b, mix_c, n)
    area_grad = _scatter_vec(F, ka, kb, kc_, n)
    normal_sum = _scatter_vec(F, nvec, nvec, nvec, n)
    angle_sum = _scatter_scalar(F, th_a, th_b, th_c, n)
    return face_area, mixed_area, area_grad, normal_sum, angle_sum


def cot_accumulate(X, F, u):
    """(1/2) * sum_j (cot alpha + cot beta) (u_j - u_i), no area division.

    u may be (n,) or (n, k).  Dividing by the mixed areas yields the
    Laplace-Beltrami operator of the field.
    """
    n = X.shape[0]
    _, ib_, ic_, _, _, _, ea, eb, ec, _, nrm = _faces(X, F)
    ia, ib, ic = F[:, 0], F[:, 1], F[:, 2]

    cot_a = -np.einsum("ij,ij->i", eb, ec) / nrm
    cot_b = -np.einsum("ij,ij->i", ec, ea) / nrm
    cot_c = -np.einsum("ij,ij->i", ea, eb) / nrm

    squeeze = u.ndim == 1
    uu = u[:, None] if squeeze else u
    out = np.zeros_like(uu, dtype=np.float64)
    # Each face contributes (cot at the opposite corner)/2 to its three edges.
    for i_j, i_k, cot in ((ib, ic, cot_a), (ic, ia, cot_b), (ia, ib, cot_c)):
        d = 0.5 * cot[:, None] * (uu[i_k] - uu[i_j])
        for col in range(uu.shape[1]):
            out[:, col] += np.bincount(i_j, weights=d[:, col], minlength=n)
            out[:, col] -= np.bincount(i_k, weights=d[:, col], minlength=n)
    return out[:, 0] if squeeze else out


def energy_value(X, F, kc, c0, lam, p):
    """Bending + area + volume energy (no topological constant)."""
    face_area, mixed_area, area_grad, normal_sum, _ = vertex_geometry(X, F)
    Nn = np.maximum(np.linalg.norm(normal_sum, axis=1), _TINY)
    nu = normal_sum / Nn[:, None]
    H = np.einsum("ij,ij->i", area_grad, nu) / np.maximum(mixed_area, _TINY)
    bending = 0.5 * kc * ((H - c0) ** 2 * mixed_area).sum()
    a, b, c = X[F[:, 0]], X[F[:, 1]], X[F[:, 2]]
    vol = np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0
    return float(bending + lam * face_area.sum() + p * vol)


def gradient_with_areas(X, F, kc, c0, lam, p):
    """(exact energy gradient, mixed vertex areas)."""
    grad = energy_gradient(X, F, kc, c0, lam, p)
    _, mixed_area, _, _, _ = vertex_geometry(X, F)
    return grad, mixed_area


def energy_gradient(X, F, kc, c0, lam, p):
    """Exact gradient of the discrete energy w.r.t. vertex positions.

    Reverse-mode differentiation of the bending + area + volume terms as
    defined in the module docstring; returns an (n, 3) array.
    """
    n = X.shape[0]
    ia, ib, ic, a, b, c, ea, eb, ec, nvec, nrm = _faces(X, F)

    dab = np.einsum("ij,ij->i", ea, eb)
    dbc = np.einsum("ij,ij->i", eb, ec)
    dca = np.einsum("ij,ij->i", ec, ea)
    l2a = np.einsum("ij,ij->i", ea, ea)
    l2b = np.einsum("ij,ij->i", eb, eb)
    l2c = np.einsum("ij,ij->i", ec, ec)
    cot_a = -dbc / nrm
    cot_b = -dca / nrm
    cot_c = -dab / nrm
    face_area = 0.5 * nrm
    nh = nvec / nrm[:, None]

    piece_a = 0.125 * (l2b * cot_b + l2c * cot_c)
    piece_b = 0.125 * (l2c * cot_c + l2a * cot_a)
    piece_c = 0.125 * (l2a * cot_a + l2b * cot_b)
    nonobtuse = (cot_a >= 0.0) & (cot_b >= 0.0) & (cot_c >= 0.0)
    half, quarter = 0.5 * face_area, 0.25 * face_area
    mix_a = np.where(nonobtuse, piece_a, np.where(cot_a < 0.0, half, quarter))
    mix_b = np.where(nonobtuse, piece_b, np.where(cot_b < 0.0, half, quarter))
    mix_c = np.where(nonobtuse, piece_c, np.where(cot_c < 0.0, half, quarter))

    ka = 0.5 * np.cross(nh, ea)
    kb = 0.5 * np.cross(nh, eb)
    kc_v = 0.5 * np.cross(nh, ec)

    A = _scatter_scalar(F, mix_a, mix_b, mix_c, n)
    K = _scatter_vec(F, ka, kb, kc_v, n)
    N = _scatter_vec(F, nvec, nvec, nvec, n)
    Nn = np.maximum(np.linalg.norm(N, axis=1), _TINY)
    nu = N / Nn[:, None]
    S = np.einsum("ij,ij->i", K, nu)
    A_safe = np.maximum(A, _TINY)
    H = S / A_safe

    # Adjoint seeds from E_b = (kc/2) sum (H - c0)^2 A with H = S/A.
    gS = kc * (H - c0)
    gA = -(kc / 2.0) * (H * H - c0 * c0)
    gK = gS[:, None] * nu
    gnu = gS[:, None] * K
    gN = (gnu - nu * np.einsum("ij,ij->i", nu, gnu)[:, None]) / Nn[:, None]

    # Gather per-face.
    Ga, Gb, Gc = gA[ia], gA[ib], gA[ic]
    gKa, gKb, gKc = gK[ia], gK[ib], gK[ic]
    gn = gN[ia] + gN[ib] + gN[ic]

    # area_grad corner pieces k_v = (1/2) nh x e_v.
    gnh = 0.5 * (np.cross(ea, gKa) + np.cross(eb, gKb) + np.cross(ec, gKc))
    ge_a = 0.5 * np.cross(gKa, nh)
    ge_b = 0.5 * np.cross(gKb, nh)
    ge_c = 0.5 * np.cross(gKc, nh)

    # Mixed-area pieces: Voronoi formula on non-obtuse faces.
    s = np.where(nonobtuse, -0.125 / nrm, 0.0)
    ta, tb, tc = (s * Ga)[:, None], (s * Gb)[:, None], (s * Gc)[:, None]
    l2a_, l2b_, l2c_ = l2a[:, None], l2b[:, None], l2c[:, None]
    dab_, dbc_, dca_ = dab[:, None], dbc[:, None], dca[:, None]
    ge_a += (
        ta * (l2b_ * ec + l2c_ * eb)
        + tb * (l2c_ * eb + 2.0 * dbc_ * ea)
        + tc * (2.0 * dbc_ * ea + l2b_ * ec)
    )
    ge_b += (
        ta * (2.0 * dca_ * eb + l2c_ * ea)
        + tb * (l2c_ * ea + l2a_ * ec)
        + tc * (l2a_ * ec + 2.0 * dca_ * eb)
    )
    ge_c += (
        ta * (l2b_ * ea + 2.0 * dab_ * ec)
        + tb * (2.0 * dab_ * ec + l2a_ * eb)
        + tc * (l2a_ * eb + l2b_ * ea)
    )
    gnorm = np.where(nonobtuse, -(Ga * piece_a + Gb * piece_b + Gc * piece_c) / nrm, 0.0)
    # Obtuse faces: pieces are area/2 or area/4, area = nrm/2.
    fa = np.where(cot_a < 0.0, 0.25, 0.125)
    fb = np.where(cot_b < 0.0, 0.25, 0.125)
    fc = np.where(cot_c < 0.0, 0.25, 0.125)
    gnorm += np.where(nonobtuse, 0.0, Ga * fa + Gb * fb + Gc * fc)

    # lam * total face area.
    gnorm += 0.5 * lam

    # Unit-normal and norm adjoints back to the raw normal.
    gn += (gnh - nh * np.einsum("ij,ij->i", nh, gnh)[:, None]) / nrm[:, None]
    gn += gnorm[:, None] * nh

    # n = ea x eb with dn = sum_v e_v x dx_v.
    gxa = np.cross(gn, ea) + ge_b - ge_c
    gxb = np.cross(gn, eb) + ge_c - ge_a
    gxc = np.cross(gn, ec) + ge_a - ge_b

    # p * volume, volume = (1/6) sum det(a, b, c).
    sixth = p / 6.0
    gxa += sixth * np.cross(b, c)
    gxb += sixth * np.cross(c, a)
    gxc += sixth * np.cross(a, b)

    return _scatter_vec(F, gxa, gxb, gxc, n)
