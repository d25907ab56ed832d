"""Numba kernels for soft-disk sweep rasterization and its adjoint.

A stroke is sampled along its curve; every sample contributes a soft disk
(cubic-smoothstep edge of fixed pixel width) and the per-pixel alpha is the
temperature-weighted soft maximum of the sample contributions.  The weighted
form keeps alpha inside [min f, max f] so the canvas range invariant holds
without clipping, and its derivative is smooth everywhere the disks are.

Kernels are single-threaded on purpose: summation order is fixed, so results
are deterministic bit for bit.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def alpha_forward(y0, x0, out, cy, cx, rad, zz, eps, tau):
    """Fill ``out`` (ph, pw) with the stroke alpha over a pixel patch.

    y0/x0 are the patch origin in pixel units; cy/cx/rad/zz are per-sample
    disk centers (pixel units), radii and opacities.
    """
    ph, pw = out.shape
    ns = cx.shape[0]
    half = 0.5 * eps
    fbuf = np.empty(ns)
    for i in range(ph):
        py = y0 + i + 0.5
        for j in range(pw):
            px = x0 + j + 0.5
            fmax = 0.0
            for s in range(ns):
                dx = px - cx[s]
                dy = py - cy[s]
                d2 = dx * dx + dy * dy
                r_out = rad[s] + half
                if d2 >= r_out * r_out:
                    f = 0.0
                else:
                    r_in = rad[s] - half
                    if r_in < 0.0:
                        r_in = 0.0
                    if d2 <= r_in * r_in:
                        f = zz[s]
                    else:
                        d = np.sqrt(d2)
                        u = (r_out - d) / (r_out - r_in)
                        f = zz[s] * u * u * (3.0 - 2.0 * u)
                fbuf[s] = f
                if f > fmax:
                    fmax = f
            if fmax <= 0.0:
                out[i, j] = 0.0
                continue
            se = 0.0
            sfe = 0.0
            for s in range(ns):
                e = np.exp((fbuf[s] - fmax) / tau)
                se += e
                sfe += fbuf[s] * e
            out[i, j] = sfe / se


@njit(cache=True)
def alpha_backward(y0, x0, galpha, alpha_in, skip_empty, cy, cx, rad, zz,
                   eps, tau, gcy, gcx, grad, gz):
    """Accumulate per-sample adjoints of the patch alpha.

    ``galpha`` is dLoss/dAlpha over the patch and ``alpha_in`` the forward
    value from :func:`alpha_forward`.  gcy/gcx/grad/gz (length = samples)
    accumulate dLoss w.r.t. each sample's center, radius and opacity.

    ``skip_empty`` lets zero-alpha pixels be skipped; callers must only set
    it when every sample opacity is positive, because a zero-opacity sample
    still carries an opacity gradient inside its geometric support (that is
    what lets an optimizer grow an invisible stroke).
    """
    ph, pw = galpha.shape
    ns = cx.shape[0]
    half = 0.5 * eps
    fbuf = np.empty(ns)
    ebuf = np.empty(ns)
    dxbuf = np.empty(ns)
    dybuf = np.empty(ns)
    for i in range(ph):
        py = y0 + i + 0.5
        for j in range(pw):
            g = galpha[i, j]
            if g == 0.0:
                continue
            if skip_empty and alpha_in[i, j] == 0.0:
                continue
            px = x0 + j + 0.5
            fmax = 0.0
            for s in range(ns):
                dx = px - cx[s]
                dy = py - cy[s]
                dxbuf[s] = dx
                dybuf[s] = dy
                d2 = dx * dx + dy * dy
                r_out = rad[s] + half
                if d2 >= r_out * r_out:
                    f = 0.0
                else:
                    r_in = rad[s] - half
                    if r_in < 0.0:
                        r_in = 0.0
                    if d2 <= r_in * r_in:
                        f = zz[s]
                    else:
                        d = np.sqrt(d2)
                        u = (r_out - d) / (r_out - r_in)
                        f = zz[s] * u * u * (3.0 - 2.0 * u)
                fbuf[s] = f
                if f > fmax:
                    fmax = f
            se = 0.0
            for s in range(ns):
                e = np.exp((fbuf[s] - fmax) / tau)
                ebuf[s] = e
                se += e
            a = alpha_in[i, j]
            for s in range(ns):
                ws = ebuf[s] / se
                dadf = ws * (1.0 + (fbuf[s] - a) / tau)
                if dadf == 0.0:
                    continue
                common = g * dadf
                dx = dxbuf[s]
                dy = dybuf[s]
                d2 = dx * dx + dy * dy
                r_out = rad[s] + half
                if d2 >= r_out * r_out:
                    continue
                r_in = rad[s] - half
                if r_in < 0.0:
                    r_in = 0.0
                if d2 <= r_in * r_in:
                    gz[s] += common
                    continue
                d = np.sqrt(d2)
                width = r_out - r_in
                u = (r_out - d) / width
                gprof = u * u * (3.0 - 2.0 * u)
                gz[s] += common * gprof
                dgdu = 6.0 * u * (1.0 - u) * zz[s]
                if r_in > 0.0:
                    du_drad = 1.0 / width
                else:
                    # width grows with the radius below the edge crossover
                    du_drad = d / (r_out * r_out)
                du_dd = -1.0 / width
                grad[s] += common * dgdu * du_drad
                if d > 1e-12:
                    gd = common * dgdu * du_dd
                    gcx[s] += gd * (-dx / d)
                    gcy[s] += gd * (-dy / d)
