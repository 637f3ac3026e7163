"""Distance and similarity measures: Lp norms, whole-image SSIM, CIEDE2000.

SSIM is the single-window (whole image) form, computed per channel and
averaged. CIEDE2000 converts sRGB to Lab (D65 white point), evaluates the
per-pixel color difference with kL = kC = kH = 1 and reports the sum over
all pixels.
"""

import numpy as np

from .errors import InputError

L0_TOLERANCE = 1e-12


def lp_norms(delta):
    """(l0, l1, l2, linf); l0 counts entries with |d| > 1e-12."""
    d = np.asarray(delta, dtype=np.float64).ravel()
    if d.size == 0:
        return 0, 0.0, 0.0, 0.0
    a = np.abs(d)
    return (int(np.count_nonzero(a > L0_TOLERANCE)), float(a.sum()),
            float(np.sqrt(np.sum(a * a))), float(a.max()))


def ssim(x, y, dynamic_range=1.0):
    """Whole-image structural similarity, averaged over channels."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise InputError(f"ssim: shapes {x.shape} and {y.shape} differ")
    if x.ndim >= 3:
        xc = x.reshape(-1, x.shape[-1]).T
        yc = y.reshape(-1, y.shape[-1]).T
    else:
        xc = x.reshape(1, -1)
        yc = y.reshape(1, -1)
    c1 = (0.01 * dynamic_range) ** 2
    c2 = (0.03 * dynamic_range) ** 2
    total = 0.0
    for xs, ys in zip(xc, yc):
        mx, my = xs.mean(), ys.mean()
        vx = np.mean((xs - mx) ** 2)
        vy = np.mean((ys - my) ** 2)
        cov = np.mean((xs - mx) * (ys - my))
        total += ((2 * mx * my + c1) * (2 * cov + c2)) / \
                 ((mx * mx + my * my + c1) * (vx + vy + c2))
    return float(total / len(xc))


# sRGB with D65 reference white (IEC 61966-2-1 primaries)
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])


def srgb_to_lab(rgb):
    """sRGB values in [0, 1] (last axis = RGB) to CIE Lab."""
    c = np.asarray(rgb, dtype=np.float64)
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _RGB_TO_XYZ.T / _D65_WHITE
    d = 6.0 / 29.0
    f = np.where(xyz > d ** 3, np.cbrt(xyz), xyz / (3 * d * d) + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def delta_e_ciede2000(lab1, lab2):
    """Per-entry CIEDE2000 color difference between Lab arrays (last axis = Lab)."""
    lab1 = np.asarray(lab1, dtype=np.float64)
    lab2 = np.asarray(lab2, dtype=np.float64)
    l1, a1, b1 = lab1[..., 0], lab1[..., 1], lab1[..., 2]
    l2, a2, b2 = lab2[..., 0], lab2[..., 1], lab2[..., 2]
    c1 = np.hypot(a1, b1)
    c2 = np.hypot(a2, b2)
    cbar = 0.5 * (c1 + c2)
    g = 0.5 * (1.0 - np.sqrt(cbar ** 7 / (cbar ** 7 + 25.0 ** 7)))
    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = np.hypot(a1p, b1)
    c2p = np.hypot(a2p, b2)
    h1p = np.degrees(np.arctan2(b1, a1p)) % 360.0
    h2p = np.degrees(np.arctan2(b2, a2p)) % 360.0
    gray = c1p * c2p == 0

    dhp = h2p - h1p
    dhp = np.where(dhp > 180.0, dhp - 360.0, dhp)
    dhp = np.where(dhp < -180.0, dhp + 360.0, dhp)
    dhp = np.where(gray, 0.0, dhp)
    dlp = l2 - l1
    dcp = c2p - c1p
    dhh = 2.0 * np.sqrt(c1p * c2p) * np.sin(np.radians(dhp) / 2.0)

    lbp = 0.5 * (l1 + l2)
    cbp = 0.5 * (c1p + c2p)
    hsum = h1p + h2p
    hbp = 0.5 * hsum
    far = np.abs(h1p - h2p) > 180.0
    hbp = np.where(far & (hsum < 360.0), hbp + 180.0, hbp)
    hbp = np.where(far & (hsum >= 360.0), hbp - 180.0, hbp)
    hbp = np.where(gray, hsum, hbp)

    t = (1.0 - 0.17 * np.cos(np.radians(hbp - 30.0))
         + 0.24 * np.cos(np.radians(2.0 * hbp))
         + 0.32 * np.cos(np.radians(3.0 * hbp + 6.0))
         - 0.20 * np.cos(np.radians(4.0 * hbp - 63.0)))
    dtheta = 30.0 * np.exp(-(((hbp - 275.0) / 25.0) ** 2))
    rc = 2.0 * np.sqrt(cbp ** 7 / (cbp ** 7 + 25.0 ** 7))
    sl = 1.0 + 0.015 * (lbp - 50.0) ** 2 / np.sqrt(20.0 + (lbp - 50.0) ** 2)
    sc = 1.0 + 0.045 * cbp
    sh = 1.0 + 0.015 * cbp * t
    rt = -np.sin(np.radians(2.0 * dtheta)) * rc
    return np.sqrt((dlp / sl) ** 2 + (dcp / sc) ** 2 + (dhh / sh) ** 2
                   + rt * (dcp / sc) * (dhh / sh))


def ciede2000(x, y):
    """Total CIEDE2000 between two RGB images in [0, 1]: per-pixel difference
    after sRGB-to-Lab conversion, summed over all pixels."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise InputError(f"ciede2000: shapes {x.shape} and {y.shape} differ")
    if x.ndim != 3 or x.shape[-1] != 3:
        raise InputError(f"ciede2000: expected a 3-channel image, got shape {x.shape}")
    return float(np.sum(delta_e_ciede2000(srgb_to_lab(x), srgb_to_lab(y))))
