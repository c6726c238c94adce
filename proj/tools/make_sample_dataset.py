#!/usr/bin/env python3
"""Regenerates data/sample_device.csv and data/sample_anticrossing.csv.

The device table is produced from a two-mode coupled-oscillator picture:
a bounce mode at a fixed frequency, a twist mode whose frequency falls
linearly with support length, and a constant coupling g_m. Hybrid branch
frequencies are the exact eigenfrequencies of that model. Per-branch
g_OM, m_eff and r_eff follow the twist/bounce mixing weights.

Anchors:
  * at l_s = 12 um the branches sit at 4.81 MHz and 5.96 MHz
  * bounce-like g_OM/2pi = 32 GHz/nm away from the crossing
  * crossing (equal mixing) at l_s = 10 um
Calibrated (not measured) values:
  * m_eff and r_eff at l_s = 10 um are solved so that the 4 K / Q_m = 1e6
    budget gives tau_min = 3.22e-21 N m/rtHz and the 10 mK / Q_m = 1e8
    pulsed budget has its n_cav optimum at 1e-3.
"""
import math
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import fsolve

C = 2.99792458e8
HBAR = 1.054571817e-34
KB = 1.380649e-23
TWO_PI = 2.0 * math.pi

F_LOWER_12 = 4.81e6
F_UPPER_12 = 5.96e6
G_M_HZ = 1.5e6
G_BOUNCE = TWO_PI * 32e9 / 1e-9
G_TWIST = TWO_PI * 1e9 / 1e-9
Q_M = 500.0
L_S = [5.0 + i for i in range(11)]
W_H, L_H = 7.0, 1.0


def bare_from_hybrid(w_lo, w_hi, g):
    s = w_lo**2 + w_hi**2
    p = w_lo**2 * w_hi**2 + g**4
    d = math.sqrt(s * s / 4 - p)
    return math.sqrt(s / 2 - d), math.sqrt(s / 2 + d)


def model(g_m_hz):
    g = TWO_PI * g_m_hz
    w1_12, w2 = bare_from_hybrid(TWO_PI * F_LOWER_12, TWO_PI * F_UPPER_12, TWO_PI * G_M_HZ)
    slope = (w1_12 - w2) / 2.0

    def w1(ls):
        return w2 + slope * (ls - 10.0)

    def hybrid(ls):
        a, b = w1(ls) ** 2, w2**2
        dl = (a - b) / 2
        s = math.sqrt(dl * dl + g**4)
        lo = math.sqrt((a + b) / 2 - s)
        hi = math.sqrt((a + b) / 2 + s)
        twist_weight_lo = (1 - dl / s) / 2
        return lo, hi, twist_weight_lo

    return hybrid


def mode_props(twist_weight, m_c, r_c):
    bounce_weight = 1.0 - twist_weight
    g_om = bounce_weight * G_BOUNCE + twist_weight * G_TWIST
    m_eff = m_c * (1.0 + 0.2 * (twist_weight - 0.5))
    r_eff = r_c * 0.25 / (twist_weight * bounce_weight)
    return m_eff, r_eff, g_om


def calibrate(hybrid):
    omega0 = TWO_PI * C / 1428e-9
    kappa = omega0 / 1e6
    slope = 3 * math.sqrt(3) / 4 / kappa
    om, _, wt = hybrid(10.0)
    _, _, g = mode_props(wt, 1.0, 1.0)

    def terms(m, r, temp, q, p_det, p_dn, n_cav):
        th = math.sqrt(4 * KB * temp * om * m * r * r / q)
        a = m * om**2 * r / (slope * q * p_det * g)
        sn = a * math.sqrt(2 * HBAR * omega0 * p_det)
        dn = a * p_dn
        ba = 2 * HBAR * g * r * math.sqrt(n_cav / kappa)
        return th, sn, dn, ba

    def eqs(v):
        m, r = np.exp(v)
        t5 = math.sqrt(sum(x * x for x in terms(m, r, 4.0, 1e6, 1e-7, 2.5e-12, 1e-3)))
        _, sn, dn, ba = terms(m, r, 0.01, 1e8, 1e-7, 3.8e-17, 1e-3)
        return [math.log(t5 / 3.22e-21), math.log((sn**2 + 2 * dn**2) / ba**2)]

    sol = fsolve(eqs, [math.log(8e-11), math.log(4e-6)])
    return tuple(float(x) for x in np.exp(sol))


def g17(x):
    return repr(float(x))


def main(out_dir):
    out = Path(out_dir)
    hybrid = model(G_M_HZ)
    m_c, r_c = calibrate(hybrid)
    lines = [
        "# Sample OAM-detector device table (SI units; frequencies in Hz, divided by 2*pi).",
        "# Branch frequencies: exact eigenfrequencies of a two-mode model with g_m/2pi = 1.5 MHz,",
        "#   anchored to 4.81 MHz / 5.96 MHz at l_s = 12 um; crossing at l_s = 10 um.",
        "# g_OM: bounce-like 32 GHz/nm off resonance; other points illustrative.",
        "# m_eff, r_eff at l_s = 10 um: CALIBRATED to the 3.22e-21 N m/rtHz budget, not FEM values.",
        "# Other m_eff, r_eff points: smooth illustrative interpolants.",
        "# Geometry: w_h = 7 um, l_h = 1 um; FEM stress S0 = 1 GPa (provenance only).",
        "# Regenerate with tools/make_sample_dataset.py.",
        "l_s_um,w_h_um,l_h_um,branch,omega_m_hz,m_eff_kg,r_eff_m,q_m,g_om_hz_per_m",
    ]
    for ls in L_S:
        lo, hi, wt_lo = hybrid(ls)
        for name, omega, wt in (("hybrid-lower", lo, wt_lo), ("hybrid-upper", hi, 1.0 - wt_lo)):
            m_eff, r_eff, g_om = mode_props(wt, m_c, r_c)
            lines.append(",".join([
                f"{ls:g}", f"{W_H:g}", f"{L_H:g}", name,
                g17(omega / TWO_PI), g17(m_eff), g17(r_eff), f"{Q_M:g}", g17(g_om / TWO_PI),
            ]))
    (out / "sample_device.csv").write_text("\n".join(lines) + "\n")

    rows = ["# Illustrative anti-crossing sweeps, one group per hanger width (g_m falls with w_h).",
            "w_h_um,l_s_um,f_minus_hz,f_plus_hz"]
    for w_h, g_m_hz in ((5.0, 2.1e6), (7.0, 1.5e6), (9.0, 1.0e6)):
        hyb = model(g_m_hz)
        # model() keeps the 7 um bare lines; only the coupling changes with w_h.
        for i in range(17):
            ls = 8.0 + 0.25 * i
            lo, hi, _ = hyb(ls)
            rows.append(f"{w_h:g},{ls:g},{g17(lo / TWO_PI)},{g17(hi / TWO_PI)}")
    (out / "sample_anticrossing.csv").write_text("\n".join(rows) + "\n")
    print(f"m_c = {m_c!r} kg, r_c = {r_c!r} m", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data")
