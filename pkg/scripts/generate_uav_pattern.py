#!/usr/bin/env python3
"""Regenerate the bundled synthetic UAV-frame element pattern.

The table mimics a quarter-wave monopole hanging under an airframe: the
monopole axis coincides with the array boresight (local x), the deep axial
null is partially filled by frame scattering, gain peaks on a cone around
the axis, and the hemisphere behind the airframe is strongly attenuated.
A smooth deterministic ripple stands in for the gain fluctuations caused
by protruding parts of the frame.

The numbers are synthetic. Replace the CSV with a measured or simulated
table of the same format to study a real airframe.
"""

import csv
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "src" / "uavcoex" / "data" / "uav_pattern_synthetic.csv"

THETA_STEP = 4.0
PHI_STEP = 4.0


def gain_dbi(theta_deg: float, phi_deg: float) -> float:
    t = math.radians(theta_deg)
    p = math.radians(phi_deg)
    # Angle from the boresight axis (local x).
    cos_psi = math.sin(t) * math.cos(p)
    psi = math.degrees(math.acos(min(1.0, max(-1.0, cos_psi))))
    if psi <= 90.0:
        base = -4.0 + 8.0 * math.sin(math.radians(psi)) ** 1.5
    else:
        base = 4.0 - 16.0 * ((psi - 90.0) / 90.0) ** 1.2
    # Ripple scales with sin(theta) so the table stays single-valued at the poles.
    ripple = (
        1.2 * math.sin(5.0 * p) * math.sin(t) * math.sin(math.radians(psi)) ** 2
        + 0.6 * math.sin(4.0 * t + 0.5)
    )
    return base + ripple


def main() -> None:
    thetas = np.arange(0.0, 180.0 + THETA_STEP / 2, THETA_STEP)
    phis = np.arange(-180.0, 180.0 + PHI_STEP / 2, PHI_STEP)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", newline="") as fh:
        fh.write("# SYNTHETIC UAV-frame element pattern (dBi). Not measured data.\n")
        fh.write("# Monopole-like lobe around the array boresight with frame ripple;\n")
        fh.write("# regenerate with scripts/generate_uav_pattern.py.\n")
        writer = csv.writer(fh)
        writer.writerow(["theta_deg\\phi_deg"] + [f"{p:g}" for p in phis])
        for t in thetas:
            writer.writerow([f"{t:g}"] + [f"{gain_dbi(t, p):.3f}" for p in phis])
    print(f"wrote {OUT} ({thetas.size} x {phis.size} grid)")


if __name__ == "__main__":
    main()
