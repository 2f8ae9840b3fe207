#!/usr/bin/env python3
"""Regenerates core/src/wavelet_taps.inc from PyWavelets' filter tables.

Only needed when the catalog changes; the build does not depend on Python.
"""
import sys

import pywt

NAMES = ["haar", "db4", "db10", "coif1", "coif4", "coif5", "sym4", "sym10",
         "bior2.2", "bior2.4", "bior3.3", "bior3.7", "bior3.9", "bior6.8",
         "rbio3.7", "rbio6.8"]


def taps(values):
    return ", ".join(repr(float(v)) for v in values)


def main(out):
    lines = ["// Generated by tools/gen_wavelet_taps.py. Do not edit.", ""]
    for name in NAMES:
        w = pywt.Wavelet(name)
        family = "orthogonal" if w.orthogonal else "biorthogonal"
        lines.append(f'{{"{name}", WaveletFamily::k{family.capitalize()}, {w.vanishing_moments_psi},')
        for field in ("dec_lo", "dec_hi", "rec_lo", "rec_hi"):
            lines.append(f"  {{{taps(getattr(w, field))}}},")
        lines[-1] = lines[-1].rstrip(",") + "},"
    with open(out, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "core/src/wavelet_taps.inc")
