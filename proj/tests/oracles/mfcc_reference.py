#!/usr/bin/env python3
# Copyright (c) 2026 The hybrid-asr Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent MFCC reference used to freeze expected values in features_test.cc.

Written straight from the front-end recipe with numpy only (direct O(n^2)
DFT, explicit loops for the filterbank) so it shares no code with the C++
implementation. Prints the first frame of a 1 kHz unit sine, cmn off, and
the index of the strongest mel filter.
"""
import numpy as np

SR = 16000
FRAME_LEN = 400
HOP = 160
NFFT = 512
NMEL = 26
NCEP = 13
PRE = 0.97
FLOOR = 1e-10


def mel(f):
    return 2595.0 * np.log10(1.0 + f / 700.0)


def inv_mel(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def filterbank():
    edges = inv_mel(np.linspace(mel(0.0), mel(SR / 2.0), NMEL + 2))
    fb = np.zeros((NMEL, NFFT // 2 + 1))
    for m in range(NMEL):
        lo, c, hi = edges[m], edges[m + 1], edges[m + 2]
        for k in range(NFFT // 2 + 1):
            f = k * SR / NFFT
            if lo < f <= c:
                fb[m, k] = (f - lo) / (c - lo)
            elif c < f < hi:
                fb[m, k] = (hi - f) / (hi - c)
    return fb, edges[1:-1]


def direct_dft_power(frame):
    n = np.arange(NFFT)
    out = np.zeros(NFFT // 2 + 1)
    for k in range(NFFT // 2 + 1):
        ang = -2.0 * np.pi * k * n / NFFT
        re = np.sum(frame * np.cos(ang))
        im = np.sum(frame * np.sin(ang))
        out[k] = re * re + im * im
    return out


def first_frame(x):
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - PRE * x[:-1]
    frame = y[:FRAME_LEN]
    n = np.arange(FRAME_LEN)
    w = 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (FRAME_LEN - 1))
    padded = np.zeros(NFFT)
    padded[:FRAME_LEN] = frame * w
    p = direct_dft_power(padded)
    fb, centers = filterbank()
    e = fb @ p
    loge = np.log(np.maximum(e, FLOOR))
    c = np.zeros(NCEP)
    for k in range(NCEP):
        s = np.sqrt(1.0 / NMEL) if k == 0 else np.sqrt(2.0 / NMEL)
        c[k] = s * sum(loge[m] * np.cos(np.pi * k * (m + 0.5) / NMEL) for m in range(NMEL))
    return c, e, centers


if __name__ == "__main__":
    t = np.arange(SR) / SR
    x = np.sin(2.0 * np.pi * 1000.0 * t)
    c, e, centers = first_frame(x)
    print("argmax filter:", int(np.argmax(e)),
          "nearest-center filter:", int(np.argmin(np.abs(centers - 1000.0))))
    print("first frame:")
    print(",\n".join(repr(float(v)) for v in c))
