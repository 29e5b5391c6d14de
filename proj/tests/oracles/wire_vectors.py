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
"""Hand-encodes the wire vectors and digests frozen in the C++ tests.

Uses struct/hashlib only; nothing here touches the C++ codec.
"""
import hashlib
import struct


def frame(type_code, payload=b""):
    return struct.pack(">IB", 1 + len(payload), type_code) + payload


def ramp_pcm(n_samples):
    # int16 little-endian ramp: sample i = (i * 37) mod 65536 - 32768
    return b"".join(struct.pack("<h", ((i * 37) % 65536) - 32768)
                    for i in range(n_samples))


if __name__ == "__main__":
    print("ping      ", frame(0x40).hex(" "))
    print("uttstart  ", frame(0x10, struct.pack(">I", 7)).hex(" "))
    text = "go".encode()
    print("transcript", frame(0x20, struct.pack(">II", 1, len(text)) + text
                               + struct.pack(">H", 9000)).hex(" "))
    print("sha256(6400-byte ramp)", hashlib.sha256(ramp_pcm(3200)).hexdigest())
    print("sha256(empty)", hashlib.sha256(b"").hexdigest())
