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
"""Keyword spotting with discrete HMMs, energy endpointing and the framed
transcription protocol."""

from hybrid_asr._core import (
    Error,
    Model,
    decode,
    encode,
    forward_log_likelihood,
    golden_vectors,
    mfcc,
    read_wav,
    segment,
    synth_clip,
    train,
    viterbi,
    write_synthetic_dataset,
    write_wav,
)

__all__ = [
    "Error",
    "Model",
    "decode",
    "encode",
    "forward_log_likelihood",
    "golden_vectors",
    "mfcc",
    "read_wav",
    "segment",
    "synth_clip",
    "train",
    "viterbi",
    "write_synthetic_dataset",
    "write_wav",
]
