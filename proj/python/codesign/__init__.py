# Copyright 2026 The codesign Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Python bindings for the codesign search library.

Mappings are dicts from component id to device id. Solver results are dicts
with the mapping, the objective breakdown and the search trajectory.
"""

from ._codesign import (
    Error,
    Problem,
    co_search,
    derive_seed,
    evaluate,
    mc_hw_loss,
    relaxed_hw_loss,
    relaxed_hw_loss_grad,
    smooth_max,
    solve,
)

__all__ = [
    "Error",
    "Problem",
    "co_search",
    "derive_seed",
    "evaluate",
    "mc_hw_loss",
    "relaxed_hw_loss",
    "relaxed_hw_loss_grad",
    "smooth_max",
    "solve",
]
