# Copyright 2026 The DeSIA Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Inference attacks against fixed aggregate statistics."""

from desia._desia import (
    Dataset,
    Query,
    Release,
    Schema,
    __version__,
    add_laplace_noise,
    auc,
    deterministic_aia,
    deterministic_mia,
    load_queries,
    marginal_queries,
    release,
    roc,
    run_aia_game,
    tpr_at_fpr,
)

__all__ = [
    "Dataset",
    "Query",
    "Release",
    "Schema",
    "__version__",
    "add_laplace_noise",
    "auc",
    "deterministic_aia",
    "deterministic_mia",
    "load_queries",
    "marginal_queries",
    "release",
    "roc",
    "run_aia_game",
    "tpr_at_fpr",
]
