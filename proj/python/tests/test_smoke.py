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

import itertools
import os
import pathlib

import pytest

import desia

ROOT = pathlib.Path(os.environ.get("DESIA_SOURCE_DIR", pathlib.Path(__file__).parents[2]))
FIXTURES = ROOT / "fixtures"


@pytest.fixture(scope="module")
def tiny():
    schema = desia.Schema.load(str(FIXTURES / "tiny_schema.json"))
    data = desia.Dataset.load(str(FIXTURES / "tiny_dataset.csv"), schema)
    queries = desia.load_queries(str(FIXTURES / "tiny_queries.json"), schema)
    return schema, data, queries


def test_tiny_target_is_determined(tiny):
    schema, data, queries = tiny
    rel = desia.release(queries, data)
    assert rel.answers == [1, 2]
    assert desia.deterministic_aia(rel, schema, [0]) == 1
    assert desia.deterministic_aia(rel, schema, [1]) is None


def test_membership_on_tiny(tiny):
    schema, data, queries = tiny
    rel = desia.release(queries, data)
    assert desia.deterministic_mia(rel, schema, [0, 1]) == 1
    assert desia.deterministic_mia(rel, schema, [0, 0]) is None


def test_auc_matches_pairwise_count():
    scores = [0.1, 0.4, 0.35, 0.8, 0.4]
    labels = [0, 0, 1, 1, 1]
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    assert desia.auc(scores, labels) == pytest.approx(wins / (len(pos) * len(neg)), abs=1e-12)
    pts = desia.roc(scores, labels)
    assert pts[0][:2] == (0.0, 0.0) and pts[-1][:2] == (1.0, 1.0)
    assert desia.tpr_at_fpr(scores, labels, 0.4) == pytest.approx(1 / 3)


def test_errors_become_python_exceptions(tiny):
    schema, _, _ = tiny
    with pytest.raises(ValueError):
        desia.Dataset(schema, [[5, 0]])
    with pytest.raises(ValueError):
        desia.Schema.load(str(FIXTURES / "missing.json"))
    with pytest.raises(ValueError):
        desia.auc([0.1, 0.2], [1, 1])


def test_small_game_is_reproducible():
    schema = desia.Schema.load(str(FIXTURES / "census_schema.json"))
    full = desia.Dataset.generate(schema, 800, seed=4)
    priv, aux = full.split(seed=4)
    queries = desia.marginal_queries(schema, max_way=2)
    kwargs = dict(ratio=0.25, seed=9, targets=15, shadows=100, max_nodes=20000)
    a = desia.run_aia_game(priv, aux, queries, **kwargs)
    b = desia.run_aia_game(priv, aux, queries, workers=2, **kwargs)
    assert a == b
    assert len(a) > 0
    for r in a:
        assert 0.0 <= r["score"] <= 1.0
        if r["deterministic"]:
            assert r["prediction"] == r["truth"]
