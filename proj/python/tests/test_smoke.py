import itertools
import math
from pathlib import Path

import pytest

import clipnet

FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def triangle_plus_edge():
    return clipnet.Graph([[0.0], [1.0], [0.0], [1.0], [1.0]], [(0, 1), (1, 2), (0, 2), (3, 4)])


def test_graph_roundtrip():
    g = triangle_plus_edge()
    assert g.size == 5
    assert g.edges == [(0, 1), (0, 2), (1, 2), (3, 4)]
    assert g.neighbors(1) == [0, 2]
    h = g.permute([4, 3, 2, 1, 0])
    assert h.edges == [(0, 1), (2, 3), (2, 4), (3, 4)]


def test_invalid_graph_raises():
    with pytest.raises(clipnet.ClipError, match="SelfLoop"):
        clipnet.Graph([[1.0]], [(0, 0)])


def test_coloring_counts():
    g = triangle_plus_edge()
    assert clipnet.attribute_groups(g) == [[0, 2], [1, 3, 4]]
    assert clipnet.coloring_count(g) == math.factorial(2) * math.factorial(3)
    all_colorings = clipnet.enumerate_colorings(g)
    assert len({tuple(c) for c in all_colorings}) == 12
    assert clipnet.coloring_count(clipnet.csl_graph(41, 2)) == math.factorial(41)


def test_zero_clip_cannot_separate_csl():
    config = {"colorings": 0, "color_dim": 0, "num_classes": 10}
    for seed in range(3):
        m = clipnet.Model.init(config, seed)
        assert m.forward(clipnet.csl_graph(41, 2)) == m.forward(clipnet.csl_graph(41, 3))


def test_exhaustive_forward_is_permutation_invariant():
    g = triangle_plus_edge()
    config = {"colorings": clipnet.ALL_COLORINGS, "color_dim": 3, "hops": 2, "hidden": 6}
    m = clipnet.Model.init(config, 3)
    for perm in itertools.islice(itertools.permutations(range(5)), 0, 120, 17):
        h = g.permute(list(perm))
        a = m.forward(g, clipnet.enumerate_colorings(g))
        b = m.forward(h, clipnet.enumerate_colorings(h))
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_generators_agree_with_oracles():
    for task in ["connectivity", "bipartiteness", "triangle-free"]:
        d = clipnet.gen_property(task, 7, per_class=20)
        assert len(d) == 40
        assert all(clipnet.oracle_label(task, g) == y for g, y in zip(d.graphs, d.labels))


def test_tu_roundtrip(tmp_path):
    d = clipnet.load_tu(FIXTURES / "labeled")
    clipnet.save_tu(d, tmp_path, "TINY")
    assert clipnet.load_tu(tmp_path, "TINY") == d


def test_train_and_checkpoint(tmp_path):
    d = clipnet.gen_property("connectivity", 3, per_class=20)
    config = clipnet.configure_for({"colorings": 2, "hops": 2, "hidden": 8}, d)
    folds = clipnet.stratified_folds(d, 4, seed=1)
    train_idx = sorted(set(range(len(d))) - set(folds[0]))
    model, history = clipnet.train(config, d, train_idx, folds[0],
                                   schedule={"epochs": 3, "batch_size": 8}, seed=5)
    assert len(history["eval_curve"]) == 3
    path = tmp_path / "model.json"
    model.save(path)
    assert clipnet.Model.load(path) == model
    assert clipnet.Model.from_dict(model.to_dict()) == model


def test_cross_validate_is_reproducible():
    d = clipnet.gen_property("bipartiteness", 4, per_class=10)
    config = clipnet.configure_for({"colorings": 1, "hops": 1, "hidden": 4}, d)
    schedule = {"epochs": 2, "batch_size": 8}
    a = clipnet.cross_validate(config, d, schedule, seed=2, folds=2, threads=1)
    b = clipnet.cross_validate(config, d, schedule, seed=2, folds=2, threads=2)
    a.pop("seconds"), b.pop("seconds")
    assert a == b
    assert 0.0 <= a["mean"] <= 1.0


def test_gradcheck():
    report = clipnet.gradcheck(configs=5, seed=3)
    assert report["passed"] and report["configs"] == 5
