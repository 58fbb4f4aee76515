"""Python bindings for the CLIP graph classifier.

Configurations, schedules and results are plain dicts; graphs, datasets and
models are wrapped C++ objects.
"""

import json as _json

from . import _core
from ._core import ClipError, Dataset, Graph, csl_graph, attribute_groups, apply_coloring

__all__ = [
    "ClipError",
    "Dataset",
    "Graph",
    "Model",
    "ALL_COLORINGS",
    "DEFAULT_CSL_SKIPS",
    "apply_coloring",
    "attribute_groups",
    "coloring_count",
    "configure_for",
    "cross_validate",
    "csl_graph",
    "enumerate_colorings",
    "gen_csl",
    "gen_property",
    "gradcheck",
    "load_tu",
    "oracle_label",
    "sample_colorings",
    "save_tu",
    "stratified_folds",
    "train",
]

ALL_COLORINGS = -1
DEFAULT_CSL_SKIPS = list(_core.DEFAULT_CSL_SKIPS)
ENUMERATION_CAP = 10_000


def _dump(d):
    return _json.dumps(d or {})


class Model:
    """Trained or freshly initialized CLIP model."""

    def __init__(self, core):
        self._core = core

    @classmethod
    def init(cls, config, seed=0):
        return cls(_core.Model.init(_dump(config), seed))

    @classmethod
    def from_dict(cls, d):
        return cls(_core.Model.from_json(_json.dumps(d)))

    @classmethod
    def load(cls, path):
        return cls(_core.Model.load(str(path)))

    def to_dict(self):
        return _json.loads(self._core.to_json())

    def save(self, path):
        self._core.save(str(path))

    @property
    def config(self):
        return _json.loads(self._core.config_json())

    @property
    def parameter_count(self):
        return self._core.parameter_count

    def forward(self, graph, colorings=()):
        """Logits for `graph` under the given colorings (ignored when k = 0)."""
        return self._core.forward(graph, [list(c) for c in colorings])

    def predict_logits(self, graph, eval_samples=1, seed=0):
        return self._core.predict_logits(graph, eval_samples, seed)

    def predict(self, graph, eval_samples=1, seed=0):
        return self._core.predict(graph, eval_samples, seed)

    def __eq__(self, other):
        return isinstance(other, Model) and self._core == other._core


def configure_for(config, dataset):
    """Fills attribute width, class count and color width from `dataset`."""
    return _json.loads(_core.configure_for(_dump(config), dataset))


def coloring_count(graph):
    return int(_core.coloring_count(graph))


def enumerate_colorings(graph, cap=ENUMERATION_CAP):
    return _core.enumerate_colorings(graph, cap)


def sample_colorings(graph, k, seed=0):
    return _core.sample_colorings(graph, k, seed)


def gen_property(task, seed, per_class=500):
    """Synthetic connectivity, bipartiteness or triangle-free dataset."""
    return _core.gen_property(task, seed, per_class)


def gen_csl(seed, skips=None, copies=15):
    return _core.gen_csl(list(skips or DEFAULT_CSL_SKIPS), copies, seed)


def oracle_label(task, graph):
    return _core.oracle_label(task, graph)


def load_tu(root, name=""):
    return _core.load_tu(str(root), name)


def save_tu(dataset, root, name, node_labels=True):
    _core.save_tu(dataset, str(root), name, node_labels)


def stratified_folds(dataset, folds=10, seed=0):
    return _core.stratified_folds(dataset, folds, seed)


def train(config, dataset, train_idx, eval_idx, schedule=None, seed=0):
    """Returns (Model, history dict)."""
    core, history = _core.train(_dump(config), _dump(schedule), dataset,
                                list(train_idx), list(eval_idx), seed)
    return Model(core), _json.loads(history)


def cross_validate(config, dataset, schedule=None, seed=0, folds=10, threads=None):
    if threads is None:
        threads = _core.default_thread_count()
    return _json.loads(_core.cross_validate(_dump(config), _dump(schedule), dataset,
                                            seed, folds, threads))


def gradcheck(configs=100, seed=1, activation="tanh"):
    return _json.loads(_core.gradcheck(configs, seed, activation))
