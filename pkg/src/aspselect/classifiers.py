"""Binary solver-selection classifiers.

Two in-repo learners over the ten-dimensional feature vectors: a linear
SVM trained by deterministic full-batch subgradient descent on the
L2-regularized hinge loss, and a bagged decision-tree forest.  Both are
seeded end to end so retraining reproduces the same model.  The persisted
model file layout is documented in docs/model-format.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import LabeledInstance
from .features import FeatureVector

SVM_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
FOREST_GRID = tuple((n, d) for n in (50, 100) for d in (4, 8, 16))
SVM_EPOCHS = 200

MODEL_MAGIC = "aspselect-model 1"


class TrainingError(ValueError):
    pass


# --- standardization ------------------------------------------------------

@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    stdev: np.ndarray
    constant: np.ndarray  # bool mask; constant features map to 0

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        mean = x.mean(axis=0)
        stdev = x.std(axis=0)
        constant = stdev == 0.0
        return cls(mean=mean, stdev=np.where(constant, 1.0, stdev),
                   constant=constant)

    def transform(self, x: np.ndarray) -> np.ndarray:
        z = (x - self.mean) / self.stdev
        return np.where(self.constant, 0.0, z)


# --- linear SVM -----------------------------------------------------------

@dataclass(frozen=True)
class LinearSvmModel:
    weights: np.ndarray          # 10 components
    bias: float
    reg_c: float
    label_order: tuple[str, str]  # positive-sign label first

    def decision_value(self, z: np.ndarray) -> float:
        return float(self.weights @ z + self.bias)


def hinge_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray,
                    c: float) -> float:
    margins = y * (x @ w + b)
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - margins).sum())


def hinge_subgradient(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray,
                      c: float) -> tuple[np.ndarray, float]:
    """Subgradient of the objective; equals the gradient away from kinks."""
    margins = y * (x @ w + b)
    viol = margins < 1.0
    gw = w - c * (y[viol] @ x[viol])
    gb = -c * float(y[viol].sum())
    return gw, gb


def fit_linear_svm(x: np.ndarray, y: np.ndarray, c: float,
                   epochs: int = SVM_EPOCHS) -> tuple[np.ndarray, float, list[float]]:
    """Full-batch subgradient descent with step 1/(lam*t) on the
    lam-scaled objective, returning the averaged iterate and the
    per-epoch objective trace of the running average."""
    n, k = x.shape
    lam = 1.0 / (c * n)
    w = np.zeros(k)
    b = 0.0
    w_avg = np.zeros(k)
    b_avg = 0.0
    trace: list[float] = []
    for t in range(1, epochs + 1):
        margins = y * (x @ w + b)
        viol = margins < 1.0
        gw = lam * w - (y[viol] @ x[viol]) / n
        gb = -float(y[viol].sum()) / n
        eta = 1.0 / (lam * t)
        w = w - eta * gw
        b = b - eta * gb
        w_avg += (w - w_avg) / t
        b_avg += (b - b_avg) / t
        trace.append(hinge_objective(w_avg, b_avg, x, y, c))
    return w_avg, b_avg, trace


def _design_matrix(data: Sequence[LabeledInstance]) -> np.ndarray:
    x = np.array([inst.features.as_array() for inst in data])
    if not np.isfinite(x).all():
        bad = [inst.instance_id for inst, row in zip(data, x)
               if not np.isfinite(row).all()]
        raise TrainingError(f"non-finite features for instances {bad}")
    return x

def _signs(data: Sequence[LabeledInstance],
           label_order: tuple[str, str]) -> np.ndarray:
    return np.array([1.0 if inst.label == label_order[0] else -1.0
                     for inst in data])


def _label_order(train: Sequence[LabeledInstance]) -> tuple[str, str]:
    labels = sorted({inst.label for inst in train})
    if len(labels) != 2:
        raise TrainingError(
            f"need exactly 2 labels in the training set, got {labels}")
    return (labels[0], labels[1])


def train_svm(
    train: Sequence[LabeledInstance],
    valid: Sequence[LabeledInstance],
    grid: Sequence[float] = SVM_C_GRID,
    epochs: int = SVM_EPOCHS,
) -> tuple[Standardizer, LinearSvmModel]:
    """Fit one SVM per grid point and keep the best macro-F1 on valid."""
    label_order = _label_order(train)
    scaler = Standardizer.fit(_design_matrix(train))
    xt = scaler.transform(_design_matrix(train))
    yt = _signs(train, label_order)

    best: tuple[float, float, LinearSvmModel] | None = None
    for c in grid:
        w, b, _ = fit_linear_svm(xt, yt, c, epochs)
        model = LinearSvmModel(weights=w, bias=b, reg_c=c,
                               label_order=label_order)
        report = evaluate(model, scaler, valid)
        key = (-report.f1, c)
        if best is None or key < (best[0], best[1]):
            best = (key[0], key[1], model)
    assert best is not None
    return scaler, best[2]


# --- random forest --------------------------------------------------------

@dataclass(frozen=True)
class TreeNode:
    feature: int = -1           # -1 marks a leaf
    threshold: float = 0.0
    left: int = -1              # child indices into the node list
    right: int = -1
    label: int = 0              # leaf: index into label_order


@dataclass(frozen=True)
class RandomForestModel:
    trees: tuple[tuple[TreeNode, ...], ...]
    tree_count: int
    max_depth: int
    features_per_split: int
    seed: int
    label_order: tuple[str, str]

    def votes(self, z: np.ndarray) -> np.ndarray:
        counts = np.zeros(2, dtype=int)
        for tree in self.trees:
            node = tree[0]
            while node.feature >= 0:
                node = tree[node.left if z[node.feature] <= node.threshold
                            else node.right]
            counts[node.label] += 1
        return counts


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - (p * p).sum())


def _grow_tree(x: np.ndarray, y: np.ndarray, max_depth: int, n_feats: int,
               rng: np.random.Generator) -> tuple[TreeNode, ...]:
    nodes: list[TreeNode] = []

    def majority(idx: np.ndarray) -> int:
        c0 = int((y[idx] == 0).sum())
        c1 = len(idx) - c0
        return 0 if c0 >= c1 else 1

    def build(idx: np.ndarray, depth: int) -> int:
        counts = np.array([(y[idx] == 0).sum(), (y[idx] == 1).sum()])
        my = nodes.__len__()
        if depth >= max_depth or counts.min() == 0:
            nodes.append(TreeNode(label=majority(idx)))
            return my
        feats = rng.choice(x.shape[1], size=n_feats, replace=False)
        best = None  # (impurity, feature, threshold, left_idx, right_idx)
        parent_gini = _gini(counts)
        for f in feats:
            values = np.unique(x[idx, f])
            if len(values) < 2:
                continue
            for thr in (values[:-1] + values[1:]) / 2.0:
                mask = x[idx, f] <= thr
                li, ri = idx[mask], idx[~mask]
                lg = _gini(np.array([(y[li] == 0).sum(), (y[li] == 1).sum()]))
                rg = _gini(np.array([(y[ri] == 0).sum(), (y[ri] == 1).sum()]))
                imp = (len(li) * lg + len(ri) * rg) / len(idx)
                if best is None or imp < best[0] - 1e-12:
                    best = (imp, int(f), float(thr), li, ri)
        if best is None or best[0] >= parent_gini - 1e-12:
            nodes.append(TreeNode(label=majority(idx)))
            return my
        nodes.append(TreeNode())  # placeholder, filled after children exist
        left = build(best[3], depth + 1)
        right = build(best[4], depth + 1)
        nodes[my] = TreeNode(feature=best[1], threshold=best[2],
                             left=left, right=right)
        return my

    build(np.arange(len(y)), 0)
    return tuple(nodes)


def fit_forest(x: np.ndarray, y: np.ndarray, label_order: tuple[str, str],
               tree_count: int, max_depth: int, seed: int) -> RandomForestModel:
    n, k = x.shape
    n_feats = max(1, int(np.sqrt(k)))
    trees = []
    for i in range(tree_count):
        rng = np.random.default_rng((seed, i))
        boot = rng.integers(0, n, size=n)
        trees.append(_grow_tree(x[boot], y[boot], max_depth, n_feats, rng))
    return RandomForestModel(trees=tuple(trees), tree_count=tree_count,
                             max_depth=max_depth, features_per_split=n_feats,
                             seed=seed, label_order=label_order)


def train_forest(
    train: Sequence[LabeledInstance],
    valid: Sequence[LabeledInstance],
    grid: Sequence[tuple[int, int]] = FOREST_GRID,
    seed: int = 0,
) -> tuple[Standardizer, RandomForestModel]:
    labels = sorted({inst.label for inst in train})
    if len(labels) == 1:
        # degenerate but well-defined: a single-leaf forest
        label_order = (labels[0], labels[0])
    elif len(labels) == 2:
        label_order = (labels[0], labels[1])
    else:
        raise TrainingError(f"need at most 2 labels, got {labels}")
    scaler = Standardizer.fit(_design_matrix(train))
    xt = scaler.transform(_design_matrix(train))
    yt = np.array([label_order.index(inst.label) for inst in train])

    best = None
    for tree_count, max_depth in grid:
        model = fit_forest(xt, yt, label_order, tree_count, max_depth, seed)
        report = evaluate(model, scaler, valid) if valid else None
        f1 = report.f1 if report else 1.0
        key = (-f1, tree_count, max_depth)
        if best is None or key < best[0]:
            best = (key, model)
    assert best is not None
    return scaler, best[1]


# --- prediction and evaluation --------------------------------------------

Model = LinearSvmModel | RandomForestModel


def predict(model: Model, scaler: Standardizer, fv: FeatureVector) -> str:
    x = fv.as_array()
    if not np.isfinite(x).all():
        raise ValueError("non-finite feature vector")
    z = scaler.transform(x)
    if isinstance(model, LinearSvmModel):
        # decision value 0 breaks toward the first label
        return model.label_order[0 if model.decision_value(z) >= 0 else 1]
    counts = model.votes(z)
    return model.label_order[0 if counts[0] >= counts[1] else 1]


@dataclass(frozen=True)
class EvalReport:
    labels: tuple[str, str]
    confusion: dict[tuple[str, str], int]  # (true, predicted) -> count
    per_class_precision: dict[str, float]
    per_class_recall: dict[str, float]
    precision: float   # macro average
    recall: float
    f1: float

    def lines(self) -> list[str]:
        out = [f"labels: {self.labels[0]} {self.labels[1]}"]
        for t in self.labels:
            row = " ".join(str(self.confusion[(t, p)]) for p in self.labels)
            out.append(f"confusion[{t}]: {row}")
        for lbl in self.labels:
            out.append(f"class {lbl}: precision={self.per_class_precision[lbl]:.4f} "
                       f"recall={self.per_class_recall[lbl]:.4f}")
        out.append(f"macro: precision={self.precision:.4f} "
                   f"recall={self.recall:.4f} f1={self.f1:.4f}")
        return out


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def confusion_report(truth: Sequence[str], predicted: Sequence[str],
                     labels: tuple[str, str]) -> EvalReport:
    uniq = labels if labels[0] != labels[1] else (labels[0],)
    confusion = {(t, p): 0 for t in labels for p in labels}
    for t, p in zip(truth, predicted):
        confusion[(t, p)] += 1
    precisions = {}
    recalls = {}
    for lbl in uniq:
        tp = confusion[(lbl, lbl)]
        predicted_as = sum(confusion[(t, lbl)] for t in uniq)
        actual = sum(confusion[(lbl, p)] for p in uniq)
        precisions[lbl] = tp / predicted_as if predicted_as else 0.0
        recalls[lbl] = tp / actual if actual else 0.0
    macro_p = sum(precisions.values()) / len(uniq)
    macro_r = sum(recalls.values()) / len(uniq)
    return EvalReport(labels=labels, confusion=confusion,
                      per_class_precision=precisions, per_class_recall=recalls,
                      precision=macro_p, recall=macro_r,
                      f1=f1_score(macro_p, macro_r))


def evaluate(model: Model, scaler: Standardizer,
             test: Sequence[LabeledInstance]) -> EvalReport:
    if not test:
        raise ValueError("empty test set")
    truth = [inst.label for inst in test]
    predicted = [predict(model, scaler, inst.features) for inst in test]
    return confusion_report(truth, predicted, model.label_order)


# --- persistence -----------------------------------------------------------

def _fmt_vec(v: np.ndarray) -> str:
    return " ".join(repr(float(x)) for x in v)


def save_model(path: Path | str, scaler: Standardizer, model: Model) -> None:
    lines = [MODEL_MAGIC]
    kind = "svm" if isinstance(model, LinearSvmModel) else "forest"
    lines.append(f"kind {kind}")
    lines.append(f"labels {model.label_order[0]} {model.label_order[1]}")
    lines.append(f"mean {_fmt_vec(scaler.mean)}")
    lines.append(f"stdev {_fmt_vec(scaler.stdev)}")
    lines.append("constant " + " ".join(str(int(c)) for c in scaler.constant))
    if isinstance(model, LinearSvmModel):
        lines.append(f"c {model.reg_c!r}")
        lines.append(f"weights {_fmt_vec(model.weights)}")
        lines.append(f"bias {model.bias!r}")
    else:
        lines.append(f"forest {model.tree_count} {model.max_depth} "
                     f"{model.features_per_split} {model.seed}")
        for tree in model.trees:
            lines.append(f"tree {len(tree)}")
            for node in tree:
                if node.feature < 0:
                    lines.append(f"leaf {node.label}")
                else:
                    lines.append(f"split {node.feature} {node.threshold!r} "
                                 f"{node.left} {node.right}")
    Path(path).write_text("\n".join(lines) + "\n")


class ModelFormatError(ValueError):
    pass


def load_model(path: Path | str) -> tuple[Standardizer, Model]:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise ModelFormatError(f"model file not found: {path}") from None
    lines = text.splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic line)")

    fields: dict[str, list[str]] = {}
    idx = 1
    while idx < len(lines) and not lines[idx].startswith(("forest", "tree")):
        key, _, rest = lines[idx].partition(" ")
        fields[key] = rest.split()
        idx += 1

    kind = fields["kind"][0]
    labels = (fields["labels"][0], fields["labels"][1])
    scaler = Standardizer(
        mean=np.array([float(v) for v in fields["mean"]]),
        stdev=np.array([float(v) for v in fields["stdev"]]),
        constant=np.array([bool(int(v)) for v in fields["constant"]]),
    )
    if kind == "svm":
        model: Model = LinearSvmModel(
            weights=np.array([float(v) for v in fields["weights"]]),
            bias=float(fields["bias"][0]),
            reg_c=float(fields["c"][0]),
            label_order=labels,
        )
        return scaler, model
    if kind != "forest":
        raise ModelFormatError(f"{path}: unknown model kind {kind!r}")

    header = lines[idx].split()
    tree_count, max_depth, n_feats, seed = (int(v) for v in header[1:5])
    idx += 1
    trees = []
    for _ in range(tree_count):
        head = lines[idx].split()
        if head[0] != "tree":
            raise ModelFormatError(f"{path}: expected 'tree' line")
        n_nodes = int(head[1])
        idx += 1
        nodes = []
        for _ in range(n_nodes):
            tok = lines[idx].split()
            idx += 1
            if tok[0] == "leaf":
                nodes.append(TreeNode(label=int(tok[1])))
            else:
                nodes.append(TreeNode(feature=int(tok[1]),
                                      threshold=float(tok[2]),
                                      left=int(tok[3]), right=int(tok[4])))
        trees.append(tuple(nodes))
    return scaler, RandomForestModel(
        trees=tuple(trees), tree_count=tree_count, max_depth=max_depth,
        features_per_split=n_feats, seed=seed, label_order=labels)
