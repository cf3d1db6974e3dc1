"""Tabular ingestion of logit records, JSON model persistence, CSV reports.

Logit CSV format: header ``logit_0,...,logit_{k-1},label,pred``, one sample
per row, UTF-8, ``.`` decimal separator.  Model files are self-describing
JSON documents with an integer ``schema_version``.  All writers are atomic
(temp file + rename).
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .calibration import ClassCalibration, Hyperparams
from .errors import (
    CorruptModelFile,
    EmptyFile,
    IoFailure,
    LabelOutOfRange,
    LengthMismatch,
    MalformedRow,
    PredictionMismatch,
    SchemaVersionMismatch,
)
from .gmm import GaussianComponent, GmmModel
from .model import FittedClass, UncertaintyModel, UnfittedClass

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LogitRecord:
    """One sample: its logit vector, true label and (argmax) prediction."""

    logits: np.ndarray
    true_label: int
    predicted_label: int

    def __post_init__(self):
        logits = np.asarray(self.logits, dtype=float)
        if logits.ndim != 1 or logits.size == 0:
            raise ValueError("logits must be a nonempty 1-D vector")
        if not np.all(np.isfinite(logits)):
            raise ValueError("logits must be finite")
        k = logits.shape[0]
        if not 0 <= self.true_label < k:
            raise LabelOutOfRange(f"true label {self.true_label} outside [0, {k})")
        if not 0 <= self.predicted_label < k:
            raise LabelOutOfRange(
                f"predicted label {self.predicted_label} outside [0, {k})"
            )
        if self.predicted_label != int(np.argmax(logits)):
            raise PredictionMismatch(
                f"stored prediction {self.predicted_label} does not equal "
                f"argmax index {int(np.argmax(logits))}"
            )
        object.__setattr__(self, "logits", logits)

    @property
    def num_classes(self) -> int:
        return self.logits.shape[0]


@dataclass(frozen=True)
class RecordSet:
    records: tuple[LogitRecord, ...]
    num_classes: int

    def __post_init__(self):
        records = tuple(self.records)
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        for r in records:
            if r.num_classes != self.num_classes:
                raise ValueError(
                    f"record with {r.num_classes} logits in a "
                    f"{self.num_classes}-class set"
                )
        object.__setattr__(self, "records", records)

    def __len__(self) -> int:
        return len(self.records)

    def logit_matrix(self) -> np.ndarray:
        if not self.records:
            return np.empty((0, self.num_classes))
        return np.stack([r.logits for r in self.records])


def _expected_header(k: int) -> list[str]:
    return [f"logit_{i}" for i in range(k)] + ["label", "pred"]


def load_logit_records(path) -> RecordSet:
    """Parse a logit CSV; predictions are recomputed and checked."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    rows = [row for row in rows if row]  # tolerate trailing blank lines
    if not rows:
        raise EmptyFile(f"{path} has no header row")
    header = [cell.strip() for cell in rows[0]]
    k = len(header) - 2
    if k < 1 or header != _expected_header(k):
        raise MalformedRow(
            f"{path}: header must be logit_0,...,logit_{{k-1}},label,pred; got {header}"
        )
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != k + 2:
            raise MalformedRow(f"{path}:{lineno}: expected {k + 2} cells, got {len(row)}")
        try:
            logits = np.array([float(cell) for cell in row[:k]])
        except ValueError as exc:
            raise MalformedRow(f"{path}:{lineno}: non-numeric logit: {exc}") from exc
        if not np.all(np.isfinite(logits)):
            raise MalformedRow(f"{path}:{lineno}: non-finite logit value")
        try:
            label = int(row[k])
            pred = int(row[k + 1])
        except ValueError as exc:
            raise MalformedRow(f"{path}:{lineno}: non-integer label/pred: {exc}") from exc
        if not 0 <= label < k:
            raise LabelOutOfRange(f"{path}:{lineno}: label {label} outside [0, {k})")
        if not 0 <= pred < k:
            raise LabelOutOfRange(f"{path}:{lineno}: pred {pred} outside [0, {k})")
        if pred != int(np.argmax(logits)):
            raise PredictionMismatch(
                f"{path}:{lineno}: stored pred {pred} but argmax is "
                f"{int(np.argmax(logits))}"
            )
        records.append(
            LogitRecord(logits=logits, true_label=label, predicted_label=pred)
        )
    return RecordSet(records=tuple(records), num_classes=k)


def save_logit_records(records: RecordSet, path) -> None:
    """Write a RecordSet back to the logit CSV format (full float precision)."""
    lines = [",".join(_expected_header(records.num_classes))]
    for r in records.records:
        cells = [repr(float(v)) for v in r.logits]
        cells += [str(r.true_label), str(r.predicted_label)]
        lines.append(",".join(cells))
    _atomic_write_text(path, "\n".join(lines) + "\n")


# --- model persistence ------------------------------------------------------


def _component_to_json(comp: GaussianComponent) -> dict:
    return {
        "weight": float(comp.weight),
        "mean": comp.mean.tolist(),
        "cholesky": comp.cholesky.tolist(),
    }


def _class_to_json(entry) -> dict:
    if isinstance(entry, UnfittedClass):
        return {"status": "unfitted", "reason": entry.reason}
    cal = entry.calibration
    return {
        "status": "fitted",
        "weights": [float(c.weight) for c in entry.gmm.components],
        "means": [c.mean.tolist() for c in entry.gmm.components],
        "covariance_cholesky": [c.cholesky.tolist() for c in entry.gmm.components],
        "max_log_density": cal.max_log_density,
        "s_q1": cal.s_q1,
        "s_q2": cal.s_q2,
        "c1": cal.c1,
        "c2": cal.c2,
    }


def save_model(model: UncertaintyModel, path) -> None:
    """Persist a model as JSON; floats round-trip exactly via repr."""
    hp = model.hyperparams
    doc = {
        "schema_version": SCHEMA_VERSION,
        "num_classes": model.num_classes,
        "hyperparameters": {"u1": hp.u1, "u2": hp.u2, "q1": hp.q1, "q2": hp.q2},
        "classes": [_class_to_json(e) for e in model.per_class],
    }
    _atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def _class_from_json(block: dict):
    status = block["status"]
    if status == "unfitted":
        return UnfittedClass(reason=str(block["reason"]))
    if status != "fitted":
        raise CorruptModelFile(f"unknown class status {status!r}")
    weights = block["weights"]
    means = block["means"]
    chols = block["covariance_cholesky"]
    if not (len(weights) == len(means) == len(chols)) or not weights:
        raise CorruptModelFile("inconsistent per-class component arrays")
    comps = tuple(
        GaussianComponent(
            weight=float(w),
            mean=np.asarray(m, dtype=float),
            cholesky=np.asarray(L, dtype=float),
        )
        for w, m, L in zip(weights, means, chols)
    )
    gmm = GmmModel(components=comps, dimension=comps[0].dimension)
    cal = ClassCalibration(
        max_log_density=float(block["max_log_density"]),
        s_q1=float(block["s_q1"]),
        s_q2=float(block["s_q2"]),
        c1=float(block["c1"]),
        c2=float(block["c2"]),
    )
    return FittedClass(gmm=gmm, calibration=cal)


def load_model(path) -> UncertaintyModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModelFile(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise CorruptModelFile(f"{path}: missing schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"{path}: schema_version {doc['schema_version']!r}, expected {SCHEMA_VERSION}"
        )
    try:
        hp = Hyperparams(**{k: float(v) for k, v in doc["hyperparameters"].items()})
        classes = tuple(_class_from_json(b) for b in doc["classes"])
        model = UncertaintyModel(
            num_classes=int(doc["num_classes"]), hyperparams=hp, per_class=classes
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelFile(f"{path}: invalid model document: {exc}") from exc
    return model


# --- reports ----------------------------------------------------------------


def write_uncertainty_report(records: RecordSet, uncertainties, path) -> None:
    """CSV with sample_index, predicted_label, uncertainty (12 sig. digits)."""
    u = np.asarray(uncertainties, dtype=float).ravel()
    if u.shape[0] != len(records.records):
        raise LengthMismatch(
            f"{len(records.records)} records but {u.shape[0]} uncertainty values"
        )
    lines = ["sample_index,predicted_label,uncertainty"]
    for i, (rec, val) in enumerate(zip(records.records, u)):
        lines.append(f"{i},{rec.predicted_label},{val:.12g}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_uncertainty_report(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read back a report CSV as (sample_index, predicted_label, uncertainty)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise EmptyFile(f"{path} has no header row")
    if rows[0] != ["sample_index", "predicted_label", "uncertainty"]:
        raise MalformedRow(f"{path}: unexpected report header {rows[0]}")
    idx, labels, uncerts = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            idx.append(int(row[0]))
            labels.append(int(row[1]))
            uncerts.append(float(row[2]))
        except (IndexError, ValueError) as exc:
            raise MalformedRow(f"{path}:{lineno}: bad report row: {exc}") from exc
    return np.array(idx, dtype=int), np.array(labels, dtype=int), np.array(uncerts)


# --- shared writer ----------------------------------------------------------


def _atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
