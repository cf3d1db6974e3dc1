#!/usr/bin/env python3
"""End-to-end walkthrough: synthesize classifier logits, fit the per-class
mixture model, and score new samples.

The synthetic "classifier" emits 2-D logits: class 0 clusters around
(4, 0), class 1 around (0, 4).  Out-of-distribution inputs are drawn far
from both clusters, so a good uncertainty measure should push them
toward 1.
"""

import os

import numpy as np

from logit_uncertainty import (
    FitConfig,
    Hyperparams,
    LogitRecord,
    RecordSet,
    batch_predict,
    fit_uncertainty_model,
    load_model,
    predict,
    save_logit_records,
    save_model,
    write_uncertainty_report,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

rng = np.random.default_rng(7)
MEANS = np.array([[4.0, 0.0], [0.0, 4.0]])


def draw_records(n_per_class, seed):
    r = np.random.default_rng(seed)
    records = []
    for i, mean in enumerate(MEANS):
        draws = r.normal(mean, 1.0, size=(n_per_class, 2))
        for x in draws:
            records.append(
                LogitRecord(logits=x, true_label=i, predicted_label=int(np.argmax(x)))
            )
    return RecordSet(records=tuple(records), num_classes=2)


# --- fit ---------------------------------------------------------------

train = draw_records(1000, seed=1)
correct = sum(r.true_label == r.predicted_label for r in train.records)
print(f"training records: {len(train)} ({correct} correctly predicted)")

save_logit_records(train, os.path.join(OUT, "train.csv"))

hp = Hyperparams(u1=0.5, u2=0.2, q1=0.8, q2=0.6)
model = fit_uncertainty_model(train, hp, FitConfig(seed=3), c_max=3)
for i, entry in enumerate(model.per_class):
    print(f"class {i}: {entry.gmm.num_components} component(s), "
          f"score quantiles ({entry.calibration.s_q2:.3f}, {entry.calibration.s_q1:.3f})")

# --- score fresh data --------------------------------------------------

test = draw_records(500, seed=2)
u_test = batch_predict(model, test)
truth = np.array([r.true_label for r in test.records])
preds = np.array([r.predicted_label for r in test.records])

print("\nmean uncertainty on fresh draws:")
print(f"  correct predictions:   {u_test[preds == truth].mean():.3f}")
if np.any(preds != truth):
    print(f"  incorrect predictions: {u_test[preds != truth].mean():.3f}")

# probes from typical to far off-distribution
for x in ([4.2, 0.3], [4.0, 2.0], [10.0, 9.0], [-30.0, 2.0]):
    cls, u = predict(model, np.array(x))
    print(f"  logits {x} -> class {cls}, u = {u:.4f}")

# --- persistence + report ----------------------------------------------

model_path = os.path.join(OUT, "model.json")
save_model(model, model_path)
reloaded = load_model(model_path)
assert np.array_equal(batch_predict(reloaded, test), u_test)
print(f"\nmodel round-trips exactly through {model_path}")

report_path = os.path.join(OUT, "report.csv")
write_uncertainty_report(test, u_test, report_path)
print(f"wrote {report_path}")
