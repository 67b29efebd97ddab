"""Walkthrough: train a locality-regularized discriminative dictionary and
classify held-out samples with the fused residual/SVM rule."""

import numpy as np

from locdict import HyperParams, make_blobs, split_per_class, train

# Seeded synthetic benchmark: 3 Gaussian classes in R^20.
ds = make_blobs(classes=3, dim=20, per_class=60, separation=5.0, seed=1)
train_ds, test_ds = split_per_class(ds, train_per_class=30, seed=1)

params = HyperParams(atoms_per_class=10, knn_k=5, max_iters=15, seed=7)
model, trace = train(train_ds, params)

print("objective per sweep (strictly decreasing):")
for i, obj in enumerate(trace.objective_per_iter, start=1):
    print(f"  sweep {i:2d}: {obj:.6f}")
print()

X_test = test_ds.features.values
preds, accuracy, confusion, decisions = model.classify_batch(X_test, test_ds.labels)
print(f"test accuracy: {accuracy:.4f}")
print("confusion matrix (rows = true class):")
print(confusion)
print()

# Look inside one decision: per-class residuals, SVM scores, fused values.
d = decisions[0]
print("first test sample, per-class breakdown:")
for c in range(3):
    print(
        f"  class {c + 1}: residual {d.residuals[c]:8.4f}"
        f"  svm score {d.svm_scores[c]:8.4f}  fused {d.fused[c]:8.4f}"
    )
print(f"  predicted: class {d.predicted_class} (true: {test_ds.labels[0]})")
