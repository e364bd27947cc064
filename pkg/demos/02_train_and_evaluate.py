"""Train a small CNN on synthetic textures and print the metrics table.

Uses the lightest family (plain-cnn) with narrow widths so the demo
finishes in a few seconds; swap in "mini-vgg" or "mini-resnet" and the
default widths for the full-size run.

Run:  python3 demos/02_train_and_evaluate.py
"""

import time

from histoxai.dataset import generate, split
from histoxai.metrics import confusion, metrics_table, score
from histoxai.models import ArchitectureSpec, build, classify, train

data = generate(160, seed=7)
train_set, test_set = split(data, train_fraction=0.8, seed=7)

spec = ArchitectureSpec("plain-cnn", widths=(4, 8, 8), seed=0)
net = build(spec)
print(f"{spec.family} with widths {spec.widths}: {net.num_params()} parameters")

t0 = time.perf_counter()
net, history = train(net, train_set, lr=0.01, epochs=8, batch=16, seed=0)
elapsed = time.perf_counter() - t0
print("loss per epoch:", " ".join(f"{v:.3f}" for v in history.loss))

predicted, _, _ = classify(net, test_set.images)
report = score(confusion(predicted, test_set.labels, positive_class=1))
print()
print(metrics_table([(spec.family, report, elapsed)]))
