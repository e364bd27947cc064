"""Ask a trained classifier WHERE it sees disease, and check the answer.

Grad-CAM backprops the diseased-class logit to the last conv layer,
weights the feature maps by their globally averaged gradients, and
renders the rectified sum as a heatmap. Because the generator records a
ground-truth lesion mask per diseased image, the heatmap's quality is a
number here, not an eyeballed judgement: the localization score is the
fraction of heatmap mass inside the mask.

Run:  python3 demos/03_gradcam_explanations.py
"""

import os

import numpy as np

from histoxai.dataset import generate, split, write_png
from histoxai.gradcam import gradcam_compute, localization_score, overlay
from histoxai.models import ArchitectureSpec, build, train

data = generate(160, seed=7)
train_set, test_set = split(data, train_fraction=0.8, seed=7)
net = build(ArchitectureSpec("plain-cnn", widths=(4, 8, 8), seed=0))
net, _ = train(net, train_set, lr=0.01, epochs=8, batch=16, seed=0)

out = "demo_output/heatmaps"
os.makedirs(out, exist_ok=True)

diseased = [it for it in test_set.items if it.label == 1][:6]
scores, areas = [], []
for item in diseased:
    hm = gradcam_compute(net, item.image, target_class=1)
    res = localization_score(hm, item.blob_mask)
    scores.append(res.score)
    areas.append(item.blob_mask.mean())
    write_png(os.path.join(out, f"{item.name}.gradcam.1.png"),
              overlay(hm, item.image, alpha=0.4).transpose(2, 0, 1) / 255.0)
    print(f"{item.name}: {res.score:.2f} of heatmap mass inside the lesion "
          f"mask (mask covers {item.blob_mask.mean():.1%} of the image)")

print(f"\nmean localization {np.mean(scores):.2f} vs mask area fraction "
      f"{np.mean(areas):.2f} -- a focused heatmap beats the area fraction")
print(f"overlays written to {out}/")
