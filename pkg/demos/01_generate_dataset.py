"""Generate a small synthetic tissue-texture dataset and look inside it.

Healthy images are pink correlated noise; diseased ones carry 3-8 darker
bluish blob clusters whose union is recorded as a ground-truth mask.
Everything is a pure function of the seed, so the PNG tree written here
is byte-reproducible.

Run:  python3 demos/01_generate_dataset.py
"""

import numpy as np

from histoxai.dataset import generate, mean_intensity_baseline, save_dir, split

data = generate(80, seed=7)
train, test = split(data, train_fraction=0.8, seed=7)

print(f"{len(data)} images: "
      f"{sum(1 for it in data.items if it.label == 0)} healthy, "
      f"{sum(1 for it in data.items if it.label == 1)} diseased")
print(f"split: {len(train)} train / {len(test)} test (stratified)")

areas = [it.blob_mask.mean() for it in data.items if it.label == 1]
print(f"lesion mask area: {min(areas):.1%} .. {max(areas):.1%} of the image "
      f"(mean {np.mean(areas):.1%})")

# the global-brightness shortcut is deliberately weak: a mean-intensity
# threshold fitted on the train split should stay well under 0.75
print(f"mean-intensity threshold baseline: "
      f"{mean_intensity_baseline(train, test):.3f} test accuracy")

out = "demo_output/dataset"
save_dir(data, out)
print(f"wrote PNG tree under {out}/ (healthy/, diseased/, masks/)")
