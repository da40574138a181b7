import numpy as np
from tempseg.core import LogitMap, LabelMap, CategoryTable


def random_logits(rng, height=8, width=8, channels=3, scale=3.0):
    return LogitMap((scale * rng.standard_normal((height, width, channels))).astype(np.float32))


def dyadic_logits(rng, height=8, width=8, channels=3):
    """Logits that are multiples of 1/8, so that adding an integer is exact in 32-bit floats"""
    return LogitMap(rng.integers(-64, 64, size=(height, width, channels)).astype(np.float32) / 8)


def random_labels(rng, height=8, width=8, num_categories=3):
    return LabelMap(rng.integers(0, num_categories, size=(height, width)), num_categories=num_categories)


def label_map(rows, num_categories=None):
    return LabelMap(np.array(rows, dtype=np.uint8), num_categories=num_categories)


def all_targets(num_categories):
    return CategoryTable([(i, 'class_{}'.format(i), True) for i in range(num_categories)])
