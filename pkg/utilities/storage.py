from collections import Counter
from typing import List, Optional

import numpy as np

from utilities.collections import is_empty


class SampleStorage:
    """
    Running per-pixel mean and sum of squared deviations (Welford) for retained samples, plus the
    optional raw samples and forest frequencies.
    """

    def __init__(self, n_pixels: int, keep_samples: bool = False):
        self.count = 0
        self.mean = np.zeros(n_pixels)
        self.m2 = np.zeros(n_pixels)
        self.keep_samples = keep_samples
        self._samples: List[np.ndarray] = []
        self.forest_counts = Counter()

    @property
    def samples(self) -> List[np.ndarray]:
        return self._samples if self.keep_samples else []

    def add(self, image: np.ndarray, forest_key: Optional[tuple] = None):
        image = np.asarray(image, dtype=np.float64).reshape(-1)
        self.count += 1
        delta = image - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (image - self.mean)
        if self.keep_samples:
            self._samples.append(image.astype(np.float32))
        if forest_key is not None:
            self.forest_counts[forest_key] += 1

    @property
    def variance(self) -> np.ndarray:
        if self.count < 2:
            return np.zeros_like(self.mean)
        return self.m2 / (self.count - 1)

    @staticmethod
    def merge(parts: list) -> "SampleStorage":
        """Chan's parallel combination, applied in list order."""
        if is_empty(parts):
            raise ValueError("nothing to merge")
        merged = SampleStorage(parts[0].mean.size, keep_samples=any(p.keep_samples for p in parts))
        for part in parts:
            if part.count == 0:
                continue
            total = merged.count + part.count
            delta = part.mean - merged.mean
            merged.mean = merged.mean + delta * part.count / total
            merged.m2 = merged.m2 + part.m2 + delta ** 2 * merged.count * part.count / total
            merged.count = total
            merged._samples.extend(part.samples)
            merged.forest_counts.update(part.forest_counts)
        return merged
