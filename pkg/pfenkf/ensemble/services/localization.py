from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist


@dataclass(frozen=True)
class LocalizationSpec:
    length: float
    family: str = 'squared_exponential'

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("localization length must be positive")
        if self.family != 'squared_exponential':
            raise ValueError(f"unknown taper family '{self.family}'")

    def taper(self, locations_a, locations_b):
        return localization_taper(locations_a, locations_b, self.length)


def localization_taper(locations_a, locations_b, length):
    """Squared-exponential correlation weights between two point sets."""
    a = np.asarray(locations_a, dtype=float)
    b = np.asarray(locations_b, dtype=float)
    a = a.reshape(len(a), -1)
    b = b.reshape(len(b), -1)
    return np.exp(-cdist(a, b, 'sqeuclidean') / (2.0 * length ** 2))
