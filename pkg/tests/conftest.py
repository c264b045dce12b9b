import numpy as np
import pytest

from kakint import cartan_frame, make_family

# family/size pairs exercised by the golden tables and structure suites
TABLE_FAMILIES = [
    ("GL-real", 2), ("GL-real", 3), ("GL-real", 4),
    ("SL-real", 2), ("SL-real", 3),
    ("GL-complex-as-real", 2), ("GL-complex-as-real", 3),
    ("LorentzSO0", 2), ("LorentzSO0", 3), ("LorentzSO0", 4),
]

SMALL_FAMILIES = [
    ("GL-real", 2), ("GL-real", 3), ("SL-real", 2), ("SL-real", 3),
    ("GL-complex-as-real", 2), ("LorentzSO0", 2), ("LorentzSO0", 3),
]

_CACHE = {}


def lie_data(tag, n):
    """Cached (family, frame, rootsystem) triple."""
    key = (tag, n)
    if key not in _CACHE:
        family = make_family(tag, n)
        frame, system = cartan_frame(family)
        _CACHE[key] = (family, frame, system)
    return _CACHE[key]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
