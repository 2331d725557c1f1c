import numpy as np
import pytest

from fliu.basis import from_design


def random_bundle(rng, n, m, penalty="diag"):
    """Raw bundle with an intercept column, random design and a PSD penalty."""
    z = rng.standard_normal((n, m))
    zt = np.hstack([np.ones((n, 1)), z])
    if penalty == "diag":
        r = np.diag(np.linspace(0.0, 1.0, m))
    elif penalty == "psd":
        a = rng.standard_normal((m, m))
        r = a @ a.T
        r /= np.linalg.norm(r, 2)
    else:
        r = np.zeros((m, m))
    return from_design(zt, penalty=r)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
