import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats

BANDWIDTH_FLOOR = 1e-3
GRID_MIN_POINTS = 256
GRID_MAX_POINTS = 4096


def emd_1d(samples_a: ArrayLike, samples_b: ArrayLike) -> float:
    """Wasserstein-1 distance between two 1-D empirical distributions (sizes may differ)."""
    a = np.asarray(samples_a, dtype=np.float64).reshape(-1)
    b = np.asarray(samples_b, dtype=np.float64).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise ValueError("EMD needs two non-empty sample sets")
    return float(stats.wasserstein_distance(a, b))


def scott_bandwidth(samples: ArrayLike) -> float:
    """
    Scott's rule ``sigma * n^(-1/5)`` with the sample std (ddof=1).

    Floored at ``BANDWIDTH_FLOOR`` so constant samples still get a usable kernel.
    """
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValueError("Bandwidth of an empty sample set is undefined")
    sigma = x.std(ddof=1) if x.size > 1 else 0.0
    return float(max(sigma * x.size ** (-0.2), BANDWIDTH_FLOOR))


def kde_gaussian(samples: ArrayLike, grid: ArrayLike, bandwidth: float = None) -> NDArray[np.float64]:
    """
    Gaussian kernel density estimate evaluated on ``grid``.

    Args:
        samples: 1-D samples
        grid: Evaluation points
        bandwidth: Kernel std; Scott's rule when omitted

    Returns:
        Density values, one per grid point
    """
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValueError("KDE needs at least one sample")
    h = scott_bandwidth(x) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise ValueError(f"Bandwidth must be positive, got {h}")
    grid = np.asarray(grid, dtype=np.float64).reshape(-1)
    return stats.norm.pdf((grid[:, None] - x[None, :]) / h).mean(axis=1) / h


def kde_grid(low: float, high: float, bandwidth: float) -> NDArray[np.float64]:
    """Grid from ``low - 3h`` to ``high + 3h`` with spacing at most ``h / 4`` (within point limits)."""
    start, stop = low - 3.0 * bandwidth, high + 3.0 * bandwidth
    points = int(np.ceil((stop - start) / (bandwidth / 4.0))) + 1
    return np.linspace(start, stop, int(np.clip(points, GRID_MIN_POINTS, GRID_MAX_POINTS)))
