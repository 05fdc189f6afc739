import numpy as np
import pytest

from koranyi.hgroup import GroupContext, HPoint


@pytest.fixture(scope="session")
def ctx1():
    return GroupContext(1)


@pytest.fixture(scope="session")
def ctx2():
    return GroupContext(2)


def random_points(ctx, n, seed, rho_floor=1e-2):
    """Box-uniform points with the gauge bounded away from the origin."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        row = rng.uniform(-1.0, 1.0, size=2 * ctx.N + 1)
        x, y, phi = row[: ctx.N], row[ctx.N : 2 * ctx.N], float(row[-1])
        if (float(x @ x + y @ y) ** 2 + phi**2) ** 0.25 >= rho_floor:
            pts.append(HPoint(x, y, phi))
    return pts
