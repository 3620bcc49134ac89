import math
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from prymeigen.prym import Prototype, build_prototype_surface
from prymeigen.qfield import Vec2
from prymeigen.surface import build_surface

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def torus(u, v, D: int = 1):
    """Flat torus spanned by u, v (counter-clockwise) with one marked point."""
    u = Vec2(*u, D=D) if not isinstance(u, Vec2) else u
    v = Vec2(*v, D=D) if not isinstance(v, Vec2) else v
    return build_surface([[u, v, -u, -v]], [((0, 0), (0, 2)), ((0, 1), (0, 3))], {"O": (0, 0)}, D=D)


def primitive_count(u, v, L2) -> int:
    """Primitive vectors a*u + b*v with squared length <= L2, by brute force."""
    u, v = [Fraction(x) for x in u], [Fraction(x) for x in v]
    area = abs(u[0] * v[1] - u[1] * v[0])
    # |a| <= L * |v| / area and likewise for b
    r = math.isqrt(int(L2 * max(u[0] ** 2 + u[1] ** 2, v[0] ** 2 + v[1] ** 2) / area ** 2) + 1) + 1
    n = 0
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            if math.gcd(a, b) != 1:
                continue
            x, y = a * u[0] + b * v[0], a * u[1] + b * v[1]
            if x * x + y * y <= L2:
                n += 1
    return n


@pytest.fixture(scope="session")
def s111():
    return build_prototype_surface(Prototype(1, 1, 1), Fraction(1, 2))


@pytest.fixture(scope="session")
def s11m1():
    return build_prototype_surface(Prototype(1, 1, -1))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
