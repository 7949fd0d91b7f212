import numpy as np
import pytest

from brinkflow import geometry


def circle_markers(m, radius=1.0, center=(0.0, 0.0)):
    th = np.arange(m) * (2.0 * np.pi / m)
    return np.column_stack([center[0] + radius * np.cos(th),
                            center[1] + radius * np.sin(th)])


def flower_markers(m, amp=0.1, lobes=6, reparam=True):
    th = np.arange(m) * (2.0 * np.pi / m)
    r = 1.0 + amp * np.cos(lobes * th)
    curve = geometry.build_curve(np.column_stack([r * np.cos(th), r * np.sin(th)]))
    if reparam:
        curve = geometry.reparametrize_by_arclength(curve)
    return curve.markers


@pytest.fixture(scope="session")
def unit_circle_64():
    return geometry.build_curve(circle_markers(64))
