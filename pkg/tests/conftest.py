"""Shared helpers: small worlds and synthetic angular supports."""

import numpy as np
import pytest

from cellpilot import (
    AoAInterval,
    ScenarioBundle,
    SystemConfig,
    build_layout,
    drop_users,
)


def small_config(L=2, K=2, M=16, **kw):
    kw.setdefault("scatter_radius", 30.0)
    kw.setdefault("exclusion_radius", 100.0)
    return SystemConfig(L=L, K=K, M=M, **kw)


def make_world(config: SystemConfig, seed: int) -> ScenarioBundle:
    rng = np.random.default_rng(seed)
    layout = build_layout(config.L, config.R)
    drop = drop_users(layout, config.K, config.exclusion_radius, rng)
    return ScenarioBundle.build(config, layout, drop)


def random_interval(rng, min_width=0.02, max_width=0.4) -> AoAInterval:
    center = rng.uniform(-np.pi, np.pi)
    half = 0.5 * rng.uniform(min_width, max_width)
    return AoAInterval(center=center, half_width=half)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
