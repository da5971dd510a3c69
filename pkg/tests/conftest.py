"""Pytest configuration and fixtures for pyresgen tests."""

import numpy as np
import pytest

from pyresgen.core.distflow import cigre_residential, compile_network
from pyresgen.models.grid import Branch, DgUnit, Partition, RadialGrid
from pyresgen.models.network import Interconnection, Subsystem


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(20240101)


@pytest.fixture
def cigre():
    """Bundled CIGRE residential grid and its partition."""
    return cigre_residential()


@pytest.fixture
def cigre_network(cigre):
    """Compiled per-unit CIGRE network."""
    grid, partition = cigre
    return compile_network(grid, partition)


@pytest.fixture
def toy_network():
    """Two scalar subsystems with one attack channel each, coupled both ways.

    Returns:
        Tuple of (subsystems, interconnection)
    """
    sub1 = Subsystem.from_blocks(
        name="toy1", A=[[-1.0]], B=[[1.0]], U=[[0.5]], X=[[1.0]], C=[[1.0]], E=[[1.0]]
    )
    sub2 = Subsystem.from_blocks(
        name="toy2", A=[[-2.0]], B=[[1.0]], U=[[0.5]], X=[[1.0]], C=[[1.0]], E=[[1.0]]
    )
    subs = [sub1, sub2]
    L = Interconnection.for_subsystems(subs, np.array([[0.0, 1.0], [1.0, 0.0]]))
    return subs, L


@pytest.fixture
def random_grid():
    """Factory for random radial grids with a DG unit on every other bus.

    Returns:
        Callable (num_buses, seed) -> (RadialGrid, Partition) with one group
    """

    def make(num_buses: int = 6, seed: int = 0):
        gen = np.random.default_rng(seed)
        buses = [f"B{k}" for k in range(num_buses)]
        branches = []
        for k in range(1, num_buses):
            parent = buses[int(gen.integers(0, k))]
            branches.append(
                Branch(parent, buses[k], float(gen.uniform(0.01, 0.1)), float(gen.uniform(0.01, 0.1)))
            )
        dg = [
            DgUnit(
                bus=b,
                t_s=float(gen.uniform(0.5, 3.0)),
                k=float(gen.uniform(0.5, 3.0)),
                p_g_w=float(gen.uniform(1000, 5000)),
                p_c_w=float(gen.uniform(1000, 5000)),
                q_c_var=float(gen.uniform(100, 800)),
            )
            for b in buses[1::2]
        ]
        grid = RadialGrid(
            buses=tuple(buses), branches=tuple(branches), dg=tuple(dg), v0_volts=400.0
        )
        return grid, Partition(groups=(tuple(buses[1:]),))

    return make
