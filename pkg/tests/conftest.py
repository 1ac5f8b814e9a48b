import numpy as np
import pytest

import graphwhittle as gw


@pytest.fixture(scope="session")
def chain_host():
    """Normalized 60-rhombus chain; plenty of padding for small windows."""
    return gw.normalize_weights(gw.build_graph("rhombus_chain", k=60))


@pytest.fixture(scope="session")
def grid_host():
    """Normalized 24x24 grid."""
    return gw.normalize_weights(gw.build_graph("grid2d", side=24))


@pytest.fixture(scope="session")
def long_path():
    """Normalized 201-vertex path standing in for the integer line."""
    return gw.normalize_weights(gw.build_graph("path", length=201))


@pytest.fixture(scope="session")
def ar2_family():
    return gw.ar_squared_family()


@pytest.fixture(scope="session")
def chain_measure():
    """Eigen spectral measure of a 800-rhombus chain proxy."""
    proxy = gw.normalize_weights(gw.build_graph("rhombus_chain", k=800))
    return gw.empirical_spectral_measure(proxy, np.arange(proxy.n_vertices))


def dense_power(graph, k):
    """Brute-force dense matrix power oracle."""
    return np.linalg.matrix_power(graph.weights.toarray(), k)
