import numpy as np
import pytest

from fracsurf.lifts import RadialLift, SixPatchLift
from fracsurf.mesh import build_initial_sphere_mesh, refine_uniform


@pytest.fixture(scope="session")
def radial_lift():
    return RadialLift()


@pytest.fixture(scope="session")
def six_patch_lift():
    return SixPatchLift()


@pytest.fixture(scope="session")
def cube_chain(radial_lift):
    """Cube-sphere meshes, levels 0..5, refined with the radial lift."""
    chain = [build_initial_sphere_mesh("cube")]
    for _ in range(5):
        chain.append(refine_uniform(chain[-1], radial_lift))
    return chain


@pytest.fixture(scope="session")
def ico_chain(radial_lift):
    """Icosahedral sphere meshes, levels 0..4."""
    chain = [build_initial_sphere_mesh("ico")]
    for _ in range(4):
        chain.append(refine_uniform(chain[-1], radial_lift))
    return chain


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
