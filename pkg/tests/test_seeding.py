import numpy as np
import pytest

from netexp.seeding import ROLES, derive_seed, stream


def test_same_inputs_same_stream():
    a = stream(42, "cell", 3, "graph").random(5)
    b = stream(42, "cell", 3, "graph").random(5)
    assert np.array_equal(a, b)


def test_unknown_role():
    with pytest.raises(ValueError):
        derive_seed(1, "cell", 0, "noise")


def test_no_collisions_over_a_million_derivations():
    roles = ("graph", "assignment", "outcome-noise", "truth")
    seeds = {derive_seed(7, "small_world|n=1000", r, role) for r in range(250_000) for role in roles}
    assert len(seeds) == 1_000_000


def test_roles_and_fields_separate_streams():
    base = derive_seed(7, "cell", 0, "graph")
    assert len({derive_seed(7, "cell", 0, role) for role in ROLES}) == len(ROLES)
    assert derive_seed(8, "cell", 0, "graph") != base
    assert derive_seed(7, "cell2", 0, "graph") != base
    assert derive_seed(7, "cell", 1, "graph") != base
