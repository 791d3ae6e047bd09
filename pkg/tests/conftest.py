import pytest

from sl2genus.core import lower_u, make_ctx, upper_u
from sl2genus.groups import enumerate_group
from sl2genus.subgroups import all_subgroups


@pytest.fixture(scope="session")
def sl2_mod9_subgroups():
    """Every subgroup of SL2(Z/9Z), as code frozensets (456 of them)."""
    ctx = make_ctx(3, 2)
    g = enumerate_group(ctx)
    return ctx, all_subgroups(g, conjugacy_gens=[upper_u(ctx), lower_u(ctx)])


@pytest.fixture(scope="session")
def sl2_mod4_subgroups():
    ctx = make_ctx(2, 2)
    g = enumerate_group(ctx)
    return ctx, all_subgroups(g, conjugacy_gens=[upper_u(ctx), lower_u(ctx)])
