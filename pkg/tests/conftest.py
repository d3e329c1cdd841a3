import pytest

from qfreud.context import make_context
from qfreud.ortho import build_polys
from qfreud.rhp import build_parametrix
from qfreud.series import build_series_bundle
from qfreud.specfun import SpecialFunctionSet

# Unit tests run at a lighter tolerance than the acceptance suite; the
# contexts are session-scoped because weight tables, series bundles and
# connection constants dominate the cost and are reusable.


@pytest.fixture(scope="session")
def ctx():
    return make_context("0.5", n_max=16, trunc_tol="1e-30")


@pytest.fixture(scope="session")
def ctx_deep():
    return make_context("0.5", n_max=30, trunc_tol="1e-30")


@pytest.fixture(scope="session")
def funs(ctx):
    return SpecialFunctionSet(ctx)


@pytest.fixture(scope="session")
def bundle(ctx):
    return build_series_bundle(ctx)


@pytest.fixture(scope="session")
def pdata(ctx_deep):
    return build_parametrix(ctx_deep)


@pytest.fixture(scope="session")
def seq16(ctx):
    return build_polys(1, 16, ctx)


@pytest.fixture(scope="session")
def seq30(ctx_deep):
    return build_polys(1, 30, ctx_deep)
