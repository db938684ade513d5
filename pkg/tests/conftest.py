import pytest

from netloc import normalize
from netloc.evalkit import generators
from netloc.graph import Side

# criterion number -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE_RESULTS = {}


def renamed_copy(g_text_or_fn, names, suffix="_changed"):
    """SYNTH-side copy of a fixture with ``names`` renamed (ids unchanged)."""
    g = g_text_or_fn(Side.SYNTH)
    for name in names:
        g.nets[g.name_index[name]].raw_name = name + suffix
    return normalize.normalize_graph(g)


@pytest.fixture
def f1():
    return generators.f1()


@pytest.fixture
def p2():
    return generators.p2()


@pytest.fixture(params=["python", "cython"])
def backend(request):
    if request.param == "cython":
        pytest.importorskip("netloc._kernels._ckernels")
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
