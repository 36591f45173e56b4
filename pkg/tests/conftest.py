import numpy as np
import pytest

from ngfix import GraphIndex, VectorStore

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line for a numbered acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])


def graph_from_lists(points, adj, m_ex=None, entry=None) -> GraphIndex:
    """Index over ``points`` whose base edges are exactly ``adj``."""
    store = VectorStore(np.asarray(points, dtype=np.float32).reshape(len(points), -1))
    G = GraphIndex(store, m_base=max(1, max((len(a) for a in adj), default=1)), m_ex=m_ex)
    for u, vs in enumerate(adj):
        G.set_base_neighbors(u, vs)
    if entry is None:
        G.refresh_entry()
    else:
        G.entry = entry
    return G
