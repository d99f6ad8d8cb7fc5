"""Session-wide fixtures for the acceptance suite, plus its summary hook.

The bundled dataset graph and the embedding tables trained on it are
expensive, so they are built once per session and shared across every
criterion. Criterion outcomes funnel through the ``criterion`` fixture
and come out as one PASS/FAIL line each at the end of the run.
"""

import time

import pytest

from mskg.embedding import (
    EmbeddingConfig,
    build_projection,
    generate_walks,
    train_graphsage,
    train_skipgram,
)
from mskg.synthetic import build_graph

CRITERIA: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    CRITERIA.append((name, passed, detail))


@pytest.fixture(scope="session")
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in CRITERIA:
        verdict = "PASS" if passed else "FAIL"
        suffix = f" -- {detail}" if detail else ""
        terminalreporter.write_line(f"{verdict}  {name}{suffix}")


@pytest.fixture(scope="session")
def published_graph():
    return build_graph()


@pytest.fixture(scope="session")
def dataset_path(published_graph, tmp_path_factory):
    from mskg.dataset import export_graph

    path = tmp_path_factory.mktemp("dataset") / "mskg.jsonl"
    path.write_bytes(export_graph(published_graph))
    return path


class EmbeddingBank:
    """Per-(method, seed) cache of embedding tables over one graph.

    Every dataset-contingent criterion trains with the same frozen
    config so the tables can be shared; build times are kept for the
    runtime-budget checks.
    """

    def __init__(self, graph):
        self.projection = build_projection(graph)
        self._tables = {}
        self.build_seconds: dict[tuple[str, int], float] = {}

    @staticmethod
    def config(seed: int) -> EmbeddingConfig:
        return EmbeddingConfig(
            dim=100, walk_length=12, walks_per_node=4, window=3, epochs=2, seed=seed
        )

    def table(self, method: str, seed: int):
        key = (method, seed)
        if key not in self._tables:
            config = self.config(seed)
            start = time.perf_counter()
            if method == "node2vec":
                result = train_skipgram(generate_walks(self.projection, config), config)
            elif method == "graphsage":
                result = train_graphsage(self.projection, config)
            else:
                raise ValueError(f"unknown method {method!r}")
            self.build_seconds[key] = time.perf_counter() - start
            self._tables[key] = result.table
        return self._tables[key]


@pytest.fixture(scope="session")
def embedding_bank(published_graph):
    return EmbeddingBank(published_graph)
