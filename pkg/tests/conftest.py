import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

from specc.dsl import parse_file

ROOT = Path(__file__).resolve().parent.parent
SPECS = ROOT / "specs"

sys.path.insert(0, str(Path(__file__).resolve().parent))


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    cls: str

    @property
    def path(self) -> Path:
        return SPECS / f"{self.name}.spec"

    def load(self):
        res = parse_file(self.path)
        assert res.ok, [str(d) for d in res.diagnostics]
        return res.system


# unlabeled systems checked against the brute-force oracle
CORPUS = [
    CorpusEntry("trees", "T"),
    CorpusEntry("binarytrees", "B"),
    CorpusEntry("binarytrees_eps", "B"),
    CorpusEntry("partitions", "P"),
    CorpusEntry("distinct_partitions", "D"),
    CorpusEntry("necklaces", "N"),
    CorpusEntry("compositions12", "C"),
    CorpusEntry("motzkin", "M"),
    CorpusEntry("mutual", "A"),
    CorpusEntry("nonunary", "T"),
    CorpusEntry("restricted", "R"),
    CorpusEntry("restricted_cycle", "R"),
]
CYCLE_FREE = [e for e in CORPUS if "Cycle" not in e.path.read_text()]
ILL_FOUNDED = ["bad_prod", "bad_union", "bad_seq"]


def corpus_ids(entries):
    return [e.name for e in entries]


@pytest.fixture(params=CORPUS, ids=corpus_ids(CORPUS))
def corpus_entry(request):
    return request.param


@pytest.fixture
def specs_dir():
    return SPECS
