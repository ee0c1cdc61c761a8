import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from compstat.codecs import Alphabet  # noqa: E402
from compstat.sources import MarkovModel, generate  # noqa: E402

LETTERS = Alphabet(tuple("abcde "))


def text_source(seed):
    """Order-1 letter chain standing in for one 'language'."""
    rng = np.random.default_rng(seed)
    return MarkovModel(LETTERS, 1, rng.dirichlet(np.full(LETTERS.size, 0.5), size=LETTERS.size))


def write_group(root, name, model, files, length, seed):
    d = root / name
    d.mkdir()
    rng = np.random.default_rng(seed)
    for i in range(files):
        d.joinpath(f"{i:02d}.txt").write_text("".join(generate(model, length, rng).symbols()))
    return d


@pytest.fixture
def corpora(tmp_path):
    """Two same-language groups and one group from a different language."""
    lang_a, lang_b = text_source(1), text_source(2)
    return {
        "a1": write_group(tmp_path, "a1", lang_a, 12, 1500, 10),
        "a2": write_group(tmp_path, "a2", lang_a, 12, 1500, 11),
        "b": write_group(tmp_path, "b", lang_b, 12, 1500, 12),
        "root": tmp_path,
    }


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
