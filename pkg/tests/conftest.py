import itertools
import math

import numpy as np
import pytest

from macfusion.sensors import SensorEnsemble

THREE_PD = (0.5, 0.4, 0.3)
THREE_PF = (0.05, 0.1, 0.4)


def brute_force_pmf(probs):
    """Independent oracle: explicit sum over all 2^K decision vectors."""
    k = len(probs)
    out = [[] for _ in range(k + 1)]
    for x in itertools.product((0, 1), repeat=k):
        w = 1.0
        for bit, p in zip(x, probs):
            w *= p if bit else 1.0 - p
        out[sum(x)].append(w)
    return np.array([math.fsum(v) for v in out])


def random_inid(rng, k, increasing=True):
    """Random ensemble; with ``increasing`` every sensor has pd > pf."""
    a = rng.uniform(0.001, 0.999, k)
    b = rng.uniform(0.001, 0.999, k)
    if increasing:
        pd, pf = np.maximum(a, b), np.minimum(a, b)
        # guarantee a strict gap against ties from the draw
        same = pd == pf
        pf[same] = pd[same] / 2
    else:
        pd, pf = a, b
    return SensorEnsemble(tuple(pd), tuple(pf))


@pytest.fixture
def three_sensor():
    return SensorEnsemble(THREE_PD, THREE_PF)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


# --- acceptance summary: one line per numbered criterion ---------------------

_CRITERIA: dict[int, list[tuple[str, str, str]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    detail = "; ".join(str(v) for k, v in rep.user_properties if k == "detail")
    part = mark.kwargs.get("part", "")
    _CRITERIA.setdefault(mark.args[0], []).append((part, rep.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        parts = _CRITERIA[n]
        ok = all(outcome == "passed" for _, outcome, _ in parts)
        bits = []
        for part, outcome, detail in parts:
            label = f"{part}: " if part else ""
            bits.append(f"{label}{outcome}" + (f" ({detail})" if detail else ""))
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  " + " | ".join(bits))
