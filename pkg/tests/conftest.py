import numpy as np
import pytest

from regiontrack import synth
from regiontrack.geometry import Frame


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def frames_of(seq):
    return [Frame(np.round(img * 255) / 255, i + 1) for i, img in enumerate(seq.frames)]


@pytest.fixture(scope="session")
def synth_frames():
    cache = {}

    def get(kind, n=100, seed=0):
        key = (kind, n, seed)
        if key not in cache:
            seq = synth.render(kind, n, seed)
            cache[key] = (seq, frames_of(seq))
        return cache[key]

    return get


# ---- acceptance summary ---------------------------------------------------
# Tests marked ``acceptance(number, title)`` get one PASS/FAIL line each in
# the terminal summary; a criterion split over several tests passes only if
# all of them pass.

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    entry = _acceptance.setdefault(number, {"title": title, "ok": True, "seconds": 0.0, "ran": False})
    if report.when == "call":
        entry["ran"] = True
        entry["seconds"] += report.duration
    if report.failed or report.skipped:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        e = _acceptance[number]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {e['title']}  ({e['seconds']:.1f} s)")
