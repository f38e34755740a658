"""Shared fixtures, plus a per-criterion PASS/FAIL summary for tests marked
``@pytest.mark.criterion("ACn", "title")``."""

import os
import subprocess
import sys
from collections import OrderedDict

import pytest

_RESULTS = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion this test evidences")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        cid, title = marker.args
        entry = _RESULTS.setdefault(cid, {"title": title, "ok": True, "details": []})
        entry["ok"] &= rep.passed
        for key, value in item.user_properties:
            if key == "detail":
                entry["details"].append(value)
        if rep.failed:
            msg = str(rep.longrepr).strip().splitlines()[-1] if rep.longrepr else "failed"
            entry["details"].append(f"{item.name}: {msg[:160]}")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid, entry in sorted(_RESULTS.items()):
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"{status}  {cid}  {entry['title']}")
        for d in entry["details"]:
            terminalreporter.write_line(f"        {d}")


@pytest.fixture
def run_cli(tmp_path):
    """Run the console entry point in a fresh interpreter."""

    def run(*args, env=None, cwd=None):
        full_env = dict(os.environ)
        full_env.update(env or {})
        return subprocess.run([sys.executable, "-m", "oligopoly.cli", *args], capture_output=True,
                              text=True, env=full_env, cwd=cwd or tmp_path)

    return run
