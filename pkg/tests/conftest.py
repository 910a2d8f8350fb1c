"""Shared full-size simulations and the acceptance summary."""
import warnings

import pytest

from spacetime_refraction.config import preset_config
from spacetime_refraction.dynamics import evolve_spinor, evolve_step

_CRITERIA: dict[int, dict] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, text = marker.args
    entry = _CRITERIA.setdefault(n, {"text": text, "ok": True, "tests": []})
    passed = call.excinfo is None
    entry["ok"] &= passed
    entry["tests"].append((item.name, passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        entry = _CRITERIA[n]
        status = "PASS" if entry["ok"] else "FAIL"
        tr.write_line(f"[{status}] criterion {n:2d}: {entry['text']}")
        for name, passed in entry["tests"]:
            if not passed:
                tr.write_line(f"         failed: {name}")
    passed = sum(e["ok"] for e in _CRITERIA.values())
    tr.write_line(f"{passed}/{len(_CRITERIA)} acceptance criteria pass")


def _evolve(cfg, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return evolve_step(cfg.packet, cfg.step, cfg.quad, cfg.grid, **kwargs)


@pytest.fixture(scope="session")
def fig2_cfg():
    return preset_config("fig2")


@pytest.fixture(scope="session")
def fig2(fig2_cfg):
    """(density, psi) for the fig2 preset."""
    return _evolve(fig2_cfg)


@pytest.fixture(scope="session")
def fig2_no_evanescent(fig2_cfg):
    return _evolve(fig2_cfg, include_evanescent=False)


@pytest.fixture(scope="session")
def fig3_cfg():
    return preset_config("fig3")


@pytest.fixture(scope="session")
def fig3(fig3_cfg):
    return _evolve(fig3_cfg)


@pytest.fixture(scope="session")
def fig4_cfg():
    return preset_config("fig4")


@pytest.fixture(scope="session")
def fig4(fig4_cfg):
    """(total, up, down) densities for the fig4 preset."""
    cfg = fig4_cfg
    return evolve_spinor(cfg.spinor, cfg.zeeman, cfg.quad, cfg.grid)


@pytest.fixture(scope="session")
def free_cfg(fig2_cfg):
    # window wide enough to hold the free packet until T = 40
    return preset_config("fig2", v2=0.0, x_max=150.0)


@pytest.fixture(scope="session")
def free(free_cfg):
    return _evolve(free_cfg)
