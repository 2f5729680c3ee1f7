"""Acceptance criteria 1-10.

Each criterion prints one ``PASS``/``FAIL`` line with its measured residual
and wall time. Run with ``pytest tests/test_acceptance.py -v`` or directly
with ``python tests/test_acceptance.py``.
"""

import json
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from multipolar.cli import main
from multipolar.scene import dumps_scene, load_scene, loads_scene
from multipolar.verification import SUITES, edge_necessity_case

ROOT = Path(__file__).resolve().parent.parent
SCENES = ROOT / "scenes"
SEED = 0

# number -> (suite, keyword arguments at the stated tolerances, time budget in seconds)
SUITE_CRITERIA = {
    1: ("dipole", dict(cases=200, tol=1e-9), 5.0),
    2: ("quadrupole", dict(cases=200, tol=1e-9, necessity=1e-3), 10.0),
    3: ("net-charge", dict(cases=100, tol=1e-10), 2.0),
    4: ("energy-rate", dict(cases=100, tol=1e-11, steps=(1e-2, 1e-3, 1e-4)), 5.0),
    5: ("divergence", dict(cases=200, tol=1e-10), 5.0),
    6: ("variational", dict(cases=100, tol=1e-10, worked_tol=1e-12), 3.0),
    7: ("moving-dipole", dict(cases=100, tol=1e-10), 3.0),
    8: ("symmetrization", dict(cases=100, tol=1e-12, null_tol=1e-10), 2.0),
    9: ("promotion", dict(cases=30, tol=1e-12), 1.0),
}
TOTAL_BUDGET = 60.0

_elapsed: dict[int, float] = {}


def _report(number: int, passed: bool, summary: str, seconds: float, budget: float):
    _elapsed[number] = seconds
    status = "PASS" if passed else "FAIL"
    line = f"{status} criterion {number:2d}: {summary} [{seconds:.2f}s / budget {budget:.0f}s]"
    print("\n" + line, flush=True)
    return line


def run_suite_criterion(number: int):
    name, kwargs, budget = SUITE_CRITERIA[number]
    rng = np.random.default_rng([SEED, list(SUITES).index(name)])
    start = time.perf_counter()
    result = SUITES[name](rng, **kwargs)
    seconds = time.perf_counter() - start
    ok = result.passed and seconds < budget
    extra = ""
    if number == 2:
        with_edges, without = edge_necessity_case()
        gap = abs(with_edges - without)
        ok = ok and gap >= 1e-3
        extra = f", edge-term gap {gap:.3g}"
    if result.details:
        extra += ", " + json.dumps(result.as_dict()["details"], sort_keys=True)
    summary = (f"{result.name}: {result.cases} cases, max residual {result.max_residual:.3e} "
               f"(tol {result.tolerance:.0e}){extra}")
    _report(number, ok, summary, seconds, budget)
    return ok, result


def _run_cli(*argv) -> int:
    return main([str(a) for a in argv])


def run_cli_criterion():
    start = time.perf_counter()
    problems = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        proc = subprocess.run([sys.executable, "-m", "multipolar.cli", "verify", "--seed", str(SEED),
                               "--out", str(tmp / "verify.json")], capture_output=True, text=True)
        if proc.returncode != 0:
            problems.append(f"verify exit {proc.returncode}")
        report = json.loads((tmp / "verify.json").read_text())
        if len(report["suites"]) != 9 or not report["passed"]:
            problems.append("verify report incomplete or failing")

        for path in sorted(SCENES.glob("*.json")):
            scene = load_scene(path)
            if loads_scene(dumps_scene(scene)) != scene:
                problems.append(f"round trip changed {path.name}")

        code = _run_cli("run", SCENES / "reference_dipole.json", "--out", tmp / "r.json")
        value = json.loads((tmp / "r.json").read_text())["tasks"][0]["results"]["value"]
        if code != 0 or abs(value - 1 / 6) > 1e-12:
            problems.append(f"reference dipole: exit {code}, value {value!r}")

        code = _run_cli("run", SCENES / "quadrupole_tight.json", "--tolerance", "1e-15",
                        "--out", tmp / "q.json")
        residual = json.loads((tmp / "q.json").read_text())["tasks"][0]["checks"][0]["residual"]
        if code != 1:
            problems.append(f"tight tolerance exit {code} (residual {residual:.2e})")

        doc = json.loads((SCENES / "reference_dipole.json").read_text())
        doc["tasks"][0]["phi"] = "undefined"
        (tmp / "undef.json").write_text(json.dumps(doc))
        code = _run_cli("run", tmp / "undef.json", "--out", tmp / "u.json")
        if code != 3:
            problems.append(f"undefined field exit {code}")

        (tmp / "bad.json").write_text('{"tasks": [')
        code = _run_cli("run", tmp / "bad.json", "--out", tmp / "b.json")
        if code != 2:
            problems.append(f"malformed scene exit {code}")

        runs = []
        for i in range(2):
            _run_cli("run", SCENES / "tour.json", "--seed", "3", "--out", tmp / f"d{i}.json")
            rep = json.loads((tmp / f"d{i}.json").read_text())
            for t in rep["tasks"]:
                t.pop("wall_time")
            runs.append(json.dumps(rep, sort_keys=True))
        if runs[0] != runs[1]:
            problems.append("reports differ between identical runs")
    seconds = time.perf_counter() - start
    _elapsed[10] = seconds
    total = sum(_elapsed.values())
    if total >= TOTAL_BUDGET:
        problems.append(f"acceptance run took {total:.1f}s")
    ok = not problems
    summary = ("CLI verify exit 0, round trips, exit codes 1/2/3, deterministic reports; "
               f"total acceptance time {total:.2f}s" + ("" if ok else " -- " + "; ".join(problems)))
    _report(10, ok, summary, seconds, TOTAL_BUDGET)
    return ok, problems


@pytest.mark.parametrize("number", sorted(SUITE_CRITERIA))
def test_criterion(number, capsys):
    with capsys.disabled():
        ok, result = run_suite_criterion(number)
    name, _, budget = SUITE_CRITERIA[number]
    assert result.passed, result.as_dict()
    assert _elapsed[number] < budget, f"{name} took {_elapsed[number]:.2f}s"
    assert ok


def test_criterion_10_cli(capsys):
    with capsys.disabled():
        ok, problems = run_cli_criterion()
    assert ok, problems


if __name__ == "__main__":
    results = [run_suite_criterion(n)[0] for n in sorted(SUITE_CRITERIA)]
    results.append(run_cli_criterion()[0])
    sys.exit(0 if all(results) else 1)
