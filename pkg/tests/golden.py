"""Golden CLI invocations shared by the regression tests and the regeneration helper.

Regenerate with ``python -m tests.golden`` from the repository root.
"""

from pathlib import Path

from click.testing import CliRunner

from sdpnormal.cli import main

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
EXPECTED = FIXTURES / "expected"

SYSTEMS = ["example1", "example2", "example3", "large_bad", "large_good", "bonnans_shapiro"]
MAPS = ["map1", "map2", "trace_map"]

CASES = {}
for name in SYSTEMS:
    CASES[f"analyze_{name}"] = ["analyze", f"{name}.json"]
    CASES[f"slack_{name}"] = ["slack", f"{name}.json"]
for name in MAPS:
    CASES[f"closedness_{name}"] = ["closedness", f"{name}.json"]
CASES["analyze_large_bad_traced"] = ["analyze", "large_bad.json", "--trace-file", "large_example_trace.json"]
CASES["analyze_large_good_traced"] = ["analyze", "large_good.json", "--trace-file", "large_example_trace.json"]
CASES["closedness_map2_traced"] = ["closedness", "map2.json", "--trace-file", "map2_trace.json"]
CASES["direction_example1"] = ["direction", "example1_direction.json"]


def invoke(args):
    """Run the CLI inside the fixtures directory; returns (exit_code, stdout)."""
    runner = CliRunner()
    import os

    cwd = os.getcwd()
    os.chdir(FIXTURES)
    try:
        res = runner.invoke(main, list(args), catch_exceptions=False)
    finally:
        os.chdir(cwd)
    return res.exit_code, res.stdout


if __name__ == "__main__":
    EXPECTED.mkdir(exist_ok=True)
    for key, args in CASES.items():
        code, out = invoke(args)
        assert code == 0, (key, code)
        (EXPECTED / f"{key}.json").write_text(out)
        print("wrote", key)
