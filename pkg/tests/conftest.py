import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from hidec import dsl  # noqa: E402

FIXTURES = ROOT / "fixtures"

MODEL_FIXTURES = [
    "flat_basic",
    "nested_basic",
    "nested_cardinality",
    "nested_cardinality_flat",
    "paper_flat",
    "paper_hier",
]


def fixture_path(name: str) -> pathlib.Path:
    return FIXTURES / name


def load_fixture_model(name: str):
    return dsl.load_model(str(FIXTURES / f"{name}.dpm"))


def load_fixture_trace(name: str):
    return dsl.load_trace(str(FIXTURES / f"{name}.dpt"))


@pytest.fixture(scope="session")
def flat_basic():
    return load_fixture_model("flat_basic")


@pytest.fixture(scope="session")
def nested_basic():
    return load_fixture_model("nested_basic")


@pytest.fixture(scope="session")
def nested_cardinality():
    return load_fixture_model("nested_cardinality")


@pytest.fixture(scope="session")
def nested_cardinality_flat():
    return load_fixture_model("nested_cardinality_flat")


@pytest.fixture(scope="session")
def paper_flat():
    return load_fixture_model("paper_flat")


@pytest.fixture(scope="session")
def paper_hier():
    return load_fixture_model("paper_hier")


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if "test_acceptance" not in report.nodeid:
        return
    if report.when != "call":
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {status}: {name}", file=sys.stderr)
