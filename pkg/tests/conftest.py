import json
from importlib import resources

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def load_schema(name):
    text = resources.files("qmeasure").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


@pytest.fixture(scope="session")
def schema_validator():
    import jsonschema
    from referencing import Registry, Resource

    names = ["model", "sweep", "audit", "estimate", "tradeoff", "infeasibility", "relations"]
    registry = Registry().with_resources(
        (f"{n}.schema.json", Resource.from_contents(load_schema(n))) for n in names
    )

    def validate(doc, name):
        cls = jsonschema.validators.validator_for(load_schema(name))
        cls(load_schema(name), registry=registry).validate(doc)

    return validate


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
