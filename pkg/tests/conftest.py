import json

import pytest

from policycast.corpus import POLICY_COLUMNS, default_traits

HEADER = ",".join(POLICY_COLUMNS)


def policies_text(rows):
    return HEADER + "\n" + "\n".join(",".join(str(c) for c in r) for r in rows) + "\n"


@pytest.fixture(scope="session")
def traits():
    return default_traits()


@pytest.fixture
def traits_file(tmp_path, traits):
    path = tmp_path / "traits.json"
    path.write_text(json.dumps(traits.to_dict()))
    return path


@pytest.fixture
def write_policies(tmp_path):
    def write(rows, name="policies.csv"):
        path = tmp_path / name
        path.write_text(policies_text(rows))
        return path

    return write


THREE_POLICIES = [
    ("p1", "Meth precursor", "health", "OK", 1996, 2006),
    ("p1", "Meth precursor", "health", "OR", 2004, 2006),
    ("p1", "Meth precursor", "health", "CA", 2005, 2006),
    ("p2", "Lottery", "taxes", "NH", 1964, ""),
    ("p2", "Lottery", "taxes", "NY", 1966, ""),
    ("p3", "Open primaries", "elections", "TX", 1950, ""),
]
