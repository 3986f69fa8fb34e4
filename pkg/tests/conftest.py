import os

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def fixture_text():
    def load(name):
        with open(os.path.join(FIXTURES, name), "r", encoding="utf-8") as fh:
            return fh.read()

    return load
