"""Run the acceptance gate and print one verdict line per criterion."""

import sys

import pytest

from _common import ROOT

if __name__ == "__main__":
    sys.exit(pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]))
