import pytest

from canosc.model import builtin_family


@pytest.fixture
def power2():
    return builtin_family("power_tail", c=1.0, p=2.0)


@pytest.fixture
def power3():
    return builtin_family("power_tail", c=1.0, p=3.0)
