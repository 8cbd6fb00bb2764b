import pytest

from piltz.divisor_core import build_divisor_table


@pytest.fixture(scope="session")
def d2():
    return build_divisor_table(2, 10**6)


@pytest.fixture(scope="session")
def d3():
    return build_divisor_table(3, 10**6)


@pytest.fixture(scope="session")
def d4():
    return build_divisor_table(4, 10**5)


@pytest.fixture(autouse=True)
def _cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("PILTZ_CACHE", str(tmp_path / "cache"))
