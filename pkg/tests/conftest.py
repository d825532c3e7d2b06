"""
Pytest configuration and fixtures.
"""

import os

os.environ.setdefault("KEYFLIP_ENVIRONMENT", "testing")

from random import Random  # noqa: E402

import pytest  # noqa: E402

from keyflip.asm.assembler import assemble  # noqa: E402
from keyflip.benchmarks.corpus import BenchSpec, load_corpus  # noqa: E402
from keyflip.core.config import TestingSettings  # noqa: E402
from keyflip.core.logging import configure_logging  # noqa: E402
from keyflip.isa.image import ProgramImage  # noqa: E402
from keyflip.prf.keys import ProgramKey  # noqa: E402

# Two range checks on s1; the first prints 'L' when it falls through, the
# second prints 'H' when it falls through. Branches sit at 0x100c and 0x101c.
TWO_BRANCH_SOURCE = """\
main:
    li   s1, 3
    li   a7, 64
    li   a1, 4
    blt  a1, s1, check_high
    li   a0, 76
    ecall
check_high:
    li   a1, 13
    blt  s1, a1, done
    li   a0, 72
    ecall
done:
    li   a0, 0
    li   a7, 93
    ecall
"""

FIRST_BRANCH = 0x100C
SECOND_BRANCH = 0x101C

# hash_bit is 1 at both branch addresses under the all-zero key and 0 at
# both when k_lo = 4; k_lo = 6 selects only the second one.
FLIP_BOTH_KEY = "0" * 32
FLIP_NONE_KEY = "0" * 31 + "4"
FLIP_SECOND_KEY = "0" * 31 + "6"


def pytest_configure(config: pytest.Config) -> None:
    configure_logging(level="WARNING", log_format="console")


@pytest.fixture(scope="session")
def test_settings() -> TestingSettings:
    """Settings as the test environment sees them."""
    return TestingSettings()


@pytest.fixture(scope="session")
def corpus() -> list[BenchSpec]:
    """Every bundled benchmark."""
    return load_corpus()


@pytest.fixture
def rng() -> Random:
    """Seeded generator so random keys and instructions are reproducible."""
    return Random(0x5EED)


@pytest.fixture
def two_branch_image() -> ProgramImage:
    return assemble(TWO_BRANCH_SOURCE)


@pytest.fixture
def flip_both_key() -> ProgramKey:
    return ProgramKey.from_hex(FLIP_BOTH_KEY)


@pytest.fixture
def flip_none_key() -> ProgramKey:
    return ProgramKey.from_hex(FLIP_NONE_KEY)


@pytest.fixture
def flip_second_key() -> ProgramKey:
    return ProgramKey.from_hex(FLIP_SECOND_KEY)
