import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from firingcell.errors import KernelTruncationWarning  # noqa: E402


@pytest.fixture(autouse=True)
def _quiet_default_kernel():
    # the default kernel is knowingly truncated; tests that care use pytest.warns
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KernelTruncationWarning)
        yield
