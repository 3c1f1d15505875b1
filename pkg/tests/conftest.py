import random

import pytest
from hypothesis import settings

import earlywarn.forest
from earlywarn.ingest import FlagEvent, LoginEvent

# |sum(importances) - 1| for every forest fitted during the session. The wrapper
# is installed before any test module imports ``fit``.
IMPORTANCE_SUM_ERRORS: list[float] = []
_fit = earlywarn.forest.fit


def _recording_fit(*args, **kwargs):
    model = _fit(*args, **kwargs)
    IMPORTANCE_SUM_ERRORS.append(abs(float(model.feature_importances.sum()) - 1.0))
    return model


earlywarn.forest.fit = _recording_fit

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_logins(rng: random.Random, n_events: int, n_accounts: int, n_days: int,
                  vocab: int = 4) -> list[LoginEvent]:
    """Login records with small vocabularies so uniqueness counts collide often."""
    out = []
    for _ in range(n_events):
        codes = [rng.choice([-1] + list(range(vocab))) for _ in range(9)]
        out.append(LoginEvent(rng.randrange(1, n_accounts + 1), rng.randrange(n_days), *codes,
                              rng.choice([-1, 0, 1]), rng.choice([-1, 0, 1])))
    return out


def random_flags(rng: random.Random, n_flags: int, n_accounts: int, n_days: int) -> list[FlagEvent]:
    return [FlagEvent(rng.randrange(1, n_accounts + 1), rng.randrange(n_days))
            for _ in range(n_flags)]


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_collection_modifyitems(items):
    # The importance audit covers models fitted anywhere in the suite, so it runs last.
    items.sort(key=lambda item: item.name.startswith("test_criterion_11"))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
