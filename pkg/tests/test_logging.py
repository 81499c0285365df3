import pytest

from gritnet_logger import GritNetLogger, format_scope
from log.logger import get_logger


class _Driver(GritNetLogger):
    def __init__(self):
        self.logger = get_logger("Driver")


@pytest.fixture
def messages(caplog):
    root_logger = get_logger()
    root_logger.addHandler(caplog.handler)
    try:
        yield lambda: [r.getMessage() for r in caplog.records]
    finally:
        root_logger.removeHandler(caplog.handler)


def test_format_scope_orders_run_coordinates():
    assert format_scope({}) == ""
    assert format_scope({"week": 3, "course": "nd_b", "seed": None, "fold": 0}) == "[course=nd_b fold=0 week=3] "
    assert format_scope({"lr": 0.1, "seed": 2}) == "[seed=2 lr=0.1] "


def test_section_scope_prefixes_later_messages(messages):
    driver = _Driver()
    driver.log_info("before any section")
    driver.log_section("Training on nd_b", course="nd_b", seed=0)
    driver.log_info("source CV AUC=71.0", indent=1, fold=2, week=3)
    driver.log_warning("skipped", theta=0.4)

    lines = messages()
    assert lines[0] == "before any section"
    assert lines[2] == "[course=nd_b seed=0] Training on nd_b"
    assert lines[4] == "[course=nd_b seed=0 fold=2 week=3]   source CV AUC=71.0"
    assert lines[5] == "[course=nd_b seed=0 theta=0.4] skipped"


def test_new_section_replaces_the_scope(messages):
    driver = _Driver()
    driver.log_section("Seed 1", seed=1, course="nd_a_v1")
    driver.log_section("Evaluation")
    driver.log_info("done")
    assert driver.section_scope == {}
    assert messages()[-1] == "done"
