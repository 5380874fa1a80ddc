import logging

import pytest

from bureskit.errors import ValidationError
from bureskit.utils import Tolerances, warn_once


def test_warn_once_demotes_repeats(caplog):
    log = logging.getLogger("bureskit.tests")
    with caplog.at_level(logging.DEBUG, logger="bureskit.tests"):
        for _ in range(3):
            warn_once(log, "repeated condition", "P is ill-conditioned")
    levels = [r.levelno for r in caplog.records if r.name == "bureskit.tests"]
    assert levels == [logging.WARNING, logging.DEBUG, logging.DEBUG]


def test_tolerances_scale():
    scaled = Tolerances().scaled(10.0)
    assert scaled.solve == pytest.approx(1e-8)
    assert scaled.herm == pytest.approx(1e-9)


def test_tolerance_scale_from_environment(monkeypatch):
    monkeypatch.setenv("BURESKIT_TOLERANCE_SCALE", "2")
    assert Tolerances.from_env().metric == pytest.approx(2e-8)
    monkeypatch.setenv("BURESKIT_TOLERANCE_SCALE", "-1")
    with pytest.raises(ValidationError):
        Tolerances.from_env()
