import logging
import pytest
from tempseg.core import CategoryTable


@pytest.fixture
def cityscapes():
    return CategoryTable.cityscapes()


@pytest.fixture
def three_categories():
    """background, object (the target), other"""
    return CategoryTable([(0, 'background', False), (1, 'object', True), (2, 'other', False)])


@pytest.fixture
def single_thread(monkeypatch):
    monkeypatch.setenv('TEMPSEG_THREADS', '1')


@pytest.fixture(autouse=True)
def restore_tempseg_logger():
    logger = logging.getLogger('tempseg')
    handlers, level, propagate = list(logger.handlers), logger.level, logger.propagate
    yield logger
    logger.handlers, logger.level, logger.propagate = handlers, level, propagate
