import numpy as np


def assert_raises(callback, exc_type=Exception):
    failed = False
    try:
        callback()
    except exc_type:
        failed = True

    assert failed, f"expected {exc_type.__name__} to be raised"


def assert_equal(actual, expected, message=None):
    if actual != expected:
        error_message = f"{message}: " if message else ""
        error_message += f"expected {expected}, but got {actual}"
        raise AssertionError(error_message)


def assert_near(actual, expected, delta, message=None):
    value = abs(expected - actual)
    if value > delta:
        error_message = f"{message}: " if message else ""
        error_message += f"expected {expected}, but got {actual}, which is not within {delta}"
        raise AssertionError(error_message)


def assert_arrays_equal(actual, expected, message=None):
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    if actual.shape != expected.shape or not np.array_equal(actual, expected):
        error_message = f"{message}: " if message else ""
        error_message += f"expected {expected.tolist()}, but got {actual.tolist()}"
        raise AssertionError(error_message)
