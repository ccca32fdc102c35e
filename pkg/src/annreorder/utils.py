import logging as log
import os
import shutil
import tempfile
import threading
import time
from contextlib import contextmanager
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


class TempDir:
    """
    Context manager that creates a scratch directory and removes it, with
    everything inside, when the context exits.

    Example:
    with TempDir() as td:
        write_fvecs(os.path.join(td.path, "base.fvecs"), ds)
    """

    def __init__(self, parent=None):
        self._path = tempfile.mkdtemp(prefix="annreorder-", dir=parent)

    def __enter__(self):
        return self

    def __exit__(self, type, value, tb):
        shutil.rmtree(self._path, ignore_errors=True)

    @property
    def path(self):
        return self._path

    def file(self, name):
        return os.path.join(self._path, name)


@contextmanager
def timed(desc: str):
    start_time = time.perf_counter()
    try:
        yield
    finally:
        duration = time.perf_counter() - start_time
        log.info(f"{desc} took {duration:.4f} seconds")


@contextmanager
def change_dir(directory):
    current_dir = os.getcwd()
    os.chdir(directory)
    try:
        yield
    finally:
        os.chdir(current_dir)


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """
    Applies 'fn' to every item and returns the results in input order.

    Items are dealt out to 'workers' threads in contiguous chunks; each
    thread writes only its own slots of the output, so the result does not
    depend on scheduling.  Exceptions raised by a worker are re-raised in
    the caller once all threads have joined.
    """
    n = len(items)
    if workers <= 1 or n <= 1:
        return [fn(item) for item in items]

    workers = min(workers, n)
    results: List = [None] * n
    errors: List[BaseException] = []
    bounds = [(n * w) // workers for w in range(workers + 1)]

    def work(lo, hi):
        try:
            for i in range(lo, hi):
                results[i] = fn(items[i])
        except BaseException as e:
            errors.append(e)

    threads = []
    for w in range(workers):
        tid = threading.Thread(target=work, args=(bounds[w], bounds[w + 1]))
        threads.append(tid)

    for tid in threads:
        tid.start()

    for tid in threads:
        tid.join()

    if errors:
        raise errors[0]
    return results
