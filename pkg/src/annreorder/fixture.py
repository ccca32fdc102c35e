import os

import annreorder.config as config
from annreorder.utils import TempDir


class Fixture:
    """
    Handed to every suite test.  Carries the optional annreorder.toml
    settings and hands out scratch directories.
    """

    def __str__(self):
        return str(self._cfg)

    def __init__(self, cfg_path=None, scratch_dir=None):
        if cfg_path is None:
            cfg_path = os.environ.get("ANNREORDER_CONFIG", config.FIXTURE_CONFIG)
        self._cfg = config.read_fixture_config(cfg_path)
        if scratch_dir is not None:
            self._cfg = self._cfg._replace(scratch_dir=str(scratch_dir))

    @property
    def cfg(self):
        return self._cfg

    @property
    def workers(self) -> int:
        return self._cfg.workers

    @property
    def seed(self) -> int:
        return self._cfg.seed

    def temp_dir(self) -> TempDir:
        return TempDir(self._cfg.scratch_dir)
