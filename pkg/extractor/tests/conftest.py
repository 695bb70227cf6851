import pytest
import torch
from extractor_helpers import WindowStatsModel


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "model.pt"
    torch.jit.script(WindowStatsModel()).save(str(path))
    return path


@pytest.fixture(scope="session")
def slow_checkpoint(tmp_path_factory):
    """A model whose hop corresponds to 30 ms, not 20 ms."""
    path = tmp_path_factory.mktemp("ckpt") / "slow.pt"
    torch.jit.script(WindowStatsModel(hop=480)).save(str(path))
    return path
