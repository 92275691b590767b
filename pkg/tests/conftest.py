import time

import pytest

from dwp2m.device import DeviceParams
from dwp2m.fitting import build_fit_model


@pytest.fixture(scope="session")
def params():
    return DeviceParams()


@pytest.fixture(scope="session")
def ideal():
    """No wall slice, no heavy metal, no bias rolloff: the linear-divider limit."""
    return DeviceParams(dw_width=0.0, r_hm=0.0, v_half=1e12)


@pytest.fixture(scope="session")
def hybrid_fit():
    return build_fit_model("hybrid")


# Training is the slow part of the suite; every test needing the task-A network shares one run.
TRAIN_A = dict(noise_scale=0.1)


@pytest.fixture(scope="session")
def bars():
    from dwp2m.codesign.data import make_dataset, split
    return split(make_dataset("bars", 2000, 0))


@pytest.fixture(scope="session")
def dots():
    from dwp2m.codesign.data import make_dataset, split
    return split(make_dataset("dots", 2000, 1))


@pytest.fixture(scope="session")
def trained_a(hybrid_fit, bars):
    """(net, history, cfg, seconds) for the bars network trained with noise injection."""
    from dwp2m.codesign.train import TrainConfig, build_net, train
    cfg = TrainConfig(**TRAIN_A)
    t0 = time.perf_counter()
    net = build_net(hybrid_fit, cfg)
    res = train(net, bars[0], cfg)
    return net, res.history, cfg, time.perf_counter() - t0


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
