"""Domain-wall MTJ processing-in-pixel: device model to spiking-network training."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.0.0"
