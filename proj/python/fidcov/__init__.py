"""Fiducial inference for covariance matrices of zero-mean Gaussian data."""

from ._fidcov import *  # noqa: F401,F403
from ._fidcov import __version__  # noqa: F401
