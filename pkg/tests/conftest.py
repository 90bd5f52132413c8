"""Shared fixtures: the 6-mm and 2.5-mm device parameter sets."""

import numpy as np
import pytest

from qfcsim.propagation import MismatchProfile, WaveguideSpec
from qfcsim.units import parse_quantity

ALPHA_1550 = parse_quantity("1 dB/cm", "loss")      # 23.0259 1/m
BETA_780 = parse_quantity("20 dB/cm", "loss")       # 460.517 1/m
ETA_6MM = parse_quantity("70000 %/W/cm^2", "norm_efficiency")   # 7e6 W^-1 m^-2
ETA_25MM = parse_quantity("175000 %/W/cm^2", "norm_efficiency")  # 1.75e7


@pytest.fixture
def device_6mm():
    return WaveguideSpec(length=0.006, loss_1550=ALPHA_1550, loss_780=BETA_780,
                         eta_sfg_norm=ETA_6MM)


@pytest.fixture
def device_25mm():
    return WaveguideSpec(length=0.0025, loss_1550=ALPHA_1550, loss_780=BETA_780,
                         eta_sfg_norm=ETA_25MM)


@pytest.fixture
def lossless_6mm():
    return WaveguideSpec(length=0.006, loss_1550=0.0, loss_780=0.0,
                         eta_sfg_norm=ETA_6MM)


def two_segment_spec(length=0.006, delta=None, first_segment_offset=0.0,
                     loss_1550=ALPHA_1550, loss_780=BETA_780, eta=ETA_6MM,
                     n_cells=2):
    """Two equal segments at offsets (first_segment_offset, delta)."""
    if delta is None:
        delta = 2.0 * np.pi / length
    half = n_cells // 2
    offsets = (first_segment_offset,) * half + (delta,) * (n_cells - half)
    profile = MismatchProfile(cell_size=length / n_cells, offsets=offsets)
    return WaveguideSpec(length=length, loss_1550=loss_1550, loss_780=loss_780,
                         eta_sfg_norm=eta, mismatch_profile=profile)
