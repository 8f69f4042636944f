import functools

import pytest
import scipy.fft

from forkoam.field import GridSpec, electron_wavelength
from forkoam.scenarios import reproduce

LAM_200KV = electron_wavelength(200e3)


@pytest.fixture(autouse=True)
def _single_thread():
    with scipy.fft.set_workers(1):
        yield


@functools.lru_cache(maxsize=None)
def cached_scenario(name):
    """Bundled scenarios are expensive; run each one once per session."""
    return reproduce(name)


@pytest.fixture
def small_grid():
    return GridSpec(256, 256, 10e-9, LAM_200KV)


SMALL_INI = """\
[scenario]
name = small

[grid]
nx = 256
ny = 256
pitch_nm = 10
voltage_kv = 200

[beam]
m = -1, 0, 1
profile = uniform-disk
radius_um = 0.64

[mask]
kind = forked-grating
period_um = 0.16
aperture_radius_um = 0.64

[propagation]
method = lens-fourier
focal_length_m = 1.0

[analysis]
n_min = -2
n_max = 2
q_max = 6
"""

SORTER_INI = """\
[scenario]
name = small-sorter

[grid]
nx = 512
ny = 512
pitch_nm = 20
voltage_kv = 200

[beam]
m = -2, 3
profile = gaussian
radius_um = 0.512

[mask]
kind = forked-grating
period_um = 0.64
aperture_radius_um = 1.536
duty = 0.1

[propagation]
method = lens-fourier
focal_length_m = 1.0

[analysis]
n_min = -4
n_max = 4
q_max = 8

[sorter]
enabled = true
n_min = -4
n_max = 4
"""


@pytest.fixture
def small_ini(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL_INI)
    return path


@pytest.fixture
def sorter_ini(tmp_path):
    path = tmp_path / "sorter.ini"
    path.write_text(SORTER_INI)
    return path
