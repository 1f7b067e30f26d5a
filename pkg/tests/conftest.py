import numpy as np
import pytest

from scarray.waveform import PulseShape, SampledWaveform

DEFAULT_T = 0.2e-6


@pytest.fixture(scope="session")
def pulse():
    """The default operating point: beta=0.25, T=0.2 us, twice oversampling."""
    return PulseShape(rolloff=0.25, symbol_period=DEFAULT_T, span=16, oversampling=2)


def aligned_segment(target: SampledWaveform, source: SampledWaveform) -> np.ndarray:
    """Samples of ``source`` covering exactly ``target``'s time extent."""
    offset = int(round((target.origin - source.origin) / target.sample_period))
    if offset < 0 or offset + len(target) > len(source):
        raise ValueError("source waveform does not cover the target extent")
    return source.samples[offset : offset + len(target)]
