import struct

import numpy as np
import pytest

from surfdec.cnn import Activation, LayerSpec, init_net, load_weights, save_weights
from surfdec.cnn.io import weights_from_bytes, weights_to_bytes
from surfdec.errors import WeightFormatError


def test_round_trip_bit_exact(tmp_path):
    net = init_net(seed=9)
    net.layers[0].biases[:] = np.float32(-0.0)
    path = tmp_path / "w.scnn"
    save_weights(net, path)
    assert load_weights(path).equals(net)


def test_reference_file_size(tmp_path):
    path = tmp_path / "w.scnn"
    save_weights(init_net(seed=0), path)
    assert path.stat().st_size == 12 + 3 * 17 + 16355 * 4


def test_layout():
    net = init_net([LayerSpec(1, 2, 3, Activation.SIGMOID)], seed=1)
    blob = weights_to_bytes(net)
    assert blob[:4] == b"SCNN"
    assert struct.unpack_from("<II", blob, 4) == (1, 1)
    assert struct.unpack_from("<IIIIB", blob, 12) == (1, 2, 3, 3, 1)
    biases = np.frombuffer(blob, "<f4", 2, 29)
    kernels = np.frombuffer(blob, "<f4", 18, 37).reshape(2, 1, 3, 3)
    assert np.array_equal(biases, net.layers[0].biases) and np.array_equal(kernels, net.layers[0].kernels)


@pytest.mark.parametrize("cut", [0, 5, 12, 20, 40, 100])
def test_truncated(cut):
    blob = weights_to_bytes(init_net(seed=0))
    with pytest.raises(WeightFormatError):
        weights_from_bytes(blob[:cut])


def test_bad_magic_version_and_trailing():
    blob = weights_to_bytes(init_net(seed=0))
    with pytest.raises(WeightFormatError, match="magic"):
        weights_from_bytes(b"XCNN" + blob[4:])
    with pytest.raises(WeightFormatError, match="version"):
        weights_from_bytes(blob[:4] + struct.pack("<I", 2) + blob[8:])
    with pytest.raises(WeightFormatError, match="trailing"):
        weights_from_bytes(blob + b"\0")
    bad_act = bytearray(blob)
    bad_act[12 + 16] = 7
    with pytest.raises(WeightFormatError, match="activation"):
        weights_from_bytes(bytes(bad_act))


def test_missing_file(tmp_path):
    with pytest.raises(WeightFormatError):
        load_weights(tmp_path / "nope.scnn")
