"""Presets, shape inference, forward pass, and classification."""

import numpy as np
import pytest

from aedet import graph
from aedet.errors import (
    ContractViolationError,
    ModelIntegrityError,
    ShapeInferenceError,
    UnknownPresetError,
)
from aedet.graph import (
    LayerSpec,
    ModelWeights,
    NetworkSpec,
    build_preset,
    classify,
    conv,
    dense,
    forward,
    infer_shapes,
    init_weights,
    maxpool,
)
from aedet.kernels import ConvWeights, Tensor

# Golden layer tuples (kind, kernel, stride, filters / pool dims) transcribed
# from the reference cost table.
GOLDEN_CNN_CNP = [
    ("conv", 3, 1, 64),
    ("conv", 3, 2, 64),
    ("conv", 3, 1, 128),
    ("conv", 3, 2, 128),
    ("conv", 3, 1, 128),
    ("conv", 1, 1, 128),
    ("conv", 1, 1, 28),
    ("avgpool_global",),
    ("activation_softmax",),
]
GOLDEN_CNN_C = [
    ("conv", 3, 1, 64),
    ("conv", 3, 1, 64),
    ("maxpool", 2, 2),
    ("conv", 3, 1, 128),
    ("conv", 3, 1, 128),
    ("maxpool", 2, 2),
    ("conv", 3, 1, 128),
    ("conv", 1, 1, 128),
    ("conv", 1, 1, 28),
    ("avgpool_global",),
    ("activation_softmax",),
]
GOLDEN_CNN_FC = [
    ("conv", 3, 1, 64),
    ("conv", 3, 1, 64),
    ("maxpool", 1, 2),
    ("conv", 3, 1, 128),
    ("conv", 3, 1, 128),
    ("maxpool", 2, 2),
    ("flatten",),
    ("dense", 1024),
    ("dense", 1024),
    ("dense", 28),
    ("activation_softmax",),
]


def _as_tuple(layer: LayerSpec):
    if layer.kind == "conv":
        return ("conv", layer.kernel_h, layer.stride, layer.out_channels)
    if layer.kind == "maxpool":
        return ("maxpool", layer.pool_h, layer.pool_w)
    if layer.kind == "dense":
        return ("dense", layer.out_channels)
    return (layer.kind,)


@pytest.mark.parametrize(
    "name,golden",
    [("cnn-cnp", GOLDEN_CNN_CNP), ("cnn-c", GOLDEN_CNN_C), ("cnn-fc", GOLDEN_CNN_FC)],
)
def test_preset_matches_golden_fixture(name, golden):
    spec = build_preset(name)
    assert spec.input_shape == (400, 64, 1)
    assert spec.num_classes == 28
    assert [_as_tuple(l) for l in spec.layers] == golden


def test_cnn_cnp_structure_summary():
    spec = build_preset("cnn-cnp")
    convs = [l for l in spec.layers if l.kind == "conv"]
    assert len(convs) == 7
    assert [l.stride for l in convs] == [1, 2, 1, 2, 1, 1, 1]
    assert [l.out_channels for l in convs] == [64, 64, 128, 128, 128, 128, 28]
    assert not any(l.kind == "maxpool" for l in spec.layers)


def test_unknown_preset():
    with pytest.raises(UnknownPresetError):
        build_preset("bogus")


def test_cnn_cnp_shape_chain():
    spec = build_preset("cnn-cnp")
    shapes = infer_shapes(spec)
    assert shapes == [
        (400, 64, 64),
        (200, 32, 64),
        (200, 32, 128),
        (100, 16, 128),
        (100, 16, 128),
        (100, 16, 128),
        (100, 16, 28),
        28,
        28,
    ]


def test_cnn_c_shape_after_second_pool():
    spec = build_preset("cnn-c")
    shapes = infer_shapes(spec)
    assert shapes[5] == (100, 16, 128)


def test_block_boundary_shapes_match_between_cnn_c_and_cnp():
    """Stride-2 substitution keeps the same structure: block outputs agree."""
    c = infer_shapes(build_preset("cnn-c"))
    cnp = infer_shapes(build_preset("cnn-cnp"))
    assert c[2] == cnp[1]  # after block 1 (pool vs strided conv)
    assert c[5] == cnp[3]  # after block 2
    assert c[-3:] == cnp[-3:]  # classifier tail


def test_shape_error_on_stride_exhaustion():
    layers = tuple(conv(3, 2, 4) for _ in range(5)) + (
        LayerSpec("avgpool_global"),
        LayerSpec("activation_softmax"),
    )
    with pytest.raises(ShapeInferenceError) as exc:
        NetworkSpec(name="custom", input_shape=(8, 8, 1), layers=layers, num_classes=4)
    assert "conv" in str(exc.value)


def test_forward_probabilities_sum_to_one():
    spec = build_preset("cnn-cnp")
    weights = init_weights(spec, seed=3)
    x = Tensor(np.random.default_rng(0).standard_normal(spec.input_shape, dtype=np.float32))
    probs = forward(spec, weights, x)
    assert probs.shape == (28,)
    assert (probs > 0).all()
    assert abs(probs.sum() - 1.0) < 1e-6


def test_forward_zero_weights_uniform_output():
    spec = build_preset("cnn-cnp")
    zeroed = []
    for w in init_weights(spec, seed=0).layers:
        if isinstance(w, ConvWeights):
            zeroed.append(ConvWeights(np.zeros_like(w.weights), np.zeros_like(w.bias)))
        else:
            zeroed.append(w)
    x = Tensor(np.random.default_rng(1).standard_normal(spec.input_shape, dtype=np.float32))
    probs = forward(spec, ModelWeights(tuple(zeroed)), x)
    np.testing.assert_allclose(probs, 1.0 / 28.0, rtol=1e-9)


def test_forward_is_pure():
    spec = _small_spec()
    weights = init_weights(spec, seed=5)
    x = Tensor(np.random.default_rng(2).standard_normal(spec.input_shape, dtype=np.float32))
    a = forward(spec, weights, x)
    b = forward(spec, weights, x)
    np.testing.assert_array_equal(a, b)


def test_forward_rejects_wrong_input_shape():
    spec = _small_spec()
    weights = init_weights(spec, seed=0)
    with pytest.raises(ContractViolationError):
        forward(spec, weights, Tensor(np.zeros((5, 5, 1), dtype=np.float32)))


def test_forward_rejects_mismatched_weights():
    spec = _small_spec()
    other = init_weights(_small_spec(channels=6), seed=0)
    x = Tensor(np.zeros(spec.input_shape, dtype=np.float32))
    with pytest.raises(ModelIntegrityError):
        forward(spec, other, x)


def _small_spec(channels: int = 4) -> NetworkSpec:
    return NetworkSpec(
        name="custom",
        input_shape=(8, 8, 1),
        layers=(
            conv(3, 1, channels),
            conv(3, 2, channels),
            conv(1, 1, 3),
            LayerSpec("avgpool_global"),
            LayerSpec("activation_softmax"),
        ),
        num_classes=3,
    )


def test_forward_dense_path():
    spec = NetworkSpec(
        name="custom",
        input_shape=(4, 4, 2),
        layers=(
            conv(3, 1, 3),
            maxpool(2, 2),
            LayerSpec("flatten"),
            dense(10),
            dense(5),
            LayerSpec("activation_softmax"),
        ),
        num_classes=5,
    )
    weights = init_weights(spec, seed=9)
    probs = forward(spec, weights, Tensor(np.ones(spec.input_shape, dtype=np.float32)))
    assert probs.shape == (5,)
    assert abs(probs.sum() - 1.0) < 1e-6


def test_init_weights_deterministic_and_bounded():
    spec = _small_spec()
    a = init_weights(spec, seed=42)
    b = init_weights(spec, seed=42)
    for wa, wb in zip(a.layers, b.layers):
        if wa is None:
            continue
        np.testing.assert_array_equal(wa.weights, wb.weights)
        np.testing.assert_array_equal(wa.bias, wb.bias)
    first = a.layers[0]
    bound = 1.0 / np.sqrt(3 * 3 * 1)
    assert np.abs(first.weights).max() <= bound


def test_classify_examples():
    assert classify(np.array([0.1, 0.7, 0.2]), ["a", "b", "c"]) == ("b", pytest.approx(0.7))
    label, conf = classify(np.full(4, 0.25), ["w", "x", "y", "z"])
    assert label == "w"  # tie-break to lowest index
    label, conf = classify(np.array([0.0, 0.0, 1.0]), ["a", "b", "c"])
    assert (label, conf) == ("c", 1.0)


def test_classify_errors():
    with pytest.raises(ContractViolationError):
        classify(np.array([]), [])
    with pytest.raises(ContractViolationError):
        classify(np.array([0.5, 0.5]), ["only-one"])
