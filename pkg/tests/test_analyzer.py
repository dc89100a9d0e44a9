"""Cost model: exact integers, golden display strings, reductions, real-time."""

import numpy as np
import pytest

from aedet import analyzer
from aedet.analyzer import (
    analyze,
    cnn_fc_reference_report,
    count_macs,
    count_params,
    format_count,
    format_table,
    format_weight_memory,
    realtime_check,
    reduction_factors,
    to_csv,
    to_json_dict,
)
from aedet.errors import ContractViolationError
from aedet.graph import LayerSpec, NetworkSpec, build_preset, conv, forward, init_weights
from aedet.kernels import Tensor
from aedet.reference import MacCounter, conv2d_reference

# Golden per-layer cells for the two fully-reproduced columns.
CNN_C_PARAM_CELLS = ["640", "36.9 k", "73.9 k", "147.6 k", "147.6 k", "16.5 k", "3.6 k"]
CNN_C_MAC_CELLS = ["14.8 M", "943.7 M", "471.9 M", "943.7 M", "236.0 M", "26.2 M", "5.7 M"]
CNN_CNP_PARAM_CELLS = ["640", "36.9 k", "73.9 k", "147.6 k", "147.6 k", "16.5 k", "3.6 k"]
CNN_CNP_MAC_CELLS = ["14.8 M", "236.0 M", "471.9 M", "236.0 M", "236.0 M", "26.2 M", "5.7 M"]


def conv_rows(report):
    return [r for r in report.rows if r.layer.startswith("conv")]


# ------------------------------------------------------------ counting


def test_count_params_examples():
    assert count_params(conv(3, 1, 64), (400, 64, 1)) == 640
    assert count_params(conv(3, 1, 64), (400, 64, 64)) == 36_928
    assert count_params(conv(1, 1, 28), (100, 16, 128)) == 3_612


def test_count_macs_examples():
    assert count_macs(conv(3, 1, 64), (400, 64, 1)) == 14_745_600
    assert count_macs(conv(3, 2, 128), (200, 32, 128)) == 235_929_600
    assert count_macs(conv(1, 1, 128), (100, 16, 128)) == 26_214_400


def test_pool_and_activation_cost_nothing():
    pool = LayerSpec("maxpool", pool_h=2, pool_w=2)
    assert count_params(pool, (8, 8, 4)) == count_macs(pool, (8, 8, 4)) == 0
    gap = LayerSpec("avgpool_global")
    assert count_params(gap, (8, 8, 4)) == count_macs(gap, (8, 8, 4)) == 0


def test_conv_closed_form_consistency():
    for in_shape, layer in [
        ((400, 64, 1), conv(3, 1, 64)),
        ((200, 32, 64), conv(3, 2, 128)),
        ((100, 16, 128), conv(1, 1, 28)),
    ]:
        p = count_params(layer, in_shape)
        k = layer.kernel_h * layer.kernel_w * in_shape[2]
        assert p - layer.out_channels == k * layer.out_channels
        out_h = -(-in_shape[0] // layer.stride)
        out_w = -(-in_shape[1] // layer.stride)
        assert count_macs(layer, in_shape) == out_h * out_w * layer.out_channels * k


def test_stride2_quarters_macs_exactly():
    for in_shape, k, f in [((400, 64, 64), 3, 64), ((200, 32, 64), 3, 128), ((8, 8, 2), 1, 4)]:
        s1 = count_macs(conv(k, 1, f), in_shape)
        s2 = count_macs(conv(k, 2, f), in_shape)
        assert 4 * s2 == s1


# -------------------------------------------------------------- analyze


def test_analyze_cnn_cnp_exact_totals():
    r = analyze(build_preset("cnn-cnp"))
    assert r.total_params == 452_316
    assert r.total_macs == 1_239_042_400
    assert r.weight_bytes_16bit == 904_632
    assert format_count(r.total_params, totals_row=True) == "452 k"
    assert format_count(r.total_macs, totals_row=True) == "1239 M"


def test_analyze_cnn_c_exact_totals():
    r = analyze(build_preset("cnn-c"))
    assert r.total_params == 452_316
    assert r.total_macs == 2_654_620_000
    assert format_count(r.total_macs, totals_row=True) == "2655 M"


def test_cnn_c_layer_cells_match_reference_table():
    r = analyze(build_preset("cnn-c"))
    rows = conv_rows(r)
    assert [format_count(x.params) for x in rows] == CNN_C_PARAM_CELLS
    assert [format_count(x.macs) for x in rows] == CNN_C_MAC_CELLS


def test_cnn_cnp_layer_cells_match_reference_table():
    r = analyze(build_preset("cnn-cnp"))
    rows = conv_rows(r)
    assert [format_count(x.params) for x in rows] == CNN_CNP_PARAM_CELLS
    assert [format_count(x.macs) for x in rows] == CNN_CNP_MAC_CELLS


def test_analyze_includes_input_and_frontend_rows():
    r = analyze(build_preset("cnn-cnp"))
    assert r.rows[0].layer == "input" and r.rows[0].params == 0
    assert r.rows[1].layer == "frontend"
    assert r.rows[1].params == 25_600
    assert r.rows[1].macs == 12_700_000


def test_totals_equal_sum_of_rows():
    for arch in ("cnn-fc", "cnn-c", "cnn-cnp"):
        r = analyze(build_preset(arch))
        assert r.total_params == sum(x.params for x in r.rows)
        assert r.total_macs == sum(x.macs for x in r.rows)
        assert r.weight_bytes_16bit == 2 * r.total_params


def test_analyze_pure_function():
    a = analyze(build_preset("cnn-c"))
    b = analyze(build_preset("cnn-c"))
    assert a == b


def test_cnn_fc_convention_independent_rows():
    r = analyze(build_preset("cnn-fc"))
    fc = [x for x in r.rows if x.layer.startswith("fc")]
    assert [x.params for x in fc][1:] == [1_049_600, 28_700]
    assert [format_count(x.params) for x in fc][1:] == ["1.1 M", "28.7 k"]
    assert [x.macs for x in fc] == [x.params for x in fc]  # fc rows: #MAC = #param


def test_frontend_computed_mode_is_distinct():
    r = analyze(build_preset("cnn-cnp"), frontend_mode="computed")
    fe = r.rows[1]
    assert r.frontend_mode == "computed"
    assert fe.params > 0 and fe.macs > 0
    assert (fe.params, fe.macs) != (25_600, 12_700_000)


# ----------------------------------------------------------- reductions


def test_reduction_factors_headline():
    f = reduction_factors(cnn_fc_reference_report(), analyze(build_preset("cnn-cnp")))
    assert f["param_factor"] == pytest.approx(515.0, abs=1.0)
    assert f["mac_factor"] == pytest.approx(2.06, abs=0.05)


def test_reduction_factors_identity():
    r = analyze(build_preset("cnn-c"))
    f = reduction_factors(r, r)
    assert f == {"param_factor": 1.0, "mac_factor": 1.0}


def test_reduction_cnn_c_vs_cnp():
    f = reduction_factors(analyze(build_preset("cnn-c")), analyze(build_preset("cnn-cnp")))
    assert f["mac_factor"] == pytest.approx(2_654_620_000 / 1_239_042_400, rel=1e-12)
    assert f["mac_factor"] == pytest.approx(2.14, abs=0.01)


def test_reduction_zero_denominator():
    good = analyze(build_preset("cnn-c"))
    empty = analyzer.CostReport(rows=(), total_params=0, total_macs=0, weight_bytes_16bit=0, frontend_mode="computed")
    with pytest.raises(ContractViolationError):
        reduction_factors(good, empty)


# ------------------------------------------------------------ real time


def test_realtime_cnn_cnp_feasible_at_430():
    v = realtime_check(analyze(build_preset("cnn-cnp")), 430.0, 4.0)
    assert v.compute_time_s == pytest.approx(2.88, abs=0.01)
    assert v.feasible
    assert v.realtime_factor == pytest.approx(4.0 / v.compute_time_s)


def test_realtime_cnn_c_infeasible_at_430():
    v = realtime_check(analyze(build_preset("cnn-c")), 430.0, 4.0)
    assert v.compute_time_s == pytest.approx(6.17, abs=0.01)
    assert not v.feasible


def test_realtime_unbounded_budget():
    v = realtime_check(analyze(build_preset("cnn-c")), 1e12, 4.0)
    assert v.feasible


def test_realtime_rejects_bad_budget():
    with pytest.raises(ContractViolationError):
        realtime_check(analyze(build_preset("cnn-c")), 0.0, 4.0)


# ------------------------------------------- runtime/ledger agreement


def _counted_conv_macs(spec, seed=0):
    """Forward pass through reference kernels, counting physical multiplies."""
    weights = init_weights(spec, seed=seed)
    x = Tensor(np.random.default_rng(seed).standard_normal(spec.input_shape, dtype=np.float32))
    counts = []
    cur = x
    for layer, w in zip(spec.layers, weights.layers):
        if layer.kind == "conv":
            counter = MacCounter()
            cur = conv2d_reference(cur, w, stride=layer.stride, counter=counter)
            counts.append(counter.macs)
        elif layer.kind == "maxpool":
            from aedet.kernels import maxpool

            cur = maxpool(cur, layer.pool_h, layer.pool_w)
        else:
            break
    return counts


SMALL_SPECS = [
    NetworkSpec("custom", (6, 6, 1), (conv(3, 1, 4), conv(3, 2, 5), conv(1, 1, 3),
                                      LayerSpec("avgpool_global"), LayerSpec("activation_softmax")), 3),
    NetworkSpec("custom", (8, 4, 2), (conv(1, 1, 6), conv(3, 1, 2),
                                      LayerSpec("avgpool_global"), LayerSpec("activation_softmax")), 2),
    NetworkSpec("custom", (5, 7, 3), (conv(3, 2, 4), conv(3, 2, 4),
                                      LayerSpec("avgpool_global"), LayerSpec("activation_softmax")), 4),
    NetworkSpec("custom", (4, 4, 1), (conv(3, 1, 2), LayerSpec("maxpool", pool_h=2, pool_w=2),
                                      conv(3, 1, 3), LayerSpec("avgpool_global"),
                                      LayerSpec("activation_softmax")), 3),
    NetworkSpec("custom", (9, 3, 2), (conv(3, 1, 3), conv(1, 2, 5), conv(1, 1, 2),
                                      LayerSpec("avgpool_global"), LayerSpec("activation_softmax")), 2),
]


@pytest.mark.parametrize("spec", SMALL_SPECS)
def test_instrumented_macs_equal_analyzer(spec):
    report = analyze(spec)
    ledger = [r.macs for r in report.rows if r.layer.startswith("conv")]
    assert _counted_conv_macs(spec) == ledger


# ------------------------------------------------------------ emitters


def test_format_count_reference_cells():
    cases = {
        0: "0", 640: "640", 36_928: "36.9 k", 73_856: "73.9 k", 147_584: "147.6 k",
        16_512: "16.5 k", 3_612: "3.6 k", 25_600: "25.6 k", 14_745_600: "14.8 M",
        943_718_400: "943.7 M", 471_859_200: "471.9 M", 235_929_600: "236.0 M",
        26_214_400: "26.2 M", 5_734_400: "5.7 M", 12_700_000: "12.7 M",
        1_049_600: "1.1 M", 28_700: "28.7 k",
    }
    for n, want in cases.items():
        assert format_count(n) == want, n


def test_format_weight_memory():
    assert format_weight_memory(904_632) == "904 kB"
    assert format_weight_memory(466_000_000) == "466 MB"
    assert format_weight_memory(500) == "500 B"


def test_table_contains_totals_row():
    text = format_table(analyze(build_preset("cnn-cnp")))
    assert "452 k" in text and "1239 M" in text
    assert "904 kB" in text


def test_json_dict_schema_fields():
    d = to_json_dict(analyze(build_preset("cnn-c")), arch="cnn-c")
    assert d["totals"]["total_macs"] == 2_654_620_000
    assert d["totals"]["total_params"] == 452_316
    assert d["weight_bytes"] == 904_632
    assert {"layer", "params", "macs"} == set(d["rows"][0])


def test_csv_row_count():
    r = analyze(build_preset("cnn-cnp"))
    lines = to_csv(r).strip().splitlines()
    assert len(lines) == 1 + len(r.rows) + 1  # header + rows + total
    assert lines[-1] == f"total,{r.total_params},{r.total_macs}"


def test_runtime_vs_ledger_on_real_forward():
    """The optimized forward pass agrees with counted MACs via identical outputs."""
    spec = SMALL_SPECS[0]
    weights = init_weights(spec, seed=0)
    x = Tensor(np.random.default_rng(0).standard_normal(spec.input_shape, dtype=np.float32))
    probs = forward(spec, weights, x)
    assert abs(probs.sum() - 1.0) < 1e-6
