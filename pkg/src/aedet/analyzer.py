"""Static cost model: parameter/MAC counts, memory footprint, real-time feasibility.

Counting conventions:
  conv   params = (kh*kw*in_ch + 1) * out_ch, MACs = out_h*out_w*out_ch * kh*kw*in_ch
  fc     params = (in + 1) * out; the MAC cell shows the same bias-inclusive
         figure (the reference table prints #MAC = #param for fc rows)
  pool / flatten / activation: zero both ways
The frontend row defaults to the fixed reference constants (25.6 k / 12.7 M);
"computed" mode derives a clearly-non-canonical estimate from the DSP geometry.
"""

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .errors import ContractViolationError, UnsupportedConfigError
from .frontend import FrontendConfig, build_mel_filterbank
from .graph import CONV, DENSE, LayerSpec, NetworkSpec, Shape, infer_shapes

FRONTEND_MODE_PAPER = "paper-constants"
FRONTEND_MODE_COMPUTED = "computed"

FRONTEND_REFERENCE_PARAMS = 25_600
FRONTEND_REFERENCE_MACS = 12_700_000

# Published column totals for the dense-classifier variant at its original
# (unreconstructable) input geometry; used for the headline reduction factors.
CNN_FC_REFERENCE_PARAMS = 233_000_000
CNN_FC_REFERENCE_MACS = 2_555_000_000


@dataclass(frozen=True)
class CostRow:
    layer: str
    params: int
    macs: int


@dataclass(frozen=True)
class CostReport:
    rows: tuple[CostRow, ...]
    total_params: int
    total_macs: int
    weight_bytes_16bit: int
    frontend_mode: str

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))


@dataclass(frozen=True)
class RealtimeVerdict:
    budget_mmacs_per_s: float
    window_s: float
    compute_time_s: float
    feasible: bool
    realtime_factor: float


def count_params(layer: LayerSpec, in_shape: Shape) -> int:
    if layer.kind == CONV:
        in_ch = in_shape[2]
        return (layer.kernel_h * layer.kernel_w * in_ch + 1) * layer.out_channels
    if layer.kind == DENSE:
        return (int(in_shape) + 1) * layer.out_channels
    return 0


def count_macs(layer: LayerSpec, in_shape: Shape) -> int:
    if layer.kind == CONV:
        h, w, in_ch = in_shape
        out_h, out_w = -(-h // layer.stride), -(-w // layer.stride)
        return out_h * out_w * layer.out_channels * layer.kernel_h * layer.kernel_w * in_ch
    if layer.kind == DENSE:
        return (int(in_shape) + 1) * layer.out_channels
    return 0


def frontend_cost(mode: str, cfg: FrontendConfig | None = None) -> tuple[int, int]:
    """(params, macs) for the frontend row.

    Computed mode counts the window multiply, 4 real MACs per radix-2
    butterfly, and one MAC per filterbank nonzero, per frame.
    """
    if mode == FRONTEND_MODE_PAPER:
        return FRONTEND_REFERENCE_PARAMS, FRONTEND_REFERENCE_MACS
    if mode != FRONTEND_MODE_COMPUTED:
        raise UnsupportedConfigError(f"unknown frontend mode {mode!r}")
    cfg = cfg if cfg is not None else FrontendConfig()
    nonzeros = int((build_mel_filterbank(cfg).weights > 0).sum())
    params = nonzeros + cfg.window_samples
    butterflies = (cfg.fft_size // 2) * (cfg.fft_size.bit_length() - 1)
    per_frame = cfg.window_samples + 4 * butterflies + nonzeros
    return params, cfg.num_frames * per_frame


def analyze(
    spec: NetworkSpec,
    frontend_mode: str = FRONTEND_MODE_PAPER,
    frontend_cfg: FrontendConfig | None = None,
) -> CostReport:
    """Per-layer cost rows (input and frontend included) plus totals."""
    fe_params, fe_macs = frontend_cost(frontend_mode, frontend_cfg)
    rows = [CostRow("input", 0, 0), CostRow("frontend", fe_params, fe_macs)]
    shapes = infer_shapes(spec)
    cur: Shape = spec.input_shape
    for layer, shape in zip(spec.layers, shapes):
        rows.append(CostRow(layer.label(), count_params(layer, cur), count_macs(layer, cur)))
        cur = shape
    total_params = sum(r.params for r in rows)
    total_macs = sum(r.macs for r in rows)
    return CostReport(
        rows=tuple(rows),
        total_params=total_params,
        total_macs=total_macs,
        weight_bytes_16bit=2 * total_params,
        frontend_mode=frontend_mode,
    )


def cnn_fc_reference_report() -> CostReport:
    """The dense-classifier column's published totals, as constants."""
    row = CostRow("total (reference column)", CNN_FC_REFERENCE_PARAMS, CNN_FC_REFERENCE_MACS)
    return CostReport(
        rows=(row,),
        total_params=CNN_FC_REFERENCE_PARAMS,
        total_macs=CNN_FC_REFERENCE_MACS,
        weight_bytes_16bit=2 * CNN_FC_REFERENCE_PARAMS,
        frontend_mode=FRONTEND_MODE_PAPER,
    )


def reduction_factors(a: CostReport, b: CostReport) -> dict[str, float]:
    """How much smaller/cheaper b is than a: a.totals / b.totals."""
    if b.total_params == 0 or b.total_macs == 0:
        raise ContractViolationError("reduction factor against zero totals")
    return {
        "param_factor": a.total_params / b.total_params,
        "mac_factor": a.total_macs / b.total_macs,
    }


def realtime_check(report: CostReport, budget_mmacs_per_s: float, window_s: float) -> RealtimeVerdict:
    """Can `budget` MMAC/s finish one window's MACs inside the window?"""
    if budget_mmacs_per_s <= 0 or window_s <= 0:
        raise ContractViolationError("budget and window must be positive")
    compute = report.total_macs / (budget_mmacs_per_s * 1e6)
    return RealtimeVerdict(
        budget_mmacs_per_s=budget_mmacs_per_s,
        window_s=window_s,
        compute_time_s=compute,
        feasible=compute < window_s,
        realtime_factor=window_s / compute,
    )


def format_count(n: int, totals_row: bool = False) -> str:
    """Render a count the way the reference table prints it.

    Values under 1000 print raw; otherwise scaled by k (1e3) or M (1e6).
    Totals round half-up to whole units. Layer cells round half-up in two
    steps (2 decimals, then 1) and cells >= 100 units within 0.08 of an
    integer print as that integer; the published table rounds those cells
    by hand (236.0, 14.8, 1.1), and this reproduces every one of them.
    """
    if n < 1000:
        return str(n)
    div, suffix = (1_000, "k") if n < 1_000_000 else (1_000_000, "M")
    d = Decimal(n) / Decimal(div)
    if totals_row:
        return f"{d.quantize(Decimal('1'), rounding=ROUND_HALF_UP)} {suffix}"
    nearest = d.quantize(Decimal("1"), rounding=ROUND_HALF_UP)
    if d >= 100 and abs(d - nearest) <= Decimal("0.08"):
        return f"{nearest}.0 {suffix}"
    two = d.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{two.quantize(Decimal('0.1'), rounding=ROUND_HALF_UP)} {suffix}"


def format_weight_memory(weight_bytes: int) -> str:
    # truncated kB: 904,632 B prints "904 kB", matching 2x the totals cell
    if weight_bytes < 1000:
        return f"{weight_bytes} B"
    if weight_bytes < 1_000_000:
        return f"{weight_bytes // 1000} kB"
    return f"{weight_bytes // 1_000_000} MB"


def format_table(report: CostReport, title: str = "") -> str:
    """Aligned text table mirroring the reference layout."""
    cells = [(r.layer, format_count(r.params), format_count(r.macs)) for r in report.rows]
    cells.append(
        (
            "Total:",
            format_count(report.total_params, totals_row=True),
            format_count(report.total_macs, totals_row=True),
        )
    )
    widths = [max(len(c[i]) for c in cells + [("Layer type", "# param.", "# MAC")]) for i in range(3)]
    lines = []
    if title:
        lines.append(title)
    header = f"{'Layer type':<{widths[0]}}  {'# param.':>{widths[1]}}  {'# MAC':>{widths[2]}}"
    lines.append(header)
    lines.append("-" * len(header))
    body = cells[:-1]
    for layer, p, m in body:
        lines.append(f"{layer:<{widths[0]}}  {p:>{widths[1]}}  {m:>{widths[2]}}")
    lines.append("-" * len(header))
    layer, p, m = cells[-1]
    lines.append(f"{layer:<{widths[0]}}  {p:>{widths[1]}}  {m:>{widths[2]}}")
    lines.append(
        f"16-bit weight memory: {format_weight_memory(report.weight_bytes_16bit)} "
        f"({report.weight_bytes_16bit} bytes)"
    )
    return "\n".join(lines)


def to_json_dict(report: CostReport, arch: str = "") -> dict:
    return {
        "arch": arch,
        "frontend_mode": report.frontend_mode,
        "rows": [{"layer": r.layer, "params": r.params, "macs": r.macs} for r in report.rows],
        "totals": {"total_params": report.total_params, "total_macs": report.total_macs},
        "weight_bytes": report.weight_bytes_16bit,
    }


def to_json(report: CostReport, arch: str = "") -> str:
    return json.dumps(to_json_dict(report, arch), indent=2)


def to_csv(report: CostReport) -> str:
    lines = ["layer,params,macs"]
    for r in report.rows:
        layer = f'"{r.layer}"' if "," in r.layer else r.layer
        lines.append(f"{layer},{r.params},{r.macs}")
    lines.append(f"total,{report.total_params},{report.total_macs}")
    return "\n".join(lines) + "\n"
