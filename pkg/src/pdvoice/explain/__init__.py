from .report import (
    ShapSummary,
    WaterfallRow,
    select_background,
    summary_stats,
    summary_svg,
    waterfall_export,
    waterfall_svg,
    write_waterfall_csv,
)
from .shapley import Attribution, coalition_values, exact_shapley, kernel_shap, shapley_kernel_weight

__all__ = [
    "Attribution",
    "ShapSummary",
    "WaterfallRow",
    "coalition_values",
    "exact_shapley",
    "kernel_shap",
    "select_background",
    "shapley_kernel_weight",
    "summary_stats",
    "summary_svg",
    "waterfall_export",
    "waterfall_svg",
    "write_waterfall_csv",
]
