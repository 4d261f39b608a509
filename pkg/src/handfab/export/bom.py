"""Bill-of-materials / cost report for one glove."""
from __future__ import annotations

import csv
import io

# Default per-glove unit costs (USD).
DEFAULT_COSTS = {
    "FPCBs": 24.93,
    "Velostat": 2.50,
    "Silicone rubber": 29.20,
    "Fabric": 4.62,
    "Readout Circuit": 64.66,
    "Flex cables": 0.79,
}


def bom_lines(costs: dict[str, float] | None = None
              ) -> list[tuple[str, float]]:
    table = DEFAULT_COSTS if costs is None else costs
    lines = [(item, float(cost)) for item, cost in table.items()]
    lines.append(("Total", round(sum(c for _, c in lines), 2)))
    return lines


def bom_text(costs: dict[str, float] | None = None) -> str:
    lines = bom_lines(costs)
    width = max(len(item) for item, _ in lines)
    out = [f"{'Item':<{width}}  Cost (USD)"]
    for item, cost in lines:
        out.append(f"{item:<{width}}  {cost:10.2f}")
    return "\n".join(out) + "\n"


def bom_csv(costs: dict[str, float] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["item", "cost_usd"])
    for item, cost in bom_lines(costs):
        writer.writerow([item, f"{cost:.2f}"])
    return buf.getvalue()
