"""
Where the power goes, and how the analog solver compares with a digital one.
"""

from amc_mimo.costmodel import (
    DigitalReference,
    PowerBudget,
    complexity_table,
    component_counts,
    latency_report,
    power_report,
)

lat = latency_report(10.0)
rep = power_report(PowerBudget(), component_counts(16, 128), 0.1, lat.amc_latency_ns,
                   DigitalReference())
for row in rep.rows:
    print(f"{row.name:14s} {row.total_mw:7.2f} mW  {100 * row.fraction:5.1f}%")
print(f"total {rep.total_mw:.1f} mW, {rep.energy_nj:.2f} nJ per precoding, "
      f"{rep.efficiency_ratio:.0f}x less energy and {rep.speedup:.0f}x faster than digital")
print("\ncomplexity (scheme, INV, MVM):")
for row in complexity_table(16, 128):
    print(" ", row)
