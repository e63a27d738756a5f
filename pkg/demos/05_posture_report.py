"""Posture metrics: the normal stance vs. the metatarsal-callus stance.

Produces the clinical two-column report for both bundled scenes and prints
them side by side: the calloused foot carries more than half the load and
its metatarsal pressures sit far above the healthy foot's.

Run:  python3 demos/05_posture_report.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")

from pressmat import MatSimulator, build_curve, full_report, process_capture, sweep_samples
from pressmat.metrics import MetricsReport
from pressmat.pipeline import save_png
from pressmat.scenes import callus_stance, demo_region_set, normal_stance
from pressmat.store import render_table

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

curve = build_curve(sweep_samples())
regions = demo_region_set()


def capture_report(scene, name, columns=("Left", "Right")):
    sim = MatSimulator(scene, seed=11)
    field = process_capture(list(sim.run(50)), curve)
    save_png(field, out_dir / f"05_{name}.png")
    return full_report(field, regions, column_labels=columns), field


normal, _ = capture_report(normal_stance(), "normal")
print("Normal stance")
print(render_table(normal))
print()

callus, _ = capture_report(callus_stance(), "callus")
# The hotspot sits on the right foot; relabel the columns accordingly.
callus = MetricsReport(left=callus.right, right=callus.left,
                       resultant_cop_cm=callus.resultant_cop_cm,
                       contact_threshold_kpa=callus.contact_threshold_kpa,
                       column_labels=("Calloused Foot", "Normal Foot"))
print("Callus stance (right foot affected)")
print(render_table(callus))

met_delta = callus.left.metatarsal.mean_kpa - callus.right.metatarsal.mean_kpa
print(f"\ncalloused-foot metatarsal mean is {met_delta:.0f} kPa above the healthy foot,")
print(f"and it carries {callus.left.load_pct:.1f}% of the total load.")
print(f"resultant centre of pressure: {callus.resultant_cop_cm[0]:.1f}, "
      f"{callus.resultant_cop_cm[1]:.1f} cm (leans toward the calloused side)")
print(f"\nheatmaps written to {out_dir}/05_normal.png and 05_callus.png")
