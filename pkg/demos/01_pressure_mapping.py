"""Pressure mapping basics.

Settle the built-in 80 kgf supine body on the mattress at neutral actuator
extensions, then walk through the mapping arithmetic: total weight,
thresholded support map, pressed-cell count, and the uniform-support
target each contact point should carry.
"""

from bedsim import (
    ActuatorBank,
    PlantConfig,
    binarize,
    get_profile,
    pressed_count,
    solve_equilibrium,
    summarize,
    total_weight,
)
from bedsim.runner import render_heatmap

profile = get_profile("adult_supine_80")
bank = ActuatorBank.at_extension(profile.grid, 20.0)
sink, forces = solve_equilibrium(profile, bank, PlantConfig())

print(f"body: {profile.name}, {profile.weight:g} kgf")
print(f"sink depth at neutral extensions: {sink:.2f} mm\n")
print("pressure map (kgf):")
print(render_heatmap(forces.values))

print(f"\ntotal weight from the map: {total_weight(forces):.4f} kgf")
support = binarize(forces, threshold=0.05)
print(f"pressed cells (reading >= 0.05 kgf): {pressed_count(support)}")

summary = summarize(forces, threshold=0.05)
print(
    f"uniform support target: {summary.total_weight:g} / {summary.pressed_count} "
    f"= {summary.target:.4f} kgf per cell (displays as {summary.target:.2f})"
)
