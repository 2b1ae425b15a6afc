#!/usr/bin/env python3
"""Regenerates the bundled material mode banks and example scenarios.

The .mir banks are synthetic but physically plausible: stiff-object modal
series with damping that grows with frequency, wood lossier than ceramic.
Run from the repository root:

    python3 tools/gen_material_irs.py
"""

import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
IR_DIR = ROOT / "assets" / "irs"
SCENARIO_DIR = ROOT / "assets" / "scenarios"

T0 = 0.5
N_MODES = 50

# f0, frequency stretch, amplitude rolloff, decay offset, decay-vs-f slope
MATERIALS = {
    "basswood": dict(f0=150.0, stretch=1.035, rolloff=0.45, d0=28.0, dslope=0.045, seed=101),
    "poplar": dict(f0=170.0, stretch=1.030, rolloff=0.40, d0=24.0, dslope=0.040, seed=102),
    "ceramic": dict(f0=620.0, stretch=1.020, rolloff=0.30, d0=7.0, dslope=0.010, seed=103),
    "pvc": dict(f0=240.0, stretch=1.045, rolloff=0.55, d0=42.0, dslope=0.055, seed=104),
    "poplar_rod": dict(f0=310.0, stretch=1.040, rolloff=0.50, d0=30.0, dslope=0.040, seed=105),
    "ceramic_ball": dict(f0=900.0, stretch=1.030, rolloff=0.35, d0=9.0, dslope=0.012, seed=106),
}


def make_bank(spec, rng, detune=1.0):
    modes = []
    f = spec["f0"] * detune
    k = 1.0
    while len(modes) < N_MODES and f < 18000.0:
        amp = (spec["f0"] / f) ** spec["rolloff"] * rng.uniform(0.55, 1.0)
        dec = (spec["d0"] + spec["dslope"] * f) * rng.uniform(0.8, 1.25)
        modes.append((f, amp, dec))
        k += 1.0
        f *= spec["stretch"] * rng.uniform(1.01, 1.10)
    return modes


def write_mir(path, modes):
    lines = [f"MIR1 t0={T0:.17g}"]
    for f, a, d in sorted(modes):
        lines.append(f"{f:.17g} {a:.17g} {d:.17g}")
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(modes)} modes)")


SURFACES = {
    "basswood": dict(exponent=1.6, rms=2.5e-5),
    "poplar": dict(exponent=1.8, rms=1.8e-5),
    "ceramic": dict(exponent=2.2, rms=6e-6),
}

SCRAPERS = {
    "pvc": dict(mass=0.03, eta=0.5),
    "poplar_rod": dict(mass=0.05, eta=0.9),
}

MOTIONS = {
    "slow_back_and_forth": dict(kind="back_and_forth", duration=2.0, extent=0.15, speed=1.0),
    "fast_back_and_forth": dict(kind="back_and_forth", duration=2.0, extent=0.15, speed=2.2),
    "circular": dict(kind="circular", duration=2.0, extent=0.25, speed=1.0),
    "short_single": dict(kind="single_line_short", duration=0.8, extent=0.08, speed=1.0),
    "long_single": dict(kind="single_line_long", duration=2.0, extent=0.35, speed=1.0),
}

SCRAPE_TEMPLATE = """\
# Experiment-1 style cell: {scraper} scraper, {surface} surface, {motion} motion.
[scenario]
kind = scrape
seed = {seed}

[surface]
generator = fractal
nx = 192
ny = 192
dx = 5.6e-6
spectral_exponent = {exponent}
rms_height = {rms}

[motion]
kind = {motion_kind}
duration = {duration}
extent = {extent}
speed_scale = {speed}

[shm]
mass = 0.12
omega = 7.0
amplitude = {amplitude}
angle = 0.35
friction = 0.3

[scrape]
scraper_mass = {scraper_mass}

[ir]
surface_anchors = ../irs/{surface}_a.mir@0.0, ../irs/{surface}_b.mir@1.0
scraper_ir = ../irs/{scraper}.mir
eta = {eta}
"""

ROLL_TEMPLATE = """\
# Ceramic ball rolling {direction} a gently inclined poplar plank.
[scenario]
kind = roll
seed = {seed}

[surface]
generator = fractal
nx = 192
ny = 192
dx = 5.6e-6
spectral_exponent = 1.8
rms_height = 1.2e-5

[roll]
radius = 0.02
com_offset = 4e-4
mass = 0.08
incline = {incline}
initial_omega = 30.0
duration = 2.0
spring_k = 5e6

[ir]
surface_anchors = ../irs/poplar_a.mir@0.0, ../irs/poplar_b.mir@1.0
ball_ir = ../irs/ceramic_ball.mir
eta = 0.35
"""


def main():
    IR_DIR.mkdir(parents=True, exist_ok=True)
    SCENARIO_DIR.mkdir(parents=True, exist_ok=True)

    for name, spec in MATERIALS.items():
        rng = random.Random(spec["seed"])
        if name in SURFACES:
            write_mir(IR_DIR / f"{name}_a.mir", make_bank(spec, rng))
            write_mir(IR_DIR / f"{name}_b.mir", make_bank(spec, rng, detune=1.06))
        else:
            write_mir(IR_DIR / f"{name}.mir", make_bank(spec, rng))

    seed = 1000
    for scraper, sparams in SCRAPERS.items():
        for surface, surf in SURFACES.items():
            for motion, mparams in MOTIONS.items():
                text = SCRAPE_TEMPLATE.format(
                    scraper=scraper,
                    surface=surface,
                    motion=motion,
                    seed=seed,
                    exponent=surf["exponent"],
                    rms=surf["rms"],
                    motion_kind=mparams["kind"],
                    duration=mparams["duration"],
                    extent=mparams["extent"],
                    speed=mparams["speed"],
                    amplitude=mparams["extent"] / 2.0,
                    scraper_mass=sparams["mass"],
                    eta=sparams["eta"],
                )
                path = SCENARIO_DIR / f"exp1_{scraper}_{surface}_{motion}.srs"
                path.write_text(text)
                print(f"wrote {path}")
                seed += 1

    for direction, incline, roll_seed in (("down", -0.06, 2000), ("up", 0.06, 2001)):
        path = SCENARIO_DIR / f"roll_ceramic_poplar_{direction}hill.srs"
        path.write_text(ROLL_TEMPLATE.format(direction=direction, incline=incline,
                                             seed=roll_seed))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
