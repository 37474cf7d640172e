"""
Efficiency roll-off check
Simulates single-spot power across the lateral and axial FoV and compares
it with the regional efficiency model.
"""
import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pandas as pd

from holopatch.artifacts import atomic_write_bytes
from holopatch.core.settings import OUT_DIR
from holopatch.models import OpticalConfig

from evaluation.rolloff import axial_profile, lateral_positions, lateral_profile


def plot_profiles(df: pd.DataFrame, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for ax, (axis, group) in zip(axes, df.groupby("axis", sort=False)):
        ax.plot(group["position_fov"], group["predicted"], "-", label="model")
        ax.plot(group["position_fov"], group["simulated"], "o", label="simulated")
        ax.set_xlabel(f"{axis} / FoV")
        ax.set_ylabel("relative spot power")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def main():
    parser = argparse.ArgumentParser(description="Simulated vs predicted efficiency roll-off")
    parser.add_argument("--F", type=int, default=64, help="SLM pixels per side")
    parser.add_argument("--points", type=int, default=9, help="positions per axis")
    parser.add_argument("--sampling", type=int, default=5, help="simulation pixels per SLM pixel")
    parser.add_argument("--out", default=os.path.join(OUT_DIR, "rolloff"))
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args()

    cfg = OpticalConfig(pixel_count=args.F)
    print(f"🔬 Roll-off profiles at F={args.F}, s={args.sampling}")
    df = pd.concat(
        [
            lateral_profile(cfg, lateral_positions(cfg, args.points), s=args.sampling),
            axial_profile(cfg, count=args.points, s=args.sampling),
        ],
        ignore_index=True,
    )
    for _, row in df.iterrows():
        print(
            f"  {row['axis']} {row['position_fov']:+.3f} FoV  simulated {row['simulated']:.4f}"
            f"  model {row['predicted']:.4f}  ({row['rel_error']:.1%})"
        )
    worst = df[df["axis"] == "x"]["rel_error"].max()
    print(f"{'✅' if worst < 0.05 else '❌'} worst lateral deviation {worst:.2%}")

    path = atomic_write_bytes(os.path.join(args.out, "rolloff.csv"), df.to_csv(index=False).encode("utf-8"))
    print(f"📁 Profiles saved: {path}")
    if args.plot:
        plot_path = os.path.join(args.out, "rolloff.png")
        plot_profiles(df, plot_path)
        print(f"📊 Plot saved: {plot_path}")


if __name__ == "__main__":
    main()
