"""Plot one or more trace.csv files written by `flatsmc run` / `flatsmc compare`.

usage: python docs/plot_trace.py out/cmp/trace_controller.csv out/cmp/trace_baseline.csv [-o fig.png]
"""
import argparse

import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("traces", nargs="+")
    ap.add_argument("-o", "--output")
    args = ap.parse_args()

    fig, ax = plt.subplots(2, 2, figsize=(11, 7))
    for path in args.traces:
        df = pd.read_csv(path)
        ax[0, 0].plot(df.x, df.y, label=path)
        ax[0, 1].plot(df.t, df.ex, label=f"{path} ex")
        ax[0, 1].plot(df.t, df.ey, "--", label=f"{path} ey")
        ax[1, 0].plot(df.t, df.v_sat, label=path)
        ax[1, 1].plot(df.t, df.w_sat, label=path)
    df = pd.read_csv(args.traces[0])
    ax[0, 0].plot(df.gx, df.gy, "k:", label="reference")
    ax[0, 0].set_aspect("equal")
    ax[0, 0].set_title("path")
    ax[0, 1].set_title("tracking error [m]")
    ax[1, 0].set_title("v [m/s]")
    ax[1, 1].set_title("w [rad/s]")
    for a in ax.flat:
        a.legend(fontsize=7)
        a.grid(alpha=0.3)
    fig.tight_layout()
    if args.output:
        fig.savefig(args.output, dpi=120)
    else:
        plt.show()


if __name__ == "__main__":
    main()
