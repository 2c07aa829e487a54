"""Fronthaul scalars per coherence block versus the number of UEs."""

import sys

from _common import LABELS, cli_args, parser, pyplot, read_series

from cfmaduo import cli


def main():
    p = parser(__doc__, "fronthaul")
    p.add_argument("--k-grid", default="20,40,60,80,100")
    args = p.parse_args()
    code = cli.main(cli_args(args, "fronthaul", ["--k-grid", args.k_grid]))
    if code or args.no_plot:
        return code
    plt = pyplot()
    if plt is None:
        return 0
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme, (K, scalars) in read_series(args.out / "fronthaul.csv", "K", "mean_scalars").items():
        ax.plot(K, scalars, marker="o", label=LABELS[scheme])
    ax.set_xlabel("number of UEs K")
    ax.set_ylabel("complex scalars per coherence block")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out / "fronthaul.png", dpi=150)
    print(f"wrote {args.out / 'fronthaul.png'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
