"""Mean complex multiplications per UE and coherence block versus K."""

import sys

from _common import LABELS, cli_args, parser, pyplot, read_series

from cfmaduo import cli


def main():
    p = parser(__doc__, "complexity")
    p.add_argument("--k-grid", default="20,40,60,80,100")
    args = p.parse_args()
    code = cli.main(cli_args(args, "complexity", ["--k-grid", args.k_grid]))
    if code or args.no_plot:
        return code
    plt = pyplot()
    if plt is None:
        return 0
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme, (K, mults) in read_series(args.out / "complexity.csv", "K", "mean_mults").items():
        ax.semilogy(K, mults, marker="o", label=LABELS[scheme])
    ax.set_xlabel("number of UEs K")
    ax.set_ylabel("complex multiplications per UE")
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out / "complexity.png", dpi=150)
    print(f"wrote {args.out / 'complexity.png'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
