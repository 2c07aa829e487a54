"""CDF of per-UE uplink spectral efficiency for every scheme."""

import sys

from _common import LABELS, cli_args, parser, pyplot, read_series

from cfmaduo import cli


def main():
    p = parser(__doc__, "se_cdf")
    p.add_argument("--schemes", default=",".join(cli.SCHEMES))
    args = p.parse_args()
    code = cli.main(cli_args(args, "se", ["--schemes", args.schemes]))
    if code or args.no_plot:
        return code
    plt = pyplot()
    if plt is None:
        return 0
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme, (se, prob) in read_series(args.out / "se_cdf.csv", "se", "cdf").items():
        ax.step(se, prob, where="post", label=LABELS[scheme])
    ax.set_xlabel("spectral efficiency per UE [bit/s/Hz]")
    ax.set_ylabel("CDF")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out / "se_cdf.png", dpi=150)
    print(f"wrote {args.out / 'se_cdf.png'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
