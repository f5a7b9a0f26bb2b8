"""Command line benchmark harness.

Subcommands: simulate (one config), sweep (vary one axis), bench (latency
percentiles), oracle-check (small-grid correctness gate). Exit codes: 0 on
success, 2 on configuration errors, 3 when oracle-check fails.
"""

import argparse
import sys

from . import harness


def _add_common(p):
    p.add_argument("--m", type=int, default=32, help="delay bins (default 32)")
    p.add_argument("--n", type=int, default=32, help="Doppler bins (default 32)")
    p.add_argument("--delta-f", type=float, default=30e3,
                   help="subcarrier spacing in Hz (default 30000)")
    p.add_argument("--mod", choices=harness.MODULATIONS, default="qpsk")
    p.add_argument("--snr-db", type=float, default=25.0,
                   help="SNR in dB; 'inf' disables noise")
    p.add_argument("--nu-max", type=float, default=100.0,
                   help="max Doppler in Hz (default 100)")
    p.add_argument("--theta", type=float, default=0.08,
                   help="tap detection threshold relative to the peak")
    p.add_argument("--iters", type=int, default=10,
                   help="conjugate-gradient iterations (default 10)")
    p.add_argument("--equalizer", choices=harness.EQUALIZERS, default="ss-cga")
    p.add_argument("--packets", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None, help="CSV output path")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--deadline-frames", type=float, default=2.0,
                   help="deadline in frame durations (default 2)")


def _config_from(args):
    return harness.SimConfig(
        m=args.m, n=args.n, delta_f=args.delta_f, mod=args.mod,
        snr_db=args.snr_db, nu_max_hz=args.nu_max, theta=args.theta,
        iters=args.iters, equalizer=args.equalizer, packets=args.packets,
        seed=args.seed, deadline_frames=args.deadline_frames,
        workers=args.workers,
    )


def _print_row(row):
    print(
        f"  m={row['m']} n={row['n']} mod={row['mod']} eq={row['equalizer']} "
        f"snr={row['snr_db']} dB nu_max={row['nu_max_hz']} Hz "
        f"theta={row['theta']}"
    )
    print(
        f"  BER {row['ber_mean']:.3e} ({row['bit_errors']}/{row['bits_total']} bits), "
        f"throughput {row['throughput_mbps']:.2f} Mbps"
    )
    print(
        f"  latency us: median {row['lat_median_us']:.1f}, "
        f"p99 {row['lat_p99_us']:.1f}, p99.9 {row['lat_p999_us']:.1f}; "
        f"deadline {row['deadline_us']:.1f} us met "
        f"{100 * row['deadline_met_rate']:.2f}%"
    )


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ddlink",
        description="Delay-Doppler link simulator and receiver benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one configuration")
    _add_common(p_sim)

    p_sweep = sub.add_parser("sweep", help="sweep one axis")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", required=True,
                         choices=["snr", "nu-max", "m", "theta"])
    p_sweep.add_argument("--values", required=True, nargs="+", type=float)

    p_bench = sub.add_parser("bench", help="latency percentiles, single worker")
    _add_common(p_bench)

    p_oracle = sub.add_parser("oracle-check", help="small-grid correctness gate")
    p_oracle.add_argument("--perturb", type=float, default=0.0,
                          help="inject a coefficient perturbation (test mode)")

    args = parser.parse_args(argv)

    if args.command == "oracle-check":
        ok, lines = harness.oracle_check(perturb=args.perturb)
        for line in lines:
            print(line)
        print("oracle-check:", "OK" if ok else "FAILED")
        return 0 if ok else 3

    try:
        cfg = _config_from(args)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    if args.command == "simulate":
        results = harness.run_packets(cfg)
        row = harness.aggregate(cfg, results)
        failed = sum(r.failed for r in results)
        print(f"simulate: {len(results)} packets ({failed} failed)")
        _print_row(row)
        if args.out:
            harness.write_csv(args.out, [row])
        return 0

    if args.command == "sweep":
        axis = args.axis.replace("-", "_")
        try:
            rows = harness.run_sweep(cfg, axis, args.values)
        except ValueError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return 2
        for value, row in zip(args.values, rows):
            print(f"sweep {args.axis}={value}:")
            _print_row(row)
        if args.out:
            harness.write_csv(args.out, rows)
        return 0

    if args.command == "bench":
        stats, results = harness.benchmark_latency(cfg, cfg.packets)
        print(f"bench: {len(results)} packets, receiver-side timing")
        print(
            f"  median {stats.median_s * 1e6:.1f} us, "
            f"p99 {stats.p99_s * 1e6:.1f} us, "
            f"p99.9 {stats.p999_s * 1e6:.1f} us, "
            f"max {stats.max_s * 1e6:.1f} us"
        )
        print(
            f"  deadline {cfg.deadline_s * 1e6:.1f} us, "
            f"met {100 * stats.met_rate:.2f}%"
        )
        if args.out:
            harness.write_csv(args.out, [harness.aggregate(cfg, results)])
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
