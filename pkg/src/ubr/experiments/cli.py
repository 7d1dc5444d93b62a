"""ubr: reproduce the figure experiments and analyze recordings.

Usage::

    ubr list-presets
    ubr preset fig1b --seed 0 --reps 5 --out runs
    ubr export-config fig1b > fig1b.ini
    ubr run fig1b.ini --out runs
    ubr analyze solo.wav --channel 0 --start 13 --duration 1.2 --out runs
    ubr gnuplot runs/fig1b > fig1b.gp

Exit codes: 0 success, 1 validation, 2 I/O, 3 analysis failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import __version__
from ..errors import BandError, ConfigError, ParameterError, WavError
from .config import to_ini
from .presets import PRESETS, get_preset
from .runner import analyze_wav, run_config, run_preset

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_ANALYSIS = 0, 1, 2, 3


def parse_band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"band must look like LO:HI, got {text!r}") from None
    if not 0 < lo < hi:
        raise argparse.ArgumentTypeError(f"band needs 0 < LO < HI, got {text!r}")
    return lo, hi


def format_summary(summary: dict) -> str:
    """Human-readable summary; the index is only shown when UBR is present."""
    agg = summary["aggregate"]
    lines = [f"{summary['experiment']} ({summary['kind']}), seed {summary['seed']}, {agg['reps']} rep(s)"]
    for rec in summary["repetitions"]:
        r = rec["ubr_ratio"]
        line = f"  rep {rec['rep']:2d}: R = {r['value']:.3e}"
        if not r["ubr_detected"]:
            line += "  (no UBR)"
        elif rec["fit"] is not None:
            f = rec["fit"]
            line += f"  gamma = {f['index']:+.3f}  r2 = {f['r_squared']:.3f}"
        else:
            line += f"  fit failed: {rec['fit_error']}"
        lines.append(line)
    detected = agg["ubr_detected_reps"]
    if detected == 0:
        lines.append(f"  R median {agg['ratio_median']:.3e}; UBR absent, no fit reported")
    elif agg["gamma_mean"] is not None:
        s = f"  gamma mean {agg['gamma_mean']:+.3f}"
        if agg["gamma_std"] is not None:
            s += f"  std {agg['gamma_std']:.3f}  sem {agg['gamma_sem']:.3f}"
        lines.append(s + f"; R median {agg['ratio_median']:.3e}")
    return "\n".join(lines)


GNUPLOT_TEMPLATE = """\
# gnuplot script for {name}
set datafile separator ","
set logscale xy
set xlabel "frequency (Hz)"
set ylabel "power of v(t)^2"
set key top right
set title "{name}{gamma_title}"
f(x) = 10**({a}) * x**({g})
plot "{raw}" every ::1 with lines lc rgb "#bbbbbb" title "periodogram", \\
     "{binned}" every ::1 with points pt 7 ps 0.6 title "log-binned"{fit_plot}
"""


def gnuplot_script(run_dir: Path, rep: int = 0) -> str:
    summary = json.loads((run_dir / "summary.json").read_text())
    rec = summary["repetitions"][rep]
    rep_dir = run_dir / f"rep_{rep:02d}"
    fit = rec["fit"]
    if fit is not None:
        lo, hi = fit["band"]
        fit_plot = f', \\\n     [{lo}:{hi}] f(x) with lines lw 2 title "fit"'
        a, g = fit["log10_amplitude"], fit["index"]
        gamma_title = f", gamma = {g:.3f}"
    else:
        fit_plot, a, g, gamma_title = "", 0.0, 0.0, ""
    return GNUPLOT_TEMPLATE.format(
        name=summary["experiment"],
        raw=(rep_dir / "spectrum.csv").as_posix(),
        binned=(rep_dir / "spectrum_binned.csv").as_posix(),
        a=a, g=g, gamma_title=gamma_title, fit_plot=fit_plot,
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ubr", description="Ultra-low-frequency beat resonance experiments.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory (nothing is written if omitted)")
    common.add_argument("--band", type=parse_band, default=None, metavar="LO:HI", help="fit band in Hz")
    common.add_argument("--window", choices=("none", "hann"), default=None)
    common.add_argument("--json", action="store_true", help="print the summary record as JSON")

    synth = argparse.ArgumentParser(add_help=False, parents=[common])
    synth.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    synth.add_argument("--reps", type=int, default=None, help="repetitions (presets default to 5)")
    synth.add_argument("--emit-wav", action="store_true", default=None, help="also write signal.wav per repetition")
    synth.add_argument("--jobs", type=int, default=1, help="worker processes for repetitions")

    p = sub.add_parser("preset", parents=[synth], help="run a figure preset")
    p.add_argument("name", choices=sorted(PRESETS), metavar="PRESET")
    p = sub.add_parser("run", parents=[synth], help="run an INI config file")
    p.add_argument("config", type=Path)
    p = sub.add_parser("analyze", parents=[common], help="analyze one channel of a WAV file")
    p.add_argument("wav", type=Path)
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--start", type=float, default=0.0, help="clip start (s)")
    p.add_argument("--duration", type=float, default=None, help="clip length (s); default to the end")
    sub.add_parser("list-presets", help="list preset ids and their parameters")
    p = sub.add_parser("export-config", help="print a preset as an INI config")
    p.add_argument("name", choices=sorted(PRESETS), metavar="PRESET")
    p = sub.add_parser("gnuplot", help="print a gnuplot script for a run directory")
    p.add_argument("run_dir", type=Path)
    p.add_argument("--rep", type=int, default=0)
    return ap


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "list-presets":
        for name, cfg in PRESETS.items():
            print(f"{name:6s} {cfg.kind:15s} {cfg.parameters_note}")
        return EXIT_OK
    if cmd == "export-config":
        sys.stdout.write(to_ini(get_preset(args.name)))
        return EXIT_OK
    if cmd == "gnuplot":
        sys.stdout.write(gnuplot_script(args.run_dir, args.rep))
        return EXIT_OK

    if cmd != "analyze" and args.reps is not None and args.reps < 1:
        raise ConfigError("reps must be >= 1", field="reps")
    if cmd == "preset":
        summary = run_preset(
            args.name, seed=args.seed, out=args.out, reps=args.reps, jobs=args.jobs,
            band=args.band, window=args.window, emit_wav=args.emit_wav,
        )
    elif cmd == "run":
        summary = run_config(
            args.config, out=args.out, jobs=args.jobs,
            seed=args.seed, reps=args.reps, band=args.band, window=args.window, emit_wav=args.emit_wav,
        )
    else:
        summary = analyze_wav(
            args.wav, args.channel, args.start, args.duration, args.band, args.window or "none", args.out
        )
    print(json.dumps(summary, indent=2, default=str) if args.json else format_summary(summary))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, ParameterError, KeyError) as exc:
        print(f"ubr: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, WavError) as exc:
        print(f"ubr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BandError as exc:
        print(f"ubr: analysis failed: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
