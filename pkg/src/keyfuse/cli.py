"""Command-line front end.

    keyfuse toy-model        [--kft xor] [--dist-a paper-kA] [--dist-b paper-kB] [--dist-c paper-kC]
    keyfuse sop-curve        [--p 0.1 0.5 ...] [--w 1 10 ...] [--K 60]
    keyfuse allowed-exposure [--target-sop 1e-6 ...] [--w 1 9 ...] [--K 60]
    keyfuse simulate         --p 0.3 --w 3 [--K 60] [--trials 100000] [--seed 42] [--workers 4]
    keyfuse verify-kft       --kft sub --bits 2

Every command takes ``--format {csv,json}``, ``--out PATH`` and ``--config PATH``.
A config file is a flat JSON object keyed by option name (``target_sop``,
``dist_a`` ...); flags given on the command line win over it.

Exit codes: 0 success, 1 a verification or assertion failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Any, Callable

from .errors import KeyfuseError
from .exposure_sim import ExposureModel, SessionConfig, simulate_session, z_score
from .keyspace import KeyDistribution, KeySpace, NlSource, is_leaked, min_entropy, shannon_entropy
from .kft import KftKind, KftSpec, check_laws, fuse_dist, verify_latin_square
from .sop_analytic import DEFAULT_MESSAGE_COUNT, allowed_exposure, log10_sop, sop_closed_form

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
Z_LIMIT = 4.0

PRESETS: dict[str, tuple[Fraction, ...]] = {
    "paper-kA": (Fraction(1, 3), Fraction(1, 4), Fraction(1, 6), Fraction(1, 4)),
    "paper-kB": (Fraction(0), Fraction(0), Fraction(0), Fraction(1)),
    "paper-kC": (Fraction(1, 2), Fraction(1, 5), Fraction(1, 6), Fraction(2, 15)),
}

KFT_CHOICES = {"xor": KftKind.XOR, "add": KftKind.ADD_MOD, "sub": KftKind.SUB_MOD, "permuted": KftKind.PERMUTED}


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    """Six significant digits; scientific notation below 1e-4."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x + 0.0:.6g}"


def _json_num(x):
    if isinstance(x, bool) or not isinstance(x, float):
        return x
    if not math.isfinite(x):
        return None
    return float(fmt(x))


def parse_dist(text: str) -> KeyDistribution:
    """A preset name or a comma-separated list of probabilities (fractions allowed)."""
    if text in PRESETS:
        return KeyDistribution.from_probs(PRESETS[text])
    try:
        values = [Fraction(tok.strip()) for tok in text.split(",") if tok.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse distribution {text!r}: {exc}") from None
    return KeyDistribution.from_probs(values)


def _listify(conv):
    def inner(v):
        return [conv(x) for x in (v if isinstance(v, list) else [v])]
    return inner


def _strict_int(v):
    if isinstance(v, bool) or int(v) != v:
        raise ValueError(f"expected an integer, got {v!r}")
    return int(v)


def _kft_name(v):
    if v not in KFT_CHOICES:
        raise ValueError(f"unknown KFT {v!r}")
    return v


def _fmt_name(v):
    if v not in ("csv", "json"):
        raise ValueError(f"unknown format {v!r}")
    return v


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--config", default=None, help="JSON file with option values")

    parser = argparse.ArgumentParser(prog="keyfuse", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    toy = sub.add_parser("toy-model", parents=[common], help="fuse three 2-bit keys and report entropies")
    toy.add_argument("--kft", choices=list(KFT_CHOICES), default=None)
    toy.add_argument("--bits", type=int, default=None)
    toy.add_argument("--dist-a", default=None)
    toy.add_argument("--dist-b", default=None)
    toy.add_argument("--dist-c", default=None)
    toy.add_argument("--l", type=float, default=None, help="(n;l) source threshold for the leaked column")
    toy.set_defaults(func=cmd_toy_model, defaults={
        "kft": "xor", "format": "csv", "dist_a": "paper-kA", "dist_b": "paper-kB", "dist_c": "paper-kC",
    })

    curve = sub.add_parser("sop-curve", parents=[common], help="SOP with and without fusion over a grid")
    curve.add_argument("--p", type=float, nargs="+", default=None)
    curve.add_argument("--w", type=int, nargs="+", default=None)
    curve.add_argument("--K", type=int, default=None)
    curve.set_defaults(func=cmd_sop_curve, defaults={
        "p": [round(0.05 * i, 2) for i in range(1, 20)], "w": list(range(1, 13)),
        "K": DEFAULT_MESSAGE_COUNT, "format": "csv",
    })

    allowed = sub.add_parser("allowed-exposure", parents=[common], help="exposure probability meeting a target SOP")
    allowed.add_argument("--target-sop", type=float, nargs="+", default=None)
    allowed.add_argument("--w", type=int, nargs="+", default=None)
    allowed.add_argument("--K", type=int, default=None)
    allowed.set_defaults(func=cmd_allowed_exposure, defaults={
        "target_sop": [1e-6], "w": list(range(1, 13)), "K": DEFAULT_MESSAGE_COUNT, "format": "csv",
    })

    sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo SOP cross-checked against the closed form")
    sim.add_argument("--p", type=float, default=None)
    sim.add_argument("--w", type=int, default=None)
    sim.add_argument("--K", type=int, default=None)
    sim.add_argument("--trials", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--no-fusing", dest="fusing", action="store_const", const=False, default=None)
    sim.set_defaults(func=cmd_simulate, defaults={
        "w": 1, "K": DEFAULT_MESSAGE_COUNT, "trials": 100_000, "seed": 0, "workers": 1,
        "fusing": True, "format": "json",
    })

    ver = sub.add_parser("verify-kft", parents=[common], help="Latin-square and algebraic-law checks")
    ver.add_argument("--kft", choices=list(KFT_CHOICES), default=None)
    ver.add_argument("--bits", type=int, default=None)
    ver.add_argument("--permutation", default=None, help="comma-separated permutation for --kft permuted")
    ver.set_defaults(func=cmd_verify_kft, defaults={"kft": "xor", "bits": 2, "format": "json"})
    return parser


_CONVERTERS: dict[str, Callable[[Any], Any]] = {
    "format": _fmt_name, "out": str, "kft": _kft_name, "bits": _strict_int,
    "dist_a": str, "dist_b": str, "dist_c": str, "l": float,
    "K": _strict_int, "trials": _strict_int, "seed": _strict_int, "workers": _strict_int,
    "fusing": bool, "permutation": str,
}
# options whose type differs between subcommands
_LIST_OPTIONS = {
    "sop-curve": {"p": _listify(float), "w": _listify(_strict_int)},
    "allowed-exposure": {"target_sop": _listify(float), "w": _listify(_strict_int)},
    "simulate": {"p": float, "w": _strict_int},
}


def _resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge flags over config file over per-command defaults."""
    opts = {k: v for k, v in vars(args).items() if k not in ("func", "defaults", "command", "config")}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        converters = {**_CONVERTERS, **_LIST_OPTIONS.get(args.command, {})}
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if key not in opts:
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            try:
                value = converters[key](value)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"bad value for {key!r}: {exc}") from None
            if opts[key] is None:
                opts[key] = value
    for key, value in args.defaults.items():
        if opts.get(key) is None:
            opts[key] = value
    return opts


def _kft_from(opts, space: KeySpace) -> KftSpec:
    kind = KFT_CHOICES[opts["kft"]]
    perm = None
    if opts.get("permutation"):
        if kind is not KftKind.PERMUTED:
            raise UsageError("--permutation requires --kft permuted")
        try:
            perm = tuple(int(t) for t in opts["permutation"].split(","))
        except ValueError:
            raise UsageError(f"cannot parse permutation {opts['permutation']!r}") from None
    return KftSpec(space, kind, permutation=perm)


def _emit(opts, header: list[str], rows: list[list[Any]], json_payload) -> None:
    if opts["format"] == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, float) else _plain(v) for v in row])
        text = buf.getvalue()
    else:
        text = json.dumps(json_payload, indent=2) + "\n"
    if opts.get("out"):
        with open(opts["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _plain(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return v


def _flat(header, row):
    return {h: _json_num(v) for h, v in zip(header, row)}


def cmd_toy_model(opts) -> int:
    """Fuse k_A, k_B (leaked), k_C and report each variable's distribution and entropies."""
    k_a, k_b, k_c = (parse_dist(opts[name]) for name in ("dist_a", "dist_b", "dist_c"))
    if not (k_a.space == k_b.space == k_c.space):
        raise UsageError("all three distributions must have the same length")
    space = k_a.space
    if opts.get("bits") is not None and opts["bits"] != space.bits:
        raise UsageError(f"--bits {opts['bits']} does not match {space.bits}-bit distributions")
    kft = _kft_from(opts, space)
    k_ab = fuse_dist(kft, k_a, k_b)
    k_abc = fuse_dist(kft, k_ab, k_c)
    src = NlSource(space, opts["l"]) if opts.get("l") is not None else None

    header = ["variable"] + [f"p{v}" for v in range(space.size)] + ["shannon_entropy", "min_entropy"]
    if src:
        header.append("leaked")
    rows = []
    for name, d in (("k_A", k_a), ("k_B", k_b), ("k_C", k_c), ("k_AB", k_ab), ("k_ABC", k_abc)):
        row = [name, *map(float, d.probs), shannon_entropy(d), min_entropy(d)]
        if src:
            row.append(is_leaked(d, src))
        rows.append(row)

    best_input = max(min_entropy(d) for d in (k_a, k_b, k_c))
    ok = min_entropy(k_abc) >= best_input - 1e-12
    payload = {
        "kft": opts["kft"], "bits": space.bits,
        **{f"{r[0]}_{h}": _json_num(v) for r in rows for h, v in zip(header[1:], r[1:])},
        "max_input_min_entropy": _json_num(best_input), "monotone": ok,
    }
    _emit(opts, header, rows, payload)
    if not ok:
        print("min-entropy of k_ABC fell below the best input", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_sop_curve(opts) -> int:
    header = ["p", "w", "sop_fusing", "sop_nonfusing", "log10_sop_fusing"]
    K = opts["K"]
    rows = [
        [float(p), int(w), sop_closed_form(p, K, w), sop_closed_form(p, K, 1), log10_sop(p, K, w)]
        for p in opts["p"] for w in opts["w"]
    ]
    _emit(opts, header, rows, [_flat(header, r) for r in rows])
    return EXIT_OK


def cmd_allowed_exposure(opts) -> int:
    header = ["target_sop", "w", "allowed_p"]
    K = opts["K"]
    rows = [[float(t), int(w), allowed_exposure(t, K, w)] for t in opts["target_sop"] for w in opts["w"]]
    _emit(opts, header, rows, [_flat(header, r) for r in rows])
    return EXIT_OK


def cmd_simulate(opts) -> int:
    if opts.get("p") is None:
        raise UsageError("simulate needs --p")
    cfg = SessionConfig(
        exposure=ExposureModel(opts["p"]), window_size=opts["w"], message_count=opts["K"],
        fusing_enabled=opts["fusing"], seed=opts["seed"], trials=opts["trials"],
    )
    out = simulate_session(cfg, workers=opts["workers"])
    analytic = cfg.analytic_sop()
    z = z_score(out, analytic)
    header = ["p", "w", "K", "fusing", "trials", "seed", "estimate", "std_error", "analytic", "z_score"]
    row = [float(opts["p"]), cfg.window_size, cfg.message_count, cfg.fusing_enabled, cfg.trials, cfg.seed,
           out.estimate, out.std_error, analytic, z]
    _emit(opts, header, [row], _flat(header, row))
    return EXIT_OK if abs(z) <= Z_LIMIT else EXIT_FAILED


def cmd_verify_kft(opts) -> int:
    space = KeySpace(opts["bits"])
    kft = _kft_from(opts, space)
    latin = verify_latin_square(kft)
    laws = check_laws(kft)
    header = ["kft", "bits", "latin_square", "commutative", "associative"]
    row = [opts["kft"], space.bits, latin, laws.commutative, laws.associative]
    _emit(opts, header, [row], _flat(header, row))
    return EXIT_OK if latin else EXIT_FAILED


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _resolve(args)
        return args.func(opts)
    except (UsageError, KeyfuseError, ValueError) as exc:
        print(f"keyfuse {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
