"""Command line entry point (``aldc`` or ``python -m aldc``).

Exit status: 0 success, 1 decode failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import warnings

import numpy as np

from .bits import read_bitfile, write_bitfile
from .channels import EditScript, classify_blocks, derive_block_map, bad_block_bounds
from .codes import Code
from .errors import DecodeFailure, InvalidInput, QueryRangeError
from .hamming_paldc import SecretKey
from .harness import ExperimentConfig, load_config, records_csv, run_experiment, summary_table
from .oracle import CorruptedOracle

EXIT_OK, EXIT_DECODE, EXIT_USAGE = 0, 1, 2


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Usage(f"{self.prog}: error: {message}")


def _config(args) -> ExperimentConfig:
    if args.config:
        return load_config(args.config)
    from .harness import parse_config
    return parse_config("")


def _seed_bytes(seed: int, label: str) -> bytes:
    return hashlib.sha256(f"{label}:{seed}".encode()).digest()


def _key_path(args, default_from: str) -> str:
    return args.key or default_from + ".key"


def cmd_validate(args) -> int:
    cfg = _config(args)
    code = cfg.code
    probs = cfg.problems()
    print(f"code            {code.name}")
    print(f"k, n            {code.k}, {code.n}")
    print(f"rate            {code.k / code.n:.6f}")
    print(f"paldc margin    a/(t log2 lambda) = {code.paldc.margin():.4f}")
    if code.insdel and not code.paldc.problems():
        p = code.compiler
        print(f"tau, blk_len    {p.tau}, {p.blk_len}  (beta = {p.beta:.4f})")
        print(f"rho             {p.rho:.6f}")
        print(f"c_stop          {p.c_stop:.4f}")
        print(f"delta_work      {p.delta_work:.6g}")
        print(f"N               {p.n_samples(p.codeword_len)}")
        print(f"query constant  C = {p.query_constant():.3f}")
    if probs:
        print("violations:", file=sys.stderr)
        for msg in probs:
            print(f"  - {msg}", file=sys.stderr)
        return EXIT_USAGE
    print("ok")
    return EXIT_OK


def cmd_encode(args) -> int:
    code = _config(args).code
    x = read_bitfile(args.input)
    if x.size != code.k:
        raise InvalidInput(f"message has {x.size} bits, the code expects k={code.k}")
    key = code.gen(_seed_bytes(args.seed, "key"))
    word = code.encode(x, key, _seed_bytes(args.seed, "enc"))
    write_bitfile(args.out, word)
    if key is not None:
        with open(_key_path(args, args.out), "wb") as fh:
            fh.write(key.to_bytes())
    print(f"wrote {word.size} bits to {args.out}")
    return EXIT_OK


def cmd_corrupt(args) -> int:
    code = _config(args).code
    word = read_bitfile(args.input)
    strategy = args.strategy or code.strategies[0]
    if strategy not in code.strategies:
        raise InvalidInput(f"strategy {strategy!r} does not apply to {code.name}")
    bad, script = code.corrupt(word, args.delta, strategy, args.seed)
    write_bitfile(args.out, bad)
    if script is not None:
        path = args.script or args.out + ".edits"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(script.to_text())
        print(f"edit script ({script.cost()} edit units) written to {path}")
    print(f"wrote {bad.size} bits to {args.out}")
    return EXIT_OK


def cmd_decode(args) -> int:
    code = _config(args).code
    word = read_bitfile(args.input)
    key = None
    if code.keyed:
        path = _key_path(args, args.input)
        try:
            with open(path, "rb") as fh:
                key = SecretKey.from_bytes(fh.read())
        except OSError as exc:
            raise InvalidInput(f"cannot read key {path}: {exc}") from None
    L = args.L if args.L is not None else 1
    R = args.R if args.R is not None else code.k
    if not 1 <= L <= R <= code.k:
        raise InvalidInput(f"interval [{L}, {R}] outside [1, {code.k}]")
    rng = np.random.default_rng(args.seed)
    oracle = CorruptedOracle(word)
    try:
        out = code.decode(oracle, L, R, key, rng)
    except DecodeFailure as exc:
        print(f"decode failed: {exc}", file=sys.stderr)
        return EXIT_DECODE
    write_bitfile(args.out, out)
    print(f"decoded [{L}, {R}] with {oracle.queries_used} queries "
          f"(alpha = {oracle.queries_used / (R - L + 1):.3f})")
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _config(args)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    if args.strategy or args.delta is not None or args.kappa is not None:
        from dataclasses import replace
        cells = []
        for c in cfg.cells:
            c = replace(c, strategy=args.strategy or c.strategy)
            c = replace(c, delta=c.delta if args.delta is None else args.delta)
            c = replace(c, kappa=c.kappa if args.kappa is None else args.kappa)
            if c not in cells:
                cells.append(c)
        cfg.cells = cells
    if args.out:
        cfg.output = args.out
    probs = cfg.problems()
    if probs:
        for msg in probs:
            print(f"  - {msg}", file=sys.stderr)
        return EXIT_USAGE
    records = run_experiment(cfg, write=False)
    text = records_csv(records)
    if cfg.output:
        with open(cfg.output, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if records:
        print(summary_table(records), file=sys.stderr)
    return EXIT_OK


def cmd_classify(args) -> int:
    code = _config(args).code
    if not code.insdel:
        raise InvalidInput("classify needs an insdel code")
    p = code.compiler
    clean = read_bitfile(args.clean)
    bad = read_bitfile(args.input)
    with open(args.script, encoding="utf-8") as fh:
        script = EditScript.from_text(fh.read())
    if clean.size != p.codeword_len:
        raise InvalidInput("clean word does not match the configured code")
    phi = derive_block_map(script, p.n_blocks, p.blk_len)
    if phi.size != bad.size:
        raise InvalidInput("edit script does not produce the corrupted word")
    health = classify_blocks(clean, bad, phi, p)
    delta = script.cost() / (2 * clean.size)
    b1, b2 = bad_block_bounds(delta, p)
    print(f"blocks             {p.n_blocks}")
    print(f"edit units         {script.cost()}  (delta = {delta:.6g})")
    print(f"gamma-bad          {int((~health.good).sum())}  fraction {health.frac_bad:.4f}  bound {b1:.4f}")
    print(f"local-bad          {int((~health.local_good).sum())}  fraction {health.frac_local_bad:.4f}  bound {b2:.4f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("block,size,cost,good,local_good\n")
            for j in range(p.n_blocks):
                fh.write(f"{j + 1},{health.sizes[j]},{health.costs[j]},{int(health.good[j])},{int(health.local_good[j])}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="aldc", description="Amortized locally decodable codes: encode, corrupt, decode, measure.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed_default=0):
        p.add_argument("--config", help="experiment/code config file (INI)")
        p.add_argument("--seed", type=int, default=seed_default, help="u64 seed")

    p = sub.add_parser("validate", help="check parameters and print derived constants")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("encode", help="encode a message bit file")
    common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--key", help="where to write the secret key (keyed codes)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("corrupt", help="apply a channel strategy to a codeword file")
    common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strategy")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--script", help="where to write the edit script (insdel codes)")
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("decode", help="decode an interval of the message")
    common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--key", help="secret key file (keyed codes)")
    p.add_argument("--L", type=int)
    p.add_argument("--R", type=int)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("experiment", help="run a Monte-Carlo sweep and write CSV")
    common(p, seed_default=None)
    p.add_argument("--out")
    p.add_argument("--trials", type=int)
    p.add_argument("--strategy")
    p.add_argument("--delta", type=float)
    p.add_argument("--kappa", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("classify", help="good/local-good block report for a corrupted insdel word")
    common(p)
    p.add_argument("--clean", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--script", required=True)
    p.add_argument("--out", help="optional per-block CSV")
    p.set_defaults(func=cmd_classify)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _Usage as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args)
    except (InvalidInput, QueryRangeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
