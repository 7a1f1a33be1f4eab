"""Command-line entry point.

    repstack gen-game appendixC --out game.json
    repstack gen-game random --N 3 --M 3 --K 2 --eta 2 --seed 7 --out g.json
    repstack run --config run.toml
    repstack bench stoc-nomem --iterations 400 --out results/
    repstack check

Exit codes: 0 ok, 1 usage, 2 invalid config, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import checks
from .game import GameError, GameInstance, appendix_c_game, random_game
from .learner import LearnerConfig
from .memory import MemoryModel
from .sim import AdversarySpec, RunConfig, run_batch, write_outputs

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("repstack")

BENCH_PRESETS = {
    "stoc-nomem": dict(algorithm="ftpl-memoryless", response="br", adversary="stoc", memory="none"),
    "cyc-nomem": dict(algorithm="ftpl-memoryless", response="br", adversary="cyc:5", memory="none"),
    "stoc-fm": dict(algorithm="ftpl-memory", response="qr", adversary="stoc", memory="fm:10"),
    "cyc-fm": dict(algorithm="ftpl-memory", response="qr", adversary="cyc:5", memory="fm:10"),
    "stoc-dm": dict(algorithm="ftpl-memory", response="qr", adversary="stoc", memory="dm:0.9"),
    "cyc-dm": dict(algorithm="ftpl-memory", response="qr", adversary="cyc:5", memory="dm:0.9"),
}
BENCH_H = 200
BENCH_S = 50

CONFIG_KEYS = {"game", "algorithm", "response", "adversary", "memory", "H", "S", "epsilon", "seed",
               "nu", "theta", "out", "threads", "name", "per_run"}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            doc = tomllib.loads(text)
        else:
            doc = json.loads(text)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a table/object")
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    if "game" in doc and doc["game"] != "appendixC" and not Path(doc["game"]).is_absolute():
        doc["game"] = str(path.parent / doc["game"])
    return doc


def build(doc: dict) -> tuple[GameInstance, RunConfig]:
    """GameInstance and RunConfig from a config mapping."""
    try:
        game_ref = doc.get("game", "appendixC")
        game = appendix_c_game() if game_ref == "appendixC" else GameInstance.load(game_ref)
        learner = LearnerConfig(doc.get("algorithm", "ftpl-memoryless"), doc.get("response", "br"),
                                doc.get("epsilon"), doc.get("nu"))
        cfg = RunConfig(learner, AdversarySpec.parse(str(doc.get("adversary", "stoc"))),
                        MemoryModel.parse(str(doc.get("memory", "none"))), int(doc.get("H", BENCH_H)),
                        doc.get("theta"))
    except (GameError, ValueError, TypeError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    return game, cfg


def _execute(game, cfg, name, S, seed, out, threads, per_run=True) -> int:
    log.info("%s: H=%d S=%d nu=%.6g eps=%.6g adversary=%s memory=%s", name, cfg.H, S,
             cfg.resolved_nu(game), cfg.epsilon, cfg.adversary, cfg.memory)
    start = time.time()

    def progress(done, total):
        log.info("  run %d/%d (%.0fs)", done, total, time.time() - start)

    try:
        batch = run_batch(game, cfg, S, seed, threads, progress)
        paths = write_outputs(out, name, batch, per_run)
    except Exception as exc:  # noqa: BLE001 - any failure inside a run is a runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{name}: mean final regret {batch.mean_regret[-1]:.4f} "
          f"(std {batch.std_regret[-1]:.4f}), bound {batch.bound[-1]:.4f}")
    print(f"wrote {paths[0]} and {paths[1]}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        doc = load_config(args.config)
        for key in ("epsilon", "nu"):
            if getattr(args, key) is not None:
                doc[key] = getattr(args, key)
        game, cfg = build(doc)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    S = args.iterations or int(doc.get("S", BENCH_S))
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    out = args.out or doc.get("out", "results")
    threads = args.threads or int(doc.get("threads", 1))
    return _execute(game, cfg, doc.get("name", Path(args.config).stem), S, seed, out, threads,
                    bool(doc.get("per_run", True)))


def bench_config(name: str, epsilon=None, nu=None) -> tuple[GameInstance, RunConfig]:
    doc = dict(BENCH_PRESETS[name], game="appendixC", H=BENCH_H, epsilon=epsilon, nu=nu)
    return build(doc)


def cmd_bench(args) -> int:
    try:
        game, cfg = bench_config(args.name, args.epsilon, args.nu)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _execute(game, cfg, args.name, args.iterations or BENCH_S, args.seed or 0, args.out or "results",
                    args.threads or 1)


def cmd_check(args) -> int:
    passed, failed = checks.run_all(args.seed or 0)
    print(f"{passed} passed, {failed} failed")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def cmd_gen_game(args) -> int:
    try:
        if args.preset == "appendixC":
            game = appendix_c_game(args.eta if args.eta is not None else 2.0)
        else:
            game = random_game(args.N, args.M, args.K, args.eta if args.eta is not None else 2.0, args.seed or 0)
    except (GameError, ValueError) as exc:
        print(f"invalid game parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        game.save(args.out)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {args.out} (N={game.N}, M={game.M}, K={game.K}, eta={game.eta:g})")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="repstack", description="FTPL learning in repeated Stackelberg games")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def batch_flags(sp):
        sp.add_argument("--iterations", type=int, help="number of independent runs S")
        sp.add_argument("--seed", type=int, help="base seed; run r uses seed + r")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--threads", type=int, help="worker processes")
        sp.add_argument("--epsilon", type=float, help="oracle tolerance (default 1/sqrt(H))")
        sp.add_argument("--nu", type=float, help="perturbation rate override")

    sp = sub.add_parser("run", help="run a batch from a JSON or TOML config")
    sp.add_argument("--config", required=True)
    batch_flags(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("bench", help="reproduce one of the reference experiment presets")
    sp.add_argument("name", choices=sorted(BENCH_PRESETS))
    batch_flags(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("check", help="run the randomized property suites")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("gen-game", help="write a game instance as JSON")
    sp.add_argument("preset", choices=["appendixC", "random"])
    sp.add_argument("--N", type=int, default=3)
    sp.add_argument("--M", type=int, default=3)
    sp.add_argument("--K", type=int, default=2)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_game)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
