"""Command-line entry points: training phases, tournaments, ablations,
curve export, the feature-layout dump, replay audit, and the game
service."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import ConfigError, echo_config, load_config
from .runtime import AGENT_KIND_HELP, CheckpointSet, UnknownAgentKind, make_agent


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="redten", description="Red-10 training, evaluation and play")
    sub = parser.add_subparsers(dest="command", required=True)

    for phase in ("train-policy", "train-identify", "finetune"):
        p = sub.add_parser(phase)
        _add_common(p)
        p.add_argument("--decks", type=int, required=True)
        p.add_argument("--threaded", action="store_true",
                       help="parallel actors instead of the deterministic loop")

    p = sub.add_parser("eval")
    _add_common(p)
    p.add_argument("--a", required=True, help=AGENT_KIND_HELP)
    p.add_argument("--b", required=True, help=AGENT_KIND_HELP)
    p.add_argument("--decks", type=int, default=2000)
    p.add_argument("--checkpoints", default=None)

    p = sub.add_parser("ablate")
    _add_common(p)
    p.add_argument("--kind", required=True,
                   help="no-identification | nu:<constant risk>")
    p.add_argument("--decks", type=int, default=2000)
    p.add_argument("--checkpoints", required=True)

    p = sub.add_parser("export-curves")
    _add_common(p)
    p.add_argument("--decks", type=int, default=20)
    p.add_argument("--checkpoints", required=True)

    p = sub.add_parser("layout")
    _add_common(p)

    p = sub.add_parser("serve")
    _add_common(p)
    p.add_argument("--checkpoints", default=None)
    p.add_argument("--port", type=int, default=None)

    p = sub.add_parser("replay")
    p.add_argument("file")
    return parser


def _train(args, phase: str) -> int:
    from .training import TrainRun, run_phase

    if args.out is None:
        print("error: --out is required for training", file=sys.stderr)
        return 2
    cfg = load_config(args.config)
    run = TrainRun(
        phase=phase, config=cfg.rl(), decks=args.decks, seed=args.seed,
        checkpoint_dir=args.out, recurrent_hidden=cfg.recurrent_hidden,
        mlp_width=cfg.mlp_width, actor_count=cfg.actor_count,
        deterministic=not args.threaded, p0000=cfg.p0000)
    run_phase(run)
    echo_config(cfg, args.out)
    print(f"{phase} complete -> {args.out}")
    return 0


def _report_to_text(report) -> str:
    lines = [f"decks={report.decks}", f"games={report.games}",
             f"x_score={report.x_score}", f"rate={report.rate:.4f}",
             f"interval={report.interval[0]:.4f},{report.interval[1]:.4f}"]
    for pattern, row in report.per_pattern.items():
        lines.append(f"pattern[{pattern}]={row['scored']}/{row['games']}"
                     f"={row['rate']:.4f}")
    for name, row in report.per_identity.items():
        lines.append(f"identity[{name}]={row['scored']}/{row['games']}"
                     f"={row['rate']:.4f}")
    if report.decks_per_second:
        lines.append(f"decks_per_second={report.decks_per_second:.2f}")
    return "\n".join(lines) + "\n"


def _eval(args) -> int:
    from .evaluation import normalized_win_rate, play_match, write_results

    ckpt = CheckpointSet.load(args.checkpoints) if args.checkpoints else None
    make_x = lambda: make_agent(args.a, ckpt)  # noqa: E731
    make_y = lambda: make_agent(args.b, ckpt)  # noqa: E731
    make_x(), make_y()  # fail fast on bad kinds
    results = play_match(make_x, make_y, args.decks, args.seed)
    report = normalized_win_rate(results)
    text = _report_to_text(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        write_results(args.out + ".results", results)
    sys.stdout.write(text)
    return 0


def _ablate(args) -> int:
    from .evaluation import run_ablation

    ckpt = CheckpointSet.load(args.checkpoints)
    if args.kind == "no-identification":
        ablated = "mc:000"
    elif args.kind.startswith("nu:"):
        ablated = args.kind
    else:
        print(f"error: unknown ablation {args.kind!r}", file=sys.stderr)
        return 2
    report = run_ablation(lambda: make_agent("idrl", ckpt),
                          lambda: make_agent(ablated, ckpt),
                          args.decks, args.seed)
    text = _report_to_text(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _export_curves(args) -> int:
    from .evaluation import export_curves

    if args.out is None:
        print("error: --out is required", file=sys.stderr)
        return 2
    ckpt = CheckpointSet.load(args.checkpoints)
    export_curves(lambda: make_agent("idrl", ckpt), args.decks, args.seed,
                  args.out)
    print(f"curves -> {args.out}")
    return 0


def _layout(args) -> int:
    from .features import layout_tables

    text = json.dumps(layout_tables(), indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = load_config(args.config)
    ckpt = CheckpointSet.load(args.checkpoints) if args.checkpoints else None
    app = create_app(ckpt, expose_insight=cfg.expose_insight)
    uvicorn.run(app, host="127.0.0.1", port=args.port or cfg.service_port)
    return 0


def _replay(args) -> int:
    from .engine import read_replay

    state = read_replay(args.file, verify=True)
    status = ("terminal, winners " + str(list(state.terminal_winners))
              if state.is_terminal else f"in progress at turn {state.t}")
    print(f"replay ok: {state.t} moves, pattern {state.pattern}, {status}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train-policy":
            return _train(args, "policy")
        if args.command == "train-identify":
            return _train(args, "identify")
        if args.command == "finetune":
            return _train(args, "finetune")
        if args.command == "eval":
            return _eval(args)
        if args.command == "ablate":
            return _ablate(args)
        if args.command == "export-curves":
            return _export_curves(args)
        if args.command == "layout":
            return _layout(args)
        if args.command == "serve":
            return _serve(args)
        if args.command == "replay":
            return _replay(args)
    except (ConfigError, UnknownAgentKind, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # training contract violations etc.
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
