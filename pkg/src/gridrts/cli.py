"""Command-line entry points: selfplay, tournament, genmap, export, validate,
serve, bench.  Every subcommand honors --seed for full determinism and --json
for machine-readable output."""
from __future__ import annotations

import itertools
import json
import os
import sys
import time
from pathlib import Path

import click

from .balance import BalanceConfig
from .bots import STRATEGIES
from .dataset import export_dataset
from .mapgen import GenerationFailed, MapGrid, MapParams, generate_map
from .replay import Replay, ReplayError, replay_verify
from .selfplay import MatchStats, play_game, run_match
from .validator import (
    Verdict, check_execution, execution_events, filter_game, parse_instruction,
    player_profile,
)


class Ctx:
    def __init__(self, seed: int, config: BalanceConfig, as_json: bool):
        self.seed = seed
        self.config = config
        self.as_json = as_json

    def emit(self, payload: dict, text: str) -> None:
        if self.as_json:
            click.echo(json.dumps(payload, sort_keys=True))
        else:
            click.echo(text)


@click.group()
@click.option("--seed", default=0, show_default=True, help="master random seed")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="balance config file (key-value text)")
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@click.pass_context
def main(ctx, seed, config_path, as_json):
    config = BalanceConfig.load(config_path) if config_path else BalanceConfig()
    ctx.obj = Ctx(seed, config, as_json)


def _stats_row(name_a, name_b, stats: MatchStats) -> dict:
    win, lose, draw = stats.rates()
    return {
        "a": name_a, "b": name_b, "games": stats.games,
        "win_pct": round(win, 1), "lose_pct": round(lose, 1),
        "draw_pct": round(draw, 1),
        "mean_ticks": round(stats.total_ticks / stats.games, 1) if stats.games else 0,
        "ticks_per_sec": round(stats.ticks_per_second, 1),
    }


def _stats_text(row: dict) -> str:
    return (f"{row['a']:>13} vs {row['b']:<13} n={row['games']:<4} "
            f"win/lose/draw = {row['win_pct']:.1f}/{row['lose_pct']:.1f}/"
            f"{row['draw_pct']:.1f} %  mean_ticks={row['mean_ticks']:.0f} "
            f"ticks/s={row['ticks_per_sec']:.0f}")


@main.command()
@click.argument("strategy_a", type=click.Choice(sorted(STRATEGIES)))
@click.argument("strategy_b", type=click.Choice(sorted(STRATEGIES)))
@click.option("-n", "--games", default=10, show_default=True)
@click.option("--max-ticks", default=None, type=int,
              help="truncate games at this tick (default: balance limit)")
@click.option("--swap-sides/--no-swap-sides", default=True, show_default=True)
@click.option("--resource-scaling", default=1.0, show_default=True,
              help="deposit multiplier for strategy B (the opponent)")
@click.option("--record-dir", type=click.Path(), default=None,
              help="write one replay per game into this directory")
@click.option("--instruct", is_flag=True,
              help="annotate player A's replays with scripted instructions")
@click.pass_obj
def selfplay(ctx: Ctx, strategy_a, strategy_b, games, max_ticks, swap_sides,
             resource_scaling, record_dir, instruct):
    """Run bot-vs-bot games and report win/lose/draw rates."""
    record = record_dir is not None
    if record:
        Path(record_dir).mkdir(parents=True, exist_ok=True)
    stats = MatchStats()
    for i in range(games):
        seed = ctx.seed + (i // 2 * 2 if swap_sides else i)
        a_first = not (swap_sides and i % 2)
        pa, pb = (strategy_a, strategy_b) if a_first else (strategy_b, strategy_a)
        scaling = (1.0, resource_scaling) if a_first else (resource_scaling, 1.0)
        result = play_game(pa, pb, seed, balance=ctx.config,
                           resource_scaling=scaling, max_ticks=max_ticks,
                           record=record, instruct=instruct and a_first)
        stats.add(result, a_is_player0=a_first)
        if record:
            result.replay.save(Path(record_dir) / f"{pa}_vs_{pb}_{seed}_{i}.grpl")
    row = _stats_row(strategy_a, strategy_b, stats)
    ctx.emit(row, _stats_text(row))


@main.command()
@click.option("--strategies", default=",".join(sorted(STRATEGIES)),
              show_default=True, help="comma-separated strategy list")
@click.option("-n", "--games", default=10, show_default=True,
              help="games per pairing (each map played twice, sides swapped)")
@click.option("--max-ticks", default=12000, show_default=True, type=int)
@click.pass_obj
def tournament(ctx: Ctx, strategies, games, max_ticks):
    """Round-robin all pairings; each map is played twice with sides swapped."""
    names = [s.strip() for s in strategies.split(",") if s.strip()]
    unknown = set(names) - set(STRATEGIES)
    if unknown:
        raise click.BadParameter(f"unknown strategies: {sorted(unknown)}")
    rows = []
    for a, b in itertools.combinations(names, 2):
        stats = run_match(a, b, games, ctx.seed, swap_sides=True,
                          balance=ctx.config, max_ticks=max_ticks)
        rows.append(_stats_row(a, b, stats))
    ctx.emit({"pairings": rows}, "\n".join(_stats_text(r) for r in rows))


@main.command()
@click.option("--water-fraction", default=0.15, show_default=True)
@click.option("--resources", default=5, show_default=True)
@click.option("--tolerance", default=4, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="write the map file here instead of stdout")
@click.option("--count", default=1, show_default=True,
              help="generate this many maps (seed, seed+1, ...)")
@click.pass_obj
def genmap(ctx: Ctx, water_fraction, resources, tolerance, out, count):
    """Generate random maps and print or save their text form."""
    params = MapParams(water_fraction=water_fraction, n_resources=resources,
                       equidistance_tolerance=tolerance)
    for i in range(count):
        try:
            grid = generate_map(ctx.seed + i, params)
        except GenerationFailed as exc:
            raise click.ClickException(str(exc))
        text = grid.serialize()
        if out:
            path = Path(out) if count == 1 else Path(out).with_suffix(f".{i}.map")
            path.write_text(text)
            click.echo(f"wrote {path}")
        elif ctx.as_json:
            click.echo(json.dumps({"seed": ctx.seed + i, "map": text}))
        else:
            click.echo(text, nl=False)


@main.command()
@click.argument("replay_dir", type=click.Path(exists=True))
@click.option("--k", default=50, show_default=True, help="frame subsampling stride")
@click.option("--out", default="dataset", show_default=True,
              help="output prefix: writes <out>.jsonl and <out>.obs")
@click.pass_obj
def export(ctx: Ctx, replay_dir, k, out):
    """Export supervised frames from every replay in a directory."""
    paths = sorted(Path(replay_dir).glob("*.grpl"))
    replays = []
    for path in paths:
        try:
            replays.append(Replay.load(path))
        except (ReplayError, OSError) as exc:
            click.echo(f"warning: skipping corrupt replay {path}: {exc}", err=True)
    stats = export_dataset(replays, k, f"{out}.jsonl", f"{out}.obs")
    table = stats.table()
    text = "\n".join(f"{key:26s} {value}" for key, value in table.items())
    ctx.emit(table, f"wrote {out}.jsonl / {out}.obs\n{text}")


@main.command()
@click.argument("replays", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("--report", type=click.Path(), default=None,
              help="write the structured report to this file")
@click.pass_obj
def validate(ctx: Ctx, replays, report):
    """Check instruction/execution consistency and filter games."""
    lines = []
    payload = {"games": [], "profile": None}
    loaded = []
    for path in replays:
        try:
            replay = Replay.load(path)
        except (ReplayError, OSError) as exc:
            click.echo(f"warning: skipping corrupt replay {path}: {exc}", err=True)
            continue
        loaded.append(replay)
        keep, reason = filter_game(replay)
        verify = replay_verify(replay)
        entry = {"replay": str(path), "keep": keep, "reason": reason,
                 "checkpoints_ok": verify.ok, "instructions": []}
        lines.append(f"{path}: {'KEEP' if keep else 'DROP'}"
                     f"{'' if keep else ' (' + reason + ')'}"
                     f"  checkpoints={'ok' if verify.ok else 'DIVERGED'}")
        events = execution_events(replay, player=0)
        for rec in replay.instructions():
            intent = parse_instruction(rec.text)
            verdict = check_execution(intent, events, issued_tick=rec.tick)
            entry["instructions"].append(
                {"tick": rec.tick, "text": rec.text,
                 "verb": intent.verb.value if intent.verb else None,
                 "verdict": verdict.value})
            lines.append(f"  t={rec.tick:<6} [{verdict.value:^12}] {rec.text}")
        payload["games"].append(entry)
    if loaded:
        profile = player_profile(loaded, player=0).as_dict()
        payload["profile"] = profile
        lines.append("profile: " + json.dumps(profile, sort_keys=True))
    text = "\n".join(lines)
    if report:
        Path(report).write_text(
            json.dumps(payload, indent=2, sort_keys=True) if ctx.as_json else text + "\n")
        click.echo(f"wrote {report}")
    else:
        ctx.emit(payload, text)


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--opponent", default="simple", show_default=True,
              type=click.Choice(sorted(STRATEGIES)))
@click.option("--resource-scaling", default=1.0, show_default=True)
@click.option("--replay-dir", type=click.Path(), default="replays",
              show_default=True)
@click.pass_obj
def serve(ctx: Ctx, port, host, opponent, resource_scaling, replay_dir):
    """Run the instructor/executor session server."""
    import uvicorn

    from .server import create_app

    app = create_app(opponent=opponent, resource_scaling=resource_scaling,
                     replay_dir=replay_dir, balance=ctx.config, seed=ctx.seed)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@click.option("--ticks", default=20000, show_default=True,
              help="ticks to simulate per worker")
@click.option("--workers", default=1, show_default=True,
              help="concurrent worker processes")
@click.pass_obj
def bench(ctx: Ctx, ticks, workers):
    """Measure headless simulation throughput (game ticks per second)."""
    if workers == 1:
        elapsed, done = _bench_worker((ctx.seed, ticks, ctx.config.dump()))
        total = done
        wall = elapsed
    else:
        import multiprocessing as mp
        args = [(ctx.seed + i, ticks, ctx.config.dump()) for i in range(workers)]
        start = time.perf_counter()
        with mp.get_context("spawn").Pool(workers) as pool:
            results = pool.map(_bench_worker, args)
        wall = time.perf_counter() - start
        total = sum(done for _, done in results)
    rate = total / wall if wall else 0.0
    payload = {"workers": workers, "ticks": total, "seconds": round(wall, 3),
               "ticks_per_sec": round(rate, 1),
               "per_worker": round(rate / workers, 1), "cpus": os.cpu_count()}
    ctx.emit(payload,
             f"{total} ticks across {workers} worker(s) in {wall:.2f}s "
             f"=> {rate:,.0f} ticks/s total, {rate / workers:,.0f} per worker")


def _bench_worker(args) -> tuple[float, int]:
    seed, ticks, config_text = args
    config = BalanceConfig.parse(config_text)
    done = 0
    start = time.perf_counter()
    game_seed = seed
    while done < ticks:
        budget = ticks - done
        result = play_game("simple", "medium", game_seed, balance=config,
                           max_ticks=min(budget, config.max_ticks - 1))
        done += result.ticks
        game_seed += 1
    return time.perf_counter() - start, done


if __name__ == "__main__":
    main()
