"""
Command-line interface for the IP-risk stabilization simulator.
"""

import logging
from pathlib import Path
from typing import List

import click
import yaml
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from config import Config, get_config
from graph_core import Graph, GraphError, read_graph, is_connected, to_dot
from oracles import (
    CONVENTIONS,
    EnumerationCapError,
    NodeSetMismatchError,
    domination_chain,
    is_maximal_independent,
    is_minimal_dominating,
    joint_feasibility,
)
from scenarios import (
    BUILTIN_SCENARIOS,
    RiskReport,
    ScenarioError,
    assemble_stack,
    build_compacted_supplier_graph,
    build_flow_graph,
    build_full_supplier_graph,
    nonconvergence_demo,
    resolve_scenario,
    tier_dots,
)
from stabilization_engine import (
    SCHEDULER_KINDS,
    ConfigurationError,
    SchedulerKind,
    StackError,
    load_configuration,
    write_trace,
)
from sweep_analysis import SweepAnalyzer
from sweep_runner import INIT_MODES, SweepRunner, run_seed
from utils import configure_logging, format_labels, load_structured_file, parse_seed_range

console = Console()
logger = logging.getLogger(__name__)

EXIT_STABILIZED = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_STABILIZED = 2

INPUT_ERRORS = (ScenarioError, GraphError, EnumerationCapError, NodeSetMismatchError, ConfigurationError, StackError)


def fail(ctx: click.Context, error: Exception) -> None:
    """Print an input error and exit with the input-error code."""
    console.print(f"[bold red]✗[/bold red] {type(error).__name__}: {escape(str(error))}")
    ctx.exit(EXIT_INPUT_ERROR)


def risk_table(report: RiskReport) -> Table:
    table = Table(title=f"Risk report: {report.scenario}")
    table.add_column("Column", style="cyan")
    for tier in report.states:
        table.add_column(tier, style="green")
    table.add_column("All in", style="bold")
    table.add_column("Excluded by", style="red")
    for column in report.columns:
        row = [column]
        row += [report.states[tier].get(column, '-') for tier in report.states]
        row.append('yes' if column in report.intersection else '')
        row.append(report.first_excluding.get(column) or '')
        table.add_row(*row)
    return table


def bound_table(report: RiskReport) -> Table:
    table = Table(title="Move bounds")
    for name in ("Tier", "Kind", "n", "Moves", "After lower", "Gated", "Checked", "Bound", "Pass"):
        table.add_column(name, style="cyan" if name == "Tier" else None)
    for tier in report.bounds.tiers:
        table.add_row(
            tier.label, tier.kind.value, str(tier.n), str(tier.total_moves), str(tier.moves_after_lower),
            str(tier.gated_moves), str(tier.checked_moves), str(tier.bound), '✓' if tier.passed else '✗',
        )
    table.add_row(
        'combined', '', str(report.bounds.combined_n), str(report.bounds.total_moves), '', '', '',
        str(report.bounds.combined_bound), '✓' if report.bounds.combined_passed else '✗',
    )
    return table


def write_artifacts(out_dir: Path, g: Graph, stack, outcome) -> List[Path]:
    """Risk report, bound report, trace and per-tier DOT files for one run."""
    out_dir.mkdir(parents=True, exist_ok=True)
    report = outcome.report
    paths = [out_dir / 'risk_report.yaml', out_dir / 'bounds.yaml']
    paths[0].write_text(report.to_yaml(), encoding='utf-8')
    paths[1].write_text(yaml.safe_dump(report.bounds.to_dict(), sort_keys=False), encoding='utf-8')
    paths.append(write_trace(out_dir / 'trace.jsonl', g, stack, outcome.result.trace))
    for label, dot in tier_dots(g, stack, outcome.result.final).items():
        path = out_dir / f'{label}.dot'
        path.write_text(dot, encoding='utf-8')
        paths.append(path)
    for path in paths:
        logger.info(f"Wrote {path}")
    return paths


@click.group()
@click.version_option(version=Config.APP_VERSION)
@click.option('--log-level', default=None, help='Logging level (default from LOG_LEVEL)')
def cli(log_level):
    """Self-stabilizing IP-risk simulator - runs, oracles and exports."""
    configure_logging(log_level)


@cli.command()
@click.option('--scenario', required=True, help='Scenario file or built-in name')
@click.option('--scheduler', type=click.Choice(SCHEDULER_KINDS),
              default=lambda: get_config().DEFAULT_SCHEDULER, show_default='DEFAULT_SCHEDULER')
@click.option('--seed', type=int, default=lambda: get_config().DEFAULT_SEED, show_default='DEFAULT_SEED',
              help='Request seed')
@click.option('--seeds', default=None, help='Seed sweep, e.g. 1..1000 or 3,5,8')
@click.option('--init', 'init_mode', type=click.Choice(INIT_MODES), default='random', show_default=True)
@click.option('--init-file', type=click.Path(dir_okay=False), default=None, help='Adversarial configuration (YAML/JSON)')
@click.option('--max-moves', type=click.IntRange(min=1), default=None, help='Move budget per run')
@click.option('--out-dir', type=click.Path(file_okay=False),
              default=lambda: get_config().OUTPUT_DIR, show_default='OUTPUT_DIR')
@click.option('--compacted/--full-supplier-graph', 'compacted', default=None, help='Supplier tier substrate')
@click.option('--public-supplier', multiple=True, help='Supplier whose visibility does not matter')
@click.option('--equal-priority', is_flag=True, default=None, help='Run all tiers at one priority on a shared variable')
@click.option('--workers', type=click.IntRange(min=1),
              default=lambda: get_config().SWEEP_WORKERS, show_default='SWEEP_WORKERS')
@click.pass_context
def run(ctx, scenario, scheduler, seed, seeds, init_mode, init_file, max_moves, out_dir, compacted,
        public_supplier, equal_priority, workers):
    """Run a scenario to stabilization (one seed or a sweep)."""
    try:
        parsed = resolve_scenario(scenario)
        supplier_mode = None if compacted is None else ('compacted' if compacted else 'full')
        g, stack = assemble_stack(parsed, supplier_mode, equal_priority or None, public_supplier)
        adversarial = None
        if init_mode == 'adversarial-from-file':
            if init_file is None:
                raise ConfigurationError("--init adversarial-from-file needs --init-file")
            adversarial = load_configuration(g, stack, load_structured_file(init_file))
        seed_list = parse_seed_range(seeds) if seeds else None
    except (ValueError, OSError, yaml.YAMLError) as e:
        if not isinstance(e, INPUT_ERRORS):
            e = ConfigurationError(str(e))
        fail(ctx, e)
        return

    kind = SchedulerKind(scheduler)
    if seed_list is None:
        console.print(f"[bold blue]Running {parsed.name} with {kind} (seed {seed})...[/bold blue]")
        outcome = run_seed(g, stack, seed, kind, init_mode, max_moves, adversarial, parsed.name)
        console.print(risk_table(outcome.report))
        console.print(bound_table(outcome.report))
        console.print(f"Intersection: {format_labels(outcome.report.intersection)}")
        for warning in outcome.report.warnings:
            console.print(f"[yellow]! {warning}[/yellow]")
        for violation in outcome.report.violations:
            console.print(f"[red]✗ {violation}[/red]")
        paths = write_artifacts(Path(out_dir) / parsed.name / f'seed-{seed}', g, stack, outcome)
        console.print(f"[bold green]✓[/bold green] Artifacts written to {paths[0].parent}")
        if not outcome.result.stabilized:
            reason = 'livelock detected' if outcome.result.livelock else f'budget of {outcome.result.max_moves} moves exhausted'
            console.print(f"[bold red]✗[/bold red] Not stabilized: {reason}")
            ctx.exit(EXIT_NOT_STABILIZED)
        console.print(f"[bold green]✓[/bold green] Stabilized after {outcome.result.moves} moves")
        return

    console.print(f"[bold blue]Sweeping {len(seed_list)} seeds of {parsed.name} with {kind}...[/bold blue]")
    runner = SweepRunner(g, stack, kind, init_mode, max_moves, adversarial, workers, parsed.name)
    outcomes = runner.run(seed_list)
    summaries = [outcome.summary() for outcome in outcomes]
    for summary in summaries:
        console.print(summary.line())
    for failed_seed, message in sorted(runner.failures.items()):
        console.print(f"[red]✗ seed {failed_seed} failed: {message}[/red]")

    analyzer = SweepAnalyzer()
    frame = analyzer.load_summaries(summaries)
    stats = analyzer.get_statistics()
    table = Table(title="Sweep aggregate")
    for name in ("Tier", "Kind", "max n", "max after lower", "max checked", "max bound", "violations"):
        table.add_column(name, style="cyan" if name == "Tier" else None)
    for _, row in analyzer.bound_table().iterrows():
        table.add_row(row['label'], row['kind'], str(row['max_n']), str(row['max_after_lower']),
                      str(row['max_checked']), str(row['max_bound']), str(row['violations']))
    console.print(table)
    profile = Table(title="Moves per run")
    for name in ("Scheduler", "runs", "mean", "median", "p95", "max", "mean steps", "max bound share"):
        profile.add_column(name, style="cyan" if name == "Scheduler" else None)
    for _, row in analyzer.move_profile().iterrows():
        profile.add_row(
            row['scheduler'], str(row['runs']), str(row['mean_moves']), str(row['median_moves']),
            str(row['p95_moves']), str(row['max_moves']), str(row['mean_steps']), str(row['max_bound_share']),
        )
    console.print(profile)
    for key, value in stats.items():
        console.print(f"  {key}: {value}")

    sweep_dir = Path(out_dir) / parsed.name
    sweep_dir.mkdir(parents=True, exist_ok=True)
    frame.to_csv(sweep_dir / 'sweep.csv', index=False)
    console.print(f"[bold green]✓[/bold green] Sweep table written to {sweep_dir / 'sweep.csv'}")
    if runner.failures or stats.get('stabilized', 0) < len(seed_list):
        ctx.exit(EXIT_NOT_STABILIZED)


@cli.command()
@click.option('--which', type=click.Choice(['chain', 'mis-check', 'mds-check', 'joint']), required=True)
@click.option('--graph', 'graph_path', type=click.Path(dir_okay=False), default=None, help='Graph file')
@click.option('--other-graph', type=click.Path(dir_okay=False), default=None, help='Dominating-side graph for joint')
@click.option('--scenario', default=None, help='Scenario for joint: supplier graph against its flow graph')
@click.option('--members', default='', help='Comma-separated labels for the set checks')
@click.option('--convention', type=click.Choice(CONVENTIONS), default=None, help='Column projection for joint')
@click.option('--compacted/--full-supplier-graph', 'compacted', default=True)
@click.option('--public-supplier', multiple=True)
@click.option('--cap', type=click.IntRange(min=0), default=None, help='Enumeration cap')
@click.pass_context
def oracle(ctx, which, graph_path, other_graph, scenario, members, convention, compacted, public_supplier, cap):
    """Exact oracle results: domination chain, set checks, joint feasibility."""
    try:
        if which == 'joint':
            _joint(graph_path, other_graph, scenario, convention, compacted, public_supplier, cap)
            return
        if graph_path is None:
            raise ConfigurationError(f"--which {which} needs --graph")
        g = read_graph(graph_path)
        if which == 'chain':
            chain = domination_chain(g, cap)
            table = Table(title=f"Domination chain ({g.order} nodes)")
            table.add_column("Parameter", style="cyan")
            table.add_column("Value", style="green")
            table.add_column("Witness")
            for name, value in chain.to_dict().items():
                table.add_row(name, str(value), format_labels(g.labels_of(chain.witnesses[name])))
            console.print(table)
            ordered = chain.is_ordered()
            console.print(f"{'[green]✓' if ordered else '[red]✗'} ir ≤ γ ≤ i ≤ β₀ ≤ Γ ≤ IR[/]")
            return
        labels = [label.strip() for label in members.split(',') if label.strip()]
        chosen = frozenset(g.node_id(label) for label in labels)
        check = is_maximal_independent if which == 'mis-check' else is_minimal_dominating
        name = 'maximal independent' if which == 'mis-check' else '1-minimal dominating'
        if check(g, chosen):
            console.print(f"[bold green]✓[/bold green] {format_labels(labels)} is {name}")
        else:
            console.print(f"[bold red]✗[/bold red] {format_labels(labels)} is not {name}")
    except (ValueError, OSError) as e:
        fail(ctx, e)


def _joint(graph_path, other_graph, scenario, convention, compacted, public_supplier, cap):
    if scenario is not None:
        parsed = resolve_scenario(scenario)
        table = parsed.supplier_table(public_supplier)
        flow = build_flow_graph(parsed.flow, parsed.column_ids())
        if compacted:
            groups, projection = build_compacted_supplier_graph(table)
            conventions = [convention] if convention else list(CONVENTIONS)
            for name in conventions:
                verdict = joint_feasibility(groups, flow, flow.nodes, projection, name, cap)
                console.print(f"{name}: {verdict.describe(flow)} ({verdict.sets_examined} sets examined)")
            return
        full = build_full_supplier_graph(table)
        verdict = joint_feasibility(full, flow, flow.nodes, cap=cap)
        console.print(f"columns: {verdict.describe(flow)} ({verdict.sets_examined} sets examined)")
        return
    if graph_path is None:
        raise ConfigurationError("--which joint needs --scenario or --graph")
    g_mis = read_graph(graph_path)
    g_mds = read_graph(other_graph) if other_graph else g_mis
    verdict = joint_feasibility(g_mis, g_mds, g_mds.nodes, cap=cap)
    console.print(f"{verdict.describe(g_mds)} ({verdict.sets_examined} sets examined)")


@cli.command('demo-nonconvergence')
@click.option('--public-supplier', multiple=True, help='Supplier whose visibility does not matter')
@click.option('--hierarchical-only', is_flag=True, help='Only run the prioritized stack')
@click.option('--max-moves', type=click.IntRange(min=1), default=10 ** 6, show_default=True)
@click.option('--seed', type=int, default=lambda: get_config().DEFAULT_SEED, show_default='DEFAULT_SEED')
def demo_nonconvergence(public_supplier, hierarchical_only, max_moves, seed):
    """Equal-priority MIS and MDS contend forever; prioritized they converge."""
    verdict = nonconvergence_demo(public_supplier, hierarchical_only, max_moves, seed)
    if public_supplier:
        console.print(f"Public suppliers: {format_labels(public_supplier)}")
    for convention, feasibility in verdict.feasibility.items():
        console.print(f"Joint feasibility ({convention}): {feasibility.describe()}")
    if verdict.column_feasibility is not None:
        console.print(f"Joint feasibility (full supplier graph): {verdict.column_feasibility.describe()}")
    if verdict.equal_priority is not None:
        result = verdict.equal_priority
        if result.livelock:
            console.print(f"Equal priority: configuration of step {result.revisit_step} revisited at step {result.steps}")
        else:
            console.print(f"Equal priority: {'stabilized' if result.stabilized else 'budget exhausted'} after {result.moves} moves")
    console.print(f"Hierarchical: {'stabilized' if verdict.hierarchical.stabilized else 'not stabilized'} "
                  f"after {verdict.hierarchical.moves} moves")
    console.print(f"[bold]{verdict.summary()}[/bold]")


@cli.command('export-dot')
@click.option('--scenario', default=None, help='Scenario file or built-in name')
@click.option('--graph', 'graph_path', type=click.Path(dir_okay=False), default=None, help='Graph file')
@click.option('--out-dir', type=click.Path(file_okay=False),
              default=lambda: get_config().OUTPUT_DIR, show_default='OUTPUT_DIR')
@click.option('--compacted/--full-supplier-graph', 'compacted', default=None)
@click.option('--public-supplier', multiple=True)
@click.pass_context
def export_dot(ctx, scenario, graph_path, out_dir, compacted, public_supplier):
    """Write DOT files for a graph or for every tier of a scenario."""
    try:
        if graph_path is not None:
            g = read_graph(graph_path)
            click.echo(to_dot(g, name=Path(graph_path).stem), nl=False)
            return
        if scenario is None:
            raise ConfigurationError("export-dot needs --scenario or --graph")
        parsed = resolve_scenario(scenario)
        supplier_mode = None if compacted is None else ('compacted' if compacted else 'full')
        g, stack = assemble_stack(parsed, supplier_mode, extra_public=public_supplier)
    except (ValueError, OSError) as e:
        fail(ctx, e)
        return

    target = Path(out_dir) / parsed.name
    target.mkdir(parents=True, exist_ok=True)
    dots = {'columns': to_dot(g, name='columns'), **tier_dots(g, stack)}
    for label, dot in dots.items():
        (target / f'{label}.dot').write_text(dot, encoding='utf-8')
    console.print(f"[bold green]✓[/bold green] {len(dots)} DOT files written to {target}")


@cli.command()
@click.option('--scenario', default=None, help='Scenario file or built-in name')
@click.option('--graph', 'graph_path', type=click.Path(dir_okay=False), default=None, help='Graph file')
@click.pass_context
def validate(ctx, scenario, graph_path):
    """Parse a scenario or graph file and report what it contains."""
    try:
        if graph_path is not None:
            g = read_graph(graph_path)
            console.print(f"[bold green]✓[/bold green] {graph_path}: {g.order} nodes, {g.size} edges, "
                          f"{'connected' if is_connected(g) else 'disconnected'}")
            return
        if scenario is None:
            raise ConfigurationError("validate needs --scenario or --graph")
        parsed = resolve_scenario(scenario)
        g, stack = assemble_stack(parsed)
    except (ValueError, OSError) as e:
        fail(ctx, e)
        return

    table = Table(title=f"Scenario {parsed.name}")
    table.add_column("Tier", style="cyan")
    table.add_column("Kind", style="green")
    table.add_column("Priority")
    table.add_column("Nodes")
    table.add_column("Edges")
    for entry in stack.entries:
        graph = stack.tier_graph(entry, g)
        table.add_row(entry.algorithm.label, entry.algorithm.kind.value, str(entry.algorithm.priority),
                      str(graph.order), str(graph.size))
    console.print(table)
    mode = 'shared' if stack.shared else 'hierarchical'
    console.print(f"[bold green]✓[/bold green] {g.order} columns, {len(stack)} tiers ({mode})")


@cli.command()
def info():
    """Display application information."""
    config = get_config()

    table = Table(title="Application Information")
    table.add_column("Property", style="cyan")
    table.add_column("Value", style="green")

    table.add_row("App Name", config.APP_NAME)
    table.add_row("Version", config.APP_VERSION)
    table.add_row("Debug Mode", str(config.DEBUG))
    table.add_row("Enumeration Cap", str(config.ENUMERATION_CAP))
    table.add_row("Max Moves Factor", str(config.MAX_MOVES_FACTOR))
    table.add_row("Default Scheduler", config.DEFAULT_SCHEDULER)
    table.add_row("Sweep Workers", str(config.SWEEP_WORKERS))
    table.add_row("Built-in Scenarios", ', '.join(sorted(BUILTIN_SCENARIOS)))

    console.print(table)


if __name__ == '__main__':
    cli()
