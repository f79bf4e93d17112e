"""
Seed sweeps: many independent runs of one scenario on an asyncio worker
queue backed by a process pool.
"""

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Sequence

from config import get_config
from graph_core import Graph
from protocols import State
from scenarios import RiskReport, risk_report
from stabilization_engine import (
    AlgorithmStack,
    Configuration,
    RunResult,
    SchedulerKind,
    SchedulerPolicy,
    all_out_configuration,
    enabled_processes,
    random_configuration,
    run_to_stabilization,
    split_seed,
)

logger = logging.getLogger(__name__)

INIT_MODES = ('all-out', 'random', 'adversarial-from-file')


@dataclass
class RunOutcome:
    """One seeded run with everything needed to report it."""

    seed: int
    scheduler: SchedulerKind
    initial: Configuration
    result: RunResult
    report: RiskReport

    def summary(self) -> 'RunSummary':
        waits = sum(
            1 for tier in self.report.states.values() for value in tier.values() if value == State.WAIT.value
        ) if self.result.stabilized else 0
        return RunSummary(
            seed=self.seed,
            scheduler=self.scheduler.value,
            stabilized=self.result.stabilized,
            livelock=self.result.livelock,
            moves=self.result.moves,
            steps=self.result.steps,
            wait_states=waits,
            bound_passed=self.report.bounds.passed,
            combined_bound=self.report.bounds.combined_bound,
            intersection=list(self.report.intersection),
            violations=list(self.report.violations),
            tiers=[tier.to_dict() for tier in self.report.bounds.tiers],
        )


@dataclass
class RunSummary:
    seed: int
    scheduler: str
    stabilized: bool
    livelock: bool
    moves: int
    steps: int
    wait_states: int
    bound_passed: bool
    combined_bound: int
    intersection: List[str] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)
    tiers: List[Dict[str, Any]] = field(default_factory=list)

    def to_row(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'scheduler': self.scheduler,
            'stabilized': self.stabilized,
            'livelock': self.livelock,
            'moves': self.moves,
            'steps': self.steps,
            'wait_states': self.wait_states,
            'bound_passed': self.bound_passed,
            'combined_bound': self.combined_bound,
            'intersection': '{' + ', '.join(self.intersection) + '}',
            'violations': len(self.violations),
        }

    def tier_rows(self) -> List[Dict[str, Any]]:
        return [{'seed': self.seed, 'scheduler': self.scheduler, **tier} for tier in self.tiers]

    def line(self) -> str:
        verdict = 'stabilized' if self.stabilized else ('livelock' if self.livelock else 'budget exhausted')
        bounds = 'bounds ok' if self.bound_passed else 'BOUND VIOLATION'
        return f"seed={self.seed} {verdict} moves={self.moves} {bounds} intersection={self.to_row()['intersection']}"


def initial_configuration(
    g: Graph,
    stack: AlgorithmStack,
    mode: str,
    seed: int,
    adversarial: Optional[Configuration] = None,
) -> Configuration:
    if mode == 'all-out':
        return all_out_configuration(g, stack)
    if mode == 'random':
        return random_configuration(g, stack, seed)
    if mode == 'adversarial-from-file':
        if adversarial is None:
            raise ValueError("adversarial initial mode needs a configuration")
        return adversarial
    raise ValueError(f"unknown initial mode {mode!r}; expected one of {INIT_MODES}")


def run_seed(
    g: Graph,
    stack: AlgorithmStack,
    seed: int,
    scheduler: Optional[SchedulerKind] = None,
    init: str = 'random',
    max_moves: Optional[int] = None,
    adversarial: Optional[Configuration] = None,
    scenario_name: str = 'scenario',
) -> RunOutcome:
    """
    Run once from a request seed.

    The seed is split into a scheduler seed and an initial-state seed so
    one number reproduces the whole run. The scheduler defaults to the
    active DEFAULT_SCHEDULER setting.
    """
    scheduler = SchedulerKind(scheduler or get_config().DEFAULT_SCHEDULER)
    scheduler_seed, init_seed = split_seed(seed)
    initial = initial_configuration(g, stack, init, init_seed, adversarial)
    policy = SchedulerPolicy(scheduler, scheduler_seed)
    result = run_to_stabilization(g, stack, initial, policy, max_moves=max_moves)
    report = risk_report(g, stack, result.final, result.trace, scenario_name)
    return RunOutcome(seed, scheduler, initial, result, report)


def guard_overlaps(g: Graph, stack: AlgorithmStack, outcome: RunOutcome) -> int:
    """Steps, replayed from the initial configuration, that found two rules enabled in one process."""
    overlaps = 0
    current = outcome.initial
    position = 0
    trace = outcome.result.trace
    while position < len(trace):
        index = trace[position].step
        if any(len(rules) > 1 for _, _, rules in enabled_processes(g, stack, current)):
            overlaps += 1
        updates = {}
        while position < len(trace) and trace[position].step == index:
            move = trace[position]
            updates[(move.node, stack.slot(move.algorithm))] = move.new
            position += 1
        current = current.replace(updates)
    return overlaps


class SweepRunner:
    """Seed sweep over an asyncio queue; each run executes in a worker process."""

    def __init__(
        self,
        g: Graph,
        stack: AlgorithmStack,
        scheduler: Optional[SchedulerKind] = None,
        init: str = 'random',
        max_moves: Optional[int] = None,
        adversarial: Optional[Configuration] = None,
        max_workers: Optional[int] = None,
        scenario_name: str = 'scenario',
    ):
        """
        Initialize the sweep.

        Args:
            g: Column graph
            stack: Protocol tiers, copied into each worker process
            scheduler: Daemon kind for every run; DEFAULT_SCHEDULER when None
            init: Initial-state mode
            max_moves: Per-run budget; engine default when None
            adversarial: Starting configuration for 'adversarial-from-file'
            max_workers: Concurrent worker processes; SWEEP_WORKERS when None
            scenario_name: Name carried into reports
        """
        self.g = g
        self.stack = stack
        settings = get_config()
        self.scheduler = SchedulerKind(scheduler or settings.DEFAULT_SCHEDULER)
        self.init = init
        self.max_moves = max_moves
        self.adversarial = adversarial
        self.max_workers = max(1, settings.SWEEP_WORKERS if max_workers is None else max_workers)
        self.scenario_name = scenario_name
        self.results: List[RunOutcome] = []
        self.failures: Dict[int, str] = {}

    def _job(self) -> Callable[[int], RunOutcome]:
        return partial(
            run_seed, self.g, self.stack,
            scheduler=self.scheduler, init=self.init, max_moves=self.max_moves,
            adversarial=self.adversarial, scenario_name=self.scenario_name,
        )

    def _log_overlaps(self, outcome: RunOutcome) -> None:
        if logger.isEnabledFor(logging.DEBUG):
            overlaps = guard_overlaps(self.g, self.stack, outcome)
            if overlaps:
                logger.debug(f"Seed {outcome.seed}: {overlaps} steps had a process with two enabled rules")

    async def worker(self, worker_id: int, queue: asyncio.Queue, executor: ProcessPoolExecutor):
        """
        Take seeds off the queue until it is empty.

        Args:
            worker_id: Worker identifier
            queue: Pending seeds
            executor: Process pool the runs execute on
        """
        loop = asyncio.get_running_loop()
        job = self._job()
        while True:
            try:
                seed = queue.get_nowait()
            except asyncio.QueueEmpty:
                break
            try:
                logger.debug(f"Worker {worker_id} running seed {seed}")
                outcome = await loop.run_in_executor(executor, job, seed)
                self._log_overlaps(outcome)
                self.results.append(outcome)
            except Exception as e:
                logger.error(f"Worker {worker_id} seed {seed} failed: {e}")
                self.failures[seed] = str(e)
            finally:
                queue.task_done()

    async def process_batch(self, seeds: Sequence[int]) -> List[RunOutcome]:
        """
        Run every seed with up to max_workers in flight.

        Returns:
            Outcomes sorted by seed
        """
        queue: asyncio.Queue = asyncio.Queue()
        for seed in seeds:
            queue.put_nowait(seed)

        with ProcessPoolExecutor(max_workers=self.max_workers) as executor:
            workers = [asyncio.create_task(self.worker(i, queue, executor)) for i in range(self.max_workers)]
            await queue.join()
            await asyncio.gather(*workers)

        self.results.sort(key=lambda outcome: outcome.seed)
        logger.info(f"Sweep finished: {len(self.results)} runs, {len(self.failures)} failures")
        return self.results

    def run(self, seeds: Sequence[int]) -> List[RunOutcome]:
        self.results = []
        self.failures = {}
        return asyncio.run(self.process_batch(seeds))

