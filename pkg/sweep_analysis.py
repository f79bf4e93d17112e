"""
Sweep analysis using pandas and numpy.
"""

import logging
from typing import Any, Dict, Sequence

import numpy as np
import pandas as pd

from sweep_runner import RunSummary
from utils import safe_divide

logger = logging.getLogger(__name__)


class SweepAnalyzer:
    """Tabulates seed-sweep results and checks them against the move bounds."""

    def __init__(self):
        """Initialize the analyzer."""
        self.runs = None
        self.tiers = None

    def load_summaries(self, summaries: Sequence[RunSummary]) -> pd.DataFrame:
        """
        Load run summaries into DataFrames.

        Args:
            summaries: One summary per run

        Returns:
            Per-run DataFrame; per-tier rows are kept in self.tiers
        """
        self.runs = pd.DataFrame([summary.to_row() for summary in summaries])
        self.tiers = pd.DataFrame([row for summary in summaries for row in summary.tier_rows()])
        logger.info(f"Loaded {len(self.runs)} runs")
        return self.runs

    def get_statistics(self) -> Dict[str, Any]:
        """
        Aggregate counts for the whole sweep.

        Returns:
            Dictionary with statistics
        """
        if self.runs is None or self.runs.empty:
            logger.warning("No runs loaded")
            return {}

        stabilized = int(self.runs['stabilized'].sum())
        return {
            'runs': int(len(self.runs)),
            'stabilized': stabilized,
            'stabilized_rate': round(safe_divide(stabilized, len(self.runs)), 3),
            'livelocks': int(self.runs['livelock'].sum()),
            'bound_failures': int((~self.runs['bound_passed']).sum()),
            'wait_states': int(self.runs['wait_states'].sum()),
            'invariant_violations': int(self.runs['violations'].sum()),
            'max_moves': int(self.runs['moves'].max()),
        }

    def bound_table(self) -> pd.DataFrame:
        """
        Max observed moves per tier against the largest bound seen.

        Returns:
            One row per tier label
        """
        if self.tiers is None or self.tiers.empty:
            logger.error("No tier data loaded")
            return pd.DataFrame()

        table = self.tiers.groupby('label', sort=False).agg(
            kind=('kind', 'first'),
            max_n=('n', 'max'),
            max_after_lower=('moves_after_lower', 'max'),
            max_checked=('checked_moves', 'max'),
            max_total=('total_moves', 'max'),
            max_bound=('bound', 'max'),
            violations=('passed', lambda passed: int((~passed.astype(bool)).sum())),
        ).reset_index()
        table['utilization'] = np.where(
            table['max_bound'] > 0,
            table['max_after_lower'] / table['max_bound'].clip(lower=1),
            0.0,
        ).round(3)
        return table

    def move_profile(self) -> pd.DataFrame:
        """
        Distribution of run lengths per scheduler.

        Returns:
            One row per scheduler: run count, mean, median, 95th percentile
            and max moves, mean steps, and the largest share of the
            combined bound any run used
        """
        if self.runs is None or self.runs.empty:
            logger.error("No runs loaded")
            return pd.DataFrame()

        runs = self.runs.assign(bound_share=self.runs['moves'] / self.runs['combined_bound'].clip(lower=1))
        profile = runs.groupby('scheduler', sort=False).agg(
            runs=('moves', 'size'),
            mean_moves=('moves', 'mean'),
            median_moves=('moves', 'median'),
            p95_moves=('moves', lambda moves: moves.quantile(0.95)),
            max_moves=('moves', 'max'),
            mean_steps=('steps', 'mean'),
            max_bound_share=('bound_share', 'max'),
        ).reset_index()
        logger.info(f"Move profile over {len(profile)} schedulers")
        return profile.round(3)

    def violations(self) -> pd.DataFrame:
        """Runs that failed to stabilize, broke a bound, or ended with wait states or invariant violations."""
        if self.runs is None:
            logger.error("No runs loaded")
            return pd.DataFrame()

        mask = (
            ~self.runs['stabilized']
            | ~self.runs['bound_passed']
            | (self.runs['wait_states'] > 0)
            | (self.runs['violations'] > 0)
        )
        flagged = self.runs[mask]
        if not flagged.empty:
            logger.warning(f"{len(flagged)} of {len(self.runs)} runs flagged")
        return flagged

