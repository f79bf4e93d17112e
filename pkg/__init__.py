"""
ipstab - self-stabilizing white/blacklist, maximal independent set and
1-minimal dominating set protocols for manufacturing-hall IP-risk scenarios.

Modules are installed flat (see setup.py); import them directly, e.g.
``from stabilization_engine import run_to_stabilization``.
"""

__version__ = '1.0.0'
__author__ = 'ipstab developers'

__all__ = [
    'graph_core',
    'protocols',
    'stabilization_engine',
    'oracles',
    'scenarios',
    'sweep_runner',
    'sweep_analysis',
    'cli',
    'config',
    'utils',
]
