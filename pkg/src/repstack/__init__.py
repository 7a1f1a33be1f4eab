"""Learning to commit in repeated Stackelberg games against followers with memory.

Modules: ``game`` (payoffs and follower responses), ``memory`` (reputation
models), ``lp`` and ``oracle`` (approximate commitment oracles), ``learner``
(FTPL variants), ``sim`` (episodes, regret curves, output) and ``cli``.
"""
__version__ = "0.1.0"
