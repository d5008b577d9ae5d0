"""Markov chains, jump processes, queues and Monte Carlo tools with exact rational oracles."""
