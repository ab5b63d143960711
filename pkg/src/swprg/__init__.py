"""PRG and HSG combinators for sliding-window branching programs, exact
verification oracles, and a PACA derandomization pipeline."""

__version__ = "0.1.0"
