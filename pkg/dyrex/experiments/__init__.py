"""Experiment drivers writing JSON and CSV reports."""

from dyrex.experiments.run import RUNNERS, main, write_outputs
