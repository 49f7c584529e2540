"""This module contains the command line interfaces for the dyrex package."""


def cli():
    """Run a dyrex experiment; arguments are hydra overrides such as `subcommand=umd`."""
    from dyrex.experiments.run import run

    run()
