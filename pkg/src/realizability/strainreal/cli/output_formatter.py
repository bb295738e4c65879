# src/realizability/strainreal/cli/output_formatter.py
from .. import __version__


def print_header(command: str):
    """Print initial banner for one run"""
    print("-" * 40)
    print(f"    strainreal {__version__} - {command}")
    print("-" * 40)


def print_run_info(storage_label: str, threads: int, seed: int):
    """Print process configuration information"""
    print(f"Storage:              {storage_label}")
    print(f"Worker threads:       {threads}")
    print(f"Seed:                 {seed}")
    print()


def print_command_summary(command: str, summary: dict):
    """
    Print the headline numbers of a finished command

    Args:
        command: Command name, e.g. 'realize local'
        summary: Flat dictionary of labels to values
    """
    print("\n" + "-" * 40)
    print(f"         {command.upper()} COMPLETED        ")
    print("-" * 40)
    for label, value in summary.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        print(f"{label + ':':<22}{value}")


def print_artifacts(output_dir: str, command_slug: str, locations: list):
    """Print where the artifacts of the run were written"""
    print(f"\nArtifacts saved in: {output_dir}/{command_slug}/")
    print("-" * 40)
    for i, location in enumerate(locations):
        branch = "└──" if i == len(locations) - 1 else "├──"
        print(f" {branch}  {location.rsplit('/', 1)[-1]}")
    print("-" * 40)


def print_rejection(kind: str, message: str, exit_code: int):
    """Print a failed run: hypothesis violated (2), numerics (1) or usage (64)"""
    print("\n" + "-" * 40)
    print(f"         {kind.upper()} (exit {exit_code})        ")
    print("-" * 40)
    print(message)
