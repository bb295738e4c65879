"""
strainreal main script
Entry point for the isotropic realizability toolkit

Usage:
    python -m src.main realize local --stream "(x^2-y^2)/2" --center 0,0
    python -m src.main laminate check --E1 0,1,1,0 --E2 0,2,2,0 --xi 1,0
    python -m src.main --preset global-counterexample
"""

import sys

from src.realizability.strainreal.configs.settings import load_env
from src.realizability.strainreal.pipeline.orchestrator import run


def main():
    """Main entry point; exits with the code of the command"""
    # Load environment variables
    load_env()

    try:
        code = run()
    except KeyboardInterrupt:
        print("\nRun interrupted by user")
        code = 1
    sys.exit(code)


if __name__ == "__main__":
    main()
