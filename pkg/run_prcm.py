#!/usr/bin/env python3
"""Runner for the PRCM command-line driver from a source checkout.

Usage:
    python3 run_prcm.py [--config FILE] <subcommand> [flags]

Example:
    python3 run_prcm.py verify-duality --box 0,2x0,2
    python3 run_prcm.py --config config/experiment.yaml sample
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))

try:
    from prcm.cli import main
except ImportError as e:
    print(f"Error: Could not import the prcm package. {e}")
    print("Make sure to install PRCM with: pip install -e .")
    sys.exit(1)


if __name__ == "__main__":
    sys.exit(main())
