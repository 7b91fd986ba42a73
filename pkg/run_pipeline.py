#!/usr/bin/env python3
"""
Co-evolution Mapper - Main Entry Point

Runs the analysis pipeline over tagged publication exports and award tables.

Usage:
    python run_pipeline.py all --config data/sample/sample.cfg
    python run_pipeline.py burst --gamma 2 --top-n 10
    python run_pipeline.py --help
"""

import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from coevo_mapper.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
